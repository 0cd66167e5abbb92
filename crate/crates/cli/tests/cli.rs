use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn subjective(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subjective"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = subjective(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn code(args: &[&str]) -> i32 {
    subjective(args).status.code().expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth_dataset(dir: &Path, name: &str, seed: &str) -> PathBuf {
    let path = dir.join(name);
    ok(&[
        "synth",
        "--subjects",
        "8",
        "--videos",
        "20",
        "--contents",
        "4",
        "--seed",
        seed,
        "--out",
        p(&path),
    ]);
    path
}

#[test]
fn recover_writes_identical_files_for_every_method() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth_dataset(dir.path(), "data.csv", "3");
    for method in ["mos", "sr-mos", "zs-sr-mos", "mle"] {
        let a = dir.path().join(format!("{method}-a.json"));
        let b = dir.path().join(format!("{method}-b.json"));
        ok(&["recover", p(&data), "--method", method, "--out", p(&a)]);
        ok(&["recover", p(&data), "--method", method, "--out", p(&b)]);
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap(), "{method}");
        let text = fs::read_to_string(&a).unwrap();
        assert!(text.contains(&format!("\"method\": \"{method}\"")));
    }
    let mle = fs::read_to_string(dir.path().join("mle-a.json")).unwrap();
    assert!(mle.contains("\"subjects\"") && mle.contains("\"converged\": true"));
}

#[test]
fn synth_is_seeded_and_can_reuse_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let a = synth_dataset(dir.path(), "a.csv", "5");
    let b = synth_dataset(dir.path(), "b.csv", "5");
    let c = synth_dataset(dir.path(), "c.csv", "6");
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());

    let truth = dir.path().join("truth.json");
    let d = dir.path().join("d.json");
    ok(&[
        "synth",
        "--subjects",
        "8",
        "--videos",
        "20",
        "--contents",
        "4",
        "--seed",
        "5",
        "--params-out",
        p(&truth),
        "--out",
        p(&d),
    ]);
    let e = dir.path().join("e.json");
    ok(&[
        "synth",
        "--subjects",
        "8",
        "--videos",
        "20",
        "--contents",
        "4",
        "--seed",
        "5",
        "--params",
        p(&truth),
        "--out",
        p(&e),
    ]);
    assert_eq!(fs::read(&d).unwrap(), fs::read(&e).unwrap());
    let wrong = [
        "synth",
        "--subjects",
        "9",
        "--videos",
        "20",
        "--contents",
        "4",
        "--seed",
        "5",
        "--params",
        p(&truth),
        "--out",
        p(&e),
    ];
    assert_eq!(code(&wrong), 2);
}

#[test]
fn seed_is_mandatory() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth_dataset(dir.path(), "data.csv", "1");
    let out = dir.path().join("out.csv");
    assert_eq!(
        code(&[
            "corrupt",
            p(&data),
            "--mode",
            "random",
            "--prob",
            "0.2",
            "--out",
            p(&out)
        ]),
        2
    );
    assert_eq!(
        code(&[
            "synth",
            "--subjects",
            "3",
            "--videos",
            "3",
            "--contents",
            "1",
            "--out",
            p(&out)
        ]),
        2
    );
}

#[test]
fn corrupt_modes() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth_dataset(dir.path(), "data.csv", "2");
    let scrambled = dir.path().join("scrambled.csv");
    ok(&[
        "corrupt",
        p(&data),
        "--mode",
        "subjects",
        "--count",
        "2",
        "--seed",
        "4",
        "--out",
        p(&scrambled),
    ]);
    assert_ne!(fs::read(&data).unwrap(), fs::read(&scrambled).unwrap());
    let replaced = dir.path().join("replaced.csv");
    ok(&[
        "corrupt",
        p(&data),
        "--mode",
        "random",
        "--prob",
        "1",
        "--seed",
        "4",
        "--out",
        p(&replaced),
    ]);
    let text = fs::read_to_string(&replaced).unwrap();
    for line in text.lines().skip(1) {
        for cell in line.split(',').skip(2) {
            assert!(["1", "2", "3", "4", "5"].contains(&cell), "{cell}");
        }
    }
    assert_eq!(
        code(&[
            "corrupt",
            p(&data),
            "--mode",
            "subjects",
            "--seed",
            "4",
            "--out",
            p(&replaced)
        ]),
        2
    );
}

#[test]
fn reject_reports_tallies() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth_dataset(dir.path(), "data.csv", "7");
    let out = dir.path().join("reject.json");
    ok(&["reject", p(&data), "--out", p(&out)]);
    let text = fs::read_to_string(&out).unwrap();
    for key in ["\"rejected\"", "\"p\"", "\"q\""] {
        assert!(text.contains(key), "{key} missing");
    }
}

#[test]
fn experiment_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth_dataset(dir.path(), "data.csv", "8");
    let run = |name: &str| {
        let out = dir.path().join(name);
        ok(&[
            "experiment",
            p(&data),
            "--kind",
            "selective-sampling",
            "--methods",
            "mos,mle",
            "--reps",
            "4",
            "--seed",
            "11",
            "--conditions",
            "1.0,0.6",
            "--out",
            p(&out),
        ]);
        fs::read(out).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    let text = String::from_utf8(a).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "method,condition,rmse_mean,rmse_std,repetitions,dropped"
    );
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("mos,") && lines[4].starts_with("mle,"));
}

#[test]
fn experiment_default_conditions_and_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    let truth = dir.path().join("truth.json");
    ok(&[
        "synth",
        "--subjects",
        "8",
        "--videos",
        "20",
        "--contents",
        "4",
        "--seed",
        "9",
        "--params-out",
        p(&truth),
        "--out",
        p(&data),
    ]);
    let out = dir.path().join("plot.csv");
    ok(&[
        "experiment",
        p(&data),
        "--kind",
        "subject-corruption",
        "--methods",
        "mos",
        "--reps",
        "3",
        "--seed",
        "1",
        "--truth",
        p(&truth),
        "--out",
        p(&out),
    ]);
    let text = fs::read_to_string(&out).unwrap();
    // Zero to eight scrambled subjects.
    assert_eq!(text.lines().count(), 10);
    // Against the true qualities even the undegraded condition has error.
    let first: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert!(first[2].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.json");

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "video,content,s1,s2\nv1,c1,3,oops\nv2,c1,4,5\n").unwrap();
    assert_eq!(
        code(&["recover", p(&bad), "--method", "mos", "--out", p(&out)]),
        2
    );

    let empty_row = dir.path().join("empty.csv");
    fs::write(&empty_row, "video,content,s1,s2\nv1,c1,*,*\nv2,c1,4,5\n").unwrap();
    let res = subjective(&[
        "recover",
        p(&empty_row),
        "--method",
        "mos",
        "--out",
        p(&out),
    ]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("v1"));

    let constant = dir.path().join("constant.csv");
    fs::write(&constant, "video,content,s1,s2\nv1,c1,3,2\nv2,c1,3,5\n").unwrap();
    assert_eq!(
        code(&[
            "recover",
            p(&constant),
            "--method",
            "zs-sr-mos",
            "--out",
            p(&out)
        ]),
        3
    );

    let data = synth_dataset(dir.path(), "data.csv", "10");
    let capped = [
        "recover",
        p(&data),
        "--method",
        "mle",
        "--max-iter",
        "2",
        "--out",
        p(&out),
    ];
    assert_eq!(code(&capped), 0);
    let mut strict = capped.to_vec();
    strict.push("--require-convergence");
    assert_eq!(code(&strict), 4);
    assert!(out.exists());

    assert_eq!(
        code(&[
            "recover",
            p(&data),
            "--method",
            "mle",
            "--alpha",
            "0",
            "--out",
            p(&out)
        ]),
        2
    );
    let missing = dir.path().join("missing.csv");
    assert_eq!(
        code(&["recover", p(&missing), "--method", "mos", "--out", p(&out)]),
        2
    );
}
