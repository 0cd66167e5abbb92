//! Criterion benchmarks for the solver and baselines; see `benches/`.
