//! Benchmarks for the `binrd` solvers live in `benches/`.
