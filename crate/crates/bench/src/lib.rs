//! Criterion benchmarks for the affect-probe core; see `benches/`.
