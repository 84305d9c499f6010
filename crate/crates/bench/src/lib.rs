//! Criterion benchmarks for the `ipwvar` library; see `benches/`.
