//! Criterion benchmarks for `bilinear-core`; see `benches/`.
