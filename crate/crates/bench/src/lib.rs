//! Criterion benchmarks for shearflow; see `benches/`.
