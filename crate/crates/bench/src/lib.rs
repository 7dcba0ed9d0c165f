//! Criterion benchmarks for `metastable-core`; see `benches/`.
