//! Benchmarks for mapdr-core live under `benches/`.
