//! Criterion benchmarks for the resampling core; see `benches/resampling.rs`.
