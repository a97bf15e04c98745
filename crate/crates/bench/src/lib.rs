//! Criterion benchmarks for the mining and learning pipeline; see
//! `benches/pipeline.rs`.
