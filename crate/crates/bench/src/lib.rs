//! Criterion benchmarks for the simulator kernels. See `benches/kernels.rs`.
