//! Benchmark-only crate; see `benches/kernels.rs`. Re-exports the core
//! crate so benchmarks have a single import root.

pub use hsdenoise_core as core;
