//! Benchmark-only crate; see `benches/spectral.rs` for the measured kernels.
