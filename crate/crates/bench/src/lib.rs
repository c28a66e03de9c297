//! Benchmark targets live under `benches/`.
