//! Criterion benchmarks for `heatframes`; see `benches/`.
