//! Criterion benchmarks for `haarclt`; see `benches/`.
