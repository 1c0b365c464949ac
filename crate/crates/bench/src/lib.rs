//! Criterion benchmarks for the search, synthesis, and evolution pipeline.
//! Run with `cargo bench -p stabgs-bench`.
