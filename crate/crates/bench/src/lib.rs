//! Criterion benchmarks for the sampler, enumeration oracles and moment formulas live in `benches/`.
