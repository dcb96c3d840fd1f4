//! Exact-arithmetic experiments on height growth along orbits of rational
//! self-maps over Q.

pub mod arith;
pub mod poly;
pub mod orbit;
pub mod report;
pub mod density;
pub mod dfinite;
pub mod schanuel;
pub mod commuting;
pub mod dml;
pub mod jobs;
pub mod catalog;
