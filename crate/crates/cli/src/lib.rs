//! Random generators, property suites and reporting for the synthetic
//! calculus engine. The `fncalc` binary wraps [`suite::run_suite`] and the
//! direct compute commands.

pub mod gen;
pub mod report;
pub mod suite;
