//! Verification harness: the functor DSL, the scenario catalog and report
//! serialization.

pub mod dsl;
pub mod report;
pub mod scenarios;

pub use dsl::{parse_expr, parse_expr_file, DslError};
pub use report::{Check, Report};
pub use scenarios::{run_all, run_scenario, Config, CATALOG};
