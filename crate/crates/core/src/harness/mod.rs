//! Bound evaluators, seeded instance generators and sweep experiments.

pub mod bounds;
pub mod instances;
pub mod sweep;

pub use bounds::{BoundId, BoundParams, BoundSpec, BoundTerms, Hypothesis};
pub use instances::{generate_instance, Instance, InstanceKind};
pub use sweep::{
    check_regression, format_baseline, max_ratios, parse_baseline, render_rows, sweep, write_rows,
    OutputFormat, PointGenerator, SizeSpec, SweepConfig, SweepRow,
};
