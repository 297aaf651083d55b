//! Data loading, synthetic instances, configuration, experiments and reports.

pub mod config;
pub mod experiments;
pub mod io;
pub mod report;
pub mod synthetic;

pub use config::{Config, Family, PairStrategy};
pub use experiments::{
    build_pair, load_instances, reference_solution, run_ball_comparison, run_dynamic_screening,
    BallRecord, CellRecord, DynamicRecord, ExperimentReport, Instance,
};
pub use io::{load_instance, parse_csv, parse_libsvm, Dataset, InstanceSource};
pub use report::{emit_report, parse_report_json, render_report, to_stable_json, ReportFormat};
pub use synthetic::{generate, SyntheticSpec};
