//! Scenarios, experiment runs, baselines and run-directory outputs.

pub mod experiment;
pub mod output;
pub mod scenario;

pub use experiment::{
    baseline_policies, environment, relative_indicator, run, run_baseline, run_sweep, IndicatorCell, Metric,
    RelativeIndicatorReport, RunOutput, SecrecyCache, Timings,
};
pub use output::{emit_outputs, read_trace, report_dir, write_trace, LoadedRun, Manifest, ManifestEntry};
pub use scenario::{Preset, ScenarioConfig};
