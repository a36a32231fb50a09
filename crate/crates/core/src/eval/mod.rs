//! Success oracle, coverage, success-coverage curves and the ablation benchmark.

mod bench;
mod metrics;
mod oracle;

pub use bench::{
    benchmark_scene, heldout_library, run_ablation, BenchmarkReport, Collider, Labeling, SamplerKind, SceneRecord, Variant, VariantResult,
    VariantSummary,
};
pub use metrics::{
    auc, coverage, curve_sweep, paired_bootstrap, BootstrapInterval, OperatingPoint, SuccessCoverageCurve,
    DEFAULT_COVERAGE_RADIUS,
};
pub use oracle::{success_oracle, success_outcomes, success_rate, SuccessRate};
