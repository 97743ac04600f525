use lab_core::model::{FlowSpec, PotentialSpec};
use lab_core::stationary::{solve_truncated_sequence, SequenceOptions};
use lab_core::GridFunction;

use super::{unit_interval, Run};
use crate::config::ExperimentConfig;
use crate::error::LabError;
use crate::report::Check;
use crate::svg::{Plot, Series};

pub(super) fn configure(c: &mut ExperimentConfig) {
    c.mesh.cells = 2000;
}

pub(super) fn run(run: &mut Run) -> Result<(), LabError> {
    let cfg = run.config;
    let mesh = unit_interval(cfg.mesh.cells)?;
    let spec = PotentialSpec::new(cfg.potential.strength, cfg.potential.exponent)?;
    let f = GridFunction::<f64>::from_fn(&mesh, |_| 1.0);
    let options = SequenceOptions {
        convergence_tolerance: cfg.tolerances.cauchy,
        ..SequenceOptions::default()
    };
    let seq = solve_truncated_sequence(&mesh, &spec, &FlowSpec::Zero, &f, &cfg.potential.j_schedule, &options)
        .map_err(|e| LabError::Solver(e.source))?;
    let sup = seq.last().map_or(0.0, |u| u.max_abs());
    let diffs: Vec<f64> = seq.diagnostics.iter().filter_map(|d| d.successive_difference).collect();
    let monotone = diffs.windows(2).all(|w| w[1] < w[0]);
    let last = diffs.last().copied().unwrap_or(f64::NAN);
    let relative = last / sup;
    run.check(
        Check::new("monotone-differences", diffs.len() + 1 == seq.j_schedule.len() && monotone)
            .metric("levels", seq.j_schedule.len() as f64)
            .metric("first_difference", diffs.first().copied().unwrap_or(f64::NAN) / sup),
    );
    run.check(
        Check::new("final-difference", relative <= cfg.tolerances.cauchy)
            .metric("final_relative_difference", relative)
            .metric("sup_norm", sup)
            .metric("tolerance", cfg.tolerances.cauchy),
    );
    let c = seq.estimate_constant();
    run.check(Check::new("single-constant", c.is_finite()).metric("estimate_constant", c));

    let rows: Vec<Vec<f64>> = seq
        .diagnostics
        .iter()
        .map(|d| {
            let diff = d.successive_difference.unwrap_or(f64::NAN);
            vec![d.j, diff, diff / sup, d.weighted_potential, d.weighted_source, d.estimate_ratio()]
        })
        .collect();
    run.csv(
        "sequence.csv",
        &["j", "sup_difference", "relative_difference", "weighted_potential", "weighted_source", "ratio"],
        &rows,
    )?;
    run.svg(
        "sequence.svg",
        Plot::new("successive differences of truncated solutions", "j", "‖u_j − u_prev‖∞ / ‖u‖∞")
            .log_log()
            .with(Series::line("measured", rows.iter().map(|r| (r[0], r[2])).collect()))
            .with(Series::line("tolerance", rows.iter().map(|r| (r[0], cfg.tolerances.cauchy)).collect())),
    )
}
