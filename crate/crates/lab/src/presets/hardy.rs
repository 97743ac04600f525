use std::f64::consts::PI;

use lab_core::rearrange::hardy_quotient;
use lab_core::GridFunction;

use super::{unit_interval, Run};
use crate::config::ExperimentConfig;
use crate::error::LabError;
use crate::report::Check;
use crate::svg::{Plot, Series};

pub(super) fn configure(c: &mut ExperimentConfig) {
    c.trials = 50;
    c.mesh.cells = 400;
}

/// Member `k` of the corpus: `sin(mπx)(1 + a·x)` for ten frequencies and
/// five slopes.
fn corpus(k: usize) -> (f64, f64) {
    let m = (k % 10 + 1) as f64;
    let a = [0.0, 0.25, 0.5, -0.25, -0.5][(k / 10) % 5];
    (m, a)
}

pub(super) fn run(run: &mut Run) -> Result<(), LabError> {
    let cfg = run.config;
    let coarse = unit_interval(cfg.mesh.cells)?;
    let fine = unit_interval(2 * cfg.mesh.cells)?;
    let ids: Vec<usize> = (0..cfg.trials).collect();
    let quotients = run.sweep(&ids, |&k| {
        let (m, a) = corpus(k);
        let f = |x: [f64; 2]| (m * PI * x[0]).sin() * (1.0 + a * x[0]);
        let q0 = hardy_quotient(&GridFunction::<f64>::from_fn(&coarse, f))?;
        let q1 = hardy_quotient(&GridFunction::<f64>::from_fn(&fine, f))?;
        Ok((m, a, q0, q1))
    })?;
    let finite = quotients.iter().all(|q| q.2.is_finite() && q.3.is_finite());
    let max = quotients.iter().map(|q| q.3).fold(0.0, f64::max);
    let spread = quotients.iter().map(|q| (q.3 / q.2 - 1.0).abs()).fold(0.0, f64::max);
    run.check(
        Check::new("bounded", finite)
            .metric("max_quotient", max)
            .metric("functions", quotients.len() as f64),
    );
    run.check(
        Check::new("refinement-stable", spread <= cfg.tolerances.hardy)
            .metric("max_relative_change", spread)
            .metric("tolerance", cfg.tolerances.hardy),
    );
    let rows: Vec<Vec<f64>> = quotients.iter().enumerate().map(|(k, q)| vec![k as f64, q.0, q.1, q.2, q.3]).collect();
    run.csv("hardy.csv", &["function", "frequency", "slope", "quotient_n", "quotient_2n"], &rows)?;
    run.svg(
        "hardy.svg",
        Plot::new("Hardy quotient", "function", "∫|u|/δ ÷ ‖u′‖∞")
            .with(Series::scatter("N", rows.iter().map(|r| (r[0], r[3])).collect()))
            .with(Series::scatter("2N", rows.iter().map(|r| (r[0], r[4])).collect())),
    )
}
