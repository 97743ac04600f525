use lab_core::linalg::SolverOptions;
use lab_core::stationary::maximum_principle_check;
use lab_core::GridFunction;
use rand::Rng;

use super::{operator, random_grid, unit_interval, unit_square, Run};
use crate::config::ExperimentConfig;
use crate::error::LabError;
use crate::report::Check;
use crate::svg::{Plot, Series};

/// Largest system whose inverse is formed column by column.
const DENSE_LIMIT: usize = 50;

pub(super) fn configure(c: &mut ExperimentConfig) {
    c.trials = 50;
}

struct Outcome {
    cells: usize,
    flow: f64,
    normalized_max: f64,
    pass: bool,
    /// `min (A⁻¹)_{ij} ÷ max (A⁻¹)_{ij}` for small systems.
    inverse_ratio: Option<f64>,
}

pub(super) fn run(run: &mut Run) -> Result<(), LabError> {
    let cfg = run.config;
    let tol = cfg.tolerances.max_principle;
    let outcomes = run.trials(0, cfg.trials, |k, rng| {
        let kind = k % 4;
        let mesh = match kind {
            0 => unit_interval(rng.gen_range(20..=400))?,
            1 | 2 => unit_square(rng.gen_range(8..=40))?,
            _ => {
                if rng.gen_bool(0.5) {
                    unit_interval(rng.gen_range(10..=DENSE_LIMIT))?
                } else {
                    unit_square(7)?
                }
            }
        };
        let flow = if mesh.dim() == 2 && kind != 1 { rng.gen_range(0.0..=cfg.flow.amplitude) } else { 0.0 };
        let c = rng.gen_range(0.0..10.0);
        let r = [2.0, 2.5, 3.0][rng.gen_range(0..3)];
        let op = operator(&mesh, c, r, cfg.potential.truncation, flow)?;
        let mut f = random_grid(&mesh, rng, -1.0, 0.0);
        for v in f.values_mut() {
            if rng.gen_bool(0.2) {
                *v = 0.0;
            }
        }
        let report = maximum_principle_check(&op, &f)?;
        let scale = f.max_abs();
        let inverse_ratio = if mesh.len() <= DENSE_LIMIT {
            let solver = op.factor(SolverOptions::default())?;
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for i in 0..mesh.len() {
                let mut e = GridFunction::zeros(&mesh);
                e.values_mut()[i] = 1.0;
                let col = solver.solve(&e)?;
                lo = lo.min(col.min());
                hi = hi.max(col.max());
            }
            Some(lo / hi)
        } else {
            None
        };
        Ok(Outcome {
            cells: mesh.len(),
            flow,
            normalized_max: if scale > 0.0 { report.max_value / scale } else { report.max_value },
            pass: report.max_value <= tol * scale,
            inverse_ratio,
        })
    })?;
    let worst = outcomes.iter().map(|o| o.normalized_max).fold(f64::NEG_INFINITY, f64::max);
    let with_flow = outcomes.iter().filter(|o| o.flow > 0.0).count();
    run.check(
        Check::new("max-principle", outcomes.iter().all(|o| o.pass))
            .metric("configurations", outcomes.len() as f64)
            .metric("with_flow", with_flow as f64)
            .metric("max_u_over_f", worst)
            .metric("tolerance", tol),
    );
    let small: Vec<f64> = outcomes.iter().filter_map(|o| o.inverse_ratio).collect();
    let min_ratio = small.iter().copied().fold(f64::INFINITY, f64::min);
    run.check(
        Check::new("inverse-positivity", !small.is_empty() && min_ratio >= -1e-12)
            .metric("cross_checked", small.len() as f64)
            .metric("min_inverse_entry_ratio", min_ratio),
    );
    let rows: Vec<Vec<f64>> = outcomes
        .iter()
        .enumerate()
        .map(|(k, o)| vec![k as f64, o.cells as f64, o.flow, o.normalized_max, o.inverse_ratio.unwrap_or(f64::NAN)])
        .collect();
    run.csv("maxprinciple.csv", &["trial", "cells", "flow_amplitude", "max_u_over_f", "inverse_min_over_max"], &rows)?;
    run.svg(
        "maxprinciple.svg",
        Plot::new("maximum principle", "trial", "max u ÷ ‖f‖∞")
            .with(Series::scatter("max u", rows.iter().map(|r| (r[0], r[3])).collect())),
    )
}
