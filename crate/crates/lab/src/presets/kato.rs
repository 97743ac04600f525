use lab_core::linalg::SolverOptions;
use lab_core::stationary::{kato_margin, make_cutoff_test};
use rand::Rng;

use super::{operator, random_grid, smooth_bump, unit_interval, unit_square, Run};
use crate::config::ExperimentConfig;
use crate::error::LabError;
use crate::report::Check;
use crate::svg::{Plot, Series};

pub(super) fn configure(c: &mut ExperimentConfig) {
    c.trials = 50;
}

pub(super) fn run(run: &mut Run) -> Result<(), LabError> {
    let cfg = run.config;
    let tol = cfg.tolerances.margin;
    let results = run.trials(0, cfg.trials, |k, rng| {
        let (mesh, flow) = if k % 2 == 0 {
            (unit_interval(rng.gen_range(50..=400))?, 0.0)
        } else {
            (unit_square(rng.gen_range(12..=32))?, rng.gen_range(0.0..=cfg.flow.amplitude))
        };
        let c = rng.gen_range(0.5..10.0);
        let r = [2.0, 3.0][rng.gen_range(0..2)];
        let f = random_grid(&mesh, rng, -1.0, 1.0);
        let (op, u_bar, rhs) = if k % 3 == 2 {
            // Difference of two truncation levels: A₁(u₁ − u₂) = (V₂ − V₁)u₂.
            let j1 = 10f64.powf(rng.gen_range(1.0..3.0));
            let j2 = j1 * 10f64.powf(rng.gen_range(0.5..2.0));
            let op1 = operator(&mesh, c, r, j1, flow)?;
            let op2 = operator(&mesh, c, r, j2, flow)?;
            let u1 = op1.factor(SolverOptions::default())?.solve(&f)?;
            let u2 = op2.factor(SolverOptions::default())?.solve(&f)?;
            let dv = op2.potential().sub(op1.potential())?;
            let rhs = dv.zip_map(&u2, |a, b| a * b)?;
            (op1, u1.sub(&u2)?, rhs)
        } else {
            let op = operator(&mesh, c, r, cfg.potential.truncation, flow)?;
            let u = op.factor(SolverOptions::default())?.solve(&f)?;
            (op, u, f)
        };
        let bump = smooth_bump(&mesh, rng);
        // The cutoff band 1/j must span at least three cells.
        let cap = (1.0 / (3.0 * mesh.max_spacing())).min(40.0);
        let phi = if cap > 8.0 && rng.gen_bool(0.3) {
            make_cutoff_test(&bump, rng.gen_range(8.0..cap), &mesh)?.values().clone()
        } else {
            bump
        };
        let m = kato_margin(&op, &u_bar, &phi, &rhs)?;
        Ok((mesh.dim(), flow, m.lhs, m.rhs, m.margin, m.scale))
    })?;
    let worst = results.iter().map(|r| r.4 / r.5).fold(f64::INFINITY, f64::min);
    let pass = results.iter().all(|r| r.4 >= -tol * r.5);
    run.check(
        Check::new("kato-margin", pass)
            .metric("pairs", results.len() as f64)
            .metric("min_margin_over_scale", worst)
            .metric("tolerance", tol),
    );
    let rows: Vec<Vec<f64>> = results
        .iter()
        .enumerate()
        .map(|(k, r)| vec![k as f64, r.0 as f64, r.1, r.2, r.3, r.4, r.5])
        .collect();
    run.csv("kato.csv", &["trial", "dim", "flow_amplitude", "lhs", "rhs", "margin", "scale"], &rows)?;
    run.svg(
        "kato.svg",
        Plot::new("Kato margin", "trial", "margin ÷ scale")
            .with(Series::scatter("margin", rows.iter().map(|r| (r[0], r[5] / r[6])).collect())),
    )
}
