use std::f64::consts::PI;
use std::sync::Arc;

use lab_core::evolve::{adjoint_principal, contraction_margin, parabolic_evolve, Source, TimeSource};
use lab_core::GridFunction;
use rand::Rng;

use super::{operator, random_grid, unit_interval, unit_square, Run};
use crate::config::ExperimentConfig;
use crate::error::LabError;
use crate::report::Check;
use crate::svg::{Plot, Series};

pub(super) fn configure(c: &mut ExperimentConfig) {
    c.mesh.cells = 1000;
    c.mesh.cells_2d = 32;
}

fn step_error(e: lab_core::evolve::StepError<f64>) -> LabError {
    LabError::Solver(e.source)
}

pub(super) fn run(run: &mut Run) -> Result<(), LabError> {
    let cfg = run.config;
    let p = &cfg.potential;
    let (t_final, steps) = (cfg.time.t_final, cfg.time.steps);
    let tol = cfg.tolerances.margin;

    let cases = [
        (unit_interval(cfg.mesh.cells)?, 0.0),
        (unit_square(cfg.mesh.cells_2d)?, cfg.flow.amplitude),
    ];
    let mut pair_rows = Vec::new();
    let mut worst = f64::INFINITY;
    let mut all_pass = true;
    let mut pairs = 0usize;
    for (case, (mesh, amplitude)) in cases.iter().enumerate() {
        let op = operator(mesh, p.strength, p.exponent, p.truncation, *amplitude)?;
        let psi = adjoint_principal(&op)?.psi;
        let reports = run.trials(100 * case as u64, cfg.trials, |k, rng| {
            let alpha = cfg.alpha[k % cfg.alpha.len()];
            let mut source = || -> Source<f64> {
                let a = random_grid(mesh, rng, -1.0, 1.0);
                if rng.gen_bool(0.5) {
                    let b = random_grid(mesh, rng, -1.0, 1.0);
                    let f: TimeSource<f64> = Arc::new(move |t: f64| a.axpy(t / t_final, &b).expect("same mesh"));
                    Source::Time(f)
                } else {
                    Source::Steady(a)
                }
            };
            let (fa, fb) = (source(), source());
            let ua = random_grid(mesh, rng, -1.0, 1.0);
            let ub = random_grid(mesh, rng, -1.0, 1.0);
            let a = parabolic_evolve(&op, &ua, &fa, t_final, steps, alpha).map_err(step_error)?;
            let b = parabolic_evolve(&op, &ub, &fb, t_final, steps, alpha).map_err(step_error)?;
            let r = contraction_margin(&a, &b, alpha, &psi)?;
            let min = r.margins.iter().copied().fold(f64::INFINITY, f64::min);
            Ok((alpha, r.pass, min / r.scale, r.scale))
        })?;
        for (k, (alpha, pass, m, scale)) in reports.into_iter().enumerate() {
            pairs += 1;
            all_pass &= pass;
            worst = worst.min(m);
            pair_rows.push(vec![mesh.dim() as f64, k as f64, alpha, m, scale]);
        }
    }
    run.check(
        Check::new("pair-contraction", all_pass)
            .metric("pairs", pairs as f64)
            .metric("steps", steps as f64)
            .metric("min_margin_over_scale", worst)
            .metric("tolerance", tol),
    );

    let mesh = unit_interval(cfg.mesh.cells)?;
    let heat = operator(&mesh, 0.0, 0.0, f64::INFINITY, 0.0)?;
    let u0 = GridFunction::<f64>::from_fn(&mesh, |x| (PI * x[0]).sin());
    let traj = parabolic_evolve(&heat, &u0, &Source::Zero, t_final, steps, 1.0).map_err(step_error)?;
    let decay = (-PI * PI * t_final).exp();
    let exact = u0.scaled(decay);
    let err = traj.final_state().sub(&exact)?.max_abs() / exact.max_abs();
    run.check(
        Check::new("heat-mode", err <= cfg.tolerances.heat)
            .metric("relative_sup_error", err)
            .metric("t_final", t_final)
            .metric("steps", steps as f64)
            .metric("tolerance", cfg.tolerances.heat),
    );

    run.csv("pairs.csv", &["dim", "trial", "alpha", "min_margin_over_scale", "scale"], &pair_rows)?;
    let stride = (steps / 200).max(1);
    let rows: Vec<Vec<f64>> = traj
        .times
        .iter()
        .zip(&traj.states)
        .step_by(stride)
        .map(|(&t, s)| vec![t, s.max_abs(), (-PI * PI * t).exp()])
        .collect();
    run.csv("heat.csv", &["t", "sup_u", "exact_sup"], &rows)?;
    run.svg(
        "heat.svg",
        Plot::new("heat-mode decay", "t", "‖u(t)‖∞")
            .log_y()
            .with(Series::line("implicit Euler", rows.iter().map(|r| (r[0], r[1])).collect()))
            .with(Series::line("e^{−π²t}", rows.iter().map(|r| (r[0], r[2])).collect())),
    )
}
