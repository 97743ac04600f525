use lab_core::spectral::{
    boundary_profile, default_window, exponential_fit, flatness_fit, indicial_exponent, principal_eigenpair, wkb_rate, EigenOptions,
};

use super::{operator, relative_error, unit_interval, Run};
use crate::config::ExperimentConfig;
use crate::error::LabError;
use crate::report::Check;
use crate::svg::{Plot, Series};

/// Fitting window of the exponential regime.
const STEEP_WINDOW: (f64, f64) = (0.02, 0.1);

pub(super) fn configure(c: &mut ExperimentConfig) {
    c.mesh.cells = 4000;
    c.potential.sweep = vec![2.0, 6.0];
}

pub(super) fn run(run: &mut Run) -> Result<(), LabError> {
    let cfg = run.config;
    let p = &cfg.potential;
    let tol = &cfg.tolerances;
    let mesh = unit_interval(cfg.mesh.cells)?;
    let window = default_window(&mesh);
    let options = EigenOptions::default();

    let fits = run.sweep(&p.sweep, |&c| {
        let op = operator(&mesh, c, p.exponent, p.truncation, 0.0)?;
        let pair = principal_eigenpair(&op, &options)?;
        let fit = flatness_fit(&pair.psi, window)?;
        Ok((c, pair, fit))
    })?;
    let mut rows = Vec::new();
    let mut plot = Plot::new("boundary profile of u₁", "δ", "|u₁|").log_log();
    for (c, pair, fit) in &fits {
        let oracle = indicial_exponent(*c);
        let err = (fit.exponent - oracle).abs();
        let mut check = Check::new(format!("power-exponent-c{c}"), err <= tol.exponent)
            .metric("strength", *c)
            .metric("fitted_exponent", fit.exponent)
            .metric("oracle_exponent", oracle)
            .metric("absolute_error", err)
            .metric("half_width", fit.half_width)
            .metric("r_squared", fit.r_squared)
            .metric("points", fit.points as f64)
            .metric("lambda", pair.lambda)
            .metric("tolerance", tol.exponent);
        if *c >= 2.0 {
            check = check.metric("flat", if fit.exponent >= 2.0 - tol.exponent { 1.0 } else { 0.0 });
            check.pass &= fit.exponent >= 2.0 - tol.exponent;
        }
        run.check(check);
        let profile = boundary_profile(&pair.psi);
        for &(d, u) in &profile {
            rows.push(vec![*c, p.exponent, d, u]);
        }
        plot = plot.with(Series::line(format!("C = {c}"), profile.iter().filter(|x| x.0 <= 0.25).copied().collect()));
    }

    let c = p.strength;
    let r = p.steep_exponent;
    let op = operator(&mesh, c, r, p.truncation, 0.0)?;
    let pair = principal_eigenpair(&op, &options)?;
    let fit = exponential_fit(&pair.psi, r, STEEP_WINDOW)?;
    let oracle = wkb_rate(c);
    let err = relative_error(fit.exponent, oracle);
    run.check(
        Check::new("exponential-regime", fit.r_squared >= tol.r_squared && err <= tol.rate)
            .metric("strength", c)
            .metric("exponent_r", r)
            .metric("fitted_rate", fit.exponent)
            .metric("oracle_rate", oracle)
            .metric("relative_error", err)
            .metric("r_squared", fit.r_squared)
            .metric("points", fit.points as f64)
            .metric("tolerance_rate", tol.rate)
            .metric("tolerance_r_squared", tol.r_squared),
    );
    let profile = boundary_profile(&pair.psi);
    for &(d, u) in &profile {
        rows.push(vec![c, r, d, u]);
    }
    plot = plot.with(Series::line(format!("C = {c}, r = {r}"), profile.iter().filter(|x| x.0 <= 0.25).copied().collect()));

    run.csv("profiles.csv", &["strength", "r", "delta", "abs_u1"], &rows)?;
    run.svg("profiles.svg", plot)
}
