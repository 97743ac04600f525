use std::f64::consts::PI;

use lab_core::spectral::{eigen_spectrum, principal_eigenpair, EigenOptions};

use super::{operator, relative_error, unit_interval, unit_square, Run};
use crate::config::ExperimentConfig;
use crate::error::LabError;
use crate::report::Check;
use crate::svg::{Plot, Series};

pub(super) fn configure(c: &mut ExperimentConfig) {
    c.mesh.cells = 1000;
    c.mesh.cells_2d = 128;
    c.time.m_max = 5;
}

pub(super) fn run(run: &mut Run) -> Result<(), LabError> {
    let cfg = run.config;
    let tol = &cfg.tolerances;
    let options = EigenOptions::default();
    let line = unit_interval(cfg.mesh.cells)?;
    let square = unit_square(cfg.mesh.cells_2d)?;
    let line_op = operator(&line, 0.0, 0.0, f64::INFINITY, 0.0)?;
    let square_op = operator(&square, 0.0, 0.0, f64::INFINITY, 0.0)?;

    let p1 = principal_eigenpair(&line_op, &options)?;
    let e1 = relative_error(p1.lambda, PI * PI);
    run.check(
        Check::new("interval-principal", e1 <= tol.eigenvalue)
            .metric("lambda", p1.lambda)
            .metric("relative_error", e1)
            .metric("residual", p1.residual)
            .metric("tolerance", tol.eigenvalue),
    );
    let p2 = principal_eigenpair(&square_op, &options)?;
    let e2 = relative_error(p2.lambda, 2.0 * PI * PI);
    run.check(
        Check::new("square-principal", e2 <= tol.eigenvalue)
            .metric("lambda", p2.lambda)
            .metric("relative_error", e2)
            .metric("residual", p2.residual)
            .metric("min_ratio", p2.min_ratio)
            .metric("tolerance", tol.eigenvalue),
    );

    let sys = eigen_spectrum(&line_op, cfg.time.m_max, &options)?;
    let errors: Vec<f64> = sys
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(m, &l)| relative_error(l, ((m + 1) as f64 * PI).powi(2)))
        .collect();
    let worst = errors.iter().copied().fold(0.0, f64::max);
    run.check(
        Check::new("interval-spectrum", sys.len() == cfg.time.m_max && worst <= tol.higher_eigenvalue)
            .metric("count", sys.len() as f64)
            .metric("max_relative_error", worst)
            .metric("max_residual", sys.residuals.iter().copied().fold(0.0, f64::max))
            .metric("orthonormality_defect", sys.orthonormality_defect())
            .metric("tolerance", tol.higher_eigenvalue),
    );

    let rows: Vec<Vec<f64>> = sys
        .eigenvalues
        .iter()
        .zip(&errors)
        .zip(&sys.residuals)
        .enumerate()
        .map(|(m, ((&l, &e), &r))| vec![(m + 1) as f64, l, ((m + 1) as f64 * PI).powi(2), e, r])
        .collect();
    run.csv("spectrum.csv", &["m", "lambda", "exact", "relative_error", "residual"], &rows)?;
    let mut plot = Plot::new("interval eigenfunctions", "x", "u_m(x)");
    for (m, u) in sys.eigenfunctions.iter().enumerate() {
        let pts = line.centers().iter().zip(u.values()).step_by(5).map(|(c, &v)| (c[0], v)).collect();
        plot = plot.with(Series::line(format!("u_{}", m + 1), pts));
    }
    run.svg("eigenfunctions.svg", plot)
}
