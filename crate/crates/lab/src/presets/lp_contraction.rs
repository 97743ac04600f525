use lab_core::evolve::lp_resolvent_margin;

use super::{operator, random_grid, unit_interval, unit_square, Run};
use crate::config::ExperimentConfig;
use crate::error::LabError;
use crate::report::Check;
use crate::svg::{Plot, Series};

const EXPONENTS: [f64; 3] = [2.0, 4.0, f64::INFINITY];

pub(super) fn configure(c: &mut ExperimentConfig) {
    c.mesh.cells = 1000;
    c.flow.amplitude = 0.0;
}

pub(super) fn run(run: &mut Run) -> Result<(), LabError> {
    let cfg = run.config;
    let p = &cfg.potential;
    let tol = cfg.tolerances.margin;
    let meshes = [unit_interval(cfg.mesh.cells)?, unit_square(cfg.mesh.cells_2d)?];
    let mut rows = Vec::new();
    for (case, mesh) in meshes.iter().enumerate() {
        let op = operator(mesh, p.strength, p.exponent, p.truncation, 0.0)?;
        let margins = run.trials(100 * case as u64, cfg.trials, |_, rng| {
            let f = random_grid(mesh, rng, -1.0, 1.0);
            let mut out = Vec::new();
            for q in EXPONENTS {
                for &a in &cfg.alpha {
                    out.push((q, a, lp_resolvent_margin(&op, &f, q, a)?.0));
                }
            }
            Ok(out)
        })?;
        for (k, t) in margins.iter().enumerate() {
            for &(q, a, m) in t {
                rows.push(vec![mesh.dim() as f64, k as f64, q, a, m]);
            }
        }
    }
    let violations = rows.iter().filter(|r| r[4] < -tol).count();
    let worst = rows.iter().map(|r| r[4]).fold(f64::INFINITY, f64::min);
    run.check(
        Check::new("lp-contraction", violations == 0)
            .metric("comparisons", rows.len() as f64)
            .metric("violations", violations as f64)
            .metric("min_margin", worst)
            .metric("tolerance", tol),
    );
    run.csv("lp_contraction.csv", &["dim", "trial", "p", "alpha", "margin"], &rows)?;
    let mut plot = Plot::new("L^p(δ^α) contraction margins", "trial", "‖f‖ − ‖u‖");
    for q in EXPONENTS {
        let pts = rows.iter().filter(|r| r[2] == q).map(|r| (r[1], r[4])).collect();
        plot = plot.with(Series::scatter(format!("p = {q}"), pts));
    }
    run.svg("lp_contraction.svg", plot)
}
