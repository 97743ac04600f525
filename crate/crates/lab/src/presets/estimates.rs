use lab_core::linalg::SolverOptions;
use lab_core::stationary::{weighted_potential_integral, weighted_source_integral};

use super::{operator, random_grid, unit_interval, unit_square, Run};
use crate::config::ExperimentConfig;
use crate::error::LabError;
use crate::report::Check;
use crate::svg::{Plot, Series};

pub(super) fn configure(c: &mut ExperimentConfig) {
    c.mesh.cells = 2000;
}

pub(super) fn run(run: &mut Run) -> Result<(), LabError> {
    let cfg = run.config;
    let p = &cfg.potential;
    let cases = [
        (unit_interval(cfg.mesh.cells)?, 0.0),
        (unit_square(cfg.mesh.cells_2d)?, cfg.flow.amplitude),
    ];
    let mut rows = Vec::new();
    for (case, (mesh, amplitude)) in cases.iter().enumerate() {
        let op = operator(mesh, p.strength, p.exponent, p.truncation, *amplitude)?;
        let solver = op.factor(SolverOptions::default())?;
        let ratios = run.trials(100 * case as u64, cfg.trials, |_, rng| {
            let f = random_grid(mesh, rng, 0.0, 1.0);
            let u = solver.solve(&f)?;
            let mut out = Vec::with_capacity(cfg.alpha.len());
            for &a in &cfg.alpha {
                let lhs = weighted_potential_integral(&u, op.potential(), a)?;
                let rhs = weighted_source_integral(&f, a)?;
                out.push((a, lhs, rhs, lhs / rhs, u.min()));
            }
            Ok(out)
        })?;
        for (k, trial) in ratios.iter().enumerate() {
            for &(a, lhs, rhs, ratio, min) in trial {
                rows.push(vec![mesh.dim() as f64, *amplitude, k as f64, a, lhs, rhs, ratio, min]);
            }
        }
    }

    let finite = rows.iter().all(|r| r[6].is_finite());
    let positive = rows.iter().map(|r| r[7]).fold(f64::INFINITY, f64::min);
    let worst = rows.iter().map(|r| r[6]).fold(0.0, f64::max);
    run.check(
        Check::new("finite-ratios", finite && positive >= -1e-12)
            .metric("max_ratio", worst)
            .metric("min_solution", positive)
            .metric("flow_amplitude", cfg.flow.amplitude),
    );
    let half: Vec<f64> = rows.iter().filter(|r| r[1] == 0.0 && r[3] == 0.5).map(|r| r[6]).collect();
    let max_half = half.iter().copied().fold(0.0, f64::max);
    run.check(
        Check::new("constant-one", !half.is_empty() && max_half <= 1.0 + cfg.tolerances.estimate)
            .metric("max_ratio_half_weight", max_half)
            .metric("samples", half.len() as f64)
            .metric("tolerance", cfg.tolerances.estimate),
    );
    run.csv("ratios.csv", &["dim", "flow_amplitude", "trial", "alpha", "lhs", "rhs", "ratio", "min_u"], &rows)?;
    let mut plot = Plot::new("weighted estimate ratios", "trial", "∫V|u|δ^α ÷ ∫|f|δ^α");
    for &a in &cfg.alpha {
        for dim in [1.0, 2.0] {
            let pts = rows.iter().filter(|r| r[0] == dim && r[3] == a).map(|r| (r[2], r[6])).collect();
            plot = plot.with(Series::scatter(format!("{dim}D, α = {a}"), pts));
        }
    }
    run.svg("ratios.svg", plot)
}
