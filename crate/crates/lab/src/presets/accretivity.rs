use lab_core::evolve::{adjoint_principal, auxiliary_functional};
use lab_core::linalg::SolverOptions;
use lab_core::GridFunction;

use super::{operator, random_grid, unit_interval, unit_square, Run};
use crate::config::ExperimentConfig;
use crate::error::LabError;
use crate::report::Check;
use crate::svg::{Plot, Series};

const LAMBDAS: [f64; 3] = [0.1, 1.0, 10.0];
const EPSILONS: [f64; 3] = [1e-1, 1e-2, 1e-3];

pub(super) fn configure(c: &mut ExperimentConfig) {
    c.mesh.cells = 1000;
}

fn weighted_l1(u: &GridFunction<f64>, w: &GridFunction<f64>) -> f64 {
    u.values().iter().zip(w.values()).map(|(a, b)| a.abs() * b).sum::<f64>() * u.mesh().cell_volume()
}

/// `C·δ^{2−r} ≥ 2` at the largest boundary distance, so `V ≥ 2δ^{−2}` everywhere.
fn strongly_singular(c: f64, r: f64, max_delta: f64) -> bool {
    r >= 2.0 && c * max_delta.powf(2.0 - r) >= 2.0
}

pub(super) fn run(run: &mut Run) -> Result<(), LabError> {
    let cfg = run.config;
    let p = &cfg.potential;
    let tol = cfg.tolerances.margin;
    let cases = [
        (unit_interval(cfg.mesh.cells)?, 0.0),
        (unit_square(cfg.mesh.cells_2d)?, cfg.flow.amplitude),
    ];
    let mut rows = Vec::new();
    let mut aux_rows = Vec::new();
    for (case, (mesh, amplitude)) in cases.iter().enumerate() {
        let op = operator(mesh, p.strength, p.exponent, p.truncation, *amplitude)?;
        let psi = adjoint_principal(&op)?.psi;
        let max_delta = mesh.delta().iter().copied().fold(0.0, f64::max);
        let alphas: Vec<f64> = cfg
            .alpha
            .iter()
            .copied()
            .filter(|&a| a < 1.0 || (p.truncation.is_infinite() && strongly_singular(p.strength, p.exponent, max_delta)))
            .collect();
        for (li, &lambda) in LAMBDAS.iter().enumerate() {
            let res = op.resolvent(lambda, SolverOptions::default())?;
            let stream = (1000 * case + 100 * li) as u64;
            let margins = run.trials(stream, cfg.trials, |_, rng| {
                let f = random_grid(mesh, rng, -1.0, 1.0);
                let u = res.solve(&f)?;
                Ok(alphas
                    .iter()
                    .map(|&a| {
                        let w = psi.map(|x| x.max(0.0).powf(a));
                        let nf = weighted_l1(&f, &w);
                        (a, nf, nf - weighted_l1(&u, &w))
                    })
                    .collect::<Vec<_>>())
            })?;
            for (k, t) in margins.iter().enumerate() {
                for &(a, nf, m) in t {
                    rows.push(vec![mesh.dim() as f64, lambda, a, k as f64, nf, m]);
                }
            }
        }
        let solver = op.factor(SolverOptions::default())?;
        let values = run.trials(5000 + case as u64, cfg.trials, |_, rng| {
            let u_bar = solver.solve(&random_grid(mesh, rng, 0.0, 1.0))?;
            let mut out = Vec::new();
            for &a in &cfg.alpha {
                for eps in EPSILONS {
                    out.push((a, eps, auxiliary_functional(&op, &u_bar, &psi, a, eps)?));
                }
            }
            Ok(out)
        })?;
        for (k, t) in values.iter().enumerate() {
            for &(a, eps, j) in t {
                aux_rows.push(vec![mesh.dim() as f64, k as f64, a, eps, j]);
            }
        }
    }
    let worst = rows.iter().map(|r| r[5] / r[4].max(1.0)).fold(f64::INFINITY, f64::min);
    let alpha_one = rows.iter().filter(|r| r[2] == 1.0).count();
    run.check(
        Check::new("resolvent-accretivity", rows.iter().all(|r| r[5] >= -tol * r[4].max(1.0)))
            .metric("comparisons", rows.len() as f64)
            .metric("alpha_one_comparisons", alpha_one as f64)
            .metric("min_margin", worst)
            .metric("tolerance", tol),
    );
    let min_j = aux_rows.iter().map(|r| r[4]).fold(f64::INFINITY, f64::min);
    run.check(
        Check::new("auxiliary-positivity", min_j >= -tol)
            .metric("evaluations", aux_rows.len() as f64)
            .metric("min_j_eps", min_j)
            .metric("tolerance", tol),
    );
    run.csv("accretivity.csv", &["dim", "lambda", "alpha", "trial", "weighted_f", "margin"], &rows)?;
    run.csv("auxiliary.csv", &["dim", "trial", "alpha", "epsilon", "j_eps"], &aux_rows)?;
    let mut plot = Plot::new("resolvent margins", "trial", "‖f‖ − ‖u‖ in L¹(ψ₁^α)");
    for &lambda in &LAMBDAS {
        let pts = rows.iter().filter(|r| r[1] == lambda).map(|r| (r[3], r[5])).collect();
        plot = plot.with(Series::scatter(format!("λ = {lambda}"), pts));
    }
    run.svg("accretivity.svg", plot)
}
