use std::sync::Arc;

use lab_core::rearrange::{decreasing_rearrangement, distribution_function, lorentz_norm};
use lab_core::{GridFunction, Mesh};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::Run;
use crate::config::ExperimentConfig;
use crate::error::LabError;
use crate::report::Check;
use crate::svg::{Plot, Series};

const EXPONENTS: [f64; 3] = [1.5, 2.0, 4.0];

pub(super) fn configure(c: &mut ExperimentConfig) {
    c.trials = 200;
    c.mesh.cells = 2000;
}

struct Trial {
    cells: usize,
    matched: bool,
    levels_matched: bool,
    /// `(p, ‖u‖_p, ‖u‖_{p,p})`.
    norms: Vec<(f64, f64, f64)>,
}

fn random_function(max_cells: usize, rng: &mut ChaCha8Rng) -> Result<GridFunction<f64>, LabError> {
    let mesh = if rng.gen_bool(0.75) {
        Arc::new(Mesh::build_interval(0.0, rng.gen_range(0.5..2.0), rng.gen_range(10..=max_cells))?)
    } else {
        let side = ((max_cells as f64).sqrt() as usize).max(4);
        Arc::new(Mesh::build_rectangle(1.0, rng.gen_range(0.5..2.0), rng.gen_range(4..=side), rng.gen_range(4..=side))?)
    };
    let kind = rng.gen_range(0..3);
    let values = (0..mesh.len())
        .map(|_| match kind {
            0 => rng.gen_range(-1.0..1.0),
            1 => (rng.gen_range(-5.0f64..5.0)).round() / 2.0,
            _ => rng.gen_range(-1.0f64..1.0).powi(3) * 10f64.powi(rng.gen_range(-3..3)),
        })
        .collect();
    Ok(GridFunction::new(&mesh, values)?)
}

fn lebesgue(u: &GridFunction<f64>, p: f64) -> f64 {
    let vol = u.mesh().cell_volume();
    (u.values().iter().map(|x| x.abs().powf(p)).sum::<f64>() * vol).powf(1.0 / p)
}

pub(super) fn run(run: &mut Run) -> Result<(), LabError> {
    let cfg = run.config;
    let trials = run.trials(0, cfg.trials, |_, rng| {
        let u = random_function(cfg.mesh.cells, rng)?;
        let r = decreasing_rearrangement(&u)?;
        let mut oracle: Vec<f64> = u.values().iter().map(|x| x.abs()).collect();
        oracle.sort_by(|a, b| b.total_cmp(a));
        let matched = r.u_star() == oracle.as_slice();
        let abs = u.abs();
        let vol = u.mesh().cell_volume();
        let levels_matched = oracle.iter().step_by(7).all(|&t| {
            let count = oracle.iter().filter(|&&x| x > t).count();
            distribution_function(&abs, t) == count as f64 * vol
        });
        let mut norms = Vec::with_capacity(EXPONENTS.len());
        for p in EXPONENTS {
            norms.push((p, lebesgue(&u, p), lorentz_norm(&u, p, p)?));
        }
        Ok(Trial {
            cells: u.len(),
            matched,
            levels_matched,
            norms,
        })
    })?;

    let matches = trials.iter().filter(|t| t.matched && t.levels_matched).count();
    run.check(
        Check::new("oracle", matches == trials.len())
            .metric("matches", matches as f64)
            .metric("trials", trials.len() as f64),
    );

    let slack = 1.0 + 1e-12;
    let mut violations = 0usize;
    let mut lower = f64::INFINITY;
    let mut upper: f64 = 0.0;
    let mut rows = Vec::new();
    for (k, t) in trials.iter().enumerate() {
        for &(p, lp, lor) in &t.norms {
            let conj = p / (p - 1.0);
            if lp > lor * slack || lor > conj * lp * slack {
                violations += 1;
            }
            if lp > 0.0 {
                lower = lower.min(lor / lp);
                upper = upper.max(lor / (conj * lp));
            }
            rows.push(vec![k as f64, t.cells as f64, p, lp, lor, if lp > 0.0 { lor / lp } else { f64::NAN }]);
        }
    }
    run.check(
        Check::new("embedding", violations == 0)
            .metric("violations", violations as f64)
            .metric("comparisons", (trials.len() * EXPONENTS.len()) as f64)
            .metric("min_lorentz_over_lp", lower)
            .metric("max_lorentz_over_conjugate_lp", upper),
    );
    run.csv("norms.csv", &["trial", "cells", "p", "lp_norm", "lorentz_norm", "ratio"], &rows)?;

    let mut plot = Plot::new("Lorentz ÷ Lebesgue norm", "trial", "‖u‖_{p,p} / ‖u‖_p");
    for p in EXPONENTS {
        let pts = rows.iter().filter(|r| r[2] == p).map(|r| (r[0], r[5])).collect();
        plot = plot.with(Series::scatter(format!("p = {p}"), pts));
    }
    run.svg("norms.svg", plot)
}
