use lab_core::evolve::{
    confinement_report, galerkin_coefficients, schrodinger_cn, schrodinger_galerkin, CnOptions, ConfinementThresholds, WaveTrajectory,
};
use lab_core::model::{extend_potential, truncate, BoxEmbedding, FlowField, PotentialSpec};
use lab_core::operator::assemble;
use lab_core::spectral::{eigen_spectrum, EigenOptions};
use lab_core::{GridFunction, Mesh};
use num_complex::Complex;
use std::sync::Arc;

use super::{operator, unit_interval, Run};
use crate::config::ExperimentConfig;
use crate::error::LabError;
use crate::report::Check;
use crate::svg::{Plot, Series};

/// Recorded snapshots per unit of simulated time.
const SNAPSHOTS: usize = 10;

pub(super) fn configure(c: &mut ExperimentConfig) {
    c.mesh.cells = 400;
    c.potential.strength = 100.0;
    c.potential.sweep = vec![10.0, 100.0, 1000.0];
    c.potential.truncation = 1e6;
    c.potential.exterior = 0.0;
    c.time.t_final = 1.0;
    c.time.steps = 1000;
    c.time.m_max = 20;
    c.time.fit_times = vec![0.1, 1.0];
    c.time.padding = 100;
}

/// Normalised smooth bump `exp(−1/(1−s²))`, `s = (x − ½)/¼`, supported inside `Ω`.
fn initial_state(mesh: &Arc<Mesh<f64>>) -> GridFunction<Complex<f64>> {
    let g = GridFunction::<f64>::from_fn(mesh, |x| {
        let s = (x[0] - 0.5) / 0.25;
        if s.abs() < 1.0 {
            (-1.0 / (1.0 - s * s)).exp()
        } else {
            0.0
        }
    });
    g.scaled(1.0 / g.norm_l2()).complexify()
}

fn box_run(
    emb: &BoxEmbedding<f64>,
    c: f64,
    cfg: &ExperimentConfig,
    psi0: &GridFunction<Complex<f64>>,
) -> Result<WaveTrajectory<f64>, LabError> {
    let mut spec = PotentialSpec::new(c, cfg.potential.exponent)?;
    if cfg.potential.truncation.is_finite() {
        spec = truncate(&spec, cfg.potential.truncation)?;
    }
    let v = extend_potential(&spec, cfg.potential.exterior, emb.omega(), emb.boxed())?;
    let op = assemble(emb.boxed(), &v, &FlowField::zero(emb.boxed()))?;
    let every = (cfg.time.steps / SNAPSHOTS).max(1);
    let options = CnOptions {
        record_every: every,
        ..CnOptions::default()
    };
    Ok(schrodinger_cn(&op, psi0, cfg.time.t_final, cfg.time.steps, Some(&emb.mask()), &options)?)
}

pub(super) fn run(run: &mut Run) -> Result<(), LabError> {
    let cfg = run.config;
    let p = &cfg.potential;
    let tol = &cfg.tolerances;
    let omega = unit_interval(cfg.mesh.cells)?;
    let emb = BoxEmbedding::padded(&omega, [cfg.time.padding, 0])?;
    let psi_omega = initial_state(&omega);
    let psi_box = emb.extend_by_zero(&psi_omega)?;

    // Spectral Galerkin on Ω.
    let op = operator(&omega, p.strength, p.exponent, p.truncation, 0.0)?;
    let sys = eigen_spectrum(&op, cfg.time.m_max, &EigenOptions::default())?;
    let expansion = galerkin_coefficients(&psi_omega, &sys)?;
    let times: Vec<f64> = (0..=SNAPSHOTS).map(|k| cfg.time.t_final * k as f64 / SNAPSHOTS as f64).collect();
    let galerkin = schrodinger_galerkin(&expansion.coefficients, &sys, &times)?;
    let mut coefficient_drift: f64 = 0.0;
    for state in &galerkin.states {
        for (u, a) in sys.eigenfunctions.iter().zip(&expansion.coefficients) {
            let b = state.inner(&u.complexify())?;
            coefficient_drift = coefficient_drift.max((b.norm() - a.norm()).abs());
        }
    }
    let g_drift = galerkin.mass_drift();
    run.check(
        Check::new("galerkin-conservation", g_drift <= tol.galerkin_mass && coefficient_drift <= tol.galerkin_mass)
            .metric("modes", sys.len() as f64)
            .metric("mass_drift", g_drift)
            .metric("coefficient_drift", coefficient_drift)
            .metric("truncated_mass_fraction", expansion.truncated_mass_fraction)
            .metric("tolerance", tol.galerkin_mass),
    );

    // Crank–Nicolson in the box, swept over the strength.
    let mut strengths = p.sweep.clone();
    if !strengths.contains(&p.strength) {
        strengths.push(p.strength);
    }
    let runs = run.sweep(&strengths, |&c| box_run(&emb, c, cfg, &psi_box))?;
    let main = &runs[strengths.iter().position(|&c| c == p.strength).expect("strength is in the sweep")];
    let cn_drift = runs.iter().map(|r| r.mass_drift()).fold(0.0, f64::max);
    run.check(
        Check::new("cn-mass", cn_drift <= tol.cn_mass)
            .metric("mass_drift", cn_drift)
            .metric("steps", cfg.time.steps as f64)
            .metric("tolerance", tol.cn_mass),
    );

    let mut spec = PotentialSpec::new(p.strength, p.exponent)?;
    if p.truncation.is_finite() {
        spec = truncate(&spec, p.truncation)?;
    }
    let v = extend_potential(&spec, p.exterior, &omega, emb.boxed())?;
    let box_op = assemble(emb.boxed(), &v, &FlowField::zero(emb.boxed()))?;
    let back = schrodinger_cn(
        &box_op,
        main.final_state(),
        -cfg.time.t_final,
        cfg.time.steps,
        None,
        &CnOptions {
            record_every: cfg.time.steps,
            ..CnOptions::default()
        },
    )?;
    let reversal = back.final_state().sub(&psi_box)?.norm_l2() / psi_box.norm_l2();
    run.check(
        Check::new("cn-reversal", reversal <= tol.reversal)
            .metric("relative_l2_error", reversal)
            .metric("tolerance", tol.reversal),
    );

    let outside: Vec<f64> = runs.iter().map(|r| *r.outside_mass.last().expect("final state recorded")).collect();
    let sweep_outside: Vec<f64> = p.sweep.iter().map(|c| outside[strengths.iter().position(|s| s == c).expect("swept")]).collect();
    let monotone = sweep_outside.windows(2).all(|w| w[1] < w[0]);
    let mut check = Check::new("outside-mass-monotone", monotone);
    for (c, o) in p.sweep.iter().zip(&sweep_outside) {
        check = check.metric(&format!("outside_mass_c{c}"), *o);
    }
    run.check(check);

    let thresholds = ConfinementThresholds {
        max_outside_fraction: 1.0,
        min_exponent: 2.0 - tol.confinement_exponent,
    };
    let report = confinement_report(main, Some(&emb), &cfg.time.fit_times, None, thresholds)?;
    let mut check = Check::new("decay-exponent", report.min_exponent >= thresholds.min_exponent)
        .metric("strength", p.strength)
        .metric("min_exponent", report.min_exponent)
        .metric("threshold", thresholds.min_exponent);
    for (t, fit) in &report.fits {
        check = check.metric(&format!("exponent_t{t}"), fit.exponent);
    }
    run.check(check);

    let mut rows = Vec::new();
    let mut plot = Plot::new("mass outside Ω", "t", "∫_{box∖Ω}|ψ|²").log_y();
    for (c, r) in strengths.iter().zip(&runs) {
        for (k, &t) in r.times.iter().enumerate() {
            rows.push(vec![*c, t, r.mass[k], r.outside_mass[k]]);
        }
        plot = plot.with(Series::line(format!("C = {c}"), r.times.iter().copied().zip(r.outside_mass.iter().copied()).collect()));
    }
    run.csv("outside_mass.csv", &["strength", "t", "mass", "outside_mass"], &rows)?;
    run.svg("outside_mass.svg", plot)?;

    let final_omega = emb.restrict(main.final_state())?.abs();
    let profile = lab_core::spectral::boundary_profile(&final_omega);
    let rows: Vec<Vec<f64>> = profile.iter().map(|&(d, u)| vec![d, u]).collect();
    run.csv("final_profile.csv", &["delta", "abs_psi"], &rows)?;
    run.svg(
        "final_profile.svg",
        Plot::new("|ψ(T)| near ∂Ω", "δ", "|ψ|")
            .log_log()
            .with(Series::line("|ψ(T)|", profile.into_iter().filter(|x| x.0 <= 0.25 && x.1 > 0.0).collect())),
    )
}
