//! Preset catalogue and the runner shared by all presets.

use std::path::PathBuf;
use std::sync::Arc;

use lab_core::model::{sample_flow, sample_potential, truncate, FlowField, FlowSpec, PotentialSpec};
use lab_core::operator::{assemble, DiscreteOperator};
use lab_core::{GridFunction, Mesh};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::artifacts::Artifacts;
use crate::config::ExperimentConfig;
use crate::error::LabError;
use crate::report::{Check, Status, Summary};
use crate::svg::Plot;

mod accretivity;
mod confinement;
mod eigen;
mod estimates;
mod flatness;
mod hardy;
mod kato;
mod lp_contraction;
mod maxprinciple;
mod parabolic;
mod rearrange;
mod truncation;

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    /// Property of the continuous problem that the preset exercises.
    pub property: &'static str,
    configure: fn(&mut ExperimentConfig),
    run: fn(&mut Run) -> Result<(), LabError>,
}

impl Preset {
    pub fn defaults(&self) -> ExperimentConfig {
        let mut c = ExperimentConfig {
            preset: self.name.to_string(),
            output: crate::config::OutputConfig {
                dir: PathBuf::from("out").join(self.name),
            },
            ..ExperimentConfig::default()
        };
        (self.configure)(&mut c);
        c
    }
}

impl std::fmt::Debug for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Preset").field("name", &self.name).finish_non_exhaustive()
    }
}

static CATALOGUE: [Preset; 12] = [
    Preset {
        name: "rearrange-oracle",
        description: "decreasing rearrangement against a sort oracle; Lorentz/Lebesgue norm equivalence",
        property: "equimeasurable rearrangement and L^p ⊂ L^{p,p} ⊂ p′·L^p",
        configure: rearrange::configure,
        run: rearrange::run,
    },
    Preset {
        name: "hardy",
        description: "Hardy quotient ∫|u|/δ ÷ ‖∇u‖ over a smooth corpus under refinement",
        property: "boundedness of the Hardy quotient",
        configure: hardy::configure,
        run: hardy::run,
    },
    Preset {
        name: "estimates",
        description: "weighted estimates ∫V|u|δ^α ÷ ∫|f|δ^α for random nonnegative sources",
        property: "weighted L¹ estimates, constant one without flow",
        configure: estimates::configure,
        run: estimates::run,
    },
    Preset {
        name: "truncation-cauchy",
        description: "successive differences of truncated solutions over a j-schedule",
        property: "convergence of the truncated approximations",
        configure: truncation::configure,
        run: truncation::run,
    },
    Preset {
        name: "kato",
        description: "Kato margin ∫φ sign(ū)Lū − ∫|ū|L*φ on solved pairs",
        property: "Kato inequality without boundary conditions",
        configure: kato::configure,
        run: kato::run,
    },
    Preset {
        name: "maxprinciple",
        description: "max u ≤ 0 for f ≤ 0 with and without flow; dense inverse positivity",
        property: "maximum principle",
        configure: maxprinciple::configure,
        run: maxprinciple::run,
    },
    Preset {
        name: "accretivity",
        description: "resolvent nonexpansiveness in L¹(ψ₁^α) and positivity of J_ε",
        property: "accretivity in the ψ₁^α-weighted norm",
        configure: accretivity::configure,
        run: accretivity::run,
    },
    Preset {
        name: "lp-contraction",
        description: "‖u‖ ≤ ‖f‖ in L^p(δ^α) for u + Au = f without flow",
        property: "L^p(δ^α) resolvent contraction",
        configure: lp_contraction::configure,
        run: lp_contraction::run,
    },
    Preset {
        name: "parabolic",
        description: "implicit-Euler contraction of trajectory pairs and heat-mode decay",
        property: "L¹(ψ₁^α) contraction of mild solutions",
        configure: parabolic::configure,
        run: parabolic::run,
    },
    Preset {
        name: "eigen",
        description: "Dirichlet eigenvalues of the interval and the square against m²π²",
        property: "principal eigenpair and discrete spectrum",
        configure: eigen::configure,
        run: eigen::run,
    },
    Preset {
        name: "flatness",
        description: "boundary decay exponent of u₁ and the exponential regime for r > 2",
        property: "flatness of eigenfunctions at the boundary",
        configure: flatness::configure,
        run: flatness::run,
    },
    Preset {
        name: "confinement",
        description: "Galerkin and Crank–Nicolson Schrödinger evolution in an enclosing box",
        property: "confinement of the wave function to Ω̄",
        configure: confinement::configure,
        run: confinement::run,
    },
];

/// Stable-ordered preset list.
pub fn catalogue() -> &'static [Preset] {
    &CATALOGUE
}

pub fn find(name: &str) -> Result<&'static Preset, LabError> {
    CATALOGUE.iter().find(|p| p.name == name).ok_or_else(|| LabError::UnknownPreset {
        name: name.to_string(),
        suggestion: suggest(name),
    })
}

fn suggest(name: &str) -> Option<String> {
    CATALOGUE
        .iter()
        .map(|p| (strsim::jaro_winkler(name, p.name), p.name))
        .filter(|(score, _)| *score >= 0.7)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, n)| n.to_string())
}

/// State threaded through a preset: configuration, checks and artifacts.
pub struct Run<'a> {
    pub config: &'a ExperimentConfig,
    pub checks: Vec<Check>,
    pub artifacts: Artifacts,
    pool: rayon::ThreadPool,
}

impl<'a> Run<'a> {
    fn new(config: &'a ExperimentConfig) -> Result<Self, LabError> {
        let threads = if config.threads == 0 {
            std::thread::available_parallelism().map_or(1, |n| n.get()).min(16)
        } else {
            config.threads
        };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| LabError::Config(format!("cannot start worker pool: {e}")))?;
        Ok(Run {
            config,
            checks: Vec::new(),
            artifacts: Artifacts::new(&config.output.dir),
            pool,
        })
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    /// Runs `count` independent trials on the worker pool. Trial `k` draws
    /// from stream `stream + k` of the configured seed, so results do not
    /// depend on scheduling.
    pub fn trials<T, F>(&self, stream: u64, count: usize, f: F) -> Result<Vec<T>, LabError>
    where
        T: Send,
        F: Fn(usize, &mut ChaCha8Rng) -> Result<T, LabError> + Sync + Send,
    {
        let seed = self.config.seed;
        self.pool.install(|| {
            (0..count)
                .into_par_iter()
                .map(|k| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(stream + k as u64);
                    f(k, &mut rng)
                })
                .collect()
        })
    }

    /// Maps `f` over `items` on the worker pool, preserving order.
    pub fn sweep<I, T, F>(&self, items: &[I], f: F) -> Result<Vec<T>, LabError>
    where
        I: Sync,
        T: Send,
        F: Fn(&I) -> Result<T, LabError> + Sync + Send,
    {
        self.pool.install(|| items.par_iter().map(&f).collect())
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<(), LabError> {
        self.artifacts.write_csv(name, header, rows).map(|_| ())
    }

    /// Writes a plot with the preset and seed recorded in its header comment.
    pub fn svg(&mut self, name: &str, plot: Plot) -> Result<(), LabError> {
        let plot = plot
            .note(format!("preset = {}", self.config.preset))
            .note(format!("seed = {}", self.config.seed))
            .note(format!("data = {}", name.replace(".svg", ".csv")));
        self.artifacts.write_svg(name, &plot).map(|_| ())
    }
}

/// Runs a validated configuration. `summary.json` is written in every case
/// except configuration errors, which are returned before any file exists.
pub fn execute(config: &ExperimentConfig) -> Result<Summary, LabError> {
    config.validate()?;
    let preset = config.preset()?;
    let mut run = Run::new(config)?;
    run.artifacts.write("config.toml", config.to_toml().as_bytes())?;
    let outcome = (preset.run)(&mut run);
    let pass = outcome.is_ok() && run.checks.iter().all(|c| c.pass);
    let (status, error) = match outcome {
        Ok(()) if pass => (Status::Pass, None),
        Ok(()) => (Status::CheckFailure, None),
        Err(LabError::Config(m)) => return Err(LabError::Config(m)),
        Err(e) => (Status::SolverFailure, Some(e.to_string())),
    };
    let mut artifacts = run.artifacts.written().to_vec();
    artifacts.push("summary.json".into());
    let summary = Summary {
        preset: preset.name.to_string(),
        criterion: preset.property.to_string(),
        seed: config.seed,
        status,
        pass,
        checks: run.checks,
        error,
        artifacts,
    };
    run.artifacts.write("summary.json", summary.to_json().as_bytes())?;
    Ok(summary)
}

pub(crate) fn unit_interval(n: usize) -> Result<Arc<Mesh<f64>>, LabError> {
    Ok(Arc::new(Mesh::build_interval(0.0, 1.0, n)?))
}

pub(crate) fn unit_square(n: usize) -> Result<Arc<Mesh<f64>>, LabError> {
    Ok(Arc::new(Mesh::build_rectangle(1.0, 1.0, n, n)?))
}

/// `−Δ + U·∇ + min(Cδ^{−r}, j)` with the cellular flow of the given
/// amplitude (ignored in 1D).
pub(crate) fn operator(mesh: &Arc<Mesh<f64>>, c: f64, r: f64, j: f64, amplitude: f64) -> Result<DiscreteOperator<f64>, LabError> {
    let mut spec = PotentialSpec::new(c, r)?;
    if j.is_finite() {
        spec = truncate(&spec, j)?;
    }
    let v = sample_potential(&spec, mesh)?;
    let flow = if mesh.dim() == 2 && amplitude != 0.0 {
        sample_flow(&FlowSpec::cellular(amplitude, mesh.domain()), mesh)?
    } else {
        FlowField::zero(mesh)
    };
    Ok(assemble(mesh, &v, &flow)?)
}

pub(crate) fn random_grid(mesh: &Arc<Mesh<f64>>, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> GridFunction<f64> {
    let v = (0..mesh.len()).map(|_| rng.gen_range(lo..hi)).collect();
    GridFunction::new(mesh, v).expect("length matches mesh")
}

/// Smooth nonnegative function vanishing on the boundary: a product of
/// `sin(πx_k)` factors modulated by a random positive trigonometric term.
pub(crate) fn smooth_bump(mesh: &Arc<Mesh<f64>>, rng: &mut ChaCha8Rng) -> GridFunction<f64> {
    use std::f64::consts::PI;
    let power = rng.gen_range(1..=3);
    let a = rng.gen_range(-0.9..0.9);
    let k = rng.gen_range(1..=4) as f64;
    let phase = rng.gen_range(0.0..2.0 * PI);
    GridFunction::<f64>::from_fn(mesh, |x| {
        let base: f64 = (0..mesh.dim()).map(|d| (PI * x[d]).sin()).product();
        base.powi(power) * (1.0 + a * (k * PI * (x[0] + x[1]) + phase).cos())
    })
}

pub(crate) fn relative_error(value: f64, exact: f64) -> f64 {
    (value - exact).abs() / exact.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn catalogue_is_a_stable_bijection() {
        let names: Vec<&str> = catalogue().iter().map(|p| p.name).collect();
        assert_eq!(
            names,
            [
                "rearrange-oracle",
                "hardy",
                "estimates",
                "truncation-cauchy",
                "kato",
                "maxprinciple",
                "accretivity",
                "lp-contraction",
                "parabolic",
                "eigen",
                "flatness",
                "confinement"
            ]
        );
        assert_eq!(names.iter().collect::<HashSet<_>>().len(), 12);
    }

    #[test]
    fn suggestions() {
        assert_eq!(suggest("confinment").as_deref(), Some("confinement"));
        assert_eq!(suggest("lp_contraction").as_deref(), Some("lp-contraction"));
        assert_eq!(suggest("zzzz"), None);
    }

    #[test]
    fn trial_streams_are_independent_of_scheduling() {
        let mut c = ExperimentConfig::for_preset("kato").unwrap();
        c.threads = 4;
        let run = Run::new(&c).unwrap();
        let a = run.trials(0, 32, |_, rng| Ok(rng.gen::<u64>())).unwrap();
        c.threads = 1;
        let run = Run::new(&c).unwrap();
        let b = run.trials(0, 32, |_, rng| Ok(rng.gen::<u64>())).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().collect::<HashSet<_>>().len(), 32);
    }
}
