//! The three experiment pipelines: trapped Brownian motion, drift-preserving
//! Duffing integration and annealed geometric optimization of the Ackley
//! function, each paired with its Euclidean comparator.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::energies::{AckleyEnergy, DriftConstraintEnergy, PotentialWellEnergy};
use crate::energy::EnergyModel;
use crate::error::{GeodevError, Result};
use crate::sde::{
    developed_em_step, euclidean_em_step, gaussian_increments, init_rng, run_ensemble, Diagnostic,
    EnsembleResult, Scheme, SdeSystem, SimConfig,
};

fn to_dvector(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

// ---------------------------------------------------------------------------
// Trapped Brownian motion
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WellExperimentConfig {
    pub sim: SimConfig,
    /// Center of the potential well.
    pub lambda: Vec<f64>,
    /// Diagonal sharpness coefficients.
    pub d: Vec<f64>,
    /// Initial state; defaults to the well center.
    pub x0: Option<Vec<f64>>,
}

impl Default for WellExperimentConfig {
    fn default() -> Self {
        Self {
            sim: SimConfig {
                ensemble: 500,
                upsilon: 0.0,
                ..SimConfig::default()
            },
            lambda: vec![1.0, 2.0],
            d: vec![400.0, 400.0],
            x0: None,
        }
    }
}

impl WellExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        if self.lambda.len() != self.d.len() || self.lambda.is_empty() {
            return Err(GeodevError::Config(
                "well: lambda and d must share a positive dimension".into(),
            ));
        }
        if self.d.iter().any(|&v| v <= 0.0) {
            return Err(GeodevError::Config("well: d entries must be positive".into()));
        }
        if let Some(x0) = &self.x0 {
            if x0.len() != self.lambda.len() {
                return Err(GeodevError::Config("well: x0 dimension mismatch".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WellSummary {
    pub times: Vec<f64>,
    /// RMS distance to the well center across the geometric ensemble.
    pub rms_to_center: Vec<f64>,
    /// Largest distance to the center over all members and times.
    pub max_excursion: f64,
    /// Mean squared displacement from the start, Euclidean comparator.
    pub euclidean_msd: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct WellOutput {
    pub geometric: EnsembleResult,
    pub euclidean: EnsembleResult,
    pub summary: WellSummary,
}

/// Driftless unit-noise SDE developed on the potential-well metric, next to
/// a plain Brownian comparator sharing the same noise paths.
pub fn run_trapped_brownian(cfg: &WellExperimentConfig, seed: u64) -> Result<WellOutput> {
    cfg.validate()?;
    let lambda = to_dvector(&cfg.lambda);
    let model = PotentialWellEnergy::new(lambda.clone(), to_dvector(&cfg.d))?;
    let dim = cfg.lambda.len();
    let x0 = cfg.x0.as_ref().map(|v| to_dvector(v)).unwrap_or_else(|| lambda.clone());
    let sys = SdeSystem::brownian(dim);
    let init = move |_m: usize| x0.clone();

    let geometric = run_ensemble(&sys, Some(&model), &cfg.sim, seed, &init, &[])?;
    let eu_sim = SimConfig {
        scheme: Scheme::Euclidean,
        ..cfg.sim.clone()
    };
    let euclidean = run_ensemble(&sys, None, &eu_sim, seed, &init, &[])?;

    let survivors: Vec<usize> = geometric.surviving_members().collect();
    let mut max_excursion: f64 = 0.0;
    let rms_to_center: Vec<f64> = (0..geometric.times.len())
        .map(|idx| {
            let mean_sq = survivors
                .iter()
                .map(|&m| {
                    let d = (&geometric.states[m][idx] - &lambda).norm();
                    max_excursion = max_excursion.max(d);
                    d * d
                })
                .sum::<f64>()
                / survivors.len() as f64;
            mean_sq.sqrt()
        })
        .collect();
    let eu_survivors: Vec<usize> = euclidean.surviving_members().collect();
    let euclidean_msd: Vec<f64> = (0..euclidean.times.len())
        .map(|idx| {
            eu_survivors
                .iter()
                .map(|&m| (&euclidean.states[m][idx] - &euclidean.states[m][0]).norm_squared())
                .sum::<f64>()
                / eu_survivors.len() as f64
        })
        .collect();

    let summary = WellSummary {
        times: geometric.times.clone(),
        rms_to_center,
        max_excursion,
        euclidean_msd,
    };
    Ok(WellOutput {
        geometric,
        euclidean,
        summary,
    })
}

// ---------------------------------------------------------------------------
// Drift-preserving Duffing integration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DuffingExperimentConfig {
    pub sim: SimConfig,
    /// Linear stiffness.
    pub k: f64,
    /// Cubic stiffness.
    pub alpha: f64,
    /// Additive noise intensity on the velocity equation.
    pub sigma: f64,
    /// Constraint sharpness of the energy shell; an algorithm knob.
    pub beta_e: f64,
    pub x0: Vec<f64>,
}

impl Default for DuffingExperimentConfig {
    fn default() -> Self {
        Self {
            sim: SimConfig {
                ensemble: 50,
                upsilon: 1e4,
                ..SimConfig::default()
            },
            k: 1000.0,
            alpha: 300.0,
            sigma: 0.05,
            beta_e: 1.0,
            x0: vec![0.1, 0.1],
        }
    }
}

impl DuffingExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        if self.sigma < 0.0 {
            return Err(GeodevError::Config(format!(
                "duffing: sigma must be nonnegative, got {}",
                self.sigma
            )));
        }
        if self.beta_e <= 0.0 {
            return Err(GeodevError::Config(format!(
                "duffing: beta_e must be positive, got {}",
                self.beta_e
            )));
        }
        if self.x0.len() != 2 {
            return Err(GeodevError::Config("duffing: x0 must have two entries".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DuffingSummary {
    pub times: Vec<f64>,
    /// Ensemble mean Hamiltonian, geometric run.
    pub mean_h: Vec<f64>,
    /// Theoretical mean-energy line Z_t.
    pub theory_z: Vec<f64>,
    /// Per-time ensemble RMSE of H against Z_t, geometric run.
    pub rmse: Vec<f64>,
    /// Ensemble mean Hamiltonian of the Euclidean comparator (NaN once all
    /// members have diverged).
    pub euclidean_mean_h: Vec<f64>,
    pub h0: f64,
    pub geometric_diverged: usize,
    pub euclidean_diverged: usize,
}

#[derive(Debug, Clone)]
pub struct DuffingOutput {
    pub geometric: EnsembleResult,
    pub euclidean: EnsembleResult,
    pub summary: DuffingSummary,
}

/// Z_t = H0 + Tr(Sigma^T Sigma) t / 2.
pub fn theoretical_mean_energy(h0: f64, sigma: &DMatrix<f64>, t: f64) -> f64 {
    h0 + 0.5 * (sigma.transpose() * sigma).trace() * t
}

/// Scalar form for Sigma = diag(0, sigma).
pub fn theoretical_mean_energy_scalar(h0: f64, sigma: f64, t: f64) -> f64 {
    h0 + 0.5 * sigma * sigma * t
}

/// Duffing SDE developed on the time-dependent constraint metric, with the
/// Euclidean Euler-Maruyama comparator (whose divergence is reported, not
/// fatal).
pub fn run_duffing_drift_preserving(cfg: &DuffingExperimentConfig, seed: u64) -> Result<DuffingOutput> {
    cfg.validate()?;
    let x0 = to_dvector(&cfg.x0);
    let model = DriftConstraintEnergy::from_initial_state(cfg.k, cfg.alpha, cfg.sigma, cfg.beta_e, &x0);
    let h0 = model.h0;
    let (k, alpha, sigma) = (cfg.k, cfg.alpha, cfg.sigma);
    let sys = SdeSystem::new(
        2,
        move |x, _| DVector::from_vec(vec![x[1], -k * x[0] - alpha * x[0].powi(3)]),
        move |_, _| DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, sigma]),
    );
    let init = move |_m: usize| x0.clone();
    let ham = {
        let m = model.clone();
        Diagnostic::new("mean_hamiltonian", move |x, _| m.hamiltonian(x))
    };

    let geometric = run_ensemble(&sys, Some(&model), &cfg.sim, seed, &init, std::slice::from_ref(&ham))?;
    let eu_sim = SimConfig {
        scheme: Scheme::Euclidean,
        ..cfg.sim.clone()
    };
    // The comparator is expected to blow up with stiff parameters; tolerate
    // a fully diverged ensemble.
    let euclidean = match run_ensemble(&sys, None, &eu_sim, seed, &init, &[]) {
        Ok(r) => r,
        Err(GeodevError::AllDiverged { .. }) => {
            crate::sde::run_ensemble_lenient(&sys, None, &eu_sim, seed, &init)?
        }
        Err(e) => return Err(e),
    };

    let survivors: Vec<usize> = geometric.surviving_members().collect();
    let times = geometric.times.clone();
    let theory_z: Vec<f64> = times
        .iter()
        .map(|&t| theoretical_mean_energy_scalar(h0, sigma, t))
        .collect();
    let mut mean_h = Vec::with_capacity(times.len());
    let mut rmse = Vec::with_capacity(times.len());
    for idx in 0..times.len() {
        let hs: Vec<f64> = survivors
            .iter()
            .map(|&m| model.hamiltonian(&geometric.states[m][idx]))
            .collect();
        let mean = hs.iter().sum::<f64>() / hs.len() as f64;
        let mse = hs
            .iter()
            .map(|h| (h - theory_z[idx]).powi(2))
            .sum::<f64>()
            / hs.len() as f64;
        mean_h.push(mean);
        rmse.push(mse.sqrt());
    }
    let eu_survivors: Vec<usize> = euclidean.surviving_members().collect();
    let euclidean_mean_h: Vec<f64> = (0..times.len())
        .map(|idx| {
            if eu_survivors.is_empty() {
                f64::NAN
            } else {
                eu_survivors
                    .iter()
                    .map(|&m| model.hamiltonian(&euclidean.states[m][idx]))
                    .sum::<f64>()
                    / eu_survivors.len() as f64
            }
        })
        .collect();

    let summary = DuffingSummary {
        times,
        mean_h,
        theory_z,
        rmse,
        euclidean_mean_h,
        h0,
        geometric_diverged: geometric.n_diverged(),
        euclidean_diverged: euclidean.n_diverged(),
    };
    Ok(DuffingOutput {
        geometric,
        euclidean,
        summary,
    })
}

/// Sweep the constraint sharpness beta_e: rerun the experiment for each
/// candidate value with everything else (including the noise paths) fixed,
/// returning `(beta_e, summary)` pairs for side-by-side comparison. The
/// sharpness is an algorithm knob with no canonical value, so picking one is
/// an empirical exercise this utility supports.
pub fn sweep_duffing_beta(
    cfg: &DuffingExperimentConfig,
    betas: &[f64],
    seed: u64,
) -> Result<Vec<(f64, DuffingSummary)>> {
    betas
        .iter()
        .map(|&beta_e| {
            let run_cfg = DuffingExperimentConfig {
                beta_e,
                ..cfg.clone()
            };
            run_duffing_drift_preserving(&run_cfg, seed).map(|out| (beta_e, out.summary))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Geometric annealed-Langevin optimization
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub sim: SimConfig,
    /// Problem dimension.
    pub dim: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Initial annealing temperature for the geometric run.
    pub beta0: f64,
    /// Decay rate r in beta_{k+1} = beta_k / exp(r k).
    pub decay: f64,
    /// Schedule stops once beta drops below this.
    pub beta_min: f64,
    /// Initial ensemble is uniform on [init_lo, init_hi]^dim ...
    pub init_lo: f64,
    pub init_hi: f64,
    /// ... excluding the ball of this radius around the origin.
    pub exclusion_radius: f64,
    /// Euclidean comparator step size and initial temperature.
    pub eu_dt: f64,
    pub eu_beta0: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self::default_2d()
    }
}

impl OptimizerConfig {
    /// Two-dimensional benchmark parameters.
    pub fn default_2d() -> Self {
        Self {
            sim: SimConfig {
                dt: 0.5,
                ensemble: 5,
                upsilon: 1e6,
                ..SimConfig::default()
            },
            dim: 2,
            a: 20.0,
            b: 0.2,
            c: 2.0 * std::f64::consts::PI,
            beta0: 1000.0,
            decay: 0.01,
            beta_min: 0.5,
            init_lo: -5.0,
            init_hi: 5.0,
            exclusion_radius: 0.1,
            eu_dt: 0.01,
            eu_beta0: 50.0,
        }
    }

    /// Forty-dimensional benchmark parameters.
    pub fn default_40d() -> Self {
        Self {
            dim: 40,
            beta0: 50_000.0,
            eu_beta0: 1000.0,
            ..Self::default_2d()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        if self.dim == 0 {
            return Err(GeodevError::Config("optimize: dim must be positive".into()));
        }
        if !(self.beta0 > self.beta_min && self.beta_min > 0.0) {
            return Err(GeodevError::Config(format!(
                "optimize: need beta0 > beta_min > 0, got beta0={} beta_min={}",
                self.beta0, self.beta_min
            )));
        }
        if self.decay <= 0.0 {
            return Err(GeodevError::Config(format!(
                "optimize: decay must be positive, got {}",
                self.decay
            )));
        }
        if !(self.init_lo < self.init_hi) {
            return Err(GeodevError::Config(
                "optimize: init_lo must be below init_hi".into(),
            ));
        }
        if !(self.eu_dt > 0.0 && self.eu_beta0 > self.beta_min) {
            return Err(GeodevError::Config(
                "optimize: euclidean comparator needs eu_dt > 0 and eu_beta0 > beta_min".into(),
            ));
        }
        Ok(())
    }
}

/// One annealed-Langevin run (geometric or Euclidean).
#[derive(Debug, Clone)]
pub struct OptimizerRun {
    /// Temperature used at each iteration (row 0 is the initial ensemble,
    /// before any step).
    pub betas: Vec<f64>,
    /// Best objective value across the ensemble at each iteration.
    pub ensemble_best: Vec<f64>,
    /// Running best over all members and iterations; non-increasing.
    pub incumbent: Vec<f64>,
    /// `member_f[iter][member]`.
    pub member_f: Vec<Vec<f64>>,
    /// `trajectories[member][iter]`.
    pub trajectories: Vec<Vec<DVector<f64>>>,
    pub best_point: DVector<f64>,
    pub best_value: f64,
    /// Times a member needed its derivatives evaluated at the last
    /// admissible point because it entered the origin-singularity ball.
    pub singular_events: usize,
    pub diverged: usize,
}

#[derive(Debug, Clone)]
pub struct OptimizerOutput {
    pub geometric: OptimizerRun,
    pub euclidean: OptimizerRun,
}

fn sample_initial(cfg: &OptimizerConfig, seed: u64, member: usize) -> DVector<f64> {
    let mut rng = init_rng(seed, member);
    loop {
        let x = DVector::from_fn(cfg.dim, |_, _| rng.gen_range(cfg.init_lo..cfg.init_hi));
        if x.norm() >= cfg.exclusion_radius {
            return x;
        }
    }
}

fn run_annealed_langevin(
    cfg: &OptimizerConfig,
    seed: u64,
    geometric: bool,
) -> Result<OptimizerRun> {
    let model = AckleyEnergy::new(cfg.dim, cfg.a, cfg.b, cfg.c);
    let dim = cfg.dim;
    let (dt, beta0) = if geometric {
        (cfg.sim.dt, cfg.beta0)
    } else {
        (cfg.eu_dt, cfg.eu_beta0)
    };
    let opts = cfg.sim.metric_options();

    let mut xs: Vec<DVector<f64>> = (0..cfg.sim.ensemble)
        .map(|m| sample_initial(cfg, seed, m))
        .collect();
    // Last point at which derivative evaluation was admissible, per member.
    let mut last_admissible = xs.clone();
    let mut alive = vec![true; cfg.sim.ensemble];
    let mut singular_events = 0usize;

    let value = |x: &DVector<f64>| model.value(x, 0.0).expect("ackley value is total");
    let f0: Vec<f64> = xs.iter().map(|x| value(x)).collect();
    let mut incumbent_val = f0.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut incumbent_point = xs[f0
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap()]
    .clone();

    let mut betas = vec![beta0];
    let mut ensemble_best = vec![incumbent_val];
    let mut incumbent = vec![incumbent_val];
    let mut member_f = vec![f0];
    let mut trajectories: Vec<Vec<DVector<f64>>> =
        xs.iter().map(|x| vec![x.clone()]).collect();

    let mut beta = beta0;
    let mut iter = 1usize;
    while beta >= cfg.beta_min {
        let sys = SdeSystem::new(
            dim,
            {
                let m = model.clone();
                move |x, _| m.gradient(x, 0.0).map(|g| g * (-beta)).unwrap_or_else(|_| DVector::zeros(dim))
            },
            move |_, _| DMatrix::identity(dim, dim) * (2.0 * beta).sqrt(),
        );
        for m in 0..cfg.sim.ensemble {
            if !alive[m] {
                trajectories[m].push(xs[m].clone());
                continue;
            }
            // Derivatives are refused inside the singular ball; fall back to
            // the last admissible point for the step coefficients.
            let x_eval = if xs[m].norm() < model.origin_eps {
                singular_events += 1;
                last_admissible[m].clone()
            } else {
                last_admissible[m] = xs[m].clone();
                xs[m].clone()
            };
            let db = gaussian_increments(seed, m, iter - 1, dim, dt);
            let t = (iter - 1) as f64 * dt;
            let stepped = if geometric {
                developed_em_step(&sys, &model, &x_eval, t, dt, &db, &opts, Scheme::Developed)
            } else {
                euclidean_em_step(&sys, &x_eval, t, dt, &db)
            };
            match stepped {
                Ok(xp) => xs[m] += xp - &x_eval,
                Err(_) => alive[m] = false,
            }
            trajectories[m].push(xs[m].clone());
        }
        let fs: Vec<f64> = xs.iter().map(|x| value(x)).collect();
        let (best_m, best_f) = fs
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, &v)| (i, v))
            .unwrap();
        if best_f < incumbent_val {
            incumbent_val = best_f;
            incumbent_point = xs[best_m].clone();
        }
        betas.push(beta);
        ensemble_best.push(best_f);
        incumbent.push(incumbent_val);
        member_f.push(fs);
        beta /= (cfg.decay * iter as f64).exp();
        iter += 1;
    }

    Ok(OptimizerRun {
        betas,
        ensemble_best,
        incumbent,
        member_f,
        trajectories,
        best_point: incumbent_point,
        best_value: incumbent_val,
        singular_events,
        diverged: alive.iter().filter(|a| !**a).count(),
    })
}

/// Annealed Langevin search developed on the Ackley metric g = Hess(f)/2 +
/// Upsilon I, next to the plain Euclidean annealed Langevin comparator with
/// its own step size and temperature.
pub fn run_geometric_optimizer(cfg: &OptimizerConfig, seed: u64) -> Result<OptimizerOutput> {
    cfg.validate()?;
    let geometric = run_annealed_langevin(cfg, seed, true)?;
    let euclidean = run_annealed_langevin(cfg, seed, false)?;
    Ok(OptimizerOutput {
        geometric,
        euclidean,
    })
}
