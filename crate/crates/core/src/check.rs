//! Self-check suite: derivative cross-checks against central finite
//! differences, connection and geometry invariants. Used by the `check` CLI
//! command and by the test harness.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::energies::{AckleyEnergy, DriftConstraintEnergy, PotentialWellEnergy, QuadraticEnergy};
use crate::energy::EnergyModel;
use crate::error::Result;
use crate::geometry::{
    christoffel, geodesic_trajectory, metric_from_energy, metric_speed_squared, MetricOptions,
};
use crate::sde::{developed_em_step, euclidean_em_step, gaussian_increments, Scheme, SdeSystem};
use crate::tensor::Rank3;

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub worst_residual: f64,
    pub tolerance: f64,
}

impl CheckOutcome {
    fn new(name: impl Into<String>, worst_residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            passed: worst_residual.is_finite() && worst_residual <= tolerance,
            worst_residual,
            tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub checks: Vec<CheckOutcome>,
}

impl CheckReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Mixed relative error |a - b| / max(1, |a|), maximized over entries.
fn mixed_rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(1.0)
}

fn central_step(x: &DVector<f64>, k: usize, scale: f64) -> f64 {
    scale * x[k].abs().max(1.0)
}

const ORACLE_FD_SCALE: f64 = 1e-6;

/// Central-difference oracle for the gradient, from the model's value.
pub fn fd_gradient_of_value(model: &dyn EnergyModel, x: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
    let n = model.dim();
    let mut g = DVector::zeros(n);
    for k in 0..n {
        let h = central_step(x, k, ORACLE_FD_SCALE);
        let mut xp = x.clone();
        xp[k] += h;
        let mut xm = x.clone();
        xm[k] -= h;
        g[k] = (model.value(&xp, t)? - model.value(&xm, t)?) / (2.0 * h);
    }
    Ok(g)
}

/// Central-difference oracle for the Hessian, from the model's gradient.
pub fn fd_hessian_of_gradient(model: &dyn EnergyModel, x: &DVector<f64>, t: f64) -> Result<DMatrix<f64>> {
    let n = model.dim();
    let mut hess = DMatrix::zeros(n, n);
    for k in 0..n {
        let h = central_step(x, k, ORACLE_FD_SCALE);
        let mut xp = x.clone();
        xp[k] += h;
        let mut xm = x.clone();
        xm[k] -= h;
        let gp = model.gradient(&xp, t)?;
        let gm = model.gradient(&xm, t)?;
        for i in 0..n {
            hess[(i, k)] = (gp[i] - gm[i]) / (2.0 * h);
        }
    }
    Ok(hess)
}

/// Central-difference oracle for the third derivatives, from the model's
/// Hessian.
pub fn fd_thirds_of_hessian(model: &dyn EnergyModel, x: &DVector<f64>, t: f64) -> Result<Rank3> {
    let n = model.dim();
    let mut thirds = Rank3::zeros(n);
    for k in 0..n {
        let h = central_step(x, k, ORACLE_FD_SCALE);
        let mut xp = x.clone();
        xp[k] += h;
        let mut xm = x.clone();
        xm[k] -= h;
        let hp = model.hessian(&xp, t)?;
        let hm = model.hessian(&xm, t)?;
        for i in 0..n {
            for j in 0..n {
                thirds[(i, j, k)] = (hp[(i, j)] - hm[(i, j)]) / (2.0 * h);
            }
        }
    }
    Ok(thirds)
}

/// Tolerances for the analytic-vs-finite-difference chain.
pub const GRAD_TOL: f64 = 1e-6;
pub const HESS_TOL: f64 = 1e-5;
pub const THIRDS_TOL: f64 = 1e-4;

/// Compare the model's analytic derivative chain against central finite
/// differences of the next-lower derivative at the given points. Returns
/// one outcome per derivative order.
pub fn derivative_cross_check(
    model: &dyn EnergyModel,
    label: &str,
    points: &[(DVector<f64>, f64)],
) -> Result<Vec<CheckOutcome>> {
    let n = model.dim();
    let mut worst_g: f64 = 0.0;
    let mut worst_h: f64 = 0.0;
    let mut worst_t: f64 = 0.0;
    for (x, t) in points {
        let g = model.gradient(x, *t)?;
        let g_fd = fd_gradient_of_value(model, x, *t)?;
        for i in 0..n {
            worst_g = worst_g.max(mixed_rel(g[i], g_fd[i]));
        }
        let h = model.hessian(x, *t)?;
        let h_fd = fd_hessian_of_gradient(model, x, *t)?;
        for i in 0..n {
            for j in 0..n {
                worst_h = worst_h.max(mixed_rel(h[(i, j)], h_fd[(i, j)]));
            }
        }
        let th = model.third_derivatives(x, *t)?;
        let th_fd = fd_thirds_of_hessian(model, x, *t)?;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    worst_t = worst_t.max(mixed_rel(th[(i, j, k)], th_fd[(i, j, k)]));
                }
            }
        }
    }
    Ok(vec![
        CheckOutcome::new(format!("{label}_gradient_vs_fd"), worst_g, GRAD_TOL),
        CheckOutcome::new(format!("{label}_hessian_vs_fd"), worst_h, HESS_TOL),
        CheckOutcome::new(format!("{label}_thirds_vs_fd"), worst_t, THIRDS_TOL),
    ])
}

/// Exact symmetry of the Christoffel symbols in their lower indices.
pub fn christoffel_symmetry_check(
    model: &dyn EnergyModel,
    label: &str,
    points: &[(DVector<f64>, f64)],
    opts: &MetricOptions,
) -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    for (x, t) in points {
        let metric = metric_from_energy(model, x, *t, opts)?;
        worst = worst.max(metric.gamma.max_lower_asymmetry());
    }
    Ok(CheckOutcome::new(
        format!("{label}_christoffel_symmetry"),
        worst,
        0.0,
    ))
}

/// Independent connection oracle: finite differences of the metric itself
/// (half the analytic Hessian plus the regularizer) fed through the
/// Christoffel formula, with the inverse obtained by a direct linear solve.
pub fn christoffel_vs_fd_metric_check(
    model: &dyn EnergyModel,
    label: &str,
    points: &[(DVector<f64>, f64)],
    opts: &MetricOptions,
) -> Result<CheckOutcome> {
    let n = model.dim();
    let metric_at = |x: &DVector<f64>, t: f64| -> Result<DMatrix<f64>> {
        let mut g = model.hessian(x, t)? * 0.5;
        for i in 0..n {
            g[(i, i)] += opts.upsilon;
        }
        Ok(g)
    };
    // Larger step than the derivative oracles: the metric's own derivatives
    // are stiff, and this scale sits at the truncation/roundoff optimum.
    const METRIC_FD_SCALE: f64 = 3e-7;
    let mut worst: f64 = 0.0;
    for (x, t) in points {
        let metric = metric_from_energy(model, x, *t, opts)?;
        let mut dg = Rank3::zeros(n);
        for k in 0..n {
            let h = central_step(x, k, METRIC_FD_SCALE);
            let mut xp = x.clone();
            xp[k] += h;
            let mut xm = x.clone();
            xm[k] -= h;
            let gp = metric_at(&xp, *t)?;
            let gm = metric_at(&xm, *t)?;
            for i in 0..n {
                for j in 0..n {
                    dg[(i, j, k)] = (gp[(i, j)] - gm[(i, j)]) / (2.0 * h);
                }
            }
        }
        let g = metric_at(x, *t)?;
        let g_inv = g
            .clone()
            .lu()
            .try_inverse()
            .ok_or_else(|| crate::error::GeodevError::NonPositiveDefinite {
                min_eigenvalue: f64::NAN,
                floor: opts.pd_floor,
            })?;
        let gamma_fd = christoffel(&g_inv, &dg);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    worst = worst.max(mixed_rel(metric.gamma[(i, j, k)], gamma_fd[(i, j, k)]));
                }
            }
        }
    }
    Ok(CheckOutcome::new(
        format!("{label}_christoffel_vs_fd_metric"),
        worst,
        1e-6,
    ))
}

/// Relative drift of the metric speed g(v, v) along a geodesic over unit
/// time.
pub fn geodesic_conservation_check(
    model: &dyn EnergyModel,
    label: &str,
    x0: &DVector<f64>,
    v0: &DVector<f64>,
    opts: &MetricOptions,
) -> Result<CheckOutcome> {
    let traj = geodesic_trajectory(model, x0, v0, 1.0, 1e-3, opts)?;
    let speed0 = metric_speed_squared(model, x0, v0, opts)?;
    let mut worst: f64 = 0.0;
    for (_, x, v) in &traj {
        let s = metric_speed_squared(model, x, v, opts)?;
        worst = worst.max((s - speed0).abs() / speed0.abs().max(1e-300));
    }
    Ok(CheckOutcome::new(
        format!("{label}_geodesic_speed_conservation"),
        worst,
        1e-6,
    ))
}

/// With a quadratic energy of unit half-Hessian the developed and Euclidean
/// steps must agree bit for bit under shared noise.
pub fn flat_metric_reduction_check(steps: usize, seed: u64) -> Result<CheckOutcome> {
    let model = QuadraticEnergy::isotropic(2, 1.0);
    let sys = SdeSystem::new(
        2,
        |x, _| DVector::from_vec(vec![0.3 - x[1], 0.1 * x[0]]),
        |_, _| DMatrix::from_row_slice(2, 2, &[0.8, 0.1, 0.0, 0.5]),
    );
    let opts = MetricOptions::default();
    let dt = 0.01;
    let mut x_dev = DVector::from_vec(vec![0.2, -0.1]);
    let mut x_eu = x_dev.clone();
    let mut worst: f64 = 0.0;
    for step in 0..steps {
        let t = step as f64 * dt;
        let db = gaussian_increments(seed, 0, step, 2, dt);
        x_dev = developed_em_step(&sys, &model, &x_dev, t, dt, &db, &opts, Scheme::Developed)?;
        x_eu = euclidean_em_step(&sys, &x_eu, t, dt, &db)?;
        worst = worst.max((&x_dev - &x_eu).abs().max());
    }
    Ok(CheckOutcome::new("flat_metric_reduction", worst, 0.0))
}

/// g_inv from the eigendecomposition must agree with a direct linear solve.
pub fn inverse_consistency_check(
    model: &dyn EnergyModel,
    label: &str,
    points: &[(DVector<f64>, f64)],
    opts: &MetricOptions,
) -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    for (x, t) in points {
        let metric = metric_from_energy(model, x, *t, opts)?;
        let solved = metric
            .g
            .clone()
            .lu()
            .try_inverse()
            .expect("metric verified PD");
        let diff = (&metric.g_inv - &solved).norm() / solved.norm().max(1.0);
        worst = worst.max(diff);
        let resid_sqrt = (&metric.g_inv_sqrt * &metric.g_inv_sqrt - &metric.g_inv).norm()
            / metric.g_inv.norm().max(1e-300);
        worst = worst.max(resid_sqrt);
    }
    Ok(CheckOutcome::new(
        format!("{label}_inverse_consistency"),
        worst,
        1e-8,
    ))
}

/// Seeded admissible evaluation points for each model family.
pub fn seeded_points_well(n_points: usize, seed: u64) -> Vec<(DVector<f64>, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_points)
        .map(|_| {
            let x = DVector::from_vec(vec![
                1.0 + rng.gen_range(-0.02..0.02),
                2.0 + rng.gen_range(-0.02..0.02),
            ]);
            (x, 0.0)
        })
        .collect()
}

pub fn seeded_points_duffing(n_points: usize, seed: u64) -> Vec<(DVector<f64>, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xD0FF);
    (0..n_points)
        .map(|_| {
            let x = DVector::from_vec(vec![
                rng.gen_range(0.08..0.12),
                rng.gen_range(0.08..0.12),
            ]);
            (x, rng.gen_range(0.0..5.0))
        })
        .collect()
}

pub fn seeded_points_ackley(dim: usize, n_points: usize, seed: u64) -> Vec<(DVector<f64>, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xACC1);
    let mut out = Vec::with_capacity(n_points);
    while out.len() < n_points {
        let x = DVector::from_fn(dim, |_, _| rng.gen_range(-3.0..3.0));
        if x.norm() > 0.15 {
            out.push((x, 0.0));
        }
    }
    out
}

/// The standard trio of models used throughout the experiments.
pub fn reference_models() -> (PotentialWellEnergy, DriftConstraintEnergy, AckleyEnergy) {
    let well = PotentialWellEnergy::new(
        DVector::from_vec(vec![1.0, 2.0]),
        DVector::from_vec(vec![400.0, 400.0]),
    )
    .expect("valid parameters");
    let duffing = DriftConstraintEnergy::from_initial_state(
        1000.0,
        300.0,
        0.05,
        1.0,
        &DVector::from_vec(vec![0.1, 0.1]),
    );
    let ackley = AckleyEnergy::standard(2);
    (well, duffing, ackley)
}

/// Run the full invariant suite at 20 seeded points per model.
pub fn run_all_checks() -> Result<CheckReport> {
    let (well, duffing, ackley) = reference_models();
    let pts_well = seeded_points_well(20, 7);
    let pts_duffing = seeded_points_duffing(20, 7);
    let pts_ackley = seeded_points_ackley(2, 20, 7);
    let opts_well = MetricOptions::default();
    let opts_duffing = MetricOptions::with_upsilon(1e4);
    let opts_ackley = MetricOptions::with_upsilon(1e6);

    let mut checks = Vec::new();
    checks.extend(derivative_cross_check(&well, "well", &pts_well)?);
    checks.extend(derivative_cross_check(&duffing, "duffing", &pts_duffing)?);
    checks.extend(derivative_cross_check(&ackley, "ackley", &pts_ackley)?);
    checks.push(christoffel_symmetry_check(&well, "well", &pts_well, &opts_well)?);
    checks.push(christoffel_symmetry_check(
        &duffing,
        "duffing",
        &pts_duffing,
        &opts_duffing,
    )?);
    checks.push(christoffel_symmetry_check(
        &ackley,
        "ackley",
        &pts_ackley,
        &opts_ackley,
    )?);
    checks.push(christoffel_vs_fd_metric_check(
        &well, "well", &pts_well, &opts_well,
    )?);
    checks.push(christoffel_vs_fd_metric_check(
        &duffing,
        "duffing",
        &pts_duffing,
        &opts_duffing,
    )?);
    checks.push(christoffel_vs_fd_metric_check(
        &ackley,
        "ackley",
        &pts_ackley,
        &opts_ackley,
    )?);
    checks.push(geodesic_conservation_check(
        &well,
        "well",
        &DVector::from_vec(vec![1.01, 2.01]),
        &DVector::from_vec(vec![0.3, -0.2]),
        &opts_well,
    )?);
    checks.push(flat_metric_reduction_check(1000, 99)?);
    checks.push(inverse_consistency_check(
        &well, "well", &pts_well, &opts_well,
    )?);
    checks.push(inverse_consistency_check(
        &ackley,
        "ackley",
        &pts_ackley,
        &opts_ackley,
    )?);
    Ok(CheckReport { checks })
}
