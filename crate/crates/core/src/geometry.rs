//! Riemannian metric derived from an energy model: g = Hess(E)/2 + Upsilon I,
//! its inverse and symmetric inverse square root, the Levi-Civita connection,
//! covariant derivatives and geodesics.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::energy::EnergyModel;
use crate::error::{GeodevError, Result};
use crate::tensor::Rank3;

/// Knobs shared by all metric computations.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricOptions {
    /// Additive regularizer Upsilon on the diagonal of g.
    pub upsilon: f64,
    /// Smallest admissible eigenvalue of the regularized metric.
    pub pd_floor: f64,
    /// Clamp eigenvalues at `pd_floor` instead of failing.
    pub clamp_eigenvalues: bool,
    /// Relative step scale for finite-difference fallbacks.
    pub fd_scale: f64,
}

impl Default for MetricOptions {
    fn default() -> Self {
        Self {
            upsilon: 0.0,
            pd_floor: 1e-10,
            clamp_eigenvalues: false,
            fd_scale: 1e-5,
        }
    }
}

impl MetricOptions {
    pub fn with_upsilon(upsilon: f64) -> Self {
        Self {
            upsilon,
            ..Self::default()
        }
    }
}

/// Metric data at one point: g, its inverse, the symmetric inverse square
/// root and the Christoffel symbols `gamma[(i, j, k)] = gamma^i_{jk}`.
#[derive(Debug, Clone)]
pub struct MetricState {
    pub dim: usize,
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    pub g_inv_sqrt: DMatrix<f64>,
    pub gamma: Rank3,
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigendecompose a symmetric PD matrix and return (inverse, inverse sqrt).
fn spd_inverse_and_inv_sqrt(
    g: &DMatrix<f64>,
    pd_floor: f64,
    clamp: bool,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let eig = SymmetricEigen::new(g.clone());
    let mut vals = eig.eigenvalues.clone();
    let min_eig = vals.min();
    if min_eig <= pd_floor {
        if clamp {
            for v in vals.iter_mut() {
                if *v < pd_floor {
                    *v = pd_floor;
                }
            }
        } else {
            return Err(GeodevError::NonPositiveDefinite {
                min_eigenvalue: min_eig,
                floor: pd_floor,
            });
        }
    }
    let v = &eig.eigenvectors;
    let inv = v * DMatrix::from_diagonal(&vals.map(|l| 1.0 / l)) * v.transpose();
    let inv_sqrt = v * DMatrix::from_diagonal(&vals.map(|l| 1.0 / l.sqrt())) * v.transpose();
    Ok((symmetrize(&inv), symmetrize(&inv_sqrt)))
}

/// Unique symmetric PD square root of g^{-1}, via eigendecomposition of g.
pub fn symmetric_inverse_sqrt(g: &DMatrix<f64>, pd_floor: f64) -> Result<DMatrix<f64>> {
    spd_inverse_and_inv_sqrt(g, pd_floor, false).map(|(_, s)| s)
}

/// d g_{ij} / d x_k = (1/2) d^3 E / dx_k dx_i dx_j. Uses analytic thirds
/// when the model provides them, otherwise central differences of the
/// Hessian. The Upsilon I regularizer contributes nothing.
pub fn derivative_of_metric(
    model: &dyn EnergyModel,
    x: &DVector<f64>,
    t: f64,
    fd_scale: f64,
) -> Result<Rank3> {
    let n = model.dim();
    assert_eq!(n, x.len());
    if model.has_analytic_thirds() {
        let thirds = model.third_derivatives(x, t)?;
        return Ok(Rank3::from_fn(n, |i, j, k| 0.5 * thirds[(i, j, k)]));
    }
    let mut dg = Rank3::zeros(n);
    for k in 0..n {
        let h = fd_scale * x[k].abs().max(1.0);
        let mut xp = x.clone();
        xp[k] += h;
        let mut xm = x.clone();
        xm[k] -= h;
        let hp = model.hessian(&xp, t)?;
        let hm = model.hessian(&xm, t)?;
        for i in 0..n {
            for j in 0..n {
                dg[(i, j, k)] = 0.5 * (hp[(i, j)] - hm[(i, j)]) / (2.0 * h);
            }
        }
    }
    Ok(dg)
}

/// gamma^k_{ij} = (1/2) g^{kl} (d_i g_{jl} + d_j g_{il} - d_l g_{ij}).
/// Only the lower triangle in (i, j) is computed; the mirror entry is
/// copied, so symmetry in the lower indices is exact.
pub fn christoffel(g_inv: &DMatrix<f64>, dg: &Rank3) -> Rank3 {
    let n = g_inv.nrows();
    let mut gamma = Rank3::zeros(n);
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += g_inv[(k, l)] * (dg[(j, l, i)] + dg[(i, l, j)] - dg[(i, j, l)]);
                }
                gamma[(k, i, j)] = 0.5 * s;
                gamma[(k, j, i)] = 0.5 * s;
            }
        }
    }
    gamma
}

/// Build the full metric state at `(x, t)`: g = Hess(E)/2 + Upsilon I with
/// inverse, inverse square root and connection coefficients.
pub fn metric_from_energy(
    model: &dyn EnergyModel,
    x: &DVector<f64>,
    t: f64,
    opts: &MetricOptions,
) -> Result<MetricState> {
    let n = model.dim();
    assert_eq!(n, x.len(), "state dimension must match the model");
    let mut g = symmetrize(&model.hessian(x, t)?) * 0.5;
    for i in 0..n {
        g[(i, i)] += opts.upsilon;
    }
    let (g_inv, g_inv_sqrt) = spd_inverse_and_inv_sqrt(&g, opts.pd_floor, opts.clamp_eigenvalues)?;
    let dg = derivative_of_metric(model, x, t, opts.fd_scale)?;
    let gamma = christoffel(&g_inv, &dg);
    Ok(MetricState {
        dim: n,
        g,
        g_inv,
        g_inv_sqrt,
        gamma,
    })
}

/// (nabla_X Y)^k = X^i d_i Y^k + X^i Y^j gamma^k_{ij}, with the directional
/// derivative supplied through the Jacobian `dy[(k, i)] = d_i Y^k`.
pub fn covariant_derivative(
    gamma: &Rank3,
    x_vec: &DVector<f64>,
    y_vec: &DVector<f64>,
    dy: &DMatrix<f64>,
) -> DVector<f64> {
    let n = gamma.dim();
    DVector::from_fn(n, |k, _| {
        let mut s = 0.0;
        for i in 0..n {
            s += x_vec[i] * dy[(k, i)];
            for j in 0..n {
                s += x_vec[i] * y_vec[j] * gamma[(k, i, j)];
            }
        }
        s
    })
}

/// One (time, position, velocity) sample along a geodesic.
pub type GeodesicSample = (f64, DVector<f64>, DVector<f64>);

/// Integrate the geodesic equation xdd^k = -xd^i xd^j gamma^k_{ij} with
/// classical fourth-order Runge-Kutta steps.
pub fn geodesic_trajectory(
    model: &dyn EnergyModel,
    x0: &DVector<f64>,
    v0: &DVector<f64>,
    t_span: f64,
    dt: f64,
    opts: &MetricOptions,
) -> Result<Vec<GeodesicSample>> {
    assert!(dt > 0.0 && t_span > 0.0);
    let accel = |x: &DVector<f64>, v: &DVector<f64>| -> Result<DVector<f64>> {
        let metric = metric_from_energy(model, x, 0.0, opts)?;
        let n = metric.dim;
        Ok(DVector::from_fn(n, |k, _| {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s -= v[i] * v[j] * metric.gamma[(k, i, j)];
                }
            }
            s
        }))
    };
    let n_steps = (t_span / dt).round() as usize;
    let mut out = Vec::with_capacity(n_steps + 1);
    let (mut x, mut v) = (x0.clone(), v0.clone());
    out.push((0.0, x.clone(), v.clone()));
    for step in 1..=n_steps {
        let k1x = v.clone();
        let k1v = accel(&x, &v)?;
        let k2x = &v + &k1v * (dt / 2.0);
        let k2v = accel(&(&x + &k1x * (dt / 2.0)), &k2x)?;
        let k3x = &v + &k2v * (dt / 2.0);
        let k3v = accel(&(&x + &k2x * (dt / 2.0)), &k3x)?;
        let k4x = &v + &k3v * dt;
        let k4v = accel(&(&x + &k3x * dt), &k4x)?;
        x += (k1x + &k2x * 2.0 + &k3x * 2.0 + k4x) * (dt / 6.0);
        v += (k1v + &k2v * 2.0 + &k3v * 2.0 + k4v) * (dt / 6.0);
        out.push((step as f64 * dt, x.clone(), v.clone()));
    }
    Ok(out)
}

/// Squared metric speed g_{ij}(x) v^i v^j, the conserved quantity along a
/// geodesic.
pub fn metric_speed_squared(
    model: &dyn EnergyModel,
    x: &DVector<f64>,
    v: &DVector<f64>,
    opts: &MetricOptions,
) -> Result<f64> {
    let metric = metric_from_energy(model, x, 0.0, opts)?;
    Ok((v.transpose() * &metric.g * v)[(0, 0)])
}
