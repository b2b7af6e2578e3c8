//! Concrete energy models: exponential potential well, Hamiltonian
//! constraint energy for the noisy Duffing oscillator, the Ackley objective,
//! plus a finite-difference model used as a cross-check oracle.

use nalgebra::{DMatrix, DVector};

use crate::energy::{checked_exp, EnergyModel};
use crate::error::{GeodevError, Result};
use crate::tensor::Rank3;

/// E(x) = exp(sum_p d_p (x - lambda)_p^2), sharply trapping states near
/// `lambda` when the `d` entries are large.
#[derive(Debug, Clone)]
pub struct PotentialWellEnergy {
    lambda: DVector<f64>,
    d: DVector<f64>,
}

impl PotentialWellEnergy {
    pub fn new(lambda: DVector<f64>, d: DVector<f64>) -> Result<Self> {
        if lambda.len() != d.len() || lambda.is_empty() {
            return Err(GeodevError::Config(
                "potential well: lambda and d must share a positive dimension".into(),
            ));
        }
        if d.iter().any(|&v| v <= 0.0) {
            return Err(GeodevError::Config(
                "potential well: every d entry must be positive".into(),
            ));
        }
        Ok(Self { lambda, d })
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.lambda
    }

    fn exponent(&self, x: &DVector<f64>) -> f64 {
        let mut s = 0.0;
        for p in 0..self.d.len() {
            let y = x[p] - self.lambda[p];
            s += self.d[p] * y * y;
        }
        s
    }
}

impl EnergyModel for PotentialWellEnergy {
    fn dim(&self) -> usize {
        self.d.len()
    }

    fn value(&self, x: &DVector<f64>, _t: f64) -> Result<f64> {
        checked_exp(self.exponent(x))
    }

    fn gradient(&self, x: &DVector<f64>, _t: f64) -> Result<DVector<f64>> {
        let phi = checked_exp(self.exponent(x))?;
        let y = x - &self.lambda;
        Ok(DVector::from_fn(self.dim(), |j, _| {
            2.0 * self.d[j] * y[j] * phi
        }))
    }

    fn hessian(&self, x: &DVector<f64>, _t: f64) -> Result<DMatrix<f64>> {
        let phi = checked_exp(self.exponent(x))?;
        let y = x - &self.lambda;
        let n = self.dim();
        Ok(DMatrix::from_fn(n, n, |i, j| {
            let mut h = 4.0 * self.d[i] * self.d[j] * y[i] * y[j] * phi;
            if i == j {
                h += 2.0 * self.d[i] * phi;
            }
            h
        }))
    }

    fn third_derivatives(&self, x: &DVector<f64>, _t: f64) -> Result<Rank3> {
        let phi = checked_exp(self.exponent(x))?;
        let y = x - &self.lambda;
        let d = &self.d;
        Ok(Rank3::from_fn(self.dim(), |i, j, k| {
            let mut v = 8.0 * d[i] * d[j] * d[k] * y[i] * y[j] * y[k] * phi;
            if i == k {
                v += 4.0 * d[i] * d[j] * y[j] * phi;
            }
            if j == k {
                v += 4.0 * d[i] * d[j] * y[i] * phi;
            }
            if i == j {
                v += 4.0 * d[i] * d[k] * y[k] * phi;
            }
            v
        }))
    }
}

/// Time-dependent constraint energy for drift-preserving Duffing
/// integration: E_t = exp(beta (V - Z_t)^2) - 1, where V is the oscillator
/// Hamiltonian and Z_t the theoretical mean-energy line.
#[derive(Debug, Clone)]
pub struct DriftConstraintEnergy {
    pub k: f64,
    pub alpha: f64,
    pub sigma: f64,
    pub beta_e: f64,
    pub h0: f64,
}

impl DriftConstraintEnergy {
    pub fn new(k: f64, alpha: f64, sigma: f64, beta_e: f64, h0: f64) -> Self {
        Self {
            k,
            alpha,
            sigma,
            beta_e,
            h0,
        }
    }

    /// Constructor pinning H0 to the Hamiltonian of the initial state.
    pub fn from_initial_state(k: f64, alpha: f64, sigma: f64, beta_e: f64, x0: &DVector<f64>) -> Self {
        let mut m = Self::new(k, alpha, sigma, beta_e, 0.0);
        m.h0 = m.hamiltonian(x0);
        m
    }

    /// V(x) = x2^2/2 + k x1^2/2 + alpha x1^4/4.
    pub fn hamiltonian(&self, x: &DVector<f64>) -> f64 {
        let (x1, x2) = (x[0], x[1]);
        0.5 * x2 * x2 + 0.5 * self.k * x1 * x1 + 0.25 * self.alpha * x1.powi(4)
    }

    /// Z_t = H0 + sigma^2 t / 2.
    pub fn mean_energy(&self, t: f64) -> f64 {
        self.h0 + 0.5 * self.sigma * self.sigma * t
    }

    fn v_gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_vec(vec![self.k * x[0] + self.alpha * x[0].powi(3), x[1]])
    }

    fn v_hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_vec(vec![
            self.k + 3.0 * self.alpha * x[0] * x[0],
            1.0,
        ]))
    }

    // phi = exp(beta w^2) with w = V - Z_t, guarded against overflow.
    fn common(&self, x: &DVector<f64>, t: f64) -> Result<(f64, f64)> {
        let w = self.hamiltonian(x) - self.mean_energy(t);
        let phi = checked_exp(self.beta_e * w * w)?;
        Ok((w, phi))
    }
}

impl EnergyModel for DriftConstraintEnergy {
    fn dim(&self) -> usize {
        2
    }

    fn value(&self, x: &DVector<f64>, t: f64) -> Result<f64> {
        let (_, phi) = self.common(x, t)?;
        Ok(phi - 1.0)
    }

    fn gradient(&self, x: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
        let (w, phi) = self.common(x, t)?;
        let b = self.beta_e;
        Ok(self.v_gradient(x) * (2.0 * b * w * phi))
    }

    fn hessian(&self, x: &DVector<f64>, t: f64) -> Result<DMatrix<f64>> {
        let (w, phi) = self.common(x, t)?;
        let b = self.beta_e;
        let dv = self.v_gradient(x);
        let ddv = self.v_hessian(x);
        // d2E/dxi dxj = 2b phi (1 + 2b w^2) Vi Vj + 2b w phi Vij
        let outer_coeff = 2.0 * b * phi * (1.0 + 2.0 * b * w * w);
        let hess_coeff = 2.0 * b * w * phi;
        Ok(&dv * dv.transpose() * outer_coeff + ddv * hess_coeff)
    }

    fn third_derivatives(&self, x: &DVector<f64>, t: f64) -> Result<Rank3> {
        let (w, phi) = self.common(x, t)?;
        let b = self.beta_e;
        let dv = self.v_gradient(x);
        let ddv = self.v_hessian(x);
        // Only nonzero third derivative of V is d^3V/dx1^3 = 6 alpha x1.
        let v111 = 6.0 * self.alpha * x[0];
        let triple_coeff = 4.0 * b * b * w * phi * (3.0 + 2.0 * b * w * w);
        let mixed_coeff = 2.0 * b * phi * (1.0 + 2.0 * b * w * w);
        let third_coeff = 2.0 * b * w * phi;
        Ok(Rank3::from_fn(2, |i, j, k| {
            let mut v = triple_coeff * dv[i] * dv[j] * dv[k]
                + mixed_coeff
                    * (ddv[(i, k)] * dv[j] + ddv[(j, k)] * dv[i] + ddv[(i, j)] * dv[k]);
            if i == 0 && j == 0 && k == 0 {
                v += third_coeff * v111;
            }
            v
        }))
    }
}

/// The Ackley benchmark objective, treated as an energy-like function.
#[derive(Debug, Clone)]
pub struct AckleyEnergy {
    pub dim: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Radius below which derivative evaluation is refused.
    pub origin_eps: f64,
}

impl AckleyEnergy {
    pub fn new(dim: usize, a: f64, b: f64, c: f64) -> Self {
        Self {
            dim,
            a,
            b,
            c,
            origin_eps: 1e-8,
        }
    }

    /// a = 20, b = 0.2, c = 2 pi.
    pub fn standard(dim: usize) -> Self {
        Self::new(dim, 20.0, 0.2, 2.0 * std::f64::consts::PI)
    }

    fn radius_checked(&self, x: &DVector<f64>) -> Result<f64> {
        let r = x.norm();
        if r < self.origin_eps {
            Err(GeodevError::OriginSingularity {
                eps: self.origin_eps,
            })
        } else {
            Ok(r)
        }
    }

    // T1 = exp(u), u = -(b/sqrt(n)) |x|; returns (T1, u_j, u_jk, u_jkm closure inputs)
    fn t1_terms(&self, x: &DVector<f64>, r: f64) -> (f64, DVector<f64>, DMatrix<f64>, Rank3) {
        let n = self.dim;
        let s = -self.b / (n as f64).sqrt();
        let t1 = (s * r).exp();
        let du = DVector::from_fn(n, |j, _| s * x[j] / r);
        let r3 = r * r * r;
        let ddu = DMatrix::from_fn(n, n, |j, k| {
            let mut v = -s * x[j] * x[k] / r3;
            if j == k {
                v += s / r;
            }
            v
        });
        let r5 = r3 * r * r;
        let dddu = Rank3::from_fn(n, |j, k, m| {
            let mut v = 3.0 * s * x[j] * x[k] * x[m] / r5;
            if j == k {
                v -= s * x[m] / r3;
            }
            if j == m {
                v -= s * x[k] / r3;
            }
            if k == m {
                v -= s * x[j] / r3;
            }
            v
        });
        (t1, du, ddu, dddu)
    }

    fn t2_terms(&self, x: &DVector<f64>) -> (f64, DVector<f64>, DVector<f64>, DVector<f64>) {
        let n = self.dim as f64;
        let c = self.c;
        let v: f64 = x.iter().map(|&xi| (c * xi).cos()).sum::<f64>() / n;
        let t2 = v.exp();
        // v is separable: dv, ddv, dddv are diagonal profiles per coordinate.
        let dv = DVector::from_fn(self.dim, |j, _| -c / n * (c * x[j]).sin());
        let ddv = DVector::from_fn(self.dim, |j, _| -c * c / n * (c * x[j]).cos());
        let dddv = DVector::from_fn(self.dim, |j, _| c * c * c / n * (c * x[j]).sin());
        (t2, dv, ddv, dddv)
    }
}

impl EnergyModel for AckleyEnergy {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &DVector<f64>, _t: f64) -> Result<f64> {
        let n = self.dim as f64;
        let r = x.norm();
        let t1 = (-self.b * r / n.sqrt()).exp();
        let t2 = (x.iter().map(|&xi| (self.c * xi).cos()).sum::<f64>() / n).exp();
        Ok(-self.a * t1 - t2 + self.a + std::f64::consts::E)
    }

    fn gradient(&self, x: &DVector<f64>, _t: f64) -> Result<DVector<f64>> {
        let r = self.radius_checked(x)?;
        let (t1, du, _, _) = self.t1_terms(x, r);
        let (t2, dv, _, _) = self.t2_terms(x);
        Ok(DVector::from_fn(self.dim, |j, _| {
            -self.a * t1 * du[j] - t2 * dv[j]
        }))
    }

    fn hessian(&self, x: &DVector<f64>, _t: f64) -> Result<DMatrix<f64>> {
        let r = self.radius_checked(x)?;
        let (t1, du, ddu, _) = self.t1_terms(x, r);
        let (t2, dv, ddv, _) = self.t2_terms(x);
        Ok(DMatrix::from_fn(self.dim, self.dim, |j, k| {
            let h1 = t1 * (du[j] * du[k] + ddu[(j, k)]);
            let mut h2 = t2 * dv[j] * dv[k];
            if j == k {
                h2 += t2 * ddv[j];
            }
            -self.a * h1 - h2
        }))
    }

    fn third_derivatives(&self, x: &DVector<f64>, _t: f64) -> Result<Rank3> {
        let r = self.radius_checked(x)?;
        let (t1, du, ddu, dddu) = self.t1_terms(x, r);
        let (t2, dv, ddv, dddv) = self.t2_terms(x);
        Ok(Rank3::from_fn(self.dim, |j, k, m| {
            let d1 = t1
                * (du[j] * du[k] * du[m]
                    + ddu[(j, k)] * du[m]
                    + ddu[(j, m)] * du[k]
                    + ddu[(k, m)] * du[j]
                    + dddu[(j, k, m)]);
            let mut d2 = t2 * dv[j] * dv[k] * dv[m];
            if j == k {
                d2 += t2 * ddv[j] * dv[m];
            }
            if j == m {
                d2 += t2 * ddv[j] * dv[k];
            }
            if k == m {
                d2 += t2 * ddv[k] * dv[j];
            }
            if j == k && k == m {
                d2 += t2 * dddv[j];
            }
            -self.a * d1 - d2
        }))
    }
}

/// E(x) = x^T A x with symmetric A; constant Hessian 2A, zero thirds.
#[derive(Debug, Clone)]
pub struct QuadraticEnergy {
    a: DMatrix<f64>,
}

impl QuadraticEnergy {
    pub fn new(a: DMatrix<f64>) -> Self {
        assert!(a.is_square());
        Self { a }
    }

    /// E(x) = coeff * x^T x.
    pub fn isotropic(dim: usize, coeff: f64) -> Self {
        Self::new(DMatrix::identity(dim, dim) * coeff)
    }
}

impl EnergyModel for QuadraticEnergy {
    fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn value(&self, x: &DVector<f64>, _t: f64) -> Result<f64> {
        Ok((x.transpose() * &self.a * x)[(0, 0)])
    }

    fn gradient(&self, x: &DVector<f64>, _t: f64) -> Result<DVector<f64>> {
        Ok(&self.a * x * 2.0)
    }

    fn hessian(&self, _x: &DVector<f64>, _t: f64) -> Result<DMatrix<f64>> {
        Ok(&self.a * 2.0)
    }

    fn third_derivatives(&self, _x: &DVector<f64>, _t: f64) -> Result<Rank3> {
        Ok(Rank3::zeros(self.dim()))
    }
}

/// One-dimensional model with E(x) = e^{2x}/2, so the induced metric is
/// g(x) = e^{2x} and the single Christoffel symbol equals 1 everywhere.
/// Mainly useful for closed-form validation of the connection machinery.
#[derive(Debug, Clone, Copy)]
pub struct ExponentialMetricEnergy1d;

impl EnergyModel for ExponentialMetricEnergy1d {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, x: &DVector<f64>, _t: f64) -> Result<f64> {
        Ok(0.5 * checked_exp(2.0 * x[0])?)
    }

    fn gradient(&self, x: &DVector<f64>, _t: f64) -> Result<DVector<f64>> {
        Ok(DVector::from_element(1, checked_exp(2.0 * x[0])?))
    }

    fn hessian(&self, x: &DVector<f64>, _t: f64) -> Result<DMatrix<f64>> {
        Ok(DMatrix::from_element(1, 1, 2.0 * checked_exp(2.0 * x[0])?))
    }

    fn third_derivatives(&self, x: &DVector<f64>, _t: f64) -> Result<Rank3> {
        let mut t = Rank3::zeros(1);
        t[(0, 0, 0)] = 4.0 * checked_exp(2.0 * x[0])?;
        Ok(t)
    }
}

/// Energy model whose derivatives are central finite differences of a value
/// function. Step sizes are scaled per coordinate as `scale * max(1, |x_k|)`,
/// with a coarser scale at each derivative order to balance truncation
/// against round-off.
pub struct FdEnergyModel<F> {
    dim: usize,
    value_fn: F,
    pub grad_scale: f64,
    pub hess_scale: f64,
    pub thirds_scale: f64,
}

/// Wrap a smooth value function as an [`EnergyModel`] differentiated
/// numerically; the cross-check oracle for the analytic models.
pub fn finite_difference_model<F>(value_fn: F, dim: usize) -> FdEnergyModel<F>
where
    F: Fn(&DVector<f64>, f64) -> Result<f64> + Sync + Send,
{
    FdEnergyModel {
        dim,
        value_fn,
        grad_scale: 1e-6,
        hess_scale: 1e-4,
        thirds_scale: 1e-3,
    }
}

impl<F> FdEnergyModel<F>
where
    F: Fn(&DVector<f64>, f64) -> Result<f64> + Sync + Send,
{
    /// Product of symmetric difference operators along `axes`, each entry an
    /// `(index, step)` pair; repeated indices yield higher-order differences.
    fn central_diff(&self, x: &DVector<f64>, t: f64, axes: &[(usize, f64)]) -> Result<f64> {
        let mut sum = 0.0;
        let combos = 1usize << axes.len();
        for mask in 0..combos {
            let mut xs = x.clone();
            let mut sign = 1.0;
            for (bit, &(idx, h)) in axes.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    xs[idx] += h;
                } else {
                    xs[idx] -= h;
                    sign = -sign;
                }
            }
            sum += sign * (self.value_fn)(&xs, t)?;
        }
        let denom: f64 = axes.iter().map(|&(_, h)| 2.0 * h).product();
        Ok(sum / denom)
    }

    fn step(&self, x: &DVector<f64>, k: usize, scale: f64) -> f64 {
        scale * x[k].abs().max(1.0)
    }
}

impl<F> EnergyModel for FdEnergyModel<F>
where
    F: Fn(&DVector<f64>, f64) -> Result<f64> + Sync + Send,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &DVector<f64>, t: f64) -> Result<f64> {
        (self.value_fn)(x, t)
    }

    fn gradient(&self, x: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
        let mut g = DVector::zeros(self.dim);
        for j in 0..self.dim {
            g[j] = self.central_diff(x, t, &[(j, self.step(x, j, self.grad_scale))])?;
        }
        Ok(g)
    }

    fn hessian(&self, x: &DVector<f64>, t: f64) -> Result<DMatrix<f64>> {
        let mut h = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for j in i..self.dim {
                let v = self.central_diff(
                    x,
                    t,
                    &[
                        (i, self.step(x, i, self.hess_scale)),
                        (j, self.step(x, j, self.hess_scale)),
                    ],
                )?;
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        Ok(h)
    }

    fn third_derivatives(&self, x: &DVector<f64>, t: f64) -> Result<Rank3> {
        let mut out = Rank3::zeros(self.dim);
        for i in 0..self.dim {
            for j in i..self.dim {
                for k in j..self.dim {
                    let v = self.central_diff(
                        x,
                        t,
                        &[
                            (i, self.step(x, i, self.thirds_scale)),
                            (j, self.step(x, j, self.thirds_scale)),
                            (k, self.step(x, k, self.thirds_scale)),
                        ],
                    )?;
                    // fill all permutations
                    for (a, b, c) in [
                        (i, j, k),
                        (i, k, j),
                        (j, i, k),
                        (j, k, i),
                        (k, i, j),
                        (k, j, i),
                    ] {
                        out[(a, b, c)] = v;
                    }
                }
            }
        }
        Ok(out)
    }

    fn has_analytic_thirds(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn well() -> PotentialWellEnergy {
        PotentialWellEnergy::new(
            DVector::from_vec(vec![1.0, 2.0]),
            DVector::from_vec(vec![400.0, 400.0]),
        )
        .unwrap()
    }

    #[test]
    fn well_at_center() {
        let m = well();
        let x = DVector::from_vec(vec![1.0, 2.0]);
        assert_eq!(m.value(&x, 0.0).unwrap(), 1.0);
        assert_eq!(m.gradient(&x, 0.0).unwrap(), DVector::zeros(2));
        let h = m.hessian(&x, 0.0).unwrap();
        assert_eq!(h, DMatrix::from_diagonal(&DVector::from_vec(vec![800.0, 800.0])));
    }

    #[test]
    fn well_value_off_center() {
        let m = well();
        let x = DVector::from_vec(vec![1.01, 2.0]);
        // 400 * 0.01^2 = 0.04
        assert_relative_eq!(m.value(&x, 0.0).unwrap(), 0.04f64.exp(), max_relative = 1e-12);
    }

    #[test]
    fn well_overflow_guard() {
        let m = well();
        let x = DVector::from_vec(vec![10.0, 2.0]);
        assert!(matches!(
            m.value(&x, 0.0),
            Err(GeodevError::EnergyOverflow { .. })
        ));
    }

    fn duffing() -> DriftConstraintEnergy {
        DriftConstraintEnergy::from_initial_state(
            1000.0,
            300.0,
            0.05,
            1.0,
            &DVector::from_vec(vec![0.1, 0.1]),
        )
    }

    #[test]
    fn duffing_h0_matches_hand_value() {
        // H = 0.01/2 + 500*0.01 + 75*0.0001 = 5.0125
        assert_relative_eq!(duffing().h0, 5.0125, max_relative = 1e-14);
    }

    #[test]
    fn duffing_on_shell() {
        let m = duffing();
        let x = DVector::from_vec(vec![0.1, 0.1]);
        // At t=0 the initial state sits on the shell V = Z_0.
        assert_relative_eq!(m.value(&x, 0.0).unwrap(), 0.0, epsilon = 1e-14);
        assert!(m.gradient(&x, 0.0).unwrap().norm() < 1e-12);
        // Only the outer-product term survives: hessian = 2 beta dV dV^T.
        let dv = m.v_gradient(&x);
        let expected = &dv * dv.transpose() * (2.0 * m.beta_e);
        let h = m.hessian(&x, 0.0).unwrap();
        assert_relative_eq!((h - expected).norm(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn duffing_mean_energy_is_affine() {
        let m = duffing();
        assert_relative_eq!(m.mean_energy(0.0), 5.0125);
        assert_relative_eq!(m.mean_energy(10.0), 5.0125 + 0.5 * 0.0025 * 10.0);
    }

    #[test]
    fn ackley_value_at_origin_and_unit_point() {
        let m = AckleyEnergy::standard(2);
        let zero = DVector::zeros(2);
        assert_relative_eq!(m.value(&zero, 0.0).unwrap(), 0.0, epsilon = 1e-14);
        let ones = DVector::from_element(2, 1.0);
        assert_relative_eq!(
            m.value(&ones, 0.0).unwrap(),
            3.625384938440363,
            max_relative = 1e-12
        );
    }

    #[test]
    fn ackley_refuses_derivatives_at_origin() {
        let m = AckleyEnergy::standard(2);
        let x = DVector::from_element(2, 1e-10);
        assert!(matches!(
            m.gradient(&x, 0.0),
            Err(GeodevError::OriginSingularity { .. })
        ));
    }

    #[test]
    fn ackley_symmetries() {
        let m = AckleyEnergy::standard(3);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let x = DVector::from_fn(3, |_, _| rng.gen_range(-4.0..4.0));
            let f = m.value(&x, 0.0).unwrap();
            let flipped = -&x;
            assert_relative_eq!(m.value(&flipped, 0.0).unwrap(), f, max_relative = 1e-12);
            let permuted = DVector::from_vec(vec![x[2], x[0], x[1]]);
            assert_relative_eq!(m.value(&permuted, 0.0).unwrap(), f, max_relative = 1e-12);
        }
    }

    #[test]
    fn fd_model_recovers_quadratic_hessian() {
        let fd = finite_difference_model(|x: &DVector<f64>, _| Ok(x.norm_squared()), 2);
        let x = DVector::from_vec(vec![0.3, -0.7]);
        let h = fd.hessian(&x, 0.0).unwrap();
        assert_relative_eq!((h - DMatrix::identity(2, 2) * 2.0).norm(), 0.0, epsilon = 1e-6);
        assert!(fd.third_derivatives(&x, 0.0).unwrap().max_abs() < 1e-4);
        assert!(!fd.has_analytic_thirds());
    }

    #[test]
    fn fd_model_matches_well_hessian() {
        let m = well();
        let fd = {
            let m = m.clone();
            finite_difference_model(move |x: &DVector<f64>, t| m.value(x, t), 2)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let x = DVector::from_vec(vec![
                1.0 + rng.gen_range(-0.02..0.02),
                2.0 + rng.gen_range(-0.02..0.02),
            ]);
            let h = m.hessian(&x, 0.0).unwrap();
            let h_fd = fd.hessian(&x, 0.0).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let rel = (h[(i, j)] - h_fd[(i, j)]).abs() / h[(i, j)].abs().max(1.0);
                    assert!(rel < 1e-4, "rel err {rel}");
                }
            }
        }
    }

    #[test]
    fn fd_model_matches_ackley_gradient() {
        let m = AckleyEnergy::standard(2);
        let fd = {
            let m = m.clone();
            finite_difference_model(move |x: &DVector<f64>, t| m.value(x, t), 2)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut tested = 0;
        while tested < 20 {
            let x = DVector::from_fn(2, |_, _| rng.gen_range(-3.0..3.0));
            if x.norm() <= 0.1 {
                continue;
            }
            tested += 1;
            let g = m.gradient(&x, 0.0).unwrap();
            let g_fd = fd.gradient(&x, 0.0).unwrap();
            for i in 0..2 {
                let rel = (g[i] - g_fd[i]).abs() / g[i].abs().max(1.0);
                assert!(rel < 1e-6, "rel err {rel} at {x:?}");
            }
        }
    }

    #[test]
    fn exponential_metric_model_consistency() {
        let m = ExponentialMetricEnergy1d;
        let x = DVector::from_element(1, 0.4);
        assert_relative_eq!(m.hessian(&x, 0.0).unwrap()[(0, 0)], 2.0 * 0.8f64.exp());
        assert_relative_eq!(m.third_derivatives(&x, 0.0).unwrap()[(0, 0, 0)], 4.0 * 0.8f64.exp());
    }
}
