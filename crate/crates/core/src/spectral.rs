//! Spectra and eigenfunctions of truncated Liouville operators.
//!
//! Eigenvalues of an `(N+1)×(N+1)` truncation approximate the spectrum of the operator.
//! They coincide with it exactly only when the truncation is triangular, i.e. for affine
//! symbols `f = αz + β`, where the diagonal is `{α·n}`. Everything else here is reported
//! together with a recomputed residual.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{HardyError, Result};
use crate::liouville::OperatorMatrix;
use crate::occupation::Trajectory;
use crate::series::{kernel, to_boundary, KernelSpec, TaylorPolynomial};

/// Minimum boundary grid used by the zero-free certificate.
pub const ZERO_FREE_SAMPLES: usize = 1024;

/// Eigenvalue with a unit-norm eigenvector and its residual `‖Av − λv‖`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenPair {
    pub value: Complex64,
    pub vector: TaylorPolynomial,
    pub residual: f64,
}

/// Complex Schur decomposition followed by triangular back-substitution.
///
/// Returns `(λ, v)` with `‖v‖ = 1`, in Schur order.
pub fn eigen_dense(m: &DMatrix<Complex64>) -> Result<Vec<(Complex64, DVector<Complex64>)>> {
    let n = m.nrows();
    assert!(m.is_square(), "eigen-decomposition of a non-square matrix");
    if n == 0 {
        return Ok(Vec::new());
    }
    if m.iter().all(|v| *v == Complex64::default()) {
        // Householder reflections degenerate on the zero matrix.
        return Ok((0..n)
            .map(|i| {
                (
                    Complex64::default(),
                    DVector::from_fn(n, |k, _| {
                        Complex64::new(if k == i { 1.0 } else { 0.0 }, 0.0)
                    }),
                )
            })
            .collect());
    }
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), f64::EPSILON, 1000 * n.max(10))
        .ok_or_else(|| non_convergence(m))?;
    let (q, t) = schur.unpack();
    if q.iter().chain(t.iter()).any(|v| !v.is_finite()) {
        return Err(non_convergence(m));
    }
    let scale = t.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let small = (f64::EPSILON * scale).max(f64::MIN_POSITIVE);

    let mut pairs = Vec::with_capacity(n);
    for i in 0..n {
        let lambda = t[(i, i)];
        let mut y = DVector::<Complex64>::zeros(n);
        y[i] = Complex64::new(1.0, 0.0);
        for j in (0..i).rev() {
            let s: Complex64 = ((j + 1)..=i).map(|k| t[(j, k)] * y[k]).sum();
            let mut d = t[(j, j)] - lambda;
            if d.norm() < small {
                d = Complex64::new(small, 0.0);
            }
            y[j] = -s / d;
            // Rescale to keep the recurrence away from overflow.
            let big = y.iter().map(|v| v.norm()).fold(0.0, f64::max);
            if big > 1e100 {
                y /= Complex64::new(big, 0.0);
            }
        }
        let mut v = &q * y;
        let norm = v.norm();
        v /= Complex64::new(norm, 0.0);
        pairs.push((lambda, v));
    }
    Ok(pairs)
}

fn non_convergence(m: &DMatrix<Complex64>) -> HardyError {
    let norms: Vec<f64> = m.column_iter().map(|c| c.norm()).collect();
    let max = norms.iter().copied().fold(0.0, f64::max);
    let min = norms.iter().copied().fold(f64::INFINITY, f64::min);
    HardyError::EigenNonConvergence {
        size: m.nrows(),
        frobenius: m.norm(),
        column_ratio: if min > 0.0 { max / min } else { f64::INFINITY },
    }
}

pub(crate) fn residual(m: &DMatrix<Complex64>, value: Complex64, v: &DVector<Complex64>) -> f64 {
    (m * v - v * value).norm()
}

fn by_real_then_imag(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// All `N + 1` eigenpairs of a truncated operator, sorted by (real, imaginary) part.
pub fn eigendecompose(a: &OperatorMatrix) -> Result<Vec<EigenPair>> {
    let m = a.entries();
    let mut pairs: Vec<EigenPair> = eigen_dense(m)?
        .into_iter()
        .map(|(value, v)| EigenPair {
            value,
            residual: residual(m, value, &v),
            vector: TaylorPolynomial::from_vec(v.as_slice().to_vec()),
        })
        .collect();
    pairs.sort_by(|x, y| by_real_then_imag(&x.value, &y.value));
    Ok(pairs)
}

/// Argument-principle check that `f` has no zeros in the closed disk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZeroFreeCertificate {
    pub min_modulus: f64,
    pub winding: i64,
}

impl ZeroFreeCertificate {
    pub fn holds(&self) -> bool {
        self.min_modulus > 0.0 && self.winding == 0
    }
}

pub fn zero_free_certificate(f: &TaylorPolynomial, samples: usize) -> Result<ZeroFreeCertificate> {
    let samples = samples
        .max(ZERO_FREE_SAMPLES)
        .max((2 * f.order() + 2).next_power_of_two());
    let b = to_boundary(f, samples)?;
    let scale = b.max_modulus();
    let min_modulus = b.min_modulus();
    Ok(ZeroFreeCertificate {
        min_modulus: if min_modulus > 1e-12 * scale {
            min_modulus
        } else {
            0.0
        },
        winding: if min_modulus > 0.0 {
            b.winding_number()
        } else {
            0
        },
    })
}

/// Eigenfunction `exp(∫_0^z λ/f)` of `A_f` for a symbol without zeros in the closed disk,
/// normalized to `g(0) = 1`.
pub fn exp_eigenfunction(
    f: &TaylorPolynomial,
    lambda: Complex64,
    order: usize,
) -> Result<TaylorPolynomial> {
    let cert = zero_free_certificate(f, ZERO_FREE_SAMPLES)?;
    if !cert.holds() {
        return Err(HardyError::SymbolHasZeros {
            min_modulus: cert.min_modulus,
            winding: cert.winding,
        });
    }
    let exponent = f
        .reciprocal(order)?
        .scale(lambda)
        .antiderivative()
        .with_order(order);
    Ok(exponent.exp(order))
}

/// Eigenfunction `H_k` of `A*_{z^m}`:
/// `H_k(z) = ∑_n λⁿ z^{k+n(m−1)} / ∏_{j<n} (k + j(m−1))`.
pub fn hk_eigenfunction(
    m: usize,
    k: usize,
    lambda: Complex64,
    order: usize,
) -> Result<TaylorPolynomial> {
    if m < 2 {
        return Err(HardyError::InvalidIndex(format!(
            "H_k needs m >= 2, got m = {m}"
        )));
    }
    if k == 0 || k >= m {
        return Err(HardyError::InvalidIndex(format!(
            "H_k needs 1 <= k <= m - 1 = {}, got k = {k}",
            m - 1
        )));
    }
    let mut coeffs = vec![Complex64::default(); order + 1];
    let mut term = Complex64::new(1.0, 0.0);
    let mut n = 0usize;
    while k + n * (m - 1) <= order {
        coeffs[k + n * (m - 1)] = term;
        term = term * lambda / (k + n * (m - 1)) as f64;
        n += 1;
    }
    Ok(TaylorPolynomial::from_vec(coeffs))
}

/// Monic symbol `∏ (z − z_i)^{m_i}`.
pub fn monic_from_zeros(zeros: &[(Complex64, usize)]) -> TaylorPolynomial {
    let mut f = TaylorPolynomial::constant(Complex64::new(1.0, 0.0), 0);
    for &(z, mult) in zeros {
        let factor = TaylorPolynomial::from_vec(vec![-z, Complex64::new(1.0, 0.0)]);
        for _ in 0..mult {
            f = f.mul_full(&factor);
        }
    }
    f
}

/// Basis `{g^{[j−1]}_{z_i} : j = 1..m_i}` of the zero eigenspace of `A_f*` for
/// `f = ∏ (z − z_i)^{m_i}`.
pub fn zero_eigenspace(
    zeros: &[(Complex64, usize)],
    order: usize,
) -> Result<Vec<TaylorPolynomial>> {
    let mut basis = Vec::new();
    for &(z, mult) in zeros {
        for j in 0..mult {
            basis.push(kernel(&KernelSpec::new(z, j, false)?, order)?);
        }
    }
    Ok(basis)
}

/// `max_t |φ(γ(t)) − φ(γ(0)) e^{λt}|` along a trajectory of `ż = f(z)`.
pub fn flow_check(
    f: &TaylorPolynomial,
    eigenfunction: &TaylorPolynomial,
    lambda: Complex64,
    trajectory: &Trajectory,
) -> f64 {
    let defect = trajectory.finite_difference_defect(|z| f.eval(z));
    if defect > trajectory.validity_tolerance() {
        log::warn!("trajectory does not follow the symbol (finite-difference defect {defect:e})");
    }
    let t0 = trajectory.times()[0];
    let start = eigenfunction.eval(trajectory.points()[0]);
    trajectory
        .times()
        .iter()
        .zip(trajectory.points())
        .map(|(&t, &z)| (eigenfunction.eval(z) - start * (lambda * (t - t0)).exp()).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::{adjoint_matrix, liouville_matrix};
    use crate::occupation::integrate_ode;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_spectrum() {
        let pairs = eigendecompose(&liouville_matrix(&TaylorPolynomial::identity(1), 20)).unwrap();
        assert_eq!(pairs.len(), 21);
        for (n, p) in pairs.iter().enumerate() {
            assert!((p.value - c(n as f64, 0.0)).norm() < 1e-12);
            assert!(p.residual < 1e-12);
            assert!((p.vector.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn affine_spectrum() {
        let alpha = c(2.0, 0.0);
        let f = TaylorPolynomial::new(vec![c(0.3, 0.0), alpha]).unwrap();
        let pairs = eigendecompose(&liouville_matrix(&f, 16)).unwrap();
        for (n, p) in pairs.iter().enumerate() {
            assert!((p.value - alpha * n as f64).norm() < 1e-10);
        }
    }

    #[test]
    fn zero_matrix_has_unit_eigenvectors() {
        let pairs = eigen_dense(&DMatrix::zeros(3, 3)).unwrap();
        assert!(pairs
            .iter()
            .all(|(l, v)| *l == c(0.0, 0.0) && (v.norm() - 1.0).abs() < 1e-15));
    }

    #[test]
    fn random_matrix_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = DMatrix::from_fn(5, 5, |_, _| {
            c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        for (value, v) in eigen_dense(&m).unwrap() {
            assert!(residual(&m, value, &v) <= 1e-10);
        }
    }

    #[test]
    fn stored_residuals_are_recomputable() {
        let f = TaylorPolynomial::new(vec![c(0.1, 0.2), c(0.9, 0.0), c(0.05, 0.0)]).unwrap();
        let a = liouville_matrix(&f, 12);
        for p in eigendecompose(&a).unwrap() {
            let v = DVector::from_column_slice(p.vector.coeffs());
            assert!((residual(a.entries(), p.value, &v) - p.residual).abs() <= 1e-12);
        }
    }

    #[test]
    fn exp_eigenfunction_examples() {
        let one = TaylorPolynomial::constant(c(1.0, 0.0), 0);
        let g = exp_eigenfunction(&one, c(1.0, 0.0), 20).unwrap();
        // g' = g oracle: coefficients 1/n!
        let mut fact = 1.0;
        for n in 0..=20 {
            if n > 0 {
                fact *= n as f64;
            }
            assert!((g.coeff(n) - c(1.0 / fact, 0.0)).norm() < 1e-15);
        }
        let g = exp_eigenfunction(&one, c(0.0, 0.0), 10).unwrap();
        assert_eq!(g, TaylorPolynomial::constant(c(1.0, 0.0), 10));
    }

    #[test]
    fn exp_eigenfunction_residual() {
        let f = TaylorPolynomial::from_real(&[2.0, 1.0]).unwrap();
        let lambda = c(1.0, 1.0);
        let g = exp_eigenfunction(&f, lambda, 96).unwrap();
        let r = liouville_matrix(&f, 96)
            .apply(&g)
            .distance(&g.scale(lambda));
        assert!(r <= 1e-8, "residual {r}");
    }

    #[test]
    fn exp_eigenfunction_rejects_zeros() {
        let f = TaylorPolynomial::from_real(&[-0.5, 1.0]).unwrap();
        assert!(matches!(
            exp_eigenfunction(&f, c(1.0, 0.0), 16),
            Err(HardyError::SymbolHasZeros { winding: 1, .. })
        ));
    }

    #[test]
    fn hk_closed_form_for_m2() {
        // m = 2, k = 1: the product telescopes to n!, so H_1 = z e^{λz}
        let lambda = c(1.0, 1.0);
        let h = hk_eigenfunction(2, 1, lambda, 40).unwrap();
        let expected = TaylorPolynomial::identity(40)
            .mul_truncated(&TaylorPolynomial::identity(40).scale(lambda).exp(40), 40);
        assert!(h.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn hk_at_zero_eigenvalue_is_monomial() {
        for m in 2..5 {
            let adj = adjoint_matrix(&liouville_matrix(&TaylorPolynomial::monomial(m, m), 32));
            for k in 1..m {
                let h = hk_eigenfunction(m, k, c(0.0, 0.0), 32).unwrap();
                assert_eq!(h, TaylorPolynomial::monomial(k, 32));
                assert_eq!(adj.apply(&h).norm(), 0.0);
            }
        }
    }

    #[test]
    fn hk_index_errors() {
        assert!(hk_eigenfunction(1, 1, c(1.0, 0.0), 8).is_err());
        assert!(hk_eigenfunction(3, 0, c(1.0, 0.0), 8).is_err());
        assert!(hk_eigenfunction(3, 3, c(1.0, 0.0), 8).is_err());
    }

    #[test]
    fn zero_eigenspace_examples() {
        let basis = zero_eigenspace(&[(c(0.0, 0.0), 1)], 16).unwrap();
        assert_eq!(basis, vec![TaylorPolynomial::constant(c(1.0, 0.0), 16)]);
        let adj = adjoint_matrix(&liouville_matrix(&TaylorPolynomial::identity(1), 16));
        assert_eq!(adj.apply(&basis[0]).norm(), 0.0);

        let zeros = [(c(0.5, 0.0), 1)];
        let f = monic_from_zeros(&zeros);
        let adj = adjoint_matrix(&liouville_matrix(&f, 96));
        for v in zero_eigenspace(&zeros, 96).unwrap() {
            assert!(adj.apply(&v).norm() <= 1e-12);
        }
        assert!(zero_eigenspace(&[(c(1.0, 0.0), 1)], 8).is_err());
    }

    #[test]
    fn monic_from_zeros_expands() {
        let f = monic_from_zeros(&[(c(0.5, 0.0), 2)]);
        assert!(f.max_abs_diff(&TaylorPolynomial::from_real(&[0.25, -1.0, 1.0]).unwrap()) < 1e-16);
    }

    #[test]
    fn flow_examples() {
        let f = TaylorPolynomial::identity(1);
        let traj = integrate_ode(&f, c(0.1, 0.0), 1.0, 1e-3).unwrap();
        for n in 1..4 {
            let err = flow_check(
                &f,
                &TaylorPolynomial::monomial(n, n),
                c(n as f64, 0.0),
                &traj,
            );
            assert!(err < 1e-10, "n = {n}: {err}");
        }
        let one = TaylorPolynomial::constant(c(1.0, 0.0), 0);
        assert_eq!(flow_check(&f, &one, c(0.0, 0.0), &traj), 0.0);
    }

    #[test]
    fn flow_with_computed_eigenpair() {
        // f = 0.9z + 0.05: the eigenpair with λ = 0.9 is (z + 1/18) up to scale.
        let f = TaylorPolynomial::from_real(&[0.05, 0.9]).unwrap();
        let pairs = eigendecompose(&liouville_matrix(&f, 24)).unwrap();
        let pair = pairs
            .iter()
            .find(|p| (p.value - c(0.9, 0.0)).norm() < 1e-10)
            .unwrap();
        let traj = integrate_ode(&f, c(0.2, 0.1), 1.0, 1e-3).unwrap();
        let err = flow_check(&f, &pair.vector, pair.value, &traj);
        assert!(err <= 1e-6, "flow error {err}");
    }
}
