//! Truncated Hardy-space arithmetic.
//!
//! A [`TaylorPolynomial`] holds the Taylor coefficients `c_0..c_N` of an element of
//! H²(𝔻). Since the monomials form an orthonormal basis, the H² inner product is the
//! plain coefficient inner product and every operator in this crate acts on coefficient
//! vectors.

mod boundary;
mod kernel;
mod tolerance;

pub use boundary::{
    default_boundary_samples, outer_from_modulus, project_h2, to_boundary, BoundaryGrid,
};
pub use kernel::{check_disk, k1_kernel, kernel, KernelSpec};
pub use tolerance::{geometric_tail, reproducing_tail, Tolerance};

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{HardyError, Result};

/// Default truncation order.
pub const DEFAULT_ORDER: usize = 64;

/// Truncated power series `∑_{n=0}^{N} c_n zⁿ` with complex coefficients.
///
/// The coefficient list always has `N + 1` finite entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPolynomial")]
pub struct TaylorPolynomial {
    coeffs: Vec<Complex64>,
}

#[derive(Deserialize)]
struct RawPolynomial {
    coeffs: Vec<Complex64>,
}

impl TryFrom<RawPolynomial> for TaylorPolynomial {
    type Error = HardyError;

    fn try_from(raw: RawPolynomial) -> Result<Self> {
        TaylorPolynomial::new(raw.coeffs)
    }
}

impl TaylorPolynomial {
    /// Builds a polynomial from `c_0..c_N`. An empty list is rejected.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(HardyError::InvalidSpec(
                "a polynomial needs at least one coefficient".into(),
            ));
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(HardyError::NonFinite(format!(
                "coefficient {i} is {}",
                coeffs[i]
            )));
        }
        Ok(Self { coeffs })
    }

    /// Internal constructor for coefficient lists produced by finite arithmetic.
    pub(crate) fn from_vec(coeffs: Vec<Complex64>) -> Self {
        debug_assert!(!coeffs.is_empty());
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zeros(order: usize) -> Self {
        Self::from_vec(vec![Complex64::new(0.0, 0.0); order + 1])
    }

    pub fn constant(value: Complex64, order: usize) -> Self {
        let mut p = Self::zeros(order);
        p.coeffs[0] = value;
        p
    }

    /// `zⁿ` represented at truncation order `order` (zero if `n > order`).
    pub fn monomial(n: usize, order: usize) -> Self {
        let mut p = Self::zeros(order);
        if n <= order {
            p.coeffs[n] = Complex64::new(1.0, 0.0);
        }
        p
    }

    /// The identity observable `z`.
    pub fn identity(order: usize) -> Self {
        Self::monomial(1, order.max(1))
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of `zⁿ`, zero beyond the truncation order.
    pub fn coeff(&self, n: usize) -> Complex64 {
        self.coeffs.get(n).copied().unwrap_or_default()
    }

    /// Index of the highest nonzero coefficient (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|c| *c != Complex64::default())
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == Complex64::default())
    }

    /// Truncates or zero-pads to the requested order.
    pub fn with_order(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order + 1, Complex64::default());
        Self::from_vec(coeffs)
    }

    /// Horner evaluation at `z`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::default(), |acc, &c| acc * z + c)
    }

    /// Value of the `k`-th derivative at `z`.
    pub fn eval_derivative(&self, k: usize, z: Complex64) -> Complex64 {
        // ∑_{n≥k} n!/(n-k)! c_n z^{n-k}
        let mut acc = Complex64::default();
        for n in (k..self.coeffs.len()).rev() {
            acc = acc * z + self.coeffs[n] * falling_factorial(n, k);
        }
        acc
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Multiplies every coefficient by `s`.
    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_vec(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Coefficient-wise complex conjugate.
    pub fn conj(&self) -> Self {
        Self::from_vec(self.coeffs.iter().map(|c| c.conj()).collect())
    }

    /// Product truncated at `order`.
    pub fn mul_truncated(&self, other: &Self, order: usize) -> Self {
        let mut out = vec![Complex64::default(); order + 1];
        for (i, &a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a == Complex64::default() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate().take(order + 1 - i) {
                out[i + j] += a * b;
            }
        }
        Self::from_vec(out)
    }

    /// Full product, order `self.order() + other.order()`.
    pub fn mul_full(&self, other: &Self) -> Self {
        self.mul_truncated(other, self.order() + other.order())
    }

    /// Power series of `1/self` to `order`.
    pub fn reciprocal(&self, order: usize) -> Result<Self> {
        let c0 = self.coeffs[0];
        if c0 == Complex64::default() {
            return Err(HardyError::SingularSymbol(
                "reciprocal of a series with zero constant term".into(),
            ));
        }
        let inv0 = c0.inv();
        let mut r = vec![Complex64::default(); order + 1];
        r[0] = inv0;
        for n in 1..=order {
            let upper = n.min(self.order());
            let s: Complex64 = (1..=upper).map(|k| self.coeffs[k] * r[n - k]).sum();
            r[n] = -s * inv0;
        }
        Ok(Self::from_vec(r))
    }

    /// Power series of `exp(self)` to `order`, from `n g_n = ∑_{k=1}^{n} k a_k g_{n-k}`.
    pub fn exp(&self, order: usize) -> Self {
        let mut g = vec![Complex64::default(); order + 1];
        g[0] = self.coeffs[0].exp();
        for n in 1..=order {
            let upper = n.min(self.order());
            let s: Complex64 = (1..=upper)
                .map(|k| self.coeffs[k] * (k as f64) * g[n - k])
                .sum();
            g[n] = s / (n as f64);
        }
        Self::from_vec(g)
    }

    /// Derivative; the result has order `max(N - 1, 0)`.
    pub fn derivative(&self) -> Self {
        if self.order() == 0 {
            return Self::zeros(0);
        }
        Self::from_vec(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(n, &c)| c * (n as f64))
                .collect(),
        )
    }

    /// Antiderivative vanishing at 0: `J h(z) = ∫_0^z h(w) dw = ∑ h_n/(n+1) z^{n+1}`.
    ///
    /// The output has order `N + 1`; `J` never increases the H² norm.
    pub fn antiderivative(&self) -> Self {
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(Complex64::default());
        out.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(n, &c)| c / ((n + 1) as f64)),
        );
        Self::from_vec(out)
    }

    /// `self ∘ inner` truncated at `order`, by Horner's scheme on series.
    pub fn compose(&self, inner: &Self, order: usize) -> Self {
        let inner = inner.with_order(order);
        let mut acc = Self::zeros(order);
        for &c in self.coeffs.iter().rev() {
            acc = acc.mul_truncated(&inner, order);
            acc.coeffs[0] += c;
        }
        acc
    }

    /// Max-norm distance between coefficient vectors (shorter one zero-padded).
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n)
            .map(|i| (self.coeff(i) - other.coeff(i)).norm())
            .fold(0.0, f64::max)
    }

    /// H² distance (shorter one zero-padded).
    pub fn distance(&self, other: &Self) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n)
            .map(|i| (self.coeff(i) - other.coeff(i)).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// `n!/(n-k)!` as a float.
pub(crate) fn falling_factorial(n: usize, k: usize) -> f64 {
    ((n + 1 - k)..=n).fold(1.0, |acc, m| acc * m as f64)
}

/// H² inner product `⟨g, h⟩ = ∑ g_n conj(h_n)`, linear in the first slot.
pub fn inner_product(g: &TaylorPolynomial, h: &TaylorPolynomial) -> Complex64 {
    g.coeffs
        .iter()
        .zip(h.coeffs.iter())
        .map(|(a, b)| a * b.conj())
        .sum()
}

/// Antiderivative operator `J`; see [`TaylorPolynomial::antiderivative`].
pub fn antiderivative_j(h: &TaylorPolynomial) -> TaylorPolynomial {
    h.antiderivative()
}

fn zip_pad(
    a: &TaylorPolynomial,
    b: &TaylorPolynomial,
    op: impl Fn(Complex64, Complex64) -> Complex64,
) -> TaylorPolynomial {
    let n = a.coeffs.len().max(b.coeffs.len());
    TaylorPolynomial::from_vec((0..n).map(|i| op(a.coeff(i), b.coeff(i))).collect())
}

impl Add for &TaylorPolynomial {
    type Output = TaylorPolynomial;

    fn add(self, rhs: Self) -> TaylorPolynomial {
        zip_pad(self, rhs, |x, y| x + y)
    }
}

impl Sub for &TaylorPolynomial {
    type Output = TaylorPolynomial;

    fn sub(self, rhs: Self) -> TaylorPolynomial {
        zip_pad(self, rhs, |x, y| x - y)
    }
}

impl Neg for &TaylorPolynomial {
    type Output = TaylorPolynomial;

    fn neg(self) -> TaylorPolynomial {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul<Complex64> for &TaylorPolynomial {
    type Output = TaylorPolynomial;

    fn mul(self, rhs: Complex64) -> TaylorPolynomial {
        self.scale(rhs)
    }
}
