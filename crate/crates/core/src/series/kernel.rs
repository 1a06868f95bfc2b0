use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{falling_factorial, TaylorPolynomial};
use crate::error::{HardyError, Result};

/// Point-evaluation (or derivative-evaluation) kernel request.
///
/// `order = j` selects `g^{[j]}_w = ∂ʲ/∂w̄ʲ (1 − w̄z)⁻¹`, the representer of `h ↦ h^{(j)}(w)`.
/// `normalized` multiplies the Szegő kernel by `√(1 − |w|²)` and is only meaningful for `j = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    point: Complex64,
    order: usize,
    normalized: bool,
}

impl KernelSpec {
    pub fn new(point: Complex64, order: usize, normalized: bool) -> Result<Self> {
        check_disk(point)?;
        if normalized && order > 0 {
            return Err(HardyError::InvalidSpec(format!(
                "normalization is only defined for the Szegő kernel (order 0), got order {order}"
            )));
        }
        Ok(Self {
            point,
            order,
            normalized,
        })
    }

    /// Szegő kernel `K_w`.
    pub fn szego(point: Complex64) -> Result<Self> {
        Self::new(point, 0, false)
    }

    pub fn point(&self) -> Complex64 {
        self.point
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn normalized(&self) -> bool {
        self.normalized
    }
}

/// Rejects points that are not finite or not in the open unit disk.
pub fn check_disk(point: Complex64) -> Result<()> {
    if !point.is_finite() || point.norm() >= 1.0 {
        return Err(HardyError::Domain { point });
    }
    Ok(())
}

/// Truncated kernel series: coefficient of `zⁿ` is `n!/(n−j)! · w̄^{n−j}` for `n ≥ j`.
pub fn kernel(spec: &KernelSpec, order: usize) -> Result<TaylorPolynomial> {
    // Re-validate: a spec deserialized from JSON bypasses `new`.
    let spec = KernelSpec::new(spec.point, spec.order, spec.normalized)?;
    let j = spec.order;
    let wbar = spec.point.conj();
    let mut coeffs = vec![Complex64::default(); order + 1];
    let mut power = Complex64::new(1.0, 0.0);
    for (n, c) in coeffs.iter_mut().enumerate().skip(j) {
        *c = power * falling_factorial(n, j);
        power *= wbar;
    }
    let mut k = TaylorPolynomial::from_vec(coeffs);
    if spec.normalized {
        k = k.scale(Complex64::new((1.0 - spec.point.norm_sqr()).sqrt(), 0.0));
    }
    Ok(k)
}

/// `K^{(1)}_w(z) = z/(1 − w̄z)² = ∑_{n≥1} n w̄^{n−1} zⁿ` with its closed-form squared norm
/// `(1 + |w|²)/(1 − |w|²)³`.
pub fn k1_kernel(w: Complex64, order: usize) -> Result<(TaylorPolynomial, f64)> {
    check_disk(w)?;
    let wbar = w.conj();
    let mut coeffs = vec![Complex64::default(); order + 1];
    let mut power = Complex64::new(1.0, 0.0);
    for (n, c) in coeffs.iter_mut().enumerate().skip(1) {
        *c = power * n as f64;
        power *= wbar;
    }
    let r2 = w.norm_sqr();
    let norm_sqr = (1.0 + r2) / (1.0 - r2).powi(3);
    Ok((TaylorPolynomial::from_vec(coeffs), norm_sqr))
}
