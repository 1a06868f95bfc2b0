use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{HardyError, Result};
use crate::series::{
    default_boundary_samples, outer_from_modulus, project_h2, to_boundary, BoundaryGrid,
    TaylorPolynomial,
};

/// Max boundary defect `||a|² + |b|² − 1|` below which a pair counts as normalized.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-10;

/// Representation `f = b/a` of a Smirnov-class symbol with `a` outer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmirnovPair {
    pub a: TaylorPolynomial,
    pub b: TaylorPolynomial,
    pub normalized: bool,
}

impl SmirnovPair {
    /// An unnormalized pair; only `f·a = b` is required downstream.
    pub fn unnormalized(a: TaylorPolynomial, b: TaylorPolynomial) -> Self {
        Self {
            a,
            b,
            normalized: false,
        }
    }

    /// `max_m ||a(e^{iθ_m})|² + |b(e^{iθ_m})|² − 1|` on an `M`-point grid.
    pub fn boundary_defect(&self, samples: usize) -> Result<f64> {
        let a = to_boundary(&self.a, samples)?;
        let b = to_boundary(&self.b, samples)?;
        Ok(a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x.norm_sqr() + y.norm_sqr() - 1.0).abs())
            .fold(0.0, f64::max))
    }
}

/// Splits bounded boundary data `f` into `a = outer((1 + |f|²)^{−1/2})` and `b = P_{H²}(f·a)`.
pub fn smirnov_decompose(f_boundary: &BoundaryGrid, order: usize) -> Result<SmirnovPair> {
    let modulus = f_boundary.map(|v| Complex64::new((1.0 + v.norm_sqr()).sqrt().recip(), 0.0));
    let a = outer_from_modulus(&modulus, order)?;
    let a_b = to_boundary(&a, f_boundary.size())?;
    let b = project_h2(&f_boundary.zip_with(&a_b, |f, a| f * a), order)?;
    let mut pair = SmirnovPair::unnormalized(a, b);
    pair.normalized = pair.boundary_defect(f_boundary.size())? <= NORMALIZATION_TOLERANCE;
    Ok(pair)
}

/// Certifies `g = c + J(a·h) ∈ D(A_f)` for `f = b/a`: returns the boundary L² norm of
/// `f·g′ − b·h`.
pub fn domain_membership_check(
    a: &TaylorPolynomial,
    b: &TaylorPolynomial,
    h: &TaylorPolynomial,
    c: Complex64,
) -> Result<f64> {
    if a.coeff(0) == Complex64::default() {
        return Err(HardyError::SingularSymbol(
            "outer factor vanishes at the origin".into(),
        ));
    }
    let ah = a.mul_full(h);
    let mut g = ah.antiderivative();
    g = &g + &TaylorPolynomial::constant(c, 0);
    let dg = g.derivative();
    let top = [a.order(), b.order(), dg.order(), b.order() + h.order()]
        .into_iter()
        .max()
        .unwrap_or(0);
    let samples = default_boundary_samples(top);
    let a_b = to_boundary(a, samples)?;
    if a_b.min_modulus() <= f64::EPSILON * a_b.max_modulus() {
        return Err(HardyError::SingularSymbol(
            "outer factor vanishes on the boundary grid".into(),
        ));
    }
    let b_b = to_boundary(b, samples)?;
    let dg_b = to_boundary(&dg, samples)?;
    let bh_b = to_boundary(&b.mul_full(h), samples)?;
    let values = (0..samples)
        .map(|m| b_b.values()[m] / a_b.values()[m] * dg_b.values()[m] - bh_b.values()[m])
        .collect();
    Ok(BoundaryGrid::new(values)?.l2_norm())
}
