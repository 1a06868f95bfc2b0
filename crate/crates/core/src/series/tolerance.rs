use std::fmt;

use serde::Serialize;

/// Mixed tolerance `atol + rtol·scale`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerance {
    pub atol: f64,
    pub rtol: f64,
}

impl Tolerance {
    pub const fn new(atol: f64, rtol: f64) -> Self {
        Self { atol, rtol }
    }

    pub const fn absolute(atol: f64) -> Self {
        Self { atol, rtol: 0.0 }
    }

    pub fn bound(&self, scale: f64) -> f64 {
        self.atol + self.rtol * scale.abs()
    }

    pub fn accepts(&self, error: f64, scale: f64) -> bool {
        error.is_finite() && error <= self.bound(scale)
    }
}

impl fmt::Display for Tolerance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rtol == 0.0 {
            write!(f, "atol = {:e}", self.atol)
        } else {
            write!(
                f,
                "atol + rtol*scale, atol = {:e}, rtol = {:e}",
                self.atol, self.rtol
            )
        }
    }
}

/// Tail of a series with `|c_n| ≤ C rⁿ` beyond order `N`: `C r^{N+1}/(1 − r)`.
pub fn geometric_tail(coeff_bound: f64, r: f64, order: usize) -> f64 {
    assert!(
        (0.0..1.0).contains(&r),
        "geometric tail needs 0 <= r < 1, got {r}"
    );
    coeff_bound * r.powi(order as i32 + 1) / (1.0 - r)
}

/// Reproducing-property truncation error `‖g‖·|w|^{N+1}/√(1 − |w|²)`.
pub fn reproducing_tail(g_norm: f64, w_modulus: f64, order: usize) -> f64 {
    assert!((0.0..1.0).contains(&w_modulus));
    g_norm * w_modulus.powi(order as i32 + 1) / (1.0 - w_modulus * w_modulus).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_bound() {
        let t = Tolerance::new(1e-12, 1e-9);
        assert!((t.bound(10.0) - (1e-12 + 1e-8)).abs() < 1e-20);
        assert!(t.accepts(5e-9, 10.0));
        assert!(!t.accepts(f64::NAN, 10.0));
    }

    #[test]
    fn geometric_tail_matches_direct_sum() {
        let direct: f64 = (11..2000).map(|n| 2.0 * 0.5f64.powi(n)).sum();
        assert!((geometric_tail(2.0, 0.5, 10) - direct).abs() < 1e-15);
    }
}
