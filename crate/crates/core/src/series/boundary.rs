use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::TaylorPolynomial;
use crate::error::{HardyError, Result};

/// Samples of a function on the unit circle at `θ_m = 2πm/M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryGrid {
    values: Vec<Complex64>,
}

impl BoundaryGrid {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(HardyError::InsufficientData(
                "a boundary grid needs at least two samples".into(),
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(HardyError::NonFinite(format!("boundary sample {i}")));
        }
        Ok(Self { values })
    }

    /// Samples `func(e^{iθ_m})` on an `M`-point grid.
    pub fn from_fn(size: usize, func: impl Fn(Complex64) -> Complex64) -> Result<Self> {
        Self::new(circle_points(size).map(func).collect())
    }

    pub fn size(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Points `e^{iθ_m}` of this grid.
    pub fn points(&self) -> impl Iterator<Item = Complex64> {
        circle_points(self.values.len())
    }

    pub fn map(&self, func: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            values: self.values.iter().map(|&v| func(v)).collect(),
        }
    }

    /// Pointwise combination of two grids of equal size.
    pub fn zip_with(&self, other: &Self, func: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.size(), other.size(), "boundary grids differ in size");
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| func(a, b))
                .collect(),
        }
    }

    /// Discrete L²(𝕋) norm `((1/M) ∑ |v_m|²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.size() as f64).sqrt()
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn min_modulus(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v.norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Mean of the samples, the discrete `(1/2π)∫ dθ`.
    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.size() as f64
    }

    /// Winding number of the sampled closed curve about the origin.
    pub fn winding_number(&self) -> i64 {
        let n = self.values.len();
        let total: f64 = (0..n)
            .map(|m| (self.values[(m + 1) % n] / self.values[m]).arg())
            .sum();
        (total / (2.0 * PI)).round() as i64
    }
}

pub(crate) fn circle_points(size: usize) -> impl Iterator<Item = Complex64> {
    (0..size).map(move |m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 / size as f64))
}

/// Smallest power of two ≥ 4(N + 1).
pub fn default_boundary_samples(order: usize) -> usize {
    (4 * (order + 1)).next_power_of_two()
}

fn check_alias(samples: usize, order: usize) -> Result<()> {
    let required = 2 * order + 2;
    if samples < required {
        return Err(HardyError::Aliasing {
            samples,
            order,
            required,
        });
    }
    Ok(())
}

/// Boundary values `g(e^{iθ_m})`, `m = 0..M`.
pub fn to_boundary(g: &TaylorPolynomial, samples: usize) -> Result<BoundaryGrid> {
    check_alias(samples, g.order())?;
    let mut buf = g.with_order(samples - 1).into_coeffs();
    FftPlanner::new()
        .plan_fft_inverse(samples)
        .process(&mut buf);
    Ok(BoundaryGrid { values: buf })
}

/// Orthogonal projection `P_{H²}` of sampled boundary values onto order-`N` polynomials:
/// keeps discrete Fourier modes `0..=N` and discards the negative ones.
pub fn project_h2(b: &BoundaryGrid, order: usize) -> Result<TaylorPolynomial> {
    check_alias(b.size(), order)?;
    let modes = fourier_modes(b);
    Ok(TaylorPolynomial::from_vec(modes[..=order].to_vec()))
}

/// Normalized discrete Fourier coefficients `(1/M) ∑ v_m e^{-ikθ_m}`.
fn fourier_modes(b: &BoundaryGrid) -> Vec<Complex64> {
    let m = b.size();
    let mut buf = b.values.clone();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let scale = 1.0 / m as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

/// Outer function with boundary modulus `m`, normalized so that `G(0) > 0`.
///
/// With `ĉ_n` the Fourier coefficients of `log m`, the Herglotz integral gives
/// `G = exp(ĉ_0 + 2 ∑_{n≥1} ĉ_n zⁿ)`.
pub fn outer_from_modulus(modulus: &BoundaryGrid, order: usize) -> Result<TaylorPolynomial> {
    check_alias(modulus.size(), order)?;
    let logs = modulus
        .values
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            let real = value.re > 0.0 && value.im.abs() <= 1e-12 * value.re;
            if real {
                Ok(Complex64::new(value.re.ln(), 0.0))
            } else {
                Err(HardyError::LogDomain { index, value })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let modes = fourier_modes(&BoundaryGrid { values: logs });
    let mut exponent = Vec::with_capacity(order + 1);
    exponent.push(Complex64::new(modes[0].re, 0.0));
    exponent.extend(modes[1..=order].iter().map(|c| c * 2.0));
    Ok(TaylorPolynomial::from_vec(exponent).exp(order))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn roundtrip_monomial() {
        let z3 = TaylorPolynomial::monomial(3, 7);
        let b = to_boundary(&z3, 16).unwrap();
        let back = project_h2(&b, 7).unwrap();
        assert!(back.max_abs_diff(&z3) < 1e-12);
    }

    #[test]
    fn negative_frequencies_are_discarded() {
        let b = BoundaryGrid::from_fn(32, |z| z.conj()).unwrap();
        assert!(project_h2(&b, 8).unwrap().norm() < 1e-14);

        // 2cosθ = e^{iθ} + e^{−iθ}
        let b = BoundaryGrid::from_fn(32, |z| z + z.conj()).unwrap();
        let p = project_h2(&b, 8).unwrap();
        assert!(p.max_abs_diff(&TaylorPolynomial::monomial(1, 8)) < 1e-14);
    }

    #[test]
    fn aliasing_is_rejected() {
        let g = TaylorPolynomial::zeros(8);
        assert!(matches!(
            to_boundary(&g, 17),
            Err(HardyError::Aliasing { required: 18, .. })
        ));
        let b = BoundaryGrid::from_fn(16, |z| z).unwrap();
        assert!(project_h2(&b, 8).is_err());
    }

    #[test]
    fn boundary_values_match_evaluation() {
        let g = TaylorPolynomial::new(vec![c(1.0, 0.5), c(-0.3, 0.0), c(0.0, 0.7)]).unwrap();
        let b = to_boundary(&g, 8).unwrap();
        for (z, v) in b.points().zip(b.values()) {
            assert!((g.eval(z) - v).norm() < 1e-14);
        }
    }

    #[test]
    fn default_samples_are_guarded_powers_of_two() {
        assert_eq!(default_boundary_samples(64), 512);
        assert_eq!(default_boundary_samples(63), 256);
        assert_eq!(default_boundary_samples(0), 4);
    }

    #[test]
    fn outer_of_constant_modulus() {
        let m = BoundaryGrid::from_fn(64, |_| c(2.0, 0.0)).unwrap();
        let g = outer_from_modulus(&m, 16).unwrap();
        assert!(g.max_abs_diff(&TaylorPolynomial::constant(c(2.0, 0.0), 16)) < 1e-14);

        let m = BoundaryGrid::from_fn(64, |_| c(std::f64::consts::E, 0.0)).unwrap();
        let g = outer_from_modulus(&m, 16).unwrap();
        assert!((g.coeff(0) - c(std::f64::consts::E, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn outer_recovers_zero_free_polynomial() {
        // 1 − z/2 has its zero at 2, so it is outer with value 1 at the origin.
        let m = BoundaryGrid::from_fn(256, |z| c((c(1.0, 0.0) - z / 2.0).norm(), 0.0)).unwrap();
        let g = outer_from_modulus(&m, 64).unwrap();
        let expected = TaylorPolynomial::from_real(&[1.0, -0.5])
            .unwrap()
            .with_order(64);
        assert!(g.max_abs_diff(&expected) < 1e-13);
    }

    #[test]
    fn outer_rejects_nonpositive_samples() {
        let mut vals = vec![c(1.0, 0.0); 16];
        vals[5] = c(0.0, 0.0);
        let m = BoundaryGrid::new(vals).unwrap();
        assert!(matches!(
            outer_from_modulus(&m, 4),
            Err(HardyError::LogDomain { index: 5, .. })
        ));
    }

    #[test]
    fn winding_number_counts_zeros_inside() {
        let b = BoundaryGrid::from_fn(1024, |z| (z - 0.5) * (z + c(0.0, 0.3))).unwrap();
        assert_eq!(b.winding_number(), 2);
        let b = BoundaryGrid::from_fn(1024, |z| z + 2.0).unwrap();
        assert_eq!(b.winding_number(), 0);
    }
}
