//! Necessary conditions for boundedness and compactness of weighted Liouville operators,
//! Hilbert–Schmidt norms and the kernel-level self-adjointness relations.
//!
//! Suprema over the open disk are not computable; they are replaced by a polar grid plus a
//! radial divergence probe that approaches the circle geometrically.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HardyError, Result};
use crate::liouville::{weighted_liouville_matrix, OperatorMatrix};
use crate::occupation::{occupation_kernel, Trajectory};
use crate::series::{check_disk, k1_kernel, kernel, to_boundary, KernelSpec, TaylorPolynomial};

pub const DEFAULT_RADII: usize = 64;
pub const DEFAULT_ANGLES: usize = 256;
pub const DEFAULT_MAX_RADIUS: f64 = 0.995;

/// Growth factor over the probe that counts as divergence.
pub const DIVERGENCE_RATIO: f64 = 1e3;

/// Finite Blaschke product `∏ (z − a_i)/(1 − conj(a_i) z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlaschkeProduct {
    zeros: Vec<Complex64>,
}

impl BlaschkeProduct {
    pub fn new(zeros: Vec<Complex64>) -> Result<Self> {
        for &a in &zeros {
            check_disk(a)?;
        }
        Ok(Self { zeros })
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    fn factor(a: Complex64, z: Complex64) -> Complex64 {
        (z - a) / (Complex64::new(1.0, 0.0) - a.conj() * z)
    }

    fn factor_derivative(a: Complex64, z: Complex64) -> Complex64 {
        let d = Complex64::new(1.0, 0.0) - a.conj() * z;
        Complex64::new(1.0 - a.norm_sqr(), 0.0) / (d * d)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.zeros.iter().map(|&a| Self::factor(a, z)).product()
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        (0..self.zeros.len())
            .map(|i| {
                self.zeros
                    .iter()
                    .enumerate()
                    .map(|(j, &a)| {
                        if i == j {
                            Self::factor_derivative(a, z)
                        } else {
                            Self::factor(a, z)
                        }
                    })
                    .product::<Complex64>()
            })
            .sum()
    }

    /// Taylor series truncated at `N`.
    pub fn to_series(&self, order: usize) -> TaylorPolynomial {
        let one = Complex64::new(1.0, 0.0);
        let mut acc = TaylorPolynomial::constant(one, order);
        for &a in &self.zeros {
            let geometric: Vec<Complex64> = (0..=order)
                .scan(one, |p, _| {
                    let v = *p;
                    *p *= a.conj();
                    Some(v)
                })
                .collect();
            let numerator = TaylorPolynomial::from_vec(vec![-a, one]);
            let factor = numerator.mul_truncated(&TaylorPolynomial::from_vec(geometric), order);
            acc = acc.mul_truncated(&factor, order);
        }
        acc
    }
}

/// Polar sample grid `r_i e^{iθ_j}` with `r_i = r_max·(i+1)/n_r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarGrid {
    pub radii: usize,
    pub angles: usize,
    pub max_radius: f64,
}

impl Default for PolarGrid {
    fn default() -> Self {
        Self {
            radii: DEFAULT_RADII,
            angles: DEFAULT_ANGLES,
            max_radius: DEFAULT_MAX_RADIUS,
        }
    }
}

impl PolarGrid {
    pub fn new(radii: usize, angles: usize, max_radius: f64) -> Result<Self> {
        if radii == 0 || angles == 0 || !(max_radius > 0.0 && max_radius < 1.0) {
            return Err(HardyError::InvalidSpec(format!(
                "polar grid needs radii, angles > 0 and 0 < r_max < 1 (got {radii}, {angles}, {max_radius})"
            )));
        }
        Ok(Self {
            radii,
            angles,
            max_radius,
        })
    }

    pub fn radius_values(&self) -> Vec<f64> {
        (0..self.radii)
            .map(|i| self.max_radius * (i + 1) as f64 / self.radii as f64)
            .collect()
    }

    pub fn points(&self) -> Vec<Complex64> {
        let mut pts = vec![Complex64::default()];
        for r in self.radius_values() {
            pts.extend(circle(r, self.angles));
        }
        pts
    }
}

fn circle(r: f64, angles: usize) -> impl Iterator<Item = Complex64> {
    (0..angles).map(move |j| Complex64::from_polar(r, 2.0 * PI * j as f64 / angles as f64))
}

/// Radii `1 − 10^{−k/2}`, `k = 2..=12`, approaching the circle.
pub fn probe_radii() -> Vec<f64> {
    (2..=12)
        .map(|k| 1.0 - 10f64.powf(-(k as f64) / 2.0))
        .collect()
}

/// Per-radius maxima of a sampled expression.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.len() != values.len() {
            return Err(HardyError::InvalidSpec(
                "radii and values differ in length".into(),
            ));
        }
        check_radii(&radii)?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(HardyError::NonFinite(format!(
                "profile value at radius {}",
                radii[i]
            )));
        }
        Ok(Self { radii, values })
    }

    /// Nondecreasing tail with overall growth at least [`DIVERGENCE_RATIO`].
    pub fn diverges(&self) -> bool {
        let v = &self.values;
        let (Some(&first), Some(&last)) = (v.first(), v.last()) else {
            return false;
        };
        let tail = &v[v.len() / 2..];
        let increasing = tail.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12));
        increasing && last > 0.0 && last >= DIVERGENCE_RATIO * first
    }

    /// `radius,value` rows with a header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "radius,value")?;
        for (r, v) in self.radii.iter().zip(&self.values) {
            writeln!(w, "{r:.16e},{v:.16e}")?;
        }
        Ok(())
    }
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return Err(HardyError::InvalidSpec("radii must lie in (0, 1)".into()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(HardyError::InvalidSpec(
            "radii must be strictly increasing".into(),
        ));
    }
    Ok(())
}

fn composed(phi: &TaylorPolynomial, w: Complex64) -> Result<Complex64> {
    let v = phi.eval(w);
    if v.norm() >= 1.0 {
        return Err(HardyError::CompositionOutOfDisk {
            point: w,
            modulus: v.norm(),
        });
    }
    Ok(v)
}

/// `A_{f,φ}* K_w = conj(f(w)φ′(w)) K^{(1)}_{φ(w)}`.
pub fn weighted_adjoint_on_kernel(
    f: &TaylorPolynomial,
    phi: &TaylorPolynomial,
    w: Complex64,
    order: usize,
) -> Result<TaylorPolynomial> {
    check_disk(w)?;
    let pw = composed(phi, w)?;
    let (k1, _) = k1_kernel(pw, order)?;
    Ok(k1.scale((f.eval(w) * phi.eval_derivative(1, w)).conj()))
}

/// `‖A_{f,φ}* k_w‖²` for the normalized kernel `k_w`:
/// `|f(w)|²|φ′(w)|²(1−|w|²)(1+|φ(w)|²)/(1−|φ(w)|²)³`.
pub fn kernel_action_norm_sqr(
    f: &TaylorPolynomial,
    phi: &TaylorPolynomial,
    w: Complex64,
) -> Result<f64> {
    check_disk(w)?;
    let p2 = composed(phi, w)?.norm_sqr();
    Ok(f.eval(w).norm_sqr()
        * phi.eval_derivative(1, w).norm_sqr()
        * (1.0 - w.norm_sqr())
        * (1.0 + p2)
        / (1.0 - p2).powi(3))
}

/// Residuals of the two self-adjointness tests.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymbolRelation {
    /// `max |φ′f − R|` over the sample points, with `R` the rational right-hand side built from
    /// `f(0), f′(0), φ(0), φ′(0), φ″(0)`.
    pub symbol_residual: f64,
    /// `max_α ‖A K_α − conj(φ′(α)f(α)) K^{(1)}_{φ(α)}‖` over the kernel points.
    pub kernel_defect: f64,
}

/// Right-hand side of the symbol relation that a self-adjoint `A_{f,φ}` must satisfy.
pub fn symbol_relation_rhs(
    f: &TaylorPolynomial,
    phi: &TaylorPolynomial,
    z: Complex64,
) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let (f0, f1) = (f.coeff(0), f.coeff(1));
    let (p0, p1, p2) = (phi.coeff(0), phi.coeff(1), phi.coeff(2) * 2.0);
    let a = (p1 * f1 + f0 * p2).conj();
    let b = (p1 * f0).conj();
    let d = one - p0.conj() * z;
    ((z - p0.conj() * z * z) * a + z * z * b * 2.0) / (d * d * d)
}

pub fn self_adjoint_symbol_relation(
    f: &TaylorPolynomial,
    phi: &TaylorPolynomial,
    points: &[Complex64],
    kernel_points: &[Complex64],
    order: usize,
) -> Result<SymbolRelation> {
    let symbol_residual = points
        .iter()
        .map(|&z| (phi.eval_derivative(1, z) * f.eval(z) - symbol_relation_rhs(f, phi, z)).norm())
        .fold(0.0, f64::max);
    let a = weighted_liouville_matrix(f, phi, order);
    let mut kernel_defect = 0.0f64;
    for &alpha in kernel_points {
        let forward = a.apply(&kernel(&KernelSpec::szego(alpha)?, order)?);
        let backward = weighted_adjoint_on_kernel(f, phi, alpha, order)?;
        kernel_defect = kernel_defect.max(forward.distance(&backward));
    }
    Ok(SymbolRelation {
        symbol_residual,
        kernel_defect,
    })
}

fn b_prime_integrand(f: &TaylorPolynomial, phi: &TaylorPolynomial, w: Complex64) -> Result<f64> {
    let p2 = composed(phi, w)?.norm_sqr();
    Ok(f.eval(w).norm_sqr()
        * phi.eval_derivative(1, w).norm_sqr()
        * (1.0 - w.norm_sqr())
        * (1.0 + p2)
        / (1.0 - p2).powi(3))
}

fn radial_max(
    radii: &[f64],
    angles: usize,
    expr: impl Fn(Complex64) -> Result<f64> + Sync,
) -> Result<Vec<f64>> {
    radii
        .par_iter()
        .map(|&r| circle(r, angles).try_fold(0.0f64, |acc, w| Ok(acc.max(expr(w)?))))
        .collect()
}

/// Grid supremum of the boundedness expression and its radial probe.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundednessReport {
    #[serde(rename = "B_prime")]
    pub supremum: f64,
    pub diverges: bool,
    pub probe: RadialProfile,
}

/// Grid surrogate for `sup_w |f|²|φ′|²(1−|w|²)(1+|φ|²)/(1−|φ|²)³`.
pub fn boundedness_bound(
    f: &TaylorPolynomial,
    phi: &TaylorPolynomial,
    grid: &PolarGrid,
) -> Result<BoundednessReport> {
    let expr = |w| b_prime_integrand(f, phi, w);
    let mut supremum = expr(Complex64::default())?;
    for v in radial_max(&grid.radius_values(), grid.angles, expr)? {
        supremum = supremum.max(v);
    }
    let radii = probe_radii();
    let values = radial_max(&radii, grid.angles, expr)?;
    let probe = RadialProfile::new(radii, values)?;
    Ok(BoundednessReport {
        supremum,
        diverges: probe.diverges(),
        probe,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlaschkeReport {
    #[serde(rename = "B_prime")]
    pub supremum: f64,
    /// Per probe radius, `max |ratio − 1|` with ratio `|φ′(w)|(1−|w|²)/(1−|φ(w)|²)`.
    pub ratio_deviation: RadialProfile,
}

/// `sup |f(w)|²(1+|φ(w)|²)/(1−|φ(w)|²)²` for a finite Blaschke product `φ`.
pub fn blaschke_bound(
    f: &TaylorPolynomial,
    phi: &BlaschkeProduct,
    grid: &PolarGrid,
) -> Result<BlaschkeReport> {
    let expr = |w: Complex64| -> Result<f64> {
        let p2 = phi.eval(w).norm_sqr();
        Ok(f.eval(w).norm_sqr() * (1.0 + p2) / (1.0 - p2).powi(2))
    };
    let mut supremum = expr(Complex64::default())?;
    for v in radial_max(&grid.radius_values(), grid.angles, expr)? {
        supremum = supremum.max(v);
    }
    let radii = probe_radii();
    let deviation = radial_max(&radii, grid.angles, |w| {
        let ratio =
            phi.derivative(w).norm() * (1.0 - w.norm_sqr()) / (1.0 - phi.eval(w).norm_sqr());
        Ok((ratio - 1.0).abs())
    })?;
    Ok(BlaschkeReport {
        supremum,
        ratio_deviation: RadialProfile::new(radii, deviation)?,
    })
}

/// Per-radius maximum of the boundedness expression; decay to zero is necessary for compactness.
pub fn compactness_profile(
    f: &TaylorPolynomial,
    phi: &TaylorPolynomial,
    radii: &[f64],
    angles: usize,
) -> Result<RadialProfile> {
    check_radii(radii)?;
    let values = radial_max(radii, angles, |w| b_prime_integrand(f, phi, w))?;
    RadialProfile::new(radii.to_vec(), values)
}

struct BoundarySamples {
    f2: Vec<f64>,
    dphi2: Vec<f64>,
    phi2: Vec<f64>,
}

fn boundary_samples(
    f: &TaylorPolynomial,
    phi: &TaylorPolynomial,
    samples: usize,
) -> Result<BoundarySamples> {
    let sq = |g: &TaylorPolynomial| -> Result<Vec<f64>> {
        Ok(to_boundary(g, samples)?
            .values()
            .iter()
            .map(|v| v.norm_sqr())
            .collect())
    };
    Ok(BoundarySamples {
        f2: sq(f)?,
        dphi2: sq(&phi.derivative())?,
        phi2: sq(phi)?,
    })
}

/// `‖A_{f,φ} zⁿ‖² = mean_θ n²|f|²|φ′|²|φ|^{2(n−1)}` for `n = 0..=n_max`.
pub fn monomial_norm_sequence(
    f: &TaylorPolynomial,
    phi: &TaylorPolynomial,
    n_max: usize,
    samples: usize,
) -> Result<Vec<f64>> {
    let b = boundary_samples(f, phi, samples)?;
    Ok((0..=n_max)
        .map(|n| {
            if n == 0 {
                return 0.0;
            }
            let s: f64 = (0..samples)
                .map(|m| b.f2[m] * b.dphi2[m] * b.phi2[m].powi(n as i32 - 1))
                .sum();
            (n * n) as f64 * s / samples as f64
        })
        .collect())
}

/// Hilbert–Schmidt norm computed from the matrix and from boundary quadratures.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HsReport {
    pub frobenius_sqr: f64,
    /// `mean_θ |f|²|φ′|²(1+|φ|²)/(1−|φ|²)³`; `None` when `sup |φ| ≥ 1` on the circle.
    pub quadrature_sqr: Option<f64>,
    /// The same integrand with an extra factor `|φ|²`, kept for comparison.
    pub phi_weighted_quadrature_sqr: Option<f64>,
}

impl HsReport {
    pub fn finite(&self) -> bool {
        self.quadrature_sqr.is_some()
    }
}

pub fn hs_norm(
    f: &TaylorPolynomial,
    phi: &TaylorPolynomial,
    order: usize,
    samples: usize,
) -> Result<HsReport> {
    let frobenius_sqr = weighted_liouville_matrix(f, phi, order).frobenius_sqr();
    let b = boundary_samples(f, phi, samples)?;
    let sup = b.phi2.iter().copied().fold(0.0, f64::max);
    if sup >= 1.0 {
        return Ok(HsReport {
            frobenius_sqr,
            quadrature_sqr: None,
            phi_weighted_quadrature_sqr: None,
        });
    }
    let (mut plain, mut weighted) = (0.0, 0.0);
    for m in 0..samples {
        let p2 = b.phi2[m];
        let v = b.f2[m] * b.dphi2[m] * (1.0 + p2) / (1.0 - p2).powi(3);
        plain += v;
        weighted += v * p2;
    }
    Ok(HsReport {
        frobenius_sqr,
        quadrature_sqr: Some(plain / samples as f64),
        phi_weighted_quadrature_sqr: Some(weighted / samples as f64),
    })
}

/// Residuals of the occupation-kernel relation for weighted operators under two readings of
/// the left-hand side; the right-hand side is `K_{φ(γ(T))} − K_{φ(γ(0))}` in both.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OccupationSelfAdjoint {
    /// `Γ′(z)·φ′(z)·f(z)`.
    pub uncomposed: f64,
    /// `f(z)·φ′(z)·Γ′(φ(z))`, i.e. `A_{f,φ}Γ`.
    pub composed: f64,
}

pub fn occupation_self_adjoint_relation(
    f: &TaylorPolynomial,
    phi: &TaylorPolynomial,
    gamma: &Trajectory,
    order: usize,
) -> Result<OccupationSelfAdjoint> {
    for &z in gamma.points() {
        composed(phi, z)?;
    }
    let g = occupation_kernel(gamma, order + 1)?.series;
    let weight = f.mul_truncated(&phi.derivative(), order);
    let uncomposed = weight.mul_truncated(&g.derivative(), order);
    let composed_lhs = weighted_liouville_matrix(f, phi, order).apply(&g.with_order(order));
    let rhs = &kernel(&KernelSpec::szego(phi.eval(gamma.end()))?, order)?
        - &kernel(&KernelSpec::szego(phi.eval(gamma.start()))?, order)?;
    Ok(OccupationSelfAdjoint {
        uncomposed: uncomposed.distance(&rhs),
        composed: composed_lhs.distance(&rhs),
    })
}

/// Squared column norms of a truncated operator matrix.
pub fn column_norms_sqr(a: &OperatorMatrix) -> Vec<f64> {
    (0..=a.order()).map(|n| a.column_norm_sqr(n)).collect()
}
