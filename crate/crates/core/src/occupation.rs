//! Trajectories in the disk, RK4 integration and occupation kernels.
//!
//! The occupation kernel of a signal `θ: [0, T] → 𝔻` is the representer of
//! `g ↦ ∫_0^T g(θ(t)) dt`; its Taylor coefficients are the moments `∫ conj(θ(t))ⁿ dt`.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{HardyError, Result};
use crate::liouville::{adjoint_matrix, liouville_matrix, weighted_liouville_matrix};
use crate::series::{kernel, KernelSpec, TaylorPolynomial};

/// Default distance kept from the unit circle.
pub const DEFAULT_MARGIN: f64 = 1e-3;

const UNIFORM_RTOL: f64 = 1e-9;

/// Time-stamped samples of a signal inside the disk.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    times: Vec<f64>,
    points: Vec<Complex64>,
    uniform: bool,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, points: Vec<Complex64>) -> Result<Self> {
        Self::with_margin(times, points, DEFAULT_MARGIN)
    }

    /// Validates strictly increasing times and `|z_k| ≤ 1 − margin`.
    pub fn with_margin(times: Vec<f64>, points: Vec<Complex64>, margin: f64) -> Result<Self> {
        if times.len() != points.len() {
            return Err(HardyError::InvalidTrajectory(format!(
                "{} times but {} points",
                times.len(),
                points.len()
            )));
        }
        if times.is_empty() {
            return Err(HardyError::InsufficientData("empty trajectory".into()));
        }
        for (k, (t, z)) in times.iter().zip(&points).enumerate() {
            if !t.is_finite() || !z.is_finite() {
                return Err(HardyError::NonFinite(format!("trajectory sample {k}")));
            }
            if z.norm() > 1.0 - margin {
                return Err(HardyError::InvalidTrajectory(format!(
                    "sample {k} has |z| = {} > 1 - {margin}",
                    z.norm()
                )));
            }
        }
        if let Some(k) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(HardyError::InvalidTrajectory(format!(
                "times not strictly increasing at samples {k} and {} ({} then {})",
                k + 1,
                times[k],
                times[k + 1]
            )));
        }
        let uniform = is_uniform(&times);
        Ok(Self {
            times,
            points,
            uniform,
        })
    }

    /// Constant signal `θ ≡ w` sampled on `samples` uniform points of `[0, T]`.
    pub fn constant(w: Complex64, duration: f64, samples: usize) -> Result<Self> {
        let times = uniform_times(duration, samples.max(2) - 1);
        let n = times.len();
        Self::new(times, vec![w; n])
    }

    /// Samples `θ(t_k)` on a uniform grid of `[0, T]` with `steps` intervals.
    pub fn sample(duration: f64, steps: usize, signal: impl Fn(f64) -> Complex64) -> Result<Self> {
        let times = uniform_times(duration, steps);
        let points = times.iter().map(|&t| signal(t)).collect();
        Self::new(times, points)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    pub fn start(&self) -> Complex64 {
        self.points[0]
    }

    pub fn end(&self) -> Complex64 {
        self.points[self.points.len() - 1]
    }

    pub fn duration(&self) -> f64 {
        self.times[self.times.len() - 1] - self.times[0]
    }

    pub fn max_step(&self) -> f64 {
        self.times
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    pub fn max_modulus(&self) -> f64 {
        self.points.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max_k |(z_{k+1} − z_{k−1})/(t_{k+1} − t_{k−1}) − f(z_k)|` over interior samples.
    pub fn finite_difference_defect(&self, field: impl Fn(Complex64) -> Complex64) -> f64 {
        (1..self.len().saturating_sub(1))
            .map(|k| {
                let slope = (self.points[k + 1] - self.points[k - 1])
                    / (self.times[k + 1] - self.times[k - 1]);
                (slope - field(self.points[k])).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `10·dt²` with `dt` the largest step.
    pub fn validity_tolerance(&self) -> f64 {
        10.0 * self.max_step().powi(2)
    }

    /// Joins two pieces where `other` starts at this trajectory's final sample.
    pub fn concat(&self, other: &Trajectory) -> Result<Trajectory> {
        let t_end = self.times[self.len() - 1];
        if other.times[0] != t_end || other.points[0] != self.end() {
            return Err(HardyError::InvalidTrajectory(
                "second piece does not start where the first ends".into(),
            ));
        }
        let mut times = self.times.clone();
        let mut points = self.points.clone();
        times.extend_from_slice(&other.times[1..]);
        points.extend_from_slice(&other.points[1..]);
        Trajectory::with_margin(times, points, 0.0)
    }

    /// CSV with header `t,re,im`, doubles written with 17 significant digits.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| HardyError::Io(e.into());
        w.write_record(["t", "re", "im"]).map_err(io)?;
        for (t, z) in self.times.iter().zip(&self.points) {
            w.write_record([
                format!("{t:.16e}"),
                format!("{:.16e}", z.re),
                format!("{:.16e}", z.im),
            ])
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Parses a `t,re,im` CSV. Row numbers in errors count data rows from 1.
    pub fn read_csv<R: Read>(reader: R, margin: f64) -> Result<Trajectory> {
        let mut r = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = r
            .headers()
            .map_err(|e| csv_error(0, e.to_string()))?
            .iter()
            .collect::<Vec<_>>();
        if header != ["t", "re", "im"] {
            return Err(csv_error(
                0,
                format!("expected header t,re,im, got {}", header.join(",")),
            ));
        }
        let mut times: Vec<f64> = Vec::new();
        let mut points = Vec::new();
        for (i, record) in r.records().enumerate() {
            let row = i + 1;
            let record = record.map_err(|e| csv_error(row, e.to_string()))?;
            if record.len() != 3 {
                return Err(csv_error(
                    row,
                    format!("expected 3 fields, got {}", record.len()),
                ));
            }
            let field = |k: usize| -> Result<f64> {
                let v: f64 = record[k]
                    .parse()
                    .map_err(|_| csv_error(row, format!("cannot parse '{}'", &record[k])))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(csv_error(row, format!("non-finite value '{}'", &record[k])))
                }
            };
            let (t, z) = (field(0)?, Complex64::new(field(1)?, field(2)?));
            if z.norm() > 1.0 - margin {
                return Err(csv_error(
                    row,
                    format!("|z| = {} outside the disk of radius 1 - {margin}", z.norm()),
                ));
            }
            if let Some(&prev) = times.last() {
                if t <= prev {
                    return Err(csv_error(
                        row,
                        format!(
                            "time not increasing: rows {} and {row} have t = {prev} then {t}",
                            row - 1
                        ),
                    ));
                }
            }
            times.push(t);
            points.push(z);
        }
        Trajectory::with_margin(times, points, margin)
    }
}

fn csv_error(row: usize, reason: String) -> HardyError {
    HardyError::TrajectoryCsv { row, reason }
}

fn uniform_times(duration: f64, steps: usize) -> Vec<f64> {
    let h = duration / steps as f64;
    let mut times: Vec<f64> = (0..=steps).map(|k| k as f64 * h).collect();
    times[steps] = duration;
    times
}

fn is_uniform(times: &[f64]) -> bool {
    if times.len() < 2 {
        return true;
    }
    let mean = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - mean).abs() <= UNIFORM_RTOL * mean)
}

/// Classical RK4 for `ż = f(z)` with `|z| ≤ 1 − 10⁻³` enforced after every step.
pub fn integrate_ode(
    f: &TaylorPolynomial,
    z0: Complex64,
    duration: f64,
    dt: f64,
) -> Result<Trajectory> {
    integrate_field(|z| f.eval(z), z0, duration, dt, DEFAULT_MARGIN)
}

/// RK4 for an arbitrary vector field. The step is shrunk so that it divides `T`.
pub fn integrate_field(
    field: impl Fn(Complex64) -> Complex64,
    z0: Complex64,
    duration: f64,
    dt: f64,
    margin: f64,
) -> Result<Trajectory> {
    if !(duration > 0.0 && dt > 0.0 && duration.is_finite() && dt.is_finite()) {
        return Err(HardyError::InvalidTrajectory(format!(
            "need T > 0 and dt > 0, got T = {duration}, dt = {dt}"
        )));
    }
    if !z0.is_finite() || z0.norm() > 1.0 - margin {
        return Err(HardyError::Domain { point: z0 });
    }
    let steps = (duration / dt - 1e-9).ceil().max(1.0) as usize;
    let times = uniform_times(duration, steps);
    let h = duration / steps as f64;
    let mut points = Vec::with_capacity(steps + 1);
    let mut z = z0;
    points.push(z);
    for &t in &times[1..] {
        let k1 = field(z);
        let k2 = field(z + k1 * (h / 2.0));
        let k3 = field(z + k2 * (h / 2.0));
        let k4 = field(z + k3 * h);
        z += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if !z.is_finite() || z.norm() > 1.0 - margin {
            return Err(HardyError::DiskExit { time: t, point: z });
        }
        points.push(z);
    }
    Trajectory::with_margin(times, points, margin)
}

/// Quadrature rule used for the occupation moments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    /// Composite Simpson; an odd interval count closes with the 3/8 rule.
    Simpson,
    Trapezoid,
}

impl Quadrature {
    /// Simpson on uniform grids, trapezoid otherwise.
    pub fn default_for(trajectory: &Trajectory) -> Self {
        if trajectory.is_uniform() {
            Quadrature::Simpson
        } else {
            Quadrature::Trapezoid
        }
    }

    /// Weights `w_k` with `∫ u dt ≈ ∑ w_k u(t_k)`.
    pub fn weights(self, times: &[f64]) -> Result<Vec<f64>> {
        let k = times.len();
        if k < 3 {
            return Err(HardyError::InsufficientData(format!(
                "quadrature needs at least 3 samples, got {k}"
            )));
        }
        let mut w = vec![0.0; k];
        match self {
            Quadrature::Trapezoid => {
                for (i, pair) in times.windows(2).enumerate() {
                    let h = pair[1] - pair[0];
                    w[i] += h / 2.0;
                    w[i + 1] += h / 2.0;
                }
            }
            Quadrature::Simpson => {
                if !is_uniform(times) {
                    return Err(HardyError::InvalidTrajectory(
                        "Simpson's rule needs uniformly spaced samples".into(),
                    ));
                }
                let intervals = k - 1;
                let h = (times[k - 1] - times[0]) / intervals as f64;
                let simpson_end = if intervals.is_multiple_of(2) {
                    intervals
                } else {
                    intervals - 3
                };
                for i in (0..simpson_end).step_by(2) {
                    w[i] += h / 3.0;
                    w[i + 1] += 4.0 * h / 3.0;
                    w[i + 2] += h / 3.0;
                }
                if simpson_end < intervals {
                    let s = simpson_end;
                    for (d, c) in [1.0, 3.0, 3.0, 1.0].into_iter().enumerate() {
                        w[s + d] += 3.0 * h / 8.0 * c;
                    }
                }
            }
        }
        Ok(w)
    }
}

/// Endpoint data of the trajectory an occupation kernel was built from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectorySummary {
    pub samples: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub start: Complex64,
    pub end: Complex64,
    pub max_modulus: f64,
}

impl From<&Trajectory> for TrajectorySummary {
    fn from(t: &Trajectory) -> Self {
        Self {
            samples: t.len(),
            t_start: t.times[0],
            t_end: t.times[t.len() - 1],
            start: t.start(),
            end: t.end(),
            max_modulus: t.max_modulus(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OccupationKernel {
    pub series: TaylorPolynomial,
    pub source: TrajectorySummary,
    pub quadrature: Quadrature,
}

impl OccupationKernel {
    /// `|c_n| ≤ T·r_maxⁿ` for every coefficient, up to rounding.
    pub fn satisfies_moment_bound(&self) -> bool {
        let t = self.source.t_end - self.source.t_start;
        let r = self.source.max_modulus;
        self.series
            .coeffs()
            .iter()
            .enumerate()
            .all(|(n, c)| c.norm() <= t * r.powi(n as i32) * (1.0 + 1e-12) + 1e-300)
    }
}

/// `∑_k w_k u_k · conj(z_k)ⁿ` for `n = 0..=N`.
fn weighted_moments(
    points: &[Complex64],
    weights: &[f64],
    values: impl Fn(usize) -> Complex64,
    order: usize,
) -> Vec<Complex64> {
    let mut c = vec![Complex64::default(); order + 1];
    for (k, (&z, &w)) in points.iter().zip(weights).enumerate() {
        let zbar = z.conj();
        let mut p = values(k) * w;
        for cn in c.iter_mut() {
            *cn += p;
            p *= zbar;
        }
    }
    c
}

/// Occupation kernel with the default quadrature for the trajectory.
pub fn occupation_kernel(theta: &Trajectory, order: usize) -> Result<OccupationKernel> {
    occupation_kernel_with(theta, order, Quadrature::default_for(theta))
}

pub fn occupation_kernel_with(
    theta: &Trajectory,
    order: usize,
    quadrature: Quadrature,
) -> Result<OccupationKernel> {
    let weights = quadrature.weights(&theta.times)?;
    let coeffs = weighted_moments(&theta.points, &weights, |_| Complex64::new(1.0, 0.0), order);
    Ok(OccupationKernel {
        series: TaylorPolynomial::from_vec(coeffs),
        source: theta.into(),
        quadrature,
    })
}

/// `∫ u(θ(t)) dt` with the kernel's quadrature rule, for comparison with `⟨u, Γ_θ⟩`.
pub fn integrate_along(
    theta: &Trajectory,
    quadrature: Quadrature,
    u: impl Fn(Complex64) -> Complex64,
) -> Result<Complex64> {
    let weights = quadrature.weights(&theta.times)?;
    Ok(theta
        .points
        .iter()
        .zip(&weights)
        .map(|(&z, &w)| u(z) * w)
        .sum())
}

/// Residual of an occupation-kernel adjoint relation, with the trajectory consistency check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelationResidual {
    pub residual: f64,
    pub trajectory_defect: f64,
    pub trajectory_tolerance: f64,
}

impl RelationResidual {
    /// Whether the samples follow `ż = f(z)` closely enough for the residual to certify anything.
    pub fn trajectory_consistent(&self) -> bool {
        self.trajectory_defect <= self.trajectory_tolerance
    }
}

fn trajectory_check(f: &TaylorPolynomial, gamma: &Trajectory) -> (f64, f64) {
    let defect = gamma.finite_difference_defect(|z| f.eval(z));
    let tol = gamma.validity_tolerance();
    if defect > tol {
        log::warn!(
            "trajectory does not follow the symbol: finite-difference defect {defect:.3e} > {tol:.3e}; \
             residual is not a certificate"
        );
    }
    (defect, tol)
}

/// `‖A_f* Γ_γ − (K_{γ(T)} − K_{γ(0)})‖` with the adjoint taken as the conjugate transpose.
pub fn liouville_occupation_residual(
    f: &TaylorPolynomial,
    gamma: &Trajectory,
    order: usize,
) -> Result<RelationResidual> {
    let (trajectory_defect, trajectory_tolerance) = trajectory_check(f, gamma);
    let gamma_kernel = occupation_kernel(gamma, order)?;
    let lhs = adjoint_matrix(&liouville_matrix(f, order)).apply(&gamma_kernel.series);
    let rhs = &kernel(&KernelSpec::szego(gamma.end())?, order)?
        - &kernel(&KernelSpec::szego(gamma.start())?, order)?;
    Ok(RelationResidual {
        residual: lhs.distance(&rhs),
        trajectory_defect,
        trajectory_tolerance,
    })
}

/// `‖A_{f,φ}* Γ_γ − (K_{φ(γ(T))} − K_{φ(γ(0))})‖`.
pub fn weighted_occupation_residual(
    f: &TaylorPolynomial,
    phi: &TaylorPolynomial,
    gamma: &Trajectory,
    order: usize,
) -> Result<RelationResidual> {
    for &z in gamma.points() {
        let modulus = phi.eval(z).norm();
        if modulus >= 1.0 {
            return Err(HardyError::CompositionOutOfDisk { point: z, modulus });
        }
    }
    let (trajectory_defect, trajectory_tolerance) = trajectory_check(f, gamma);
    let gamma_kernel = occupation_kernel(gamma, order)?;
    let lhs = adjoint_matrix(&weighted_liouville_matrix(f, phi, order)).apply(&gamma_kernel.series);
    let rhs = &kernel(&KernelSpec::szego(phi.eval(gamma.end()))?, order)?
        - &kernel(&KernelSpec::szego(phi.eval(gamma.start()))?, order)?;
    Ok(RelationResidual {
        residual: lhs.distance(&rhs),
        trajectory_defect,
        trajectory_tolerance,
    })
}

/// Placement of the conjugation in the signal adjoint integral.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalAdjointReading {
    /// `∫ conj(f(θ)) g^{[1]}_{θ(t)} dt`: coefficient of `zⁿ` is `n ∫ conj(f(θ)) conj(θ)^{n−1} dt`.
    #[default]
    KernelAtSignal,
    /// `∫ conj(f(θ) g^{[1]}_z(θ)) dt`: coefficient of `z^{n−1}` is `n ∫ conj(f(θ)) conj(θ)ⁿ dt`.
    JointConjugate,
}

/// `A_f* Γ_θ` for an arbitrary signal, as a coefficient-space quadrature.
pub fn adjoint_on_signal(
    f: &TaylorPolynomial,
    theta: &Trajectory,
    order: usize,
    reading: SignalAdjointReading,
) -> Result<TaylorPolynomial> {
    let weights = Quadrature::default_for(theta).weights(&theta.times)?;
    let fbar = |k: usize| f.eval(theta.points[k]).conj();
    let moments = weighted_moments(&theta.points, &weights, fbar, order + 1);
    let coeffs = match reading {
        SignalAdjointReading::KernelAtSignal => (0..=order)
            .map(|n| {
                if n == 0 {
                    Complex64::default()
                } else {
                    moments[n - 1] * n as f64
                }
            })
            .collect(),
        SignalAdjointReading::JointConjugate => (0..=order)
            .map(|m| moments[m + 1] * (m + 1) as f64)
            .collect(),
    };
    Ok(TaylorPolynomial::from_vec(coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::inner_product;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exponential_solution() {
        let traj = integrate_ode(&TaylorPolynomial::identity(1), c(0.1, 0.0), 1.0, 1e-3).unwrap();
        assert_eq!(traj.len(), 1001);
        assert_eq!(traj.duration(), 1.0);
        assert!((traj.end() - c(0.1 * 1f64.exp(), 0.0)).norm() <= 1e-10);
        assert!(traj.is_uniform());
    }

    #[test]
    fn zero_field_is_constant() {
        let w = c(0.3, -0.2);
        let traj = integrate_ode(&TaylorPolynomial::zeros(0), w, 1.0, 0.1).unwrap();
        assert!(traj.points().iter().all(|&z| z == w));
    }

    #[test]
    fn finite_escape_leaves_disk() {
        let f = TaylorPolynomial::from_real(&[1.0, 0.0, 1.0]).unwrap();
        match integrate_ode(&f, c(0.9, 0.0), 1.0, 1e-3) {
            Err(HardyError::DiskExit { time, .. }) => assert!(time < 1.0),
            other => panic!("expected disk exit, got {other:?}"),
        }
    }

    #[test]
    fn trajectory_validation() {
        assert!(Trajectory::new(vec![0.0, 1.0], vec![c(0.0, 0.0)]).is_err());
        assert!(Trajectory::new(vec![0.0, 0.0], vec![c(0.0, 0.0); 2]).is_err());
        assert!(Trajectory::new(vec![0.0, 1.0], vec![c(0.9995, 0.0); 2]).is_err());
        assert!(Trajectory::with_margin(vec![0.0, 1.0], vec![c(0.9995, 0.0); 2], 0.0).is_ok());
        let t = Trajectory::new(vec![0.0, 0.1, 0.3], vec![c(0.0, 0.0); 3]).unwrap();
        assert!(!t.is_uniform());
    }

    #[test]
    fn quadrature_weights_integrate_polynomials() {
        let times: Vec<f64> = (0..=7).map(|k| k as f64 * 0.25).collect();
        for rule in [Quadrature::Simpson, Quadrature::Trapezoid] {
            let w = rule.weights(&times).unwrap();
            assert!((w.iter().sum::<f64>() - 1.75).abs() < 1e-14);
        }
        // Odd interval count closes with the 3/8 rule; both rules are exact for cubics.
        let w = Quadrature::Simpson.weights(&times).unwrap();
        let cubic: f64 = times.iter().zip(&w).map(|(t, w)| w * t.powi(3)).sum();
        assert!((cubic - 1.75f64.powi(4) / 4.0).abs() < 1e-13);
        assert!(Quadrature::Simpson.weights(&[0.0, 1.0]).is_err());
        assert!(Quadrature::Simpson.weights(&[0.0, 1.0, 3.0]).is_err());
    }

    #[test]
    fn constant_signal_kernel() {
        let w = c(0.4, 0.3);
        let traj = Trajectory::constant(w, 2.0, 11).unwrap();
        let k = occupation_kernel(&traj, 20).unwrap();
        let expected = kernel(&KernelSpec::szego(w).unwrap(), 20)
            .unwrap()
            .scale(c(2.0, 0.0));
        assert!(k.series.max_abs_diff(&expected) < 1e-14);
        assert_eq!(k.quadrature, Quadrature::Simpson);
    }

    #[test]
    fn circular_signal_integral() {
        let pi2 = 2.0 * std::f64::consts::PI;
        let traj = Trajectory::sample(pi2, 2000, |t| Complex64::from_polar(0.5, t)).unwrap();
        let k = occupation_kernel(&traj, 8).unwrap();
        let g = TaylorPolynomial::monomial(2, 8);
        assert!(inner_product(&g, &k.series).norm() < 1e-12);
        assert!((k.series.coeff(0) - c(pi2, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn first_moment_for_exponential_flow() {
        let traj = integrate_ode(&TaylorPolynomial::identity(1), c(0.2, 0.1), 1.0, 1e-3).unwrap();
        let k = occupation_kernel(&traj, 4).unwrap();
        let expected = (traj.end() - traj.start()).conj();
        assert!((k.series.coeff(1) - expected).norm() < 1e-12);
        assert!(k.satisfies_moment_bound());
    }

    #[test]
    fn occupation_relation_for_identity_symbol() {
        let f = TaylorPolynomial::identity(1);
        let traj = integrate_ode(&f, c(0.2, 0.0), 1.0, 1e-3).unwrap();
        let r = liouville_occupation_residual(&f, &traj, 80).unwrap();
        assert!(r.residual <= 1e-6, "{r:?}");
        assert!(r.trajectory_consistent());
    }

    #[test]
    fn occupation_relation_at_fixed_point() {
        // f = z − 1/2 vanishes at 1/2.
        let f = TaylorPolynomial::from_real(&[-0.5, 1.0]).unwrap();
        let traj = integrate_ode(&f, c(0.5, 0.0), 1.0, 1e-2).unwrap();
        let r = liouville_occupation_residual(&f, &traj, 96).unwrap();
        assert!(r.residual <= 1e-12, "{r:?}");
    }

    #[test]
    fn short_horizon_residual_vanishes() {
        let f = TaylorPolynomial::from_real(&[0.1, 0.5]).unwrap();
        let traj = integrate_ode(&f, c(0.3, 0.1), 1e-3, 1e-4).unwrap();
        let r = liouville_occupation_residual(&f, &traj, 40).unwrap();
        assert!(r.residual <= 1e-12, "{r:?}");
    }

    #[test]
    fn weighted_relation() {
        let f = TaylorPolynomial::identity(1);
        let traj = integrate_ode(&f, c(0.2, 0.0), 1.0, 1e-3).unwrap();
        let plain = liouville_occupation_residual(&f, &traj, 40).unwrap();
        let weighted =
            weighted_occupation_residual(&f, &TaylorPolynomial::identity(1), &traj, 40).unwrap();
        assert!((plain.residual - weighted.residual).abs() < 1e-15);

        let r =
            weighted_occupation_residual(&f, &TaylorPolynomial::monomial(2, 2), &traj, 80).unwrap();
        assert!(r.residual <= 1e-6, "{r:?}");

        let still = Trajectory::constant(c(0.3, 0.0), 1.0, 11).unwrap();
        let r = weighted_occupation_residual(
            &TaylorPolynomial::zeros(0),
            &TaylorPolynomial::monomial(2, 2),
            &still,
            20,
        )
        .unwrap();
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn weighted_relation_rejects_escaping_composition() {
        let traj = Trajectory::constant(c(0.5, 0.0), 1.0, 5).unwrap();
        let phi = TaylorPolynomial::from_real(&[0.0, 3.0]).unwrap();
        assert!(matches!(
            weighted_occupation_residual(&TaylorPolynomial::identity(1), &phi, &traj, 8),
            Err(HardyError::CompositionOutOfDisk { .. })
        ));
    }

    #[test]
    fn signal_adjoint_matches_matrix() {
        let f = TaylorPolynomial::identity(1);
        let theta = Trajectory::sample(std::f64::consts::PI, 1000, |t| {
            Complex64::from_polar(0.5, t)
        })
        .unwrap();
        let got = adjoint_on_signal(&f, &theta, 48, SignalAdjointReading::default()).unwrap();
        let oracle = adjoint_matrix(&liouville_matrix(&f, 48))
            .apply(&occupation_kernel(&theta, 48).unwrap().series);
        assert!(got.distance(&oracle) <= 1e-6);

        assert!(adjoint_on_signal(
            &TaylorPolynomial::zeros(0),
            &theta,
            8,
            SignalAdjointReading::default()
        )
        .unwrap()
        .is_zero());
    }

    #[test]
    fn signal_adjoint_constant_reduction() {
        let w = c(0.3, 0.4);
        let f = TaylorPolynomial::from_real(&[1.0, 0.5, -0.2]).unwrap();
        let theta = Trajectory::constant(w, 1.5, 7).unwrap();
        let got = adjoint_on_signal(&f, &theta, 32, SignalAdjointReading::KernelAtSignal).unwrap();
        let expected = kernel(&KernelSpec::new(w, 1, false).unwrap(), 32)
            .unwrap()
            .scale(f.eval(w).conj() * 1.5);
        assert!(got.distance(&expected) < 1e-13);
        let other =
            adjoint_on_signal(&f, &theta, 32, SignalAdjointReading::JointConjugate).unwrap();
        assert!(other.distance(&expected) > 1e-2);
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let traj = integrate_ode(
            &TaylorPolynomial::from_real(&[0.1, 0.9]).unwrap(),
            c(0.1, 0.2),
            0.5,
            0.01,
        )
        .unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("t,re,im\n"));
        let back = Trajectory::read_csv(buf.as_slice(), DEFAULT_MARGIN).unwrap();
        assert_eq!(back, traj);
    }

    #[test]
    fn csv_errors_cite_rows() {
        let bad_disk = "t,re,im\n0,0,0\n1,1.2,0\n";
        assert!(matches!(
            Trajectory::read_csv(bad_disk.as_bytes(), DEFAULT_MARGIN),
            Err(HardyError::TrajectoryCsv { row: 2, .. })
        ));
        let bad_time = "t,re,im\n0,0,0\n1,0,0\n0.5,0,0\n";
        match Trajectory::read_csv(bad_time.as_bytes(), DEFAULT_MARGIN) {
            Err(HardyError::TrajectoryCsv { row: 3, reason }) => {
                assert!(reason.contains("rows 2 and 3"))
            }
            other => panic!("{other:?}"),
        }
        let bad_field = "t,re,im\n0,x,0\n";
        assert!(matches!(
            Trajectory::read_csv(bad_field.as_bytes(), DEFAULT_MARGIN),
            Err(HardyError::TrajectoryCsv { row: 1, .. })
        ));
        let ok = "t,re,im\n0,0.1,0\n0.5,0.2,0\n1,0.3,0\n";
        assert_eq!(
            Trajectory::read_csv(ok.as_bytes(), DEFAULT_MARGIN)
                .unwrap()
                .len(),
            3
        );
    }
}
