//! Occupation-kernel dynamic mode decomposition.
//!
//! Each trajectory `γ_i` contributes an occupation kernel `Γ_i` and the target
//! `b_i = K_{γ_i(T)} − K_{γ_i(0)} = A_f* Γ_i`. With `Γ` and `B_m` the coefficient matrices whose
//! columns are these series, the representation of `A_f*` on `span{Γ_i}` is
//! `C = (G + ρI)⁻¹ Γᴴ B_m` with `G = Γᴴ Γ`.
//!
//! The fitted operator is the adjoint, so its eigenvalues are `conj` of the forward ones.
//! Prediction uses forward eigenfunctions `Γ (G + ρI)⁻¹ (V⁻¹)ᴴ`, which carry the
//! conjugated eigenvalues. Ridge regularization creates spurious eigenvalues whose modes do
//! not reproduce the data; eigenpairs are therefore ranked by the data residual
//! `‖B_m c − μ Γ c‖ / ‖Γ c‖`, which needs no knowledge of `f`. A low-residual pair whose mode
//! is nearly parallel to a better-ranked mode is the same eigendirection reached through a
//! near-null direction of `G`; it is marked as a duplicate and skipped.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{HardyError, Result};
use crate::occupation::{occupation_kernel, OccupationKernel, Trajectory};
use crate::series::{inner_product, kernel, KernelSpec, TaylorPolynomial};
use crate::spectral::eigen_dense;

/// Default ridge is this multiple of `trace(G)`.
pub const DEFAULT_RIDGE_FACTOR: f64 = 1e-10;

/// Modes with a larger data residual are left out of predictions.
pub const MODE_RESIDUAL_CUTOFF: f64 = 1e-2;

/// Modes with `|⟨m_i, m_j⟩|` above this (unit norm) count as the same direction.
pub const DUPLICATE_OVERLAP: f64 = 0.99;

/// Identity-observable projection residual above which a prediction is flagged.
pub const PROJECTION_RESIDUAL_THRESHOLD: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct DmdModel {
    order: usize,
    basis: Vec<OccupationKernel>,
    targets: Vec<TaylorPolynomial>,
    gram: DMatrix<Complex64>,
    operator: DMatrix<Complex64>,
    ridge: f64,
    /// Sorted by ascending residual.
    eigenvalues: Vec<Complex64>,
    residuals: Vec<f64>,
    /// Eigenvectors of the operator in the `Γ` basis.
    vectors: Vec<DVector<Complex64>>,
    /// `Γ v`, unit norm.
    modes: Vec<TaylorPolynomial>,
    /// Forward eigenfunctions with eigenvalue `conj(μ)`, unit norm.
    forward: Vec<TaylorPolynomial>,
    /// Index of the better-ranked mode this one duplicates.
    duplicate_of: Vec<Option<usize>>,
}

fn columns_matrix(series: &[TaylorPolynomial], order: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(order + 1, series.len(), |n, i| series[i].coeff(n))
}

fn column_poly(v: DVector<Complex64>) -> TaylorPolynomial {
    TaylorPolynomial::from_vec(v.as_slice().to_vec())
}

fn hermitian_extremes(m: &DMatrix<Complex64>) -> (f64, f64) {
    let ev = m.clone().symmetric_eigenvalues();
    (ev.min(), ev.max())
}

/// Fits the finite-rank adjoint from trajectories; `ridge = None` uses `10⁻¹⁰·trace(G)`.
pub fn fit(trajectories: &[Trajectory], order: usize, ridge: Option<f64>) -> Result<DmdModel> {
    if trajectories.is_empty() {
        return Err(HardyError::InsufficientData(
            "DMD needs at least one trajectory".into(),
        ));
    }
    if let Some(r) = ridge {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(HardyError::InvalidSpec(format!(
                "ridge must be finite and >= 0, got {r}"
            )));
        }
    }
    let basis = trajectories
        .par_iter()
        .map(|t| occupation_kernel(t, order))
        .collect::<Result<Vec<_>>>()?;
    let targets = trajectories
        .iter()
        .map(|t| {
            Ok(&kernel(&KernelSpec::szego(t.end())?, order)?
                - &kernel(&KernelSpec::szego(t.start())?, order)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let series: Vec<TaylorPolynomial> = basis.iter().map(|k| k.series.clone()).collect();
    let gamma = columns_matrix(&series, order);
    let bm = columns_matrix(&targets, order);
    let gram = gamma.adjoint() * &gamma;
    let k = gram.nrows();
    let trace = gram.trace().re;

    let ridge = ridge.unwrap_or(DEFAULT_RIDGE_FACTOR * trace);
    if ridge == 0.0 {
        let (min, max) = hermitian_extremes(&gram);
        if min <= max * k as f64 * f64::EPSILON * 1e2 {
            return Err(HardyError::IllConditioned {
                min_eigenvalue: min,
                max_eigenvalue: max,
            });
        }
    }
    let regularized = &gram + DMatrix::<Complex64>::identity(k, k) * Complex64::new(ridge, 0.0);
    let rhs = gamma.adjoint() * &bm;
    let inverse = regularized
        .clone()
        .cholesky()
        .map(|ch| ch.inverse())
        .or_else(|| regularized.clone().try_inverse())
        .ok_or_else(|| {
            let (min, max) = hermitian_extremes(&gram);
            HardyError::IllConditioned {
                min_eigenvalue: min,
                max_eigenvalue: max,
            }
        })?;
    let operator = &inverse * &rhs;

    let pairs = eigen_dense(&operator)?;
    let v = DMatrix::from_columns(&pairs.iter().map(|(_, v)| v.clone()).collect::<Vec<_>>());
    let v_inv = v.clone().try_inverse().unwrap_or_else(|| {
        v.clone()
            .pseudo_inverse(1e-12)
            .expect("pseudo-inverse with positive eps")
    });
    let left = v_inv.adjoint();

    let mut entries: Vec<_> = pairs
        .into_iter()
        .enumerate()
        .map(|(j, (mu, c))| {
            let mode = &gamma * &c;
            let norm = mode.norm();
            let residual = data_residual(&gamma, &bm, mu, &c);
            let forward = &gamma * (&inverse * left.column(j));
            let fnorm = forward.norm();
            let forward = if fnorm > 0.0 {
                forward / Complex64::new(fnorm, 0.0)
            } else {
                forward
            };
            let mode = if norm > 0.0 {
                mode / Complex64::new(norm, 0.0)
            } else {
                mode
            };
            (mu, residual, c, mode, forward)
        })
        .collect();
    entries.sort_by(|a, b| {
        a.1.total_cmp(&b.1)
            .then(a.0.re.total_cmp(&b.0.re))
            .then(a.0.im.total_cmp(&b.0.im))
    });

    let mut model = DmdModel {
        order,
        basis,
        targets,
        gram,
        operator,
        ridge,
        eigenvalues: Vec::with_capacity(k),
        residuals: Vec::with_capacity(k),
        vectors: Vec::with_capacity(k),
        modes: Vec::with_capacity(k),
        forward: Vec::with_capacity(k),
        duplicate_of: Vec::with_capacity(k),
    };
    for (mu, r, c, mode, fwd) in entries {
        let mode = column_poly(mode);
        let dup = (0..model.modes.len()).find(|&j| {
            model.duplicate_of[j].is_none()
                && model.residuals[j].is_finite()
                && inner_product(&mode, &model.modes[j]).norm() >= DUPLICATE_OVERLAP
        });
        model.eigenvalues.push(mu);
        model.residuals.push(r);
        model.vectors.push(c);
        model.modes.push(mode);
        model.forward.push(column_poly(fwd));
        model.duplicate_of.push(dup);
    }
    Ok(model)
}

/// `‖B_m c − μ Γ c‖ / ‖Γ c‖`; infinite when `Γ c` vanishes (a null direction of the data).
fn data_residual(
    gamma: &DMatrix<Complex64>,
    bm: &DMatrix<Complex64>,
    mu: Complex64,
    c: &DVector<Complex64>,
) -> f64 {
    let mode = gamma * c;
    let norm = mode.norm();
    let scale = gamma.norm() * c.norm();
    if norm <= 1e-12 * scale || norm == 0.0 {
        return f64::INFINITY;
    }
    (bm * c - mode * mu).norm() / norm
}

/// Predicted state together with the quality of the identity-observable projection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Prediction {
    pub value: Complex64,
    pub projection_residual: f64,
    pub modes_used: usize,
    pub low_confidence: bool,
}

impl DmdModel {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn basis(&self) -> &[OccupationKernel] {
        &self.basis
    }

    pub fn targets(&self) -> &[TaylorPolynomial] {
        &self.targets
    }

    pub fn gram(&self) -> &DMatrix<Complex64> {
        &self.gram
    }

    pub fn operator(&self) -> &DMatrix<Complex64> {
        &self.operator
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    /// Eigenvalues of the fitted adjoint, most reliable first.
    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn modes(&self) -> &[TaylorPolynomial] {
        &self.modes
    }

    pub fn forward_eigenfunctions(&self) -> &[TaylorPolynomial] {
        &self.forward
    }

    /// For each pair, the better-ranked pair whose mode it duplicates.
    pub fn duplicates(&self) -> &[Option<usize>] {
        &self.duplicate_of
    }

    /// Indices of non-duplicate pairs with a finite residual, most reliable first.
    pub fn distinct(&self) -> Vec<usize> {
        (0..self.eigenvalues.len())
            .filter(|&j| self.duplicate_of[j].is_none() && self.residuals[j].is_finite())
            .collect()
    }

    /// The `k` distinct eigenvalues with the smallest data residual.
    pub fn leading(&self, k: usize) -> Vec<Complex64> {
        self.distinct()
            .into_iter()
            .take(k)
            .map(|j| self.eigenvalues[j])
            .collect()
    }

    /// Smallest eigenvalue of the (Hermitian) Gram matrix.
    pub fn gram_min_eigenvalue(&self) -> f64 {
        hermitian_extremes(&self.gram).0
    }

    /// Data residual of pair `j` recomputed from the stored kernels and targets.
    pub fn recompute_residual(&self, j: usize) -> f64 {
        let series: Vec<TaylorPolynomial> = self.basis.iter().map(|k| k.series.clone()).collect();
        let gamma = columns_matrix(&series, self.order);
        let bm = columns_matrix(&self.targets, self.order);
        data_residual(&gamma, &bm, self.eigenvalues[j], &self.vectors[j])
    }

    fn kept(&self) -> Vec<usize> {
        self.distinct()
            .into_iter()
            .filter(|&j| self.residuals[j] <= MODE_RESIDUAL_CUTOFF)
            .collect()
    }

    /// Least-squares coefficients of `z` on the kept forward eigenfunctions and the residual.
    fn identity_projection(&self) -> (Vec<usize>, DVector<Complex64>, f64) {
        let kept = self.kept();
        let mut target = DVector::<Complex64>::zeros(self.order + 1);
        if self.order >= 1 {
            target[1] = Complex64::new(1.0, 0.0);
        }
        if kept.is_empty() {
            return (kept, DVector::zeros(0), target.norm());
        }
        let phi = DMatrix::from_fn(self.order + 1, kept.len(), |n, i| {
            self.forward[kept[i]].coeff(n)
        });
        let xi = phi
            .clone()
            .svd(true, true)
            .solve(&target, 1e-12)
            .expect("SVD computed with both factors");
        let residual = (&phi * &xi - &target).norm();
        (kept, xi, residual)
    }

    /// Projection `∑_j ξ_j φ_j` of the identity observable and its residual `‖∑ ξ_j φ_j − z‖`.
    pub fn projected_identity(&self) -> (TaylorPolynomial, f64) {
        let (kept, xi, residual) = self.identity_projection();
        let mut acc = TaylorPolynomial::zeros(self.order);
        for (&j, &x) in kept.iter().zip(xi.iter()) {
            acc = &acc + &self.forward[j].scale(x);
        }
        (acc, residual)
    }

    /// `∑_j ξ_j φ_j(z0) e^{conj(μ_j) t}` with `ξ` the projection of `z` on the kept modes.
    pub fn predict(&self, z0: Complex64, t: f64) -> Result<Prediction> {
        crate::series::check_disk(z0)?;
        let (kept, xi, projection_residual) = self.identity_projection();
        let value = kept
            .iter()
            .zip(xi.iter())
            .map(|(&j, &x)| x * self.forward[j].eval(z0) * (self.eigenvalues[j].conj() * t).exp())
            .sum();
        Ok(Prediction {
            value,
            projection_residual,
            modes_used: kept.len(),
            low_confidence: projection_residual > PROJECTION_RESIDUAL_THRESHOLD,
        })
    }

    /// Serializable summary with row-major matrices.
    pub fn export(&self, trajectory_digests: Vec<String>) -> DmdExport {
        let rows = |m: &DMatrix<Complex64>| -> Vec<Vec<Complex64>> {
            m.row_iter().map(|r| r.iter().copied().collect()).collect()
        };
        DmdExport {
            order: self.order,
            ridge: self.ridge,
            gram: rows(&self.gram),
            operator: rows(&self.operator),
            eigenvalues: self.eigenvalues.clone(),
            residuals: self
                .residuals
                .iter()
                .map(|&r| r.is_finite().then_some(r))
                .collect(),
            duplicate_of: self.duplicate_of.clone(),
            modes: self.modes.iter().map(|m| m.coeffs().to_vec()).collect(),
            trajectory_digests,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DmdExport {
    pub order: usize,
    pub ridge: f64,
    pub gram: Vec<Vec<Complex64>>,
    pub operator: Vec<Vec<Complex64>>,
    pub eigenvalues: Vec<Complex64>,
    /// `null` marks modes that vanish on the data.
    pub residuals: Vec<Option<f64>>,
    pub duplicate_of: Vec<Option<usize>>,
    pub modes: Vec<Vec<Complex64>>,
    pub trajectory_digests: Vec<String>,
}

/// Deterministic starting points on rings of radius 0.1, 0.2, 0.3 (seven angles per ring,
/// staggered between rings), first `count` taken in round-robin over rings.
pub fn ring_starts(count: usize) -> Vec<Complex64> {
    let radii = [0.1, 0.2, 0.3];
    let per_ring = 7;
    let mut all = Vec::new();
    for a in 0..per_ring {
        for (i, &r) in radii.iter().enumerate() {
            let angle = 2.0 * std::f64::consts::PI * (a as f64 + i as f64 / 3.0) / per_ring as f64;
            all.push(Complex64::from_polar(r, angle));
        }
    }
    all.truncate(count);
    all
}
