//! Operator matrices for Liouville operators and their adjoints.
//!
//! Column `n` of an [`OperatorMatrix`] holds the coefficients of the operator applied to
//! `zⁿ`, truncated at order `N`. Because the monomials are orthonormal in H², the adjoint of
//! the truncation is its conjugate transpose ([`adjoint_matrix`]); this is the reference
//! against which the boundary formula ([`adjoint_apply_boundary`]) and the kernel formulas
//! are checked.

mod smirnov;

pub use smirnov::{domain_membership_check, smirnov_decompose, SmirnovPair};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{HardyError, Result};
use crate::series::{kernel, project_h2, to_boundary, BoundaryGrid, KernelSpec, TaylorPolynomial};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    Liouville,
    Scaled,
    Weighted,
}

/// Dense matrix of a truncated operator in the monomial basis.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    entries: DMatrix<Complex64>,
    kind: OperatorKind,
}

impl OperatorMatrix {
    pub fn new(entries: DMatrix<Complex64>, kind: OperatorKind) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(HardyError::InvalidSpec(format!(
                "operator matrix must be square and non-empty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(HardyError::NonFinite("operator matrix entry".into()));
        }
        Ok(Self { entries, kind })
    }

    pub fn order(&self) -> usize {
        self.entries.nrows() - 1
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    /// Applies the matrix to `h` (truncated or zero-padded to order `N`).
    pub fn apply(&self, h: &TaylorPolynomial) -> TaylorPolynomial {
        let v = DVector::from_column_slice(h.with_order(self.order()).coeffs());
        TaylorPolynomial::from_vec((&self.entries * v).as_slice().to_vec())
    }

    pub fn frobenius_sqr(&self) -> f64 {
        self.entries.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn column_norm_sqr(&self, col: usize) -> f64 {
        self.entries.column(col).iter().map(|v| v.norm_sqr()).sum()
    }
}

#[derive(Serialize, Deserialize)]
struct OperatorMatrixJson {
    order: usize,
    kind: OperatorKind,
    entries: Vec<Vec<Complex64>>,
}

impl Serialize for OperatorMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows = self
            .entries
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect();
        OperatorMatrixJson {
            order: self.order(),
            kind: self.kind,
            entries: rows,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for OperatorMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let raw = OperatorMatrixJson::deserialize(deserializer)?;
        let n = raw.order + 1;
        if raw.entries.len() != n || raw.entries.iter().any(|r| r.len() != n) {
            return Err(D::Error::custom(format!("entries must be {n}x{n}")));
        }
        let m = DMatrix::from_fn(n, n, |i, j| raw.entries[i][j]);
        OperatorMatrix::new(m, raw.kind).map_err(D::Error::custom)
    }
}

fn from_columns(order: usize, columns: Vec<Vec<Complex64>>, kind: OperatorKind) -> OperatorMatrix {
    let n = order + 1;
    let mut entries = DMatrix::zeros(n, n);
    for (j, col) in columns.into_iter().enumerate() {
        for (i, v) in col.into_iter().enumerate().take(n) {
            entries[(i, j)] = v;
        }
    }
    OperatorMatrix { entries, kind }
}

/// `A_f g = f·g′`: column `n` is `n·f·z^{n−1}`, rows beyond `N` dropped.
pub fn liouville_matrix(f: &TaylorPolynomial, order: usize) -> OperatorMatrix {
    let n = order + 1;
    let mut entries = DMatrix::zeros(n, n);
    for col in 1..n {
        for (k, &fk) in f.coeffs().iter().enumerate() {
            let row = col - 1 + k;
            if row > order {
                break;
            }
            entries[(row, col)] += fk * col as f64;
        }
    }
    OperatorMatrix {
        entries,
        kind: OperatorKind::Liouville,
    }
}

/// Scaled operator `A_{f,a} g = a·f·g′(a·)`: column `n` is `n aⁿ f z^{n−1}`.
pub fn scaled_liouville_matrix(f: &TaylorPolynomial, a: f64, order: usize) -> OperatorMatrix {
    let n = order + 1;
    let mut entries = DMatrix::zeros(n, n);
    for col in 1..n {
        let weight = col as f64 * a.powi(col as i32);
        for (k, &fk) in f.coeffs().iter().enumerate() {
            let row = col - 1 + k;
            if row > order {
                break;
            }
            entries[(row, col)] += fk * weight;
        }
    }
    OperatorMatrix {
        entries,
        kind: OperatorKind::Scaled,
    }
}

/// `A_{f,φ} g = f·φ′·g′(φ)`: column `n` is `n·f·φ′·φ^{n−1}` truncated at `N`.
pub fn weighted_liouville_matrix(
    f: &TaylorPolynomial,
    phi: &TaylorPolynomial,
    order: usize,
) -> OperatorMatrix {
    if phi.coeff(0).norm() >= 1.0 {
        log::warn!(
            "composition symbol has |phi(0)| = {} >= 1; columns will not decay",
            phi.coeff(0).norm()
        );
    }
    let phi = phi.with_order(order);
    let weight = f.mul_truncated(&phi.derivative(), order);
    let mut powers = Vec::with_capacity(order + 1);
    let mut p = TaylorPolynomial::constant(Complex64::new(1.0, 0.0), order);
    for _ in 0..order {
        powers.push(p.clone());
        p = p.mul_truncated(&phi, order);
    }
    let mut columns = vec![vec![Complex64::default(); order + 1]];
    columns.extend(
        powers
            .par_iter()
            .enumerate()
            .map(|(k, pw)| {
                let n = (k + 1) as f64;
                weight
                    .mul_truncated(pw, order)
                    .into_coeffs()
                    .into_iter()
                    .map(|c| c * n)
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>(),
    );
    from_columns(order, columns, OperatorKind::Weighted)
}

/// Conjugate transpose: the adjoint of the truncation in the orthonormal monomial basis.
pub fn adjoint_matrix(a: &OperatorMatrix) -> OperatorMatrix {
    OperatorMatrix {
        entries: a.entries.adjoint(),
        kind: a.kind,
    }
}

/// `max |A − A*|` entrywise; zero iff the truncation is self-adjoint.
pub fn hermitian_defect(a: &OperatorMatrix) -> f64 {
    let n = a.entries.nrows();
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in i..n {
            defect = defect.max((a.entries[(i, j)] - a.entries[(j, i)].conj()).norm());
        }
    }
    defect
}

/// Adjoint of `A_f` through the boundary formula
/// `A_f* h = P_{H²}( conj(f/z)·(z h)′ − conj(f′)·h )`, evaluated on an `M`-point grid.
///
/// On the circle `conj(f(z)/z) = conj(f(z))·z`. The result is truncated at order `N`.
pub fn adjoint_apply_boundary(
    f: &TaylorPolynomial,
    h: &TaylorPolynomial,
    order: usize,
    samples: usize,
) -> Result<TaylorPolynomial> {
    let required = (4 * (order + 1)).max(order + f.order() + 2);
    if samples < required {
        return Err(HardyError::Aliasing {
            samples,
            order,
            required,
        });
    }
    let h = h.with_order(order);
    // (z h)' = h + z h'
    let zh = TaylorPolynomial::monomial(1, order + 1).mul_truncated(&h, order + 1);
    let d_zh = zh.derivative();
    let f_b = to_boundary(f, samples)?;
    let df_b = to_boundary(&f.derivative(), samples)?;
    let d_zh_b = to_boundary(&d_zh, samples)?;
    let h_b = to_boundary(&h, samples)?;
    let values = f_b
        .points()
        .enumerate()
        .map(|(m, z)| {
            let f_over_z_conj = f_b.values()[m].conj() * z;
            f_over_z_conj * d_zh_b.values()[m] - df_b.values()[m].conj() * h_b.values()[m]
        })
        .collect();
    project_h2(&BoundaryGrid::new(values)?, order)
}

/// Which reading of the adjoint-on-derivative-kernel sum to evaluate.
///
/// `Unweighted` is `∑_{ℓ<j} conj(f^{(ℓ)}(w)) g^{[j−ℓ]}_w`; `Leibniz` inserts the binomial
/// weights `C(j−1, ℓ)` that come from differentiating `h′·f` `j−1` times. All weights are 1
/// for `j ≤ 2`, so the two coincide there; from `j = 3` on they differ unless the middle
/// derivatives of `f` vanish at `w`. Cross-validation against the conjugate-transpose matrix
/// shows `Leibniz` is the adjoint, so it is the default.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelAdjointVariant {
    Unweighted,
    #[default]
    Leibniz,
}

/// `A_f* g^{[j−1]}_w` as a combination of derivative kernels, truncated at `N`.
pub fn adjoint_on_derivative_kernel(
    f: &TaylorPolynomial,
    w: Complex64,
    j: usize,
    variant: KernelAdjointVariant,
    order: usize,
) -> Result<TaylorPolynomial> {
    if j == 0 {
        return Err(HardyError::InvalidIndex(
            "derivative-kernel adjoint needs j >= 1".into(),
        ));
    }
    let mut acc = TaylorPolynomial::zeros(order);
    for l in 0..j {
        let weight = match variant {
            KernelAdjointVariant::Unweighted => 1.0,
            KernelAdjointVariant::Leibniz => binomial(j - 1, l),
        };
        let coeff = f.eval_derivative(l, w).conj() * weight;
        let g = kernel(&KernelSpec::new(w, j - l, false)?, order)?;
        acc = &acc + &g.scale(coeff);
    }
    Ok(acc)
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
