//! Problem instance model.
//!
//! An [`Instance`] holds the data of one mixed-binary QCQP:
//!
//! ```text
//! min  ‖w‖²  s.t.  wᴴ H_i w ≥ β_i + (1 − β_i)·ε          (coverage model)
//! max  ‖w‖²  s.t.  wᴴ H_i w ≤ β_i·ε + (1 − β_i)          (suppression model)
//!                  Σ β_i = Q,  β_i ∈ {0,1},  w ∈ 𝔽ᴺ
//! ```
//!
//! with `H_i` Hermitian PSD, `𝔽 ∈ {ℝ, ℂ}`, `1 ≤ Q ≤ M` and `ε ∈ [0,1]`.
//!
//! The instance file format is JSON with fields `field` (`"real"` or
//! `"complex"`), `model` (`"min"` or `"max"`), `epsilon`, `Q` and `matrices`
//! (an array of N×N arrays). A complex entry is a two-element `[re, im]`
//! array; a bare number is accepted in either field and means a zero
//! imaginary part. NaN and infinity are rejected.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{stream_rng, Stream};

pub type C64 = Complex<f64>;

/// Maximum tolerated `‖H − Hᴴ‖_∞` at construction.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Relative PSD tolerance: `λ_min ≥ −PSD_REL_TOL · max(1, λ_max)`.
pub const PSD_REL_TOL: f64 = 1e-9;
/// Default relative eigenvalue cutoff for numerical rank.
pub const RANK_REL_TOL: f64 = 1e-9;

/// Scalar field of the continuous variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

/// Which of the two models the instance belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelSense {
    #[serde(rename = "min")]
    Minimize,
    #[serde(rename = "max")]
    Maximize,
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian: max |H - H^H| = {defect:.3e} exceeds {HERMITIAN_TOL:.0e}")]
    NotHermitian { defect: f64 },
    #[error("matrix {index}: {source}")]
    AtIndex {
        /// 1-based matrix index, matching the file format convention.
        index: usize,
        source: Box<InstanceError>,
    },
    #[error("matrix {index} has dimension {got}, expected {expected}")]
    DimensionMismatch { index: usize, got: usize, expected: usize },
    #[error("matrix {index} entry ({row},{col}): nonzero imaginary part {im} in a real instance")]
    ImaginaryInRealField { index: usize, row: usize, col: usize, im: f64 },
    #[error("non-finite value encountered: {what}")]
    NonFinite { what: String },
    #[error("instance file syntax error: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("instance failed validation:\n{0}")]
    Validation(ValidationReport),
    #[error("whitening matrix is not positive definite (min eigenvalue {min_eig:.3e})")]
    NotPositiveDefinite { min_eig: f64 },
    #[error("whitening matrix dimension {got} does not match instance dimension {expected}")]
    WhitenDimension { got: usize, expected: usize },
    #[error("whitening matrix must be real for a real instance")]
    WhitenField,
}

/// Dense Hermitian matrix. Construction checks the Hermitian defect and then
/// stores the exactly symmetrized `(H + Hᴴ)/2`, so downstream code may rely
/// on `H == Hᴴ` bit-for-bit.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    data: DMatrix<C64>,
}

impl HermitianMatrix {
    pub fn new(data: DMatrix<C64>) -> Result<Self, InstanceError> {
        if data.nrows() != data.ncols() {
            return Err(InstanceError::NotSquare { rows: data.nrows(), cols: data.ncols() });
        }
        let defect = hermitian_defect(&data);
        if defect > HERMITIAN_TOL || defect.is_nan() {
            return Err(InstanceError::NotHermitian { defect });
        }
        let sym = (&data + data.adjoint()).map(|z| z * 0.5);
        Ok(Self { data: sym })
    }

    pub fn from_real(m: DMatrix<f64>) -> Result<Self, InstanceError> {
        Self::new(m.map(|x| C64::new(x, 0.0)))
    }

    /// `h hᴴ` for a column vector `h`; always Hermitian PSD of rank ≤ 1.
    pub fn from_outer(h: &DVector<C64>) -> Self {
        let m = h * h.adjoint();
        Self::new(m).expect("outer product is Hermitian")
    }

    pub fn identity(n: usize) -> Self {
        Self { data: DMatrix::identity(n, n) }
    }

    pub fn zeros(n: usize) -> Self {
        Self { data: DMatrix::zeros(n, n) }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn real_part(&self) -> DMatrix<f64> {
        self.data.map(|z| z.re)
    }

    pub fn imag_part(&self) -> DMatrix<f64> {
        self.data.map(|z| z.im)
    }

    /// True when every imaginary part is exactly zero.
    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let eig = SymmetricEigen::new(self.data.clone());
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        vals
    }

    /// Eigendecomposition `(λ ascending, matching unit eigenvectors)`.
    pub fn eigen_pairs(&self) -> (Vec<f64>, DMatrix<C64>) {
        let eig = SymmetricEigen::new(self.data.clone());
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let vals = order.iter().map(|&j| eig.eigenvalues[j]).collect();
        let vecs = DMatrix::from_fn(self.dim(), self.dim(), |i, j| eig.eigenvectors[(i, order[j])]);
        (vals, vecs)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    /// `λ_min ≥ −tol·max(1, λ_max)` up to the crate-wide relative tolerance.
    pub fn is_psd(&self) -> bool {
        let vals = self.eigenvalues();
        let max = vals.last().copied().unwrap_or(0.0);
        let min = vals.first().copied().unwrap_or(0.0);
        min >= -PSD_REL_TOL * 1.0_f64.max(max)
    }

    /// Count of eigenvalues above `rel_tol · max(λ_max, 0)`.
    pub fn numerical_rank(&self, rel_tol: f64) -> usize {
        let vals = self.eigenvalues();
        let max = vals.last().copied().unwrap_or(0.0).max(0.0);
        if max == 0.0 {
            return 0;
        }
        vals.iter().filter(|&&v| v > rel_tol * max).count()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.data[(i, i)].re).sum()
    }

    /// `Re Tr(AB)`; exact `Tr(AB)` for a Hermitian pair.
    pub fn trace_product(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim());
        let mut acc = 0.0;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let a = self.data[(i, j)];
                let b = other.data[(j, i)];
                acc += a.re * b.re - a.im * b.im;
            }
        }
        acc
    }

    /// `vᴴ H v`, real for Hermitian `H`.
    pub fn quad_form(&self, v: &DVector<C64>) -> f64 {
        let hv = &self.data * v;
        v.iter().zip(hv.iter()).map(|(a, b)| a.conj() * b).map(|z| z.re).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { data: self.data.map(|z| z * s) }
    }

    /// Factor `L` with `L Lᴴ = H` from the eigendecomposition, dropping
    /// eigenvalues below `rel_tol·λ_max`. Errors if `H` is indefinite beyond
    /// the PSD tolerance.
    pub fn psd_factor(&self) -> Result<DMatrix<C64>, InstanceError> {
        let (vals, vecs) = self.eigen_pairs();
        let max = vals.last().copied().unwrap_or(0.0).max(0.0);
        let floor = -PSD_REL_TOL * 1.0_f64.max(max);
        if vals.first().copied().unwrap_or(0.0) < floor {
            return Err(InstanceError::NonFinite {
                what: format!("indefinite covariance (min eigenvalue {:.3e})", vals[0]),
            });
        }
        let n = self.dim();
        let mut l = vecs;
        for j in 0..n {
            let lam = vals[j].max(0.0);
            let s = if lam > RANK_REL_TOL * max { lam.sqrt() } else { 0.0 };
            for i in 0..n {
                l[(i, j)] *= s;
            }
        }
        Ok(l)
    }
}

pub(crate) fn hermitian_defect(m: &DMatrix<C64>) -> f64 {
    let mut defect: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let d = m[(i, j)] - m[(j, i)].conj();
            defect = defect.max(d.norm());
        }
    }
    defect
}

/// One mixed-binary QCQP instance.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub field: Field,
    pub sense: ModelSense,
    pub matrices: Vec<HermitianMatrix>,
    /// Cardinality target Q: how many constraints must hold at the strong level.
    pub cardinality: usize,
    pub epsilon: f64,
}

impl Instance {
    /// Number of quadratic constraints M.
    pub fn num_constraints(&self) -> usize {
        self.matrices.len()
    }

    /// Ambient dimension N of the continuous variable.
    pub fn dim(&self) -> usize {
        self.matrices.first().map_or(0, HermitianMatrix::dim)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let m = self.num_constraints();
        if m < 2 {
            report.push(format!("M = {m} is below the minimum of 2"));
        }
        let n = self.dim();
        if n < 2 {
            report.push(format!("N = {n} is below the minimum of 2"));
        }
        if self.cardinality < 1 || self.cardinality > m.max(1) {
            report.push(format!("Q out of range: Q = {} with M = {m}", self.cardinality));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            report.push(format!("epsilon = {} outside [0, 1]", self.epsilon));
        }
        if !self.epsilon.is_finite() {
            report.push("epsilon is not finite".to_string());
        }
        for (idx, h) in self.matrices.iter().enumerate() {
            let label = idx + 1;
            if h.dim() != n {
                report.push(format!("matrix {label}: dimension {} differs from {n}", h.dim()));
                continue;
            }
            if h.matrix().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                report.push(format!("matrix {label}: non-finite entry"));
                continue;
            }
            if self.field == Field::Real && !h.is_real() {
                report.push(format!("matrix {label}: nonzero imaginary part in a real instance"));
            }
            if !h.is_psd() {
                report.push(format!(
                    "not PSD at index {label}: min eigenvalue {:.6e}",
                    h.min_eigenvalue()
                ));
            }
        }
        report
    }
}

/// List of human-readable invariant violations; empty means valid.
#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, v: String) {
        self.violations.push(v);
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.violations.is_empty() {
            write!(f, "valid")
        } else {
            for v in &self.violations {
                writeln!(f, "  - {v}")?;
            }
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    field: Field,
    model: ModelSense,
    epsilon: f64,
    #[serde(rename = "Q")]
    q: usize,
    matrices: Vec<Vec<Vec<Entry>>>,
}

/// A matrix entry: bare number, or `[re, im]`.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Entry {
    Re(f64),
    ReIm([f64; 2]),
}

impl Entry {
    fn to_complex(&self) -> C64 {
        match self {
            Entry::Re(x) => C64::new(*x, 0.0),
            Entry::ReIm([re, im]) => C64::new(*re, *im),
        }
    }
}

/// Parse an instance document. The result always passes [`Instance::validate`].
pub fn parse_instance(text: &str) -> Result<Instance, InstanceError> {
    let file: InstanceFile = serde_json::from_str(text)?;
    let mut matrices = Vec::with_capacity(file.matrices.len());
    let mut dim: Option<usize> = None;
    for (idx, rows) in file.matrices.iter().enumerate() {
        let label = idx + 1;
        let nrows = rows.len();
        for (r, row) in rows.iter().enumerate() {
            if row.len() != nrows {
                return Err(InstanceError::AtIndex {
                    index: label,
                    source: Box::new(InstanceError::NotSquare { rows: nrows, cols: row.len() }),
                });
            }
            for (c, e) in row.iter().enumerate() {
                let z = e.to_complex();
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(InstanceError::NonFinite {
                        what: format!("matrix {label} entry ({},{})", r + 1, c + 1),
                    });
                }
                if file.field == Field::Real && z.im != 0.0 {
                    return Err(InstanceError::ImaginaryInRealField {
                        index: label,
                        row: r + 1,
                        col: c + 1,
                        im: z.im,
                    });
                }
            }
        }
        match dim {
            None => dim = Some(nrows),
            Some(d) if d != nrows => {
                return Err(InstanceError::DimensionMismatch { index: label, got: nrows, expected: d })
            }
            _ => {}
        }
        let data = DMatrix::from_fn(nrows, nrows, |i, j| rows[i][j].to_complex());
        let h = HermitianMatrix::new(data)
            .map_err(|e| InstanceError::AtIndex { index: label, source: Box::new(e) })?;
        matrices.push(h);
    }
    if !file.epsilon.is_finite() {
        return Err(InstanceError::NonFinite { what: "epsilon".to_string() });
    }
    let instance = Instance {
        field: file.field,
        sense: file.model,
        matrices,
        cardinality: file.q,
        epsilon: file.epsilon,
    };
    let report = instance.validate();
    if !report.is_valid() {
        return Err(InstanceError::Validation(report));
    }
    Ok(instance)
}

/// Serialize to the instance file format. Real instances are written with
/// bare numeric entries, complex instances with `[re, im]` pairs.
pub fn serialize_instance(instance: &Instance) -> Result<String, InstanceError> {
    let report = instance.validate();
    if !report.is_valid() {
        return Err(InstanceError::Validation(report));
    }
    let matrices = instance
        .matrices
        .iter()
        .map(|h| {
            let n = h.dim();
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let z = h.matrix()[(i, j)];
                            match instance.field {
                                Field::Real => Entry::Re(z.re),
                                Field::Complex => Entry::ReIm([z.re, z.im]),
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let file = InstanceFile {
        field: instance.field,
        model: instance.sense,
        epsilon: instance.epsilon,
        q: instance.cardinality,
        matrices,
    };
    Ok(serde_json::to_string_pretty(&file).expect("instance serialization cannot fail"))
}

// ---------------------------------------------------------------------------
// Random generation
// ---------------------------------------------------------------------------

/// Shape parameters for Gaussian instance generation.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct InstanceParams {
    pub num_constraints: usize,
    pub dim: usize,
    pub field: Field,
    pub sense: ModelSense,
    pub cardinality: usize,
    pub epsilon: f64,
}

/// Generate an instance with `H_i = h_i h_iᴴ`, where `h_i` has i.i.d.
/// standard normal entries in the real case and circularly-symmetric entries
/// `(g₁ + i·g₂)/√2` with unit variance in the complex case. Deterministic in
/// `(params, seed)`; the draw stream is disjoint from all rounding streams.
pub fn generate_gaussian_instance(params: &InstanceParams, seed: u64) -> Instance {
    assert!(params.num_constraints >= 2, "M >= 2 required");
    assert!(params.dim >= 2, "N >= 2 required");
    assert!(
        params.cardinality >= 1 && params.cardinality <= params.num_constraints,
        "1 <= Q <= M required"
    );
    assert!((0.0..=1.0).contains(&params.epsilon), "epsilon in [0,1] required");
    let mut rng = stream_rng(seed, Stream::Instance, 0, 0);
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let matrices = (0..params.num_constraints)
        .map(|_| {
            let h = DVector::from_fn(params.dim, |_, _| match params.field {
                Field::Real => C64::new(rng.sample(StandardNormal), 0.0),
                Field::Complex => {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    C64::new(re * inv_sqrt2, im * inv_sqrt2)
                }
            });
            HermitianMatrix::from_outer(&h)
        })
        .collect();
    Instance {
        field: params.field,
        sense: params.sense,
        matrices,
        cardinality: params.cardinality,
        epsilon: params.epsilon,
    }
}

// ---------------------------------------------------------------------------
// Whitening
// ---------------------------------------------------------------------------

/// Hermitian square root `V = A^{1/2}` of a positive definite matrix.
pub fn whitening_matrix(a: &HermitianMatrix) -> Result<DMatrix<C64>, InstanceError> {
    let (vals, vecs) = a.eigen_pairs();
    let min_eig = vals.first().copied().unwrap_or(0.0);
    if min_eig <= 0.0 {
        return Err(InstanceError::NotPositiveDefinite { min_eig });
    }
    let n = a.dim();
    let d = DMatrix::from_fn(n, n, |i, j| {
        if i == j { C64::new(vals[i].sqrt(), 0.0) } else { C64::new(0.0, 0.0) }
    });
    Ok(&vecs * d * vecs.adjoint())
}

/// Transform constraints so the objective `wᴴ A w` becomes `‖ŵ‖²` with
/// `ŵ = V w`, `VᴴV = A`: each `H_i` is replaced by `V⁻ᴴ H_i V⁻¹`. Quadratic
/// constraint values are preserved: `wᴴ H_i w = ŵᴴ Ĥ_i ŵ`.
pub fn whiten_objective(
    a: &HermitianMatrix,
    instance: &Instance,
) -> Result<Instance, InstanceError> {
    if a.dim() != instance.dim() {
        return Err(InstanceError::WhitenDimension { got: a.dim(), expected: instance.dim() });
    }
    if instance.field == Field::Real && !a.is_real() {
        return Err(InstanceError::WhitenField);
    }
    let (vals, vecs) = a.eigen_pairs();
    let min_eig = vals.first().copied().unwrap_or(0.0);
    if min_eig <= 0.0 {
        return Err(InstanceError::NotPositiveDefinite { min_eig });
    }
    let n = a.dim();
    let d_inv = DMatrix::from_fn(n, n, |i, j| {
        if i == j { C64::new(1.0 / vals[i].sqrt(), 0.0) } else { C64::new(0.0, 0.0) }
    });
    // V is Hermitian, hence V⁻ᴴ = V⁻¹.
    let v_inv = &vecs * d_inv * vecs.adjoint();
    let matrices = instance
        .matrices
        .iter()
        .map(|h| {
            let m = v_inv.adjoint() * h.matrix() * &v_inv;
            let sym = (&m + m.adjoint()).map(|z| z * 0.5);
            HermitianMatrix::new(sym).expect("congruence preserves Hermitian structure")
        })
        .collect();
    Ok(Instance { matrices, ..instance.clone() })
}
