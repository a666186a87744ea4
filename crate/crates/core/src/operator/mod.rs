//! Dense complex Hermitian linear algebra.
//!
//! Operators are stored as `nalgebra::DMatrix<Complex<f64>>`. The newtypes
//! [`HermitianOperator`], [`DensityMatrix`] and [`PureStateVector`] carry the
//! invariants the rest of the crate relies on; [`Matrix`] is used wherever
//! no Hermiticity is assumed (Kraus operators, Stinespring maps, the `Y` of
//! the Carlen–Lieb trace function).
//!
//! Tensor products use the row-major Kronecker convention: the leftmost
//! factor is the slowest index.

mod linalg;
mod random;
mod tensor;

pub use linalg::{
    carlen_lieb_upsilon, eigh, matrix_log2, matrix_power, schatten_quasi_norm, support_threshold,
    trace_distance, Eigh,
};
pub(crate) use linalg::{
    eigh_matrix, log2_eig, power_derivative, pseudo_power_eig, psd_power_eig,
};
pub use random::{complex_gaussian, random_density, random_hermitian, random_isometry, random_unitary};
pub use tensor::{
    heisenberg_weyl, max_entangled, max_entangled_vector, partial_trace, permute_subsystems,
    ptrace_first, ptrace_second, purify, tensor,
};

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

pub use nalgebra::Complex;

pub type C64 = Complex<f64>;
/// General complex matrix, no structural invariant.
pub type Matrix = DMatrix<C64>;
pub type Vector = DVector<C64>;

/// Per-entry tolerance for `X = X†`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues in `(-CLIP_TOL, 0)` are treated as round-off and clipped to zero.
pub const CLIP_TOL: f64 = 1e-10;
/// Trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-10;

pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Largest `|X_ij - conj(X_ji)|`.
pub fn hermiticity_defect(m: &Matrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(X + X†)/2`.
pub fn hermitian_part(m: &Matrix) -> Matrix {
    (m + m.adjoint()) * c(0.5)
}

pub fn trace_re(m: &Matrix) -> f64 {
    m.diagonal().iter().map(|z| z.re).sum()
}

/// A complex Hermitian `d × d` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    m: Matrix,
}

impl HermitianOperator {
    /// Validates squareness and Hermiticity (per entry, within 1e-12).
    pub fn new(m: Matrix) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "expected a nonempty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let defect = hermiticity_defect(&m);
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self { m })
    }

    /// Takes the Hermitian part of a square matrix that is Hermitian up to
    /// round-off (products of Hermitian factors, partial traces, ...).
    pub fn hermitize(m: Matrix) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "hermitize needs a square matrix");
        Self { m: hermitian_part(&m) }
    }

    pub fn identity(d: usize) -> Self {
        Self { m: Matrix::identity(d, d) }
    }

    pub fn zeros(d: usize) -> Self {
        Self { m: Matrix::zeros(d, d) }
    }

    pub fn diag(values: &[f64]) -> Self {
        let v = Vector::from_iterator(values.len(), values.iter().map(|&x| c(x)));
        Self { m: Matrix::from_diagonal(&v) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn into_matrix(self) -> Matrix {
        self.m
    }

    pub fn trace(&self) -> f64 {
        trace_re(&self.m)
    }

    pub fn eigh(&self) -> Eigh {
        eigh(self)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { m: &self.m * c(s) }
    }
}

/// Positive semidefinite, unit-trace Hermitian operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let tr = op.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::BadTrace(tr));
        }
        let min = op.eigh().values[0];
        if min < -CLIP_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(Self { op })
    }

    pub fn from_matrix(m: Matrix) -> Result<Self> {
        Self::new(HermitianOperator::new(m)?)
    }

    pub fn diag(probabilities: &[f64]) -> Result<Self> {
        Self::new(HermitianOperator::diag(probabilities))
    }

    /// Normalizes a PSD matrix (up to round-off) to unit trace.
    ///
    /// Used on matrices that are PSD by construction, e.g. `L L†`.
    pub fn from_psd_unnormalized(m: &Matrix) -> Self {
        let h = hermitian_part(m);
        let tr = trace_re(&h);
        assert!(tr > 0.0, "cannot normalize an operator with trace {tr}");
        Self { op: HermitianOperator { m: h * c(1.0 / tr) } }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self { op: HermitianOperator::identity(d).scale(1.0 / d as f64) }
    }

    /// `|i⟩⟨i|` in dimension `d`.
    pub fn basis(d: usize, i: usize) -> Self {
        let mut m = Matrix::zeros(d, d);
        m[(i, i)] = c(1.0);
        Self { op: HermitianOperator { m } }
    }

    pub fn from_pure(psi: &PureStateVector) -> Self {
        Self { op: HermitianOperator::hermitize(psi.projector()) }
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &Matrix {
        self.op.matrix()
    }

    pub fn purity(&self) -> f64 {
        trace_re(&(self.matrix() * self.matrix()))
    }
}

/// Unit vector in `C^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct PureStateVector {
    amplitudes: Vector,
}

impl PureStateVector {
    pub fn new(amplitudes: Vector) -> Result<Self> {
        let norm = amplitudes.norm();
        if amplitudes.is_empty() || (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes })
    }

    pub fn normalize(v: Vector) -> Result<Self> {
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes: v.unscale(norm) })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &Vector {
        &self.amplitudes
    }

    pub fn projector(&self) -> Matrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }
}

/// Dimensions of the tensor factors of a composite system, slowest first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SystemLayout {
    factor_dims: Vec<usize>,
}

impl SystemLayout {
    pub fn new(factor_dims: Vec<usize>) -> Result<Self> {
        if factor_dims.is_empty() || factor_dims.contains(&0) {
            return Err(Error::DimensionMismatch(format!(
                "invalid factor dimensions {factor_dims:?}"
            )));
        }
        Ok(Self { factor_dims })
    }

    pub fn bipartite(a: usize, b: usize) -> Self {
        Self::new(vec![a, b]).expect("positive dimensions")
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn total(&self) -> usize {
        self.factor_dims.iter().product()
    }

    pub fn check(&self, dim: usize) -> Result<()> {
        if self.total() != dim {
            return Err(Error::DimensionMismatch(format!(
                "layout {:?} has total dimension {}, operator has {}",
                self.factor_dims,
                self.total(),
                dim
            )));
        }
        Ok(())
    }
}
