use super::{c, hermitian_part, HermitianOperator, Matrix, Vector, CLIP_TOL};
use crate::error::{Error, Result};
use crate::operator::DensityMatrix;

/// Spectral decomposition `X = V diag(λ) V†` with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl Eigh {
    /// `V diag(f(λ)) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let s = f(self.values[j]);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> Matrix {
        self.map(|x| x)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// Zero cutoff for this spectrum, see [`support_threshold`].
    pub fn threshold(&self) -> f64 {
        support_threshold(self.max())
    }

    /// Projector onto eigenvectors with eigenvalue above the support threshold.
    pub fn support_projector(&self) -> Matrix {
        let thr = self.threshold();
        self.map(|x| if x > thr { 1.0 } else { 0.0 })
    }

    pub fn rank(&self) -> usize {
        let thr = self.threshold();
        self.values.iter().filter(|&&x| x > thr).count()
    }
}

/// An eigenvalue `λ` counts as zero when `λ ≤ 1e-12 · max(λ_max, 1)`.
pub fn support_threshold(lambda_max: f64) -> f64 {
    1e-12 * lambda_max.max(1.0)
}

/// Eigendecomposition of a matrix that is Hermitian up to round-off.
pub(crate) fn eigh_matrix(m: &Matrix) -> Eigh {
    let h = hermitian_part(m);
    let eig = h.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Eigh { values, vectors }
}

pub fn eigh(x: &HermitianOperator) -> Eigh {
    eigh_matrix(x.matrix())
}

pub(crate) fn schatten_from_eigenvalues(values: &[f64], alpha: f64) -> f64 {
    let thr = support_threshold(values.iter().fold(0.0_f64, |m, v| m.max(v.abs())));
    let sum: f64 = values
        .iter()
        .map(|v| v.abs())
        .filter(|&s| s > thr)
        .map(|s| s.powf(alpha))
        .sum();
    sum.powf(1.0 / alpha)
}

/// `(Σ s_i^α)^{1/α}` over the singular values of `X`.
pub fn schatten_quasi_norm(x: &Matrix, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidOrder(alpha));
    }
    let sv = x.clone().svd(false, false).singular_values;
    Ok(schatten_from_eigenvalues(sv.as_slice(), alpha))
}

fn min_eigenvalue_check(e: &Eigh) -> Result<()> {
    if e.min() < -CLIP_TOL {
        return Err(Error::NotPositive(e.min()));
    }
    Ok(())
}

/// `X^p` for PSD `X`, negative round-off eigenvalues clipped to zero.
///
/// `p ≤ 0` is only defined for strictly positive `X`; `0^p := 0` for `p > 0`.
pub fn matrix_power(x: &HermitianOperator, p: f64) -> Result<HermitianOperator> {
    let e = x.eigh();
    min_eigenvalue_check(&e)?;
    if p <= 0.0 && e.min() <= e.threshold() {
        return Err(Error::SingularPower(p));
    }
    Ok(HermitianOperator::hermitize(psd_power_eig(&e, p)))
}

pub(crate) fn psd_power_eig(e: &Eigh, p: f64) -> Matrix {
    e.map(|x| if x > 0.0 { x.powf(p) } else { 0.0 })
}

/// Power restricted to the support: eigenvalues below the threshold map to 0.
pub(crate) fn pseudo_power_eig(e: &Eigh, p: f64) -> Matrix {
    let thr = e.threshold();
    e.map(|x| if x > thr { x.powf(p) } else { 0.0 })
}

pub(crate) fn log2_eig(e: &Eigh) -> Matrix {
    let thr = e.threshold();
    e.map(|x| if x > thr { x.log2() } else { 0.0 })
}

/// `log₂ X` on the support of `X`, together with the support projector.
///
/// Directions with eigenvalue at or below the support threshold map to 0.
pub fn matrix_log2(x: &HermitianOperator) -> (HermitianOperator, HermitianOperator) {
    let e = x.eigh();
    (
        HermitianOperator::hermitize(log2_eig(&e)),
        HermitianOperator::hermitize(e.support_projector()),
    )
}

/// Fréchet derivative of `X ↦ X^p` at `X = V diag(λ) V†` applied to `H`
/// (Daleckii–Krein). The derivative is self-adjoint for the trace inner
/// product, so this also pulls gradients back through `X^p`.
pub(crate) fn power_derivative(e: &Eigh, p: f64, h: &Matrix) -> Matrix {
    let n = e.values.len();
    let floor = 1e-14 * e.max().max(f64::MIN_POSITIVE);
    let lam: Vec<f64> = e.values.iter().map(|&x| x.max(floor)).collect();
    let pw: Vec<f64> = lam.iter().map(|&x| x.powf(p)).collect();
    let mut inner = e.vectors.adjoint() * h * &e.vectors;
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (lam[i], lam[j]);
            let dd = if (a - b).abs() <= 1e-6 * a.max(b) {
                p * (0.5 * (a + b)).powf(p - 1.0)
            } else {
                (pw[i] - pw[j]) / (a - b)
            };
            inner[(i, j)] *= dd;
        }
    }
    &e.vectors * inner * e.vectors.adjoint()
}

/// `½‖ρ − σ‖₁`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "trace distance between dimensions {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let diff = eigh_matrix(&(rho.matrix() - sigma.matrix()));
    Ok(0.5 * diff.values.iter().map(|v| v.abs()).sum::<f64>())
}

/// `tr[(Y† X^p Y)^{q/p}]` for PSD `X`, `p ∈ [1, 2]`, `q ≥ 1`.
pub fn carlen_lieb_upsilon(x: &HermitianOperator, y: &Matrix, p: f64, q: f64) -> Result<f64> {
    if !(1.0..=2.0).contains(&p) || !(q >= 1.0) || !q.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Carlen-Lieb parameters need p in [1,2] and q >= 1, got p={p}, q={q}"
        )));
    }
    if y.nrows() != x.dim() {
        return Err(Error::DimensionMismatch(format!(
            "Y has {} rows, X has dimension {}",
            y.nrows(),
            x.dim()
        )));
    }
    let xp = matrix_power(x, p)?;
    let inner = y.adjoint() * xp.matrix() * y;
    let e = eigh_matrix(&inner);
    Ok(e.values.iter().map(|&v| if v > 0.0 { v.powf(q / p) } else { 0.0 }).sum())
}

#[allow(dead_code)]
pub(crate) fn diag_matrix(values: &[f64]) -> Matrix {
    Matrix::from_diagonal(&Vector::from_iterator(values.len(), values.iter().map(|&x| c(x))))
}
