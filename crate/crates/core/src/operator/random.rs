use super::{c, hermitian_part, DensityMatrix, HermitianOperator, Matrix, C64};
use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn complex_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    Matrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * scale, im * scale)
    })
}

/// `G G† / tr(G G†)` with `G` a `d × rank` complex Gaussian matrix.
pub fn random_density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    if d == 0 || rank == 0 || rank > d {
        return Err(Error::DimensionMismatch(format!("rank {rank} for dimension {d}")));
    }
    let g = complex_gaussian(d, rank, rng);
    Ok(DensityMatrix::from_psd_unnormalized(&(&g * g.adjoint())))
}

/// `d_out × d_in` matrix with orthonormal columns, from the QR factorization
/// of a complex Gaussian matrix (phases fixed so that `R` has a positive diagonal).
pub fn random_isometry<R: Rng + ?Sized>(d_in: usize, d_out: usize, rng: &mut R) -> Result<Matrix> {
    if d_in == 0 || d_out < d_in {
        return Err(Error::DimensionMismatch(format!(
            "isometry from dimension {d_in} into {d_out}"
        )));
    }
    let g = complex_gaussian(d_out, d_in, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d_in {
        let rjj = r[(j, j)];
        if rjj.norm() > 0.0 {
            let phase = rjj / c(rjj.norm());
            for i in 0..d_out {
                q[(i, j)] *= phase;
            }
        }
    }
    Ok(q)
}

pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Matrix {
    random_isometry(d, d, rng).expect("square isometry")
}

/// Hermitian matrix with GUE-like entries; handy for tests and probes.
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianOperator {
    HermitianOperator::hermitize(hermitian_part(&complex_gaussian(d, d, rng)))
}
