use super::{c, DensityMatrix, HermitianOperator, Matrix, PureStateVector, SystemLayout, Vector};
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Kronecker product; `x` is the first (slowest) factor.
pub fn tensor(x: &Matrix, y: &Matrix) -> Matrix {
    x.kronecker(y)
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Trace out every factor not listed in `keep`. Kept factors stay in layout order.
pub fn partial_trace(x: &Matrix, layout: &SystemLayout, keep: &[usize]) -> Result<Matrix> {
    layout.check(x.nrows())?;
    layout.check(x.ncols())?;
    let dims = layout.factor_dims();
    if keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::DimensionMismatch(format!(
            "keep set {keep:?} out of range for {} factors",
            dims.len()
        )));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !kept.contains(k)).collect();

    let st = strides(dims);
    let kept_dims: Vec<usize> = kept.iter().map(|&k| dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let n_out: usize = kept_dims.iter().product();
    let n_tr: usize = traced_dims.iter().product();

    // Offset in the full index contributed by each kept / traced multi-index.
    let offsets = |which: &[usize], sub_dims: &[usize], count: usize| -> Vec<usize> {
        let sub_st = strides(sub_dims);
        (0..count)
            .map(|flat| {
                which
                    .iter()
                    .zip(sub_dims.iter().zip(&sub_st))
                    .map(|(&factor, (&d, &s))| ((flat / s) % d) * st[factor])
                    .sum()
            })
            .collect()
    };
    let keep_off = offsets(&kept, &kept_dims, n_out);
    let trace_off = offsets(&traced, &traced_dims, n_tr);

    let mut out = Matrix::zeros(n_out, n_out);
    for i in 0..n_out {
        for j in 0..n_out {
            let mut acc = c(0.0);
            for &t in &trace_off {
                acc += x[(keep_off[i] + t, keep_off[j] + t)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// `tr_B X` for `X` on `A ⊗ B`.
pub fn ptrace_second(x: &Matrix, da: usize, db: usize) -> Matrix {
    debug_assert_eq!(x.nrows(), da * db);
    let mut out = Matrix::zeros(da, da);
    for i in 0..da {
        for j in 0..da {
            let mut acc = c(0.0);
            for k in 0..db {
                acc += x[(i * db + k, j * db + k)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// `tr_A X` for `X` on `A ⊗ B`.
pub fn ptrace_first(x: &Matrix, da: usize, db: usize) -> Matrix {
    debug_assert_eq!(x.nrows(), da * db);
    let mut out = Matrix::zeros(db, db);
    for i in 0..db {
        for j in 0..db {
            let mut acc = c(0.0);
            for k in 0..da {
                acc += x[(k * db + i, k * db + j)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// Reorder tensor factors: factor `k` of the result is factor `perm[k]` of `x`.
pub fn permute_subsystems(x: &Matrix, layout: &SystemLayout, perm: &[usize]) -> Result<Matrix> {
    layout.check(x.nrows())?;
    let dims = layout.factor_dims();
    let mut sorted = perm.to_vec();
    sorted.sort_unstable();
    if sorted != (0..dims.len()).collect::<Vec<_>>() {
        return Err(Error::DimensionMismatch(format!("{perm:?} is not a permutation")));
    }
    let index_map = permutation_index_map(dims, perm);
    let n = x.nrows();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = x[(index_map[i], index_map[j])];
        }
    }
    Ok(out)
}

/// For each flat index of the permuted system, the flat index in the original one.
pub(crate) fn permutation_index_map(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    let new_dims: Vec<usize> = perm.iter().map(|&k| dims[k]).collect();
    let new_st = strides(&new_dims);
    let n: usize = dims.iter().product();
    (0..n)
        .map(|flat| {
            perm.iter()
                .enumerate()
                .map(|(pos, &orig)| ((flat / new_st[pos]) % new_dims[pos]) * st[orig])
                .sum()
        })
        .collect()
}

/// `Σ_i |i⟩|i⟩`, unnormalized.
pub fn max_entangled_vector(d: usize) -> Vector {
    let mut v = Vector::zeros(d * d);
    for i in 0..d {
        v[i * d + i] = c(1.0);
    }
    v
}

/// `Φ = Σ_{ij} |i⟩⟨j| ⊗ |i⟩⟨j|`, rank one with trace `d`.
pub fn max_entangled(d: usize) -> HermitianOperator {
    let v = max_entangled_vector(d);
    HermitianOperator::hermitize(&v * v.adjoint())
}

/// `(√ρ ⊗ 1)|Φ⟩ = Σ_i √λ_i |v_i⟩ ⊗ |v̄_i⟩`; the first factor carries `ρ`.
///
/// This is the eigen-purification with the ancilla basis chosen as the
/// complex conjugate eigenbasis, which makes it independent of eigenvector
/// phases and ordering.
pub fn purify(rho: &DensityMatrix) -> PureStateVector {
    let d = rho.dim();
    let e = rho.op().eigh();
    let mut v = Vector::zeros(d * d);
    for (k, &lam) in e.values.iter().enumerate() {
        if lam <= 0.0 {
            continue;
        }
        let w = lam.sqrt();
        let col = e.vectors.column(k);
        for i in 0..d {
            for j in 0..d {
                v[i * d + j] += col[i] * col[j].conj() * w;
            }
        }
    }
    PureStateVector::normalize(v).expect("purification of a density matrix is nonzero")
}

/// Shift-clock unitaries `W^{(a,b)} = X^a Z^b`, ordered by `k = a·d + b`.
pub fn heisenberg_weyl(d: usize) -> Vec<Matrix> {
    let omega = |k: usize| {
        let t = 2.0 * PI * (k % d) as f64 / d as f64;
        super::C64::new(t.cos(), t.sin())
    };
    let mut out = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            // X^a Z^b |j⟩ = ω^{bj} |j + a⟩
            let mut w = Matrix::zeros(d, d);
            for j in 0..d {
                w[((j + a) % d, j)] = omega(b * j);
            }
            out.push(w);
        }
    }
    out
}
