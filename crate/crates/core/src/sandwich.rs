//! The trace functional `T(R, S) = tr[((R⊗S) J (R⊗S))^α]` on `A ⊗ B` and its
//! gradients in `R` and `S`.
//!
//! Every optimized quantity in the crate is a special case: the cb
//! quasi-norm (`R = ρ^{1/(2α)}`, `S = 1`), the Rényi mutual information
//! (`R = ρ_A^β`, `S = σ^β`) and the channel Rényi information (both).

use crate::operator::{
    c, eigh_matrix, power_derivative, psd_power_eig, ptrace_first, ptrace_second, pseudo_power_eig, tensor,
    DensityMatrix, Matrix,
};
use crate::optimize::StateObjective;

pub(crate) struct SandwichEval {
    pub t: f64,
    /// `∇_R T`, Hermitian, with `dT = tr(∇_R dR)`.
    pub grad_r: Option<Matrix>,
    pub grad_s: Option<Matrix>,
}

#[cfg(test)]
pub(crate) fn sandwich_value(j: &Matrix, r: &Matrix, s: &Matrix, alpha: f64) -> f64 {
    sandwich(j, r, s, alpha, false, false).t
}

/// With `W = KJK`, `K = R⊗S` and `G = α W^{α−1}` (on the support of `W`),
/// `dT = tr(G dW) = tr(dK (C + C†))` where `C = J K G`; the partial gradients
/// are the corresponding partial traces against `1⊗S` and `R⊗1`.
pub(crate) fn sandwich(j: &Matrix, r: &Matrix, s: &Matrix, alpha: f64, want_r: bool, want_s: bool) -> SandwichEval {
    let (da, db) = (r.nrows(), s.nrows());
    let k = tensor(r, s);
    let w = &k * j * &k;
    let e = eigh_matrix(&w);
    let thr = e.threshold();
    let t: f64 = e.values.iter().filter(|&&x| x > thr).map(|x| x.powf(alpha)).sum();
    if !want_r && !want_s {
        return SandwichEval { t, grad_r: None, grad_s: None };
    }
    let g = pseudo_power_eig(&e, alpha - 1.0) * c(alpha);
    let cm = j * &k * g;
    let grad_r = want_r.then(|| {
        let cr = ptrace_second(&(tensor(&Matrix::identity(da, da), s) * &cm), da, db);
        &cr + cr.adjoint()
    });
    let grad_s = want_s.then(|| {
        let cs = ptrace_first(&(tensor(r, &Matrix::identity(db, db)) * &cm), da, db);
        &cs + cs.adjoint()
    });
    SandwichEval { t, grad_r, grad_s }
}

/// Which tensor factor of `J` a state variable enters through.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Side {
    First,
    Second,
}

impl Side {
    pub fn other(self) -> Self {
        match self {
            Side::First => Side::Second,
            Side::Second => Side::First,
        }
    }
}

/// `X ↦ ln T` with `X^power` in the `varying` slot and `fixed` in the other.
#[derive(Clone)]
pub(crate) struct SandwichObjective {
    pub j: Matrix,
    pub fixed: Matrix,
    pub varying: Side,
    pub power: f64,
    pub alpha: f64,
}

impl SandwichObjective {
    fn factors<'a>(&'a self, xp: &'a Matrix) -> (&'a Matrix, &'a Matrix) {
        match self.varying {
            Side::First => (xp, &self.fixed),
            Side::Second => (&self.fixed, xp),
        }
    }

    /// Raw `T` at `X`.
    pub fn t(&self, x: &DensityMatrix) -> f64 {
        let xp = psd_power_eig(&x.op().eigh(), self.power);
        let (r, s) = self.factors(&xp);
        sandwich(&self.j, r, s, self.alpha, false, false).t
    }
}

impl StateObjective for SandwichObjective {
    fn value(&self, x: &DensityMatrix) -> f64 {
        let t = self.t(x);
        if t > 0.0 {
            t.ln()
        } else {
            f64::NEG_INFINITY
        }
    }

    fn has_gradient(&self) -> bool {
        true
    }

    fn value_and_gradient(&self, x: &DensityMatrix) -> (f64, Matrix) {
        let e = x.op().eigh();
        let xp = psd_power_eig(&e, self.power);
        let (r, s) = self.factors(&xp);
        let first = self.varying == Side::First;
        let ev = sandwich(&self.j, r, s, self.alpha, first, !first);
        if !(ev.t > 0.0) {
            return (f64::NEG_INFINITY, Matrix::zeros(x.dim(), x.dim()));
        }
        let g = if first { ev.grad_r } else { ev.grad_s }.expect("requested");
        (ev.t.ln(), power_derivative(&e, self.power, &g) * c(1.0 / ev.t))
    }
}
