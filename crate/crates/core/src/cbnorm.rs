//! Completely bounded 1→α quasi-norms of CP maps.
//!
//! For `α ∈ [1/2, 1)` three equivalent formulas are available:
//!
//! * [`cb_quasinorm_primal`]: `min_ρ ‖(ρ^{1/(2α)} ⊗ 1) J (ρ^{1/(2α)} ⊗ 1)‖_α`
//!   with `J` the Choi operator and `ρ` on its first factor;
//! * [`cb_quasinorm_dual`]: `min_{X ≥ 0} ‖M^C(X)‖_α / ‖X‖_α` through the
//!   complementary map;
//! * [`cb_quasinorm_pure_ratio`]: `min_φ ‖(id ⊗ M)(φ)‖_α / ‖tr_A φ‖_α` over
//!   pure bipartite inputs.
//!
//! The first objective is convex in `ρ`; the other two are not, and rely on
//! restarts.

use crate::channel::{tensor_map, CPMap};
use crate::entropy::RenyiOrder;
use crate::error::{Error, Result};
use crate::operator::{
    c, complex_gaussian, eigh_matrix, max_entangled_vector, pseudo_power_eig,
    DensityMatrix, Matrix, C64,
};
use crate::optimize::{nelder_mead, optimize_over_states, OptimizationOutcome, OptimizerConfig, Sense, StateObjective};
use crate::sandwich::{SandwichObjective, Side};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Largest product input dimension accepted by the gap functions.
pub const DIMENSION_CAP: usize = 9;

#[derive(Clone, Debug)]
pub struct CbNormResult {
    pub value: f64,
    /// Minimizing `ρ` of the first expression.
    pub optimizer_state: DensityMatrix,
    pub dual_value: f64,
    /// `|log₂ value − log₂ dual_value|`.
    pub agreement_gap: f64,
    pub outcome: OptimizationOutcome,
}

/// `ρ ↦ ln tr[((ρ^{1/(2α)} ⊗ S) J (ρ^{1/(2α)} ⊗ S))^α]` for the Choi operator
/// `J` of `map`; `S = 1` unless an output sandwich is supplied.
pub(crate) fn choi_objective(map: &CPMap, alpha: f64, output: Option<Matrix>) -> SandwichObjective {
    let db = map.out_dim();
    SandwichObjective {
        j: map.choi().matrix().clone(),
        fixed: output.unwrap_or_else(|| Matrix::identity(db, db)),
        varying: Side::First,
        power: 1.0 / (2.0 * alpha),
        alpha,
    }
}

/// The norm `T^{1/α}` from the objective value `ln T`.
fn norm_from_log(f: f64, alpha: f64) -> f64 {
    (f / alpha).exp()
}

/// `ln ‖M^C(X)‖_α − ln ‖X‖_α` on densities `X`.
#[derive(Clone)]
struct ComplementRatioObjective {
    comp: CPMap,
    alpha: f64,
}

fn trace_power(m: &Matrix, alpha: f64) -> (f64, crate::operator::Eigh) {
    let e = eigh_matrix(m);
    let thr = e.threshold();
    let t = e.values.iter().filter(|&&x| x > thr).map(|x| x.powf(alpha)).sum();
    (t, e)
}

impl StateObjective for ComplementRatioObjective {
    fn value(&self, x: &DensityMatrix) -> f64 {
        self.value_and_gradient(x).0
    }

    fn has_gradient(&self) -> bool {
        true
    }

    fn value_and_gradient(&self, x: &DensityMatrix) -> (f64, Matrix) {
        let a = self.alpha;
        let y = self.comp.apply_unchecked(x.matrix());
        let (ty, ey) = trace_power(&y, a);
        let (tx, ex) = trace_power(x.matrix(), a);
        if !(ty > 0.0) || !(tx > 0.0) {
            return (f64::INFINITY, Matrix::zeros(x.dim(), x.dim()));
        }
        let f = (ty.ln() - tx.ln()) / a;
        let gy = self.comp.apply_adjoint(&pseudo_power_eig(&ey, a - 1.0)) * c(1.0 / ty);
        let gx = pseudo_power_eig(&ex, a - 1.0) * c(1.0 / tx);
        (f, gy - gx)
    }
}

/// The first expression alone: `(norm, outcome)`.
pub fn cb_quasinorm_primal_value(map: &CPMap, alpha: RenyiOrder, cfg: &OptimizerConfig) -> Result<(f64, OptimizationOutcome)> {
    let a = alpha.quasi()?;
    let obj = choi_objective(map, a, None);
    let out = optimize_over_states(&obj, map.in_dim(), Sense::Minimize, cfg)?;
    Ok((norm_from_log(out.value, a), out))
}

/// `‖M‖_{cb,1→α}` from the first expression, cross-checked against the second.
pub fn cb_quasinorm_primal(map: &CPMap, alpha: RenyiOrder, cfg: &OptimizerConfig) -> Result<CbNormResult> {
    let (value, outcome) = cb_quasinorm_primal_value(map, alpha, cfg)?;
    let dual_value = cb_quasinorm_dual(map, alpha, cfg)?;
    Ok(CbNormResult {
        value,
        optimizer_state: outcome.argument.clone(),
        dual_value,
        agreement_gap: (value.log2() - dual_value.log2()).abs(),
        outcome,
    })
}

/// `min_{X ≥ 0} ‖M^C(X)‖_α / ‖X‖_α`; by scale invariance `X` ranges over densities.
pub fn cb_quasinorm_dual(map: &CPMap, alpha: RenyiOrder, cfg: &OptimizerConfig) -> Result<f64> {
    let a = alpha.quasi()?;
    let obj = ComplementRatioObjective { comp: map.complementary(), alpha: a };
    let out = optimize_over_states(&obj, map.in_dim(), Sense::Minimize, cfg)?;
    Ok(out.value.exp())
}

/// Log of `‖(id ⊗ M)(|v⟩⟨v|)‖_α / ‖tr_A |v⟩⟨v|‖_α` for `|v⟩ = (V ⊗ 1)|Φ⟩`.
///
/// Then `(id ⊗ M)(|v⟩⟨v|) = (V ⊗ 1) J (V† ⊗ 1)` and `tr_A |v⟩⟨v|` has the
/// spectrum of `V†V`.
fn pure_ratio(j: &Matrix, v: &Matrix, db: usize, alpha: f64) -> f64 {
    let k = v.kronecker(&Matrix::identity(db, db));
    let num = &k * j * k.adjoint();
    let den = v.adjoint() * v;
    let (tn, _) = trace_power(&num, alpha);
    let (td, _) = trace_power(&den, alpha);
    if tn > 0.0 && td > 0.0 {
        (tn.ln() - td.ln()) / alpha
    } else {
        f64::INFINITY
    }
}

/// The pure-state ratio formula, minimized by Nelder–Mead over `C^{d·d}`.
///
/// Restart 0 starts at the maximally entangled vector; the others at
/// Gaussian vectors from the seed stream. Returns the norm value.
pub fn cb_quasinorm_pure_ratio(map: &CPMap, alpha: RenyiOrder, cfg: &OptimizerConfig) -> Result<f64> {
    let a = alpha.quasi()?;
    cfg.validate()?;
    let d = map.in_dim();
    let db = map.out_dim();
    let j = map.choi().matrix().clone();
    let n = d * d;
    let starts: Vec<DVector<f64>> = (0..cfg.restarts)
        .map(|r| {
            let v: Matrix = if r == 0 {
                let phi = max_entangled_vector(d);
                Matrix::from_fn(d, d, |i, k| phi[i * d + k])
            } else {
                complex_gaussian(d, d, &mut ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(r as u64)))
            };
            DVector::from_fn(2 * n, |k, _| {
                let z = v[((k % n) / d, (k % n) % d)];
                if k < n {
                    z.re
                } else {
                    z.im
                }
            })
        })
        .collect();
    let values: Vec<f64> = starts
        .into_par_iter()
        .map(|x0| {
            let mut f = |x: &DVector<f64>| {
                let v = Matrix::from_fn(d, d, |i, k| C64::new(x[i * d + k], x[n + i * d + k]));
                pure_ratio(&j, &v, db, a)
            };
            nelder_mead(&mut f, x0, 0.1, cfg.max_evals, cfg.f_tol, cfg.x_tol).f
        })
        .collect();
    let best = values.iter().copied().fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Err(Error::InfeasibleObjective);
    }
    Ok(best.exp())
}

/// The `α ≥ 1` norm `max_ρ ‖(ρ^{1/(2α)} ⊗ 1) J (ρ^{1/(2α)} ⊗ 1)‖_α`.
pub fn cb_norm_geq1(map: &CPMap, alpha: f64, cfg: &OptimizerConfig) -> Result<f64> {
    if !(alpha >= 1.0) || !alpha.is_finite() {
        return Err(Error::WrongRegime { alpha, expected: "[1, inf)" });
    }
    let obj = choi_objective(map, alpha, None);
    let out = optimize_over_states(&obj, map.in_dim(), Sense::Maximize, cfg)?;
    Ok(norm_from_log(out.value, alpha))
}

#[derive(Clone, Debug)]
pub struct MultiplicativityGap {
    /// `log₂‖M1⊗M2‖ − log₂‖M1‖ − log₂‖M2‖`.
    pub gap: f64,
    pub joint: f64,
    pub first: f64,
    pub second: f64,
    pub converged: bool,
}

pub(crate) fn check_cap(d1: usize, d2: usize) -> Result<()> {
    let dim = d1 * d2;
    if dim > DIMENSION_CAP {
        return Err(Error::DimensionCap { dim, cap: DIMENSION_CAP });
    }
    Ok(())
}

pub fn multiplicativity_gap(m1: &CPMap, m2: &CPMap, alpha: RenyiOrder, cfg: &OptimizerConfig) -> Result<MultiplicativityGap> {
    alpha.quasi()?;
    check_cap(m1.in_dim(), m2.in_dim())?;
    let (first, o1) = cb_quasinorm_primal_value(m1, alpha, cfg)?;
    let (second, o2) = cb_quasinorm_primal_value(m2, alpha, cfg)?;
    let (joint, o12) = cb_quasinorm_primal_value(&tensor_map(m1, m2), alpha, cfg)?;
    Ok(MultiplicativityGap {
        gap: joint.log2() - first.log2() - second.log2(),
        joint,
        first,
        second,
        converged: o1.converged && o2.converged && o12.converged,
    })
}
