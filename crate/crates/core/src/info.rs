//! Channel-level quantities: mutual information `I(N)` with its optimal
//! inputs and output center, the Rényi information `I_α(N)` through both
//! minimax orders, channel dispersions, and the additivity and structure
//! checks built on them.
//!
//! An input state `ρ` of a channel `N` is lifted to the output of a
//! purification, `ρ_AB = (√ρ̄ ⊗ 1) J (√ρ̄ ⊗ 1)` with `J` the Choi operator and
//! `ρ̄` the complex conjugate of `ρ`. The reference system `A` comes first,
//! `ρ_A = ρ̄` and `ρ_B = N(ρ)`.

use crate::cbnorm::check_cap;
use crate::channel::{tensor_map, CPMap};
use crate::entropy::{
    divergence_from_log, entropy_of_matrix, relative_entropy_variance, renyi_mi_objective, RenyiOrder,
};
use crate::error::{Error, Result};
use crate::operator::{
    c, eigh_matrix, log2_eig, partial_trace, permute_subsystems, power_derivative, psd_power_eig, ptrace_first,
    ptrace_second, purify, tensor, trace_distance, DensityMatrix, HermitianOperator, Matrix, SystemLayout,
};
use crate::optimize::{optimize_over_states, optimize_over_states_from, OptimizationOutcome, OptimizerConfig, Sense, StateObjective};
use crate::sandwich::{sandwich, SandwichObjective, Side};
use std::cell::RefCell;

/// Restart results within this many bits of the best value count as optimal.
pub const DELTA_I: f64 = 1e-6;
/// Optimal inputs closer than this in trace distance are merged.
pub const DEDUP_DISTANCE: f64 = 1e-4;
/// Minimum restart count for dispersion runs.
pub const DISPERSION_RESTARTS: usize = 32;

fn require_tp(n: &CPMap) -> Result<()> {
    if n.is_trace_preserving() {
        Ok(())
    } else {
        Err(Error::NotTracePreserving)
    }
}

/// Complex conjugate (equivalently transpose) of a state.
fn conjugate(rho: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::from_psd_unnormalized(&rho.matrix().map(|z| z.conj()))
}

/// `ρ_AB = (√ρ̄ ⊗ 1) J (√ρ̄ ⊗ 1)`.
pub fn output_state(n: &CPMap, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != n.in_dim() {
        return Err(Error::DimensionMismatch(format!("input has dimension {}, map expects {}", rho.dim(), n.in_dim())));
    }
    let sq = psd_power_eig(&conjugate(rho).op().eigh(), 0.5);
    let k = tensor(&sq, &Matrix::identity(n.out_dim(), n.out_dim()));
    Ok(DensityMatrix::from_psd_unnormalized(&(&k * n.choi().matrix() * &k)))
}

/// `I(A:B)` of the output state for input `ρ`, computed as
/// `H(ρ) + H(N(ρ)) − H(N^c(ρ))`.
#[derive(Clone)]
struct MutualInfoObjective {
    n: CPMap,
    nc: CPMap,
}

impl MutualInfoObjective {
    fn new(n: &CPMap) -> Self {
        Self { n: n.clone(), nc: n.complementary() }
    }
}

impl StateObjective for MutualInfoObjective {
    fn value(&self, rho: &DensityMatrix) -> f64 {
        let r = rho.matrix();
        entropy_of_matrix(r) + entropy_of_matrix(&self.n.apply_unchecked(r)) - entropy_of_matrix(&self.nc.apply_unchecked(r))
    }

    fn has_gradient(&self) -> bool {
        true
    }

    /// `−log₂ρ − N†(log₂ N(ρ)) + N^c†(log₂ N^c(ρ))`, up to a multiple of the
    /// identity (which the state chart ignores).
    fn value_and_gradient(&self, rho: &DensityMatrix) -> (f64, Matrix) {
        let r = rho.matrix();
        let (er, eb, ee) = (
            eigh_matrix(r),
            eigh_matrix(&self.n.apply_unchecked(r)),
            eigh_matrix(&self.nc.apply_unchecked(r)),
        );
        let h = |e: &crate::operator::Eigh| crate::entropy::entropy_of_eigenvalues(e).max(0.0);
        let value = h(&er) + h(&eb) - h(&ee);
        let g = -log2_eig(&er) - self.n.apply_adjoint(&log2_eig(&eb)) + self.nc.apply_adjoint(&log2_eig(&ee));
        (value, g)
    }
}

/// `I(A:B)` for the output state of input `ρ`.
pub fn mutual_information_at(n: &CPMap, rho: &DensityMatrix) -> Result<f64> {
    require_tp(n)?;
    if rho.dim() != n.in_dim() {
        return Err(Error::DimensionMismatch(format!("input has dimension {}, map expects {}", rho.dim(), n.in_dim())));
    }
    Ok(MutualInfoObjective::new(n).value(rho))
}

#[derive(Clone, Debug)]
pub struct ChannelInfoResult {
    /// `I(N)` in bits.
    pub value: f64,
    /// Deduplicated inputs within `DELTA_I` of the best value, best first.
    pub optimizer_inputs: Vec<DensityMatrix>,
    /// `N(ρ)` for the best input.
    pub center: DensityMatrix,
    pub outcome: OptimizationOutcome,
}

/// `I(N) = max_ρ I(A:B)` over input states; concave in `ρ`.
pub fn channel_mutual_information(n: &CPMap, cfg: &OptimizerConfig) -> Result<ChannelInfoResult> {
    require_tp(n)?;
    let obj = MutualInfoObjective::new(n);
    let outcome = optimize_over_states(&obj, n.in_dim(), Sense::Maximize, cfg)?;
    let mut ranked: Vec<(f64, &DensityMatrix)> = outcome
        .per_restart_values
        .iter()
        .copied()
        .zip(&outcome.per_restart_arguments)
        .filter(|(v, _)| v.is_finite() && *v >= outcome.value - DELTA_I)
        .collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut optimizer_inputs: Vec<DensityMatrix> = Vec::new();
    for (_, rho) in ranked {
        let duplicate = optimizer_inputs
            .iter()
            .any(|kept| trace_distance(kept, rho).map(|t| t <= DEDUP_DISTANCE).unwrap_or(false));
        if !duplicate {
            optimizer_inputs.push(rho.clone());
        }
    }
    let center = n.apply_state(&outcome.argument)?;
    Ok(ChannelInfoResult { value: outcome.value, optimizer_inputs, center, outcome })
}

/// Largest trace distance between `N(ρ)` for a listed optimal input and the center.
pub fn divergence_center_check(n: &CPMap, result: &ChannelInfoResult) -> Result<f64> {
    if result.optimizer_inputs.is_empty() {
        return Err(Error::EmptyOptimizerSet);
    }
    let mut worst: f64 = 0.0;
    for rho in &result.optimizer_inputs {
        worst = worst.max(trace_distance(&n.apply_state(rho)?, &result.center)?);
    }
    Ok(worst)
}

#[derive(Clone, Debug)]
pub struct RenyiInformation {
    /// `I_α(N)` in bits.
    pub value: f64,
    pub input: DensityMatrix,
    pub reference: DensityMatrix,
    pub outcome: OptimizationOutcome,
}

/// Outer objective of a nested `T` optimization: for the outer state `X`,
/// solve the inner problem over the other factor and report `ln T*`.
/// The outer gradient follows from Danskin's theorem at the inner optimizer.
/// Each restart owns a clone and warm-starts its inner solves.
#[derive(Clone)]
struct NestedObjective {
    j: Matrix,
    alpha: f64,
    outer: Side,
    outer_dim: usize,
    inner_dim: usize,
    inner_cfg: OptimizerConfig,
    warm: RefCell<Option<DensityMatrix>>,
}

impl NestedObjective {
    fn new(n: &CPMap, alpha: f64, outer: Side, cfg: &OptimizerConfig) -> Self {
        let (din, dout) = (n.in_dim(), n.out_dim());
        let (outer_dim, inner_dim) = match outer {
            Side::First => (din, dout),
            Side::Second => (dout, din),
        };
        Self {
            j: n.choi().matrix().clone(),
            alpha,
            outer,
            outer_dim,
            inner_dim,
            inner_cfg: cfg.inner(),
            warm: RefCell::new(None),
        }
    }

    fn power(&self, side: Side) -> f64 {
        match side {
            Side::First => 1.0 / (2.0 * self.alpha),
            Side::Second => (1.0 - self.alpha) / (2.0 * self.alpha),
        }
    }

    /// Inner sense: over `σ` (second factor) `T` is maximized, over `ρ` minimized.
    fn inner_sense(&self) -> Sense {
        match self.outer {
            Side::First => Sense::Maximize,
            Side::Second => Sense::Minimize,
        }
    }

    fn outer_sense(&self) -> Sense {
        match self.outer {
            Side::First => Sense::Minimize,
            Side::Second => Sense::Maximize,
        }
    }

    fn solve_inner(&self, x: &DensityMatrix) -> Option<(f64, DensityMatrix, crate::operator::Eigh, Matrix)> {
        let e = x.op().eigh();
        let xp = psd_power_eig(&e, self.power(self.outer));
        let inner = SandwichObjective {
            j: self.j.clone(),
            fixed: xp.clone(),
            varying: self.outer.other(),
            power: self.power(self.outer.other()),
            alpha: self.alpha,
        };
        let warm = self.warm.borrow().clone();
        let out = optimize_over_states_from(&inner, self.inner_dim, self.inner_sense(), &self.inner_cfg, warm.as_ref()).ok()?;
        *self.warm.borrow_mut() = Some(out.argument.clone());
        Some((out.value, out.argument, e, xp))
    }
}

impl StateObjective for NestedObjective {
    fn value(&self, x: &DensityMatrix) -> f64 {
        match self.solve_inner(x) {
            Some((v, ..)) => v,
            None => f64::NAN,
        }
    }

    fn has_gradient(&self) -> bool {
        true
    }

    fn value_and_gradient(&self, x: &DensityMatrix) -> (f64, Matrix) {
        let Some((v, y, e, xp)) = self.solve_inner(x) else {
            return (f64::NAN, Matrix::zeros(x.dim(), x.dim()));
        };
        let yp = psd_power_eig(&y.op().eigh(), self.power(self.outer.other()));
        let first = self.outer == Side::First;
        let (r, s) = if first { (&xp, &yp) } else { (&yp, &xp) };
        let ev = sandwich(&self.j, r, s, self.alpha, first, !first);
        if !(ev.t > 0.0) {
            return (f64::NAN, Matrix::zeros(x.dim(), x.dim()));
        }
        let g = if first { ev.grad_r } else { ev.grad_s }.expect("requested");
        (v, power_derivative(&e, self.power(self.outer), &g) * c(1.0 / ev.t))
    }
}

fn renyi_information(n: &CPMap, alpha: RenyiOrder, cfg: &OptimizerConfig, outer: Side) -> Result<RenyiInformation> {
    let a = alpha.quasi()?;
    require_tp(n)?;
    let obj = NestedObjective::new(n, a, outer, cfg);
    let outcome = optimize_over_states(&obj, obj.outer_dim, obj.outer_sense(), cfg)?;
    let solved = obj.clone();
    *solved.warm.borrow_mut() = None;
    let (_, inner_arg, ..) = solved.solve_inner(&outcome.argument).ok_or(Error::InfeasibleObjective)?;
    // The optimized variable is the reference marginal `ρ̄`.
    let (input, reference) = match outer {
        Side::First => (conjugate(&outcome.argument), inner_arg),
        Side::Second => (conjugate(&inner_arg), outcome.argument.clone()),
    };
    Ok(RenyiInformation { value: divergence_from_log(outcome.value, a), input, reference, outcome })
}

/// `I_α(N) = max_ρ min_σ D_α(ρ_AB ‖ ρ_A ⊗ σ_B)`: an outer minimization of
/// `max_σ T` over inputs `ρ`.
pub fn renyi_channel_information_primal(n: &CPMap, alpha: RenyiOrder, cfg: &OptimizerConfig) -> Result<RenyiInformation> {
    renyi_information(n, alpha, cfg, Side::First)
}

/// `I_α(N) = min_σ (α/(α−1)) log₂ ‖Γ_σ ∘ N‖_{cb,1→α}`: an outer
/// maximization over `σ` of the cb quasi-norm objective `min_ρ T`.
pub fn renyi_channel_information_dual(n: &CPMap, alpha: RenyiOrder, cfg: &OptimizerConfig) -> Result<RenyiInformation> {
    renyi_information(n, alpha, cfg, Side::Second)
}

/// `min_σ D_α(ρ_AB ‖ ρ_A ⊗ σ)` for the output state of a fixed input `ρ`.
pub fn renyi_mutual_information_at(n: &CPMap, rho: &DensityMatrix, alpha: RenyiOrder, cfg: &OptimizerConfig) -> Result<f64> {
    let a = alpha.quasi()?;
    let rho_ab = output_state(n, rho)?;
    let obj = renyi_mi_objective(rho_ab.matrix(), n.in_dim(), n.out_dim(), alpha);
    let out = optimize_over_states(&obj, n.out_dim(), Sense::Maximize, cfg)?;
    Ok(divergence_from_log(out.value, a))
}

#[derive(Clone, Debug)]
pub struct AdditivityGap {
    /// `joint − first − second`.
    pub gap: f64,
    pub joint: f64,
    pub first: f64,
    pub second: f64,
}

impl AdditivityGap {
    fn new(joint: f64, first: f64, second: f64) -> Self {
        Self { gap: joint - first - second, joint, first, second }
    }
}

/// `I_α(N1⊗N2) − I_α(N1) − I_α(N2)` through the primal route, whose outer
/// problem is convex.
pub fn renyi_additivity_gap(n1: &CPMap, n2: &CPMap, alpha: RenyiOrder, cfg: &OptimizerConfig) -> Result<AdditivityGap> {
    alpha.quasi()?;
    check_cap(n1.in_dim(), n2.in_dim())?;
    let first = renyi_channel_information_primal(n1, alpha, cfg)?.value;
    let second = renyi_channel_information_primal(n2, alpha, cfg)?.value;
    let joint = renyi_channel_information_primal(&tensor_map(n1, n2), alpha, cfg)?.value;
    Ok(AdditivityGap::new(joint, first, second))
}

/// `I(N1⊗N2) − I(N1) − I(N2)`.
pub fn mi_additivity_gap(n1: &CPMap, n2: &CPMap, cfg: &OptimizerConfig) -> Result<AdditivityGap> {
    check_cap(n1.in_dim(), n2.in_dim())?;
    let first = channel_mutual_information(n1, cfg)?.value;
    let second = channel_mutual_information(n2, cfg)?.value;
    let joint = channel_mutual_information(&tensor_map(n1, n2), cfg)?.value;
    Ok(AdditivityGap::new(joint, first, second))
}

/// `V(ρ_AB ‖ ρ_A ⊗ ρ_B)` for the output state of input `ρ`.
pub fn dispersion_at(n: &CPMap, rho: &DensityMatrix) -> Result<f64> {
    let rho_ab = output_state(n, rho)?;
    let (da, db) = (n.in_dim(), n.out_dim());
    let m = rho_ab.matrix();
    let product = tensor(&ptrace_second(m, da, db), &ptrace_first(m, da, db));
    relative_entropy_variance(&rho_ab, &HermitianOperator::hermitize(product))
}

#[derive(Clone, Debug)]
pub struct DispersionResult {
    pub v_max: f64,
    pub v_min: f64,
    /// `(optimal input, V)` for every explored optimal input.
    pub witnesses: Vec<(DensityMatrix, f64)>,
    pub info: ChannelInfoResult,
}

/// `V_max` and `V_min` over the explored optimal inputs of `I(N)`, with at
/// least `DISPERSION_RESTARTS` restarts.
pub fn channel_dispersion(n: &CPMap, cfg: &OptimizerConfig) -> Result<DispersionResult> {
    let cfg = cfg.clone().with_restarts(cfg.restarts.max(DISPERSION_RESTARTS));
    let info = channel_mutual_information(n, &cfg)?;
    let witnesses = info
        .optimizer_inputs
        .iter()
        .map(|rho| dispersion_at(n, rho).map(|v| (rho.clone(), v)))
        .collect::<Result<Vec<_>>>()?;
    let v_max = witnesses.iter().map(|w| w.1).fold(f64::NEG_INFINITY, f64::max);
    let v_min = witnesses.iter().map(|w| w.1).fold(f64::INFINITY, f64::min);
    if witnesses.is_empty() {
        return Err(Error::EmptyOptimizerSet);
    }
    Ok(DispersionResult { v_max, v_min, witnesses, info })
}

#[derive(Clone, Debug)]
pub struct DispersionGap {
    pub gap_max: f64,
    pub gap_min: f64,
    pub joint: (f64, f64),
    pub first: (f64, f64),
    pub second: (f64, f64),
}

/// `V_max(N1⊗N2) − V_max(N1) − V_max(N2)` and the same for `V_min`.
pub fn dispersion_additivity_gap(n1: &CPMap, n2: &CPMap, cfg: &OptimizerConfig) -> Result<DispersionGap> {
    check_cap(n1.in_dim(), n2.in_dim())?;
    let a = channel_dispersion(n1, cfg)?;
    let b = channel_dispersion(n2, cfg)?;
    let ab = channel_dispersion(&tensor_map(n1, n2), cfg)?;
    Ok(DispersionGap {
        gap_max: ab.v_max - a.v_max - b.v_max,
        gap_min: ab.v_min - a.v_min - b.v_min,
        joint: (ab.v_max, ab.v_min),
        first: (a.v_max, a.v_min),
        second: (b.v_max, b.v_min),
    })
}

#[derive(Clone, Debug)]
pub struct StructureCheck {
    /// `I(B1E1 : B2 | E2)`.
    pub cmi_1: f64,
    /// `I(B1 : E2 | E1)`.
    pub cmi_2: f64,
    /// `I(N1⊗N2)` minus the mutual information at the supplied input.
    pub optimality_deficit: f64,
    /// Whether the deficit is within `DELTA_I`; the CMIs are only predicted
    /// to vanish when it is.
    pub near_optimal: bool,
}

/// The state on `B1 E1 B2 E2` obtained by passing a purification of `ρ`
/// (on `A1' A2'`) through both Stinespring isometries and discarding the
/// purifying system.
pub fn four_party_state(n1: &CPMap, n2: &CPMap, rho: &DensityMatrix) -> Result<(Matrix, SystemLayout)> {
    let (d1, d2) = (n1.in_dim(), n2.in_dim());
    if rho.dim() != d1 * d2 {
        return Err(Error::DimensionMismatch(format!("input has dimension {}, expected {}", rho.dim(), d1 * d2)));
    }
    let (u1, u2) = (n1.stinespring(), n2.stinespring());
    let psi = purify(rho).projector();
    let u = tensor(&tensor(u1.map_matrix(), u2.map_matrix()), &Matrix::identity(d1 * d2, d1 * d2));
    let full = &u * psi * u.adjoint();
    let (b1, e1, b2, e2) = (n1.out_dim(), u1.env_dim(), n2.out_dim(), u2.env_dim());
    let layout = SystemLayout::new(vec![b1, e1, b2, e2, d1 * d2])?;
    let kept = partial_trace(&full, &layout, &[0, 1, 2, 3])?;
    Ok((kept, SystemLayout::new(vec![b1, e1, b2, e2])?))
}

/// `ρ1 ⊗ ρ2` from the best inputs of `I(N1)` and `I(N2)`; by additivity of
/// the channel mutual information this optimizes `I(N1⊗N2)`.
pub fn product_optimizer(n1: &CPMap, n2: &CPMap, cfg: &OptimizerConfig) -> Result<DensityMatrix> {
    let a = channel_mutual_information(n1, cfg)?.outcome.argument;
    let b = channel_mutual_information(n2, cfg)?.outcome.argument;
    Ok(DensityMatrix::from_psd_unnormalized(&tensor(a.matrix(), b.matrix())))
}

fn cmi(state: &Matrix, dims: [usize; 3]) -> Result<f64> {
    let layout = SystemLayout::new(dims.to_vec())?;
    let h = |keep: &[usize]| partial_trace(state, &layout, keep).map(|m| entropy_of_matrix(&m));
    Ok(h(&[0, 1])? + h(&[1, 2])? - entropy_of_matrix(state) - h(&[1])?)
}

/// The two conditional mutual informations that vanish at optimal inputs of
/// `I(N1⊗N2)`.
pub fn structure_cmi_check(n1: &CPMap, n2: &CPMap, input: &DensityMatrix, cfg: &OptimizerConfig) -> Result<StructureCheck> {
    check_cap(n1.in_dim(), n2.in_dim())?;
    let joint = tensor_map(n1, n2);
    let best = channel_mutual_information(&joint, cfg)?.value;
    let deficit = best - mutual_information_at(&joint, input)?;
    let (state, layout) = four_party_state(n1, n2, input)?;
    let [b1, e1, b2, e2] = [0, 1, 2, 3].map(|k| layout.factor_dims()[k]);
    // B1 E1 | E2 | B2
    let reordered = permute_subsystems(&state, &layout, &[0, 1, 3, 2])?;
    let cmi_1 = cmi(&reordered, [b1 * e1, e2, b2])?;
    // B1 | E1 | E2, with B2 discarded
    let three = partial_trace(&state, &layout, &[0, 1, 3])?;
    let cmi_2 = cmi(&three, [b1, e1, e2])?;
    Ok(StructureCheck { cmi_1, cmi_2, optimality_deficit: deficit, near_optimal: deficit <= DELTA_I })
}
