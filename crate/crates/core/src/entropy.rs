//! State-level information measures, all in bits.

use crate::error::{Error, Result};
use crate::operator::{
    eigh_matrix, log2_eig, partial_trace, pseudo_power_eig, ptrace_second,
    trace_re, DensityMatrix, Eigh, HermitianOperator, Matrix, SystemLayout, CLIP_TOL,
};
use crate::optimize::{optimize_over_states, OptimizationOutcome, OptimizerConfig, Sense};
use crate::sandwich::{SandwichObjective, Side};
use std::cmp::Ordering;
use std::fmt;

/// Support overlap `tr(P_ρ P_σ)` at or below this counts as orthogonal.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;
/// Weight of `ρ` outside `supp σ` tolerated by the inclusion test.
pub const SUPPORT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// `α ∈ [1/2, 1)`.
    Quasi,
    /// `α > 1`.
    Standard,
}

/// A validated Rényi order `α ∈ [1/2, 1) ∪ (1, ∞)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenyiOrder {
    alpha: f64,
    regime: Regime,
}

impl RenyiOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        let regime = if (0.5..1.0).contains(&alpha) {
            Regime::Quasi
        } else if alpha > 1.0 && alpha.is_finite() {
            Regime::Standard
        } else {
            return Err(Error::InvalidOrder(alpha));
        };
        Ok(Self { alpha, regime })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// `α`, provided it lies in `[1/2, 1)`.
    pub fn quasi(&self) -> Result<f64> {
        match self.regime {
            Regime::Quasi => Ok(self.alpha),
            Regime::Standard => Err(Error::WrongRegime { alpha: self.alpha, expected: "[1/2, 1)" }),
        }
    }

    /// The sandwich exponent `(1−α)/(2α)`.
    pub fn beta(&self) -> f64 {
        (1.0 - self.alpha) / (2.0 * self.alpha)
    }
}

impl fmt::Display for RenyiOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.alpha)
    }
}

/// A divergence that may be `+∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DivergenceValue {
    Finite(f64),
    PlusInfinity,
}

impl DivergenceValue {
    pub fn is_finite(&self) -> bool {
        matches!(self, Self::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            Self::Finite(v) => Some(v),
            Self::PlusInfinity => None,
        }
    }

    /// Panics on `+∞`; for callers that have already checked supports.
    pub fn expect_finite(&self) -> f64 {
        self.finite().expect("divergence is infinite")
    }
}

impl PartialOrd for DivergenceValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Self::Finite(a), Self::Finite(b)) => a.partial_cmp(b),
            (Self::Finite(_), Self::PlusInfinity) => Some(Ordering::Less),
            (Self::PlusInfinity, Self::Finite(_)) => Some(Ordering::Greater),
            (Self::PlusInfinity, Self::PlusInfinity) => Some(Ordering::Equal),
        }
    }
}

impl fmt::Display for DivergenceValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(v) => write!(f, "{v}"),
            Self::PlusInfinity => write!(f, "+inf"),
        }
    }
}

/// `−Σ λ log₂ λ` over the eigenvalues above the support threshold.
pub(crate) fn entropy_of_eigenvalues(e: &Eigh) -> f64 {
    let thr = e.threshold();
    -e.values.iter().filter(|&&x| x > thr).map(|&x| x * x.log2()).sum::<f64>()
}

pub(crate) fn entropy_of_matrix(m: &Matrix) -> f64 {
    entropy_of_eigenvalues(&eigh_matrix(m)).max(0.0)
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of_matrix(rho.matrix())
}

fn check_pair(rho: &DensityMatrix, sigma: &HermitianOperator) -> Result<Eigh> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state has dimension {}, reference has {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let e = sigma.eigh();
    if e.min() < -CLIP_TOL {
        return Err(Error::NotPositive(e.min()));
    }
    Ok(e)
}

/// `tr((1 − P_σ) ρ) ≤ SUPPORT_TOL`.
fn support_contained(rho: &DensityMatrix, sigma_eig: &Eigh) -> bool {
    let outside = Matrix::identity(rho.dim(), rho.dim()) - sigma_eig.support_projector();
    trace_re(&(outside * rho.matrix())) <= SUPPORT_TOL
}

/// `D(ρ‖σ) = tr ρ(log₂ρ − log₂σ)`, `+∞` unless `supp ρ ⊆ supp σ`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &HermitianOperator) -> Result<DivergenceValue> {
    let es = check_pair(rho, sigma)?;
    if !support_contained(rho, &es) {
        return Ok(DivergenceValue::PlusInfinity);
    }
    let er = rho.op().eigh();
    let diff = log2_eig(&er) - log2_eig(&es);
    Ok(DivergenceValue::Finite(trace_re(&(rho.matrix() * diff))))
}

/// `D_α(ρ‖σ) = log₂ tr[(σ^β ρ σ^β)^α] / (α − 1)` with `β = (1−α)/(2α)`.
///
/// For `α < 1` the value is `+∞` exactly when the supports are orthogonal.
/// For `α > 1` it is `+∞` unless `supp ρ ⊆ supp σ`, and the negative power
/// of `σ` is taken on its support.
pub fn sandwiched_renyi(rho: &DensityMatrix, sigma: &HermitianOperator, alpha: RenyiOrder) -> Result<DivergenceValue> {
    let es = check_pair(rho, sigma)?;
    let a = alpha.alpha();
    let s_beta = match alpha.regime() {
        Regime::Quasi => {
            let er = rho.op().eigh();
            let overlap = trace_re(&(er.support_projector() * es.support_projector()));
            if overlap <= ORTHOGONALITY_TOL {
                return Ok(DivergenceValue::PlusInfinity);
            }
            pseudo_power_eig(&es, alpha.beta())
        }
        Regime::Standard => {
            if !support_contained(rho, &es) {
                return Ok(DivergenceValue::PlusInfinity);
            }
            pseudo_power_eig(&es, alpha.beta())
        }
    };
    let inner = eigh_matrix(&(&s_beta * rho.matrix() * &s_beta));
    let thr = inner.threshold();
    let q: f64 = inner.values.iter().filter(|&&x| x > thr).map(|x| x.powf(a)).sum();
    Ok(DivergenceValue::Finite(q.log2() / (a - 1.0)))
}

/// `V(ρ‖σ) = tr ρ(log₂ρ − log₂σ)² − D(ρ‖σ)²`; round-off negatives above
/// `−1e-9` are reported as 0.
pub fn relative_entropy_variance(rho: &DensityMatrix, sigma: &HermitianOperator) -> Result<f64> {
    let es = check_pair(rho, sigma)?;
    if !support_contained(rho, &es) {
        return Err(Error::SupportViolation);
    }
    let er = rho.op().eigh();
    let diff = log2_eig(&er) - log2_eig(&es);
    let r = rho.matrix();
    let d = trace_re(&(r * &diff));
    let v = trace_re(&(r * &diff * &diff)) - d * d;
    Ok(if v < 0.0 && v > -1e-9 { 0.0 } else { v })
}

fn require_factors(rho: &DensityMatrix, layout: &SystemLayout, n: usize) -> Result<()> {
    layout.check(rho.dim())?;
    if layout.factor_dims().len() != n {
        return Err(Error::DimensionMismatch(format!(
            "expected a {n}-party layout, got {:?}",
            layout.factor_dims()
        )));
    }
    Ok(())
}

/// `I(A:B) = H(A) + H(B) − H(AB)` for a two-factor layout.
pub fn mutual_information(rho_ab: &DensityMatrix, layout: &SystemLayout) -> Result<f64> {
    require_factors(rho_ab, layout, 2)?;
    let r = rho_ab.matrix();
    let ha = entropy_of_matrix(&partial_trace(r, layout, &[0])?);
    let hb = entropy_of_matrix(&partial_trace(r, layout, &[1])?);
    Ok(ha + hb - von_neumann_entropy(rho_ab))
}

/// `I(X:Z|Y) = H(XY) + H(YZ) − H(XYZ) − H(Y)` for a layout `X ⊗ Y ⊗ Z`.
///
/// The conditioning system is the middle factor. The variant that subtracts
/// `H(Z)` instead of `H(Y)` is not a conditional mutual information and can
/// be negative; it is not provided.
pub fn conditional_mutual_information(rho_xyz: &DensityMatrix, layout: &SystemLayout) -> Result<f64> {
    require_factors(rho_xyz, layout, 3)?;
    let r = rho_xyz.matrix();
    let h = |keep: &[usize]| partial_trace(r, layout, keep).map(|m| entropy_of_matrix(&m));
    Ok(h(&[0, 1])? + h(&[1, 2])? - von_neumann_entropy(rho_xyz) - h(&[1])?)
}

#[derive(Clone, Debug)]
pub struct RenyiMutualInformation {
    /// `min_σ D_α(ρ_AB ‖ ρ_A ⊗ σ_B)` in bits.
    pub value: f64,
    pub sigma: DensityMatrix,
    pub outcome: OptimizationOutcome,
}

/// `σ ↦ ln tr[((ρ_A^β ⊗ σ^β) ρ_AB (ρ_A^β ⊗ σ^β))^α]`, to be maximized.
pub(crate) fn renyi_mi_objective(rho_ab: &Matrix, da: usize, db: usize, alpha: RenyiOrder) -> SandwichObjective {
    let rho_a = ptrace_second(rho_ab, da, db);
    SandwichObjective {
        j: rho_ab.clone(),
        fixed: pseudo_power_eig(&eigh_matrix(&rho_a), alpha.beta()),
        varying: Side::Second,
        power: alpha.beta(),
        alpha: alpha.alpha(),
    }
}

/// `D_α` in bits from `ln T`.
pub(crate) fn divergence_from_log(ln_t: f64, alpha: f64) -> f64 {
    ln_t / std::f64::consts::LN_2 / (alpha - 1.0)
}

/// `min_{σ_B} D_α(ρ_AB ‖ ρ_A ⊗ σ_B)` for `α ∈ [1/2, 1)`.
///
/// For these orders `σ ↦ tr[...]^α` is concave, so all restarts should agree.
pub fn renyi_mutual_information(
    rho_ab: &DensityMatrix,
    layout: &SystemLayout,
    alpha: RenyiOrder,
    cfg: &OptimizerConfig,
) -> Result<RenyiMutualInformation> {
    alpha.quasi()?;
    require_factors(rho_ab, layout, 2)?;
    let (da, db) = (layout.factor_dims()[0], layout.factor_dims()[1]);
    let obj = renyi_mi_objective(rho_ab.matrix(), da, db, alpha);
    let outcome = optimize_over_states(&obj, db, Sense::Maximize, cfg)?;
    Ok(RenyiMutualInformation {
        value: divergence_from_log(outcome.value, alpha.alpha()),
        sigma: outcome.argument.clone(),
        outcome,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::random_channel;
    use crate::operator::{max_entangled, random_density, random_unitary, tensor, trace_distance};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bell() -> DensityMatrix {
        DensityMatrix::from_psd_unnormalized(max_entangled(2).matrix())
    }

    fn binary_entropy(p: f64) -> f64 {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }

    #[test]
    fn renyi_order_validation() {
        assert!(RenyiOrder::new(0.5).is_ok());
        assert_eq!(RenyiOrder::new(2.0).unwrap().regime(), Regime::Standard);
        for bad in [0.4, 1.0, f64::NAN, f64::INFINITY, -1.0] {
            assert!(RenyiOrder::new(bad).is_err());
        }
        assert!(RenyiOrder::new(3.0).unwrap().quasi().is_err());
    }

    #[test]
    fn entropy_examples() {
        assert!(von_neumann_entropy(&DensityMatrix::basis(2, 1)).abs() < 1e-12);
        assert!((von_neumann_entropy(&DensityMatrix::maximally_mixed(2)) - 1.0).abs() < 1e-12);
        let rho = DensityMatrix::diag(&[0.75, 0.25]).unwrap();
        assert!((von_neumann_entropy(&rho) - binary_entropy(0.25)).abs() < 1e-12);
        assert!((von_neumann_entropy(&rho) - 0.811278).abs() < 1e-6);
    }

    #[test]
    fn relative_entropy_examples() {
        let rho = DensityMatrix::diag(&[0.75, 0.25]).unwrap();
        assert_eq!(relative_entropy(&rho, rho.op()).unwrap(), DivergenceValue::Finite(0.0));
        let kl = 0.75 * (0.75f64 / 0.5).log2() + 0.25 * (0.25f64 / 0.5).log2();
        let d = relative_entropy(&rho, DensityMatrix::maximally_mixed(2).op()).unwrap().expect_finite();
        assert!((d - kl).abs() < 1e-12);
        assert!((d - 0.188722).abs() < 1e-6);
        assert_eq!(
            relative_entropy(&DensityMatrix::basis(2, 0), DensityMatrix::basis(2, 1).op()).unwrap(),
            DivergenceValue::PlusInfinity
        );
    }

    #[test]
    fn sandwiched_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random_density(3, 3, &mut rng).unwrap();
        for a in [0.5, 0.7, 0.99, 1.5, 3.0] {
            let d = sandwiched_renyi(&rho, rho.op(), RenyiOrder::new(a).unwrap()).unwrap().expect_finite();
            assert!(d.abs() < 1e-10, "alpha {a}: {d}");
        }
        // tr(σ^{1/2} ρ σ^{1/2})^{1/2} = 2^{-1/2}, and log₂ of it divided by -1/2 is 1.
        let oracle = (0.5f64).sqrt().log2() / (0.5 - 1.0);
        let d = sandwiched_renyi(&DensityMatrix::basis(2, 0), DensityMatrix::maximally_mixed(2).op(), RenyiOrder::new(0.5).unwrap())
            .unwrap()
            .expect_finite();
        assert!((d - oracle).abs() < 1e-12 && (d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sandwiched_support_policies() {
        let p0 = DensityMatrix::basis(2, 0);
        let p1 = DensityMatrix::basis(2, 1);
        let half = RenyiOrder::new(0.5).unwrap();
        let two = RenyiOrder::new(2.0).unwrap();
        assert_eq!(sandwiched_renyi(&p0, p1.op(), half).unwrap(), DivergenceValue::PlusInfinity);
        assert_eq!(sandwiched_renyi(&p0, p1.op(), two).unwrap(), DivergenceValue::PlusInfinity);
        // Overlapping but not contained: finite below 1, infinite above.
        let plus = DensityMatrix::maximally_mixed(2);
        assert!(sandwiched_renyi(&plus, p0.op(), half).unwrap().is_finite());
        assert_eq!(sandwiched_renyi(&plus, p0.op(), two).unwrap(), DivergenceValue::PlusInfinity);
        // Contained in a singular σ: pseudo-powers give a finite value.
        let d = sandwiched_renyi(&p0, &HermitianOperator::diag(&[0.5, 0.0]), two).unwrap().expect_finite();
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sandwiched_converges_to_relative_entropy() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let rho = random_density(3, 3, &mut rng).unwrap();
            let sigma = random_density(3, 3, &mut rng).unwrap();
            let d = relative_entropy(&rho, sigma.op()).unwrap().expect_finite();
            for a in [0.9, 0.99, 0.999] {
                let da = sandwiched_renyi(&rho, sigma.op(), RenyiOrder::new(a).unwrap()).unwrap().expect_finite();
                assert!((da - d).abs() <= 10.0 * (1.0 - a), "alpha {a}: {da} vs {d}");
            }
        }
    }

    #[test]
    fn divergences_are_unitarily_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random_density(3, 3, &mut rng).unwrap();
        let sigma = random_density(3, 2, &mut rng).unwrap();
        let u = random_unitary(3, &mut rng);
        let conj = |m: &DensityMatrix| DensityMatrix::from_psd_unnormalized(&(&u * m.matrix() * u.adjoint()));
        let (ru, su) = (conj(&rho), conj(&sigma));
        for a in [0.5, 0.8] {
            let alpha = RenyiOrder::new(a).unwrap();
            let x = sandwiched_renyi(&rho, sigma.op(), alpha).unwrap().expect_finite();
            let y = sandwiched_renyi(&ru, su.op(), alpha).unwrap().expect_finite();
            assert!((x - y).abs() < 1e-10);
        }
        let sigma = random_density(3, 3, &mut rng).unwrap();
        let su = conj(&sigma);
        let a = relative_entropy(&rho, sigma.op()).unwrap().expect_finite();
        let b = relative_entropy(&ru, su.op()).unwrap().expect_finite();
        assert!((a - b).abs() < 1e-10);
        let a = relative_entropy_variance(&rho, sigma.op()).unwrap();
        let b = relative_entropy_variance(&ru, su.op()).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn data_processing_spot_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let n = random_channel(2, 2, 2, &mut rng).unwrap();
            let rho = random_density(2, 2, &mut rng).unwrap();
            let sigma = random_density(2, 2, &mut rng).unwrap();
            let (nr, ns) = (n.apply_state(&rho).unwrap(), n.apply_state(&sigma).unwrap());
            for a in [0.5, 0.75, 0.9, 2.0] {
                let alpha = RenyiOrder::new(a).unwrap();
                let before = sandwiched_renyi(&rho, sigma.op(), alpha).unwrap().expect_finite();
                let after = sandwiched_renyi(&nr, ns.op(), alpha).unwrap().expect_finite();
                assert!(after <= before + 1e-8);
            }
        }
    }

    #[test]
    fn monotone_in_alpha() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = random_density(3, 3, &mut rng).unwrap();
        let sigma = random_density(3, 3, &mut rng).unwrap();
        let vals: Vec<f64> = [0.5, 0.6, 0.7, 0.8, 0.9]
            .iter()
            .map(|&a| sandwiched_renyi(&rho, sigma.op(), RenyiOrder::new(a).unwrap()).unwrap().expect_finite())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] >= w[0] - 1e-9), "{vals:?}");
    }

    #[test]
    fn variance_examples() {
        let rho = DensityMatrix::diag(&[0.7, 0.2, 0.1]).unwrap();
        assert!(relative_entropy_variance(&rho, rho.op()).unwrap().abs() < 1e-12);

        let phi = bell();
        let marg = DensityMatrix::maximally_mixed(4);
        assert!(relative_entropy_variance(&phi, marg.op()).unwrap().abs() < 1e-12);

        let (p, q) = ([0.7, 0.2, 0.1], [0.2, 0.5, 0.3]);
        let llr: Vec<f64> = p.iter().zip(&q).map(|(a, b): (&f64, &f64)| (a / b).log2()).collect();
        let mean: f64 = p.iter().zip(&llr).map(|(a, l)| a * l).sum();
        let var: f64 = p.iter().zip(&llr).map(|(a, l)| a * (l - mean).powi(2)).sum();
        let sigma = DensityMatrix::diag(&q).unwrap();
        assert!((relative_entropy_variance(&rho, sigma.op()).unwrap() - var).abs() < 1e-12);

        assert_eq!(
            relative_entropy_variance(&DensityMatrix::maximally_mixed(2), DensityMatrix::basis(2, 0).op()),
            Err(Error::SupportViolation)
        );
    }

    #[test]
    fn mutual_information_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = random_density(2, 2, &mut rng).unwrap();
        let b = random_density(3, 2, &mut rng).unwrap();
        let prod = DensityMatrix::from_psd_unnormalized(&tensor(a.matrix(), b.matrix()));
        assert!(mutual_information(&prod, &SystemLayout::bipartite(2, 3)).unwrap().abs() < 1e-10);
        assert!((mutual_information(&bell(), &SystemLayout::bipartite(2, 2)).unwrap() - 2.0).abs() < 1e-10);
        assert!(mutual_information(&bell(), &SystemLayout::bipartite(2, 3)).is_err());

        // Agrees with D(ρ_AB ‖ ρ_A ⊗ ρ_B).
        let rho = random_density(6, 6, &mut rng).unwrap();
        let layout = SystemLayout::bipartite(2, 3);
        let ra = partial_trace(rho.matrix(), &layout, &[0]).unwrap();
        let rb = partial_trace(rho.matrix(), &layout, &[1]).unwrap();
        let d = relative_entropy(&rho, &HermitianOperator::hermitize(tensor(&ra, &rb))).unwrap().expect_finite();
        assert!((mutual_information(&rho, &layout).unwrap() - d).abs() < 1e-10);
    }

    #[test]
    fn markov_chain_has_zero_cmi() {
        // X → Y → Z with p(x), p(y|x), p(z|y) on bits.
        let px = [0.3, 0.7];
        let py_x = [[0.9, 0.1], [0.2, 0.8]];
        let pz_y = [[0.6, 0.4], [0.25, 0.75]];
        let mut probs = Vec::new();
        for x in 0..2 {
            for y in 0..2 {
                for z in 0..2 {
                    probs.push(px[x] * py_x[x][y] * pz_y[y][z]);
                }
            }
        }
        let rho = DensityMatrix::diag(&probs).unwrap();
        let layout = SystemLayout::new(vec![2, 2, 2]).unwrap();
        assert!(conditional_mutual_information(&rho, &layout).unwrap().abs() < 1e-12);
    }

    #[test]
    fn cmi_is_nonnegative_and_the_h_z_variant_is_not() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let layout = SystemLayout::new(vec![2, 2, 2]).unwrap();
        for _ in 0..50 {
            let rho = random_density(8, 8, &mut rng).unwrap();
            assert!(conditional_mutual_information(&rho, &layout).unwrap() >= -1e-9);
        }
        // X and Z maximally mixed, Y pure: subtracting H(Z) gives 1 + 1 − 2 − 1 = −1.
        let mixed = DensityMatrix::maximally_mixed(2);
        let witness = DensityMatrix::from_psd_unnormalized(&tensor(
            &tensor(mixed.matrix(), DensityMatrix::basis(2, 0).matrix()),
            mixed.matrix(),
        ));
        let r = witness.matrix();
        let h = |keep: &[usize]| entropy_of_matrix(&partial_trace(r, &layout, keep).unwrap());
        let variant = h(&[0, 1]) + h(&[1, 2]) - von_neumann_entropy(&witness) - h(&[2]);
        assert!((variant + 1.0).abs() < 1e-12);
        assert!(conditional_mutual_information(&witness, &layout).unwrap().abs() < 1e-12);
    }

    #[test]
    fn renyi_mi_of_product_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random_density(2, 2, &mut rng).unwrap();
        let b = random_density(2, 2, &mut rng).unwrap();
        let prod = DensityMatrix::from_psd_unnormalized(&tensor(a.matrix(), b.matrix()));
        let out = renyi_mutual_information(&prod, &SystemLayout::bipartite(2, 2), RenyiOrder::new(0.7).unwrap(), &OptimizerConfig::default())
            .unwrap();
        assert!(out.value.abs() < 1e-7, "{}", out.value);
        assert!(trace_distance(&out.sigma, &b).unwrap() < 1e-3);
    }

    #[test]
    fn renyi_mi_of_bell_pair_is_two_bits() {
        let cfg = OptimizerConfig::default();
        let out = renyi_mutual_information(&bell(), &SystemLayout::bipartite(2, 2), RenyiOrder::new(0.5).unwrap(), &cfg).unwrap();
        assert!((out.value - 2.0).abs() < 1e-6, "{}", out.value);
        assert!(out.outcome.restart_spread() < 1e-6);

        // Grid oracle over diagonal σ = diag(q, 1−q) (optimal σ is diagonal by symmetry).
        let alpha = RenyiOrder::new(0.5).unwrap();
        let rho_a = DensityMatrix::maximally_mixed(2);
        let grid_min = (1..200)
            .map(|k| {
                let q = k as f64 / 200.0;
                let sigma = DensityMatrix::diag(&[q, 1.0 - q]).unwrap();
                let refop = HermitianOperator::hermitize(tensor(rho_a.matrix(), sigma.matrix()));
                sandwiched_renyi(&bell(), &refop, alpha).unwrap().expect_finite()
            })
            .fold(f64::INFINITY, f64::min);
        assert!(out.value <= grid_min + 1e-9 && (out.value - grid_min).abs() < 1e-6, "{} vs {grid_min}", out.value);
    }

    #[test]
    fn renyi_mi_is_additive_on_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let alpha = RenyiOrder::new(0.7).unwrap();
        let cfg = OptimizerConfig::default();
        let r1 = random_density(4, 2, &mut rng).unwrap();
        let r2 = random_density(4, 3, &mut rng).unwrap();
        let v1 = renyi_mutual_information(&r1, &SystemLayout::bipartite(2, 2), alpha, &cfg).unwrap().value;
        let v2 = renyi_mutual_information(&r2, &SystemLayout::bipartite(2, 2), alpha, &cfg).unwrap().value;
        // A1 B1 A2 B2 → A1 A2 B1 B2.
        let joint = tensor(r1.matrix(), r2.matrix());
        let perm = crate::operator::permute_subsystems(&joint, &SystemLayout::new(vec![2, 2, 2, 2]).unwrap(), &[0, 2, 1, 3]).unwrap();
        let v12 = renyi_mutual_information(&DensityMatrix::from_psd_unnormalized(&perm), &SystemLayout::bipartite(4, 4), alpha, &cfg)
            .unwrap()
            .value;
        assert!((v12 - v1 - v2).abs() < 2e-6, "{v12} vs {v1} + {v2}");
    }

    #[test]
    fn renyi_mi_rejects_standard_regime() {
        let out = renyi_mutual_information(&bell(), &SystemLayout::bipartite(2, 2), RenyiOrder::new(2.0).unwrap(), &OptimizerConfig::default());
        assert!(matches!(out, Err(Error::WrongRegime { .. })));
    }
}
