//! Completely positive maps in Kraus form, with their Choi and Stinespring
//! pictures, complementary maps, tensor products and composition.
//!
//! Conventions: the Choi operator is `(id_A ⊗ M)(Φ_{AA'})` with the reference
//! system `A` as the first factor; a Stinespring map `U : A' → B ⊗ E` puts the
//! output first and the environment second, with environment index equal to
//! the Kraus index.

mod zoo;

pub use zoo::{
    amplitude_damping, channel_zoo, corpus_pairs, dephasing, depolarizing, identity_channel, qubit_corpus,
    random_channel, trace_map, ZooChannel,
};

use crate::entropy::RenyiOrder;
use crate::error::{Error, Result};
use crate::operator::{
    c, matrix_power, trace_re, DensityMatrix, HermitianOperator, Matrix,
    SystemLayout, Vector,
};

/// Kraus operators are accepted as trace preserving when `‖Σ K†K − 1‖_max ≤ TP_TOL`.
pub const TP_TOL: f64 = 1e-10;

/// A completely positive map `L(C^in) → L(C^out)` given by Kraus operators.
#[derive(Clone, Debug)]
pub struct CPMap {
    in_dim: usize,
    out_dim: usize,
    kraus: Vec<Matrix>,
    trace_preserving: bool,
}

impl CPMap {
    /// Builds the map and records whether it is trace preserving.
    pub fn new(in_dim: usize, out_dim: usize, kraus: Vec<Matrix>) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::DimensionMismatch("zero dimension".into()));
        }
        if kraus.is_empty() {
            return Err(Error::DimensionMismatch("a CP map needs at least one Kraus operator".into()));
        }
        for (k, op) in kraus.iter().enumerate() {
            if op.nrows() != out_dim || op.ncols() != in_dim {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator {k} is {}x{}, expected {out_dim}x{in_dim}",
                    op.nrows(),
                    op.ncols()
                )));
            }
        }
        let mut map = Self { in_dim, out_dim, kraus, trace_preserving: false };
        map.trace_preserving = map.tp_defect() <= TP_TOL;
        Ok(map)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn kraus(&self) -> &[Matrix] {
        &self.kraus
    }

    pub fn num_kraus(&self) -> usize {
        self.kraus.len()
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    /// `max |(Σ K†K − 1)_ij|`.
    pub fn tp_defect(&self) -> f64 {
        let sum = self.kraus.iter().fold(Matrix::zeros(self.in_dim, self.in_dim), |acc, k| acc + k.adjoint() * k);
        (sum - Matrix::identity(self.in_dim, self.in_dim)).iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// `Σ_i K_i X K_i†`.
    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        if x.nrows() != self.in_dim || x.ncols() != self.in_dim {
            return Err(Error::DimensionMismatch(format!(
                "map input dimension is {}, operator is {}x{}",
                self.in_dim,
                x.nrows(),
                x.ncols()
            )));
        }
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &Matrix) -> Matrix {
        self.kraus.iter().fold(Matrix::zeros(self.out_dim, self.out_dim), |acc, k| acc + k * x * k.adjoint())
    }

    /// Image of a density matrix, renormalized against round-off.
    /// Only meaningful for trace-preserving maps.
    pub fn apply_state(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if !self.trace_preserving {
            return Err(Error::NotTracePreserving);
        }
        Ok(DensityMatrix::from_psd_unnormalized(&self.apply(rho.matrix())?))
    }

    /// Heisenberg picture `Y ↦ Σ_i K_i† Y K_i`.
    pub fn apply_adjoint(&self, y: &Matrix) -> Matrix {
        self.kraus.iter().fold(Matrix::zeros(self.in_dim, self.in_dim), |acc, k| acc + k.adjoint() * y * k)
    }

    pub fn choi(&self) -> ChoiOperator {
        let (din, dout) = (self.in_dim, self.out_dim);
        let mut j = Matrix::zeros(din * dout, din * dout);
        for k in &self.kraus {
            // (1 ⊗ K)|Φ⟩ = Σ_i |i⟩ ⊗ K|i⟩
            let v = Vector::from_fn(din * dout, |idx, _| k[(idx % dout, idx / dout)]);
            j += &v * v.adjoint();
        }
        ChoiOperator {
            op: HermitianOperator::hermitize(j),
            layout: SystemLayout::bipartite(din, dout),
        }
    }

    pub fn stinespring(&self) -> StinespringDilation {
        let env = self.kraus.len();
        let mut u = Matrix::zeros(self.out_dim * env, self.in_dim);
        for (e, k) in self.kraus.iter().enumerate() {
            for b in 0..self.out_dim {
                for a in 0..self.in_dim {
                    u[(b * env + e, a)] = k[(b, a)];
                }
            }
        }
        StinespringDilation { map_matrix: u, out_dim: self.out_dim, env_dim: env }
    }

    /// The environment-side map `ρ ↦ tr_B UρU†` of [`Self::stinespring`].
    pub fn complementary(&self) -> CPMap {
        let env = self.kraus.len();
        let kraus = (0..self.out_dim)
            .map(|b| Matrix::from_fn(env, self.in_dim, |e, a| self.kraus[e][(b, a)]))
            .collect();
        CPMap::new(self.in_dim, env, kraus).expect("complementary Kraus operators are well formed")
    }

    /// `c · M` for `c > 0`.
    pub fn scaled(&self, factor: f64) -> Result<CPMap> {
        if !(factor > 0.0) {
            return Err(Error::InvalidParameter(format!("scale factor {factor} must be positive")));
        }
        let s = c(factor.sqrt());
        CPMap::new(self.in_dim, self.out_dim, self.kraus.iter().map(|k| k * s).collect())
    }
}

pub fn apply(map: &CPMap, rho: &Matrix) -> Result<Matrix> {
    map.apply(rho)
}

pub fn complementary(map: &CPMap) -> CPMap {
    map.complementary()
}

/// `M1 ⊗ M2` with Kraus set `{K_i ⊗ L_j}`.
pub fn tensor_map(m1: &CPMap, m2: &CPMap) -> CPMap {
    let mut kraus = Vec::with_capacity(m1.num_kraus() * m2.num_kraus());
    for k in m1.kraus() {
        for l in m2.kraus() {
            kraus.push(k.kronecker(l));
        }
    }
    CPMap::new(m1.in_dim * m2.in_dim, m1.out_dim * m2.out_dim, kraus).expect("tensor of valid maps")
}

/// `M2 ∘ M1` with Kraus set `{L_j K_i}`.
pub fn compose(m2: &CPMap, m1: &CPMap) -> Result<CPMap> {
    if m1.out_dim != m2.in_dim {
        return Err(Error::DimensionMismatch(format!(
            "cannot compose: first map outputs dimension {}, second expects {}",
            m1.out_dim, m2.in_dim
        )));
    }
    let mut kraus = Vec::with_capacity(m1.num_kraus() * m2.num_kraus());
    for k in m1.kraus() {
        for l in m2.kraus() {
            kraus.push(l * k);
        }
    }
    CPMap::new(m1.in_dim, m2.out_dim, kraus)
}

/// `Γ_σ(X) = σ^{(1−α)/(2α)} X σ^{(1−α)/(2α)}` for `α ∈ [1/2, 1)`.
pub fn sandwich_map(sigma: &DensityMatrix, alpha: RenyiOrder) -> Result<CPMap> {
    let a = alpha.quasi()?;
    let k = matrix_power(sigma.op(), (1.0 - a) / (2.0 * a))?;
    CPMap::new(sigma.dim(), sigma.dim(), vec![k.into_matrix()])
}

/// `U : A' → B ⊗ E` with `M(ρ) = tr_E UρU†`.
#[derive(Clone, Debug)]
pub struct StinespringDilation {
    map_matrix: Matrix,
    out_dim: usize,
    env_dim: usize,
}

impl StinespringDilation {
    pub fn map_matrix(&self) -> &Matrix {
        &self.map_matrix
    }

    pub fn env_dim(&self) -> usize {
        self.env_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn in_dim(&self) -> usize {
        self.map_matrix.ncols()
    }

    pub fn is_isometry(&self, tol: f64) -> bool {
        let n = self.in_dim();
        (self.map_matrix.adjoint() * &self.map_matrix - Matrix::identity(n, n)).norm() <= tol
    }

    /// `UρU†` on `B ⊗ E`.
    pub fn dilate(&self, rho: &Matrix) -> Matrix {
        &self.map_matrix * rho * self.map_matrix.adjoint()
    }

    pub fn to_cp_map(&self) -> CPMap {
        let kraus = (0..self.env_dim)
            .map(|e| Matrix::from_fn(self.out_dim, self.in_dim(), |b, a| self.map_matrix[(b * self.env_dim + e, a)]))
            .collect();
        CPMap::new(self.in_dim(), self.out_dim, kraus).expect("slices of a dilation are well formed")
    }
}

/// `(id_A ⊗ M)(Φ_{AA'})` on `A ⊗ B`.
#[derive(Clone, Debug)]
pub struct ChoiOperator {
    op: HermitianOperator,
    layout: SystemLayout,
}

impl ChoiOperator {
    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &Matrix {
        self.op.matrix()
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn in_dim(&self) -> usize {
        self.layout.factor_dims()[0]
    }

    pub fn out_dim(&self) -> usize {
        self.layout.factor_dims()[1]
    }

    /// Nonzero eigenvalues, ascending. Equal for maps that differ by an
    /// isometry on the output.
    pub fn nonzero_spectrum(&self) -> Vec<f64> {
        let e = self.op.eigh();
        let thr = 1e-10 * e.max().max(1.0);
        e.values.into_iter().filter(|&x| x > thr).collect()
    }

    pub fn trace(&self) -> f64 {
        trace_re(self.matrix())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{max_entangled, partial_trace, permute_subsystems, random_density, tensor, SystemLayout};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spectra_close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn apply_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let rho = random_density(3, 3, &mut rng).unwrap();
        let id = identity_channel(3);
        assert!((id.apply(rho.matrix()).unwrap() - rho.matrix()).norm() < 1e-14);
        let tr = trace_map(3);
        let out = tr.apply(rho.matrix()).unwrap();
        assert_eq!(out.shape(), (1, 1));
        assert!((out[(0, 0)].re - 1.0).abs() < 1e-12);
        let dep = depolarizing(1.0).unwrap();
        let q = random_density(2, 1, &mut rng).unwrap();
        let out = dep.apply(q.matrix()).unwrap();
        assert!((out - Matrix::identity(2, 2) * c(0.5)).norm() < 1e-12);
        assert!(id.apply(&Matrix::identity(2, 2)).is_err());
    }

    #[test]
    fn choi_is_id_tensor_map_of_phi() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = random_channel(2, 3, 2, &mut rng).unwrap();
        let phi = max_entangled(2);
        // Apply id ⊗ M column-block by column-block: Φ = Σ |i⟩⟨j| ⊗ |i⟩⟨j|.
        let mut direct = Matrix::zeros(6, 6);
        for i in 0..2 {
            for j in 0..2 {
                let mut eij = Matrix::zeros(2, 2);
                eij[(i, j)] = c(1.0);
                let block = m.apply(&eij).unwrap();
                let mut ref_ij = Matrix::zeros(2, 2);
                ref_ij[(i, j)] = c(1.0);
                direct += tensor(&ref_ij, &block);
            }
        }
        assert!((m.choi().matrix() - &direct).norm() < 1e-12);
        assert!((phi.matrix() - identity_channel(2).choi().matrix()).norm() < 1e-14);
    }

    #[test]
    fn choi_is_positive_for_all_constructions() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sigma = random_density(2, 2, &mut rng).unwrap();
        let maps = vec![
            random_channel(2, 2, 2, &mut rng).unwrap(),
            random_channel(3, 2, 3, &mut rng).unwrap(),
            amplitude_damping(0.3).unwrap(),
            sandwich_map(&sigma, RenyiOrder::new(0.7).unwrap()).unwrap(),
            depolarizing(0.4).unwrap().complementary(),
        ];
        for m in maps {
            assert!(m.choi().op().eigh().min() > -1e-12);
        }
    }

    #[test]
    fn kraus_stinespring_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_channel(2, 3, 2, &mut rng).unwrap();
        let u = m.stinespring();
        assert!(u.is_isometry(1e-10));
        let back = u.to_cp_map();
        // Full operator basis |i⟩⟨j|.
        for i in 0..2 {
            for j in 0..2 {
                let mut eij = Matrix::zeros(2, 2);
                eij[(i, j)] = c(1.0);
                let a = m.apply(&eij).unwrap();
                let b = back.apply(&eij).unwrap();
                let via_trace = partial_trace(&u.dilate(&eij), &SystemLayout::bipartite(3, u.env_dim()), &[0]).unwrap();
                assert!((&a - b).norm() < 1e-10);
                assert!((a - via_trace).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn trace_preservation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = random_channel(3, 2, 3, &mut rng).unwrap();
        assert!(m.is_trace_preserving());
        for _ in 0..10 {
            let rho = random_density(3, 2, &mut rng).unwrap();
            assert!((trace_re(&m.apply(rho.matrix()).unwrap()) - 1.0).abs() < 1e-10);
        }
        assert!(m.complementary().is_trace_preserving());
    }

    #[test]
    fn complementary_of_trace_map_is_identity_like() {
        for d in 2..=3 {
            let comp = trace_map(d).complementary();
            assert!(spectra_close(&comp.choi().nonzero_spectrum(), &identity_channel(d).choi().nonzero_spectrum(), 1e-12));
            let comp = identity_channel(d).complementary();
            assert!(spectra_close(&comp.choi().nonzero_spectrum(), &trace_map(d).choi().nonzero_spectrum(), 1e-12));
        }
    }

    #[test]
    fn double_complement_preserves_choi_spectrum_for_isometric_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let m = random_channel(2, 4, 1, &mut rng).unwrap();
            let cc = m.complementary().complementary();
            assert!(spectra_close(&cc.choi().nonzero_spectrum(), &m.choi().nonzero_spectrum(), 1e-8));
        }
    }

    #[test]
    fn tensor_and_compose() {
        let id2 = identity_channel(2);
        let id3 = identity_channel(3);
        assert!((tensor_map(&id2, &id3).choi().matrix() - identity_channel(6).choi().matrix()).norm() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let m1 = random_channel(2, 2, 2, &mut rng).unwrap();
        let m2 = random_channel(3, 2, 2, &mut rng).unwrap();
        let rho = random_density(2, 2, &mut rng).unwrap();
        let sigma = random_density(3, 3, &mut rng).unwrap();
        let joint = tensor_map(&m1, &m2).apply(&tensor(rho.matrix(), sigma.matrix())).unwrap();
        let product = tensor(&m1.apply(rho.matrix()).unwrap(), &m2.apply(sigma.matrix()).unwrap());
        assert!((joint - product).norm() < 1e-12);

        let n = random_channel(3, 2, 2, &mut rng).unwrap();
        let composed = compose(&trace_map(2), &n).unwrap();
        assert!((composed.choi().matrix() - trace_map(3).choi().matrix()).norm() < 1e-12);
        assert!(compose(&trace_map(3), &n).is_err());
    }

    #[test]
    fn tensor_map_choi_is_permuted_product_of_chois() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..3 {
            let m1 = random_channel(2, 2, 2, &mut rng).unwrap();
            let m2 = random_channel(2, 3, 1, &mut rng).unwrap();
            let prod = tensor(m1.choi().matrix(), m2.choi().matrix());
            // A1 B1 A2 B2 → A1 A2 B1 B2
            let layout = SystemLayout::new(vec![2, 2, 2, 3]).unwrap();
            let permuted = permute_subsystems(&prod, &layout, &[0, 2, 1, 3]).unwrap();
            assert!((tensor_map(&m1, &m2).choi().matrix() - permuted).norm() < 1e-10);
        }
    }

    #[test]
    fn sandwich_map_examples() {
        let half = RenyiOrder::new(0.5).unwrap();
        let g = sandwich_map(&DensityMatrix::maximally_mixed(3), half).unwrap();
        let x = Matrix::from_fn(3, 3, |i, j| c((i * 3 + j) as f64));
        assert!((g.apply(&x).unwrap() - &x * c(1.0 / 3.0)).norm() < 1e-12);
        assert!(!g.is_trace_preserving());

        let g = sandwich_map(&DensityMatrix::basis(2, 0), RenyiOrder::new(0.7).unwrap()).unwrap();
        let y = Matrix::from_fn(2, 2, |i, j| c(1.0 + (i + 2 * j) as f64));
        let out = g.apply(&y).unwrap();
        let mut expected = Matrix::zeros(2, 2);
        expected[(0, 0)] = y[(0, 0)];
        assert!((out - expected).norm() < 1e-12);

        assert!(sandwich_map(&DensityMatrix::maximally_mixed(2), RenyiOrder::new(2.0).unwrap()).is_err());
    }

    #[test]
    fn sandwich_after_channel_conjugates_the_choi() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = random_channel(2, 2, 2, &mut rng).unwrap();
        let sigma = random_density(2, 2, &mut rng).unwrap();
        let alpha = RenyiOrder::new(0.6).unwrap();
        let composed = compose(&sandwich_map(&sigma, alpha).unwrap(), &n).unwrap();
        let s = matrix_power(sigma.op(), (1.0 - 0.6) / 1.2).unwrap();
        let k = tensor(&Matrix::identity(2, 2), s.matrix());
        let expected = &k * n.choi().matrix() * &k;
        assert!((composed.choi().matrix() - expected).norm() < 1e-12);
    }

    #[test]
    fn scaling_multiplies_choi() {
        let m = amplitude_damping(0.3).unwrap();
        let s = m.scaled(2.0).unwrap();
        assert!((s.choi().matrix() - m.choi().matrix() * c(2.0)).norm() < 1e-12);
        assert!(!s.is_trace_preserving());
        assert!(m.scaled(0.0).is_err());
    }
}
