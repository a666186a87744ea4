//! The `compute` and `verify` runs.

use crate::channel_file::{ChannelSpec, LoadedChannel};
use crate::report::{CertificationReport, Diagnostic, Record};
use crate::CliError;
use qcbnorm_core::cbnorm::{
    cb_norm_geq1, cb_quasinorm_primal, cb_quasinorm_primal_value, multiplicativity_gap, DIMENSION_CAP,
};
use qcbnorm_core::channel::{corpus_pairs, qubit_corpus, random_channel, tensor_map, trace_map};
use qcbnorm_core::entropy::RenyiOrder;
use qcbnorm_core::info::{
    channel_dispersion, channel_mutual_information, divergence_center_check, dispersion_additivity_gap,
    mi_additivity_gap, product_optimizer, renyi_additivity_gap, renyi_channel_information_dual,
    renyi_channel_information_primal, structure_cmi_check,
};
use qcbnorm_core::operator::{carlen_lieb_upsilon, complex_gaussian, DensityMatrix, HermitianOperator, C64};
use qcbnorm_core::optimize::{OptimizationOutcome, OptimizerConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Compute,
    Verify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Pass thresholds, all in bits except `center` (trace distance).
#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances {
    /// Multiplicativity and additivity gaps, and primal/dual agreement.
    pub gap: f64,
    pub dispersion: f64,
    pub center: f64,
    pub cmi: f64,
    pub convexity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { gap: 2e-3, dispersion: 5e-3, center: 1e-4, cmi: 1e-4, convexity: 1e-10 }
    }
}

impl Tolerances {
    pub fn uniform(t: f64) -> Self {
        Self { gap: t, dispersion: t, center: t, cmi: t, convexity: t }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub channels: Vec<ChannelSpec>,
    pub alphas: Vec<f64>,
    pub seed: u64,
    pub restarts: usize,
    pub trials: usize,
    /// `(d_in, d_out, d_env)` of random channels.
    pub dims: (usize, usize, usize),
    pub tolerances: Tolerances,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub timing: bool,
    /// Random probes per `(p, q)` in the convexity check.
    pub probes: usize,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            channels: Vec::new(),
            alphas: vec![0.5, 0.7, 0.9],
            seed: 0,
            restarts: OptimizerConfig::default().restarts,
            trials: 5,
            dims: (2, 2, 2),
            tolerances: Tolerances::default(),
            out: None,
            format: Format::Json,
            timing: true,
            probes: 200,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        for &a in &self.alphas {
            let ok = (0.5..1.0).contains(&a) || (a > 1.0 && a.is_finite());
            if !ok {
                return Err(CliError::Input(format!("alpha = {a} is outside [0.5, 1) and (1, inf)")));
            }
        }
        if self.alphas.is_empty() {
            return Err(CliError::Input("no alpha values given".into()));
        }
        if self.restarts == 0 {
            return Err(CliError::Input("restarts must be at least 1".into()));
        }
        let (a, b, e) = self.dims;
        if a == 0 || b == 0 || e == 0 || b * e < a {
            return Err(CliError::Input(format!("dims {a},{b},{e}: need positive dimensions with d_out·d_env ≥ d_in")));
        }
        if self.command == Command::Compute && self.channels.is_empty() {
            return Err(CliError::Input("compute needs --channel or --zoo".into()));
        }
        Ok(())
    }

    fn optimizer(&self) -> OptimizerConfig {
        OptimizerConfig::default().with_restarts(self.restarts).with_seed(self.seed)
    }

    fn quasi_alphas(&self) -> Vec<f64> {
        self.alphas.iter().copied().filter(|&a| a < 1.0).collect()
    }
}

fn state_json(rho: &DensityMatrix) -> Vec<Vec<[f64; 2]>> {
    let m = rho.matrix();
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect()
}

fn outcome_diagnostics(mut rec: Record, prefix: &str, o: &OptimizationOutcome) -> Record {
    rec = rec.diag(&format!("{prefix}converged"), Diagnostic::Flag(o.converged));
    rec = rec.diag(&format!("{prefix}evals"), Diagnostic::Count(o.evals_used as u64));
    rec.diag(&format!("{prefix}restart_spread"), Diagnostic::Real(o.restart_spread()))
}

/// Runs `f`, attaches its wall time when timing is on, and turns errors into
/// failed records.
fn timed(timing: bool, base: Record, f: impl FnOnce(Record) -> Result<Record, qcbnorm_core::Error>) -> Record {
    let start = Instant::now();
    let mut rec = match f(base.clone()) {
        Ok(r) => r,
        Err(e) => base.failed(e.to_string()),
    };
    if timing {
        rec.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    rec
}

type Job<'a> = Box<dyn Fn() -> Record + Send + Sync + 'a>;

fn run_jobs(jobs: Vec<Job<'_>>) -> Vec<Record> {
    jobs.par_iter().map(|j| j()).collect()
}

pub fn load_channels(specs: &[ChannelSpec]) -> Result<Vec<LoadedChannel>, CliError> {
    specs.iter().map(ChannelSpec::load).collect()
}

fn compute_jobs<'a>(cfg: &'a RunConfig, ch: &'a LoadedChannel) -> Vec<Job<'a>> {
    let opt = cfg.optimizer();
    let names = vec![ch.label.clone()];
    let n = &ch.map;
    let mut jobs: Vec<Job<'a>> = Vec::new();
    for &a in &cfg.alphas {
        let (opt, names) = (opt.clone(), names.clone());
        jobs.push(Box::new(move || {
            let order = RenyiOrder::new(a).expect("validated");
            if a > 1.0 {
                return timed(cfg.timing, Record::new("cb_norm", names.clone(), Some(a)), |r| {
                    Ok(r.value("value", cb_norm_geq1(n, a, &opt)?).informational())
                });
            }
            timed(cfg.timing, Record::new("cb_quasinorm", names.clone(), Some(a)), |r| {
                let res = cb_quasinorm_primal(n, order, &opt)?;
                let r = r.value("primal", res.value).value("dual", res.dual_value);
                let mut r = outcome_diagnostics(r, "", &res.outcome).judged(res.agreement_gap, cfg.tolerances.gap);
                r.states.insert("optimizer".into(), state_json(&res.optimizer_state));
                Ok(r)
            })
        }));
    }
    if !n.is_trace_preserving() {
        return jobs;
    }
    for a in cfg.quasi_alphas() {
        let (opt, names) = (opt.clone(), names.clone());
        jobs.push(Box::new(move || {
            let order = RenyiOrder::new(a).expect("validated");
            timed(cfg.timing, Record::new("renyi_information", names.clone(), Some(a)), |r| {
                let p = renyi_channel_information_primal(n, order, &opt)?;
                let d = renyi_channel_information_dual(n, order, &opt)?;
                let r = outcome_diagnostics(r.value("primal", p.value).value("dual", d.value), "primal_", &p.outcome);
                let mut r = outcome_diagnostics(r, "dual_", &d.outcome).judged(p.value - d.value, cfg.tolerances.gap);
                r.states.insert("input".into(), state_json(&p.input));
                r.states.insert("reference".into(), state_json(&d.reference));
                Ok(r)
            })
        }));
    }
    {
        let (opt, names) = (opt.clone(), names.clone());
        jobs.push(Box::new(move || {
            timed(cfg.timing, Record::new("mutual_information", names.clone(), None), |r| {
                let res = channel_mutual_information(n, &opt)?;
                let dist = divergence_center_check(n, &res)?;
                let r = r.value("value", res.value).diag("optimal_inputs", Diagnostic::Count(res.optimizer_inputs.len() as u64));
                let mut r = outcome_diagnostics(r, "", &res.outcome).judged(dist, cfg.tolerances.center);
                r.states.insert("center".into(), state_json(&res.center));
                r.states.insert("input".into(), state_json(&res.outcome.argument));
                Ok(r)
            })
        }));
    }
    jobs.push(Box::new(move || {
        timed(cfg.timing, Record::new("dispersion", names.clone(), None), |r| {
            let d = channel_dispersion(n, &opt)?;
            let r = r.value("v_max", d.v_max).value("v_min", d.v_min).value("mutual_information", d.info.value);
            let r = r.diag("witnesses", Diagnostic::Count(d.witnesses.len() as u64));
            if d.v_min < 0.0 || d.v_min > d.v_max {
                Ok(r.failed(format!("inconsistent dispersions v_min = {} v_max = {}", d.v_min, d.v_max)))
            } else {
                Ok(r.informational())
            }
        })
    }));
    jobs
}

pub fn cmd_compute(cfg: &RunConfig) -> Result<CertificationReport, CliError> {
    cfg.validate()?;
    let channels = load_channels(&cfg.channels)?;
    let jobs: Vec<Job<'_>> = channels.iter().flat_map(|ch| compute_jobs(cfg, ch)).collect();
    let records = run_jobs(jobs);
    Ok(CertificationReport::new("compute", cfg.seed, cfg.restarts, cfg.alphas.clone(), records, cfg.timing))
}

/// Channel pool for `verify`: the qubit corpus, `trials` random pairs and
/// user channels (paired among themselves, self-pairs included).
pub struct VerifyPool {
    pub singles: Vec<LoadedChannel>,
    pub pairs: Vec<(LoadedChannel, LoadedChannel)>,
}

pub fn verify_pool(cfg: &RunConfig) -> Result<VerifyPool, CliError> {
    let zoo = |z: qcbnorm_core::channel::ZooChannel| LoadedChannel { label: z.to_string(), map: z.build().expect("corpus channels build") };
    let mut singles: Vec<LoadedChannel> = qubit_corpus().into_iter().map(zoo).collect();
    let mut pairs: Vec<(LoadedChannel, LoadedChannel)> = corpus_pairs().into_iter().map(|(a, b)| (zoo(a), zoo(b))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (di, dout, de) = cfg.dims;
    for t in 0..cfg.trials {
        let mut make = |k: usize| -> Result<LoadedChannel, CliError> {
            let map = random_channel(di, dout, de, &mut rng).map_err(|e| CliError::Input(e.to_string()))?;
            Ok(LoadedChannel { label: format!("random[{t}.{k}]"), map })
        };
        let (a, b) = (make(0)?, make(1)?);
        singles.push(a.clone());
        singles.push(b.clone());
        pairs.push((a, b));
    }
    let user = load_channels(&cfg.channels)?;
    for i in 0..user.len() {
        for j in i..user.len() {
            pairs.push((user[i].clone(), user[j].clone()));
        }
    }
    singles.extend(user);
    Ok(VerifyPool { singles, pairs })
}

fn pair_jobs<'a>(cfg: &'a RunConfig, n1: &'a LoadedChannel, n2: &'a LoadedChannel) -> Vec<Job<'a>> {
    let opt = cfg.optimizer();
    let tol = &cfg.tolerances;
    let names = vec![n1.label.clone(), n2.label.clone()];
    let (m1, m2) = (&n1.map, &n2.map);
    let tp = m1.is_trace_preserving() && m2.is_trace_preserving();
    let mut jobs: Vec<Job<'a>> = Vec::new();
    for a in cfg.quasi_alphas() {
        let (o, nm) = (opt.clone(), names.clone());
        jobs.push(Box::new(move || {
            timed(cfg.timing, Record::new("multiplicativity", nm.clone(), Some(a)), |r| {
                let g = multiplicativity_gap(m1, m2, RenyiOrder::new(a).expect("validated"), &o)?;
                let r = r.value("joint", g.joint).value("first", g.first).value("second", g.second);
                Ok(r.diag("converged", Diagnostic::Flag(g.converged)).judged(g.gap, tol.gap))
            })
        }));
        if tp {
            let (opt, names) = (opt.clone(), names.clone());
            jobs.push(Box::new(move || {
                timed(cfg.timing, Record::new("renyi_additivity", names.clone(), Some(a)), |r| {
                    let g = renyi_additivity_gap(m1, m2, RenyiOrder::new(a).expect("validated"), &opt)?;
                    Ok(r.value("joint", g.joint).value("first", g.first).value("second", g.second).judged(g.gap, tol.gap))
                })
            }));
        }
    }
    if !tp {
        return jobs;
    }
    {
        let (opt, names) = (opt.clone(), names.clone());
        jobs.push(Box::new(move || {
            timed(cfg.timing, Record::new("mi_additivity", names.clone(), None), |r| {
                let g = mi_additivity_gap(m1, m2, &opt)?;
                Ok(r.value("joint", g.joint).value("first", g.first).value("second", g.second).judged(g.gap, tol.gap))
            })
        }));
    }
    {
        let (opt, names) = (opt.clone(), names.clone());
        jobs.push(Box::new(move || {
            timed(cfg.timing, Record::new("dispersion_additivity", names.clone(), None), |r| {
                let g = dispersion_additivity_gap(m1, m2, &opt)?;
                let r = r
                    .value("gap_max", g.gap_max)
                    .value("gap_min", g.gap_min)
                    .value("joint_v_max", g.joint.0)
                    .value("joint_v_min", g.joint.1);
                let worst = if g.gap_max.abs() >= g.gap_min.abs() { g.gap_max } else { g.gap_min };
                Ok(r.judged(worst, tol.dispersion))
            })
        }));
    }
    {
        let (opt, names) = (opt.clone(), names.clone());
        jobs.push(Box::new(move || {
            timed(cfg.timing, Record::new("joint_center", names.clone(), None), |r| {
                let joint = tensor_map(m1, m2);
                if joint.in_dim() > DIMENSION_CAP {
                    return Err(qcbnorm_core::Error::DimensionCap { dim: joint.in_dim(), cap: DIMENSION_CAP });
                }
                let res = channel_mutual_information(&joint, &opt)?;
                let dist = divergence_center_check(&joint, &res)?;
                Ok(r.value("value", res.value).judged(dist, tol.center))
            })
        }));
    }
    jobs.push(Box::new(move || {
        timed(cfg.timing, Record::new("structure_cmi", names.clone(), None), |r| {
            let input = product_optimizer(m1, m2, &opt)?;
            let s = structure_cmi_check(m1, m2, &input, &opt)?;
            let r = r
                .value("cmi_1", s.cmi_1)
                .value("cmi_2", s.cmi_2)
                .value("optimality_deficit", s.optimality_deficit)
                .diag("near_optimal", Diagnostic::Flag(s.near_optimal));
            if !s.near_optimal {
                return Ok(r.failed(format!("input is {} bits below the optimum", s.optimality_deficit)));
            }
            Ok(r.judged(s.cmi_1.abs().max(s.cmi_2.abs()), tol.cmi))
        })
    }));
    jobs
}

fn single_jobs<'a>(cfg: &'a RunConfig, ch: &'a LoadedChannel) -> Vec<Job<'a>> {
    let opt = cfg.optimizer();
    let names = vec![ch.label.clone()];
    let n = &ch.map;
    let mut jobs: Vec<Job<'a>> = Vec::new();
    for a in cfg.quasi_alphas() {
        let (opt, names) = (opt.clone(), names.clone());
        jobs.push(Box::new(move || {
            timed(cfg.timing, Record::new("trace_tensor", names.clone(), Some(a)), |r| {
                let order = RenyiOrder::new(a).expect("validated");
                let (base, _) = cb_quasinorm_primal_value(n, order, &opt)?;
                let (joint, _) = cb_quasinorm_primal_value(&tensor_map(n, &trace_map(2)), order, &opt)?;
                Ok(r.value("norm", base).value("norm_with_trace", joint).judged(joint.log2() - base.log2(), cfg.tolerances.gap))
            })
        }));
    }
    if n.is_trace_preserving() {
        jobs.push(Box::new(move || {
            timed(cfg.timing, Record::new("center", names.clone(), None), |r| {
                let res = channel_mutual_information(n, &opt)?;
                let dist = divergence_center_check(n, &res)?;
                Ok(r.value("value", res.value).diag("optimal_inputs", Diagnostic::Count(res.optimizer_inputs.len() as u64)).judged(dist, cfg.tolerances.center))
            })
        }));
    }
    jobs
}

/// Largest midpoint-convexity violation of `X ↦ tr[(Y* X^p Y)^{q/p}]` over
/// random `3×3` probes, relative to `max(1, |rhs|)`.
pub fn convexity_probe(p: f64, q: f64, probes: usize, seed: u64) -> Result<f64, qcbnorm_core::Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    let psd = |rng: &mut ChaCha8Rng| {
        let g = complex_gaussian(3, 3, rng);
        HermitianOperator::hermitize(&g * g.adjoint())
    };
    for _ in 0..probes {
        let x1 = psd(&mut rng);
        let x2 = psd(&mut rng);
        let y = complex_gaussian(3, 3, &mut rng);
        let mid = HermitianOperator::hermitize((x1.matrix() + x2.matrix()) * C64::new(0.5, 0.0));
        let lhs = carlen_lieb_upsilon(&mid, &y, p, q)?;
        let rhs = 0.5 * (carlen_lieb_upsilon(&x1, &y, p, q)? + carlen_lieb_upsilon(&x2, &y, p, q)?);
        worst = worst.max((lhs - rhs) / rhs.abs().max(1.0));
    }
    Ok(worst)
}

fn convexity_jobs(cfg: &RunConfig) -> Vec<Job<'_>> {
    let mut jobs: Vec<Job<'_>> = Vec::new();
    for (i, p) in [1.0, 1.5, 2.0].into_iter().enumerate() {
        for (j, q) in [1.0, 2.0].into_iter().enumerate() {
            jobs.push(Box::new(move || {
                let rec = Record::new("convexity", vec![format!("p={p},q={q}")], None);
                timed(cfg.timing, rec, |r| {
                    let seed = cfg.seed.wrapping_add(1000 + (3 * i + j) as u64);
                    let v = convexity_probe(p, q, cfg.probes, seed)?;
                    // Only violations count; a negative margin is a pass.
                    Ok(r.value("max_violation", v).diag("probes", Diagnostic::Count(cfg.probes as u64)).judged(v.max(0.0), cfg.tolerances.convexity))
                })
            }));
        }
    }
    jobs
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<CertificationReport, CliError> {
    cfg.validate()?;
    let pool = verify_pool(cfg)?;
    let mut jobs: Vec<Job<'_>> = Vec::new();
    for ch in &pool.singles {
        jobs.extend(single_jobs(cfg, ch));
    }
    for (a, b) in &pool.pairs {
        jobs.extend(pair_jobs(cfg, a, b));
    }
    jobs.extend(convexity_jobs(cfg));
    let records = run_jobs(jobs);
    Ok(CertificationReport::new("verify", cfg.seed, cfg.restarts, cfg.alphas.clone(), records, cfg.timing))
}

pub fn run(cfg: &RunConfig) -> Result<CertificationReport, CliError> {
    match cfg.command {
        Command::Compute => cmd_compute(cfg),
        Command::Verify => cmd_verify(cfg),
    }
}
