//! Multi-restart optimization over density matrices.
//!
//! States are charted as `ρ = L L† / tr(L L†)` with `L` a full complex
//! `d × d` matrix, i.e. `2d²` real coordinates. Objectives that only provide
//! values are searched with Nelder–Mead; objectives that also provide a
//! gradient with respect to `ρ` are searched with L-BFGS on the same chart.
//!
//! Restart 0 starts at the maximally mixed state (or at a caller-supplied
//! warm start); restart `r > 0` starts at a random chart point drawn from a
//! stream seeded with `seed + r`. Restarts run in parallel and are merged in
//! index order, so the outcome does not depend on scheduling.

use crate::error::{Error, Result};
use crate::operator::{c, complex_gaussian, eigh_matrix, psd_power_eig, DensityMatrix, Matrix, C64};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub restarts: usize,
    /// Objective evaluations allowed per restart.
    pub max_evals: usize,
    pub f_tol: f64,
    pub x_tol: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { restarts: 8, max_evals: 20_000, f_tol: 1e-10, x_tol: 1e-9, seed: 0 }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_evals == 0 {
            return Err(Error::InvalidParameter("restarts and max_evals must be positive".into()));
        }
        if !(self.f_tol > 0.0) || !(self.x_tol > 0.0) {
            return Err(Error::InvalidParameter("f_tol and x_tol must be positive".into()));
        }
        Ok(())
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Budget for a nested inner solve: a warm and a cold start, tolerance one
    /// order tighter.
    pub fn inner(&self) -> Self {
        Self { restarts: 2, f_tol: self.f_tol / 10.0, x_tol: self.x_tol / 10.0, ..self.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

impl Sense {
    fn sign(self) -> f64 {
        match self {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        }
    }

    /// Whether `a` is strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Sense::Minimize => a < b,
            Sense::Maximize => a > b,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OptimizationOutcome {
    pub value: f64,
    pub argument: DensityMatrix,
    pub per_restart_values: Vec<f64>,
    pub per_restart_arguments: Vec<DensityMatrix>,
    /// Whether the best restart stopped on a tolerance rather than the budget.
    pub converged: bool,
    pub evals_used: usize,
}

impl OptimizationOutcome {
    /// Largest difference between finite restart values.
    pub fn restart_spread(&self) -> f64 {
        let finite: Vec<f64> = self.per_restart_values.iter().copied().filter(|v| v.is_finite()).collect();
        let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if finite.is_empty() {
            0.0
        } else {
            hi - lo
        }
    }
}

/// A real function of a density matrix.
///
/// Non-finite values act as a barrier. `gradient` returns `(f, G)` with `G`
/// Hermitian and `f(ρ + dρ) ≈ f(ρ) + Re tr(G dρ)`; implement it together
/// with `has_gradient` to get the gradient-based local search.
pub trait StateObjective {
    fn value(&self, rho: &DensityMatrix) -> f64;

    fn has_gradient(&self) -> bool {
        false
    }

    fn value_and_gradient(&self, rho: &DensityMatrix) -> (f64, Matrix) {
        let _ = rho;
        unimplemented!("objective provides no gradient")
    }
}

impl<F: Fn(&DensityMatrix) -> f64> StateObjective for F {
    fn value(&self, rho: &DensityMatrix) -> f64 {
        self(rho)
    }
}

pub fn optimize_over_states<O>(objective: &O, d: usize, sense: Sense, cfg: &OptimizerConfig) -> Result<OptimizationOutcome>
where
    O: StateObjective + Clone + Send,
{
    optimize_over_states_from(objective, d, sense, cfg, None)
}

/// As [`optimize_over_states`], with restart 0 started at `warm` and restart 1
/// at the maximally mixed state.
pub fn optimize_over_states_from<O>(
    objective: &O,
    d: usize,
    sense: Sense,
    cfg: &OptimizerConfig,
    warm: Option<&DensityMatrix>,
) -> Result<OptimizationOutcome>
where
    O: StateObjective + Clone + Send,
{
    cfg.validate()?;
    if d == 0 {
        return Err(Error::DimensionMismatch("zero-dimensional state space".into()));
    }
    if let Some(w) = warm {
        if w.dim() != d {
            return Err(Error::DimensionMismatch(format!("warm start has dimension {}, expected {d}", w.dim())));
        }
    }
    let starts: Vec<Matrix> = (0..cfg.restarts)
        .map(|r| match (r, warm) {
            (0, Some(w)) => warm_chart_point(w),
            (0, None) | (1, Some(_)) => Matrix::identity(d, d) * c(1.0 / (d as f64).sqrt()),
            _ => {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(r as u64));
                let g = complex_gaussian(d, d, &mut rng);
                let n = g.norm();
                g / c(n)
            }
        })
        .collect();
    let jobs: Vec<(O, Matrix)> = starts.into_iter().map(|l| (objective.clone(), l)).collect();
    let runs: Vec<RestartRun> = jobs
        .into_par_iter()
        .map(|(obj, l0)| run_restart(&obj, l0, sense, cfg))
        .collect();

    let mut best: Option<usize> = None;
    for (i, run) in runs.iter().enumerate() {
        if !run.value.is_finite() {
            continue;
        }
        match best {
            Some(b) if !sense.better(run.value, runs[b].value) => {}
            _ => best = Some(i),
        }
    }
    let best = best.ok_or(Error::InfeasibleObjective)?;
    Ok(OptimizationOutcome {
        value: runs[best].value,
        argument: runs[best].rho.clone(),
        per_restart_values: runs.iter().map(|r| r.value).collect(),
        per_restart_arguments: runs.iter().map(|r| r.rho.clone()).collect(),
        converged: runs[best].converged,
        evals_used: runs.iter().map(|r| r.evals).sum(),
    })
}

struct RestartRun {
    value: f64,
    rho: DensityMatrix,
    converged: bool,
    evals: usize,
}

fn run_restart<O: StateObjective>(obj: &O, l0: Matrix, sense: Sense, cfg: &OptimizerConfig) -> RestartRun {
    let d = l0.nrows();
    let x0 = chart_to_x(&l0);
    let s = sense.sign();
    let local = if obj.has_gradient() {
        let mut fg = |x: &DVector<f64>| {
            let l = x_to_chart(x, d);
            match chart_state(&l) {
                Some((rho, t)) => {
                    let (f, g) = obj.value_and_gradient(&rho);
                    if !f.is_finite() {
                        return (f64::INFINITY, DVector::zeros(x.len()));
                    }
                    (s * f, chart_gradient(&g, &rho, &l, t) * s)
                }
                None => (f64::INFINITY, DVector::zeros(x.len())),
            }
        };
        lbfgs(&mut fg, x0, cfg.max_evals, cfg.f_tol, cfg.x_tol)
    } else {
        let mut f = |x: &DVector<f64>| match chart_state(&x_to_chart(x, d)) {
            Some((rho, _)) => {
                let v = obj.value(&rho);
                if v.is_finite() {
                    s * v
                } else {
                    f64::INFINITY
                }
            }
            None => f64::INFINITY,
        };
        nelder_mead(&mut f, x0, 0.1, cfg.max_evals, cfg.f_tol, cfg.x_tol)
    };
    let rho = chart_state(&x_to_chart(&local.x, d))
        .map(|(r, _)| r)
        .unwrap_or_else(|| DensityMatrix::maximally_mixed(d));
    RestartRun { value: s * local.f, rho, converged: local.converged, evals: local.evals }
}

fn warm_chart_point(w: &DensityMatrix) -> Matrix {
    let d = w.dim();
    let eps = 1e-6;
    let mixed = w.matrix() * c(1.0 - eps) + Matrix::identity(d, d) * c(eps / d as f64);
    psd_power_eig(&eigh_matrix(&mixed), 0.5)
}

fn chart_to_x(l: &Matrix) -> DVector<f64> {
    let n = l.len();
    DVector::from_fn(2 * n, |k, _| {
        let z = l[(k % n / l.ncols(), k % n % l.ncols())];
        if k < n {
            z.re
        } else {
            z.im
        }
    })
}

fn x_to_chart(x: &DVector<f64>, d: usize) -> Matrix {
    let n = d * d;
    Matrix::from_fn(d, d, |i, j| C64::new(x[i * d + j], x[n + i * d + j]))
}

/// `(LL†/t, t)` with `t = tr LL†`, or `None` at the degenerate point `L = 0`.
fn chart_state(l: &Matrix) -> Option<(DensityMatrix, f64)> {
    let t = l.norm_squared();
    if !(t > 1e-300) || !t.is_finite() {
        return None;
    }
    Some((DensityMatrix::from_psd_unnormalized(&(l * l.adjoint())), t))
}

/// Pulls `G` back to the chart: with `G̃ = G − tr(Gρ)·1` and `M = G̃L`, the
/// partial derivatives are `2 Re M / t` and `2 Im M / t`.
fn chart_gradient(g: &Matrix, rho: &DensityMatrix, l: &Matrix, t: f64) -> DVector<f64> {
    let d = l.nrows();
    let shift = (g * rho.matrix()).trace().re;
    let m = (g - Matrix::identity(d, d) * c(shift)) * l;
    let n = d * d;
    DVector::from_fn(2 * n, |k, _| {
        let z = m[((k % n) / d, (k % n) % d)];
        2.0 * if k < n { z.re } else { z.im } / t
    })
}

/// Result of a local search over `R^n`.
#[derive(Clone, Debug)]
pub struct LocalResult {
    pub x: DVector<f64>,
    pub f: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Nelder–Mead with dimension-adaptive coefficients. After each converged
/// pass the simplex is rebuilt around the best vertex; the search stops once
/// a rebuilt pass no longer improves by more than `f_tol`.
pub fn nelder_mead(
    f: &mut dyn FnMut(&DVector<f64>) -> f64,
    x0: DVector<f64>,
    step: f64,
    max_evals: usize,
    f_tol: f64,
    x_tol: f64,
) -> LocalResult {
    let n = x0.len();
    let nf = n as f64;
    let (alpha, gamma, rho, sigma) = if n >= 2 {
        (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf)
    } else {
        (1.0, 2.0, 0.5, 0.5)
    };
    let mut evals = 0usize;
    let mut eval = |x: &DVector<f64>, evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut best_x = x0;
    let mut best_f = eval(&best_x, &mut evals);
    let mut converged = false;
    let scale = step * best_x.amax().max(1e-3);

    for _pass in 0..8 {
        let mut simplex: Vec<(DVector<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((best_x.clone(), best_f));
        for i in 0..n {
            let mut x = best_x.clone();
            x[i] += scale;
            let v = eval(&x, &mut evals);
            simplex.push((x, v));
        }
        let pass_start = best_f;
        let mut pass_converged = false;
        while evals < max_evals {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let (fl, fh) = (simplex[0].1, simplex[n].1);
            let spread = fh - fl;
            let diam = simplex[1..]
                .iter()
                .map(|(x, _)| (x - &simplex[0].0).amax())
                .fold(0.0, f64::max);
            if (spread.is_finite() && spread <= f_tol * (1.0 + fl.abs())) || diam <= x_tol {
                pass_converged = true;
                break;
            }
            let centroid = simplex[..n].iter().fold(DVector::zeros(n), |acc, (x, _)| acc + x) / nf;
            let worst = simplex[n].0.clone();
            let xr = &centroid + (&centroid - &worst) * alpha;
            let fr = eval(&xr, &mut evals);
            if fr < simplex[0].1 {
                let xe = &centroid + (&xr - &centroid) * gamma;
                let fe = eval(&xe, &mut evals);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
            } else {
                let (xc, fc) = if fr < simplex[n].1 {
                    let xc = &centroid + (&xr - &centroid) * rho;
                    let fc = eval(&xc, &mut evals);
                    (xc, fc)
                } else {
                    let xc = &centroid + (&worst - &centroid) * rho;
                    let fc = eval(&xc, &mut evals);
                    (xc, fc)
                };
                if fc < fr.min(simplex[n].1) {
                    simplex[n] = (xc, fc);
                } else {
                    let x_best = simplex[0].0.clone();
                    for vertex in simplex.iter_mut().skip(1) {
                        let x = &x_best + (&vertex.0 - &x_best) * sigma;
                        let v = eval(&x, &mut evals);
                        *vertex = (x, v);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[0].1 <= best_f {
            best_x = simplex[0].0.clone();
            best_f = simplex[0].1;
        }
        if !pass_converged {
            break;
        }
        if pass_start - best_f <= f_tol * (1.0 + best_f.abs()) {
            converged = true;
            break;
        }
    }
    LocalResult { x: best_x, f: best_f, evals, converged }
}

/// L-BFGS (memory 10) with Armijo backtracking. Non-finite values are
/// treated as `+∞` and rejected by the line search.
pub fn lbfgs(
    fg: &mut dyn FnMut(&DVector<f64>) -> (f64, DVector<f64>),
    x0: DVector<f64>,
    max_evals: usize,
    f_tol: f64,
    x_tol: f64,
) -> LocalResult {
    const MEMORY: usize = 10;
    const ARMIJO: f64 = 1e-4;
    let mut evals = 1usize;
    let mut x = x0;
    let (mut f, mut g) = fg(&x);
    if !f.is_finite() {
        return LocalResult { x, f: f64::INFINITY, evals, converged: false };
    }
    let mut s_hist: Vec<DVector<f64>> = Vec::new();
    let mut y_hist: Vec<DVector<f64>> = Vec::new();
    let mut small_steps = 0;
    let mut converged = false;

    while evals < max_evals {
        if g.amax() <= 1e-12 * (1.0 + f.abs()) {
            converged = true;
            break;
        }
        // Two-loop recursion.
        let mut q = g.clone();
        let k = s_hist.len();
        let mut a = vec![0.0; k];
        for i in (0..k).rev() {
            let r = 1.0 / y_hist[i].dot(&s_hist[i]);
            a[i] = r * s_hist[i].dot(&q);
            q -= &y_hist[i] * a[i];
        }
        if k > 0 {
            q *= s_hist[k - 1].dot(&y_hist[k - 1]) / y_hist[k - 1].norm_squared();
        } else {
            q *= 1.0 / g.norm().max(1e-300);
        }
        for i in 0..k {
            let r = 1.0 / y_hist[i].dot(&s_hist[i]);
            let b = r * y_hist[i].dot(&q);
            q += &s_hist[i] * (a[i] - b);
        }
        let mut dir = -q;
        let mut slope = g.dot(&dir);
        if !(slope < 0.0) {
            s_hist.clear();
            y_hist.clear();
            dir = -&g / g.norm();
            slope = g.dot(&dir);
        }

        let mut t = 1.0;
        let mut accepted = None;
        while evals < max_evals {
            let xn = &x + &dir * t;
            let (fnew, gnew) = fg(&xn);
            evals += 1;
            if fnew.is_finite() && fnew <= f + ARMIJO * t * slope {
                accepted = Some((xn, fnew, gnew));
                break;
            }
            t *= 0.5;
            if t * dir.amax() <= 1e-16 * (1.0 + x.amax()) {
                break;
            }
        }
        let Some((xn, fnew, gnew)) = accepted else {
            // No descent possible along the quasi-Newton or gradient direction:
            // the objective is flat to round-off (or inexact) here.
            if s_hist.is_empty() {
                converged = true;
                break;
            }
            s_hist.clear();
            y_hist.clear();
            continue;
        };
        let s = &xn - &x;
        let y = &gnew - &g;
        let decrease = f - fnew;
        x = xn;
        f = fnew;
        g = gnew;
        if y.dot(&s) > 1e-12 * s.norm() * y.norm() {
            if s_hist.len() == MEMORY {
                s_hist.remove(0);
                y_hist.remove(0);
            }
            s_hist.push(s.clone());
            y_hist.push(y);
        }
        if decrease <= f_tol * (1.0 + f.abs()) || s.amax() <= x_tol * (1.0 + x.amax()) {
            small_steps += 1;
            if small_steps >= 3 {
                converged = true;
                break;
            }
        } else {
            small_steps = 0;
        }
    }
    LocalResult { x, f, evals, converged }
}
