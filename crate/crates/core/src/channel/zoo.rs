//! Named test channels and random channel sampling.

use super::CPMap;
use crate::error::{Error, Result};
use crate::operator::{c, random_isometry, Matrix, C64};
use rand::Rng;
use std::collections::BTreeMap;
use std::fmt;

/// The named channel families.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ZooChannel {
    Identity { d: usize },
    TraceMap { d: usize },
    /// `ρ ↦ (1−p)ρ + p·1/2` on a qubit.
    Depolarizing { p: f64 },
    AmplitudeDamping { gamma: f64 },
    /// `ρ ↦ (1−p)ρ + p·ZρZ`.
    Dephasing { p: f64 },
}

fn unit_interval(name: &str, x: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(Error::InvalidParameter(format!("{name} = {x} is outside [0, 1]")))
    }
}

fn dimension(x: f64) -> Result<usize> {
    if x >= 1.0 && x.fract() == 0.0 && x <= 64.0 {
        Ok(x as usize)
    } else {
        Err(Error::InvalidParameter(format!("d = {x} is not a dimension")))
    }
}

impl ZooChannel {
    /// Resolves a family name and its parameters. Missing parameters take
    /// the defaults `d = 2`, `p = 0`, `gamma = 0`.
    pub fn from_name(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let allowed: &[&str] = match name {
            "identity" | "trace_map" => &["d"],
            "depolarizing" | "dephasing" => &["p"],
            "amplitude_damping" => &["gamma"],
            _ => return Err(Error::UnknownChannel(name.to_string())),
        };
        if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::InvalidParameter(format!("{name} takes no parameter `{k}`")));
        }
        let get = |k: &str, default: f64| params.get(k).copied().unwrap_or(default);
        Ok(match name {
            "identity" => Self::Identity { d: dimension(get("d", 2.0))? },
            "trace_map" => Self::TraceMap { d: dimension(get("d", 2.0))? },
            "depolarizing" => Self::Depolarizing { p: unit_interval("p", get("p", 0.0))? },
            "dephasing" => Self::Dephasing { p: unit_interval("p", get("p", 0.0))? },
            _ => Self::AmplitudeDamping { gamma: unit_interval("gamma", get("gamma", 0.0))? },
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Identity { .. } => "identity",
            Self::TraceMap { .. } => "trace_map",
            Self::Depolarizing { .. } => "depolarizing",
            Self::AmplitudeDamping { .. } => "amplitude_damping",
            Self::Dephasing { .. } => "dephasing",
        }
    }

    pub fn params(&self) -> BTreeMap<String, f64> {
        let (k, v) = match *self {
            Self::Identity { d } | Self::TraceMap { d } => ("d", d as f64),
            Self::Depolarizing { p } | Self::Dephasing { p } => ("p", p),
            Self::AmplitudeDamping { gamma } => ("gamma", gamma),
        };
        BTreeMap::from([(k.to_string(), v)])
    }

    pub fn build(&self) -> Result<CPMap> {
        match *self {
            Self::Identity { d } => Ok(identity_channel(d)),
            Self::TraceMap { d } => Ok(trace_map(d)),
            Self::Depolarizing { p } => depolarizing(p),
            Self::AmplitudeDamping { gamma } => amplitude_damping(gamma),
            Self::Dephasing { p } => dephasing(p),
        }
    }
}

impl fmt::Display for ZooChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params: Vec<String> = self.params().iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "{}({})", self.name(), params.join(","))
    }
}

/// The named qubit channels used for certification runs.
pub fn qubit_corpus() -> Vec<ZooChannel> {
    vec![
        ZooChannel::Identity { d: 2 },
        ZooChannel::Depolarizing { p: 0.3 },
        ZooChannel::AmplitudeDamping { gamma: 0.4 },
        ZooChannel::Dephasing { p: 0.5 },
    ]
}

/// All unordered pairs of distinct corpus channels.
pub fn corpus_pairs() -> Vec<(ZooChannel, ZooChannel)> {
    let corpus = qubit_corpus();
    let mut pairs = Vec::new();
    for i in 0..corpus.len() {
        for j in i + 1..corpus.len() {
            pairs.push((corpus[i], corpus[j]));
        }
    }
    pairs
}

pub fn channel_zoo(name: &str, params: &BTreeMap<String, f64>) -> Result<CPMap> {
    ZooChannel::from_name(name, params)?.build()
}

fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Matrix {
    Matrix::from_row_iterator(rows, cols, entries.iter().map(|&x| c(x)))
}

/// Drops Kraus operators that are exactly zero (e.g. at `p = 0`).
fn nonzero(kraus: Vec<Matrix>) -> Vec<Matrix> {
    kraus.into_iter().filter(|k| k.iter().any(|z| *z != C64::new(0.0, 0.0))).collect()
}

pub fn identity_channel(d: usize) -> CPMap {
    CPMap::new(d, d, vec![Matrix::identity(d, d)]).expect("identity is a channel")
}

/// `ρ ↦ tr ρ` onto a one-dimensional output, Kraus operators `⟨i|`.
pub fn trace_map(d: usize) -> CPMap {
    let kraus = (0..d)
        .map(|i| {
            let mut k = Matrix::zeros(1, d);
            k[(0, i)] = c(1.0);
            k
        })
        .collect();
    CPMap::new(d, 1, kraus).expect("trace map is a channel")
}

pub fn depolarizing(p: f64) -> Result<CPMap> {
    let p = unit_interval("p", p)?;
    let a = (1.0 - 0.75 * p).sqrt();
    let b = (0.25 * p).sqrt();
    let x = from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let y = Matrix::from_row_slice(2, 2, &[c(0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), c(0.0)]);
    let z = from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    CPMap::new(2, 2, nonzero(vec![Matrix::identity(2, 2) * c(a), x * c(b), y * c(b), z * c(b)]))
}

pub fn amplitude_damping(gamma: f64) -> Result<CPMap> {
    let g = unit_interval("gamma", gamma)?;
    let k0 = from_real(2, 2, &[1.0, 0.0, 0.0, (1.0 - g).sqrt()]);
    let k1 = from_real(2, 2, &[0.0, g.sqrt(), 0.0, 0.0]);
    CPMap::new(2, 2, nonzero(vec![k0, k1]))
}

pub fn dephasing(p: f64) -> Result<CPMap> {
    let p = unit_interval("p", p)?;
    let k0 = Matrix::identity(2, 2) * c((1.0 - p).sqrt());
    let k1 = from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]) * c(p.sqrt());
    CPMap::new(2, 2, nonzero(vec![k0, k1]))
}

/// Channel from a random isometry `A → B ⊗ E`, Kraus operators sliced along `E`.
pub fn random_channel<R: Rng + ?Sized>(d_in: usize, d_out: usize, d_env: usize, rng: &mut R) -> Result<CPMap> {
    if d_in == 0 || d_out == 0 || d_env == 0 || d_out * d_env < d_in {
        return Err(Error::DimensionMismatch(format!(
            "no isometry from dimension {d_in} into {d_out}x{d_env}"
        )));
    }
    let v = random_isometry(d_in, d_out * d_env, rng)?;
    let kraus = (0..d_env)
        .map(|e| Matrix::from_fn(d_out, d_in, |b, a| v[(b * d_env + e, a)]))
        .collect();
    CPMap::new(d_in, d_out, kraus)
}
