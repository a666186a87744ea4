//! Channel descriptions read from JSON files or the command line.
//!
//! A channel file holds either an explicit Kraus list
//!
//! ```json
//! {"in_dim": 2, "out_dim": 2, "kraus": [[[[1, 0], [0, 0]], [[0, 0], [1, 0]]]]}
//! ```
//!
//! where each Kraus operator is an `out_dim × in_dim` array of rows and each
//! entry is `[re, im]`, or a named channel
//!
//! ```json
//! {"zoo": "depolarizing", "params": {"p": 0.3}}
//! ```

use crate::CliError;
use qcbnorm_core::channel::{CPMap, ZooChannel};
use qcbnorm_core::operator::{Matrix, C64};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KrausFile {
    in_dim: usize,
    out_dim: usize,
    kraus: Vec<Vec<Vec<[f64; 2]>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ZooFile {
    zoo: String,
    #[serde(default)]
    params: BTreeMap<String, f64>,
}

/// Where a channel comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum ChannelSpec {
    File(PathBuf),
    Zoo(ZooChannel),
}

/// A resolved channel with the label used in reports.
#[derive(Clone, Debug)]
pub struct LoadedChannel {
    pub label: String,
    pub map: CPMap,
}

fn parse_error(path: &Path, msg: impl Into<String>) -> CliError {
    CliError::Parse { path: path.display().to_string(), msg: msg.into() }
}

/// Parses channel JSON; `path` only labels errors.
pub fn parse_channel_json(text: &str, path: &Path) -> Result<CPMap, CliError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| parse_error(path, e.to_string()))?;
    let is_zoo = value.as_object().map(|o| o.contains_key("zoo")).unwrap_or(false);
    if is_zoo {
        let z: ZooFile = serde_json::from_str(text).map_err(|e| parse_error(path, e.to_string()))?;
        let zoo = ZooChannel::from_name(&z.zoo, &z.params).map_err(|e| parse_error(path, format!("key `zoo`: {e}")))?;
        return zoo.build().map_err(|e| parse_error(path, e.to_string()));
    }
    let k: KrausFile = serde_json::from_str(text).map_err(|e| parse_error(path, e.to_string()))?;
    if k.kraus.is_empty() {
        return Err(parse_error(path, "key `kraus`: at least one operator is required"));
    }
    let mut ops = Vec::with_capacity(k.kraus.len());
    for (i, rows) in k.kraus.iter().enumerate() {
        if rows.len() != k.out_dim {
            return Err(parse_error(path, format!("key `kraus[{i}]`: {} rows, expected out_dim = {}", rows.len(), k.out_dim)));
        }
        if let Some((r, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != k.in_dim) {
            return Err(parse_error(path, format!("key `kraus[{i}][{r}]`: {} entries, expected in_dim = {}", row.len(), k.in_dim)));
        }
        if rows.iter().flatten().flatten().any(|x| !x.is_finite()) {
            return Err(parse_error(path, format!("key `kraus[{i}]`: non-finite entry")));
        }
        ops.push(Matrix::from_fn(k.out_dim, k.in_dim, |r, c| C64::new(rows[r][c][0], rows[r][c][1])));
    }
    CPMap::new(k.in_dim, k.out_dim, ops).map_err(|e| parse_error(path, e.to_string()))
}

/// Serializes a map in the Kraus-list format.
pub fn channel_to_json(map: &CPMap) -> serde_json::Value {
    let kraus: Vec<Vec<Vec<[f64; 2]>>> = map
        .kraus()
        .iter()
        .map(|k| (0..k.nrows()).map(|r| (0..k.ncols()).map(|c| [k[(r, c)].re, k[(r, c)].im]).collect()).collect())
        .collect();
    serde_json::json!({"in_dim": map.in_dim(), "out_dim": map.out_dim(), "kraus": kraus})
}

/// Parses `K=V` pairs.
pub fn parse_params(items: &[String]) -> Result<BTreeMap<String, f64>, CliError> {
    let mut out = BTreeMap::new();
    for item in items {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("parameter `{item}` is not of the form K=V")))?;
        let x: f64 = v
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("parameter `{k}` has non-numeric value `{v}`")))?;
        if out.insert(k.trim().to_string(), x).is_some() {
            return Err(CliError::Input(format!("parameter `{k}` given twice")));
        }
    }
    Ok(out)
}

impl ChannelSpec {
    pub fn zoo(name: &str, params: &BTreeMap<String, f64>) -> Result<Self, CliError> {
        ZooChannel::from_name(name, params).map(Self::Zoo).map_err(|e| CliError::Input(e.to_string()))
    }

    pub fn load(&self) -> Result<LoadedChannel, CliError> {
        match self {
            Self::Zoo(z) => Ok(LoadedChannel { label: z.to_string(), map: z.build().map_err(|e| CliError::Input(e.to_string()))? }),
            Self::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| parse_error(path, e.to_string()))?;
                let map = parse_channel_json(&text, path)?;
                let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string());
                Ok(LoadedChannel { label: format!("file:{label}"), map })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> PathBuf {
        PathBuf::from("test.json")
    }

    #[test]
    fn kraus_round_trip() {
        let map = qcbnorm_core::channel::amplitude_damping(0.3).unwrap();
        let text = channel_to_json(&map).to_string();
        let back = parse_channel_json(&text, &p()).unwrap();
        assert_eq!(back.kraus(), map.kraus());
        assert!(back.is_trace_preserving());
    }

    #[test]
    fn zoo_file() {
        let m = parse_channel_json(r#"{"zoo": "dephasing", "params": {"p": 0.5}}"#, &p()).unwrap();
        assert_eq!(m.num_kraus(), 2);
        let m = parse_channel_json(r#"{"zoo": "identity"}"#, &p()).unwrap();
        assert_eq!(m.in_dim(), 2);
    }

    #[test]
    fn errors_name_their_location() {
        let e = parse_channel_json("{\"in_dim\": 2,\n \"out_dim\": }", &p()).unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
        let e = parse_channel_json(r#"{"in_dim": 2, "kraus": []}"#, &p()).unwrap_err().to_string();
        assert!(e.contains("out_dim"), "{e}");
        let e = parse_channel_json(r#"{"in_dim": 2, "out_dim": 1, "kraus": [[[[1,0]]]]}"#, &p()).unwrap_err().to_string();
        assert!(e.contains("kraus[0][0]"), "{e}");
        let e = parse_channel_json(r#"{"zoo": "depolarizing", "params": {"gamma": 0.1}}"#, &p()).unwrap_err().to_string();
        assert!(e.contains("gamma"), "{e}");
        let e = parse_channel_json(r#"{"zoo": "nope"}"#, &p()).unwrap_err().to_string();
        assert!(e.contains("nope"), "{e}");
    }

    #[test]
    fn params() {
        let m = parse_params(&["p=0.25".into(), " d = 3".into()]).unwrap();
        assert_eq!(m["p"], 0.25);
        assert_eq!(m["d"], 3.0);
        assert!(parse_params(&["p".into()]).is_err());
        assert!(parse_params(&["p=x".into()]).is_err());
        assert!(parse_params(&["p=1".into(), "p=2".into()]).is_err());
    }
}
