//! JSON inputs, atomic output files and run manifests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CliError;
use crate::channels::{
    channel_from_kraus, collective_phase_flip, erasure_mac, QuantumChannel, CHANNEL_TOL,
};
use crate::linalg::{c, ComplexMatrix, SubsystemLayout};
use crate::regions::RateRegion;
use crate::states::{density_from_matrix, DensityMatrix, STATE_TOL};

/// Complex entry as `[re, im]`.
pub type JsonComplex = [f64; 2];
/// Row-major matrix of `[re, im]` pairs.
pub type JsonMatrix = Vec<Vec<JsonComplex>>;

/// Channel description: explicit Kraus operators or a named channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum ChannelSpecFile {
    Kraus {
        name: String,
        din: Vec<usize>,
        dout: Vec<usize>,
        kraus: Vec<JsonMatrix>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        input_labels: Option<Vec<String>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        output_labels: Option<Vec<String>>,
    },
    Builtin {
        builtin: String,
        #[serde(default)]
        params: serde_json::Map<String, serde_json::Value>,
    },
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn default_labels(n: usize, base: &[&str]) -> Vec<String> {
    if n <= base.len() {
        base[..n].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=n).map(|i| format!("{}{i}", base[0])).collect()
    }
}

pub fn matrix_from_json(m: &JsonMatrix, what: &str) -> Result<ComplexMatrix, CliError> {
    let rows = m.len();
    if rows == 0 {
        return Err(invalid(format!("{what}: empty matrix")));
    }
    let cols = m[0].len();
    if let Some((i, r)) = m.iter().enumerate().find(|(_, r)| r.len() != cols) {
        return Err(invalid(format!(
            "{what}: row {i} has {} entries, expected {cols}",
            r.len()
        )));
    }
    Ok(ComplexMatrix::from_fn(rows, cols, |i, j| {
        c(m[i][j][0], m[i][j][1])
    }))
}

pub fn matrix_to_json(m: &ComplexMatrix) -> JsonMatrix {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

fn param_usize(
    params: &serde_json::Map<String, serde_json::Value>,
    key: &str,
) -> Result<usize, CliError> {
    params
        .get(key)
        .and_then(|v| v.as_u64())
        .map(|v| v as usize)
        .ok_or_else(|| invalid(format!("params.{key}: expected a nonnegative integer")))
}

fn param_f64(
    params: &serde_json::Map<String, serde_json::Value>,
    key: &str,
) -> Result<f64, CliError> {
    params
        .get(key)
        .and_then(|v| v.as_f64())
        .ok_or_else(|| invalid(format!("params.{key}: expected a number")))
}

pub fn builtin_channel(
    name: &str,
    d: Option<usize>,
    p: Option<f64>,
) -> Result<QuantumChannel, CliError> {
    match name {
        "erasure" => Ok(erasure_mac(d.unwrap_or(2))?),
        "phase_flip" => Ok(collective_phase_flip(p.unwrap_or(0.1))?),
        other => Err(invalid(format!(
            "builtin: unknown channel `{other}` (expected erasure or phase_flip)"
        ))),
    }
}

impl ChannelSpecFile {
    pub fn into_channel(self) -> Result<QuantumChannel, CliError> {
        match self {
            ChannelSpecFile::Builtin { builtin, params } => match builtin.as_str() {
                "erasure" => builtin_channel("erasure", Some(param_usize(&params, "d")?), None),
                "phase_flip" => builtin_channel("phase_flip", None, Some(param_f64(&params, "p")?)),
                other => builtin_channel(other, None, None),
            },
            ChannelSpecFile::Kraus {
                name,
                din,
                dout,
                kraus,
                input_labels,
                output_labels,
            } => {
                if din.is_empty() || dout.is_empty() {
                    return Err(invalid(format!("{name}: din and dout must be nonempty")));
                }
                let in_labels =
                    input_labels.unwrap_or_else(|| default_labels(din.len(), &["A'", "B'"]));
                let out_labels =
                    output_labels.unwrap_or_else(|| default_labels(dout.len(), &["C"]));
                let in_layout = SubsystemLayout::new(din.clone(), in_labels)
                    .map_err(|e| invalid(format!("din: {e}")))?;
                let out_layout = SubsystemLayout::new(dout.clone(), out_labels)
                    .map_err(|e| invalid(format!("dout: {e}")))?;
                if kraus.is_empty() {
                    return Err(invalid("kraus: at least one operator required"));
                }
                let (rows, cols) = (out_layout.total_dim(), in_layout.total_dim());
                let mut ops = Vec::with_capacity(kraus.len());
                for (k, m) in kraus.iter().enumerate() {
                    let op = matrix_from_json(m, &format!("kraus[{k}]"))?;
                    if op.shape() != (rows, cols) {
                        return Err(invalid(format!(
                            "kraus[{k}]: shape {}x{}, expected {rows}x{cols} (prod dout x prod din)",
                            op.nrows(),
                            op.ncols()
                        )));
                    }
                    ops.push(op);
                }
                channel_from_kraus(ops, in_layout, out_layout, CHANNEL_TOL)
                    .map_err(|e| invalid(format!("kraus: {e}")))
            }
        }
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| {
        // serde_json already appends "at line L column C" when it knows
        invalid(format!("{}: {e}", path.display()))
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KrausFields {
    name: String,
    din: Vec<usize>,
    dout: Vec<usize>,
    kraus: Vec<JsonMatrix>,
    #[serde(default)]
    input_labels: Option<Vec<String>>,
    #[serde(default)]
    output_labels: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BuiltinFields {
    builtin: String,
    #[serde(default)]
    params: serde_json::Map<String, serde_json::Value>,
}

/// Parses the variant selected by the presence of `builtin`, so serde
/// errors name the offending field instead of "no variant matched".
pub fn parse_channel_spec(path: &Path, text: &str) -> Result<ChannelSpecFile, CliError> {
    let value: serde_json::Value = parse_json(path, text)?;
    if value.get("builtin").is_some() {
        let b: BuiltinFields = parse_json(path, text)?;
        return Ok(ChannelSpecFile::Builtin {
            builtin: b.builtin,
            params: b.params,
        });
    }
    for field in ["name", "din", "dout", "kraus"] {
        if value.get(field).is_none() {
            return Err(invalid(format!(
                "{}: missing field `{field}`",
                path.display()
            )));
        }
    }
    let k: KrausFields = parse_json(path, text)?;
    Ok(ChannelSpecFile::Kraus {
        name: k.name,
        din: k.din,
        dout: k.dout,
        kraus: k.kraus,
        input_labels: k.input_labels,
        output_labels: k.output_labels,
    })
}

pub fn load_channel(path: &Path) -> Result<QuantumChannel, CliError> {
    let text = read_text(path)?;
    parse_channel_spec(path, &text)?
        .into_channel()
        .map_err(|e| invalid(format!("{}: {e}", path.display())))
}

/// A state file: a bare matrix, or `{matrix, dims?, labels?}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum StateFile {
    Bare(JsonMatrix),
    Full {
        matrix: JsonMatrix,
        #[serde(default)]
        dims: Option<Vec<usize>>,
        #[serde(default)]
        labels: Option<Vec<String>>,
    },
}

pub fn load_state(path: &Path) -> Result<DensityMatrix, CliError> {
    let text = read_text(path)?;
    let file: StateFile = parse_json(path, &text)?;
    let (m, dims, labels) = match file {
        StateFile::Bare(m) => (m, None, None),
        StateFile::Full {
            matrix,
            dims,
            labels,
        } => (matrix, dims, labels),
    };
    let m = matrix_from_json(&m, &path.display().to_string())?;
    let dims = dims.unwrap_or_else(|| vec![m.nrows()]);
    let labels = labels.unwrap_or_else(|| {
        if dims.len() == 1 {
            vec!["S".to_string()]
        } else {
            default_labels(dims.len(), &["A", "B", "C", "D"])
        }
    });
    let layout = SubsystemLayout::new(dims, labels)
        .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    density_from_matrix(m, layout, STATE_TOL)
        .map_err(|e| invalid(format!("{}: {e}", path.display())))
}

pub fn load_region(path: &Path) -> Result<RateRegion, CliError> {
    let text = read_text(path)?;
    parse_json(path, &text)
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<String, CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    tmp.write_all(bytes)
        .and_then(|_| tmp.flush())
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    tmp.persist(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(sha256_hex(bytes))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// `path` with its extension replaced (or appended).
pub fn sibling(path: &Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputHash {
    pub path: String,
    pub sha256: String,
}

/// Record of one invocation. Everything except `wall_time_seconds` is a
/// function of the inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub wall_time_seconds: f64,
    pub outputs: Vec<OutputHash>,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value, seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            config,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_seconds: 0.0,
            outputs: Vec::new(),
        }
    }

    pub fn record(&mut self, path: &Path, sha256: String) {
        self.outputs.push(OutputHash {
            path: path.display().to_string(),
            sha256,
        });
    }

    /// Written next to the primary output as `<stem>.manifest.json`.
    pub fn write_beside(&self, primary: &Path) -> Result<PathBuf, CliError> {
        let path = sibling(primary, "manifest.json");
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        write_atomic(&path, text.as_bytes())?;
        Ok(path)
    }
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
    text.push('\n');
    text.into_bytes()
}

pub fn frontier_csv(region: &RateRegion) -> String {
    let mut out = String::from("rate1,rate2,generator_id\n");
    for (p, g) in region.frontier.iter().zip(&region.frontier_generators) {
        out.push_str(&format!("{},{},{}\n", p.0, p.1, g));
    }
    out
}
