//! Experiment configuration documents (TOML).
//!
//! ```toml
//! mode = "certify"             # construct | verify | certify | channel-bound
//! party_order = [0, 1]
//! conjugate_basis = "fourier"  # or a d x d phase table in radians
//! epsilon = 0.05
//! delta = 0.01
//! seed = 7
//!
//! [target]
//! generator = "bell"           # bell | ghz | w | maximally-entangled | random | inline
//!
//! [noise]
//! name = "depolarizing"
//! p = 0.2
//! ```
//!
//! Complex amplitudes are `[re, im]` pairs. Kraus files hold
//! `kraus = [[[[re, im], ...], ...], ...]` (operators, rows, entries) as TOML
//! or, with a `.json` extension, JSON.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::channels::{builtin_noise, KrausChannel, NoiseKind};
use crate::error::{Error, Result};
use crate::linalg::{Ket, C64};
use crate::random::random_ket;
use crate::stabilizer::{custom_conjugate_basis, ConjugateBasis};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Construct,
    Verify,
    Certify,
    ChannelBound,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Construct => "construct",
            Mode::Verify => "verify",
            Mode::Certify => "certify",
            Mode::ChannelBound => "channel-bound",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "construct" => Ok(Mode::Construct),
            "verify" => Ok(Mode::Verify),
            "certify" => Ok(Mode::Certify),
            "channel-bound" => Ok(Mode::ChannelBound),
            other => Err(Error::Parse(format!("unknown mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    Bell,
    Ghz,
    W,
    MaximallyEntangled,
    Random,
    Inline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub generator: Generator,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parties: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BasisSpec {
    Named(String),
    Table(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Factor the channel acts on; the whole space when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus_file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub party_order: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conjugate_basis: Option<BasisSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    pub target: TargetSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig =
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string().trim().replace('\n', " ")))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn emit_config(cfg: &ExperimentConfig) -> String {
    toml::to_string(cfg).expect("configs serialize")
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

fn computational(dims: Vec<usize>, entries: &[(usize, f64)]) -> Result<Ket> {
    let n: usize = dims.iter().product();
    let mut v = vec![C64::new(0.0, 0.0); n];
    for &(i, a) in entries {
        v[i] = C64::new(a, 0.0);
    }
    Ket::normalized(v, dims)
}

impl ExperimentConfig {
    /// Structural checks that do not depend on the mode, plus the mode's own
    /// requirements when a mode is set.
    pub fn validate(&self) -> Result<()> {
        let dims = self.target_dims()?;
        if let Some(order) = &self.party_order {
            crate::linalg::check_order(order, dims.len()).map_err(|e| invalid(e.to_string()))?;
        }
        if let Some(basis) = &self.conjugate_basis {
            let b = self.conjugate_basis_for(&dims)?;
            if let (BasisSpec::Table(_), Some(b)) = (basis, b) {
                let first = self.party_order.as_ref().map_or(0, |o| o[0]);
                if b.dim() != dims[first] {
                    return Err(invalid(format!(
                        "conjugate_basis has dimension {}, the first party in the chain has {}",
                        b.dim(),
                        dims[first]
                    )));
                }
            }
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0 && e < 1.0) {
                return Err(invalid(format!("epsilon must lie in (0,1), got {e}")));
            }
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d < 1.0) {
                return Err(invalid(format!("delta must lie in (0,1), got {d}")));
            }
        }
        if let Some(noise) = &self.noise {
            match (&noise.name, &noise.kraus_file) {
                (Some(_), Some(_)) => return Err(invalid("noise takes either name or kraus_file, not both")),
                (None, None) => return Err(invalid("noise needs a name or a kraus_file")),
                (Some(name), None) => {
                    let kind: NoiseKind = name.parse().map_err(|e: Error| invalid(e.to_string()))?;
                    match noise.p {
                        Some(p) if (0.0..=1.0).contains(&p) => {}
                        None if kind == NoiseKind::Identity => {}
                        Some(p) => return Err(invalid(format!("noise.p must lie in [0,1], got {p}"))),
                        None => return Err(invalid("noise.p is required for a named noise model")),
                    }
                }
                (None, Some(_)) => {}
            }
            if let Some(f) = noise.factor {
                if f >= dims.len() {
                    return Err(invalid(format!("noise.factor {f} out of range for {} parties", dims.len())));
                }
            }
        }
        if let Some(mode) = self.mode {
            self.validate_for(mode)?;
        }
        Ok(())
    }

    /// Fields a mode cannot run without.
    pub fn validate_for(&self, mode: Mode) -> Result<()> {
        match mode {
            Mode::Construct | Mode::Verify => Ok(()),
            Mode::Certify | Mode::ChannelBound => {
                for (name, present) in [
                    ("epsilon", self.epsilon.is_some()),
                    ("delta", self.delta.is_some()),
                    ("seed", self.seed.is_some()),
                ] {
                    if !present {
                        return Err(invalid(format!("{mode} mode requires '{name}'")));
                    }
                }
                if mode == Mode::ChannelBound {
                    if self.noise.is_none() {
                        return Err(invalid("channel-bound mode requires a [noise] channel"));
                    }
                    if self.target_dims()?.len() != 2 {
                        return Err(invalid("channel-bound mode requires a bipartite target"));
                    }
                }
                Ok(())
            }
        }
    }

    /// Factor dimensions implied by the target specification.
    pub fn target_dims(&self) -> Result<Vec<usize>> {
        let t = &self.target;
        let generated = match t.generator {
            Generator::Bell => Some(vec![2, 2]),
            Generator::Ghz => Some(vec![t.dim.unwrap_or(2); t.parties.unwrap_or(3)]),
            Generator::W => Some(vec![t.dim.unwrap_or(2); t.parties.unwrap_or(3)]),
            Generator::MaximallyEntangled => Some(vec![t.dim.unwrap_or(2); 2]),
            Generator::Random => match (t.parties, t.dim) {
                (Some(n), Some(d)) => Some(vec![d; n]),
                (None, None) => None,
                _ => return Err(invalid("random target takes both parties and dim, or neither (with top-level dims)")),
            },
            Generator::Inline => None,
        };
        let dims = match (generated, &self.dims) {
            (Some(g), Some(d)) if &g != d => {
                return Err(invalid(format!("dims {d:?} disagree with the generator's {g:?}")))
            }
            (Some(g), _) => g,
            (None, Some(d)) => d.clone(),
            (None, None) => return Err(invalid("dims are required for this target")),
        };
        if dims.len() < 2 {
            return Err(invalid(format!("a target needs at least two parties, got dims {dims:?}")));
        }
        if dims.contains(&0) {
            return Err(invalid(format!("zero-dimensional factor in {dims:?}")));
        }
        if t.generator == Generator::W && dims.iter().any(|&d| d != 2) {
            return Err(invalid("the W generator is defined for qubits"));
        }
        if t.generator == Generator::Inline {
            let n: usize = dims.iter().product();
            match &t.amplitudes {
                Some(a) if a.len() == n => {}
                Some(a) => return Err(invalid(format!("{} amplitudes given for dims {dims:?}", a.len()))),
                None => return Err(invalid("inline target requires amplitudes")),
            }
        } else if t.amplitudes.is_some() {
            return Err(invalid("amplitudes are only read for the inline generator"));
        }
        if t.generator == Generator::Random && t.seed.is_none() {
            return Err(invalid("random target requires target.seed"));
        }
        Ok(dims)
    }

    /// Builds the target state, refusing total dimensions above `dim_cap`.
    pub fn target_ket(&self, dim_cap: usize) -> Result<Ket> {
        let dims = self.target_dims()?;
        let total = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).unwrap_or(usize::MAX);
        if total > dim_cap {
            return Err(Error::DimensionCap { dim: total, cap: dim_cap });
        }
        let t = &self.target;
        match t.generator {
            Generator::Bell => computational(dims, &[(0, 1.0), (3, 1.0)]),
            Generator::Ghz | Generator::MaximallyEntangled => {
                let d = dims[0];
                // |k k ... k> has flat index k * (1 + d + d^2 + ...).
                let stride: usize = (0..dims.len()).map(|i| d.pow(i as u32)).sum();
                let entries: Vec<_> = (0..d).map(|k| (k * stride, 1.0)).collect();
                computational(dims, &entries)
            }
            Generator::W => {
                let n = dims.len();
                let entries: Vec<_> = (0..n).map(|k| (1usize << (n - 1 - k), 1.0)).collect();
                computational(dims, &entries)
            }
            Generator::Random => {
                let mut rng = ChaCha20Rng::seed_from_u64(t.seed.expect("validated"));
                Ok(random_ket(&dims, &mut rng))
            }
            Generator::Inline => {
                let amps: Vec<C64> =
                    t.amplitudes.as_ref().expect("validated").iter().map(|&[re, im]| C64::new(re, im)).collect();
                let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                if !(norm > 0.0 && norm.is_finite()) {
                    return Err(invalid("inline amplitudes have zero or non-finite norm"));
                }
                if (norm - 1.0).abs() > tol::LOAD_NORM_WARN {
                    log::warn!("inline amplitudes have norm {norm}; normalizing");
                }
                Ket::normalized(amps, dims)
            }
        }
    }

    pub fn order(&self, parties: usize) -> Vec<usize> {
        self.party_order.clone().unwrap_or_else(|| (0..parties).collect())
    }

    /// The conjugate basis of the first party in the chain; `None` means Fourier.
    pub fn conjugate_basis_for(&self, _dims: &[usize]) -> Result<Option<ConjugateBasis>> {
        match &self.conjugate_basis {
            None => Ok(None),
            Some(BasisSpec::Named(name)) if name == "fourier" => Ok(None),
            Some(BasisSpec::Named(name)) => Err(invalid(format!("unknown conjugate basis '{name}'"))),
            Some(BasisSpec::Table(t)) => custom_conjugate_basis(t).map(Some).map_err(|e| invalid(e.to_string())),
        }
    }

    /// The configured channel for a space of dimension `d`; relative Kraus
    /// file paths are resolved against `base`.
    pub fn channel(&self, d: usize, base: &Path) -> Result<Option<KrausChannel>> {
        let Some(noise) = &self.noise else { return Ok(None) };
        if let Some(file) = &noise.kraus_file {
            let path = if file.is_absolute() { file.clone() } else { base.join(file) };
            let chan = load_kraus_file(&path)?;
            if chan.dim_in() != d || chan.dim_out() != d {
                return Err(invalid(format!(
                    "Kraus file maps {} to {}, expected dimension {d}",
                    chan.dim_in(),
                    chan.dim_out()
                )));
            }
            return Ok(Some(chan));
        }
        let kind: NoiseKind = noise.name.as_deref().expect("validated").parse()?;
        if kind == NoiseKind::Identity {
            return Ok(Some(KrausChannel::identity(d)));
        }
        builtin_noise(kind, d, noise.p.expect("validated")).map(Some)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KrausFile {
    kraus: Vec<Vec<Vec<[f64; 2]>>>,
}

/// Parses a Kraus document: TOML, or JSON when `json` is set.
pub fn parse_kraus(text: &str, json: bool) -> Result<KrausChannel> {
    let file: KrausFile = if json {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?
    } else {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string().trim().replace('\n', " ")))?
    };
    let mut ops = Vec::with_capacity(file.kraus.len());
    for (k, rows) in file.kraus.iter().enumerate() {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || rows.iter().any(|row| row.len() != c) {
            return Err(invalid(format!("Kraus operator {k} is not a rectangular matrix")));
        }
        ops.push(DMatrix::from_fn(r, c, |i, j| C64::new(rows[i][j][0], rows[i][j][1])));
    }
    KrausChannel::new(ops)
}

pub fn load_kraus_file(path: &Path) -> Result<KrausChannel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_kraus(&text, path.extension().is_some_and(|e| e == "json"))
}
