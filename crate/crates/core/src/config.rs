//! Run configuration: a single JSON document with `symbol`, `speed`, `quad`,
//! `bounds`, `sim` and `output` blocks. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bounds::BoundsConfig;
use crate::error::{Error, Result};
use crate::quad::QuadConfig;
use crate::sim::{InitialLaw, ReturnTimeConfig, SimConfig};
use crate::speed::{SpeedFunction, TabulatedSpeed};
use crate::symbol::{CharacteristicExponent, TabulatedSymbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolKind {
    Stable,
    Brownian,
    StableMixture,
    CauchyPlusBrownian,
    Tabulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolSpec {
    pub family: SymbolKind,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    /// CSV `(ξ, ψ(ξ))`, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_exponent: Option<f64>,
    /// Free-form description of the Lévy measure, carried into reports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levy_measure: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeedKind {
    ExpGrowth,
    PolyGrowth,
    Constant,
    Tabulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeedSpec {
    /// Optional when `table` is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<SpeedKind>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    /// CSV `(x, a(x))`, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_power: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory; `--out` takes precedence.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub symbol: SymbolSpec,
    pub speed: SpeedSpec,
    #[serde(default)]
    pub quad: QuadConfig,
    #[serde(default)]
    pub bounds: BoundsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    /// Directory that relative table paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Names accepted by `--preset`.
pub const PRESETS: [&str; 4] = ["stable", "brownian-exp", "stable-mixture", "cauchy-brownian"];

fn take(params: &BTreeMap<String, f64>, allowed: &[&str], what: &str) -> Result<()> {
    if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::Config(format!(
            "unknown {what} parameter `{k}` (expected one of: {})",
            if allowed.is_empty() { "none".to_string() } else { allowed.join(", ") }
        )));
    }
    Ok(())
}

fn need(params: &BTreeMap<String, f64>, key: &str, what: &str) -> Result<f64> {
    params
        .get(key)
        .copied()
        .ok_or_else(|| Error::Config(format!("{what} requires parameter `{key}`")))
}

impl SymbolSpec {
    pub fn build(&self, base_dir: &Path) -> Result<CharacteristicExponent> {
        let p = &self.params;
        if self.family != SymbolKind::Tabulated && (self.table.is_some() || self.tail_exponent.is_some()) {
            return Err(Error::Config("symbol.table and symbol.tail_exponent need family `tabulated`".into()));
        }
        let psi = match self.family {
            SymbolKind::Stable => {
                take(p, &["alpha"], "stable")?;
                CharacteristicExponent::stable(need(p, "alpha", "stable")?)?
            }
            SymbolKind::Brownian => {
                take(p, &["sigma2"], "brownian")?;
                CharacteristicExponent::brownian(p.get("sigma2").copied().unwrap_or(1.0))?
            }
            SymbolKind::StableMixture => {
                take(p, &["c1", "c2", "alpha"], "stable_mixture")?;
                CharacteristicExponent::stable_mixture(
                    need(p, "c1", "stable_mixture")?,
                    need(p, "c2", "stable_mixture")?,
                    need(p, "alpha", "stable_mixture")?,
                )?
            }
            SymbolKind::CauchyPlusBrownian => {
                take(p, &[], "cauchy_plus_brownian")?;
                CharacteristicExponent::cauchy_plus_brownian()
            }
            SymbolKind::Tabulated => {
                take(p, &[], "tabulated")?;
                let table = self
                    .table
                    .as_ref()
                    .ok_or_else(|| Error::Config("tabulated symbol requires symbol.table".into()))?;
                CharacteristicExponent::tabulated(TabulatedSymbol::from_csv(&base_dir.join(table), self.tail_exponent)?)
            }
        };
        Ok(match &self.levy_measure {
            Some(note) => psi.with_levy_measure_note(note.clone()),
            None => psi,
        })
    }
}

impl SpeedSpec {
    pub fn build(&self, base_dir: &Path) -> Result<SpeedFunction> {
        let p = &self.params;
        let family = match (self.family, &self.table) {
            (Some(f), _) => f,
            (None, Some(_)) => SpeedKind::Tabulated,
            (None, None) => return Err(Error::Config("speed needs `family` or `table`".into())),
        };
        if family != SpeedKind::Tabulated && (self.table.is_some() || self.tail_power.is_some()) {
            return Err(Error::Config("speed.table and speed.tail_power need family `tabulated`".into()));
        }
        match family {
            SpeedKind::ExpGrowth => {
                take(p, &["b"], "exp_growth")?;
                SpeedFunction::exp_growth(need(p, "b", "exp_growth")?)
            }
            SpeedKind::PolyGrowth => {
                take(p, &["p", "c"], "poly_growth")?;
                SpeedFunction::poly_growth(need(p, "p", "poly_growth")?, p.get("c").copied().unwrap_or(1.0))
            }
            SpeedKind::Constant => {
                take(p, &["c"], "constant")?;
                SpeedFunction::constant(need(p, "c", "constant")?)
            }
            SpeedKind::Tabulated => {
                take(p, &[], "tabulated")?;
                let table = self
                    .table
                    .as_ref()
                    .ok_or_else(|| Error::Config("tabulated speed requires speed.table".into()))?;
                Ok(SpeedFunction::tabulated(TabulatedSpeed::from_csv(
                    &base_dir.join(table),
                    self.tail_power,
                )?))
            }
        }
    }
}

impl RunConfig {
    /// Parses and validates a config document.
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, &base)
    }

    pub fn validate(&self) -> Result<()> {
        self.quad.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.bounds.validate()?;
        if let Some(sim) = &self.sim {
            sim.validate()?;
        }
        Ok(())
    }

    pub fn symbol(&self) -> Result<CharacteristicExponent> {
        self.symbol.build(&self.base_dir)
    }

    pub fn speed(&self) -> Result<SpeedFunction> {
        self.speed.build(&self.base_dir)
    }

    /// Compact JSON with a fixed key order.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of [`canonical_json`](Self::canonical_json).
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    pub fn preset(name: &str) -> Result<Self> {
        let params = |kv: &[(&str, f64)]| kv.iter().map(|(k, v)| (k.to_string(), *v)).collect::<BTreeMap<_, _>>();
        let symbol = match name {
            "stable" => SymbolSpec {
                family: SymbolKind::Stable,
                params: params(&[("alpha", 1.5)]),
                table: None,
                tail_exponent: None,
                levy_measure: None,
            },
            "brownian-exp" => SymbolSpec {
                family: SymbolKind::Brownian,
                params: params(&[("sigma2", 1.0)]),
                table: None,
                tail_exponent: None,
                levy_measure: None,
            },
            "stable-mixture" => SymbolSpec {
                family: SymbolKind::StableMixture,
                params: params(&[("c1", 1.0), ("c2", 1.0), ("alpha", 1.5)]),
                table: None,
                tail_exponent: None,
                levy_measure: None,
            },
            "cauchy-brownian" => SymbolSpec {
                family: SymbolKind::CauchyPlusBrownian,
                params: BTreeMap::new(),
                table: None,
                tail_exponent: None,
                levy_measure: None,
            },
            other => {
                return Err(Error::Config(format!(
                    "unknown preset `{other}` (expected one of: {})",
                    PRESETS.join(", ")
                )))
            }
        };
        let cfg = RunConfig {
            symbol,
            speed: SpeedSpec {
                family: Some(SpeedKind::ExpGrowth),
                params: params(&[("b", 1.0)]),
                table: None,
                tail_power: None,
            },
            quad: QuadConfig::default(),
            bounds: BoundsConfig::default(),
            sim: Some(SimConfig {
                n_paths: 10_000,
                horizon: 20.0,
                dt: Some(0.02),
                init: InitialLaw::Point(2.0),
                output_step: 0.05,
                return_time: Some(ReturnTimeConfig {
                    eps: 0.05,
                    x0: 1.0,
                    n_paths: 10_000,
                    horizon: None,
                }),
                ..SimConfig::default()
            }),
            output: OutputConfig::default(),
            base_dir: PathBuf::new(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::SymbolFamily;

    #[test]
    fn every_preset_builds_and_round_trips() {
        for name in PRESETS {
            let cfg = RunConfig::preset(name).unwrap();
            cfg.symbol().unwrap();
            cfg.speed().unwrap();
            let back = RunConfig::from_json(&cfg.canonical_json(), Path::new("")).unwrap();
            assert_eq!(back, cfg);
            assert_eq!(back.hash(), cfg.hash());
        }
        assert!(RunConfig::preset("nope").is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::preset("stable").unwrap();
        let mut b = a.clone();
        b.quad.rtol = 1e-7;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn minimal_document() {
        let cfg = RunConfig::from_json(
            r#"{"symbol":{"family":"stable_mixture","params":{"c1":1,"c2":2,"alpha":1.2}},
                "speed":{"family":"poly_growth","params":{"p":3}}}"#,
            Path::new(""),
        )
        .unwrap();
        assert!(matches!(
            cfg.symbol().unwrap().family(),
            SymbolFamily::StableMixture { c2, .. } if *c2 == 2.0
        ));
        assert!(cfg.sim.is_none());
        assert_eq!(cfg.quad, QuadConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = [
            r#"{"symbol":{"family":"stable","params":{"alpha":1.5}},"speed":{"family":"exp_growth","params":{"b":1}},"extra":1}"#,
            r#"{"symbol":{"family":"stable","params":{"alpha":1.5,"beta":1}},"speed":{"family":"exp_growth","params":{"b":1}}}"#,
            r#"{"symbol":{"family":"stable","params":{"alpha":1.5}},"speed":{"family":"exp_growth","params":{"b":1}},"quad":{"atoll":1}}"#,
            r#"{"symbol":{"family":"stable","params":{"alpha":1.5}},"speed":{"family":"exp_growth","params":{"b":1}},"sim":{"paths":5}}"#,
            r#"{"symbol":{"family":"levy"},"speed":{"family":"exp_growth","params":{"b":1}}}"#,
        ];
        for text in bad {
            let r = RunConfig::from_json(text, Path::new("")).and_then(|c| c.symbol().map(|_| c));
            assert!(matches!(r, Err(Error::Config(_))), "{text}: {r:?}");
        }
    }

    #[test]
    fn missing_parameter() {
        let cfg = RunConfig::from_json(
            r#"{"symbol":{"family":"stable"},"speed":{"family":"exp_growth","params":{"b":1}}}"#,
            Path::new(""),
        )
        .unwrap();
        assert!(matches!(cfg.symbol(), Err(Error::Config(_))));
    }

    #[test]
    fn sim_block_keys() {
        let cfg = RunConfig::from_json(
            r#"{"symbol":{"family":"brownian"},"speed":{"family":"exp_growth","params":{"b":1}},
                "sim":{"n_paths":100,"T":5,"seed":9,"observable":"sign","init":"stationary"}}"#,
            Path::new(""),
        )
        .unwrap();
        let sim = cfg.sim.unwrap();
        assert_eq!((sim.n_paths, sim.horizon, sim.seed), (100, 5.0, 9));
        assert_eq!(sim.init, InitialLaw::Stationary);
        assert!((sim.dt() - 5e-3).abs() < 1e-15);
        let pt = RunConfig::from_json(
            r#"{"symbol":{"family":"brownian"},"speed":{"family":"exp_growth","params":{"b":1}},
                "sim":{"init":{"point":2.5},"observable":{"clipped":{"cap":2}}}}"#,
            Path::new(""),
        )
        .unwrap();
        assert_eq!(pt.sim.unwrap().init, InitialLaw::Point(2.5));
    }
}
