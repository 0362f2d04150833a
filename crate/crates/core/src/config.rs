//! Structured run configuration: one TOML file per run, schema versioned,
//! unknown keys rejected. The file selects a registry scenario and
//! overrides numeric parameters; flags may override file values on top.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{Regime, SweepSpec};
use crate::geometry::{registry, Domain, GaugeSpec, PotentialSpec, Scenario};
use crate::oracle::{Boundary, DENSE_BUDGET_DEFAULT};
use crate::weyl::CutoffFunction;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi: Option<CutoffFunction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<ConfigFile> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        ConfigFile::parse(&text)
    }

    pub fn parse(text: &str) -> Result<ConfigFile> {
        let cfg: ConfigFile =
            toml::from_str(text).map_err(|e| Error::invalid_config("config", e.to_string()))?;
        if cfg.version != CONFIG_VERSION {
            return Err(Error::invalid_config(
                "version",
                format!(
                    "unsupported config version {}, expected {CONFIG_VERSION}",
                    cfg.version
                ),
            ));
        }
        Ok(cfg)
    }
}

/// Registry entry selection plus numeric overrides. Arbitrary symbolic
/// fields are not expressible; only closed-form knobs of the entries.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub id: String,
    /// Field strength of the 2D entries.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    /// Frequencies of the 4D entries.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<f64>>,
    /// Constant part of the scalar potential.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v0: Option<f64>,
    /// Gradient of an affine scalar potential.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain_lo: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain_hi: Option<Vec<f64>>,
}

impl ScenarioConfig {
    pub fn plain(id: &str) -> Self {
        ScenarioConfig {
            id: id.to_string(),
            b: None,
            f: None,
            v0: None,
            slope: None,
            domain_lo: None,
            domain_hi: None,
        }
    }

    pub fn build(&self) -> Result<Scenario> {
        let mut s = registry(&self.id)?;
        if let Some(b) = self.b {
            match &mut s.gauge {
                GaugeSpec::LinearConst(m) if s.dim == 2 => {
                    let mut g = DMatrix::zeros(2, 2);
                    g[(1, 0)] = b;
                    *m = g;
                }
                _ => {
                    return Err(Error::invalid_config(
                        "scenario.b",
                        format!("field strength override does not apply to '{}'", self.id),
                    ))
                }
            }
            if let Some(a) = s.analytic.as_mut() {
                a.frequencies = vec![b.abs()];
            }
        }
        if let Some(f) = &self.f {
            match &mut s.gauge {
                GaugeSpec::LinearConst(m) if s.dim == 4 && f.len() == 2 => {
                    let mut g = DMatrix::zeros(4, 4);
                    g[(1, 0)] = f[0];
                    g[(3, 2)] = f[1];
                    *m = g;
                }
                _ => {
                    return Err(Error::invalid_config(
                        "scenario.f",
                        "frequency override needs a 4D entry and two frequencies",
                    ))
                }
            }
            if let Some(a) = s.analytic.as_mut() {
                let mut fr = f.clone();
                fr.sort_by(|x, y| y.partial_cmp(x).unwrap());
                a.frequencies = fr;
            }
        }
        if let Some(v0) = self.v0 {
            s.potential = match s.potential {
                PotentialSpec::Const(_) => PotentialSpec::Const(v0),
                PotentialSpec::Affine { grad, .. } => PotentialSpec::Affine { c: v0, grad },
                PotentialSpec::Quadratic { lin, quad, .. } => {
                    PotentialSpec::Quadratic { c: v0, lin, quad }
                }
            };
        }
        if let Some(slope) = &self.slope {
            if slope.len() != s.dim {
                return Err(Error::invalid_config(
                    "scenario.slope",
                    "one entry per axis",
                ));
            }
            let c = match s.potential {
                PotentialSpec::Const(c) => c,
                PotentialSpec::Affine { c, .. } => c,
                PotentialSpec::Quadratic { c, .. } => c,
            };
            s.potential = PotentialSpec::Affine {
                c,
                grad: slope.clone(),
            };
        }
        if let (Some(lo), Some(hi)) = (&self.domain_lo, &self.domain_hi) {
            if lo.len() != s.dim || hi.len() != s.dim || lo.iter().zip(hi).any(|(a, b)| a >= b) {
                return Err(Error::invalid_config(
                    "scenario.domain",
                    "need lo < hi per axis",
                ));
            }
            s.domain = Domain {
                lo: lo.clone(),
                hi: hi.clone(),
            };
        } else if self.domain_lo.is_some() != self.domain_hi.is_some() {
            return Err(Error::invalid_config(
                "scenario.domain",
                "domain_lo and domain_hi come together",
            ));
        }
        s.validate(1e6, 3)?;
        Ok(s)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// weak | intermediate | strong | superstrong.
    pub regime: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    /// mu = c * h^{-kappa}.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    pub h_list: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points_per_wavelength: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    /// dirichlet | periodic.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bc: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dense_budget: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quad_base_n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

pub fn parse_boundary(s: &str) -> Result<Boundary> {
    match s {
        "dirichlet" => Ok(Boundary::Dirichlet),
        "periodic" => Ok(Boundary::Periodic),
        other => Err(Error::invalid_config(
            "bc",
            format!("unknown boundary '{other}'"),
        )),
    }
}

pub fn parse_regime(s: &str) -> Result<Regime> {
    match s {
        "weak" => Ok(Regime::Weak),
        "intermediate" => Ok(Regime::Intermediate),
        "strong" => Ok(Regime::Strong),
        "superstrong" => Ok(Regime::Superstrong),
        other => Err(Error::invalid_config(
            "sweep.regime",
            format!("unknown regime '{other}'"),
        )),
    }
}

impl SweepConfig {
    /// Assembles the full sweep specification; `scenario`/`psi` come from
    /// the sibling config sections.
    pub fn build(&self, scenario: Scenario, psi: CutoffFunction) -> Result<SweepSpec> {
        let regime = parse_regime(&self.regime)?;
        if self.h_list.is_empty() {
            return Err(Error::invalid_config("sweep.h_list", "need at least one h"));
        }
        for &h in &self.h_list {
            if !(h > 0.0 && h <= 1.0) {
                return Err(Error::invalid_config(
                    "sweep.h_list",
                    format!("h={h} not in (0,1]"),
                ));
            }
        }
        let workers = std::env::var("MAGWEYL_WORKERS")
            .ok()
            .and_then(|v| v.parse().ok())
            .or(self.workers)
            .unwrap_or_else(num_default_workers);
        Ok(SweepSpec {
            scenario,
            psi,
            regime,
            kappa: self.kappa.unwrap_or_else(|| regime.default_kappa()),
            coupling_scale: self.c.unwrap_or(1.0),
            h_list: self.h_list.clone(),
            points_per_wavelength: self.points_per_wavelength.unwrap_or(10.0),
            tau: self.tau.unwrap_or(0.0),
            bc: parse_boundary(self.bc.as_deref().unwrap_or("dirichlet"))?,
            eps1: self.eps1.unwrap_or(0.1),
            dense_budget: self.dense_budget.unwrap_or(DENSE_BUDGET_DEFAULT),
            quad_base_n: self.quad_base_n.unwrap_or(64),
            workers,
        })
    }
}

fn num_default_workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}
