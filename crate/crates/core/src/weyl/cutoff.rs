use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Domain;

/// Cutoff function psi, 0 <= psi <= 1. The registry is closed: an
/// indicator of a sub-box or the standard smooth bump, no user code.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CutoffFunction {
    Indicator {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    /// exp(1 - 1/(1 - t^2)) with t = |x - center| / radius, zero outside.
    Bump {
        center: Vec<f64>,
        radius: f64,
    },
}

impl CutoffFunction {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            CutoffFunction::Indicator { lo, hi } => {
                let inside = x
                    .iter()
                    .zip(lo.iter().zip(hi.iter()))
                    .all(|(xi, (l, h))| *xi >= *l && *xi <= *h);
                if inside {
                    1.0
                } else {
                    0.0
                }
            }
            CutoffFunction::Bump { center, radius } => {
                let t2 = x
                    .iter()
                    .zip(center.iter())
                    .map(|(xi, ci)| (xi - ci).powi(2))
                    .sum::<f64>()
                    / (radius * radius);
                if t2 >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - t2)).exp()
                }
            }
        }
    }

    /// Bounding box of the support.
    pub fn support_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            CutoffFunction::Indicator { lo, hi } => (lo.clone(), hi.clone()),
            CutoffFunction::Bump { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
        }
    }

    /// Support must sit strictly inside the domain.
    pub fn validate(&self, domain: &Domain) -> Result<()> {
        let (lo, hi) = self.support_box();
        if lo.len() != domain.dim() {
            return Err(Error::invalid_config(
                "psi",
                "dimension mismatch with domain",
            ));
        }
        let ok = lo
            .iter()
            .zip(hi.iter())
            .zip(domain.lo.iter().zip(domain.hi.iter()))
            .all(|((l, h), (dl, dh))| *l > *dl && *h < *dh && l < h);
        if ok {
            Ok(())
        } else {
            Err(Error::invalid_config(
                "psi",
                "support must be strictly inside the scenario domain",
            ))
        }
    }
}
