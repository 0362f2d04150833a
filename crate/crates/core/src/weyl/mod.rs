//! Magnetic Weyl counting densities, Landau-level enumeration, the plain
//! Weyl density, and quadrature of densities against cutoff functions.

mod cutoff;
mod quadrature;

pub use cutoff::CutoffFunction;
pub use quadrature::{integrate_density, DensityKind, Quadrature, QuadratureSpec};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{intensity_matrix, Scenario};

/// Semiclassical parameters of one evaluation: coupling mu >= 1,
/// h in (0, 1], spectral level tau.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WeylParams {
    pub mu: f64,
    pub h: f64,
    pub tau: f64,
}

impl WeylParams {
    pub fn new(mu: f64, h: f64, tau: f64) -> Result<Self> {
        if !(h > 0.0 && h <= 1.0) {
            return Err(Error::invalid_config(
                "h",
                format!("h must be in (0,1], got {h}"),
            ));
        }
        if mu < 1.0 || mu.is_nan() {
            return Err(Error::invalid_config(
                "mu",
                format!("mu must be >= 1, got {mu}"),
            ));
        }
        Ok(WeylParams { mu, h, tau })
    }
}

/// One Landau level E_alpha = sum_j (2 alpha_j + 1) f_j.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandauLevel {
    pub alpha: Vec<u32>,
    pub energy: f64,
}

/// Guard for runaway level enumerations.
const LEVEL_BUDGET: usize = 1_000_000;

/// All multi-indices alpha with E_alpha <= cap, ascending by energy, ties
/// by lexicographic alpha. A cap below the ground level yields an empty
/// list. The closed inequality realizes the theta(0) = 1 convention.
pub fn landau_levels(freqs: &[f64], cap: f64) -> Result<Vec<LandauLevel>> {
    let ground: f64 = freqs.iter().sum();
    let mut out = Vec::new();
    if freqs.is_empty() || cap < ground {
        return Ok(out);
    }
    let mut alpha = vec![0u32; freqs.len()];
    enumerate(freqs, cap, 0, ground, &mut alpha, &mut out)?;
    out.sort_by(|a, b| {
        a.energy
            .partial_cmp(&b.energy)
            .unwrap()
            .then_with(|| a.alpha.cmp(&b.alpha))
    });
    Ok(out)
}

fn enumerate(
    freqs: &[f64],
    cap: f64,
    j: usize,
    energy: f64,
    alpha: &mut Vec<u32>,
    out: &mut Vec<LandauLevel>,
) -> Result<()> {
    if j == freqs.len() {
        out.push(LandauLevel {
            alpha: alpha.clone(),
            energy,
        });
        if out.len() > LEVEL_BUDGET {
            return Err(Error::TupleBudget {
                budget: LEVEL_BUDGET,
            });
        }
        return Ok(());
    }
    let mut a = 0u32;
    loop {
        let e = energy + 2.0 * a as f64 * freqs[j];
        if e > cap {
            break;
        }
        alpha[j] = a;
        enumerate(freqs, cap, j + 1, e, alpha, out)?;
        a += 1;
    }
    alpha[j] = 0;
    Ok(())
}

/// Volume of the unit ball in R^k.
pub fn unit_ball_volume(k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(k - 2) * 2.0 * std::f64::consts::PI / k as f64,
    }
}

/// Point data shared by the density evaluations.
struct PointData {
    freqs: Vec<f64>,
    rank: usize,
    full_rank: bool,
    sqrt_g: f64,
    v: f64,
}

fn point_data(scenario: &Scenario, x: &[f64]) -> Result<PointData> {
    let fi = intensity_matrix(scenario, x)?;
    let sqrt_g = 1.0 / fi.metric.determinant().sqrt();
    Ok(PointData {
        freqs: fi.frequencies,
        rank: fi.rank,
        full_rank: fi.full_rank,
        sqrt_g,
        v: scenario.potential_at(x),
    })
}

/// Number of Landau levels active at (x, params): #{alpha : E_alpha mu h + V <= tau}.
pub fn active_levels(scenario: &Scenario, x: &[f64], params: &WeylParams) -> Result<usize> {
    let p = point_data(scenario, x)?;
    if !p.full_rank {
        return Err(Error::RankDeficient {
            rank: p.rank,
            dim: scenario.dim,
        });
    }
    Ok(landau_levels(&p.freqs, (params.tau - p.v) / (params.mu * params.h))?.len())
}

/// Magnetic Weyl counting density in the full-rank case 2r = d:
/// (2 pi)^{-r} (mu/h)^r sum_alpha theta(tau - E_alpha mu h - V) f_1..f_r sqrt(g),
/// with theta(0) = 1 (closed counting of lambda <= tau).
pub fn magnetic_weyl_full_rank(scenario: &Scenario, x: &[f64], params: &WeylParams) -> Result<f64> {
    let p = point_data(scenario, x)?;
    if !p.full_rank {
        return Err(Error::RankDeficient {
            rank: p.rank,
            dim: scenario.dim,
        });
    }
    let r = p.freqs.len();
    let count = landau_levels(&p.freqs, (params.tau - p.v) / (params.mu * params.h))?.len();
    let prod: f64 = p.freqs.iter().product();
    Ok((2.0 * std::f64::consts::PI).powi(-(r as i32))
        * (params.mu / params.h).powi(r as i32)
        * count as f64
        * prod
        * p.sqrt_g)
}

/// General-rank magnetic Weyl density, 0 <= 2r <= d:
/// omega_{d-2r} (2 pi)^{r-d} mu^r h^{r-d} sum_alpha (tau - E_alpha mu h - V)_+^{d/2-r} f_1..f_r sqrt(g).
/// The power-zero positive part is read as theta, so 2r = d reproduces
/// `magnetic_weyl_full_rank`; r = 0 delegates to the standard Weyl density.
pub fn magnetic_weyl_general(scenario: &Scenario, x: &[f64], params: &WeylParams) -> Result<f64> {
    let p = point_data(scenario, x)?;
    let d = scenario.dim;
    let r = p.freqs.len();
    if r == 0 {
        return Ok(standard_weyl(scenario, x, params));
    }
    let k = d - 2 * r;
    let exponent = 0.5 * d as f64 - r as f64;
    let mu_h = params.mu * params.h;
    let levels = landau_levels(&p.freqs, (params.tau - p.v) / mu_h)?;
    let sum: f64 = levels
        .iter()
        .map(|l| {
            let arg = params.tau - l.energy * mu_h - p.v;
            if exponent == 0.0 {
                1.0
            } else {
                arg.max(0.0).powf(exponent)
            }
        })
        .sum();
    let prod: f64 = p.freqs.iter().product();
    Ok(unit_ball_volume(k)
        * (2.0 * std::f64::consts::PI).powi(r as i32 - d as i32)
        * params.mu.powi(r as i32)
        * params.h.powi(r as i32 - d as i32)
        * sum
        * prod
        * p.sqrt_g)
}

/// Standard Weyl density omega_d (2 pi h)^{-d} (tau - V)_+^{d/2} sqrt(g),
/// the weak-field cross-check.
pub fn standard_weyl(scenario: &Scenario, x: &[f64], params: &WeylParams) -> f64 {
    let d = scenario.dim;
    let g = scenario.metric_at(x);
    let sqrt_g = 1.0 / g.determinant().sqrt();
    let arg = (params.tau - scenario.potential_at(x)).max(0.0);
    unit_ball_volume(d)
        * (2.0 * std::f64::consts::PI * params.h).powi(-(d as i32))
        * arg.powf(0.5 * d as f64)
        * sqrt_g
}
