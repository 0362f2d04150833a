use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{intensity_matrix, Scenario};
use crate::resonance::ResonancePartition;
use crate::weyl::landau_levels;

/// Which inequality a report certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionId {
    /// |grad V| >= eps1, constant-field microhyperbolicity.
    MicrohypConstWeak,
    /// |E_alpha mu h + V| + |grad V| >= eps1 for all alpha.
    MicrohypConstStrong,
    /// |grad(V / E_alpha_bar)| >= eps0, superstrong variant.
    MicrohypSuperstrong,
    /// |E_alpha mu h + V| >= eps1 for all alpha: spectral gap / ellipticity.
    EllipticityGap,
    /// Sampled general microhyperbolicity for block-diagonal symbols.
    #[serde(rename = "general_0_1")]
    General01,
}

/// Where the worst margin was attained.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Witness {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<f64>>,
}

/// Outcome of a sampled condition check. These are certificates at an
/// explicit sampling resolution, not proofs.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub condition_id: ConditionId,
    pub satisfied: bool,
    /// Worst-case slack; nonnegative exactly when satisfied.
    pub margin: f64,
    pub witness: Witness,
    /// Sampling resolution the certificate was computed at.
    pub samples: usize,
}

/// Cap on enumerated alpha tuples in gap/microhyperbolicity checks.
const ALPHA_BUDGET: usize = 1_000_000;

/// Levels with E_alpha mu h <= max|V| + 2 eps1, extended by one level
/// spacing so the nearest level above the window is always inspected.
fn level_cap(v_abs_max: f64, eps1: f64, mu_h: f64, freqs: &[f64]) -> f64 {
    (v_abs_max + 2.0 * eps1) / mu_h + 2.0 * freqs.iter().sum::<f64>()
}

/// Spectral gap condition: min over sampled x and admissible alpha of
/// |E_alpha mu h + V(x)|, satisfied when the minimum stays >= eps1. The
/// levels carry the characteristic frequencies.
pub fn check_gap_condition(
    scenario: &Scenario,
    mu: f64,
    h: f64,
    eps1: f64,
    grid_n: usize,
) -> Result<ConditionReport> {
    if grid_n == 0 {
        return Err(Error::EmptyGrid);
    }
    let grid = scenario.domain.grid(grid_n);
    let v_abs_max = grid
        .iter()
        .map(|x| scenario.potential_at(x).abs())
        .fold(0.0f64, f64::max);
    let mu_h = mu * h;
    let mut worst = f64::INFINITY;
    let mut witness = Witness::default();
    for x in &grid {
        let fi = intensity_matrix(scenario, x)?;
        fi.require_full_rank()?;
        let levels = landau_levels(
            &fi.frequencies,
            level_cap(v_abs_max, eps1, mu_h, &fi.frequencies),
        )?;
        if levels.len() > ALPHA_BUDGET {
            return Err(Error::TupleBudget {
                budget: ALPHA_BUDGET,
            });
        }
        let v = scenario.potential_at(x);
        for level in &levels {
            let dist = (level.energy * mu_h + v).abs();
            if dist < worst {
                worst = dist;
                witness = Witness {
                    x: Some(x.clone()),
                    alpha: Some(level.alpha.clone()),
                    ..Default::default()
                };
            }
        }
    }
    // A cap below the ground level leaves no admissible alpha: elliptic by
    // vacuity with the ground level distance as margin.
    if worst == f64::INFINITY {
        let x0 = scenario.domain.center();
        let fi = intensity_matrix(scenario, &x0)?;
        let ground: f64 = fi.frequencies.iter().sum();
        worst = grid
            .iter()
            .map(|x| (ground * mu_h + scenario.potential_at(x)).abs())
            .fold(f64::INFINITY, f64::min);
        witness = Witness {
            x: Some(x0),
            alpha: Some(vec![0; fi.frequencies.len()]),
            ..Default::default()
        };
    }
    let margin = worst - eps1;
    Ok(ConditionReport {
        condition_id: ConditionId::EllipticityGap,
        satisfied: margin >= 0.0,
        margin,
        witness,
        samples: grid.len(),
    })
}

/// Variants of the constant-coefficient microhyperbolicity check.
#[derive(Debug, Clone)]
pub enum MicrohypVariant {
    /// |grad V| >= eps1.
    Weak,
    /// |E_alpha mu h + V| + |grad V| >= eps1 for all alpha; needs mu, h.
    Strong { mu: f64, h: f64 },
    /// |grad(V / E_alpha_bar)| >= eps0; needs the pinned level alpha_bar.
    Superstrong { alpha_bar: Vec<u32> },
}

/// Pointwise constant-coefficient microhyperbolicity over a sampling grid.
pub fn check_microhyp_constant(
    scenario: &Scenario,
    variant: &MicrohypVariant,
    eps1: f64,
    grid_n: usize,
) -> Result<ConditionReport> {
    if grid_n == 0 {
        return Err(Error::EmptyGrid);
    }
    let grid = scenario.domain.grid(grid_n);
    let mut worst = f64::INFINITY;
    let mut witness = Witness::default();
    let (condition_id, samples) = match variant {
        MicrohypVariant::Weak => (ConditionId::MicrohypConstWeak, grid.len()),
        MicrohypVariant::Strong { .. } => (ConditionId::MicrohypConstStrong, grid.len()),
        MicrohypVariant::Superstrong { .. } => (ConditionId::MicrohypSuperstrong, grid.len()),
    };
    for x in &grid {
        let grad = scenario.potential_grad_at(x);
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        match variant {
            MicrohypVariant::Weak => {
                if grad_norm < worst {
                    worst = grad_norm;
                    witness = Witness {
                        x: Some(x.clone()),
                        ..Default::default()
                    };
                }
            }
            MicrohypVariant::Strong { mu, h } => {
                let fi = intensity_matrix(scenario, x)?;
                fi.require_full_rank()?;
                let v = scenario.potential_at(x);
                let mu_h = mu * h;
                let levels = landau_levels(
                    &fi.frequencies,
                    level_cap(v.abs(), eps1, mu_h, &fi.frequencies),
                )?;
                if levels.len() > ALPHA_BUDGET {
                    return Err(Error::TupleBudget {
                        budget: ALPHA_BUDGET,
                    });
                }
                for level in &levels {
                    let expr = (level.energy * mu_h + v).abs() + grad_norm;
                    if expr < worst {
                        worst = expr;
                        witness = Witness {
                            x: Some(x.clone()),
                            alpha: Some(level.alpha.clone()),
                            ..Default::default()
                        };
                    }
                }
                // No admissible level at all still leaves the gradient term.
                if levels.is_empty() && grad_norm < worst {
                    worst = grad_norm;
                    witness = Witness {
                        x: Some(x.clone()),
                        ..Default::default()
                    };
                }
            }
            MicrohypVariant::Superstrong { alpha_bar } => {
                let fi = intensity_matrix(scenario, x)?;
                fi.require_full_rank()?;
                if alpha_bar.len() != fi.frequencies.len() {
                    return Err(Error::MissingParameter(
                        "alpha_bar (length must match the number of frequencies)".into(),
                    ));
                }
                // grad(V / E(x)) with E(x) = sum (2 abar_j + 1) f_j(x),
                // by central differences of the composite map.
                let e_at = |y: &[f64]| -> Result<f64> {
                    let fiy = intensity_matrix(scenario, y)?;
                    Ok(alpha_bar
                        .iter()
                        .zip(fiy.frequencies.iter())
                        .map(|(&a, &f)| (2.0 * a as f64 + 1.0) * f)
                        .sum())
                };
                let delta = 1e-6 * scenario.domain.diameter();
                let mut g2 = 0.0;
                for a in 0..scenario.dim {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[a] = (xp[a] + delta).min(scenario.domain.hi[a]);
                    xm[a] = (xm[a] - delta).max(scenario.domain.lo[a]);
                    let fp = scenario.potential_at(&xp) / e_at(&xp)?;
                    let fm = scenario.potential_at(&xm) / e_at(&xm)?;
                    g2 += ((fp - fm) / (xp[a] - xm[a])).powi(2);
                }
                let gn = g2.sqrt();
                if gn < worst {
                    worst = gn;
                    witness = Witness {
                        x: Some(x.clone()),
                        alpha: Some(alpha_bar.clone()),
                        ..Default::default()
                    };
                }
            }
        }
    }
    let margin = worst - eps1;
    Ok(ConditionReport {
        condition_id,
        satisfied: margin >= 0.0,
        margin,
        witness,
        samples,
    })
}

/// Sampling budgets of the general checker. Defaults follow the documented
/// heuristic: 64 directions per 2-plane, 16 level samples per group, 128
/// points per constraint torus.
#[derive(Debug, Clone, Copy)]
pub struct GeneralBudgets {
    pub directions: usize,
    pub tau_samples: usize,
    pub zeta_samples: usize,
}

impl Default for GeneralBudgets {
    fn default() -> Self {
        GeneralBudgets {
            directions: 64,
            tau_samples: 16,
            zeta_samples: 128,
        }
    }
}

/// Sampled general microhyperbolicity check for block-diagonal symbols
/// with near-scalar blocks a_jk ~ f_m delta_jk.
///
/// For each grid point x and admissible level vector tau (per n-group,
/// |sum tau_n + V| <= eps sampled on `tau_samples` values), searches a
/// direction l over a sphere grid for the largest minimum of the
/// directional derivative form sum_j d_l(f_j / V) |z_j|^2 over sampled z
/// on the torus sum_{j in n} f_j |z_j|^2 = tau_n. Satisfied when the
/// maximin stays >= eps1 everywhere. A certificate, not a proof.
pub fn check_microhyp_general(
    scenario: &Scenario,
    eps: f64,
    eps1: f64,
    grid_n: usize,
    budgets: &GeneralBudgets,
) -> Result<ConditionReport> {
    if budgets.directions == 0 || budgets.tau_samples == 0 || budgets.zeta_samples == 0 {
        return Err(Error::invalid_config(
            "budgets",
            "sampling budgets must be positive",
        ));
    }
    if grid_n == 0 {
        return Err(Error::EmptyGrid);
    }
    let d = scenario.dim;
    let grid = scenario.domain.grid(grid_n);
    let fi0 = intensity_matrix(scenario, &scenario.domain.center())?;
    fi0.require_full_rank()?;
    let r = fi0.frequencies.len();
    let partition = ResonancePartition::build(&fi0.frequencies, 0.05);
    let groups = &partition.groups_n;

    let delta = 1e-6 * scenario.domain.diameter();
    // Directional derivatives D_j(l) = grad(f_j / V) . l via central
    // differences of the composite map.
    #[allow(clippy::needless_range_loop)]
    let ratio_grad = |x: &[f64]| -> Result<Vec<Vec<f64>>> {
        let mut grads = vec![vec![0.0; d]; r];
        for a in 0..d {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[a] = (xp[a] + delta).min(scenario.domain.hi[a]);
            xm[a] = (xm[a] - delta).max(scenario.domain.lo[a]);
            let fip = intensity_matrix(scenario, &xp)?;
            let fim = intensity_matrix(scenario, &xm)?;
            let (vp, vm) = (scenario.potential_at(&xp), scenario.potential_at(&xm));
            for j in 0..r {
                let rp = fip.frequencies[j] / vp;
                let rm = fim.frequencies[j] / vm;
                grads[j][a] = (rp - rm) / (xp[a] - xm[a]);
            }
        }
        Ok(grads)
    };

    let directions = direction_grid(d, budgets.directions);
    let mut worst = f64::NEG_INFINITY;
    let mut witness = Witness::default();
    let mut samples = 0usize;

    for x in &grid {
        let fi = intensity_matrix(scenario, x)?;
        fi.require_full_rank()?;
        let freqs = &fi.frequencies;
        let v = scenario.potential_at(x);
        let grads = ratio_grad(x)?;
        // Candidate directions: the sphere grid plus the gradient rays.
        let mut dirs = directions.clone();
        for g in &grads {
            let norm = g.iter().map(|t| t * t).sum::<f64>().sqrt();
            if norm > 1e-14 {
                dirs.push(g.iter().map(|t| t / norm).collect());
                dirs.push(g.iter().map(|t| -t / norm).collect());
            }
        }
        // Admissible level vectors tau: tensor grid per group with
        // |sum tau_n + V| <= eps, tau_n >= 0.
        let total = -v; // center of the admissible window
        for tau in tau_grid(groups.len(), total, eps, budgets.tau_samples) {
            samples += 1;
            // maximize over l the minimum over the torus samples
            let mut best_over_l = f64::NEG_INFINITY;
            let mut best_dir: Vec<f64> = Vec::new();
            for l in &dirs {
                let dls: Vec<f64> = grads
                    .iter()
                    .map(|g| g.iter().zip(l.iter()).map(|(a, b)| a * b).sum::<f64>())
                    .collect();
                let mut min_q = f64::INFINITY;
                for (gi, group) in groups.iter().enumerate() {
                    // Sample s_j >= 0 with sum_{j in group} f_j s_j = tau_g:
                    // the quadratic form is linear in s, so the min sits at a
                    // vertex; torus samples cover the simplex deterministically.
                    let tau_g = tau[gi];
                    if group.len() == 1 {
                        let j = group[0];
                        min_q = min_q.min(dls[j] / freqs[j] * tau_g);
                    } else {
                        for k in 0..budgets.zeta_samples {
                            let weights = simplex_point(group.len(), k, budgets.zeta_samples);
                            let mut q = 0.0;
                            let mut norm = 0.0;
                            for (wi, &j) in weights.iter().zip(group.iter()) {
                                q += dls[j] * wi / freqs[j];
                                norm += wi;
                            }
                            min_q = min_q.min(q / norm * tau_g);
                        }
                    }
                }
                if min_q > best_over_l {
                    best_over_l = min_q;
                    best_dir = l.clone();
                }
            }
            let slack = best_over_l - eps1;
            if worst == f64::NEG_INFINITY || slack < worst {
                worst = slack;
                witness = Witness {
                    x: Some(x.clone()),
                    tau: Some(tau.clone()),
                    direction: Some(best_dir),
                    alpha: None,
                };
            }
        }
    }
    if worst == f64::NEG_INFINITY {
        return Err(Error::EmptyGrid);
    }
    Ok(ConditionReport {
        condition_id: ConditionId::General01,
        satisfied: worst >= 0.0,
        margin: worst,
        witness,
        samples,
    })
}

/// Deterministic unit directions: the 2r coordinate rays plus a golden-angle
/// spiral of `count` points.
fn direction_grid(d: usize, count: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::with_capacity(2 * d + count);
    for a in 0..d {
        let mut e = vec![0.0; d];
        e[a] = 1.0;
        dirs.push(e.clone());
        e[a] = -1.0;
        dirs.push(e);
    }
    if d == 2 {
        for k in 0..count {
            let th = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
            dirs.push(vec![th.cos(), th.sin()]);
        }
    } else {
        // Low-discrepancy sequence mapped through a fixed LCG, normalized.
        let mut state = 0x9e3779b97f4a7c15u64;
        for _ in 0..count {
            let mut v = Vec::with_capacity(d);
            for _ in 0..d {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                v.push(((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5);
            }
            let norm = v.iter().map(|t| t * t).sum::<f64>().sqrt();
            if norm > 1e-9 {
                dirs.push(v.into_iter().map(|t| t / norm).collect());
            }
        }
    }
    dirs
}

/// Level vectors (tau_n) with tau_n >= 0 and sum tau_n in
/// [total - eps, total + eps], sampled deterministically.
fn tau_grid(n_groups: usize, total: f64, eps: f64, samples: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    if n_groups == 1 {
        for k in 0..samples {
            let t = total - eps + 2.0 * eps * (k as f64 + 0.5) / samples as f64;
            if t >= 0.0 {
                out.push(vec![t]);
            }
        }
    } else {
        // Split the admissible total across groups on a coarse simplex grid.
        let per = (samples as f64).sqrt().ceil() as usize;
        for k in 0..per {
            let t = total - eps + 2.0 * eps * (k as f64 + 0.5) / per as f64;
            if t < 0.0 {
                continue;
            }
            for split in 0..per {
                let w = (split as f64 + 0.5) / per as f64;
                let mut tau = vec![0.0; n_groups];
                tau[0] = t * w;
                let rest = t * (1.0 - w) / (n_groups - 1) as f64;
                for g in tau.iter_mut().skip(1) {
                    *g = rest;
                }
                out.push(tau);
            }
        }
    }
    out
}

/// k-th deterministic barycentric sample on the (m-1)-simplex.
fn simplex_point(m: usize, k: usize, total: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(m);
    let mut state = (k as u64 + 1).wrapping_mul(0x9e3779b97f4a7c15);
    let mut sum = 0.0;
    for _ in 0..m {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407 ^ total as u64);
        let t = ((state >> 11) as f64) / ((1u64 << 53) as f64);
        let v = -(1.0 - t).max(1e-12).ln();
        w.push(v);
        sum += v;
    }
    // Include the vertices so linear minima are hit exactly.
    if k < m {
        let mut e = vec![0.0; m];
        e[k] = 1.0;
        return e;
    }
    w.into_iter().map(|v| v / sum).collect()
}
