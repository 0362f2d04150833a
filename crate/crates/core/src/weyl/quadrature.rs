use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{intensity_matrix, Scenario};
use crate::linalg::pairwise_sum;
use crate::weyl::{
    landau_levels, magnetic_weyl_general, standard_weyl, CutoffFunction, WeylParams,
};

/// Which counting density to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityKind {
    MagneticFullRank,
    MagneticGeneral,
    Standard,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Base midpoint resolution per axis over the support of psi.
    pub base_n: usize,
    /// Hard cap on evaluated cells (base + refined).
    pub budget: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            base_n: 64,
            budget: 4_000_000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    /// Largest number of active Landau levels seen at a cell center.
    pub max_active_levels: usize,
    pub cells: usize,
}

/// Integrates the chosen density times psi over the support of psi.
///
/// Tensor-product midpoint quadrature at `base_n` per axis with one level
/// of dyadic refinement in cells whose corner active-level counts differ
/// (the theta jump surfaces {V + E_alpha mu h = tau}). In the full-rank
/// magnetic case the theta terms are integrated as halfspace measures of
/// the per-cell linearized level argument, which is exact for affine V and
/// constant field. Cell contributions are summed pairwise in sorted cell
/// order, so results are bit-reproducible.
pub fn integrate_density(
    kind: DensityKind,
    scenario: &Scenario,
    psi: &CutoffFunction,
    params: &WeylParams,
    spec: &QuadratureSpec,
) -> Result<Quadrature> {
    let d = scenario.dim;
    let (mut lo, mut hi) = psi.support_box();
    for a in 0..d {
        lo[a] = lo[a].max(scenario.domain.lo[a]);
        hi[a] = hi[a].min(scenario.domain.hi[a]);
        if lo[a] >= hi[a] {
            return Ok(Quadrature {
                value: 0.0,
                error_estimate: 0.0,
                max_active_levels: 0,
                cells: 0,
            });
        }
    }
    if spec.base_n == 0 {
        return Err(Error::EmptyGrid);
    }
    let n = spec.base_n;
    let base_cells = n.pow(d as u32);
    if base_cells > spec.budget {
        return Err(Error::QuadratureBudget {
            cells: base_cells,
            budget: spec.budget,
        });
    }
    let side: Vec<f64> = (0..d).map(|a| (hi[a] - lo[a]) / n as f64).collect();

    let mut values = Vec::with_capacity(base_cells);
    let mut err_acc = Vec::new();
    let mut max_active = 0usize;
    let mut cells_done = 0usize;

    for flat in 0..base_cells {
        let mut idx = flat;
        let mut clo = vec![0.0; d];
        let mut chi = vec![0.0; d];
        for a in (0..d).rev() {
            let i = idx % n;
            idx /= n;
            clo[a] = lo[a] + i as f64 * side[a];
            chi[a] = clo[a] + side[a];
        }
        let coarse = cell_value(kind, scenario, psi, params, &clo, &chi)?;
        cells_done += 1;
        max_active = max_active.max(coarse.active);
        if coarse.mixed {
            // One dyadic refinement of this cell.
            let mut sub_values = Vec::with_capacity(1 << d);
            for sub in 0..(1usize << d) {
                let mut slo = vec![0.0; d];
                let mut shi = vec![0.0; d];
                for a in 0..d {
                    let half = 0.5 * (chi[a] - clo[a]);
                    let off = if (sub >> a) & 1 == 1 { half } else { 0.0 };
                    slo[a] = clo[a] + off;
                    shi[a] = slo[a] + half;
                }
                let subcell = cell_value(kind, scenario, psi, params, &slo, &shi)?;
                cells_done += 1;
                max_active = max_active.max(subcell.active);
                sub_values.push(subcell.value);
            }
            if cells_done > spec.budget {
                return Err(Error::QuadratureBudget {
                    cells: cells_done,
                    budget: spec.budget,
                });
            }
            let refined = pairwise_sum(&sub_values);
            // Second-order Richardson error model for the refined value.
            err_acc.push((refined - coarse.value).abs() / 3.0);
            values.push(refined);
        } else {
            values.push(coarse.value);
        }
    }

    Ok(Quadrature {
        value: pairwise_sum(&values),
        error_estimate: pairwise_sum(&err_acc),
        max_active_levels: max_active,
        cells: cells_done,
    })
}

struct CellValue {
    value: f64,
    mixed: bool,
    active: usize,
}

fn cell_value(
    kind: DensityKind,
    scenario: &Scenario,
    psi: &CutoffFunction,
    params: &WeylParams,
    lo: &[f64],
    hi: &[f64],
) -> Result<CellValue> {
    let d = lo.len();
    let vol: f64 = lo.iter().zip(hi.iter()).map(|(a, b)| b - a).product();
    let center: Vec<f64> = lo
        .iter()
        .zip(hi.iter())
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    match kind {
        DensityKind::MagneticFullRank => {
            cell_value_full_rank(scenario, psi, params, lo, hi, &center, vol)
        }
        DensityKind::MagneticGeneral | DensityKind::Standard => {
            // Continuous integrands: midpoint value, refinement trigger from
            // corner active-level (or sign) counts.
            let density_mid = match kind {
                DensityKind::MagneticGeneral => magnetic_weyl_general(scenario, &center, params)?,
                _ => standard_weyl(scenario, &center, params),
            };
            let mut counts = Vec::with_capacity(1 << d);
            for corner in 0..(1usize << d) {
                let x = corner_point(lo, hi, corner);
                let c = match kind {
                    DensityKind::MagneticGeneral => {
                        let fi = intensity_matrix(scenario, clamp(scenario, &x).as_slice())?;
                        let mu_h = params.mu * params.h;
                        let cap = (params.tau - scenario.potential_at(&x)) / mu_h;
                        landau_levels(&fi.frequencies, cap)?.len()
                    }
                    _ => usize::from(params.tau - scenario.potential_at(&x) > 0.0),
                };
                counts.push(c);
            }
            let mixed = counts.windows(2).any(|w| w[0] != w[1]);
            Ok(CellValue {
                value: density_mid * psi.eval(&center) * vol,
                mixed,
                active: counts[0],
            })
        }
    }
}

fn cell_value_full_rank(
    scenario: &Scenario,
    psi: &CutoffFunction,
    params: &WeylParams,
    lo: &[f64],
    hi: &[f64],
    center: &[f64],
    vol: f64,
) -> Result<CellValue> {
    let d = lo.len();
    let mu_h = params.mu * params.h;
    let fi_c = intensity_matrix(scenario, center)?;
    if !fi_c.full_rank {
        return Err(Error::RankDeficient {
            rank: fi_c.rank,
            dim: d,
        });
    }
    let r = fi_c.frequencies.len();
    let sqrt_g = 1.0 / fi_c.metric.determinant().sqrt();
    let base = (2.0 * std::f64::consts::PI).powi(-(r as i32))
        * (params.mu / params.h).powi(r as i32)
        * fi_c.frequency_product()
        * sqrt_g
        * psi.eval(center);

    // Corner data: frequencies and V at each corner of the cell.
    let n_corners = 1usize << d;
    let mut corner_freqs: Vec<Vec<f64>> = Vec::with_capacity(n_corners);
    let mut corner_v: Vec<f64> = Vec::with_capacity(n_corners);
    for corner in 0..n_corners {
        let x = corner_point(lo, hi, corner);
        let xc = clamp(scenario, &x);
        corner_freqs.push(intensity_matrix(scenario, &xc)?.frequencies);
        corner_v.push(scenario.potential_at(&x));
    }
    let v_min = corner_v.iter().cloned().fold(f64::INFINITY, f64::min);
    let cap = (params.tau - v_min) / mu_h + 1e-12;
    let levels = landau_levels(&fi_c.frequencies, cap)?;

    let mut total_measure = 0.0;
    let mut mixed = false;
    let mut active_at_center = 0usize;
    for level in &levels {
        // Level argument l(x) = tau - E_alpha(x) mu h - V(x) at the corners.
        let l_corner: Vec<f64> = (0..n_corners)
            .map(|c| {
                let e: f64 = level
                    .alpha
                    .iter()
                    .zip(corner_freqs[c].iter())
                    .map(|(&a, &f)| (2.0 * a as f64 + 1.0) * f)
                    .sum();
                params.tau - e * mu_h - corner_v[c]
            })
            .collect();
        let l_center = {
            let e: f64 = level
                .alpha
                .iter()
                .zip(fi_c.frequencies.iter())
                .map(|(&a, &f)| (2.0 * a as f64 + 1.0) * f)
                .sum();
            params.tau - e * mu_h - scenario.potential_at(center)
        };
        if l_center >= 0.0 {
            active_at_center += 1;
        }
        if l_corner.iter().all(|&v| v >= 0.0) {
            total_measure += vol;
        } else if l_corner.iter().all(|&v| v < 0.0) {
            // inactive on the whole cell
        } else {
            mixed = true;
            // Gradient of the (near-affine) level argument from corner
            // differences; exact when the argument is affine on the cell.
            let mut grad = vec![0.0; d];
            for (a, g) in grad.iter_mut().enumerate() {
                let mut acc = 0.0;
                for corner in 0..n_corners {
                    if (corner >> a) & 1 == 0 {
                        let partner = corner | (1 << a);
                        acc += l_corner[partner] - l_corner[corner];
                    }
                }
                *g = acc / ((n_corners / 2) as f64 * (hi[a] - lo[a]));
            }
            // {l >= 0} linearized at the center: -grad . x <= l(c) - grad . c
            let b = l_center
                - grad
                    .iter()
                    .zip(center.iter())
                    .map(|(g, c)| g * c)
                    .sum::<f64>();
            let a_vec: Vec<f64> = grad.iter().map(|g| -g).collect();
            total_measure += halfspace_box_volume(&a_vec, b, lo, hi);
        }
    }
    Ok(CellValue {
        value: base * total_measure,
        mixed,
        active: active_at_center,
    })
}

fn corner_point(lo: &[f64], hi: &[f64], corner: usize) -> Vec<f64> {
    lo.iter()
        .zip(hi.iter())
        .enumerate()
        .map(|(a, (l, h))| if (corner >> a) & 1 == 1 { *h } else { *l })
        .collect()
}

/// Corner evaluations can land exactly on the domain boundary; pull them
/// inside by a hair so domain-membership checks stay happy.
fn clamp(scenario: &Scenario, x: &[f64]) -> Vec<f64> {
    x.iter()
        .enumerate()
        .map(|(a, &xi)| {
            let eps = 1e-12 * scenario.domain.side(a).max(1.0);
            xi.clamp(scenario.domain.lo[a] + eps, scenario.domain.hi[a] - eps)
        })
        .collect()
}

/// Volume of {x in box : a . x <= b} for an axis-aligned box.
///
/// Axes with negligible coefficient factor out; the rest use the classical
/// corner expansion V = (1/(k! prod a_j)) sum_S (-1)^{|S|} ((b - a.v_S)_+)^k
/// after flipping axes to make all coefficients positive.
pub fn halfspace_box_volume(a: &[f64], b: f64, lo: &[f64], hi: &[f64]) -> f64 {
    let d = a.len();
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut free_vol = 1.0;
    let mut axes: Vec<usize> = Vec::new();
    for j in 0..d {
        if a[j].abs() <= 1e-14 * scale.max(1e-300) || scale == 0.0 {
            free_vol *= hi[j] - lo[j];
        } else {
            axes.push(j);
        }
    }
    if axes.is_empty() {
        // Constraint is constant: either the whole box or nothing.
        return if 0.0 <= b { free_vol } else { 0.0 };
    }
    // Flip axes with negative coefficient: x_j -> lo_j + hi_j - x_j.
    let mut coef: Vec<f64> = Vec::with_capacity(axes.len());
    let mut lo2: Vec<f64> = Vec::with_capacity(axes.len());
    let mut hi2: Vec<f64> = Vec::with_capacity(axes.len());
    let mut b2 = b;
    for &j in &axes {
        if a[j] < 0.0 {
            coef.push(-a[j]);
            b2 -= a[j] * (lo[j] + hi[j]);
        } else {
            coef.push(a[j]);
        }
        lo2.push(lo[j]);
        hi2.push(hi[j]);
    }
    let k = coef.len();
    let mut factorial = 1.0;
    for i in 1..=k {
        factorial *= i as f64;
    }
    let denom = factorial * coef.iter().product::<f64>();
    let mut sum = 0.0;
    for s in 0..(1usize << k) {
        let mut dot = 0.0;
        let mut sign = 1.0;
        for (idx, ((c, l), h)) in coef.iter().zip(lo2.iter()).zip(hi2.iter()).enumerate() {
            if (s >> idx) & 1 == 1 {
                dot += c * h;
                sign = -sign;
            } else {
                dot += c * l;
            }
        }
        let t = (b2 - dot).max(0.0);
        sum += sign * t.powi(k as i32);
    }
    let box_vol: f64 = lo2.iter().zip(hi2.iter()).map(|(l, h)| h - l).product();
    free_vol * (sum / denom).clamp(0.0, box_vol)
}
