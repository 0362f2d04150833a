//! Remainder-scaling sweeps across the magnetic-field regimes, empirical
//! exponent fits, degeneracy tests, and result persistence.

mod persist;

pub use persist::{load_sweep, persist_sweep, SweepOutput};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{intensity_matrix, Scenario};
use crate::oracle::{assemble, count_below, local_trace, Boundary, CountMethod, Lattice};
use crate::resonance::{check_gap_condition, check_microhyp_constant, MicrohypVariant};
use crate::weyl::{integrate_density, CutoffFunction, DensityKind, QuadratureSpec, WeylParams};

/// Field-strength regimes, realized as mu = c h^{-kappa}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Weak,
    Intermediate,
    Strong,
    Superstrong,
}

impl Regime {
    pub fn default_kappa(&self) -> f64 {
        match self {
            Regime::Weak => 0.4,
            Regime::Intermediate => 0.5,
            Regime::Strong => 0.75,
            Regime::Superstrong => 1.0,
        }
    }
}

/// Full specification of one remainder sweep.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub scenario: Scenario,
    pub psi: CutoffFunction,
    pub regime: Regime,
    pub kappa: f64,
    /// mu = coupling_scale * h^{-kappa}, clamped to mu >= 1.
    pub coupling_scale: f64,
    /// Decreasing h values.
    pub h_list: Vec<f64>,
    /// Resolution rule n(h) = ceil(points_per_wavelength / h).
    pub points_per_wavelength: f64,
    pub tau: f64,
    pub bc: Boundary,
    pub eps1: f64,
    pub dense_budget: usize,
    pub quad_base_n: usize,
    pub workers: usize,
}

impl SweepSpec {
    pub fn mu_for(&self, h: f64) -> f64 {
        (self.coupling_scale * h.powf(-self.kappa)).max(1.0)
    }

    pub fn resolution(&self, h: f64) -> usize {
        (self.points_per_wavelength / h).ceil() as usize
    }
}

/// One sweep point. `flags` collects non-fatal anomalies; a record with a
/// fatal flag fails the run's exit status but still persists.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RemainderRecord {
    pub h: f64,
    pub mu: f64,
    /// Points per axis.
    pub n: usize,
    /// Total lattice sites of the operator actually counted.
    pub n_sites: usize,
    /// "local_trace" or "count".
    pub method: String,
    pub n_numeric: f64,
    pub principal: f64,
    pub remainder: f64,
    pub rel_remainder: f64,
    pub quad_error: f64,
    /// Paper thresholds mu_1^* = h^{-1/2}|log h|^{-1/2},
    /// mu_2^* = h^{-1}|log h|^{-1} recorded with unit constants.
    pub mu1_star: f64,
    pub mu2_star: f64,
    pub regime_class: String,
    pub flags: Vec<String>,
}

/// Runs the sweep: per h, assemble the lattice operator, produce the
/// numeric count (psi-weighted local trace while the dense budget allows,
/// else an indicator sub-box count with Dirichlet truncation), integrate
/// the magnetic Weyl density against the same cutoff, and record the
/// remainder. Points run concurrently; output order is h descending.
pub fn run_remainder_sweep(spec: &SweepSpec) -> Result<Vec<RemainderRecord>> {
    let mut h_list = spec.h_list.clone();
    h_list.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers.max(1))
        .build()
        .map_err(|e| Error::invalid_config("workers", e.to_string()))?;
    let results: Vec<Result<RemainderRecord>> =
        pool.install(|| h_list.par_iter().map(|&h| sweep_point(spec, h)).collect());
    results.into_iter().collect()
}

fn sweep_point(spec: &SweepSpec, h: f64) -> Result<RemainderRecord> {
    let mu = spec.mu_for(h);
    let n = spec.resolution(h);
    let d = spec.scenario.dim;
    let params = WeylParams::new(mu, h.min(1.0), spec.tau)?;
    let mut flags = Vec::new();

    // Non-degeneracy condition on the support of psi, regime-matched.
    let support_scenario = restrict_to_support(&spec.scenario, &spec.psi);
    let condition = match spec.regime {
        Regime::Weak | Regime::Intermediate => {
            check_microhyp_constant(&support_scenario, &MicrohypVariant::Weak, spec.eps1, 5)?
        }
        Regime::Strong => check_microhyp_constant(
            &support_scenario,
            &MicrohypVariant::Strong { mu, h },
            spec.eps1,
            5,
        )?,
        Regime::Superstrong => check_gap_condition(&support_scenario, mu, h, spec.eps1, 5)?,
    };
    if !condition.satisfied {
        flags.push(format!(
            "condition unmet: {:?} margin {:.3e}",
            condition.condition_id, condition.margin
        ));
    }

    let n_total = n.pow(d as u32);
    let (method, n_numeric, psi_used, n_sites) = if n_total <= spec.dense_budget {
        let lattice = Lattice::new(&spec.scenario, &vec![n; d], spec.bc)?;
        let ham = assemble(&spec.scenario, mu, h, &lattice)?;
        flags.extend(ham.warnings.iter().cloned());
        let t = local_trace(&ham, spec.tau, &spec.psi, spec.dense_budget)?;
        ("local_trace".to_string(), t, spec.psi.clone(), ham.n)
    } else {
        // Indicator of the psi support box, counted on the sub-box operator
        // with Dirichlet truncation at matching spacing.
        let (lo, hi) = spec.psi.support_box();
        let psi_box = CutoffFunction::Indicator {
            lo: lo.clone(),
            hi: hi.clone(),
        };
        let mut sub = spec.scenario.clone();
        sub.domain = crate::geometry::Domain { lo, hi };
        let dims: Vec<usize> = (0..d)
            .map(|a| {
                ((n as f64) * sub.domain.side(a) / spec.scenario.domain.side(a)).round() as usize
            })
            .map(|m| m.max(4))
            .collect();
        let lattice = Lattice::new(&sub, &dims, Boundary::Dirichlet)?;
        let ham = assemble(&sub, mu, h, &lattice)?;
        flags.extend(ham.warnings.iter().cloned());
        let c = count_below(&ham, spec.tau, CountMethod::Inertia, spec.dense_budget)?;
        // Boundary-layer error scale: states within a magnetic length of
        // the truncation boundary.
        let fi = intensity_matrix(&sub, &sub.domain.center())?;
        if let Some(&f_max) = fi.frequencies.first() {
            let ell = (h / (mu * f_max)).sqrt();
            let perimeter: f64 = (0..d)
                .map(|a| {
                    2.0 * (0..d)
                        .filter(|&b| b != a)
                        .map(|b| sub.domain.side(b))
                        .product::<f64>()
                })
                .sum();
            let density = (mu / (2.0 * std::f64::consts::PI * h)).powi((d / 2) as i32);
            flags.push(format!(
                "boundary layer estimate {:.3e} states",
                perimeter * ell * density
            ));
        }
        ("count".to_string(), c.count as f64, psi_box, ham.n)
    };

    let quad = integrate_density(
        DensityKind::MagneticFullRank,
        &spec.scenario,
        &psi_used,
        &params,
        &QuadratureSpec {
            base_n: spec.quad_base_n,
            budget: 8_000_000,
        },
    )?;
    let remainder = (n_numeric - quad.value).abs();
    if remainder > 0.0 && quad.error_estimate > 0.1 * remainder {
        flags.push(format!(
            "quadrature error {:.3e} exceeds 10% of remainder {:.3e}",
            quad.error_estimate, remainder
        ));
    }
    let mu1_star = h.powf(-0.5) * h.ln().abs().powf(-0.5);
    let mu2_star = h.powf(-1.0) * h.ln().abs().powf(-1.0);
    let regime_class = if mu <= mu1_star {
        "weak"
    } else if mu <= mu2_star {
        "intermediate"
    } else if mu <= 1.0 / h {
        "strong"
    } else {
        "superstrong"
    };
    Ok(RemainderRecord {
        h,
        mu,
        n,
        n_sites,
        method,
        n_numeric,
        principal: quad.value,
        remainder,
        rel_remainder: remainder / quad.value.abs().max(f64::MIN_POSITIVE),
        quad_error: quad.error_estimate,
        mu1_star,
        mu2_star,
        regime_class: regime_class.to_string(),
        flags,
    })
}

/// Clone of the scenario with the domain shrunk to the support of psi;
/// condition checks sample there.
fn restrict_to_support(scenario: &Scenario, psi: &CutoffFunction) -> Scenario {
    let (lo, hi) = psi.support_box();
    let mut s = scenario.clone();
    for a in 0..s.dim {
        s.domain.lo[a] = lo[a].max(scenario.domain.lo[a]);
        s.domain.hi[a] = hi[a].min(scenario.domain.hi[a]);
    }
    s
}

/// Least-squares fit of log R against log(1/h).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    /// Exponent the regime's remainder estimate predicts: d - 1 - kappa.
    pub predicted_exponent: f64,
    pub points_used: usize,
    pub skipped_zero: usize,
}

/// Ordinary least squares on (log(1/h), log R), skipping flagged records
/// and exact zeros (noted in the result).
pub fn fit_scaling(records: &[RemainderRecord], dim: usize, kappa: f64) -> Result<FitResult> {
    let usable: Vec<&RemainderRecord> = records
        .iter()
        .filter(|r| r.flags.iter().all(|f| !f.starts_with("condition unmet")))
        .filter(|r| r.remainder > 0.0)
        .collect();
    let skipped_zero = records.len() - usable.len();
    if usable.len() < 3 {
        return Err(Error::TooFewRecords(usable.len()));
    }
    let xs: Vec<f64> = usable.iter().map(|r| (1.0 / r.h).ln()).collect();
    let ys: Vec<f64> = usable.iter().map(|r| r.remainder.ln()).collect();
    let n = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(ys.iter())
        .map(|(x, y)| (x - xm) * (y - ym))
        .sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let residual = (xs
        .iter()
        .zip(ys.iter())
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(FitResult {
        slope,
        intercept,
        residual,
        predicted_exponent: dim as f64 - 1.0 - kappa,
        points_used: usable.len(),
        skipped_zero,
    })
}

/// Degeneracy audit of one constant-field torus: measured multiplicity of
/// the lowest cluster(s) against (2 pi)^{-r} (mu/h)^r f_1..f_r vol, which
/// flux quantization makes an exact integer.
#[derive(Debug, Clone, Serialize)]
pub struct DegeneracyReport {
    pub expected_multiplicity: usize,
    pub flux_quanta: Vec<usize>,
    pub measured: Vec<usize>,
    pub exact: bool,
}

pub fn degeneracy_test(
    scenario: &Scenario,
    mu: f64,
    h: f64,
    dims: &[usize],
    levels: usize,
) -> Result<DegeneracyReport> {
    let fi = intensity_matrix(scenario, &scenario.domain.center())?;
    fi.require_full_rank()?;
    let freqs = fi.frequencies.clone();
    // Flux quanta per magnetized plane from the intensity matrix blocks.
    let mut flux_quanta = Vec::new();
    let f = &fi.f_matrix;
    for a in 0..scenario.dim {
        for b in a + 1..scenario.dim {
            if f[(a, b)].abs() > 1e-12 {
                let quanta =
                    mu * f[(a, b)].abs() * scenario.domain.side(a) * scenario.domain.side(b)
                        / (2.0 * std::f64::consts::PI * h);
                flux_quanta.push(quanta.round() as usize);
            }
        }
    }
    let expected: usize = flux_quanta.iter().product();

    let lattice = Lattice::new(scenario, dims, Boundary::Periodic)?;
    let ham = assemble(scenario, mu, h, &lattice)?;
    let v0 = scenario.potential_at(&scenario.domain.center());
    let level_energies = crate::weyl::landau_levels(&freqs, {
        let ground: f64 = freqs.iter().sum();
        ground + 2.0 * freqs.last().copied().unwrap() * levels as f64
    })?;
    let mut distinct: Vec<f64> = Vec::new();
    for l in &level_energies {
        if distinct
            .last()
            .map(|&e| l.energy - e > 1e-9)
            .unwrap_or(true)
        {
            distinct.push(l.energy);
        }
    }
    distinct.truncate(levels + 1);
    let min_gap = distinct
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
        * mu
        * h;

    let mut measured = Vec::new();
    for (i, &e) in distinct.iter().take(levels).enumerate() {
        let center = e * mu * h + v0;
        let lo = count_at(&ham, center - 0.4 * min_gap)?;
        let hi = count_at(&ham, center + 0.4 * min_gap)?;
        if i == 0 && lo != 0 {
            return Err(Error::ClusterUnresolved {
                width: f64::NAN,
                gap: min_gap,
            });
        }
        measured.push(hi - lo);
    }
    let exact = measured
        .iter()
        .enumerate()
        .all(|(i, &m)| m == expected * cluster_degeneracy(&freqs, &distinct, i));
    Ok(DegeneracyReport {
        expected_multiplicity: expected,
        flux_quanta,
        measured,
        exact,
    })
}

fn count_at(ham: &crate::oracle::DiscreteHamiltonian, tau: f64) -> Result<usize> {
    Ok(count_below(ham, tau, CountMethod::Inertia, usize::MAX)?.count)
}

/// Number of alpha tuples sharing the i-th distinct energy (resonant
/// coincidences multiply the flux degeneracy).
fn cluster_degeneracy(freqs: &[f64], distinct: &[f64], i: usize) -> usize {
    let cap = distinct[i] + 1e-9;
    crate::weyl::landau_levels(freqs, cap)
        .map(|ls| {
            ls.iter()
                .filter(|l| (l.energy - distinct[i]).abs() <= 1e-9)
                .count()
        })
        .unwrap_or(0)
}
