use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::Scenario;
use crate::linalg::spd_sqrt;

/// Relative tolerance for pairing the doubled eigenvalues of -(g^{1/2} F g^{1/2})^2.
/// Violations indicate numerically broken skew structure and are errors.
const PAIRING_TOL: f64 = 1e-8;
/// Frequencies below this fraction of the largest one are exact zeros.
const ZERO_TOL: f64 = 1e-10;
/// Default bound c0 on |(F^j_k)^{-1}| in the full-rank condition.
const DEFAULT_C0: f64 = 1e8;

/// Magnetic intensity data at a point: the skew matrix F_{jk}, the reduced
/// matrix (F^j_k) = g F, its characteristic frequencies and rank.
#[derive(Debug, Clone)]
pub struct FieldIntensity {
    /// F_{jk}, antisymmetrized on construction.
    pub f_matrix: DMatrix<f64>,
    /// (F^j_k) = (g^{jk}) (F_{kp}).
    pub gf: DMatrix<f64>,
    /// Metric (g^{jk}) the intensity was computed with.
    pub metric: DMatrix<f64>,
    /// f_1 >= f_2 >= ... > 0.
    pub frequencies: Vec<f64>,
    /// 2r = rank (F^j_k).
    pub rank: usize,
    /// |(F^j_k)^{-1}| (spectral norm), `None` when singular.
    pub inv_norm: Option<f64>,
    /// rank = d and inv_norm <= c0.
    pub full_rank: bool,
}

impl FieldIntensity {
    pub fn dim(&self) -> usize {
        self.f_matrix.nrows()
    }

    pub fn require_full_rank(&self) -> Result<()> {
        if self.full_rank {
            Ok(())
        } else {
            Err(Error::RankDeficient {
                rank: self.rank,
                dim: self.dim(),
            })
        }
    }

    /// Product f_1...f_r.
    pub fn frequency_product(&self) -> f64 {
        self.frequencies.iter().product()
    }
}

/// Characteristic frequencies and rank of the pair (g, F).
///
/// Forms M = g^{1/2} F g^{1/2} (skew), then the symmetric positive
/// semidefinite -M^2 whose nonzero eigenvalues come in pairs f_p^2; the
/// spectrum coincides with that of gF.
pub fn characteristic_frequencies(g: &DMatrix<f64>, f: &DMatrix<f64>) -> Result<(Vec<f64>, usize)> {
    let d = g.nrows();
    let root = spd_sqrt(g)?;
    let m = &root * f * &root;
    let s = -(&m * &m);
    let mut eig: Vec<f64> = s.symmetric_eigen().eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let top = eig[0].max(0.0);
    let f_scale = top.sqrt();
    if f_scale == 0.0 {
        return Ok((Vec::new(), 0));
    }
    let zero_cut = (ZERO_TOL * f_scale).powi(2);
    let pair_tol = PAIRING_TOL * top;
    let mut freqs = Vec::new();
    let mut i = 0;
    while i < d {
        if eig[i] <= zero_cut {
            // all remaining are zeros
            break;
        }
        if i + 1 >= d || (eig[i] - eig[i + 1]).abs() > pair_tol {
            return Err(Error::UnpairedEigenvalue {
                value: eig[i],
                residual: if i + 1 < d {
                    (eig[i] - eig[i + 1]).abs()
                } else {
                    eig[i]
                },
                tol: pair_tol,
            });
        }
        freqs.push((0.5 * (eig[i] + eig[i + 1])).sqrt());
        i += 2;
    }
    let rank = 2 * freqs.len();
    Ok((freqs, rank))
}

/// Builds the intensity data of `scenario` at `x`. Derivatives of the
/// vector potential are exact when the registry supplies them, otherwise
/// Richardson-checked central differences with step 1e-5 * diam(domain).
pub fn intensity_matrix(scenario: &Scenario, x: &[f64]) -> Result<FieldIntensity> {
    if !scenario.domain.contains(x) {
        return Err(Error::OutOfDomain(x.to_vec()));
    }
    let jac = match scenario.gauge_jacobian_at(x) {
        Some(j) => j,
        None => numeric_gauge_jacobian(scenario, x)?,
    };
    // F_{jk} = dV_k/dx_j - dV_j/dx_k = (J^T - J)_{jk}; exactly antisymmetric.
    let f = jac.transpose() - &jac;
    intensity_from_parts(scenario.metric_at(x), f)
}

/// Assembles a `FieldIntensity` from an explicit metric and (skew) F.
pub fn intensity_from_parts(g: DMatrix<f64>, f: DMatrix<f64>) -> Result<FieldIntensity> {
    let d = g.nrows();
    let f = 0.5 * (&f - f.transpose());
    let gf = &g * &f;
    let (frequencies, rank) = characteristic_frequencies(&g, &f)?;
    let inv_norm = if rank == d && !frequencies.is_empty() {
        // eigenvalues of gF are +-i f_p, so |(gF)^{-1}| = 1/f_min.
        Some(1.0 / frequencies.last().copied().unwrap())
    } else {
        None
    };
    let full_rank = rank == d && inv_norm.map(|v| v <= DEFAULT_C0).unwrap_or(false);
    Ok(FieldIntensity {
        f_matrix: f,
        gf,
        metric: g,
        frequencies,
        rank,
        inv_norm,
        full_rank,
    })
}

fn numeric_gauge_jacobian(scenario: &Scenario, x: &[f64]) -> Result<DMatrix<f64>> {
    let d = scenario.dim;
    let delta = 1e-5 * scenario.domain.diameter();
    let diff = |step: f64| -> DMatrix<f64> {
        let mut j = DMatrix::zeros(d, d);
        for k in 0..d {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[k] += step;
            xm[k] -= step;
            let vp = scenario.gauge_at(&xp);
            let vm = scenario.gauge_at(&xm);
            for row in 0..d {
                j[(row, k)] = (vp[row] - vm[row]) / (2.0 * step);
            }
        }
        j
    };
    let coarse = diff(delta);
    let fine = diff(0.5 * delta);
    // Central differences are O(step^2): the two estimates must agree to
    // roughly a quarter; wild disagreement means the map is not smooth here.
    let scale = fine.amax().max(1.0);
    if (&fine - &coarse).amax() > 1e-3 * scale {
        return Err(Error::Derivative(format!(
            "central differences at steps {delta:.1e} and {:.1e} disagree beyond tolerance",
            0.5 * delta
        )));
    }
    // Richardson extrapolation of the two second-order estimates.
    Ok((fine * 4.0 - coarse) / 3.0)
}

/// Liouville density f_1...f_r sqrt(det g_{jk}), cross-checked against
/// det(gF) = (f_1...f_r)^2.
pub fn liouville_density(intensity: &FieldIntensity) -> Result<f64> {
    intensity.require_full_rank()?;
    let prod = intensity.frequency_product();
    let det_gf = intensity.gf.determinant();
    let rel = (det_gf - prod * prod).abs() / (prod * prod).max(f64::MIN_POSITIVE);
    assert!(
        rel <= 1e-8,
        "Liouville consistency violated: det(gF)={det_gf:.15e} vs (f1..fr)^2={:.15e}",
        prod * prod
    );
    let det_g_up = intensity.metric.determinant();
    Ok(prod / det_g_up.sqrt())
}
