//! Constant-coefficient canonical form: the explicit metaplectic pipeline
//! reducing the quadratic main part to decoupled harmonic oscillators,
//! realized as linear symplectic maps on R^{2d} phase space and verified
//! spectrally against the lattice oracle.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{intensity_matrix, symplectic_frame, GaugeSpec, MetricSpec, Scenario};
use crate::linalg::zheevr_range;
use crate::oracle::{assemble, cluster_eigenvalues, Boundary, Lattice};
use crate::weyl::landau_levels;

/// The five-step pipeline. Each `maps[i]` is the 2d x 2d symplectic lift
/// sending the coordinates after step i+1 to the coordinates before it, so
/// the reduced symbol is b0 composed with `composite = maps[0] ... maps[4]`.
///
/// Steps: (1) linear change of variables making the metric the identity
/// and the intensity canonical; (2) quadratic gauge moving the potential to
/// the Landau form; (3) partial Fourier transform in the second coordinate
/// block; (4) shear decoupling the oscillator pairs, K[j, j+r] = 1/f_j;
/// (5) diagonal rescale from f_j^2 x_j^2 to the f_j(xi^2 + x^2)
/// normalization.
#[derive(Debug, Clone)]
pub struct MetaplecticPipeline {
    /// d x d change-of-variables matrix (step 1).
    pub step1_q: DMatrix<f64>,
    /// d x d symmetric quadratic gauge form (step 2).
    pub step2_s: DMatrix<f64>,
    /// Axes Fourier-transformed in step 3 (the second block r..d).
    pub step3_fourier_axes: Vec<usize>,
    /// d x d shear matrix of step 4.
    pub step4_k: DMatrix<f64>,
    /// Diagonal scales of the normalization step 5.
    pub step5_scale: Vec<f64>,
    pub maps: [DMatrix<f64>; 5],
    pub composite: DMatrix<f64>,
}

/// Reduced operator data: oscillator frequencies plus the substitution
/// turning the original potential into its reduced (Weyl-quantized) symbol.
#[derive(Debug, Clone, Serialize)]
pub struct ReducedForm {
    /// f_1 >= ... >= f_r.
    pub frequencies: Vec<f64>,
    /// d x 2d matrix L: the reduced potential symbol is V(L z) for phase
    /// points z = (x, xi) of the reduced variables.
    pub potential_substitution: Vec<Vec<f64>>,
    /// Formal descriptor of the oscillator part.
    pub oscillator_part: String,
}

/// Standard symplectic form on R^{2d} in (x, xi) block order.
pub fn symplectic_form(d: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * d, 2 * d);
    for j in 0..d {
        omega[(j, d + j)] = 1.0;
        omega[(d + j, j)] = -1.0;
    }
    omega
}

/// Max-abs residual of J^T Omega J - Omega.
pub fn symplectic_residual(j: &DMatrix<f64>) -> f64 {
    let d = j.nrows() / 2;
    let omega = symplectic_form(d);
    (j.transpose() * &omega * j - &omega).amax()
}

fn lift_point_transform(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = a.nrows();
    let a_inv_t = a
        .clone()
        .try_inverse()
        .ok_or(Error::SingularIntensity)?
        .transpose();
    let mut m = DMatrix::zeros(2 * d, 2 * d);
    m.view_mut((0, 0), (d, d)).copy_from(a);
    m.view_mut((d, d), (d, d)).copy_from(&a_inv_t);
    Ok(m)
}

/// Quadratic symbol of the constant-coefficient main part in normalized
/// phase-space units: b(x, xi) = (xi - A x)^T G (xi - A x).
fn quadratic_symbol(g: &DMatrix<f64>, a: &DMatrix<f64>, z: &[f64]) -> f64 {
    let d = a.nrows();
    let x = nalgebra::DVector::from_column_slice(&z[..d]);
    let xi = nalgebra::DVector::from_column_slice(&z[d..]);
    let p = xi - a * x;
    (p.transpose() * g * &p)[(0, 0)]
}

/// Builds the canonical-form pipeline for a constant-coefficient scenario
/// and checks the symbol identity on a deterministic sample of phase
/// points (residual <= 1e-10 required).
pub fn reduce_constant(scenario: &Scenario) -> Result<(MetaplecticPipeline, ReducedForm)> {
    let gauge_matrix = match &scenario.gauge {
        GaugeSpec::LinearConst(m) => m.clone(),
        _ => return Err(Error::NonConstantField("reduce_constant")),
    };
    if scenario.gauge_offset.iter().any(|&c| c != 0.0) {
        return Err(Error::invalid_config(
            "scenario.gauge_offset",
            "reduce_constant requires a linear vector potential",
        ));
    }
    if !matches!(
        scenario.metric,
        MetricSpec::Identity | MetricSpec::DiagConst(_) | MetricSpec::Const(_)
    ) {
        return Err(Error::NonConstantField("reduce_constant"));
    }
    let d = scenario.dim;
    let r = d / 2;
    let center = scenario.domain.center();
    let fi = intensity_matrix(scenario, &center)?;
    fi.require_full_rank()?;
    let frame = symplectic_frame(&fi)?;
    let freqs = frame.frequencies();
    let g = fi.metric.clone();

    // Step 1: point transformation by the frame basis.
    let b = frame.basis.clone();
    let m1 = lift_point_transform(&b)?;
    // Gauge matrix in framed coordinates.
    let a_framed = b.transpose() * &gauge_matrix * &b;
    // Landau target: rows j <= r vanish, row (j+r) is f_j x_j.
    let mut a_landau = DMatrix::zeros(d, d);
    for (j, &f) in freqs.iter().enumerate() {
        a_landau[(j + r, j)] = f;
    }
    // Step 2: quadratic gauge with symmetric form S = A_framed - A_landau.
    let s = &a_framed - &a_landau;
    let s_sym_defect = (&s - s.transpose()).amax();
    if s_sym_defect > 1e-10 * s.amax().max(1.0) {
        return Err(Error::Derivative(format!(
            "gauge form not symmetric (defect {s_sym_defect:.3e}); intensity mismatch"
        )));
    }
    let s = 0.5 * (&s + s.transpose());
    let mut m2 = DMatrix::identity(2 * d, 2 * d);
    m2.view_mut((d, 0), (d, d)).copy_from(&s);

    // Step 3: partial Fourier in the second block:
    // old x'' = -Xi'', old xi'' = X''.
    let mut m3 = DMatrix::zeros(2 * d, 2 * d);
    for j in 0..r {
        m3[(j, j)] = 1.0; // x' = X'
        m3[(d + j, d + j)] = 1.0; // xi' = Xi'
        m3[(j + r, d + r + j)] = -1.0; // x'' = -Xi''
        m3[(d + r + j, r + j)] = 1.0; // xi'' = X''
    }

    // Step 4: shear X' = Y' + K Y'' with K[j, j+r] = 1/f_j.
    let mut k = DMatrix::zeros(d, d);
    for (j, &f) in freqs.iter().enumerate() {
        k[(j, j + r)] = 1.0 / f;
    }
    let mut a4 = DMatrix::identity(d, d);
    for (j, &f) in freqs.iter().enumerate() {
        a4[(j, j + r)] = 1.0 / f;
    }
    let m4 = lift_point_transform(&a4)?;

    // Step 5: diagonal symplectic rescale x_j -> f_j^{-1/2} x_j on the
    // first block, converting f_j^2 x_j^2 + xi_j^2 to f_j(x_j^2 + xi_j^2).
    let mut scale = vec![1.0; d];
    for (j, &f) in freqs.iter().enumerate() {
        scale[j] = f.powf(-0.5);
    }
    let a5 = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(scale.clone()));
    let m5 = lift_point_transform(&a5)?;

    let composite = &m1 * &m2 * &m3 * &m4 * &m5;

    // Structural check: the composite is symplectic.
    let resid = symplectic_residual(&composite);
    if resid > 1e-12 {
        return Err(Error::Derivative(format!(
            "pipeline composite not symplectic: residual {resid:.3e}"
        )));
    }

    // Symbol identity on a deterministic sample of phase points.
    let f_scale: f64 = freqs.iter().cloned().fold(1.0, f64::max);
    let mut state = 0x243f6a8885a308d3u64;
    let mut randunit = move || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((state >> 11) as f64) / ((1u64 << 53) as f64) * 2.0 - 1.0
    };
    for _ in 0..100 {
        let z: Vec<f64> = (0..2 * d).map(|_| randunit()).collect();
        let mapped = &composite * nalgebra::DVector::from_column_slice(&z);
        let lhs = quadratic_symbol(&g, &gauge_matrix, mapped.as_slice());
        let rhs: f64 = freqs
            .iter()
            .enumerate()
            .map(|(j, &f)| f * (z[j] * z[j] + z[d + j] * z[d + j]))
            .sum();
        if (lhs - rhs).abs() > 1e-10 * f_scale * (1.0 + rhs.abs()) {
            return Err(Error::Derivative(format!(
                "symbol reduction residual {:.3e} at sampled phase point",
                (lhs - rhs).abs()
            )));
        }
    }

    let pipeline = MetaplecticPipeline {
        step1_q: b,
        step2_s: s,
        step3_fourier_axes: (r..d).collect(),
        step4_k: k,
        step5_scale: scale,
        maps: [m1, m2, m3, m4, m5],
        composite: composite.clone(),
    };
    let substitution: Vec<Vec<f64>> = (0..d)
        .map(|row| (0..2 * d).map(|col| composite[(row, col)]).collect())
        .collect();
    let reduced = ReducedForm {
        frequencies: freqs.clone(),
        potential_substitution: substitution,
        oscillator_part: freqs
            .iter()
            .enumerate()
            .map(|(j, f)| format!("{f:.12} * (h^2 D_{0}^2 + mu^2 x_{0}^2)", j + 1))
            .collect::<Vec<_>>()
            .join(" + "),
    };
    Ok((pipeline, reduced))
}

/// One compared Landau level in the isospectrality report.
#[derive(Debug, Clone, Serialize)]
pub struct LevelCheck {
    pub expected: f64,
    pub cluster_center: f64,
    pub deviation: f64,
    pub cluster_width: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct IsospectralReport {
    pub levels: Vec<LevelCheck>,
    pub min_gap: f64,
}

/// Compares the k lowest distinct reduced levels E_alpha mu h + V against
/// eigenvalue clusters of the assembled lattice operator on a flux-
/// quantized torus. Errors when clusters are too wide to resolve.
pub fn verify_reduction_isospectral(
    scenario: &Scenario,
    mu: f64,
    h: f64,
    dims: &[usize],
    k: usize,
) -> Result<IsospectralReport> {
    let v0 = match scenario.potential {
        crate::geometry::PotentialSpec::Const(c) => c,
        _ => {
            return Err(Error::invalid_config(
                "scenario.potential",
                "isospectral check needs a constant potential",
            ))
        }
    };
    let center = scenario.domain.center();
    let fi = intensity_matrix(scenario, &center)?;
    fi.require_full_rank()?;
    let freqs = fi.frequencies.clone();
    // k lowest distinct level energies.
    let ground: f64 = freqs.iter().sum();
    let mut cap = ground;
    let mut distinct: Vec<f64>;
    loop {
        let levels = landau_levels(&freqs, cap)?;
        distinct = Vec::new();
        for l in &levels {
            if distinct
                .last()
                .map(|&e| (l.energy - e) > 1e-9)
                .unwrap_or(true)
            {
                distinct.push(l.energy);
            }
        }
        if distinct.len() > k {
            break;
        }
        cap += 2.0 * freqs.iter().cloned().fold(f64::INFINITY, f64::min);
    }
    distinct.truncate(k + 1);
    let min_gap = distinct
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
        * mu
        * h;

    let lattice = Lattice::new(scenario, dims, Boundary::Periodic)?;
    let ham = assemble(scenario, mu, h, &lattice)?;
    let tau_top = 0.5 * (distinct[k - 1] + distinct[k]) * mu * h + v0;
    let mut dense = ham.to_dense();
    let (evals, _) = zheevr_range(&mut dense, ham.n, f64::NEG_INFINITY, tau_top)?;
    let clusters = cluster_eigenvalues(&evals, 0.25 * min_gap);

    let mut levels_out = Vec::new();
    for (i, &e) in distinct.iter().take(k).enumerate() {
        let expected = e * mu * h + v0;
        let Some(cluster) = clusters.get(i) else {
            return Err(Error::ClusterUnresolved {
                width: f64::NAN,
                gap: min_gap,
            });
        };
        if cluster.width() > 0.5 * min_gap {
            return Err(Error::ClusterUnresolved {
                width: cluster.width(),
                gap: min_gap,
            });
        }
        levels_out.push(LevelCheck {
            expected,
            cluster_center: cluster.center,
            deviation: cluster.center - expected,
            cluster_width: cluster.width(),
            multiplicity: cluster.count,
        });
    }
    Ok(IsospectralReport {
        levels: levels_out,
        min_gap,
    })
}
