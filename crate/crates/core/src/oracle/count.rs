use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{zheevd, zheevr_range};
use crate::oracle::{DiscreteHamiltonian, SkylineMatrix};
use crate::weyl::CutoffFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMethod {
    Dense,
    Inertia,
}

/// Result of one eigenvalue count #{lambda <= tau}.
#[derive(Debug, Clone, Serialize)]
pub struct CountResult {
    pub count: usize,
    pub n: usize,
    pub method: CountMethod,
    /// Inertia path: negative pivots of the embedded factorization.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub neg_pivots: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_abs_pivot: Option<f64>,
    /// Shift jitter applied after a factorization breakdown.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jitter: Option<f64>,
    /// Dense path: extreme eigenvalues.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eig_extremes: Option<(f64, f64)>,
    pub warnings: Vec<String>,
}

/// Counts eigenvalues of H at or below tau.
///
/// `Dense` runs a full Hermitian eigendecomposition (needs n <= budget);
/// `Inertia` factors the real-symmetric embedding of H - tau I and halves
/// the negative-pivot count, retrying with a jittered shift of
/// 1e-10 * |H| after a factorization breakdown.
pub fn count_below(
    h: &DiscreteHamiltonian,
    tau: f64,
    method: CountMethod,
    dense_budget: usize,
) -> Result<CountResult> {
    match method {
        CountMethod::Dense => {
            if h.n > dense_budget {
                return Err(Error::DenseBudget {
                    n: h.n,
                    budget: dense_budget,
                });
            }
            let mut dense = h.to_dense();
            let evals = zheevd(&mut dense, h.n, false)?;
            let count = evals.iter().filter(|&&e| e <= tau).count();
            Ok(CountResult {
                count,
                n: h.n,
                method,
                neg_pivots: None,
                min_abs_pivot: None,
                jitter: None,
                eig_extremes: Some((evals[0], evals[h.n - 1])),
                warnings: h.warnings.clone(),
            })
        }
        CountMethod::Inertia => {
            let scale = h.norm_estimate();
            let mut jitter_used = None;
            let mut attempt = 0usize;
            loop {
                let shift = match attempt {
                    0 => tau,
                    1 => tau + 1e-10 * scale,
                    2 => tau - 1e-10 * scale,
                    _ => {
                        return Err(Error::FactorizationBreakdown {
                            index: 0,
                            pivot: 0.0,
                        })
                    }
                };
                match SkylineMatrix::embed_shifted(h, shift).ldlt_inertia() {
                    Ok(inertia) => {
                        if inertia.negative % 2 != 0 {
                            return Err(Error::InertiaParity(inertia.negative));
                        }
                        if attempt > 0 {
                            jitter_used = Some(shift - tau);
                        }
                        return Ok(CountResult {
                            count: inertia.negative / 2,
                            n: h.n,
                            method,
                            neg_pivots: Some(inertia.negative),
                            min_abs_pivot: Some(inertia.min_abs_pivot),
                            jitter: jitter_used,
                            eig_extremes: None,
                            warnings: h.warnings.clone(),
                        });
                    }
                    Err(Error::FactorizationBreakdown { .. }) => {
                        attempt += 1;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
}

/// psi-weighted trace of the spectral projector on the lattice:
/// sum_{lambda_k <= tau} sum_n psi(x_n) |u_k(n)|^2 with l2-normalized
/// eigenvectors, so psi = 1 reproduces `count_below` exactly.
pub fn local_trace(
    h: &DiscreteHamiltonian,
    tau: f64,
    psi: &CutoffFunction,
    dense_budget: usize,
) -> Result<f64> {
    if h.n > dense_budget {
        return Err(Error::DenseBudget {
            n: h.n,
            budget: dense_budget,
        });
    }
    let weights: Vec<f64> = (0..h.n)
        .map(|i| psi.eval(&h.lattice.site_coords(i)))
        .collect();
    let mut dense = h.to_dense();
    let (evals, vecs) = zheevr_range(&mut dense, h.n, f64::NEG_INFINITY, tau)?;
    let mut total = 0.0;
    for k in 0..evals.len() {
        let col = &vecs[k * h.n..(k + 1) * h.n];
        let mut acc = 0.0;
        for (w, z) in weights.iter().zip(col.iter()) {
            acc += w * z.norm_sqr();
        }
        total += acc;
    }
    Ok(total)
}

/// An eigenvalue cluster: contiguous eigenvalues separated from the rest
/// by gaps larger than `gap`.
#[derive(Debug, Clone, Serialize)]
pub struct Cluster {
    pub center: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Cluster {
    pub fn width(&self) -> f64 {
        self.max - self.min
    }
}

/// Groups ascending eigenvalues into clusters split at gaps > `gap`.
pub fn cluster_eigenvalues(evals: &[f64], gap: f64) -> Vec<Cluster> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < evals.len() {
        let mut j = i + 1;
        while j < evals.len() && evals[j] - evals[j - 1] <= gap {
            j += 1;
        }
        let slice = &evals[i..j];
        out.push(Cluster {
            center: slice.iter().sum::<f64>() / slice.len() as f64,
            min: slice[0],
            max: slice[j - i - 1],
            count: j - i,
        });
        i = j;
    }
    out
}
