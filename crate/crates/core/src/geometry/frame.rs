use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::FieldIntensity;
use crate::linalg::spd_sqrt;

/// One canonical 2x2 block of the framed intensity: coordinates
/// (plane.0, plane.1) with F[plane.0, plane.1] = frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameBlock {
    pub plane: (usize, usize),
    pub frequency: f64,
}

/// Linear frame bringing (g, F) to the canonical pair (I, J_f) with
/// J_f[j, j+r] = f_j, J_f[j+r, j] = -f_j.
///
/// Conventions: `basis` B satisfies B^T (g_{jk}) B = I for the covariant
/// metric (equivalently (g^{jk}) = B B^T) and B^T F B = J_f.
#[derive(Debug, Clone)]
pub struct SymplecticFrame {
    pub basis: DMatrix<f64>,
    pub blocks: Vec<FrameBlock>,
}

impl SymplecticFrame {
    pub fn frequencies(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.frequency).collect()
    }

    /// Canonical intensity matrix this frame maps to.
    pub fn canonical_f(&self) -> DMatrix<f64> {
        let d = self.basis.nrows();
        let r = d / 2;
        let mut j = DMatrix::zeros(d, d);
        for (p, b) in self.blocks.iter().enumerate() {
            j[(p, p + r)] = b.frequency;
            j[(p + r, p)] = -b.frequency;
        }
        j
    }
}

/// Computes the symplectic frame of a full-rank intensity.
///
/// B = g^{1/2} O where O is an orthogonal matrix bringing the skew matrix
/// F1 = g^{1/2} F g^{1/2} to its real normal form. The O columns are built
/// from the eigenspaces of -F1^2, pairing each unit vector u with F1 u / f.
pub fn symplectic_frame(intensity: &FieldIntensity) -> Result<SymplecticFrame> {
    intensity.require_full_rank()?;
    let d = intensity.dim();
    let r = d / 2;
    let root = spd_sqrt(&intensity.metric)?;
    let f1 = &root * &intensity.f_matrix * &root;
    let s = -(&f1 * &f1);
    let eig = s.symmetric_eigen();

    let freqs = intensity.frequencies.clone();
    let f_max = freqs[0];
    let mut chosen: Vec<DVector<f64>> = Vec::with_capacity(d);
    let mut o = DMatrix::zeros(d, d);
    for (p, &fp) in freqs.iter().enumerate() {
        // Eigenspace of -F1^2 for f_p^2 (includes partners of equal
        // frequencies picked in earlier rounds).
        let mut cand: Vec<DVector<f64>> = Vec::new();
        for c in 0..d {
            if (eig.eigenvalues[c] - fp * fp).abs() <= 1e-7 * f_max * f_max {
                cand.push(eig.eigenvectors.column(c).into_owned());
            }
        }
        if cand.len() < 2 {
            return Err(Error::UnpairedEigenvalue {
                value: fp * fp,
                residual: f64::NAN,
                tol: 1e-7 * f_max * f_max,
            });
        }
        // Deterministic pick: orthogonalize candidates against the already
        // chosen columns, then take the one with the earliest dominant
        // component (sign-fixed positive). On canonical input this yields
        // O = I exactly.
        let mut best: Option<DVector<f64>> = None;
        let mut best_key = (usize::MAX, 0.0f64);
        for v in &cand {
            let mut w = v.clone();
            for u in &chosen {
                let proj = u.dot(&w);
                w -= u * proj;
            }
            let norm = w.norm();
            if norm < 1e-8 {
                continue;
            }
            w /= norm;
            let (mut lead, mut mag) = (0usize, 0.0f64);
            for (i, &c) in w.iter().enumerate() {
                if c.abs() > mag + 1e-12 {
                    mag = c.abs();
                    lead = i;
                }
            }
            if lead < best_key.0 || (lead == best_key.0 && mag > best_key.1) {
                best_key = (lead, mag);
                let sign = if w[lead] < 0.0 { -1.0 } else { 1.0 };
                best = Some(w * sign);
            }
        }
        let u = best.ok_or(Error::RankDeficient {
            rank: 2 * p,
            dim: d,
        })?;
        let v = -(&f1 * &u) / fp;
        chosen.push(u.clone());
        chosen.push(v.clone());
        o.set_column(p, &u);
        o.set_column(p + r, &v);
    }

    let basis = &root * &o;
    let frame = SymplecticFrame {
        basis,
        blocks: freqs
            .iter()
            .enumerate()
            .map(|(p, &f)| FrameBlock {
                plane: (p, p + r),
                frequency: f,
            })
            .collect(),
    };

    // Residual check: off-pattern entries of B^T F B below 1e-10 * max f.
    let framed = frame.basis.transpose() * &intensity.f_matrix * &frame.basis;
    let resid = (&framed - frame.canonical_f()).amax();
    if resid > 1e-10 * f_max {
        return Err(Error::Derivative(format!(
            "symplectic frame residual {resid:.3e} exceeds 1e-10 * max f"
        )));
    }
    Ok(frame)
}
