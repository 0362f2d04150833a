use crate::error::{Error, Result};
use crate::oracle::DiscreteHamiltonian;

/// Symmetric skyline (profile) matrix: row i stores columns
/// start[i]..=i contiguously. The profile of the lexicographic grid
/// ordering is kept as-is; no fill-reducing reordering.
// TODO: reorder periodic wraps (reflected/red-black numbering) — the wrap
// rows dominate the factorization cost on 4D tori.
pub struct SkylineMatrix {
    n: usize,
    start: Vec<usize>,
    offset: Vec<usize>,
    vals: Vec<f64>,
}

/// Inertia of one LDL^T factorization.
pub struct Inertia {
    pub negative: usize,
    pub positive: usize,
    pub zero: usize,
    pub min_abs_pivot: f64,
}

impl SkylineMatrix {
    /// Real-symmetric embedding of H - tau I with interleaved components:
    /// site p occupies rows (2p, 2p+1), an entry a+ib becomes the 2x2 block
    /// [[a, -b], [b, a]]. Every complex eigenvalue appears twice.
    pub fn embed_shifted(h: &DiscreteHamiltonian, tau: f64) -> SkylineMatrix {
        let n = 2 * h.n;
        // Row profile: first nonzero column per embedded row.
        let mut start: Vec<usize> = (0..n).map(|i| i & !1usize).collect();
        for hop in &h.hops {
            // hop.from < hop.to: rows 2 to, 2 to + 1 reach back to column 2 from.
            let col = 2 * hop.from;
            for r in [2 * hop.to, 2 * hop.to + 1] {
                if start[r] > col {
                    start[r] = col;
                }
            }
        }
        let mut offset = vec![0usize; n + 1];
        for i in 0..n {
            offset[i + 1] = offset[i] + (i - start[i] + 1);
        }
        let mut vals = vec![0.0f64; offset[n]];
        let set = |vals: &mut Vec<f64>, row: usize, col: usize, v: f64| {
            debug_assert!(col >= start[row] && col <= row);
            vals[offset[row] + (col - start[row])] += v;
        };
        for (p, &d) in h.diag.iter().enumerate() {
            set(&mut vals, 2 * p, 2 * p, d - tau);
            set(&mut vals, 2 * p + 1, 2 * p + 1, d - tau);
        }
        for hop in &h.hops {
            let (a, b) = (hop.amp.re, hop.amp.im);
            let (pf, pt) = (2 * hop.from, 2 * hop.to);
            // Lower triangle rows of the block at (to, from): [[a, -b],[b, a]]
            // H[to, from] = conj(amp) = a - ib, so the block is
            // [[a, b], [-b, a]].
            set(&mut vals, pt, pf, a);
            set(&mut vals, pt, pf + 1, b);
            set(&mut vals, pt + 1, pf, -b);
            set(&mut vals, pt + 1, pf + 1, a);
        }
        SkylineMatrix {
            n,
            start,
            offset,
            vals,
        }
    }

    pub fn storage(&self) -> usize {
        self.vals.len()
    }

    /// In-place LDL^T without pivoting; returns the inertia. Breakdown
    /// (a pivot collapsing to zero) is reported so the caller can jitter
    /// the shift and retry.
    #[allow(clippy::needless_range_loop)]
    pub fn ldlt_inertia(mut self) -> Result<Inertia> {
        let n = self.n;
        let mut d = vec![0.0f64; n];
        // Scale for breakdown detection from the matrix diagonal.
        let scale = (0..n)
            .map(|i| self.vals[self.offset[i + 1] - 1].abs())
            .fold(0.0f64, f64::max)
            .max(1e-300);
        let tol = 1e-14 * scale;
        let mut negative = 0usize;
        let mut positive = 0usize;
        let mut min_abs = f64::INFINITY;
        // w holds L[i][k] * d[k] for the current row before normalization.
        for i in 0..n {
            let si = self.start[i];
            let oi = self.offset[i];
            for j in si..i {
                let sj = self.start[j];
                let lo = si.max(sj);
                let oj = self.offset[j];
                // dot of L-hat row i and L row j over overlapping columns
                let mut sum = 0.0;
                let a = &self.vals[oi + (lo - si)..oi + (j - si)];
                let b = &self.vals[oj + (lo - sj)..oj + (j - sj)];
                for (x, y) in a.iter().zip(b.iter()) {
                    sum += x * y;
                }
                self.vals[oi + (j - si)] -= sum;
            }
            // Pivot: subtract sum of Lhat * L over the row, then normalize.
            let mut pivot = self.vals[self.offset[i + 1] - 1];
            for j in si..i {
                let lhat = self.vals[oi + (j - si)];
                let l = lhat / d[j];
                pivot -= lhat * l;
                self.vals[oi + (j - si)] = l;
            }
            if pivot.abs() <= tol {
                return Err(Error::FactorizationBreakdown { index: i, pivot });
            }
            if pivot < 0.0 {
                negative += 1;
            } else {
                positive += 1;
            }
            min_abs = min_abs.min(pivot.abs());
            d[i] = pivot;
        }
        Ok(Inertia {
            negative,
            positive,
            zero: 0,
            min_abs_pivot: min_abs,
        })
    }
}
