use serde::Serialize;

use crate::error::{Error, Result};

/// Hard cap on the resonance order scan; the lattice box grows like
/// (2*order+1)^r.
const ORDER_GUARD: u32 = 8;

/// One integer relation sum_j gamma_j f_j = 0 (within tolerance).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceRelation {
    pub gamma: Vec<i32>,
    /// |gamma| = sum |gamma_j|.
    pub order: u32,
    /// |sum gamma_j f_j|.
    pub residual: f64,
}

/// The groupings of {1..r}: `groups_m` collects nearly-equal frequencies
/// (second order), `groups_n` additionally closes under third-order
/// relations f_i = f_j + f_k. Indices are 0-based; reports print 1-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonancePartition {
    pub groups_m: Vec<Vec<usize>>,
    pub groups_n: Vec<Vec<usize>>,
    pub eps: f64,
}

impl ResonancePartition {
    pub fn build(freqs: &[f64], eps: f64) -> Self {
        let groups_m = partition_second_order(freqs, eps);
        let groups_n = partition_third_order(freqs, &groups_m, eps);
        ResonancePartition {
            groups_m,
            groups_n,
            eps,
        }
    }

    /// Every m-group must sit inside exactly one n-group.
    pub fn m_refines_n(&self) -> bool {
        self.groups_m.iter().all(|m| {
            self.groups_n
                .iter()
                .filter(|n| m.iter().all(|i| n.contains(i)))
                .count()
                == 1
        })
    }
}

/// Exhaustive scan for resonances of order 2..=max_order. Gamma vectors are
/// deduplicated up to sign by requiring the first nonzero entry positive;
/// accepted when |sum gamma_j f_j| <= tol * max f.
pub fn enumerate_resonances(
    freqs: &[f64],
    max_order: u32,
    tol: f64,
) -> Result<Vec<ResonanceRelation>> {
    if max_order > ORDER_GUARD {
        return Err(Error::OrderGuard(max_order));
    }
    let r = freqs.len();
    let f_max = freqs.iter().cloned().fold(0.0f64, f64::max);
    let mut out = Vec::new();
    let mut gamma = vec![0i32; r];
    scan(freqs, max_order, tol * f_max, &mut gamma, 0, 0, &mut out);
    out.sort_by(|a, b| (a.order, &a.gamma).cmp(&(b.order, &b.gamma)));
    Ok(out)
}

fn scan(
    freqs: &[f64],
    max_order: u32,
    tol_abs: f64,
    gamma: &mut Vec<i32>,
    pos: usize,
    used: u32,
    out: &mut Vec<ResonanceRelation>,
) {
    if pos == freqs.len() {
        let order = used;
        if order < 2 {
            return;
        }
        if gamma
            .iter()
            .find(|&&g| g != 0)
            .map(|&g| g < 0)
            .unwrap_or(true)
        {
            return; // dedupe +-gamma: first nonzero entry must be positive
        }
        let residual = gamma
            .iter()
            .zip(freqs.iter())
            .map(|(&g, &f)| g as f64 * f)
            .sum::<f64>()
            .abs();
        if residual <= tol_abs {
            out.push(ResonanceRelation {
                gamma: gamma.clone(),
                order,
                residual,
            });
        }
        return;
    }
    let budget = (max_order - used) as i32;
    for g in -budget..=budget {
        gamma[pos] = g;
        scan(
            freqs,
            max_order,
            tol_abs,
            gamma,
            pos + 1,
            used + g.unsigned_abs(),
            out,
        );
    }
    gamma[pos] = 0;
}

/// Union-find closure of |f_i - f_j| <= eps * max f. Smallest index is the
/// representative; groups come out sorted for deterministic output.
pub fn partition_second_order(freqs: &[f64], eps: f64) -> Vec<Vec<usize>> {
    let r = freqs.len();
    let f_max = freqs.iter().cloned().fold(0.0f64, f64::max);
    let mut uf = UnionFind::new(r);
    for i in 0..r {
        for j in i + 1..r {
            if (freqs[i] - freqs[j]).abs() <= eps * f_max {
                uf.union(i, j);
            }
        }
    }
    uf.groups()
}

/// Starting from the second-order groups, merges whenever a triple
/// (i, j, k), repetition j = k allowed, satisfies |f_i - f_j - f_k| <=
/// eps * max f; iterates to a fixpoint.
pub fn partition_third_order(freqs: &[f64], groups_m: &[Vec<usize>], eps: f64) -> Vec<Vec<usize>> {
    let r = freqs.len();
    let f_max = freqs.iter().cloned().fold(0.0f64, f64::max);
    let mut uf = UnionFind::new(r);
    for g in groups_m {
        for w in g.windows(2) {
            uf.union(w[0], w[1]);
        }
    }
    loop {
        let mut changed = false;
        for i in 0..r {
            for j in 0..r {
                for k in j..r {
                    if (freqs[i] - freqs[j] - freqs[k]).abs() <= eps * f_max {
                        changed |= uf.union(i, j);
                        changed |= uf.union(i, k);
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    uf.groups()
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    /// Smaller root wins, keeping the smallest index as representative.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }

    fn groups(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            let r = self.find(i);
            by_root[r].push(i);
        }
        let mut out: Vec<Vec<usize>> = by_root.into_iter().filter(|g| !g.is_empty()).collect();
        out.sort_by_key(|g| g[0]);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_two_has_single_third_order_relation() {
        // 2 f1 = f2: gamma = (2, -1), order 3, after +-dedup.
        let rel = enumerate_resonances(&[1.0, 2.0], 3, 1e-9).unwrap();
        assert_eq!(rel.len(), 1);
        assert_eq!(rel[0].gamma, vec![2, -1]);
        assert_eq!(rel[0].order, 3);
        assert!(rel[0].residual < 1e-12);
    }

    #[test]
    fn irrational_ratio_has_no_relations() {
        let rel = enumerate_resonances(&[1.0, std::f64::consts::PI], 6, 1e-9).unwrap();
        assert!(rel.is_empty());
    }

    #[test]
    fn equal_frequencies_second_order() {
        let rel = enumerate_resonances(&[1.0, 1.0], 2, 1e-9).unwrap();
        assert_eq!(rel.len(), 1);
        assert_eq!(rel[0].gamma, vec![1, -1]);
        assert_eq!(rel[0].order, 2);
    }

    #[test]
    fn order_guard_enforced() {
        assert!(matches!(
            enumerate_resonances(&[1.0], 9, 1e-9),
            Err(Error::OrderGuard(9))
        ));
    }

    #[test]
    fn second_order_partitions() {
        assert_eq!(
            partition_second_order(&[1.0, 1.0, 2.0], 1e-6),
            vec![vec![0, 1], vec![2]]
        );
        assert_eq!(
            partition_second_order(&[1.0, 2.0, 3.0], 1e-6),
            vec![vec![0], vec![1], vec![2]]
        );
    }

    #[test]
    fn second_order_boundary_case_within_tolerance() {
        let eps = 1e-6;
        let f_max = 2.0;
        let f = [1.0, 1.0 + 0.5 * eps * f_max, 2.0];
        assert_eq!(partition_second_order(&f, eps), vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn third_order_merges_one_two_three() {
        let f = [1.0, 2.0, 3.0];
        let m = partition_second_order(&f, 1e-6);
        let n = partition_third_order(&f, &m, 1e-6);
        assert_eq!(n, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn third_order_ignores_higher_order_relation() {
        // 5 = 1 + 2*2 is order 4, not a triple relation, so index 2 stays
        // alone; 2 = 1 + 1 is a j = k triple and merges the first two.
        let f = [1.0, 2.0, 5.0];
        let m = partition_second_order(&f, 1e-6);
        let n = partition_third_order(&f, &m, 1e-6);
        assert_eq!(n, vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn third_order_repetition_case() {
        // f2 = f1 + f1 with j = k.
        let f = [1.0, 2.0];
        let m = partition_second_order(&f, 1e-6);
        let n = partition_third_order(&f, &m, 1e-6);
        assert_eq!(n, vec![vec![0, 1]]);
    }

    #[test]
    fn partition_m_refines_n() {
        let p = ResonancePartition::build(&[1.0, 1.0, 2.0, 3.0, 7.1], 1e-6);
        assert!(p.m_refines_n());
    }

    #[test]
    fn zero_eps_gives_exact_equality_classes() {
        let f = [1.0, 2.0, 1.0, 3.0];
        let m = partition_second_order(&f, 0.0);
        assert_eq!(m, vec![vec![0, 2], vec![1], vec![3]]);
    }
}
