use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{GaugeSpec, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Dirichlet,
    Periodic,
}

/// Uniform tensor grid over the scenario domain. Dirichlet keeps interior
/// points x_i = lo + (i+1) dx with dx = L/(n+1); periodic identifies the
/// endpoints, x_i = lo + i dx with dx = L/n.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Lattice {
    pub dims: Vec<usize>,
    pub spacing: Vec<f64>,
    pub origin: Vec<f64>,
    pub boundary: Boundary,
}

impl Lattice {
    pub fn new(scenario: &Scenario, dims: &[usize], boundary: Boundary) -> Result<Self> {
        if dims.len() != scenario.dim {
            return Err(Error::invalid_config(
                "lattice.n",
                "one grid size per axis required",
            ));
        }
        if dims.iter().any(|&n| n < 4) {
            return Err(Error::invalid_config(
                "lattice.n",
                "need at least 4 points per axis",
            ));
        }
        let mut spacing = Vec::with_capacity(dims.len());
        let mut origin = Vec::with_capacity(dims.len());
        for (a, &n) in dims.iter().enumerate() {
            let side = scenario.domain.side(a);
            match boundary {
                Boundary::Dirichlet => {
                    let dx = side / (n as f64 + 1.0);
                    spacing.push(dx);
                    origin.push(scenario.domain.lo[a] + dx);
                }
                Boundary::Periodic => {
                    let dx = side / n as f64;
                    spacing.push(dx);
                    origin.push(scenario.domain.lo[a]);
                }
            }
        }
        Ok(Lattice {
            dims: dims.to_vec(),
            spacing,
            origin,
            boundary,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.dims.iter().product()
    }

    /// Lexicographic strides, last axis fastest.
    pub fn strides(&self) -> Vec<usize> {
        let d = self.dims.len();
        let mut s = vec![1usize; d];
        for a in (0..d.saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.dims[a + 1];
        }
        s
    }

    pub fn site_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(self.strides().iter())
            .map(|(i, s)| i * s)
            .sum()
    }

    pub fn site_coords(&self, flat: usize) -> Vec<f64> {
        let mut rem = flat;
        let strides = self.strides();
        let mut x = vec![0.0; self.dims.len()];
        for a in 0..self.dims.len() {
            let i = rem / strides[a];
            rem %= strides[a];
            x[a] = self.origin[a] + i as f64 * self.spacing[a];
        }
        x
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }
}

/// One stored link of the Hermitian matrix: `from < to`,
/// H[from, to] = amp and H[to, from] = conj(amp).
#[derive(Debug, Clone, Copy)]
pub struct Hop {
    pub from: usize,
    pub to: usize,
    pub amp: Complex64,
}

/// Sparse Hermitian lattice Hamiltonian. Each link phase is stored once,
/// which keeps H = H* exact by construction.
#[derive(Debug, Clone)]
pub struct DiscreteHamiltonian {
    pub n: usize,
    pub diag: Vec<f64>,
    pub hops: Vec<Hop>,
    pub lattice: Lattice,
    pub scenario_name: String,
    pub mu: f64,
    pub h: f64,
    pub warnings: Vec<String>,
}

impl DiscreteHamiltonian {
    /// Column-major dense copy (both triangles).
    pub fn to_dense(&self) -> Vec<Complex64> {
        let n = self.n;
        let mut m = vec![Complex64::new(0.0, 0.0); n * n];
        for (i, &d) in self.diag.iter().enumerate() {
            m[i * n + i] = Complex64::new(d, 0.0);
        }
        for hop in &self.hops {
            m[hop.to * n + hop.from] = hop.amp; // (row from, col to)
            m[hop.from * n + hop.to] = hop.amp.conj();
        }
        m
    }

    /// Gershgorin bound on the spectral radius; used to scale jitters.
    pub fn norm_estimate(&self) -> f64 {
        let mut row_sum = vec![0.0f64; self.n];
        for hop in &self.hops {
            let a = hop.amp.norm();
            row_sum[hop.from] += a;
            row_sum[hop.to] += a;
        }
        self.diag
            .iter()
            .zip(row_sum.iter())
            .map(|(d, s)| d.abs() + s)
            .fold(0.0, f64::max)
    }
}

/// Second-order finite-difference assembly with gauge-covariant Peierls
/// link phases exp(-i mu dx V_a(midpoint) / h). Metric coefficients are
/// taken at link midpoints (diagonal terms) and plaquette centers (cross
/// terms, symmetric forward/backward averaging). The scalar potential
/// sits on the diagonal.
#[allow(clippy::needless_range_loop)]
pub fn assemble(
    scenario: &Scenario,
    mu: f64,
    h: f64,
    lattice: &Lattice,
) -> Result<DiscreteHamiltonian> {
    let d = scenario.dim;
    let n_sites = lattice.n_sites();
    let strides = lattice.strides();
    let mut warnings = Vec::new();

    if lattice.boundary == Boundary::Periodic {
        if mu > 0.0 && !matches!(scenario.gauge, GaugeSpec::LinearConst(_)) {
            return Err(Error::invalid_config(
                "lattice.bc",
                "periodic boundary requires a constant magnetic field",
            ));
        }
        check_flux_quantization(scenario, mu, h, lattice)?;
    }
    // Gauge-invariant aliasing check: flux per plaquette must stay below
    // pi for every magnetized plane (raw link phases are gauge-dependent
    // and can be large in the Landau gauge without harm). Plus the
    // magnetic-length resolution warning (reported, not fatal).
    if mu > 0.0 {
        for x in scenario.domain.grid(3) {
            let fi = crate::geometry::intensity_matrix(scenario, &x)?;
            for a in 0..d {
                for b in a + 1..d {
                    let plaquette =
                        mu * fi.f_matrix[(a, b)].abs() * lattice.spacing[a] * lattice.spacing[b]
                            / h;
                    if plaquette >= std::f64::consts::PI {
                        return Err(Error::PhaseAliasing {
                            axis: a,
                            phase: plaquette,
                        });
                    }
                }
            }
        }
        let fi = crate::geometry::intensity_matrix(scenario, &scenario.domain.center())?;
        if let Some(&f_max) = fi.frequencies.first() {
            let ell = (h / (mu * f_max)).sqrt();
            for (a, &dx) in lattice.spacing.iter().enumerate() {
                if dx > 0.5 * ell {
                    warnings.push(format!(
                        "axis {a}: spacing {dx:.3e} exceeds half the magnetic length {ell:.3e}"
                    ));
                }
            }
        }
    }

    let mut diag = vec![0.0f64; n_sites];
    let mut hops: Vec<Hop> = Vec::new();
    let metric_const = scenario.metric_at(&scenario.domain.center());

    // Which metric entries are nonzero (registry metrics are constant).
    let mut cross_pairs = Vec::new();
    for j in 0..d {
        for k in j + 1..d {
            if metric_const[(j, k)].abs() > 0.0 {
                cross_pairs.push((j, k));
            }
        }
    }

    let ctx = LinkContext {
        scenario,
        mu,
        h,
        lattice,
    };
    let mut index = vec![0usize; d];
    for flat in 0..n_sites {
        // decode multi-index
        {
            let mut rem = flat;
            for a in 0..d {
                index[a] = rem / strides[a];
                rem %= strides[a];
            }
        }
        let x = lattice.site_coords(flat);
        diag[flat] += scenario.potential_at(&x);

        // Diagonal metric terms: P_a g^{aa} P_a. Both half-link weights go
        // on the diagonal; at Dirichlet walls the truncated link keeps its
        // diagonal weight.
        for a in 0..d {
            let dx = lattice.spacing[a];
            let t_base = h * h / (dx * dx);
            let mut midb = x.clone();
            midb[a] -= 0.5 * dx;
            let mut midf = x.clone();
            midf[a] += 0.5 * dx;
            let g_minus = metric_at_mid(scenario, &midb)[(a, a)];
            let g_plus = metric_at_mid(scenario, &midf)[(a, a)];
            diag[flat] += t_base * (g_minus + g_plus);
            let forward_exists =
                index[a] + 1 < lattice.dims[a] || lattice.boundary == Boundary::Periodic;
            if forward_exists {
                let theta = ctx.step_phase(&index, &x, a, 1);
                let amp = -t_base * g_plus * Complex64::from_polar(1.0, theta);
                let mut nb = index.clone();
                nb[a] = (nb[a] + 1) % lattice.dims[a];
                let to = lattice.site_index(&nb);
                push_hop(&mut hops, flat, to, amp);
            }
        }

        // Cross terms 2 P_j g^{jk} P_k via symmetric averaged mixed
        // differences: links to x + e_j +- e_k with two-leg Peierls paths.
        for &(aj, ak) in &cross_pairs {
            for sign in [1i64, -1i64] {
                let ok_j =
                    index[aj] + 1 < lattice.dims[aj] || lattice.boundary == Boundary::Periodic;
                let ok_k = if sign > 0 {
                    index[ak] + 1 < lattice.dims[ak] || lattice.boundary == Boundary::Periodic
                } else {
                    index[ak] > 0 || lattice.boundary == Boundary::Periodic
                };
                if !ok_j || !ok_k {
                    continue;
                }
                let (dxj, dxk) = (lattice.spacing[aj], lattice.spacing[ak]);
                let mut center = x.clone();
                center[aj] += 0.5 * dxj;
                center[ak] += 0.5 * sign as f64 * dxk;
                let g_jk = metric_at_mid(scenario, &center)[(aj, ak)];
                if g_jk == 0.0 {
                    continue;
                }
                // coefficient -+ g^{jk} h^2 / (2 dxj dxk)
                let coef = -(sign as f64) * g_jk * h * h / (2.0 * dxj * dxk);
                // Two-leg paths x -> x+ej -> x+ej+s ek and x -> x+s ek -> ...
                let phase1 = ctx.two_leg_phase(&index, &x, aj, 1, ak, sign);
                let phase2 = ctx.two_leg_phase(&index, &x, ak, sign, aj, 1);
                let amp = coef
                    * 0.5
                    * (Complex64::from_polar(1.0, phase1) + Complex64::from_polar(1.0, phase2));
                let mut nb = index.clone();
                nb[aj] = (nb[aj] + 1) % lattice.dims[aj];
                nb[ak] = ((nb[ak] as i64 + sign).rem_euclid(lattice.dims[ak] as i64)) as usize;
                let to = lattice.site_index(&nb);
                push_hop(&mut hops, flat, to, amp);
            }
        }
    }

    Ok(DiscreteHamiltonian {
        n: n_sites,
        diag,
        hops,
        lattice: lattice.clone(),
        scenario_name: scenario.name.clone(),
        mu,
        h,
        warnings,
    })
}

fn metric_at_mid(scenario: &Scenario, x: &[f64]) -> nalgebra::DMatrix<f64> {
    // Registry metrics are constant maps; evaluate at the point anyway so a
    // future variable metric lands in the right place.
    scenario.metric_at(x)
}

/// Gauge transition picked up when a path crosses the upper boundary of
/// `axis` on the torus: the linear potential satisfies
/// A(x + L e_a) = A(x) + grad chi_a with chi_a(x) = L_a sum_j M[j,a] x_j,
/// and wavefunctions twist by exp(i mu chi_a / h). Constant offsets cancel.
fn wrap_transition(scenario: &Scenario, axis: usize, dest: &[f64]) -> f64 {
    match &scenario.gauge {
        GaugeSpec::LinearConst(m) => {
            let l = scenario.domain.side(axis);
            l * dest
                .iter()
                .enumerate()
                .map(|(j, &xj)| m[(j, axis)] * xj)
                .sum::<f64>()
        }
        _ => 0.0, // periodic assembly rejects non-constant fields upfront
    }
}

/// Shared data of the link-phase computation.
struct LinkContext<'a> {
    scenario: &'a Scenario,
    mu: f64,
    h: f64,
    lattice: &'a Lattice,
}

impl LinkContext<'_> {
    /// Peierls phase of one lattice step from the site at (`idx`, `x`)
    /// along `axis` in direction `dir`: midpoint line integral of the
    /// vector potential plus the boundary twist on wrap links. A downward
    /// crossing is the conjugate of the upward crossing over the same pair.
    fn step_phase(&self, idx: &[usize], x: &[f64], axis: usize, dir: i64) -> f64 {
        let lattice = self.lattice;
        let dx = lattice.spacing[axis];
        if dir < 0 {
            // phase(x -> x - dx) = -phase(dest -> dest + dx)
            let mut didx = idx.to_vec();
            let mut dxs = x.to_vec();
            if idx[axis] == 0 {
                didx[axis] = lattice.dims[axis] - 1;
                dxs[axis] = lattice.origin[axis] + (lattice.dims[axis] - 1) as f64 * dx;
            } else {
                didx[axis] -= 1;
                dxs[axis] -= dx;
            }
            return -self.step_phase(&didx, &dxs, axis, 1);
        }
        let mut mid = x.to_vec();
        mid[axis] += 0.5 * dx;
        let gauge = self.scenario.gauge_at(&mid);
        let mut theta = -self.mu * dx * gauge[axis] / self.h;
        if idx[axis] + 1 == lattice.dims[axis] && lattice.boundary == Boundary::Periodic {
            let mut dest = x.to_vec();
            dest[axis] = lattice.origin[axis];
            theta += self.mu * wrap_transition(self.scenario, axis, &dest) / self.h;
        }
        theta
    }

    /// Phase along the two-leg path x -> x + d1 e_a1 -> + d2 e_a2.
    fn two_leg_phase(
        &self,
        idx: &[usize],
        x: &[f64],
        a1: usize,
        d1: i64,
        a2: usize,
        d2: i64,
    ) -> f64 {
        let lattice = self.lattice;
        let first = self.step_phase(idx, x, a1, d1);
        let mut idx2 = idx.to_vec();
        let mut x2 = x.to_vec();
        let n1 = lattice.dims[a1];
        if d1 > 0 {
            idx2[a1] = (idx2[a1] + 1) % n1;
        } else {
            idx2[a1] = (idx2[a1] + n1 - 1) % n1;
        }
        x2[a1] = lattice.origin[a1] + idx2[a1] as f64 * lattice.spacing[a1];
        first + self.step_phase(&idx2, &x2, a2, d2)
    }
}

fn push_hop(hops: &mut Vec<Hop>, a: usize, b: usize, amp: Complex64) {
    if a == b {
        return;
    }
    // Distinct links never join the same site pair for dims >= 4, so each
    // push is a fresh entry.
    let (from, to, amp) = if a < b {
        (a, b, amp)
    } else {
        (b, a, amp.conj())
    };
    hops.push(Hop { from, to, amp });
}

/// Constant-field tori need integer flux through every magnetized plane;
/// variable fields are integrated plaquette-by-plaquette.
fn check_flux_quantization(scenario: &Scenario, mu: f64, h: f64, lattice: &Lattice) -> Result<()> {
    if mu == 0.0 {
        return Ok(());
    }
    let d = scenario.dim;
    match &scenario.gauge {
        GaugeSpec::LinearConst(m) => {
            let f = m.transpose() - m;
            for a in 0..d {
                for b in a + 1..d {
                    if f[(a, b)].abs() > 1e-14 {
                        let quanta =
                            mu * f[(a, b)] * scenario.domain.side(a) * scenario.domain.side(b)
                                / (2.0 * std::f64::consts::PI * h);
                        if (quanta - quanta.round()).abs() > 1e-8 * quanta.abs().max(1.0) {
                            return Err(Error::FluxQuantization {
                                axis_a: a,
                                axis_b: b,
                                flux: quanta,
                            });
                        }
                    }
                }
            }
            Ok(())
        }
        _ => {
            // Midpoint integral of F_{01} over the domain (2D variable-field
            // entries only).
            let n = 64;
            let mut total = 0.0;
            for x in scenario.domain.grid(n) {
                let fi = crate::geometry::intensity_matrix(scenario, &x)?;
                total += fi.f_matrix[(0, 1)];
            }
            total *= scenario.domain.side(0) * scenario.domain.side(1) / (n * n) as f64;
            let quanta = mu * total / (2.0 * std::f64::consts::PI * h);
            if (quanta - quanta.round()).abs() > 1e-6 * quanta.abs().max(1.0) {
                return Err(Error::FluxQuantization {
                    axis_a: 0,
                    axis_b: 1,
                    flux: quanta,
                });
            }
            let _ = lattice;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::registry;

    #[test]
    fn lattice_geometry() {
        let s = registry("const2d").unwrap();
        let l = Lattice::new(&s, &[4, 8], Boundary::Dirichlet).unwrap();
        assert_eq!(l.n_sites(), 32);
        assert_eq!(l.strides(), vec![8, 1]);
        assert!((l.spacing[0] - 1.0 / 5.0).abs() < 1e-15);
        assert!((l.spacing[1] - 1.0 / 9.0).abs() < 1e-15);
        let x = l.site_coords(9); // index (1, 1)
        assert!((x[0] - 2.0 / 5.0).abs() < 1e-15);
        assert!((x[1] - 2.0 / 9.0).abs() < 1e-15);
        assert!(Lattice::new(&s, &[3, 8], Boundary::Dirichlet).is_err());
    }

    #[test]
    fn zero_field_is_real_and_matches_reference_assembler() {
        // mu = 0: independent dense assembler for sum g^{jk} h^2 D_j D_k + V
        // with a non-diagonal metric, entry by entry.
        let mut s = registry("const2d").unwrap();
        s.metric = crate::geometry::MetricSpec::Const(nalgebra::dmatrix![2.0, 0.5; 0.5, 1.0]);
        s.potential = crate::geometry::PotentialSpec::Affine {
            c: -1.0,
            grad: vec![0.5, 0.0],
        };
        let l = Lattice::new(&s, &[5, 4], Boundary::Dirichlet).unwrap();
        let h = 0.3;
        let ham = assemble(&s, 0.0, h, &l).unwrap();
        let dense = ham.to_dense();
        for v in &dense {
            assert!(v.im.abs() < 1e-15, "complex entry without field");
        }
        let n = ham.n;
        let reference = reference_real_assembler(&s, h, &l);
        for col in 0..n {
            for row in 0..n {
                let got = dense[col * n + row].re;
                let want = reference[col * n + row];
                assert!(
                    (got - want).abs() <= 1e-12 * want.abs().max(1.0),
                    "entry ({row},{col}): {got} vs {want}"
                );
            }
        }
    }

    /// Straightforward independent stencil assembler used only as a test
    /// oracle: builds the same operator from difference-operator
    /// composition rather than link bookkeeping.
    fn reference_real_assembler(s: &Scenario, h: f64, l: &Lattice) -> Vec<f64> {
        let n = l.n_sites();
        let d = s.dim;
        let g = s.metric_at(&s.domain.center());
        let mut m = vec![0.0f64; n * n];
        let strides = l.strides();
        let decode = |flat: usize| {
            let mut rem = flat;
            let mut idx = vec![0usize; d];
            for a in 0..d {
                idx[a] = rem / strides[a];
                rem %= strides[a];
            }
            idx
        };
        let inside = |idx: &[i64]| {
            idx.iter()
                .zip(l.dims.iter())
                .all(|(&i, &n)| i >= 0 && (i as usize) < n)
        };
        let flatten = |idx: &[i64]| -> usize {
            idx.iter()
                .zip(strides.iter())
                .map(|(&i, &s)| i as usize * s)
                .sum()
        };
        for flat in 0..n {
            let idx = decode(flat);
            let x = l.site_coords(flat);
            m[flat * n + flat] += s.potential_at(&x);
            for a in 0..d {
                let t = h * h / (l.spacing[a] * l.spacing[a]) * g[(a, a)];
                m[flat * n + flat] += 2.0 * t;
                for dir in [-1i64, 1] {
                    let mut nb: Vec<i64> = idx.iter().map(|&v| v as i64).collect();
                    nb[a] += dir;
                    if inside(&nb) {
                        let to = flatten(&nb);
                        m[to * n + flat] += -t;
                    }
                }
            }
            for aj in 0..d {
                for ak in aj + 1..d {
                    if g[(aj, ak)] == 0.0 {
                        continue;
                    }
                    let c = g[(aj, ak)] * h * h / (2.0 * l.spacing[aj] * l.spacing[ak]);
                    for (sj, sk, sign) in [
                        (1i64, 1i64, -1.0f64),
                        (-1, -1, -1.0),
                        (1, -1, 1.0),
                        (-1, 1, 1.0),
                    ] {
                        let mut nb: Vec<i64> = idx.iter().map(|&v| v as i64).collect();
                        nb[aj] += sj;
                        nb[ak] += sk;
                        if inside(&nb) {
                            let to = flatten(&nb);
                            m[to * n + flat] += sign * c;
                        }
                    }
                }
            }
        }
        m
    }

    #[test]
    fn one_dimensional_free_spectrum_is_classic() {
        // 1D free Dirichlet spectrum through a thin 2D strip is awkward;
        // instead check the 2D free Dirichlet spectrum against the tensor
        // sum of 1D finite-difference eigenvalues
        // 4 h^2/dx^2 sin^2(pi k / (2(n+1))).
        let mut s = registry("const2d").unwrap();
        s.potential = crate::geometry::PotentialSpec::Const(0.0);
        let (n1, n2) = (8usize, 6usize);
        let l = Lattice::new(&s, &[n1, n2], Boundary::Dirichlet).unwrap();
        let h = 1.0;
        let ham = assemble(&s, 0.0, h, &l).unwrap();
        let mut dense = ham.to_dense();
        let evals = crate::linalg::zheevd(&mut dense, ham.n, false).unwrap();
        let fd_1d = |n: usize, dx: f64| -> Vec<f64> {
            (1..=n)
                .map(|k| {
                    let s = (std::f64::consts::PI * k as f64 / (2.0 * (n as f64 + 1.0))).sin();
                    4.0 * h * h / (dx * dx) * s * s
                })
                .collect()
        };
        let e1 = fd_1d(n1, l.spacing[0]);
        let e2 = fd_1d(n2, l.spacing[1]);
        let mut expect: Vec<f64> = e1
            .iter()
            .flat_map(|a| e2.iter().map(move |b| a + b))
            .collect();
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in evals.iter().zip(expect.iter()) {
            assert!(
                (got - want).abs() <= 1e-10 * want.max(1.0),
                "{got} vs {want}"
            );
        }
        // Free spectrum is nonnegative.
        assert!(evals[0] >= -1e-12);
    }

    #[test]
    fn flux_quantization_enforced_on_torus() {
        let s = registry("const2d").unwrap();
        let l = Lattice::new(&s, &[8, 8], Boundary::Periodic).unwrap();
        // mu B L^2/(2 pi h) = 12 already integral for h = mu/(24 pi):
        let mu = 8.0;
        let h = mu / (24.0 * std::f64::consts::PI);
        assert!(assemble(&s, mu, h, &l).is_ok());
        // Slightly detuned h breaks quantization.
        assert!(matches!(
            assemble(&s, mu, h * 1.01, &l),
            Err(Error::FluxQuantization { .. })
        ));
    }

    #[test]
    fn phase_aliasing_detected() {
        let s = registry("const2d").unwrap();
        let l = Lattice::new(&s, &[4, 4], Boundary::Dirichlet).unwrap();
        // Flux per plaquette mu B dx^2 / h beyond pi.
        assert!(matches!(
            assemble(&s, 400.0, 0.01, &l),
            Err(Error::PhaseAliasing { .. })
        ));
    }

    #[test]
    fn coarse_lattice_warns_about_magnetic_length() {
        let s = registry("const2d").unwrap();
        let l = Lattice::new(&s, &[4, 4], Boundary::Dirichlet).unwrap();
        // Plaquette flux 6 * 0.04 / 0.3 = 0.8 < pi, but dx = 0.2 exceeds
        // half the magnetic length sqrt(0.3/6) = 0.224.
        let ham = assemble(&s, 6.0, 0.3, &l).unwrap();
        assert!(!ham.warnings.is_empty());
    }
}
