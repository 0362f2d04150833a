//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line with the measured numbers. Criterion tolerances are pinned here.
//!
//! Criterion 1's Landau-cluster bound of 5 dx^2 is asserted exactly as
//! stated even though the second-order covariant stencil has an intrinsic
//! cluster shift of mu^2 dx^2 / 8 = 8 dx^2 at mu = 8, so that sub-check
//! fails with the measured constant printed; the count-equality and
//! runtime clauses hold.

use std::time::Instant;

use magweyl::config::ScenarioConfig;
use magweyl::experiments::{fit_scaling, run_remainder_sweep, Regime, SweepSpec};
use magweyl::geometry::{drift_flow, registry};
use magweyl::linalg::zheevd;
use magweyl::oracle::{
    assemble, cluster_eigenvalues, count_below, Boundary, CountMethod, Lattice,
    DENSE_BUDGET_DEFAULT,
};
use magweyl::reduction::{reduce_constant, symplectic_residual, verify_reduction_isospectral};
use magweyl::resonance::{
    enumerate_resonances, partition_second_order, partition_third_order, ResonancePartition,
};
use magweyl::weyl::{integrate_density, CutoffFunction, DensityKind, QuadratureSpec, WeylParams};

const FLUX_2PI: f64 = 2.0 * std::f64::consts::PI;

fn whole_domain_cutoff(dim: usize) -> CutoffFunction {
    CutoffFunction::Indicator {
        lo: vec![-1e3; dim],
        hi: vec![1e3; dim],
    }
}

/// Criterion 1: 2D torus, g = I, B = 1, V = -1, mu = 8, flux 12. Mid-gap
/// counts below zero equal the integrated magnetic Weyl density exactly;
/// clusters within 5 dx^2 of (2a+1) mu h - 1; under 60 s.
#[test]
fn criterion_1_constant_field_exactness() {
    let start = Instant::now();
    let scenario = registry("const2d").unwrap();
    let mu = 8.0;
    let n_phi = 12.0;
    let h = mu / (FLUX_2PI * n_phi);
    let n = 48usize;
    let dx = 1.0 / n as f64;
    let lattice = Lattice::new(&scenario, &[n, n], Boundary::Periodic).unwrap();
    let ham = assemble(&scenario, mu, h, &lattice).unwrap();
    let mut dense = ham.to_dense();
    let evals = zheevd(&mut dense, ham.n, false).unwrap();

    // Landau levels below zero and the mid-gap tau fenceposts.
    let mu_h = mu * h;
    let mut below: Vec<f64> = Vec::new();
    let mut alpha = 0u32;
    loop {
        let level = (2.0 * alpha as f64 + 1.0) * mu_h - 1.0;
        if level >= 0.0 {
            break;
        }
        below.push(level);
        alpha += 1;
    }
    assert!(!below.is_empty());
    let mut fence = vec![-1.0];
    fence.extend(below.iter().copied());
    fence.push(0.0);
    let taus: Vec<f64> = fence.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();

    let mut count_ok = true;
    let mut count_report = Vec::new();
    for &tau in &taus {
        let dense_count = evals.iter().filter(|&&e| e <= tau).count();
        let inertia = count_below(&ham, tau, CountMethod::Inertia, DENSE_BUDGET_DEFAULT)
            .unwrap()
            .count;
        let quad = integrate_density(
            DensityKind::MagneticFullRank,
            &scenario,
            &whole_domain_cutoff(2),
            &WeylParams::new(mu, h, tau).unwrap(),
            &QuadratureSpec {
                base_n: 8,
                budget: 100_000,
            },
        )
        .unwrap();
        let weyl_int = quad.value;
        let matches = dense_count == inertia
            && (weyl_int - dense_count as f64).abs() <= 1e-9 * (1.0 + weyl_int.abs());
        count_ok &= matches;
        count_report.push(format!(
            "tau={tau:.4}: count={dense_count} inertia={inertia} weyl={weyl_int:.9}"
        ));
    }

    // Clusters below zero against (2 alpha + 1) mu h - 1.
    let below_evals: Vec<f64> = evals.iter().copied().filter(|&e| e < 0.0).collect();
    let clusters = cluster_eigenvalues(&below_evals, mu_h);
    let mut cluster_ok = clusters.len() == below.len();
    let mut cluster_report = Vec::new();
    for (cluster, level) in clusters.iter().zip(below.iter()) {
        let dev = (cluster.center - level).abs();
        cluster_ok &= dev <= 5.0 * dx * dx;
        cluster_report.push(format!(
            "level {level:.5}: center {:.5}, |dev| = {dev:.3e} = {:.2} dx^2 (bound 5 dx^2), mult {}",
            cluster.center,
            dev / (dx * dx),
            cluster.count
        ));
    }
    let elapsed = start.elapsed().as_secs_f64();
    let runtime_ok = elapsed < 60.0;
    let pass = count_ok && cluster_ok && runtime_ok;
    println!(
        "criterion 1 (constant-field exactness): {} — counts {} [{}]; clusters {} [{}]; runtime {:.1}s (< 60s {})",
        if pass { "PASS" } else { "FAIL" },
        if count_ok { "PASS" } else { "FAIL" },
        count_report.join("; "),
        if cluster_ok { "PASS" } else { "FAIL" },
        cluster_report.join("; "),
        elapsed,
        if runtime_ok { "ok" } else { "exceeded" },
    );
    assert!(
        pass,
        "criterion 1: counts {count_ok} ({count_report:?}), clusters {cluster_ok} ({cluster_report:?}), runtime {elapsed:.1}s"
    );
}

/// Criterion 2: 4D constant field f = (1,2), fluxes (3,2): lowest cluster
/// at 3 mu h + V with multiplicity 6, mid-gap count matches the integrated
/// density within +-1; under 10 minutes.
#[test]
fn criterion_2_four_dimensional_landau_structure() {
    let start = Instant::now();
    let side34 = 1.0 / 3.0f64.sqrt();
    let mut sc = ScenarioConfig::plain("res4d");
    sc.domain_lo = Some(vec![0.0; 4]);
    sc.domain_hi = Some(vec![1.0, 1.0, side34, side34]);
    let scenario = sc.build().unwrap();
    let mu = 8.0;
    let h = mu / (6.0 * std::f64::consts::PI); // mu/(2 pi h) = 3 => fluxes (3, 2)
    let mu_h = mu * h;
    let lattice = Lattice::new(&scenario, &[8, 8, 8, 8], Boundary::Periodic).unwrap();
    let ham = assemble(&scenario, mu, h, &lattice).unwrap();
    assert_eq!(ham.n, 4096);

    let ground = 3.0 * mu_h - 1.0;
    let window = 0.5 * mu_h;
    let below = count_below(&ham, ground - window, CountMethod::Inertia, 0)
        .unwrap()
        .count;
    let above = count_below(&ham, ground + window, CountMethod::Inertia, 0)
        .unwrap()
        .count;
    let multiplicity = above - below;
    let mult_ok = below == 0 && multiplicity == 6;

    // Mid-gap between the E = 3 and E = 5 clusters.
    let tau = 4.0 * mu_h - 1.0;
    let count = count_below(&ham, tau, CountMethod::Inertia, 0)
        .unwrap()
        .count;
    let quad = integrate_density(
        DensityKind::MagneticFullRank,
        &scenario,
        &whole_domain_cutoff(4),
        &WeylParams::new(mu, h, tau).unwrap(),
        &QuadratureSpec {
            base_n: 6,
            budget: 1_000_000,
        },
    )
    .unwrap();
    let count_ok = (count as f64 - quad.value).abs() <= 1.0;
    let elapsed = start.elapsed().as_secs_f64();
    let runtime_ok = elapsed < 600.0;
    let pass = mult_ok && count_ok && runtime_ok;
    println!(
        "criterion 2 (4D Landau structure): {} — ground cluster mult {multiplicity} (expect 6, {} below window); mid-gap count {count} vs integral {:.6} (|diff| <= 1); runtime {:.1}s (< 600s {})",
        if pass { "PASS" } else { "FAIL" },
        below,
        quad.value,
        elapsed,
        if runtime_ok { "ok" } else { "exceeded" },
    );
    assert!(
        pass,
        "criterion 2: mult {multiplicity}, count {count} vs {:.6}",
        quad.value
    );
}

fn microhyperbolic_spec(h_list: Vec<f64>) -> SweepSpec {
    SweepSpec {
        scenario: registry("var2d").unwrap(),
        psi: CutoffFunction::Bump {
            center: vec![0.5, 0.5],
            radius: 0.22,
        },
        regime: Regime::Intermediate,
        kappa: 0.5,
        coupling_scale: 1.0,
        h_list,
        points_per_wavelength: 2.2,
        tau: 0.0,
        bc: Boundary::Dirichlet,
        eps1: 0.25,
        dense_budget: DENSE_BUDGET_DEFAULT,
        quad_base_n: 64,
        workers: 2,
    }
}

/// Criterion 3: d = 2, V = -1 + 0.3 x2, kappa = 1/2 regime over the
/// pinned h list: relative remainder decreases (at most one inversion) and
/// the fitted slope of log R vs log(1/h) stays at or below 1.0; 15 min.
#[test]
fn criterion_3_microhyperbolic_remainder_scaling() {
    let start = Instant::now();
    let spec = microhyperbolic_spec(vec![
        1.0 / 8.0,
        1.0 / 12.0,
        1.0 / 16.0,
        1.0 / 24.0,
        1.0 / 32.0,
    ]);
    let records = run_remainder_sweep(&spec).unwrap();
    assert_eq!(records.len(), 5);
    let unflagged = records
        .iter()
        .all(|r| r.flags.iter().all(|f| !f.starts_with("condition unmet")));
    let rels: Vec<f64> = records.iter().map(|r| r.rel_remainder).collect();
    let inversions = rels.windows(2).filter(|w| w[1] > w[0]).count();
    let fit = fit_scaling(&records, 2, spec.kappa).unwrap();
    let slope_ok = fit.slope <= 1.0;
    let elapsed = start.elapsed().as_secs_f64();
    let runtime_ok = elapsed < 900.0;
    let pass = unflagged && inversions <= 1 && slope_ok && runtime_ok;
    println!(
        "criterion 3 (microhyperbolic remainder scaling): {} — rel remainders {:?} ({} inversions, <= 1); slope {:.3} <= 1.0 (predicted {:.2}); microhyperbolicity satisfied {}; runtime {:.1}s (< 900s {})",
        if pass { "PASS" } else { "FAIL" },
        rels.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>(),
        inversions,
        fit.slope,
        fit.predicted_exponent,
        unflagged,
        elapsed,
        if runtime_ok { "ok" } else { "exceeded" },
    );
    assert!(
        pass,
        "criterion 3: inversions {inversions}, slope {:.3}",
        fit.slope
    );
}

/// Criterion 4: gap regime. Same scenario, mu h = 0.45 keeps every shifted
/// Landau level at distance >= 0.2 from tau = 0 on supp psi; the relative
/// remainder at the finest grid stays below 1e-2 and at least 10x below
/// the microhyperbolic remainder at matched (h, n).
#[test]
fn criterion_4_gap_regime() {
    let h = 1.0 / 16.0;
    let mu_h = 0.45;
    let mut gap_spec = microhyperbolic_spec(vec![h]);
    gap_spec.regime = Regime::Superstrong;
    gap_spec.kappa = 1.0;
    gap_spec.coupling_scale = mu_h;
    gap_spec.eps1 = 0.2;
    let gap = &run_remainder_sweep(&gap_spec).unwrap()[0];
    // The superstrong branch of the sweep checks Eq. 0-41 with eps1 = 0.2
    // on supp psi and flags failures; no flag means margin >= 0.2.
    let gap_condition_ok = gap.flags.iter().all(|f| !f.starts_with("condition unmet"));

    let micro_spec = microhyperbolic_spec(vec![h]);
    let micro = &run_remainder_sweep(&micro_spec).unwrap()[0];
    assert_eq!((gap.h, gap.n), (micro.h, micro.n), "matched grid");

    let rel_ok = gap.rel_remainder <= 1e-2;
    let ratio = micro.remainder / gap.remainder.max(f64::MIN_POSITIVE);
    let ratio_ok = ratio >= 10.0;
    let pass = gap_condition_ok && rel_ok && ratio_ok;
    println!(
        "criterion 4 (gap regime): {} — rel remainder {:.3e} <= 1e-2; gap R {:.3e} vs microhyperbolic R {:.3e} at matched (h=1/16, n={}): ratio {:.0}x >= 10x; gap margin >= 0.2 on supp psi: {}",
        if pass { "PASS" } else { "FAIL" },
        gap.rel_remainder,
        gap.remainder,
        micro.remainder,
        gap.n,
        ratio,
        gap_condition_ok,
    );
    assert!(
        pass,
        "criterion 4: rel {:.3e}, ratio {ratio:.1}",
        gap.rel_remainder
    );
}

/// Criterion 5: resonance suite over 200 random frequency vectors plus the
/// pinned fixtures.
#[test]
fn criterion_5_resonance_suite() {
    let mut state = 0x5eed_5eed_5eed_5eedu64;
    let mut next = move || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((state >> 11) as f64) / ((1u64 << 53) as f64)
    };
    let mut checked = 0usize;
    for case in 0..200 {
        let r = 1 + (case % 4);
        let freqs: Vec<f64> = (0..r).map(|_| 0.1 + 3.9 * next()).collect();
        let max_order = 2 + (case % 4) as u32;
        let tol = 1e-9;
        let f_max = freqs.iter().cloned().fold(0.0f64, f64::max);
        let found = enumerate_resonances(&freqs, max_order, tol).unwrap();
        for rel in &found {
            let s: f64 = rel
                .gamma
                .iter()
                .zip(freqs.iter())
                .map(|(&g, &f)| g as f64 * f)
                .sum();
            assert!(s.abs() <= tol * f_max, "unsound relation {:?}", rel.gamma);
        }
        // Completeness against an independent full-cube rescan.
        let side = (2 * max_order + 1) as i64;
        let total = (side as usize).pow(r as u32);
        let mut expected = 0usize;
        for code in 0..total {
            let mut rem = code as i64;
            let mut gamma = vec![0i32; r];
            for slot in gamma.iter_mut() {
                *slot = (rem % side - max_order as i64) as i32;
                rem /= side;
            }
            let order: u32 = gamma.iter().map(|g| g.unsigned_abs()).sum();
            if !(2..=max_order).contains(&order)
                || gamma
                    .iter()
                    .find(|&&g| g != 0)
                    .map(|&g| g < 0)
                    .unwrap_or(true)
            {
                continue;
            }
            let s: f64 = gamma
                .iter()
                .zip(freqs.iter())
                .map(|(&g, &f)| g as f64 * f)
                .sum();
            if s.abs() <= tol * f_max {
                expected += 1;
                assert!(
                    found.iter().any(|rel| rel.gamma == gamma),
                    "missed {gamma:?}"
                );
            }
        }
        assert_eq!(expected, found.len());
        let partition = ResonancePartition::build(&freqs, 0.05 * next());
        assert!(partition.m_refines_n(), "M must refine N for {freqs:?}");
        checked += 1;
    }
    // Pinned fixtures.
    let f123 = [1.0, 2.0, 3.0];
    let n = partition_third_order(&f123, &partition_second_order(&f123, 1e-9), 1e-9);
    let single_group = n == vec![vec![0, 1, 2]];
    let fpi = [
        1.0,
        std::f64::consts::PI,
        std::f64::consts::PI * std::f64::consts::PI,
    ];
    let no_relations = enumerate_resonances(&fpi, 6, 1e-9).unwrap().is_empty();
    let m = partition_second_order(&fpi, 1e-9);
    let n2 = partition_third_order(&fpi, &m, 1e-9);
    let singletons = m.len() == 3 && n2.len() == 3;
    let pass = checked == 200 && single_group && no_relations && singletons;
    println!(
        "criterion 5 (resonance suite): {} — {checked}/200 random vectors sound+complete, M refines N; (1,2,3) single group: {single_group}; (1,pi,pi^2) singleton partitions and empty relations: {}",
        if pass { "PASS" } else { "FAIL" },
        no_relations && singletons,
    );
    assert!(pass);
}

/// Criterion 6: pipeline symplecticity <= 1e-12 and symbol residual
/// <= 1e-10 (checked inside reduce_constant at 100 sampled phase points)
/// for every constant registry scenario; isospectral cluster deviations
/// refine at second order; 4D ground cluster at 3 mu h + V.
#[test]
fn criterion_6_reduction_correctness() {
    let mut residuals = Vec::new();
    for id in ["const2d", "const4d", "res4d", "var2d", "quad2d"] {
        let scenario = registry(id).unwrap();
        let (pipeline, reduced) = reduce_constant(&scenario).unwrap();
        let resid = symplectic_residual(&pipeline.composite);
        assert!(resid <= 1e-12, "{id}: symplectic residual {resid:.3e}");
        assert!(!reduced.frequencies.is_empty());
        residuals.push(format!("{id}: {resid:.2e}"));
    }

    // 2D refinement slope on the lowest-cluster deviation.
    let s2 = registry("const2d").unwrap();
    let mu = 4.0;
    let h = mu / (FLUX_2PI * 6.0);
    let d_coarse = verify_reduction_isospectral(&s2, mu, h, &[12, 12], 1)
        .unwrap()
        .levels[0]
        .deviation
        .abs();
    let d_fine = verify_reduction_isospectral(&s2, mu, h, &[24, 24], 1)
        .unwrap()
        .levels[0]
        .deviation
        .abs();
    let slope = (d_coarse / d_fine).log2();
    let slope_ok = slope >= 1.8;

    // 4D small torus, fluxes (1, 1): first cluster at 3 mu h + V.
    let side34 = 0.5f64.sqrt();
    let mut sc = ScenarioConfig::plain("res4d");
    sc.domain_lo = Some(vec![0.0; 4]);
    sc.domain_hi = Some(vec![1.0, 1.0, side34, side34]);
    let s4 = sc.build().unwrap();
    let mu4 = 2.0;
    let h4 = mu4 / FLUX_2PI;
    let rep4 = verify_reduction_isospectral(&s4, mu4, h4, &[6, 6, 6, 6], 1).unwrap();
    let lvl = &rep4.levels[0];
    let expected4 = 3.0 * mu4 * h4 - 1.0;
    // Second-order stencil shift of the ground cluster:
    // sum over planes of mu^2 f_p^2 dx_p^2 / 8.
    let fd_shift = mu4 * mu4 * (1.0 * (1.0f64 / 6.0).powi(2) + 4.0 * (side34 / 6.0).powi(2)) / 8.0;
    let four_d_ok = (lvl.expected - expected4).abs() < 1e-12
        && lvl.deviation.abs() <= 2.0 * fd_shift
        && lvl.multiplicity == 1;

    let pass = slope_ok && four_d_ok;
    println!(
        "criterion 6 (reduction correctness): {} — symplectic residuals [{}] <= 1e-12, symbol residual <= 1e-10 at 100 phase points (checked in construction); cluster deviation slope {slope:.2} >= 1.8 ({d_coarse:.2e} -> {d_fine:.2e}); 4D ground cluster at 3 mu h + V = {expected4:.4} measured {:.4} (mult {})",
        if pass { "PASS" } else { "FAIL" },
        residuals.join(", "),
        lvl.cluster_center,
        lvl.multiplicity,
    );
    assert!(
        pass,
        "criterion 6: slope {slope:.2}, 4D dev {:.3e}",
        lvl.deviation
    );
}

/// Criterion 7: oracle internal consistency — dense and inertia counts
/// agree exactly on every fixture with N <= 4096; Hermiticity; gauge-shift
/// invariance <= 1e-10 relative; closed-form free FD spectrum <= 1e-10.
#[test]
fn criterion_7_oracle_consistency() {
    // Fixture battery.
    let mut fixtures = Vec::new();
    {
        let mut free = registry("const2d").unwrap();
        free.potential = magweyl::geometry::PotentialSpec::Const(0.0);
        fixtures.push((
            free.clone(),
            0.0,
            1.0,
            vec![8, 8],
            Boundary::Dirichlet,
            "free2d",
        ));
        fixtures.push((
            registry("var2d").unwrap(),
            4.0,
            0.1,
            vec![16, 16],
            Boundary::Dirichlet,
            "var2d",
        ));
        let s = registry("const2d").unwrap();
        let mu = 4.0;
        let h = mu / (FLUX_2PI * 6.0);
        fixtures.push((s, mu, h, vec![16, 16], Boundary::Periodic, "landau6"));
        let mut sc = ScenarioConfig::plain("res4d");
        let side = 0.5f64.sqrt();
        sc.domain_lo = Some(vec![0.0; 4]);
        sc.domain_hi = Some(vec![1.0, 1.0, side, side]);
        fixtures.push((
            sc.build().unwrap(),
            2.0,
            2.0 / FLUX_2PI,
            vec![6, 6, 6, 6],
            Boundary::Periodic,
            "res4d-torus",
        ));
        let mut cross = registry("const2d").unwrap();
        cross.metric =
            magweyl::geometry::MetricSpec::Const(magweyl::nalgebra::dmatrix![2.0, 0.5; 0.5, 1.0]);
        fixtures.push((
            cross,
            0.0,
            0.4,
            vec![10, 10],
            Boundary::Dirichlet,
            "cross-metric",
        ));
    }
    let mut agree = 0usize;
    let mut total = 0usize;
    for (scenario, mu, h, dims, bc, name) in &fixtures {
        let lattice = Lattice::new(scenario, dims, *bc).unwrap();
        let ham = assemble(scenario, *mu, *h, &lattice).unwrap();
        assert!(ham.n <= 4096);
        let mut dense = ham.to_dense();
        let evals = zheevd(&mut dense, ham.n, false).unwrap();
        // Mid-gap tau placements across the spectrum: seek a genuine gap
        // forward from each quantile so tau never sits on a (possibly
        // exactly degenerate) eigenvalue.
        let scale = evals[ham.n - 1].abs().max(1.0);
        for frac in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let mut k = ((ham.n as f64 * frac) as usize).min(ham.n - 2);
            while k + 1 < ham.n && evals[k + 1] - evals[k] <= 1e-8 * scale {
                k += 1;
            }
            if k + 1 >= ham.n {
                continue;
            }
            let tau = 0.5 * (evals[k] + evals[k + 1]);
            let d = count_below(&ham, tau, CountMethod::Dense, DENSE_BUDGET_DEFAULT).unwrap();
            let i = count_below(&ham, tau, CountMethod::Inertia, DENSE_BUDGET_DEFAULT).unwrap();
            assert_eq!(d.count, i.count, "{name} at tau={tau}");
            agree += usize::from(d.count == i.count);
            total += 1;
        }
    }

    // Hermiticity: stored links give H = H^* exactly; eigenpair residual.
    let s = registry("var2d").unwrap();
    let lattice = Lattice::new(&s, &[10, 10], Boundary::Dirichlet).unwrap();
    let ham = assemble(&s, 3.0, 0.2, &lattice).unwrap();
    let dense = ham.to_dense();
    let mut herm_defect = 0.0f64;
    for i in 0..ham.n {
        for j in 0..ham.n {
            let a = dense[j * ham.n + i];
            let b = dense[i * ham.n + j].conj();
            herm_defect = herm_defect.max((a - b).norm());
        }
    }
    let norm = ham.norm_estimate();
    let mut work = dense.clone();
    let (w, z) =
        magweyl::linalg::zheevr_range(&mut work, ham.n, f64::NEG_INFINITY, f64::INFINITY).unwrap();
    let mut eig_resid = 0.0f64;
    for k in (0..w.len()).step_by(17) {
        let v = &z[k * ham.n..(k + 1) * ham.n];
        for i in 0..ham.n {
            let mut acc = num_complex::Complex64::new(0.0, 0.0);
            for j in 0..ham.n {
                acc += dense[j * ham.n + i] * v[j];
            }
            eig_resid = eig_resid.max((acc - v[i] * w[k]).norm());
        }
    }
    let herm_ok = herm_defect == 0.0 && eig_resid <= 1e-12 * norm;

    // Gauge covariance: constant shift of V_j respecting flux quantization.
    let s = registry("const2d").unwrap();
    let mu = 4.0;
    let h = mu / (FLUX_2PI * 8.0);
    let lattice = Lattice::new(&s, &[12, 12], Boundary::Periodic).unwrap();
    let base = assemble(&s, mu, h, &lattice).unwrap();
    let mut shifted_scenario = s.clone();
    shifted_scenario.gauge_offset = vec![0.0, FLUX_2PI * h / mu];
    let shifted = assemble(&shifted_scenario, mu, h, &lattice).unwrap();
    let mut d1 = base.to_dense();
    let mut d2 = shifted.to_dense();
    let e1 = zheevd(&mut d1, base.n, false).unwrap();
    let e2 = zheevd(&mut d2, shifted.n, false).unwrap();
    let scale = e1.last().unwrap().abs();
    let gauge_dev = e1
        .iter()
        .zip(e2.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max)
        / scale;
    let gauge_ok = gauge_dev <= 1e-10;

    // Free Dirichlet spectrum against the closed-form 1D FD eigenvalues
    // 4 h^2/dx^2 sin^2(pi k/(2(n+1))), tensor-summed over the two axes.
    let mut free = registry("const2d").unwrap();
    free.potential = magweyl::geometry::PotentialSpec::Const(0.0);
    let (n1, n2) = (9usize, 7usize);
    let lattice = Lattice::new(&free, &[n1, n2], Boundary::Dirichlet).unwrap();
    let hp = 1.0;
    let ham = assemble(&free, 0.0, hp, &lattice).unwrap();
    let mut dense = ham.to_dense();
    let evals = zheevd(&mut dense, ham.n, false).unwrap();
    let fd = |n: usize, dx: f64| -> Vec<f64> {
        (1..=n)
            .map(|k| {
                let s = (std::f64::consts::PI * k as f64 / (2.0 * (n as f64 + 1.0))).sin();
                4.0 * hp * hp / (dx * dx) * s * s
            })
            .collect()
    };
    let mut expect: Vec<f64> = fd(n1, lattice.spacing[0])
        .iter()
        .flat_map(|a| {
            fd(n2, lattice.spacing[1])
                .iter()
                .map(|b| a + b)
                .collect::<Vec<_>>()
        })
        .collect();
    expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let fd_dev = evals
        .iter()
        .zip(expect.iter())
        .map(|(a, b)| (a - b).abs() / b.max(1.0))
        .fold(0.0f64, f64::max);
    let fd_ok = fd_dev <= 1e-10;
    let spectrum_nonneg = evals[0] >= -1e-12;

    let pass = agree == total && herm_ok && gauge_ok && fd_ok && spectrum_nonneg;
    println!(
        "criterion 7 (oracle consistency): {} — dense/inertia exact agreement {agree}/{total}; Hermiticity defect {herm_defect:.1e} with eigen residual {:.2e} <= 1e-12|H|; gauge-shift deviation {gauge_dev:.2e} <= 1e-10; free FD spectrum max rel dev {fd_dev:.2e} <= 1e-10; free spectrum nonnegative {spectrum_nonneg}",
        if pass { "PASS" } else { "FAIL" },
        eig_resid / norm,
    );
    assert!(pass);
}

/// Criterion 8: drift conservation on the quadratic-V fixture with
/// fourth-order convergence in the step size.
#[test]
fn criterion_8_drift_conservation() {
    let scenario = registry("quad2d").unwrap();
    let traj = drift_flow(&scenario, &[1.0, 0.0], 1.0, 1e-3).unwrap();
    let drift = traj.potential_drift();
    let drift_ok = drift <= 1e-6;
    let errs: Vec<f64> = [1e-2, 5e-3, 2.5e-3]
        .iter()
        .map(|&dt| {
            drift_flow(&scenario, &[1.0, 0.0], 1.0, dt)
                .unwrap()
                .potential_drift()
        })
        .collect();
    let s1 = (errs[0] / errs[1]).log2();
    let s2 = (errs[1] / errs[2]).log2();
    let slope_ok = s1 >= 3.5 && s2 >= 3.5;
    let pass = drift_ok && slope_ok;
    println!(
        "criterion 8 (drift conservation): {} — |V(x(t)) - V(x0)| = {drift:.3e} <= 1e-6 at dt = 1e-3 over unit time; convergence slopes {s1:.2}, {s2:.2} >= 3.5 (4th order)",
        if pass { "PASS" } else { "FAIL" },
    );
    assert!(
        pass,
        "criterion 8: drift {drift:.3e}, slopes {s1:.2}/{s2:.2}"
    );
}
