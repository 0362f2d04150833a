//! Command-line entry point: analyze / weyl / count / reduce / sweep over
//! the built-in scenario registry, with shared config loading and JSON
//! output. Exit codes: 0 success, 1 invalid configuration, 2 computation
//! error, 3 budget exceeded.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use magweyl::config::{parse_boundary, ConfigFile, ScenarioConfig};
use magweyl::error::Error;
use magweyl::geometry::{drift_flow, intensity_matrix, liouville_density, Scenario};
use magweyl::oracle::{assemble, count_below, CountMethod, Lattice, DENSE_BUDGET_DEFAULT};
use magweyl::reduction::reduce_constant;
use magweyl::resonance::{
    check_gap_condition, check_microhyp_constant, check_microhyp_general, enumerate_resonances,
    GeneralBudgets, MicrohypVariant, ResonancePartition,
};
use magweyl::weyl::{
    active_levels, integrate_density, magnetic_weyl_full_rank, magnetic_weyl_general,
    standard_weyl, CutoffFunction, DensityKind, QuadratureSpec, WeylParams,
};

#[derive(Parser)]
#[command(
    name = "magweyl",
    version,
    about = "Numerical laboratory for magnetic Weyl eigenvalue counting",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Frequencies, resonance relations, partitions and condition reports
    Analyze(AnalyzeArgs),
    /// Magnetic Weyl density at a point or integrated against a cutoff
    Weyl(WeylArgs),
    /// Lattice eigenvalue count below tau
    Count(CountArgs),
    /// Constant-coefficient canonical form: pipeline and reduced operator
    Reduce(ReduceArgs),
    /// Remainder-scaling sweep driven by a config file
    Sweep(SweepArgs),
    /// Classical drift trajectory export (CSV)
    Drift(DriftArgs),
}

#[derive(Args)]
struct ScenarioFlags {
    /// Registry scenario id [default: const2d]
    #[arg(long)]
    scenario: Option<String>,
    /// Optional config file (TOML); flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Field strength override for 2D entries
    #[arg(long, allow_hyphen_values = true)]
    b: Option<f64>,
    /// Constant part of the scalar potential
    #[arg(long, allow_hyphen_values = true)]
    v0: Option<f64>,
}

impl ScenarioFlags {
    fn build(&self) -> Result<(Scenario, Option<ConfigFile>), Error> {
        let file = match &self.config {
            Some(p) => Some(ConfigFile::load(p)?),
            None => None,
        };
        let mut sc = file
            .as_ref()
            .and_then(|f| f.scenario.clone())
            .unwrap_or_else(|| ScenarioConfig::plain("const2d"));
        if let Some(id) = &self.scenario {
            sc.id = id.clone();
        }
        if self.b.is_some() {
            sc.b = self.b;
        }
        if self.v0.is_some() {
            sc.v0 = self.v0;
        }
        Ok((sc.build()?, file))
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    scenario: ScenarioFlags,
    /// Physical grouping tolerance for the partitions [default: 0.05]
    #[arg(long)]
    eps0: Option<f64>,
    /// Condition margin threshold [default: 0.1]
    #[arg(long)]
    eps1: Option<f64>,
    /// Detection tolerance for integer relations [default: 1e-9]
    #[arg(long)]
    tol: Option<f64>,
    /// Largest resonance order scanned [default: 6]
    #[arg(long)]
    max_order: Option<u32>,
    /// Coupling mu; enables the strong-variant and gap checks
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<f64>,
    /// Semiclassical h; enables the strong-variant and gap checks
    #[arg(long, name = "h", allow_hyphen_values = true)]
    h: Option<f64>,
    /// Sampling grid points per axis [default: 5]
    #[arg(long)]
    grid: Option<usize>,
    /// Also run the sampled general microhyperbolicity checker
    #[arg(long)]
    general: bool,
    /// Machine-readable output (always on for analyze)
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct WeylArgs {
    #[command(flatten)]
    scenario: ScenarioFlags,
    /// Spectral level tau [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    tau: Option<f64>,
    /// Coupling mu >= 1
    #[arg(long, allow_hyphen_values = true)]
    mu: f64,
    /// Semiclassical parameter h in (0, 1]
    #[arg(long, allow_hyphen_values = true)]
    h: f64,
    /// Cutoff kind: bump | indicator [default: bump]
    #[arg(long)]
    psi: Option<String>,
    /// Bump center (comma-separated) [default: domain center]
    #[arg(long, allow_hyphen_values = true)]
    psi_center: Option<String>,
    /// Bump radius [default: quarter of the smallest side]
    #[arg(long)]
    psi_radius: Option<f64>,
    /// Quadrature base resolution per axis [default: 64]
    #[arg(long)]
    resolution: Option<usize>,
    /// Evaluate the density at this point instead of integrating
    #[arg(long, allow_hyphen_values = true)]
    point: Option<String>,
    /// Use the general-rank density (partial rank allowed)
    #[arg(long)]
    general: bool,
    /// Also report the standard Weyl density (point mode)
    #[arg(long)]
    standard: bool,
    /// Machine-readable output
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CountArgs {
    #[command(flatten)]
    scenario: ScenarioFlags,
    /// Coupling mu >= 1
    #[arg(long, allow_hyphen_values = true)]
    mu: f64,
    /// Semiclassical parameter h in (0, 1]
    #[arg(long, allow_hyphen_values = true)]
    h: f64,
    /// Count eigenvalues at or below this level [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    tau: Option<f64>,
    /// Grid points per axis
    #[arg(long)]
    n: usize,
    /// Boundary condition: dirichlet | periodic [default: dirichlet]
    #[arg(long)]
    bc: Option<String>,
    /// Counting method: dense | inertia [default: inertia]
    #[arg(long)]
    method: Option<String>,
    /// Dense-path budget on matrix size [default: 8192]
    #[arg(long)]
    dense_budget: Option<usize>,
    /// Machine-readable output
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ReduceArgs {
    #[command(flatten)]
    scenario: ScenarioFlags,
    /// Machine-readable output
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep config file (TOML with [scenario], [psi], [sweep])
    #[arg(long)]
    spec: PathBuf,
    /// Output directory for records.csv, sweep.json, fits.json, plotdata/
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (MAGWEYL_WORKERS env overrides)
    #[arg(long)]
    workers: Option<usize>,
    /// Machine-readable summary on stdout
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct DriftArgs {
    #[command(flatten)]
    scenario: ScenarioFlags,
    /// Start point, comma-separated
    #[arg(long, allow_hyphen_values = true)]
    x0: String,
    /// End time (rescaled drift time) [default: 1]
    #[arg(long, allow_hyphen_values = true)]
    t_end: Option<f64>,
    /// Fixed step size [default: 1e-3]
    #[arg(long)]
    dt: Option<f64>,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
    /// Machine-readable output
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            emit_error(1, &e.to_string(), Some("argv"));
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Analyze(a) => run_analyze(a),
        Command::Weyl(a) => run_weyl(a),
        Command::Count(a) => run_count(a),
        Command::Reduce(a) => run_reduce(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Drift(a) => run_drift(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            emit_error(e.exit_code(), &e.to_string(), e.field());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn emit_error(code: i32, message: &str, field: Option<&str>) {
    let payload = json!({ "code": code, "message": message, "field": field });
    eprintln!("{payload}");
}

fn parse_vec(s: &str, field: &str) -> Result<Vec<f64>, Error> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid_config(field, format!("bad number '{t}'")))
        })
        .collect()
}

fn run_analyze(a: AnalyzeArgs) -> Result<u8, Error> {
    let (scenario, _) = a.scenario.build()?;
    let eps0 = a.eps0.unwrap_or(0.05);
    let eps1 = a.eps1.unwrap_or(0.1);
    let tol = a.tol.unwrap_or(1e-9);
    let max_order = a.max_order.unwrap_or(6);
    let grid = a.grid.unwrap_or(5);
    let fi = intensity_matrix(&scenario, &scenario.domain.center())?;
    let relations = enumerate_resonances(&fi.frequencies, max_order, tol)?;
    let partition = ResonancePartition::build(&fi.frequencies, eps0);

    let mut conditions = Vec::new();
    conditions.push(
        serde_json::to_value(&check_microhyp_constant(
            &scenario,
            &MicrohypVariant::Weak,
            eps1,
            grid,
        )?)
        .unwrap(),
    );
    if let (Some(mu), Some(h)) = (a.mu, a.h) {
        conditions.push(
            serde_json::to_value(&check_microhyp_constant(
                &scenario,
                &MicrohypVariant::Strong { mu, h },
                eps1,
                grid,
            )?)
            .unwrap(),
        );
        conditions.push(
            serde_json::to_value(&check_gap_condition(&scenario, mu, h, eps1, grid)?).unwrap(),
        );
    }
    if a.general {
        conditions.push(
            serde_json::to_value(&check_microhyp_general(
                &scenario,
                eps0,
                eps1,
                grid.min(4),
                &GeneralBudgets::default(),
            )?)
            .unwrap(),
        );
    }

    // 1-based index sets in the report.
    let one_based = |groups: &Vec<Vec<usize>>| -> Vec<Vec<usize>> {
        groups
            .iter()
            .map(|g| g.iter().map(|i| i + 1).collect())
            .collect()
    };
    let report = json!({
        "scenario": scenario.name,
        "frequencies": fi.frequencies,
        "rank": fi.rank,
        "full_rank": fi.full_rank,
        "liouville_density": liouville_density(&fi).ok(),
        "relations": relations,
        "groups_m": one_based(&partition.groups_m),
        "groups_n": one_based(&partition.groups_n),
        "eps0": eps0,
        "conditions": conditions,
    });
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    Ok(0)
}

fn build_psi(
    scenario: &Scenario,
    kind: Option<&str>,
    center: Option<&str>,
    radius: Option<f64>,
) -> Result<CutoffFunction, Error> {
    let center = match center {
        Some(c) => parse_vec(c, "psi_center")?,
        None => scenario.domain.center(),
    };
    let min_side = (0..scenario.dim)
        .map(|a| scenario.domain.side(a))
        .fold(f64::INFINITY, f64::min);
    let radius = radius.unwrap_or(0.25 * min_side);
    match kind.unwrap_or("bump") {
        "bump" => Ok(CutoffFunction::Bump { center, radius }),
        "indicator" => Ok(CutoffFunction::Indicator {
            lo: center.iter().map(|c| c - radius).collect(),
            hi: center.iter().map(|c| c + radius).collect(),
        }),
        other => Err(Error::invalid_config(
            "psi",
            format!("unknown cutoff '{other}'"),
        )),
    }
}

fn run_weyl(a: WeylArgs) -> Result<u8, Error> {
    let (scenario, _) = a.scenario.build()?;
    let params = WeylParams::new(a.mu, a.h, a.tau.unwrap_or(0.0))?;
    if let Some(point) = &a.point {
        let x = parse_vec(point, "point")?;
        let value = if a.general {
            magnetic_weyl_general(&scenario, &x, &params)?
        } else {
            magnetic_weyl_full_rank(&scenario, &x, &params)?
        };
        let active = active_levels(&scenario, &x, &params)?;
        let out = json!({
            "value": value,
            "quad_error_estimate": 0.0,
            "active_levels": active,
            "standard_weyl": if a.standard { Some(standard_weyl(&scenario, &x, &params)) } else { None },
        });
        if a.json {
            println!("{out}");
        } else {
            println!("density at {x:?}: {value} ({active} active levels)");
        }
        return Ok(0);
    }
    let psi = build_psi(
        &scenario,
        a.psi.as_deref(),
        a.psi_center.as_deref(),
        a.psi_radius,
    )?;
    psi.validate(&scenario.domain)?;
    let kind = if a.general {
        DensityKind::MagneticGeneral
    } else {
        DensityKind::MagneticFullRank
    };
    let quad = integrate_density(
        kind,
        &scenario,
        &psi,
        &params,
        &QuadratureSpec {
            base_n: a.resolution.unwrap_or(64),
            budget: 8_000_000,
        },
    )?;
    let out = json!({
        "value": quad.value,
        "quad_error_estimate": quad.error_estimate,
        "active_levels": quad.max_active_levels,
    });
    if a.json {
        println!("{out}");
    } else {
        println!(
            "integral {} (quadrature error estimate {:.3e}, up to {} active levels)",
            quad.value, quad.error_estimate, quad.max_active_levels
        );
    }
    Ok(0)
}

fn run_count(a: CountArgs) -> Result<u8, Error> {
    let (scenario, _) = a.scenario.build()?;
    let bc = parse_boundary(a.bc.as_deref().unwrap_or("dirichlet"))?;
    let method = match a.method.as_deref().unwrap_or("inertia") {
        "dense" => CountMethod::Dense,
        "inertia" => CountMethod::Inertia,
        other => {
            return Err(Error::invalid_config(
                "method",
                format!("unknown method '{other}'"),
            ))
        }
    };
    let lattice = Lattice::new(&scenario, &vec![a.n; scenario.dim], bc)?;
    let ham = assemble(&scenario, a.mu, a.h, &lattice)?;
    let result = count_below(
        &ham,
        a.tau.unwrap_or(0.0),
        method,
        a.dense_budget.unwrap_or(DENSE_BUDGET_DEFAULT),
    )?;
    if a.json {
        println!("{}", serde_json::to_string(&result).unwrap());
    } else {
        println!(
            "count {} of N={} ({:?}{})",
            result.count,
            result.n,
            result.method,
            if result.warnings.is_empty() {
                String::new()
            } else {
                format!(", {} warnings", result.warnings.len())
            },
        );
    }
    Ok(0)
}

fn run_reduce(a: ReduceArgs) -> Result<u8, Error> {
    let (scenario, _) = a.scenario.build()?;
    let (pipeline, reduced) = reduce_constant(&scenario)?;
    let matrix = |m: &magweyl::nalgebra::DMatrix<f64>| -> Vec<Vec<f64>> {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
            .collect()
    };
    let out = json!({
        "scenario": scenario.name,
        "frequencies": reduced.frequencies,
        "oscillator_part": reduced.oscillator_part,
        "potential_substitution": reduced.potential_substitution,
        "step1_q": matrix(&pipeline.step1_q),
        "step2_s": matrix(&pipeline.step2_s),
        "step3_fourier_axes": pipeline.step3_fourier_axes,
        "step4_k": matrix(&pipeline.step4_k),
        "step5_scale": pipeline.step5_scale,
        "composite": matrix(&pipeline.composite),
        "symplectic_residual": magweyl::reduction::symplectic_residual(&pipeline.composite),
    });
    if a.json {
        println!("{out}");
    } else {
        println!("{}", serde_json::to_string_pretty(&out).unwrap());
    }
    Ok(0)
}

fn run_sweep(a: SweepArgs) -> Result<u8, Error> {
    let cfg = ConfigFile::load(&a.spec)?;
    let scenario_cfg = cfg
        .scenario
        .clone()
        .ok_or_else(|| Error::invalid_config("scenario", "sweep config needs a [scenario]"))?;
    let sweep_cfg = cfg
        .sweep
        .clone()
        .ok_or_else(|| Error::invalid_config("sweep", "sweep config needs a [sweep] section"))?;
    let psi = cfg
        .psi
        .clone()
        .ok_or_else(|| Error::invalid_config("psi", "sweep config needs a [psi] section"))?;
    let scenario = scenario_cfg.build()?;
    let mut spec = sweep_cfg.build(scenario, psi)?;
    if let Some(w) = a.workers {
        if std::env::var("MAGWEYL_WORKERS").is_err() {
            spec.workers = w;
        }
    }
    let t0 = std::time::Instant::now();
    let records = magweyl::experiments::run_remainder_sweep(&spec)?;
    let fit = magweyl::experiments::fit_scaling(&records, spec.scenario.dim, spec.kappa).ok();
    let out = magweyl::experiments::persist_sweep(
        &records,
        fit.as_ref(),
        &spec.scenario.name,
        t0.elapsed().as_secs_f64(),
        &a.out,
    )?;
    let fatal = records
        .iter()
        .any(|r| r.flags.iter().any(|f| f.starts_with("condition unmet")));
    if a.json {
        println!("{}", serde_json::to_string(&out).unwrap());
    } else {
        println!(
            "{} records -> {} (run id {}), fit slope {:?}",
            records.len(),
            a.out.display(),
            out.run_id,
            fit.as_ref().map(|f| f.slope),
        );
    }
    Ok(if fatal { 2 } else { 0 })
}

fn run_drift(a: DriftArgs) -> Result<u8, Error> {
    let (scenario, _) = a.scenario.build()?;
    let x0 = parse_vec(&a.x0, "x0")?;
    let traj = drift_flow(&scenario, &x0, a.t_end.unwrap_or(1.0), a.dt.unwrap_or(1e-3))?;
    traj.write_csv(&a.out)?;
    if a.json {
        println!(
            "{}",
            json!({ "samples": traj.times.len(), "potential_drift": traj.potential_drift() })
        );
    } else {
        println!(
            "{} samples -> {} (potential drift {:.3e})",
            traj.times.len(),
            a.out.display(),
            traj.potential_drift()
        );
    }
    Ok(0)
}
