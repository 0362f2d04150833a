use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{FitResult, RemainderRecord};

/// Sweep artifacts on disk: records.csv (one row per record, stable
/// header), fits.json (full metadata), plotdata/*.dat (two-column files).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepOutput {
    pub scenario: String,
    pub run_id: String,
    pub wall_time_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitResult>,
    pub records: Vec<RemainderRecord>,
}

const CSV_HEADER: &str =
    "h,mu,n,n_sites,method,n_numeric,principal,remainder,rel_remainder,quad_error,mu1_star,mu2_star,regime_class,flags";

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// FNV-1a over the canonical JSON encoding; stable across runs because the
/// records themselves are deterministic.
fn run_id(records: &[RemainderRecord]) -> String {
    let text = serde_json::to_string(records).unwrap_or_default();
    let mut hash: u64 = 0xcbf29ce484222325;
    for b in text.bytes() {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}

/// Writes records.csv, sweep.json and plotdata/ under `dir`.
pub fn persist_sweep(
    records: &[RemainderRecord],
    fit: Option<&FitResult>,
    scenario_name: &str,
    wall_time_s: f64,
    dir: &Path,
) -> Result<SweepOutput> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let csv_path = dir.join("records.csv");
    let mut csv = std::fs::File::create(&csv_path).map_err(io_err(&csv_path))?;
    writeln!(csv, "{CSV_HEADER}").map_err(io_err(&csv_path))?;
    for r in records {
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.h,
            r.mu,
            r.n,
            r.n_sites,
            r.method,
            r.n_numeric,
            r.principal,
            r.remainder,
            r.rel_remainder,
            r.quad_error,
            r.mu1_star,
            r.mu2_star,
            r.regime_class,
            r.flags.join(";").replace(',', " ")
        )
        .map_err(io_err(&csv_path))?;
    }

    let output = SweepOutput {
        scenario: scenario_name.to_string(),
        run_id: run_id(records),
        wall_time_s,
        fit: fit.cloned(),
        records: records.to_vec(),
    };
    let json_path = dir.join("sweep.json");
    let json = serde_json::to_string_pretty(&output)
        .map_err(|e| Error::invalid_config("sweep.json", e.to_string()))?;
    std::fs::write(&json_path, json).map_err(io_err(&json_path))?;
    if let Some(fit) = fit {
        let fits_path = dir.join("fits.json");
        let json = serde_json::to_string_pretty(fit)
            .map_err(|e| Error::invalid_config("fits.json", e.to_string()))?;
        std::fs::write(&fits_path, json).map_err(io_err(&fits_path))?;
    }

    let plot_dir = dir.join("plotdata");
    std::fs::create_dir_all(&plot_dir).map_err(io_err(&plot_dir))?;
    type Curve = fn(&RemainderRecord) -> f64;
    let curves: [(&str, Curve); 3] = [
        ("remainder.dat", |r| r.remainder),
        ("relative.dat", |r| r.rel_remainder),
        ("principal.dat", |r| r.principal),
    ];
    for (name, f) in curves {
        let p = plot_dir.join(name);
        let mut file = std::fs::File::create(&p).map_err(io_err(&p))?;
        for r in records {
            writeln!(file, "{} {}", r.h, f(r)).map_err(io_err(&p))?;
        }
    }
    Ok(output)
}

/// Reads sweep.json back; round-trips bit-exactly on all float fields.
pub fn load_sweep(dir: &Path) -> Result<SweepOutput> {
    let path = dir.join("sweep.json");
    let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
    serde_json::from_str(&text).map_err(|e| Error::invalid_config("sweep.json", e.to_string()))
}

#[allow(dead_code)]
fn unused(_: PathBuf) {}
