//! Umbrella CLI: data generation, norm evaluation, direct and mild solves,
//! snapshot integrity checks, and scripted experiment scenarios.
//!
//! Exit codes: 0 success, 1 a verdict check failed, 2 usage or config
//! error, 3 runtime or numerical error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nslab::config::Config;
use nslab::cylinder::CylinderGrid;
use nslab::error::Error;
use nslab::experiments::{self, ExperimentConfig, Scenario, DIAGNOSTICS_HEADER};
use nslab::norms::{self, Argmax, BesovQ, NormReport};
use nslab::trajectory::{heat_extension, DiagnosticsRow, Trajectory};
use nslab::{beltrami, operators, picard, report, snapshot, solver, SpectralField};

#[derive(Parser)]
#[command(
    name = "nslab",
    version,
    about = "Pseudospectral laboratory for periodic incompressible flow"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build shell-supported curl eigendata and report admissibility.
    Generate {
        /// Flat key=value config (grid_n, seed, lambda_sqs, shell_amplitudes,
        /// b, epsilon, helicity); defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory for snapshots and admissibility.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a norm of a snapshot and print one CSV row.
    Norm {
        #[arg(long)]
        snapshot: PathBuf,
        /// One of: bmo1, bmo2, besov:<s>:<q>, l2, sup.
        #[arg(long)]
        norm: String,
        /// Append the row to this CSV file instead of stdout only.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the full equations; write a snapshot series and diagnostics.
    Solve {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Iterate the mild-solution map; write the fixed point and diagnostics.
    Picard {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check snapshot integrity (header, finiteness, conjugate symmetry).
    Verify {
        /// Snapshot files to check.
        #[arg(required = true)]
        snapshots: Vec<PathBuf>,
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
    },
    /// Run a scripted scenario and print its verdict rows.
    Experiment {
        /// theorem13 | corollary18 | estimate_suite | beltrami_exactness
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Directory for report.csv, diagnostics, and snapshots.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("NSLB_THREADS") {
        if let Ok(k) = threads.trim().parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build_global();
        } else {
            eprintln!("error: NSLB_THREADS must be a positive integer");
            return ExitCode::from(2);
        }
    }
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<Config, Error> {
    match path {
        Some(p) => Config::parse_file(p),
        None => Ok(Config::from_pairs(&[])),
    }
}

fn dispatch(cli: Cli) -> Result<u8, Error> {
    match cli.cmd {
        Cmd::Generate { config, out } => generate(&load_config(&config)?, &out),
        Cmd::Norm {
            snapshot,
            norm,
            out,
        } => norm_cmd(&snapshot, &norm, out.as_deref()),
        Cmd::Solve { config, out } => solve_cmd(&load_config(&config)?, &out),
        Cmd::Picard { config, out } => picard_cmd(&load_config(&config)?, &out),
        Cmd::Verify {
            snapshots,
            tolerance,
        } => verify_cmd(&snapshots, tolerance),
        Cmd::Experiment {
            scenario,
            config,
            out,
        } => experiment_cmd(&scenario, &load_config(&config)?, out),
    }
}

fn hash_of(cfg: &Config, subcommand: &str) -> String {
    report::config_hash(&format!("subcommand = {subcommand}\n{}", cfg.canonical()))
}

// -------------------------------------------------------------- generate

fn generate(cfg: &Config, out: &Path) -> Result<u8, Error> {
    cfg.check_known(&[
        "grid_n",
        "seed",
        "lambda_sqs",
        "shell_amplitudes",
        "b",
        "epsilon",
        "helicity",
    ])?;
    let grid_n = cfg.get_usize("grid_n", 16)?;
    let seed = cfg.get_u64("seed", 7)?;
    let lambda_sqs = cfg.get_i64_list("lambda_sqs", &[1])?;
    let amplitudes = {
        let a = cfg.get_f64_list("shell_amplitudes", &[])?;
        if a.is_empty() {
            vec![1.0; lambda_sqs.len()]
        } else {
            a
        }
    };
    let b = cfg.get_f64("b", 0.5)?;
    let epsilon = cfg.get_f64("epsilon", 0.5)?;
    match cfg.get_str("helicity").unwrap_or("plus") {
        "plus" | "minus" => {}
        other => {
            return Err(Error::Schema {
                key: "helicity".into(),
                reason: format!("expected plus or minus, got {other:?}"),
            })
        }
    }

    let (field, rows) =
        beltrami::corollary18_data(grid_n, &lambda_sqs, &amplitudes, b, epsilon, None, seed)?;
    std::fs::create_dir_all(out)?;
    snapshot::write_snapshot(&field, &out.join("initial.nslb"))?;
    let hash = hash_of(cfg, "generate");
    let csv: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.condition.clone(),
                report::fmt_f64(r.lhs),
                report::fmt_f64(r.rhs),
                r.holds.to_string(),
            ]
        })
        .collect();
    report::write_csv(
        &out.join("admissibility.csv"),
        &["condition", "lhs", "rhs", "holds"],
        &csv,
        &hash,
    )?;
    report::write_manifest(
        out,
        &["initial.nslb".into(), "admissibility.csv".into()],
        &hash,
    )?;

    let mut ok = true;
    for r in &rows {
        println!(
            "[{}] {}: lhs {:.6e}, rhs {:.6e}",
            if r.holds { "pass" } else { "FAIL" },
            r.condition,
            r.lhs,
            r.rhs
        );
        ok &= r.holds;
    }
    println!(
        "wrote {} (n={grid_n}, shells {lambda_sqs:?})",
        out.join("initial.nslb").display()
    );
    Ok(if ok { 0 } else { 1 })
}

// ------------------------------------------------------------------ norm

fn argmax_columns(a: &Argmax) -> (String, String) {
    match a {
        Argmax::Cylinder { center, radius } => (
            format!("{}:{}:{}", center[0], center[1], center[2]),
            report::fmt_f64(*radius),
        ),
        Argmax::Level { j } => (format!("level {j}"), String::new()),
        Argmax::Composite { sup_time, cylinder } => {
            let c = cylinder
                .map(|(y, r)| format!("{}:{}:{} r={r}", y[0], y[1], y[2]))
                .unwrap_or_default();
            let t = sup_time.map(|t| format!("t={t}")).unwrap_or_default();
            (format!("{t} {c}").trim().to_string(), String::new())
        }
        Argmax::None => (String::new(), String::new()),
    }
}

fn parse_besov_spec(spec: &str) -> Result<(f64, BesovQ), Error> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = |reason: String| Error::Schema {
        key: "norm".into(),
        reason,
    };
    if parts.len() != 3 {
        return Err(bad(format!(
            "besov norm spec must be besov:<s>:<q>, got {spec:?}"
        )));
    }
    let s: f64 = parts[1]
        .parse()
        .map_err(|_| bad(format!("bad smoothness index {:?}", parts[1])))?;
    let q = match parts[2] {
        "2" => BesovQ::Two,
        "inf" => BesovQ::Infinity,
        other => return Err(bad(format!("summability must be 2 or inf, got {other:?}"))),
    };
    Ok((s, q))
}

fn norm_cmd(snap: &Path, norm: &str, out: Option<&Path>) -> Result<u8, Error> {
    let field = snapshot::read_snapshot(snap)?;
    let grid = CylinderGrid::for_grid(field.grid_n());
    let rep: NormReport = match norm {
        "bmo1" => norms::bmo_minus1_norm(&field, &grid)?,
        "bmo2" => norms::bmo_minus2_upper(&field, &grid)?,
        "l2" => NormReport {
            name: "l2".into(),
            value: field.l2_norm(),
            argmax: Argmax::None,
            meta: format!("n={}", field.grid_n()),
        },
        "sup" => NormReport {
            name: "sup".into(),
            value: operators::sup_norm(&field),
            argmax: Argmax::None,
            meta: format!("n={}", field.grid_n()),
        },
        spec if spec.starts_with("besov:") => {
            let (s, q) = parse_besov_spec(spec)?;
            norms::besov_norm(&field, s, q)
        }
        other => {
            return Err(Error::Schema {
                key: "norm".into(),
                reason: format!(
                    "unknown norm {other:?}; expected bmo1, bmo2, besov:<s>:<q>, l2, or sup"
                ),
            })
        }
    };
    let (ay, ar) = argmax_columns(&rep.argmax);
    let row = vec![
        rep.name.clone(),
        report::fmt_f64(rep.value),
        ay,
        ar,
        rep.meta.replace(',', ";"),
    ];
    let header = ["norm", "value", "argmax_y0", "argmax_r", "grid"];
    if let Some(path) = out {
        // Append so several invocations can accumulate rows in one file; the
        // hash line and header are written only when the file is created.
        if path.exists() {
            use std::io::Write as _;
            let mut f = std::fs::OpenOptions::new().append(true).open(path)?;
            writeln!(f, "{}", row.join(","))?;
        } else {
            let hash =
                report::config_hash(&format!("norm = {norm}\nsnapshot = {}\n", snap.display()));
            report::write_csv(path, &header, &[row.clone()], &hash)?;
        }
    }
    println!("{}", header.join(","));
    println!("{}", row.join(","));
    Ok(0)
}

// ----------------------------------------------------------------- solve

/// Initial data for `solve`/`picard`: a snapshot when `initial` is set,
/// otherwise a seeded divergence-free draw.
fn initial_field(cfg: &Config) -> Result<SpectralField, Error> {
    let path = cfg.get_str("initial").unwrap_or("");
    if !path.is_empty() {
        let f = snapshot::read_snapshot(Path::new(&path))?;
        if f.components() != 3 {
            return Err(Error::Schema {
                key: "initial".into(),
                reason: format!(
                    "velocity snapshot must have 3 components, got {}",
                    f.components()
                ),
            });
        }
        return Ok(f);
    }
    let grid_n = cfg.get_usize("grid_n", 16)?;
    let seed = cfg.get_u64("seed", 7)?;
    let max_mode = cfg.get_i64_list("max_mode", &[4])?[0];
    let amplitude = cfg.get_f64("amplitude", 1.0)?;
    let mut f = operators::random_div_free(grid_n, max_mode, seed);
    f.scale(amplitude);
    Ok(f)
}

fn write_series(
    out: &Path,
    prefix: &str,
    traj: &Trajectory,
    diag: &[DiagnosticsRow],
    hash: &str,
) -> Result<Vec<String>, Error> {
    std::fs::create_dir_all(out)?;
    let mut files = Vec::new();
    for i in 0..traj.len() {
        let mut f = traj.sample(i);
        f.set_label(format!("{prefix} t={}", traj.times()[i]));
        let name = format!("{prefix}_{i:04}.nslb");
        snapshot::write_snapshot(&f, &out.join(&name))?;
        files.push(name);
    }
    report::write_csv(
        &out.join("diagnostics.csv"),
        &DIAGNOSTICS_HEADER,
        &experiments::diagnostics_csv_rows(diag),
        hash,
    )?;
    files.push("diagnostics.csv".into());
    report::write_manifest(out, &files, hash)?;
    files.push("manifest.txt".into());
    Ok(files)
}

fn solve_cmd(cfg: &Config, out: &Path) -> Result<u8, Error> {
    cfg.check_known(&[
        "initial",
        "grid_n",
        "seed",
        "max_mode",
        "amplitude",
        "dt",
        "horizon",
        "record_every",
    ])?;
    let u0 = initial_field(cfg)?;
    let mut sc = solver::SolverConfig::new(cfg.get_f64("dt", 1e-3)?, cfg.get_f64("horizon", 1.0)?);
    sc.record_every = cfg.get_usize("record_every", 10)?.max(1);
    let traj = solver::solve(&u0, &sc)?;
    let diag = traj.diagnostics().expect("direct solves carry diagnostics");
    let hash = hash_of(cfg, "solve");
    let files = write_series(out, "state", &traj, diag, &hash)?;
    let last = diag.last().expect("at least the initial record");
    println!(
        "solved to t = {:.6e}: energy {:.6e}, sup {:.6e}, {} files in {}",
        last.time,
        last.energy,
        last.sup_norm,
        files.len(),
        out.display()
    );
    Ok(0)
}

// ---------------------------------------------------------------- picard

fn picard_cmd(cfg: &Config, out: &Path) -> Result<u8, Error> {
    cfg.check_known(&[
        "initial",
        "grid_n",
        "seed",
        "max_mode",
        "amplitude",
        "background",
        "t1",
        "nodes",
        "tol",
        "max_iter",
    ])?;
    let u01 = initial_field(cfg)?;
    let t1 = cfg.get_f64("t1", 0.25)?;
    let nodes = cfg.get_usize("nodes", 17)?.max(2);
    let tol = cfg.get_f64("tol", 1e-8)?;
    let max_iter = cfg.get_usize("max_iter", 25)?;
    let mesh: Vec<f64> = (0..nodes)
        .map(|i| t1 * i as f64 / (nodes - 1) as f64)
        .collect();

    let bg_path = cfg.get_str("background").unwrap_or("").to_string();
    let background = if bg_path.is_empty() {
        let mut z = SpectralField::zeros(u01.grid_n(), 3);
        z.set_real(true);
        z
    } else {
        snapshot::read_snapshot(Path::new(&bg_path))?
    };
    let bg_traj = heat_extension(&background, &mesh)?;

    let (v, rep) = picard::picard_solve(&u01, &bg_traj, t1, tol, max_iter)?;
    let diag: Vec<DiagnosticsRow> = (0..v.len())
        .map(|i| solver::diagnostics_row(v.times()[i], &v.sample(i)))
        .collect();
    let hash = hash_of(cfg, "picard");
    write_series(out, "iterate", &v, &diag, &hash)?;
    println!(
        "mild map: {} applications, last difference {:.3e}, converged = {}",
        rep.iterates,
        rep.differences.last().copied().unwrap_or(f64::NAN),
        rep.converged
    );
    Ok(if rep.converged { 0 } else { 1 })
}

// ---------------------------------------------------------------- verify

fn verify_cmd(snaps: &[PathBuf], tol: f64) -> Result<u8, Error> {
    let mut ok = true;
    for path in snaps {
        let f = snapshot::read_snapshot(path)?;
        let finite = f.max_coeff().is_finite();
        let scale = f.max_coeff().max(f64::MIN_POSITIVE);
        let sym = if f.is_real() {
            f.hermitian_residual() <= tol * scale
        } else {
            true
        };
        let good = finite && sym;
        ok &= good;
        println!(
            "[{}] {} (n={}, components={}, label={:?}, mean {:.2e}, div {:.2e})",
            if good { "ok" } else { "BAD" },
            path.display(),
            f.grid_n(),
            f.components(),
            f.label(),
            f.mean_magnitude(),
            if f.components() == 3 {
                f.divergence_residual()
            } else {
                f64::NAN
            }
        );
    }
    Ok(if ok { 0 } else { 1 })
}

// ------------------------------------------------------------ experiment

fn experiment_cmd(scenario: &str, cfg: &Config, out: Option<PathBuf>) -> Result<u8, Error> {
    let scenario = Scenario::parse(scenario)?;
    let ecfg = ExperimentConfig::from_config(scenario, cfg, out)?;
    let report = experiments::run(&ecfg)?;
    print!("{}", report.render_text());
    if !report.files.is_empty() {
        println!(
            "wrote {} files to {}",
            report.files.len(),
            ecfg.out_dir.as_ref().unwrap().display()
        );
    }
    Ok(if report.all_pass() { 0 } else { 1 })
}
