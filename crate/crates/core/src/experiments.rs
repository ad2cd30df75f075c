//! Scenario runner: data construction → hypothesis checks → mild/direct
//! solves → verdict rows, plus the ratio ensemble for the inequality suite.
//!
//! Every check row carries (name, measured, bound) with pass ⇔ measured ≤
//! bound; hypothesis rows are evaluated before any solve and a failed one
//! aborts the run with `ConditionViolated`. Reports are bit-reproducible
//! for a fixed config: all reductions happen in a fixed order.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::beltrami::{self, Helicity};
use crate::config::{check_open_range, check_positive, out_of_range, Config};
use crate::cylinder::CylinderGrid;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::norms::{self, BesovQ};
use crate::operators;
use crate::picard;
use crate::report;
use crate::snapshot;
use crate::solver::{self, SolverConfig};
use crate::trajectory::{dyadic_times, heat_extension, DiagnosticsRow, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Theorem13,
    Corollary18,
    EstimateSuite,
    BeltramiExactness,
}

impl Scenario {
    pub fn parse(name: &str) -> Result<Scenario> {
        match name.replace('-', "_").as_str() {
            "theorem13" => Ok(Scenario::Theorem13),
            "corollary18" => Ok(Scenario::Corollary18),
            "estimate_suite" => Ok(Scenario::EstimateSuite),
            "beltrami_exactness" => Ok(Scenario::BeltramiExactness),
            other => Err(Error::Schema {
                key: "scenario".into(),
                reason: format!(
                    "unknown scenario {other:?}; expected theorem13, corollary18, \
                     estimate_suite, or beltrami_exactness"
                ),
            }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Theorem13 => "theorem13",
            Scenario::Corollary18 => "corollary18",
            Scenario::EstimateSuite => "estimate_suite",
            Scenario::BeltramiExactness => "beltrami_exactness",
        }
    }
}

/// Validated scenario parameters.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub grid_n: usize,
    pub seed: u64,
    pub m0: f64,
    /// Smallness parameter: eigen-defect level for `theorem13`, shell-spread
    /// scale for `corollary18`.
    pub epsilon: f64,
    /// Norm cap for the free small part of `corollary18` data.
    pub epsilon1: f64,
    pub b: f64,
    /// Stand-in for the unquantified smallness threshold the hypotheses
    /// compare against.
    pub eps_threshold: f64,
    /// Prefactor of the local-existence horizon.
    pub horizon_constant: f64,
    pub dt: f64,
    pub record_every: usize,
    pub picard_tol: f64,
    pub lambda_sq: i64,
    pub lambda_sqs: Vec<i64>,
    pub shell_amplitudes: Vec<f64>,
    pub ensemble: usize,
    pub coarse_n: usize,
    pub fine_n: usize,
    /// Number of smallness values for the weighted-sup scaling fit.
    pub epsilon_scaling_points: usize,
    pub out_dir: Option<PathBuf>,
    pub config_hash: String,
}

const COMMON_KEYS: &[&str] = &[
    "grid_n",
    "seed",
    "b",
    "m0",
    "epsilon",
    "eps_threshold",
    "horizon_constant",
    "dt",
    "record_every",
    "picard_tol",
];

impl ExperimentConfig {
    pub fn from_config(scenario: Scenario, cfg: &Config, out_dir: Option<PathBuf>) -> Result<Self> {
        let mut known: Vec<&str> = COMMON_KEYS.to_vec();
        match scenario {
            Scenario::Theorem13 => known.extend(["lambda_sq", "epsilon_scaling_points"]),
            Scenario::Corollary18 => known.extend(["lambda_sqs", "shell_amplitudes", "epsilon1"]),
            Scenario::EstimateSuite => known.extend(["ensemble", "coarse_n", "fine_n"]),
            Scenario::BeltramiExactness => known = vec!["grid_n", "seed", "dt", "lambda_sqs"],
        }
        cfg.check_known(&known)?;

        let default_n = if scenario == Scenario::BeltramiExactness {
            32
        } else {
            16
        };
        let grid_n = cfg.get_usize("grid_n", default_n)?;
        if grid_n < 8 || grid_n % 2 != 0 {
            return Err(Error::Schema {
                key: "grid_n".into(),
                reason: format!("grid size must be even and at least 8, got {grid_n}"),
            });
        }
        // the corollary spread condition admits order-one epsilon
        let default_eps = if scenario == Scenario::Corollary18 {
            0.5
        } else {
            0.01
        };
        let out = ExperimentConfig {
            scenario,
            grid_n,
            seed: cfg.get_u64("seed", 7)?,
            m0: check_positive("m0", cfg.get_f64("m0", 1.0)?)?,
            epsilon: check_positive("epsilon", cfg.get_f64("epsilon", default_eps)?)?,
            epsilon1: check_positive("epsilon1", cfg.get_f64("epsilon1", 0.005)?)?,
            b: check_open_range("b", cfg.get_f64("b", 0.5)?, 0.0, 1.0)?,
            eps_threshold: check_positive("eps_threshold", cfg.get_f64("eps_threshold", 0.05)?)?,
            horizon_constant: check_positive(
                "horizon_constant",
                cfg.get_f64("horizon_constant", 0.1)?,
            )?,
            // 2e-3 keeps the dissipation quadrature error of the highest
            // populated mode (|n|^2 = 48) below the 1e-6 energy-balance gate
            dt: check_positive(
                "dt",
                cfg.get_f64(
                    "dt",
                    if scenario == Scenario::BeltramiExactness {
                        1e-3
                    } else {
                        2e-3
                    },
                )?,
            )?,
            record_every: cfg.get_usize("record_every", 25)?.max(1),
            picard_tol: check_positive("picard_tol", cfg.get_f64("picard_tol", 1e-8)?)?,
            lambda_sq: {
                let l = cfg.get_i64_list("lambda_sq", &[1])?;
                match l.as_slice() {
                    [one] if *one >= 0 => *one,
                    [one] => return Err(out_of_range("lambda_sq", *one as f64, "[0, inf)")),
                    _ => {
                        return Err(Error::Schema {
                            key: "lambda_sq".into(),
                            reason: "expected a single shell".into(),
                        })
                    }
                }
            },
            lambda_sqs: {
                let default: &[i64] = if scenario == Scenario::BeltramiExactness {
                    &[1, 2, 3]
                } else {
                    &[1, 2]
                };
                let l = cfg.get_i64_list("lambda_sqs", default)?;
                if l.is_empty() || l.iter().any(|&x| x < 1) {
                    return Err(Error::Schema {
                        key: "lambda_sqs".into(),
                        reason: "need a nonempty list of squared radii >= 1".into(),
                    });
                }
                l
            },
            shell_amplitudes: cfg.get_f64_list("shell_amplitudes", &[])?,
            ensemble: {
                let e = cfg.get_usize("ensemble", 20)?;
                if e < 20 {
                    return Err(out_of_range("ensemble", e as f64, "[20, inf)"));
                }
                e
            },
            coarse_n: cfg.get_usize("coarse_n", 16)?,
            fine_n: cfg.get_usize("fine_n", 32)?,
            epsilon_scaling_points: {
                let p = cfg.get_usize("epsilon_scaling_points", 3)?;
                if !(1..=5).contains(&p) {
                    return Err(out_of_range("epsilon_scaling_points", p as f64, "[1, 5]"));
                }
                p
            },
            out_dir,
            config_hash: report::config_hash(&format!(
                "scenario = {}\n{}",
                scenario.name(),
                cfg.canonical()
            )),
        };
        if out.coarse_n >= out.fine_n
            || out.coarse_n < 8
            || out.coarse_n % 2 != 0
            || out.fine_n % 2 != 0
        {
            return Err(Error::Schema {
                key: "coarse_n".into(),
                reason: format!(
                    "grid pair must be even with coarse < fine, got {} and {}",
                    out.coarse_n, out.fine_n
                ),
            });
        }
        Ok(out)
    }
}

/// One verdict line. `pass` is never set independently of the comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
}

fn check_row(name: impl Into<String>, measured: f64, bound: f64) -> CheckRow {
    let name = name.into();
    debug_assert!(!name.contains(','), "row names feed bare CSV");
    CheckRow {
        name,
        measured,
        bound,
        pass: measured <= bound,
    }
}

/// Informational row: recorded, never binding.
fn info_row(name: impl Into<String>, measured: f64) -> CheckRow {
    check_row(name, measured, f64::INFINITY)
}

/// Finiteness row: fails only when the measurement blows up.
fn finite_row(name: impl Into<String>, measured: f64) -> CheckRow {
    check_row(name, measured, f64::MAX)
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub scenario: &'static str,
    pub rows: Vec<CheckRow>,
    pub summary: Vec<String>,
    /// Files written under the output directory, if one was configured.
    pub files: Vec<String>,
    pub config_hash: String,
}

impl ExperimentReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn row(&self, name: &str) -> Option<&CheckRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.name.clone(),
                    report::fmt_f64(r.measured),
                    report::fmt_f64(r.bound),
                    r.pass.to_string(),
                ]
            })
            .collect()
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("scenario: {}\n", self.scenario));
        for r in &self.rows {
            out.push_str(&format!(
                "  [{}] {}: measured {:.6e}, bound {:.6e}\n",
                if r.pass { "pass" } else { "FAIL" },
                r.name,
                r.measured,
                r.bound
            ));
        }
        for s in &self.summary {
            out.push_str(&format!("  {s}\n"));
        }
        out
    }
}

pub const DIAGNOSTICS_HEADER: [&str; 6] = [
    "t",
    "energy",
    "enstrophy",
    "sup_norm",
    "div_residual",
    "analyticity_rate",
];

pub fn diagnostics_csv_rows(rows: &[DiagnosticsRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|d| {
            vec![
                report::fmt_f64(d.time),
                report::fmt_f64(d.energy),
                report::fmt_f64(d.enstrophy),
                report::fmt_f64(d.sup_norm),
                report::fmt_f64(d.div_residual),
                report::fmt_f64(d.analyticity_rate),
            ]
        })
        .collect()
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    match cfg.scenario {
        Scenario::Theorem13 => run_theorem13(cfg),
        Scenario::Corollary18 => run_corollary18(cfg),
        Scenario::EstimateSuite => run_estimate_suite(cfg),
        Scenario::BeltramiExactness => run_beltrami_exactness(cfg),
    }
}

// ---------------------------------------------------------------- pipeline

struct PipelineOutput {
    rows: Vec<CheckRow>,
    summary: Vec<String>,
    trajectory: Trajectory,
}

fn zero_field(n: usize) -> SpectralField {
    let mut z = SpectralField::zeros(n, 3);
    z.set_real(true);
    z
}

/// In-band positive-polarization part used as the explicit background; the
/// rest of the data drives the perturbation.
fn background_split(u0: &SpectralField, lambda: f64) -> Result<(SpectralField, SpectralField)> {
    let band = if lambda > 0.0 {
        beltrami::band_split(u0, lambda)?.1
    } else {
        zero_field(u0.grid_n())
    };
    Ok((band.clone(), u0.sub(&band)))
}

/// Shared solve pipeline: mild iteration on the local horizon, direct solve
/// to `t2 + 5`, perturbation and balance verdicts.
fn solve_pipeline(
    u0: &SpectralField,
    lambda: f64,
    cfg: &ExperimentConfig,
) -> Result<PipelineOutput> {
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    let (band, remainder) = background_split(u0, lambda)?;

    let t1 = picard::t1_horizon(cfg.m0, cfg.epsilon, lambda, cfg.b, cfg.horizon_constant)?;
    let t2 = t1 + 1.0;

    // short direct solve doubles as the mild-iteration mesh
    let mut short_cfg = SolverConfig::new(t1 / 16.0, t1);
    short_cfg.record_every = 1;
    let short = solver::solve(u0, &short_cfg)?;
    let mesh = short.times().to_vec();
    let background = heat_extension(&band, &mesh)?;
    let (v_mild, mild) = picard::picard_solve(&remainder, &background, t1, cfg.picard_tol, 25)?;

    rows.push(check_row(
        "mild iteration converged (last difference)",
        mild.differences.last().copied().unwrap_or(f64::NAN),
        cfg.picard_tol,
    ));
    rows.push(check_row(
        "mild iteration contraction (max ratio)",
        mild.ratios.iter().copied().fold(0.0, f64::max),
        1.0,
    ));
    let mut worst = 0.0f64;
    for (i, &t) in mesh.iter().enumerate() {
        let v_true = short.sample(i).sub(&operators::heat_semigroup(&band, t)?);
        worst = worst.max(operators::sup_norm(&v_mild.sample(i).sub(&v_true)));
    }
    rows.push(check_row(
        "mild solution vs direct solve deviation",
        worst,
        1e-6 * operators::sup_norm(u0).max(1.0),
    ));
    summary.push(format!(
        "mild iteration: {} iterates on [0, {t1:.3e}], differences {:?}",
        mild.iterates, mild.differences
    ));

    // long run past the handoff time
    let horizon = t2 + 5.0;
    let mut main_cfg = SolverConfig::new(cfg.dt, horizon);
    main_cfg.record_every = cfg.record_every;
    let traj = solver::solve(u0, &main_cfg)?;
    let diag = traj
        .diagnostics()
        .expect("direct solves always carry diagnostics")
        .to_vec();

    rows.push(check_row(
        "horizon reached (time shortfall)",
        horizon - traj.last_time()?,
        1e-9 * horizon,
    ));
    let sup0 = diag[0].sup_norm.max(f64::MIN_POSITIVE);
    let sup_max = diag.iter().map(|d| d.sup_norm).fold(0.0, f64::max);
    rows.push(check_row("sup-norm growth factor", sup_max / sup0, 10.0));

    let energy = solver::energy_report(&traj)?;
    let drift = energy
        .windows(2)
        .map(|w| {
            (w[1].energy_residual - w[0].energy_residual).abs() / w[0].energy.max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max);
    rows.push(check_row(
        "energy balance max relative residual per recorded interval",
        drift,
        1e-6,
    ));

    // spectral decay rate should sharpen while every populated shell is
    // still above the fit threshold; 0.25 time units is safely inside that
    let onset: Vec<f64> = diag
        .iter()
        .filter(|d| d.time <= 0.25 + 1e-12 && d.analyticity_rate.is_finite())
        .map(|d| d.analyticity_rate)
        .collect();
    let max_drop = if onset.len() >= 3 {
        onset
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(f64::NEG_INFINITY, f64::max)
    } else {
        f64::NAN
    };
    rows.push(check_row(
        "spectral decay rate onset max drop",
        max_drop,
        1e-3,
    ));

    // perturbation v = U - S(t) band on the recorded mesh
    let a = 2.0 / (cfg.b + 2.0);
    let mut weighted = 0.0f64;
    let mut v_at_t2 = None;
    let mut grad_sq_integral = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for (i, &t) in traj.times().iter().enumerate() {
        let v = traj.sample(i).sub(&operators::heat_semigroup(&band, t)?);
        if t > t1 && t <= t2 * (1.0 + 1e-12) {
            weighted = weighted.max((t - t1).powf(a / 2.0) * operators::sup_norm(&v));
        }
        if t >= t2 && v_at_t2.is_none() {
            v_at_t2 = Some(v.energy());
        }
        let g = v.enstrophy();
        if let Some((tp, gp)) = prev {
            if t > t1 {
                grad_sq_integral += 0.5 * (g + gp) * (t - tp);
            }
        }
        prev = Some((t, g));
    }
    rows.push(info_row("weighted perturbation sup on (t1. t2]", weighted));
    rows.push(info_row(
        "perturbation energy at t2",
        v_at_t2.unwrap_or(f64::NAN),
    ));
    rows.push(info_row(
        "perturbation gradient-square integral (t1. horizon]",
        grad_sq_integral,
    ));

    summary.push(format!(
        "t1 = {t1:.6e}, t2 = {t2:.6e}, horizon = {horizon:.6e}"
    ));
    summary.push(format!(
        "records = {}, final energy = {:.6e}, final sup = {:.6e}",
        diag.len(),
        diag.last().unwrap().energy,
        diag.last().unwrap().sup_norm
    ));

    Ok(PipelineOutput {
        rows,
        summary,
        trajectory: traj,
    })
}

/// Fail the run if a hypothesis row does not hold.
fn gate(rows: &[CheckRow]) -> Result<()> {
    for r in rows {
        if !r.pass {
            return Err(Error::ConditionViolated {
                hypothesis: r.name.clone(),
                measured: r.measured,
                bound: r.bound,
            });
        }
    }
    Ok(())
}

fn emit(
    report: &mut ExperimentReport,
    out_dir: Option<&Path>,
    diag: Option<&[DiagnosticsRow]>,
    snapshots: &[(&str, &SpectralField)],
    extra_csv: Option<(&str, &[&str], &[Vec<String>])>,
) -> Result<()> {
    let Some(dir) = out_dir else {
        return Ok(());
    };
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    for (name, field) in snapshots {
        snapshot::write_snapshot(field, &dir.join(name))?;
        files.push(name.to_string());
    }
    if let Some(rows) = diag {
        report::write_csv(
            &dir.join("diagnostics.csv"),
            &DIAGNOSTICS_HEADER,
            &diagnostics_csv_rows(rows),
            &report.config_hash,
        )?;
        files.push("diagnostics.csv".into());
    }
    if let Some((name, header, rows)) = extra_csv {
        report::write_csv(&dir.join(name), header, rows, &report.config_hash)?;
        files.push(name.to_string());
    }
    report::write_csv(
        &dir.join("report.csv"),
        &["name", "measured", "bound", "pass"],
        &report.csv_rows(),
        &report.config_hash,
    )?;
    files.push("report.csv".into());
    report::write_manifest(dir, &files, &report.config_hash)?;
    files.push("manifest.txt".into());
    report.files = files;
    Ok(())
}

// -------------------------------------------------------------- theorem13

/// Scale `f` by bisection until its data norm sits in the window
/// `[0.95, 1.0] * m0` (inside the ±5% targeting tolerance).
fn bisect_to_data_norm(
    f: &SpectralField,
    grid: &CylinderGrid,
    m0: f64,
) -> Result<(SpectralField, f64)> {
    let target = 0.97 * m0;
    let base = norms::bmo_minus1_norm(f, grid)?.value;
    if base <= 0.0 {
        return Err(Error::BadConfig {
            reason: "band part has zero data norm".into(),
        });
    }
    let mut lo = 0.0;
    let mut hi = 2.0 * target / base;
    let mut last = base;
    for _ in 0..20 {
        let s = 0.5 * (lo + hi);
        let mut g = f.clone();
        g.scale(s);
        last = norms::bmo_minus1_norm(&g, grid)?.value;
        if last >= 0.95 * m0 && last <= m0 {
            return Ok((g, last));
        }
        if last < target {
            lo = s;
        } else {
            hi = s;
        }
    }
    Err(Error::NoConvergence {
        iterations: 20,
        last_ratio: last / target,
    })
}

/// Mode cube for the free small-data part, kept inside the dealias band.
fn small_part_max_mode(n: usize) -> i64 {
    operators::dealias_band(n).min(4)
}

struct Theorem13Data {
    band: SpectralField,
    /// Unscaled remainder and the defect level of its unscaled version.
    remainder_raw: SpectralField,
    defect_raw: f64,
}

fn theorem13_data(cfg: &ExperimentConfig, grid: &CylinderGrid) -> Result<Theorem13Data> {
    let lambda = (cfg.lambda_sq as f64).sqrt();
    let band = if cfg.lambda_sq > 0 {
        let phi =
            beltrami::random_beltrami_field(cfg.grid_n, cfg.lambda_sq, Helicity::Plus, cfg.seed)?;
        bisect_to_data_norm(&phi, grid, cfg.m0)?.0
    } else {
        zero_field(cfg.grid_n)
    };
    let remainder_raw = operators::random_div_free(
        cfg.grid_n,
        small_part_max_mode(cfg.grid_n),
        cfg.seed.wrapping_add(1),
    );
    let mut defect = operators::curl(&remainder_raw);
    defect.add_scaled(&remainder_raw, -lambda);
    let defect_raw = norms::bmo_minus2_upper(&defect, grid)?.value;
    if defect_raw <= 0.0 {
        return Err(Error::BadConfig {
            reason: "free part has zero eigen defect".into(),
        });
    }
    Ok(Theorem13Data {
        band,
        remainder_raw,
        defect_raw,
    })
}

fn assemble_theorem13(data: &Theorem13Data, lambda: f64, b: f64, epsilon: f64) -> SpectralField {
    // homogeneity pins the measured defect of the free part at
    // epsilon <lambda>^-b
    let bracket = (1.0 + lambda * lambda).powf(-b / 2.0);
    let scale = epsilon * bracket / data.defect_raw;
    let mut u0 = data.band.clone();
    u0.add_scaled(&data.remainder_raw, scale);
    u0
}

/// Least-squares slope of y against x.
fn lsq_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        num += (xi - mx) * (yi - my);
        den += (xi - mx) * (xi - mx);
    }
    num / den
}

/// Weighted perturbation sup on `(t1, t2]` for one smallness value; used by
/// the scaling fit. Runs the direct solver only up to `t2`.
fn weighted_sup_at(
    u0: &SpectralField,
    lambda: f64,
    epsilon: f64,
    cfg: &ExperimentConfig,
) -> Result<f64> {
    let (band, _) = background_split(u0, lambda)?;
    let t1 = picard::t1_horizon(cfg.m0, epsilon, lambda, cfg.b, cfg.horizon_constant)?;
    let t2 = t1 + 1.0;
    let mut sc = SolverConfig::new(cfg.dt, t2);
    sc.record_every = cfg.record_every;
    let traj = solver::solve(u0, &sc)?;
    let a = 2.0 / (cfg.b + 2.0);
    let mut best = 0.0f64;
    for (i, &t) in traj.times().iter().enumerate() {
        if t > t1 {
            let v = traj.sample(i).sub(&operators::heat_semigroup(&band, t)?);
            best = best.max((t - t1).powf(a / 2.0) * operators::sup_norm(&v));
        }
    }
    Ok(best)
}

pub fn run_theorem13(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let grid = CylinderGrid::for_grid(cfg.grid_n);
    let lambda = (cfg.lambda_sq as f64).sqrt();
    let data = theorem13_data(cfg, &grid)?;
    let u0 = assemble_theorem13(&data, lambda, cfg.b, cfg.epsilon);

    // hypothesis rows; the defect cap is checked before the norm cap so an
    // oversized smallness parameter is reported as the root violation
    let mut defect = operators::curl(&u0);
    defect.add_scaled(&u0, -lambda);
    let bracket = (1.0 + lambda * lambda).powf(-cfg.b / 2.0);
    let hyp = vec![
        check_row("initial mean magnitude", u0.mean_magnitude(), 1e-12),
        check_row(
            "initial divergence residual",
            u0.divergence_residual(),
            1e-10,
        ),
        check_row(
            "eigen-defect level vs smallness cap",
            norms::bmo_minus2_upper(&defect, &grid)?.value,
            cfg.eps_threshold * bracket,
        ),
        check_row(
            "data norm vs size cap",
            norms::bmo_minus1_norm(&u0, &grid)?.value,
            cfg.m0,
        ),
    ];
    gate(&hyp)?;

    let pipe = solve_pipeline(&u0, lambda, cfg)?;
    let mut rows = hyp;
    rows.extend(pipe.rows);
    let mut summary = pipe.summary;

    // scaling of the weighted sup across halved smallness values
    if cfg.epsilon_scaling_points >= 2 {
        let mut log_eps = Vec::new();
        let mut log_sup = Vec::new();
        for p in 0..cfg.epsilon_scaling_points {
            let eps_p = cfg.epsilon / 2f64.powi(p as i32);
            let u0_p = assemble_theorem13(&data, lambda, cfg.b, eps_p);
            let w = weighted_sup_at(&u0_p, lambda, eps_p, cfg)?;
            summary.push(format!("weighted sup at epsilon = {eps_p:.3e}: {w:.6e}"));
            if w > 0.0 {
                log_eps.push(eps_p.ln());
                log_sup.push(w.ln());
            }
        }
        let slope = if log_eps.len() >= 2 {
            lsq_slope(&log_eps, &log_sup)
        } else {
            f64::NAN
        };
        rows.push(info_row("weighted-sup scaling exponent", slope));
    }

    let mut report = ExperimentReport {
        scenario: cfg.scenario.name(),
        rows,
        summary,
        files: Vec::new(),
        config_hash: cfg.config_hash.clone(),
    };
    let (band, remainder) = background_split(&u0, lambda)?;
    emit(
        &mut report,
        cfg.out_dir.as_deref(),
        pipe.trajectory.diagnostics(),
        &[
            ("initial.nslb", &u0),
            ("band.nslb", &band),
            ("remainder.nslb", &remainder),
        ],
        None,
    )?;
    Ok(report)
}

// ------------------------------------------------------------ corollary18

pub fn run_corollary18(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let grid = CylinderGrid::for_grid(cfg.grid_n);
    let amplitudes = if cfg.shell_amplitudes.is_empty() {
        vec![1.0; cfg.lambda_sqs.len()]
    } else if cfg.shell_amplitudes.len() == cfg.lambda_sqs.len() {
        cfg.shell_amplitudes.clone()
    } else {
        return Err(Error::Schema {
            key: "shell_amplitudes".into(),
            reason: format!(
                "expected {} entries to match lambda_sqs",
                cfg.lambda_sqs.len()
            ),
        });
    };

    let (large_raw, adm) = beltrami::corollary18_data(
        cfg.grid_n,
        &cfg.lambda_sqs,
        &amplitudes,
        cfg.b,
        cfg.epsilon,
        None,
        cfg.seed,
    )?;
    let (large, large_norm) = bisect_to_data_norm(&large_raw, &grid, cfg.m0)?;

    let lambda1 = (cfg.lambda_sqs[0] as f64).sqrt();
    let mut small = operators::random_div_free(
        cfg.grid_n,
        small_part_max_mode(cfg.grid_n),
        cfg.seed.wrapping_add(17),
    );
    let small_norm_raw = norms::bmo_minus1_norm(&small, &grid)?.value;
    small.scale(0.9 * cfg.epsilon1 / small_norm_raw);
    let u0 = large.add(&small);

    let mut hyp = vec![
        check_row("initial mean magnitude", u0.mean_magnitude(), 1e-12),
        check_row(
            "initial divergence residual",
            u0.divergence_residual(),
            1e-10,
        ),
        check_row(
            "free-part size vs threshold",
            cfg.epsilon1,
            cfg.eps_threshold * lambda1.powf(-cfg.b) / (1.0 + lambda1),
        ),
        check_row("shell-part norm vs size cap", large_norm, cfg.m0),
        check_row(
            "free-part norm vs its cap",
            norms::bmo_minus1_norm(&small, &grid)?.value,
            cfg.epsilon1,
        ),
    ];
    for row in &adm {
        hyp.push(check_row(row.condition.clone(), row.lhs, row.rhs));
    }
    gate(&hyp)?;

    // defect chain at the lowest radius: whole-data level splits across the
    // two parts (triangle inequality of the divergence-level norm)
    let defect_of = |f: &SpectralField| -> Result<f64> {
        let mut d = operators::curl(f);
        d.add_scaled(f, -lambda1);
        Ok(norms::bmo_minus2_upper(&d, &grid)?.value)
    };
    let whole = defect_of(&u0)?;
    let part_large = defect_of(&large)?;
    let part_small = defect_of(&small)?;
    let mut rows = hyp;
    rows.push(check_row(
        "eigen-defect triangle split",
        whole,
        (part_large + part_small) * (1.0 + 1e-12),
    ));
    rows.push(info_row("eigen-defect level of shell part", part_large));
    rows.push(info_row("eigen-defect level of free part", part_small));

    let pipe = solve_pipeline(&u0, lambda1, cfg)?;
    rows.extend(pipe.rows);
    let mut summary = pipe.summary;
    summary.push(format!(
        "shells {:?} with norm {large_norm:.6e} after targeting",
        cfg.lambda_sqs
    ));

    let mut report = ExperimentReport {
        scenario: cfg.scenario.name(),
        rows,
        summary,
        files: Vec::new(),
        config_hash: cfg.config_hash.clone(),
    };
    emit(
        &mut report,
        cfg.out_dir.as_deref(),
        pipe.trajectory.diagnostics(),
        &[
            ("initial.nslb", &u0),
            ("shell_part.nslb", &large),
            ("free_part.nslb", &small),
        ],
        None,
    )?;
    Ok(report)
}

// ---------------------------------------------------------- estimate suite

/// Ratio with the zero-numerator convention.
fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

/// All inequality ratios for one seeded draw on one grid. Row names and
/// order are fixed; the ensemble aggregates by name.
fn seed_ratios(n: usize, seed: u64) -> Result<Vec<(String, f64)>> {
    let grid = CylinderGrid::for_grid(n);
    let mut out = Vec::new();

    let u0 = operators::random_div_free(n, 4, seed);
    let base = norms::bmo_minus1_norm(&u0, &grid)?.value;
    let heat = Trajectory::heat_flow(u0.clone(), vec![0.0, 1.0])?;

    out.push((
        "heat flow space-time norm vs data norm".into(),
        ratio(norms::x_norm(&heat, 1.0, &grid)?.value, base),
    ));
    out.push((
        "heat flow sup-square integral vs block-sum norm".into(),
        ratio(
            norms::linf_sq_time_integral(&heat, 1.0)?,
            norms::besov_norm(&u0, -1.0, BesovQ::Two).value,
        ),
    ));
    for d in [0.25, 0.5, 0.75] {
        let smoothed = operators::fractional_laplacian(&u0, -d)?;
        let flow = Trajectory::heat_flow(smoothed, vec![0.0, 1.0])?;
        out.push((
            format!("smoothed heat flow z-norm vs data norm [d={d}]"),
            ratio(norms::z_norm(&flow, 1.0, d, &grid)?.value, base),
        ));
    }
    out.push((
        "smoothed curl norm vs data norm".into(),
        ratio(
            norms::bmo_minus1_norm(
                &operators::fractional_laplacian(&operators::curl(&u0), -1.5)?,
                &grid,
            )?
            .value,
            base,
        ),
    ));
    out.push((
        "derivative ladder norm vs data norm".into(),
        ratio(norms::xmk_norm(&heat, 1.0, 1, 1, &grid)?.value, base),
    ));
    out.push((
        "divergence-level norm vs data norm".into(),
        ratio(norms::bmo_minus2_upper(&u0, &grid)?.value, base),
    ));

    // weighted sups of the heat flow against negative-order block norms
    let alpha = 0.5;
    let block = norms::besov_norm(&u0, -alpha, BesovQ::Infinity).value;
    let ladder = dyadic_times(1e-4, 1.0, 8);
    let mut sup0 = 0.0f64;
    let mut sup1 = 0.0f64;
    let grad_flow = norms::derivative_trajectory(&heat, 0, 1)?;
    for &t in &ladder {
        sup0 = sup0.max(t.powf(alpha / 2.0) * operators::sup_norm(&heat.eval(t)?));
        sup1 = sup1.max(t.powf((alpha + 1.0) / 2.0) * operators::sup_norm(&grad_flow.eval(t)?));
    }
    out.push((
        "weighted heat sup vs negative-order block norm".into(),
        ratio(sup0, block),
    ));
    out.push((
        "weighted heat gradient sup vs block norm".into(),
        ratio(sup1, block),
    ));

    // source-driven mild flow against the source's space-time norm
    let horizon = 0.25;
    let g0 = operators::random_tensor(n, 4, seed.wrapping_add(1000));
    let mesh: Vec<f64> = (0..=16).map(|i| horizon * i as f64 / 16.0).collect();
    let g_traj = heat_extension(&g0, &mesh)?;
    let v1 = picard::stokes_integral(&g_traj, horizon)?;
    let y_g = norms::y_norm(&g_traj, horizon, &grid)?.value;
    out.push((
        "source-driven flow norm vs source norm".into(),
        ratio(norms::x_norm(&v1, horizon, &grid)?.value, y_g),
    ));
    let a = 0.5;
    let mut weighted = 0.0f64;
    for (i, &t) in v1.times().iter().enumerate() {
        if t > 0.0 {
            let smoothed = operators::fractional_laplacian(&v1.sample(i), -a)?;
            weighted = weighted.max(t.powf((1.0 - a) / 2.0) * operators::sup_norm(&smoothed));
        }
    }
    out.push((
        "weighted smoothed source sup vs source norm".into(),
        ratio(weighted, y_g),
    ));

    // max_mode 2: pair sums stay inside the coarse dealias band (5), so
    // both grids apply the convolution to the same resolved spectrum
    out.push((
        "paraproduct block norm ratio".into(),
        norms::besov_product_check(
            &operators::random_scalar(n, 2, seed.wrapping_add(2000)),
            &operators::random_scalar(n, 2, seed.wrapping_add(3000)),
            0.75,
            0.2,
        )?
        .value,
    ));

    // shell-supported fields: divergence-level norm loses one radius power
    for lambda_sq in [4i64, 16, 64] {
        let lambda = (lambda_sq as f64).sqrt();
        if lambda >= (n / 2) as f64 {
            continue; // shell not resolvable on this grid
        }
        let phi = beltrami::random_beltrami_field(
            n,
            lambda_sq,
            Helicity::Plus,
            seed.wrapping_add(lambda_sq as u64),
        )?;
        let r = ratio(
            norms::bmo_minus2_upper(&phi, &grid)?.value * lambda,
            norms::bmo_minus1_norm(&phi, &grid)?.value,
        );
        out.push((format!("shell defect ratio [lambda={lambda}]"), r));
    }
    Ok(out)
}

struct EnsembleStats {
    names: Vec<String>,
    /// per estimate name: ratios in seed order
    per_grid: Vec<Vec<Vec<f64>>>,
}

fn collect_ensemble(grids: &[usize], ensemble: usize, seed0: u64) -> Result<EnsembleStats> {
    let mut names: Vec<String> = Vec::new();
    let mut per_grid = Vec::new();
    for &n in grids {
        // members are independent; ordered collect keeps reports identical
        let member: Vec<Vec<(String, f64)>> = (0..ensemble)
            .into_par_iter()
            .map(|i| seed_ratios(n, seed0.wrapping_add(i as u64)))
            .collect::<Result<_>>()?;
        for (name, _) in &member[0] {
            if !names.contains(name) {
                names.push(name.clone());
            }
        }
        let mut table = vec![Vec::new(); names.len()];
        for row in &member {
            for (name, value) in row {
                let k = names.iter().position(|m| m == name).unwrap();
                table[k].push(*value);
            }
        }
        per_grid.push(table);
    }
    Ok(EnsembleStats { names, per_grid })
}

pub fn run_estimate_suite(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let grids = [cfg.coarse_n, cfg.fine_n];
    let stats = collect_ensemble(&grids, cfg.ensemble, cfg.seed)?;

    let mut rows = Vec::new();
    let mut summary = Vec::new();
    let mut csv = Vec::new();
    for (k, name) in stats.names.iter().enumerate() {
        let coarse = &stats.per_grid[0].get(k).filter(|v| !v.is_empty());
        let fine = &stats.per_grid[1][k];
        let max_fine = fine.iter().copied().fold(0.0, f64::max);
        let mean_fine = fine.iter().sum::<f64>() / fine.len().max(1) as f64;
        rows.push(finite_row(format!("{name} max ratio"), max_fine));
        rows.push(finite_row(format!("{name} mean ratio"), mean_fine));
        if let Some(coarse) = coarse {
            let max_coarse = coarse.iter().copied().fold(0.0, f64::max);
            rows.push(check_row(
                format!("{name} grid drift"),
                (max_fine - max_coarse).abs() / max_coarse,
                0.25,
            ));
            summary.push(format!(
                "{name}: n={} max {max_coarse:.4e}, n={} max {max_fine:.4e}",
                grids[0], grids[1]
            ));
        } else {
            summary.push(format!(
                "{name}: n={} max {max_fine:.4e} (finest grid only)",
                grids[1]
            ));
        }
        for (gi, &n) in grids.iter().enumerate() {
            if let Some(vals) = stats.per_grid[gi].get(k) {
                for (s, v) in vals.iter().enumerate() {
                    csv.push(vec![
                        name.clone(),
                        n.to_string(),
                        s.to_string(),
                        report::fmt_f64(*v),
                    ]);
                }
            }
        }
    }

    // cross-radius stability of the shell constant on the fine grid
    let shell_maxima: Vec<f64> = stats
        .names
        .iter()
        .enumerate()
        .filter(|(_, m)| m.starts_with("shell defect ratio"))
        .map(|(k, _)| stats.per_grid[1][k].iter().copied().fold(0.0, f64::max))
        .collect();
    if shell_maxima.len() >= 2 {
        let hi = shell_maxima.iter().copied().fold(0.0f64, f64::max);
        let lo = shell_maxima.iter().copied().fold(f64::INFINITY, f64::min);
        rows.push(info_row(
            "shell constant spread across radii",
            hi / lo - 1.0,
        ));
    }

    let mut report = ExperimentReport {
        scenario: cfg.scenario.name(),
        rows,
        summary,
        files: Vec::new(),
        config_hash: cfg.config_hash.clone(),
    };
    emit(
        &mut report,
        cfg.out_dir.as_deref(),
        None,
        &[],
        Some((
            "ratios.csv",
            &["estimate", "grid_n", "member", "ratio"],
            &csv,
        )),
    )?;
    Ok(report)
}

// ----------------------------------------------------- exact-decay checks

pub fn run_beltrami_exactness(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    let mut snaps: Vec<(String, SpectralField)> = Vec::new();

    for &lambda_sq in &cfg.lambda_sqs {
        let phi = beltrami::random_beltrami_field(
            cfg.grid_n,
            lambda_sq,
            Helicity::Plus,
            cfg.seed.wrapping_add(lambda_sq as u64),
        )?;
        let t_end = 1.0 / lambda_sq as f64;
        let mut sc = SolverConfig::new(cfg.dt, t_end);
        sc.record_every = usize::MAX;
        let traj = solver::solve(&phi, &sc)?;
        let mut exact = phi.clone();
        exact.scale((-(lambda_sq as f64) * t_end).exp());
        let rel = operators::sup_norm(&traj.sample(traj.len() - 1).sub(&exact))
            / operators::sup_norm(&exact);
        rows.push(check_row(
            format!("curl-eigen flow vs exponential decay [lambda^2={lambda_sq}]"),
            rel,
            1e-8,
        ));
        summary.push(format!(
            "shell {lambda_sq}: solved to t = {t_end:.4}, relative deviation {rel:.3e}"
        ));
        snaps.push((format!("shell_{lambda_sq}.nslb"), phi));
    }

    // order check on data that actually exercises the nonlinearity: two
    // amplified shells with different radii interact, and the step sits
    // just under the stability cap so truncation dominates rounding
    let mixed = {
        let a = beltrami::random_beltrami_field(cfg.grid_n, 1, Helicity::Plus, cfg.seed)?;
        let b = beltrami::random_beltrami_field(
            cfg.grid_n,
            4,
            Helicity::Plus,
            cfg.seed.wrapping_add(99),
        )?;
        let mut m = a;
        m.add_scaled(&b, 1.0);
        m.scale(10.0);
        m
    };
    let band = operators::dealias_band(cfg.grid_n) as f64;
    let dt_big = 0.4 / (band * band);
    let horizon = 16.0 * dt_big;
    let final_state = |dt: f64| -> Result<SpectralField> {
        let mut sc = SolverConfig::new(dt, horizon);
        sc.record_every = usize::MAX;
        let traj = solver::solve(&mixed, &sc)?;
        Ok(traj.sample(traj.len() - 1))
    };
    let reference = final_state(dt_big / 8.0)?;
    let err_full = operators::sup_norm(&final_state(dt_big)?.sub(&reference));
    let err_half = operators::sup_norm(&final_state(dt_big / 2.0)?.sub(&reference));
    rows.push(check_row(
        "mixed-shell half-step error x8 vs full-step error",
        8.0 * err_half,
        err_full,
    ));
    summary.push(format!(
        "mixed shells: step errors {err_full:.3e} (dt) vs {err_half:.3e} (dt/2)"
    ));

    let mut report = ExperimentReport {
        scenario: cfg.scenario.name(),
        rows,
        summary,
        files: Vec::new(),
        config_hash: cfg.config_hash.clone(),
    };
    let snap_refs: Vec<(&str, &SpectralField)> =
        snaps.iter().map(|(name, f)| (name.as_str(), f)).collect();
    emit(&mut report, cfg.out_dir.as_deref(), None, &snap_refs, None)?;
    Ok(report)
}
