//! Direct pseudospectral time integration of the incompressible flow
//! equations (unit viscosity) on the periodic box.
//!
//! The stepper is an integrating-factor RK4: the heat part is folded into
//! exact semigroup multipliers, the projected nonlinearity is treated
//! explicitly. The nonlinearity is assembled in rotation form
//! `P(u x curl u)` (equal to `-P((u.grad)u)` for divergence-free fields), so
//! single-shell curl eigenfields decay exactly along `e^{-lambda^2 t}` up to
//! rounding.

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::operators;
use crate::trajectory::{DiagnosticsRow, Trajectory};

/// Energy blow-up factor that aborts a run.
const GROWTH_LIMIT: f64 = 1e3;

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub dt: f64,
    pub horizon: f64,
    /// Store every k-th step (the initial state and the final step are always
    /// recorded).
    pub record_every: usize,
}

impl SolverConfig {
    pub fn new(dt: f64, horizon: f64) -> SolverConfig {
        SolverConfig {
            dt,
            horizon,
            record_every: 1,
        }
    }

    /// Largest admissible step for an `n^3` grid: 0.5 / kmax^2 with
    /// kmax = floor(n/3) the dealiased band edge.
    pub fn stability_limit(grid_n: usize) -> f64 {
        let k = operators::dealias_band(grid_n) as f64;
        0.5 / (k * k)
    }

    pub fn validate(&self, grid_n: usize) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::BadConfig {
                reason: format!("time step must be positive, got {}", self.dt),
            });
        }
        let limit = SolverConfig::stability_limit(grid_n);
        if self.dt > limit * (1.0 + 1e-12) {
            return Err(Error::BadConfig {
                reason: format!(
                    "time step {} exceeds the stability bound 0.5*(n/3)^-2 = {} at n = {}",
                    self.dt, limit, grid_n
                ),
            });
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::BadConfig {
                reason: format!("horizon must be positive, got {}", self.horizon),
            });
        }
        if self.record_every == 0 {
            return Err(Error::BadConfig {
                reason: "record_every must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// Projected rotation-form nonlinearity `P dealias(u x curl u)`.
///
/// For divergence-free `u` this equals `-P((u.grad)u)` exactly on the kept
/// band, because the two differ by a gradient.
pub fn nonlinear_term(u: &SpectralField) -> SpectralField {
    let omega = operators::curl(u);
    operators::leray_project(&operators::cross_product(u, &omega))
}

/// Pressure of a stationary velocity snapshot, from the divergence of the
/// momentum equation: `Lap P = -div((u.grad)u)`.
pub fn pressure(u: &SpectralField) -> Result<SpectralField> {
    assert_eq!(u.components(), 3, "pressure needs a velocity field");
    u.require_mean_zero(1e-12)?;
    u.require_div_free(1e-10)?;
    let adv = operators::advect(u, u);
    let d = operators::divergence(&adv);
    let mut p = SpectralField::zeros(u.grid_n(), 1);
    for (cell, w) in d.modes() {
        let nsq = w.norm_sq() as f64;
        if nsq > 0.0 {
            p.coeffs_mut()[cell] = d.coeffs()[cell] / nsq;
        }
    }
    p.set_real(u.is_real());
    Ok(p)
}

/// Integrate the flow from `u0` to `cfg.horizon`.
///
/// The step is shrunk (never grown) so the horizon is an exact multiple.
/// Recorded states carry diagnostics and a Simpson-accumulated dissipation
/// integral `2 int_0^t |grad u|^2`.
pub fn solve(u0: &SpectralField, cfg: &SolverConfig) -> Result<Trajectory> {
    assert_eq!(u0.components(), 3, "solver expects a velocity field");
    cfg.validate(u0.grid_n())?;
    u0.require_mean_zero(1e-12)?;
    u0.require_div_free(1e-10)?;
    if u0.hermitian_residual() > 1e-10 * u0.max_coeff().max(1e-300) {
        return Err(Error::BadConfig {
            reason: "initial data must be real-valued".into(),
        });
    }

    let n_steps = (cfg.horizon / cfg.dt - 1e-9).ceil().max(1.0) as usize;
    let dt = cfg.horizon / n_steps as f64;
    let mut u = operators::dealias(&operators::leray_project(u0));
    u.zero_mean();
    let e0 = u.energy();

    let mut enstrophy_trace = Vec::with_capacity(n_steps + 1);
    enstrophy_trace.push(u.enstrophy());
    let mut times = Vec::new();
    let mut fields = Vec::new();
    let mut record_idx = Vec::new();
    let record = |i: usize,
                  t: f64,
                  state: &SpectralField,
                  times: &mut Vec<f64>,
                  fields: &mut Vec<SpectralField>,
                  record_idx: &mut Vec<usize>| {
        times.push(t);
        fields.push(state.clone());
        record_idx.push(i);
    };
    record(0, 0.0, &u, &mut times, &mut fields, &mut record_idx);

    for i in 1..=n_steps {
        u = ifrk4_step(&u, dt);
        let t = i as f64 * dt;
        let energy = u.energy();
        if !energy.is_finite() || (e0 > 0.0 && energy > GROWTH_LIMIT * e0) {
            let growth = if !energy.is_finite() {
                f64::INFINITY
            } else if e0 > 0.0 {
                energy / e0
            } else {
                energy
            };
            return Err(Error::Instability { time: t, growth });
        }
        enstrophy_trace.push(u.enstrophy());
        if i % cfg.record_every == 0 || i == n_steps {
            record(i, t, &u, &mut times, &mut fields, &mut record_idx);
        }
    }

    let cumulative = cumulative_quadrature(&enstrophy_trace, dt);
    let dissipation: Vec<f64> = record_idx.iter().map(|&i| 2.0 * cumulative[i]).collect();
    let rows: Vec<DiagnosticsRow> = times
        .iter()
        .zip(&fields)
        .map(|(&t, f)| diagnostics_row(t, f))
        .collect();

    let mut traj = Trajectory::from_samples(times, fields)?;
    traj.set_cumulative_dissipation(dissipation);
    traj.set_diagnostics(rows);
    Ok(traj)
}

pub fn diagnostics_row(t: f64, f: &SpectralField) -> DiagnosticsRow {
    DiagnosticsRow {
        time: t,
        energy: f.energy(),
        enstrophy: f.enstrophy(),
        sup_norm: operators::sup_norm(f),
        div_residual: f.divergence_residual(),
        analyticity_rate: analyticity_radius(f).map(|(r, _)| r).unwrap_or(f64::NAN),
    }
}

/// One integrating-factor RK4 step of `du/dt = Lap u + N(u)`.
fn ifrk4_step(u: &SpectralField, dt: f64) -> SpectralField {
    let half = |f: &SpectralField| operators::heat_semigroup(f, dt / 2.0).expect("dt > 0");
    let n0 = nonlinear_term(u);
    let eu = half(u);

    let mut a = u.clone();
    a.add_scaled(&n0, dt / 2.0);
    let a = half(&a);
    let na = nonlinear_term(&a);

    let mut b = eu.clone();
    b.add_scaled(&na, dt / 2.0);
    let nb = nonlinear_term(&b);

    let mut c = eu.clone();
    c.add_scaled(&nb, dt);
    let c = half(&c);
    let nc = nonlinear_term(&c);

    // u' = E^2 u + dt/6 (E^2 N0 + 2 E (Na + Nb) + Nc)
    let mut mid = na;
    mid.add_scaled(&nb, 1.0);
    let mid = half(&mid);
    let mut out = u.clone();
    out.add_scaled(&n0, dt / 6.0);
    let mut out = half(&half(&out));
    out.add_scaled(&mid, dt / 3.0);
    out.add_scaled(&nc, dt / 6.0);
    out.zero_mean();
    out
}

/// Cumulative integral of uniformly sampled values by composite Simpson
/// (quadratic Newton-Cotes on half-intervals at odd nodes).
fn cumulative_quadrature(g: &[f64], dt: f64) -> Vec<f64> {
    let n = g.len();
    let mut out = vec![0.0; n];
    for i in 1..n {
        if i % 2 == 0 {
            out[i] = out[i - 2] + dt / 3.0 * (g[i - 2] + 4.0 * g[i - 1] + g[i]);
        } else if i + 1 < n {
            out[i] = out[i - 1] + dt / 12.0 * (5.0 * g[i - 1] + 8.0 * g[i] - g[i + 1]);
        } else if i >= 2 {
            out[i] = out[i - 1] + dt / 12.0 * (-g[i - 2] + 8.0 * g[i - 1] + 5.0 * g[i]);
        } else {
            out[i] = out[i - 1] + dt / 2.0 * (g[i - 1] + g[i]);
        }
    }
    out
}

/// Per-time energy bookkeeping of a trajectory.
#[derive(Debug, Clone)]
pub struct EnergyRow {
    pub time: f64,
    /// Squared L2 norm.
    pub energy: f64,
    /// Squared L2 norm of the gradient.
    pub grad_sq: f64,
    /// Running integral of `grad_sq`.
    pub cumulative_grad_sq: f64,
    /// Running integral of the squared L2 norm of the Laplacian.
    pub cumulative_laplacian_sq: f64,
    /// E(t) + 2 int_0^t |grad|^2 - E(0) (zero for an exact unforced flow).
    pub energy_residual: f64,
}

pub fn energy_report(traj: &Trajectory) -> Result<Vec<EnergyRow>> {
    traj.require_nonempty()?;
    let times = traj.times();
    let mut rows = Vec::with_capacity(times.len());
    let mut cum_lap = 0.0;
    let mut cum_grad = 0.0;
    let mut prev: Option<(f64, f64, f64)> = None; // (t, grad_sq, lap_sq)
    let vol = (2.0 * std::f64::consts::PI).powi(3);
    let mut e0 = 0.0;
    for (i, &t) in times.iter().enumerate() {
        let f = traj.sample(i);
        let energy = f.energy();
        if i == 0 {
            e0 = energy;
        }
        let grad_sq = f.enstrophy();
        let mut lap_sq = 0.0;
        let m = f.cells();
        for (cell, w) in f.modes() {
            let n4 = (w.norm_sq() as f64).powi(2);
            for c in 0..f.components() {
                lap_sq += n4 * f.coeffs()[c * m + cell].norm_sqr();
            }
        }
        lap_sq *= vol;
        if let Some((tp, gp, lp)) = prev {
            cum_grad += 0.5 * (t - tp) * (gp + grad_sq);
            cum_lap += 0.5 * (t - tp) * (lp + lap_sq);
        }
        // prefer the producer's higher-order dissipation integral
        let cumulative_grad_sq = match traj.cumulative_dissipation() {
            Some(d) => d[i] / 2.0,
            None => cum_grad,
        };
        prev = Some((t, grad_sq, lap_sq));
        rows.push(EnergyRow {
            time: t,
            energy,
            grad_sq,
            cumulative_grad_sq,
            cumulative_laplacian_sq: cum_lap,
            energy_residual: energy + 2.0 * cumulative_grad_sq - e0,
        });
    }
    Ok(rows)
}

/// Least-squares decay rate of `log(shell max |u_n|)` against `|n|` over the
/// resolvable shells; returns `(rate, r_squared)`.
///
/// Shells are grouped by integer `|n|^2` inside the dealiased box; shells
/// with maximal amplitude at or below 1e-14 are ignored.
pub fn analyticity_radius(f: &SpectralField) -> Result<(f64, f64)> {
    let kmax = operators::dealias_band(f.grid_n());
    let m = f.cells();
    let mut shell_max: std::collections::BTreeMap<i64, f64> = std::collections::BTreeMap::new();
    for (cell, w) in f.modes() {
        if w.is_zero() || w.0.iter().any(|c| c.abs() > kmax) {
            continue;
        }
        let mut amp = 0.0f64;
        for c in 0..f.components() {
            amp = amp.max(f.coeffs()[c * m + cell].norm());
        }
        let e = shell_max.entry(w.norm_sq()).or_insert(0.0);
        *e = e.max(amp);
    }
    let pts: Vec<(f64, f64)> = shell_max
        .iter()
        .filter(|(_, &a)| a > 1e-14)
        .map(|(&nsq, &a)| ((nsq as f64).sqrt(), a.ln()))
        .collect();
    if pts.len() < 4 {
        return Err(Error::DegenerateFit { shells: pts.len() });
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom <= 0.0 {
        return Err(Error::DegenerateFit { shells: pts.len() });
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum();
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    Ok((-slope, r2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beltrami::{random_beltrami_field, Helicity};
    use crate::field::Wavevector;
    use crate::operators::random_div_free;
    use num_complex::Complex64;

    /// Two-mode divergence-free test flow (classic vortex array):
    /// (sin x cos y cos z, -cos x sin y cos z, 0) scaled by `amp`.
    fn taylor_green(n: usize, amp: f64) -> SpectralField {
        let mut f = SpectralField::zeros(n, 3);
        let q = 0.125 * amp;
        for sx in [1.0f64, -1.0] {
            for sy in [1.0f64, -1.0] {
                for sz in [1.0f64, -1.0] {
                    let w = Wavevector([sx as i64, sy as i64, sz as i64]);
                    // sin x -> (e^{ix} - e^{-ix}) / 2i, cos -> average
                    f.set_coeff(0, w, Complex64::new(0.0, -sx * q));
                    f.set_coeff(1, w, Complex64::new(0.0, sy * q));
                }
            }
        }
        f
    }

    #[test]
    fn rotation_form_matches_divergence_form() {
        for seed in [1u64, 2] {
            let u = random_div_free(16, 4, seed);
            let rot = nonlinear_term(&u);
            let div_form = operators::leray_project(&operators::tensor_divergence(
                &operators::outer_product(&u, &u),
            ));
            let resid = rot.add(&div_form).max_coeff();
            let scale = rot.max_coeff().max(div_form.max_coeff());
            assert!(resid <= 1e-12 * scale, "resid {resid} scale {scale}");
        }
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(1e-3, 0.1).validate(32).is_ok());
        assert!(matches!(
            SolverConfig::new(0.0, 0.1).validate(32),
            Err(Error::BadConfig { .. })
        ));
        assert!(matches!(
            SolverConfig::new(6e-3, 0.1).validate(32),
            Err(Error::BadConfig { .. })
        ));
        assert!(matches!(
            SolverConfig::new(1e-3, -1.0).validate(32),
            Err(Error::BadConfig { .. })
        ));
        let mut cfg = SolverConfig::new(1e-3, 0.1);
        cfg.record_every = 0;
        assert!(matches!(cfg.validate(32), Err(Error::BadConfig { .. })));
        // bound is 0.5 kmax^-2
        assert!((SolverConfig::stability_limit(32) - 0.005).abs() < 1e-15);
    }

    #[test]
    fn zero_data_stays_zero() {
        let u0 = SpectralField::zeros(8, 3);
        let traj = solve(&u0, &SolverConfig::new(1e-2, 0.05)).unwrap();
        for i in 0..traj.len() {
            assert_eq!(traj.sample(i).max_coeff(), 0.0);
        }
    }

    #[test]
    fn beltrami_flow_decays_exactly() {
        let lsq = 2i64;
        let phi = random_beltrami_field(16, lsq, Helicity::Plus, 5).unwrap();
        let mut cfg = SolverConfig::new(2e-3, 0.25);
        cfg.record_every = 25;
        let traj = solve(&phi, &cfg).unwrap();
        for (i, &t) in traj.times().iter().enumerate() {
            let mut expect = phi.clone();
            expect.scale((-(lsq as f64) * t).exp());
            let err = traj.sample(i).sub(&expect).max_coeff();
            assert!(err <= 1e-10 * expect.max_coeff(), "err {err} at t = {t}");
        }
    }

    #[test]
    fn states_stay_divergence_free() {
        let u0 = taylor_green(16, 1.0);
        let mut cfg = SolverConfig::new(5e-3, 0.05);
        cfg.record_every = 5;
        let traj = solve(&u0, &cfg).unwrap();
        for i in 0..traj.len() {
            let s = traj.sample(i);
            assert!(s.divergence_residual() <= 1e-11 * s.max_coeff().max(1e-300));
        }
    }

    #[test]
    fn fourth_order_step_convergence() {
        let u0 = taylor_green(8, 1.0);
        let horizon = 0.04;
        let run = |dt: f64| {
            let mut cfg = SolverConfig::new(dt, horizon);
            cfg.record_every = usize::MAX;
            let traj = solve(&u0, &cfg).unwrap();
            traj.sample(traj.len() - 1)
        };
        let reference = run(2.5e-4);
        let err1 = run(4e-3).sub(&reference).max_coeff();
        let err2 = run(2e-3).sub(&reference).max_coeff();
        assert!(
            err1 / err2 >= 8.0,
            "convergence ratio {} (errors {err1:.3e}, {err2:.3e})",
            err1 / err2
        );
    }

    #[test]
    fn resolution_convergence_of_energy() {
        let t = 0.1;
        let run = |n: usize| {
            let u0 = taylor_green(n, 1.0);
            let mut cfg = SolverConfig::new(1e-3, t);
            cfg.record_every = usize::MAX;
            let traj = solve(&u0, &cfg).unwrap();
            traj.sample(traj.len() - 1).energy()
        };
        let coarse = run(16);
        let fine = run(32);
        assert!(
            (coarse - fine).abs() <= 1e-6 * fine,
            "coarse {coarse}, fine {fine}"
        );
    }

    #[test]
    fn energy_identity_and_monotonicity() {
        let u0 = taylor_green(16, 1.0);
        let mut cfg = SolverConfig::new(2e-3, 0.1);
        cfg.record_every = 10;
        let traj = solve(&u0, &cfg).unwrap();
        let d = traj.cumulative_dissipation().unwrap();
        let e0 = traj.sample(0).energy();
        let mut last_energy = f64::INFINITY;
        for i in 0..traj.len() {
            let e = traj.sample(i).energy();
            assert!(e < last_energy + 1e-14);
            last_energy = e;
            let resid = (e + d[i] - e0).abs();
            assert!(resid <= 1e-6 * e0, "identity residual {resid} at {i}");
            if i > 0 {
                // discrete Leray inequality between recorded times
                let ep = traj.sample(i - 1).energy();
                assert!(e + (d[i] - d[i - 1]) <= ep * (1.0 + 1e-6));
            }
        }
    }

    #[test]
    fn instability_is_detected() {
        let mut u0 = random_div_free(16, 5, 9);
        u0.scale(2e3 / u0.max_coeff());
        let cfg = SolverConfig::new(SolverConfig::stability_limit(16), 1.0);
        match solve(&u0, &cfg) {
            Err(Error::Instability { growth, .. }) => assert!(growth > GROWTH_LIMIT),
            other => panic!("expected instability, got {other:?}"),
        }
    }

    #[test]
    fn pressure_of_beltrami_balances_advection() {
        // for a curl eigenfield the advection term is the gradient of
        // -|phi|^2/2, so grad P + (phi.grad)phi vanishes
        let phi = {
            let mut f = random_beltrami_field(16, 2, Helicity::Plus, 3).unwrap();
            f.scale(2.0);
            f
        };
        let p = pressure(&phi).unwrap();
        let grad_p = operators::gradient(&p);
        let adv = operators::advect(&phi, &phi);
        let resid = grad_p.add(&adv).max_coeff();
        assert!(resid <= 1e-11 * adv.max_coeff().max(1e-300));

        let zero = SpectralField::zeros(16, 3);
        assert_eq!(pressure(&zero).unwrap().max_coeff(), 0.0);
    }

    #[test]
    fn pressure_solves_poisson_equation() {
        let u = random_div_free(16, 5, 11);
        let p = pressure(&u).unwrap();
        let lap = operators::laplacian(&p);
        let rhs = operators::divergence(&operators::advect(&u, &u));
        let resid = lap.add(&rhs).max_coeff();
        assert!(resid <= 1e-11 * rhs.max_coeff());
        assert_eq!(p.components(), 1);
        assert_eq!(p.mean_magnitude(), 0.0);
    }

    #[test]
    fn pressure_rejects_compressible_input() {
        let mut g = SpectralField::zeros(8, 3);
        g.set_coeff(0, Wavevector([1, 0, 0]), Complex64::new(1.0, 0.0));
        assert!(matches!(pressure(&g), Err(Error::NotDivergenceFree { .. })));
    }

    #[test]
    fn energy_report_on_heat_flow() {
        // unit-L2 single mode |n|^2 = m: |grad v|^2 = m e^{-2mt}
        let m = 4.0;
        let mut f = SpectralField::zeros(8, 1);
        let a = 1.0 / (2.0 * std::f64::consts::PI).powf(1.5);
        f.set_coeff(0, Wavevector([2, 0, 0]), Complex64::new(a, 0.0));
        f.set_real(false);
        let times: Vec<f64> = (0..=40).map(|i| i as f64 * 0.005).collect();
        let traj = crate::trajectory::heat_extension(&f, &times).unwrap();
        let rows = energy_report(&traj).unwrap();
        for row in &rows {
            let expect = m * (-2.0 * m * row.time).exp();
            assert!((row.grad_sq - expect).abs() < 1e-12);
            assert!(row.energy_residual.abs() < 1e-12);
        }
        // cumulative |Lap v|^2 approaches the analytic value m^2/(2m)(1-e^{-2mT})
        let last = rows.last().unwrap();
        let exact = m * m / (2.0 * m) * (1.0 - (-2.0 * m * 0.2f64).exp());
        assert!((last.cumulative_laplacian_sq - exact).abs() < 1e-3 * exact);
    }

    #[test]
    fn energy_report_zero_and_empty() {
        let zero = SpectralField::zeros(8, 3);
        let traj = crate::trajectory::heat_extension(&zero, &[0.0, 0.1]).unwrap();
        let rows = energy_report(&traj).unwrap();
        assert!(rows.iter().all(|r| r.energy == 0.0 && r.grad_sq == 0.0));

        let empty = Trajectory::from_samples(vec![], vec![]).unwrap();
        assert!(matches!(energy_report(&empty), Err(Error::EmptyTrajectory)));
    }

    #[test]
    fn discrete_energy_balance_per_step() {
        let u0 = taylor_green(16, 0.5);
        let cfg = SolverConfig::new(5e-5, 5e-3);
        let traj = solve(&u0, &cfg).unwrap();
        let rows = energy_report(&traj).unwrap();
        for pair in rows.windows(2) {
            let dt = pair[1].time - pair[0].time;
            let resid = 0.5 * (pair[1].energy - pair[0].energy) / dt
                + 0.5 * (pair[0].grad_sq + pair[1].grad_sq);
            assert!(resid.abs() <= 1e-6 * rows[0].energy.max(1.0));
        }
    }

    #[test]
    fn analyticity_fit_recovers_planted_slope() {
        let mut f = SpectralField::zeros(16, 1);
        for cell in 0..f.cells() {
            let w = f.wavevector_of(cell);
            if w.is_zero() || w.max_abs() > 5 {
                continue;
            }
            f.coeffs_mut()[cell] = Complex64::new((-0.3 * w.norm()).exp(), 0.0);
        }
        let (rate, r2) = analyticity_radius(&f).unwrap();
        assert!((rate - 0.3).abs() < 0.015, "rate {rate}");
        assert!(r2 > 0.999);
    }

    #[test]
    fn analyticity_fit_needs_shells() {
        let mut f = SpectralField::zeros(16, 1);
        f.set_coeff(0, Wavevector([1, 0, 0]), Complex64::new(1.0, 0.0));
        assert!(matches!(
            analyticity_radius(&f),
            Err(Error::DegenerateFit { shells: 1 })
        ));
    }

    #[test]
    fn analyticity_rate_grows_under_heat_flow() {
        let f = random_div_free(16, 5, 13);
        let r0 = analyticity_radius(&operators::heat_semigroup(&f, 0.05).unwrap())
            .unwrap()
            .0;
        let r1 = analyticity_radius(&operators::heat_semigroup(&f, 0.2).unwrap())
            .unwrap()
            .0;
        assert!(r1 > r0, "{r1} vs {r0}");
    }
}
