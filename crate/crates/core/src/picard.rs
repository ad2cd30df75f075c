//! Mild-solution construction for the perturbation system around a heat-flow
//! background.
//!
//! Given background `u(t)` and perturbation data `u01`, the map
//! `F(v) (t) = S(t) u01 - int_0^t S(t - tau) P div((u+v) (x) (u+v)) dtau`
//! is iterated from `v0 = S(t) u01`. The integrand is kept in divergence
//! form, so the `tau -> t` endpoint is regular and plain trapezoidal
//! quadrature on the sample mesh applies.

use crate::cylinder::CylinderGrid;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::norms;
use crate::operators;
use crate::trajectory::Trajectory;

/// Contraction bookkeeping of one Picard run.
#[derive(Debug, Clone)]
pub struct PicardReport {
    /// Number of map applications performed.
    pub iterates: usize,
    /// Successive-difference norms, one per map application.
    pub differences: Vec<f64>,
    /// Ratios of consecutive differences (`iterates - 1` entries).
    pub ratios: Vec<f64>,
    pub converged: bool,
    pub t1: f64,
}

/// Existence horizon `C eps^2 (1 + lambda^2)^-(b+2)`.
pub fn t1_horizon(m0: f64, epsilon: f64, lambda: f64, b: f64, c: f64) -> Result<f64> {
    if !(m0 > 0.0) {
        return Err(Error::BadExponent {
            name: "M0",
            value: m0,
            range: "(0, inf)",
        });
    }
    if !(epsilon > 0.0) {
        return Err(Error::BadExponent {
            name: "epsilon",
            value: epsilon,
            range: "(0, inf)",
        });
    }
    if !(lambda >= 0.0) {
        return Err(Error::BadExponent {
            name: "lambda",
            value: lambda,
            range: "[0, inf)",
        });
    }
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::BadExponent {
            name: "b",
            value: b,
            range: "(0, 1)",
        });
    }
    if !(c > 0.0) {
        return Err(Error::BadExponent {
            name: "C",
            value: c,
            range: "(0, inf)",
        });
    }
    Ok(c * epsilon * epsilon * (1.0 + lambda * lambda).powf(-(b + 2.0)))
}

/// Times of `traj` clipped to `[0, t1]`; must start at 0 and reach `t1`.
fn clipped_mesh(traj: &Trajectory, t1: f64) -> Result<Vec<f64>> {
    traj.require_nonempty()?;
    let times: Vec<f64> = traj
        .times()
        .iter()
        .copied()
        .filter(|&t| t <= t1 + 1e-12)
        .collect();
    if times.is_empty() || times[0] > 1e-12 {
        return Err(Error::MeshMismatch {
            reason: "time mesh must start at 0".into(),
        });
    }
    let last = *times.last().unwrap();
    if last < t1 - 1e-12 {
        return Err(Error::MeshMismatch {
            reason: format!("time mesh ends at {last}, horizon is {t1}"),
        });
    }
    for w in times.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::MeshMismatch {
                reason: "time mesh must be strictly increasing".into(),
            });
        }
    }
    Ok(times)
}

/// Trajectory values on an explicit mesh. Heat flows evaluate exactly;
/// sampled trajectories must already carry each requested time.
fn values_on_mesh(traj: &Trajectory, mesh: &[f64]) -> Result<Vec<SpectralField>> {
    if traj.is_heat_flow() {
        return mesh.iter().map(|&t| traj.eval(t)).collect();
    }
    let times = traj.times();
    let mut out = Vec::with_capacity(mesh.len());
    for &t in mesh {
        let i = times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-12)
            .ok_or_else(|| Error::MeshMismatch {
                reason: format!("sampled trajectory has no node at t = {t}"),
            })?;
        out.push(traj.sample(i));
    }
    Ok(out)
}

/// Smoothed running integral `I_j = int_0^{t_j} S(t_j - tau) F(tau) dtau`
/// by the incremental trapezoid
/// `I_j = S(dt)(I_{j-1} + dt/2 F_{j-1}) + dt/2 F_j`.
fn forced_evolution(mesh: &[f64], sources: &[SpectralField]) -> Result<Trajectory> {
    let mut integral = SpectralField::zeros(sources[0].grid_n(), 3);
    let mut out = Vec::with_capacity(mesh.len());
    out.push(integral.clone());
    for j in 1..mesh.len() {
        let dt = mesh[j] - mesh[j - 1];
        integral.add_scaled(&sources[j - 1], 0.5 * dt);
        integral = operators::heat_semigroup(&integral, dt)?;
        integral.add_scaled(&sources[j], 0.5 * dt);
        out.push(integral.clone());
    }
    Trajectory::from_samples(mesh.to_vec(), out)
}

/// Mild flow driven by a tensor source:
/// `V(t) = int_0^t S(t - tau) P div G(tau) dtau` on the mesh of `g_traj`
/// clipped to `[0, t1]`.
pub fn stokes_integral(g_traj: &Trajectory, t1: f64) -> Result<Trajectory> {
    let mesh = clipped_mesh(g_traj, t1)?;
    let gt = values_on_mesh(g_traj, &mesh)?;
    let sources: Vec<SpectralField> = gt
        .iter()
        .map(|g| operators::leray_project(&operators::tensor_divergence(g)))
        .collect();
    forced_evolution(&mesh, &sources)
}

/// One application of the mild-solution map.
///
/// The quadrature is trapezoidal on the mesh of `v_tilde` clipped to
/// `[0, t1]`; `u_traj` must supply values on the same mesh.
pub fn duhamel_map(
    v_tilde: &Trajectory,
    u_traj: &Trajectory,
    u01: &SpectralField,
    t1: f64,
) -> Result<Trajectory> {
    u01.require_mean_zero(1e-12)?;
    u01.require_div_free(1e-10)?;
    let mesh = clipped_mesh(v_tilde, t1)?;
    let vt = values_on_mesh(v_tilde, &mesh)?;
    let ut = values_on_mesh(u_traj, &mesh)?;

    // P div((u + v)(x)(u + v)) per node
    let sources: Vec<SpectralField> = vt
        .iter()
        .zip(&ut)
        .map(|(v, u)| {
            let w = u.add(v);
            operators::leray_project(&operators::tensor_divergence(&operators::outer_product(
                &w, &w,
            )))
        })
        .collect();

    let integral = forced_evolution(&mesh, &sources)?;
    let mut out = Vec::with_capacity(mesh.len());
    for (j, &t) in mesh.iter().enumerate() {
        let mut v = operators::heat_semigroup(u01, t)?;
        v.add_scaled(&integral.sample(j), -1.0);
        out.push(v);
    }
    Trajectory::from_samples(mesh, out)
}

/// Iterate the mild-solution map to its fixed point.
///
/// The time mesh is taken from `u_traj` clipped to `[0, t1]`. Stops when the
/// space-time norm of a successive difference drops below `tol`; a
/// non-contracting ratio aborts with `NoConvergence`.
pub fn picard_solve(
    u01: &SpectralField,
    u_traj: &Trajectory,
    t1: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(Trajectory, PicardReport)> {
    if !(t1 > 0.0) {
        return Err(Error::NonPositiveTime { t: t1 });
    }
    if !(tol > 0.0) {
        return Err(Error::BadConfig {
            reason: format!("tolerance must be positive, got {tol}"),
        });
    }
    if max_iter == 0 {
        return Err(Error::BadConfig {
            reason: "max_iter must be at least 1".into(),
        });
    }
    u01.require_mean_zero(1e-12)?;
    u01.require_div_free(1e-10)?;
    let mesh = clipped_mesh(u_traj, t1)?;
    let grid = CylinderGrid::for_grid(u01.grid_n());

    let mut v = Trajectory::heat_flow(u01.clone(), mesh)?;
    let mut differences = Vec::new();
    let mut ratios = Vec::new();
    let mut converged = false;
    for _ in 0..max_iter {
        let next = duhamel_map(&v, u_traj, u01, t1)?;
        let diff = next.difference(&v)?;
        let d = norms::x_norm(&diff, t1, &grid)?.value;
        if let Some(&prev) = differences.last() {
            if prev > 0.0 {
                let ratio = d / prev;
                ratios.push(ratio);
                if ratio >= 1.0 {
                    return Err(Error::NoConvergence {
                        iterations: differences.len() + 1,
                        last_ratio: ratio,
                    });
                }
            } else {
                ratios.push(0.0);
            }
        }
        differences.push(d);
        v = next;
        if d < tol {
            converged = true;
            break;
        }
    }
    let report = PicardReport {
        iterates: differences.len(),
        differences,
        ratios,
        converged,
        t1,
    };
    Ok((v, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beltrami::{random_beltrami_field, Helicity};
    use crate::operators::{heat_semigroup, random_div_free, sup_norm};
    use crate::solver::{solve, SolverConfig};
    use crate::trajectory::heat_extension;

    fn uniform_mesh(t1: f64, nodes: usize) -> Vec<f64> {
        (0..nodes)
            .map(|i| t1 * i as f64 / (nodes - 1) as f64)
            .collect()
    }

    fn zero_traj(n: usize, mesh: &[f64]) -> Trajectory {
        let fields = mesh.iter().map(|_| SpectralField::zeros(n, 3)).collect();
        Trajectory::from_samples(mesh.to_vec(), fields).unwrap()
    }

    #[test]
    fn horizon_formula() {
        assert!((t1_horizon(1.0, 0.1, 0.0, 0.5, 1.0).unwrap() - 0.01).abs() < 1e-15);
        let t = t1_horizon(1.0, 0.1, 3.0f64.sqrt(), 0.5, 1.0).unwrap();
        assert!((t - 3.125e-4).abs() < 1e-12, "{t}");
        // decreasing in lambda and in b
        let a = t1_horizon(1.0, 0.1, 1.0, 0.5, 1.0).unwrap();
        let b = t1_horizon(1.0, 0.1, 2.0, 0.5, 1.0).unwrap();
        assert!(b < a);
        let c = t1_horizon(1.0, 0.1, 1.0, 0.7, 1.0).unwrap();
        assert!(c < a);
    }

    #[test]
    fn horizon_validates_arguments() {
        assert!(matches!(
            t1_horizon(0.0, 0.1, 1.0, 0.5, 1.0),
            Err(Error::BadExponent { name: "M0", .. })
        ));
        assert!(matches!(
            t1_horizon(1.0, -0.1, 1.0, 0.5, 1.0),
            Err(Error::BadExponent {
                name: "epsilon",
                ..
            })
        ));
        assert!(matches!(
            t1_horizon(1.0, 0.1, -1.0, 0.5, 1.0),
            Err(Error::BadExponent { name: "lambda", .. })
        ));
        assert!(matches!(
            t1_horizon(1.0, 0.1, 1.0, 1.0, 1.0),
            Err(Error::BadExponent { name: "b", .. })
        ));
        assert!(matches!(
            t1_horizon(1.0, 0.1, 1.0, 0.5, 0.0),
            Err(Error::BadExponent { name: "C", .. })
        ));
    }

    #[test]
    fn duhamel_with_no_sources_is_heat_flow() {
        let u01 = random_div_free(8, 2, 1);
        let mesh = uniform_mesh(0.05, 6);
        let vt = zero_traj(8, &mesh);
        let ut = zero_traj(8, &mesh);
        let v = duhamel_map(&vt, &ut, &u01, 0.05).unwrap();
        for (i, &t) in v.times().iter().enumerate() {
            let expect = heat_semigroup(&u01, t).unwrap();
            assert!(v.sample(i).sub(&expect).max_coeff() < 1e-14);
        }
    }

    #[test]
    fn beltrami_background_source_is_annihilated() {
        // u (x) u of a curl eigenfield has divergence = grad |u|^2 / 2,
        // so the projected source vanishes and v stays a heat flow
        let u01 = random_div_free(16, 2, 2);
        let phi = random_beltrami_field(16, 4, Helicity::Plus, 3).unwrap();
        let mesh = uniform_mesh(0.05, 6);
        let vt = zero_traj(16, &mesh);
        let ut = heat_extension(&phi, &mesh).unwrap();
        let v = duhamel_map(&vt, &ut, &u01, 0.05).unwrap();
        for (i, &t) in v.times().iter().enumerate() {
            let expect = heat_semigroup(&u01, t).unwrap();
            let err = v.sample(i).sub(&expect).max_coeff();
            assert!(err < 1e-13 * u01.max_coeff(), "err {err} at t = {t}");
        }
    }

    #[test]
    fn quadrature_refines() {
        let u01 = {
            let mut f = random_div_free(16, 3, 4);
            f.scale(0.5);
            f
        };
        let a = {
            let mut f = random_div_free(16, 3, 5);
            f.scale(0.5);
            f
        };
        let b = {
            let mut f = random_div_free(16, 2, 6);
            f.scale(0.5);
            f
        };
        let t1 = 0.02;
        let run = |nodes: usize| {
            let mesh = uniform_mesh(t1, nodes);
            let vt = heat_extension(&a, &mesh).unwrap();
            let ut = heat_extension(&b, &mesh).unwrap();
            let v = duhamel_map(&vt, &ut, &u01, t1).unwrap();
            v.sample(v.len() - 1)
        };
        let coarse = run(9);
        let mid = run(17);
        let fine = run(33);
        let rel = coarse.sub(&fine).max_coeff() / fine.max_coeff();
        assert!(rel <= 5e-5, "relative difference {rel}");
        // halving the panel width cuts the trapezoid error ~4x
        let rel_mid = mid.sub(&fine).max_coeff() / fine.max_coeff();
        assert!(rel_mid <= 0.35 * rel, "{rel_mid} vs {rel}");
    }

    #[test]
    fn stokes_integral_of_heat_tensor_is_exact() {
        // S(t - tau) P div S(tau) G0 = S(t) P div G0 for every tau, so the
        // trapezoid weights sum to t and V(t) = t S(t) P div G0 to rounding
        let n = 16;
        let g0 = crate::operators::random_tensor(n, 3, 21);
        let mesh = uniform_mesh(0.2, 7);
        let g_traj = heat_extension(&g0, &mesh).unwrap();
        let v = stokes_integral(&g_traj, 0.2).unwrap();
        let f0 = crate::operators::leray_project(&crate::operators::tensor_divergence(&g0));
        for (i, &t) in v.times().iter().enumerate() {
            let mut expect = heat_semigroup(&f0, t).unwrap();
            expect.scale(t);
            let err = v.sample(i).sub(&expect).max_coeff();
            assert!(err <= 1e-13 * f0.max_coeff(), "err {err} at t = {t}");
        }
    }

    #[test]
    fn duhamel_output_divergence_free() {
        let u01 = random_div_free(8, 2, 7);
        let mesh = uniform_mesh(0.03, 5);
        let vt = heat_extension(&random_div_free(8, 2, 8), &mesh).unwrap();
        let ut = heat_extension(&random_div_free(8, 2, 9), &mesh).unwrap();
        let v = duhamel_map(&vt, &ut, &u01, 0.03).unwrap();
        for i in 0..v.len() {
            assert!(v.sample(i).divergence_residual() < 1e-11);
        }
    }

    #[test]
    fn mesh_mismatch_detected() {
        let u01 = random_div_free(8, 2, 1);
        let mesh = uniform_mesh(0.05, 6);
        let vt = zero_traj(8, &mesh);
        // sampled background on a different mesh
        let other = uniform_mesh(0.05, 7);
        let ut = zero_traj(8, &other);
        assert!(matches!(
            duhamel_map(&vt, &ut, &u01, 0.05),
            Err(Error::MeshMismatch { .. })
        ));
        // mesh not reaching the horizon
        let short = zero_traj(8, &uniform_mesh(0.01, 4));
        assert!(matches!(
            duhamel_map(&short, &ut, &u01, 0.05),
            Err(Error::MeshMismatch { .. })
        ));
    }

    #[test]
    fn trivial_picard_converges_immediately() {
        let u01 = SpectralField::zeros(8, 3);
        let mesh = uniform_mesh(0.01, 4);
        let ut = zero_traj(8, &mesh);
        let (v, report) = picard_solve(&u01, &ut, 0.01, 1e-8, 10).unwrap();
        assert!(report.converged);
        assert_eq!(report.iterates, 1);
        assert!(report.ratios.is_empty());
        assert_eq!(report.differences[0], 0.0);
        for i in 0..v.len() {
            assert_eq!(v.sample(i).max_coeff(), 0.0);
        }
    }

    #[test]
    fn small_data_contracts() {
        let mut u01 = random_div_free(16, 3, 11);
        u01.scale(1e-3 / u01.max_coeff());
        let mut bg = random_div_free(16, 3, 12);
        bg.scale(1e-3 / bg.max_coeff());
        let t1 = 0.01;
        let mesh = uniform_mesh(t1, 9);
        let ut = heat_extension(&bg, &mesh).unwrap();
        let (v, report) = picard_solve(&u01, &ut, t1, 1e-10, 20).unwrap();
        assert!(report.converged, "report: {report:?}");
        assert_eq!(report.ratios.len(), report.iterates - 1);
        assert!(
            report.ratios.iter().all(|&r| r <= 0.5),
            "{:?}",
            report.ratios
        );
        for i in 0..v.len() {
            assert!(v.sample(i).divergence_residual() < 1e-11);
        }
    }

    #[test]
    fn picard_matches_direct_solver() {
        // v = U - S(t) a solves the perturbation system exactly when
        // U solves the full system with data a + u01
        let mut a = random_beltrami_field(16, 4, Helicity::Plus, 13).unwrap();
        a.scale(0.2);
        let mut u01 = random_div_free(16, 2, 14);
        u01.scale(0.1 / u01.max_coeff());
        let total = a.add(&u01);

        let t1 = 0.01;
        let mut cfg = SolverConfig::new(2e-4, t1);
        cfg.record_every = 5;
        let full = solve(&total, &cfg).unwrap();
        let mesh = full.times().to_vec();

        let ut = heat_extension(&a, &mesh).unwrap();
        let (v, report) = picard_solve(&u01, &ut, t1, 1e-10, 25).unwrap();
        assert!(report.converged);

        let mut worst = 0.0f64;
        for (i, &t) in mesh.iter().enumerate() {
            let v_true = full.sample(i).sub(&heat_semigroup(&a, t).unwrap());
            let err = sup_norm(&v.sample(i).sub(&v_true));
            worst = worst.max(err);
        }
        let scale = sup_norm(&u01).max(1.0);
        assert!(worst <= 1e-5 * scale, "worst {worst}");
    }
}
