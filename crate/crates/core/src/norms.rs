//! Critical-space and space-time norms, evaluated on discrete parabolic
//! cylinders and dyadic frequency blocks.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::cylinder::CylinderGrid;
use crate::error::{Error, Result};
use crate::fft;
use crate::field::{SpectralField, Wavevector};
use crate::lp::{lp_block, LPFilter};
use crate::operators::{dealias_band, gradient_tensor, heat_semigroup, laplacian, sup_norm};
use crate::trajectory::{dyadic_times, Trajectory};

/// Where a reported sup was attained.
#[derive(Debug, Clone, PartialEq)]
pub enum Argmax {
    Cylinder {
        center: [usize; 3],
        radius: f64,
    },
    Level {
        j: i32,
    },
    Composite {
        sup_time: Option<f64>,
        cylinder: Option<([usize; 3], f64)>,
    },
    None,
}

/// Norm evaluation result with discretization provenance.
#[derive(Debug, Clone)]
pub struct NormReport {
    pub name: String,
    pub value: f64,
    pub argmax: Argmax,
    pub meta: String,
}

impl NormReport {
    fn new(name: &str, value: f64, argmax: Argmax, meta: String) -> NormReport {
        NormReport {
            name: name.to_string(),
            value,
            argmax,
            meta,
        }
    }
}

/// Per-cell squared Euclidean magnitude of the physical samples.
fn squared_magnitude(f: &SpectralField) -> Vec<f64> {
    let phys = fft::to_physical(f);
    let cells = f.cells();
    let mut out = vec![0.0; cells];
    for c in 0..f.components() {
        for (o, z) in out.iter_mut().zip(&phys[c * cells..(c + 1) * cells]) {
            *o += z.norm_sqr();
        }
    }
    out
}

enum CarlesonKind {
    /// sqrt(r^{-e} int int |g|^2)
    L2,
    /// r^{-e} int int |g|
    L1,
}

/// Sup over centers and radii of the cylinder functional. `sq_mag_at`
/// yields |g(., t)|^2 per grid cell; `amp_weight(t)` multiplies g before
/// the integral is taken.
fn carleson_sup<F>(
    grid: &CylinderGrid,
    centers: &[[usize; 3]],
    radii: &[f64],
    r_exponent: f64,
    kind: CarlesonKind,
    amp_weight: &dyn Fn(f64) -> f64,
    sq_mag_at: &mut F,
) -> Result<(f64, Option<([usize; 3], f64)>)>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    let n = grid.grid_n();
    let cells = n * n * n;
    let h3 = grid.h().powi(3);
    let mut best = 0.0f64;
    let mut arg = None;
    for &r in radii {
        let mut acc = vec![0.0f64; cells];
        for (t, w) in grid.time_nodes(r) {
            let sq = sq_mag_at(t)?;
            let a = amp_weight(t);
            match kind {
                CarlesonKind::L2 => {
                    let scale = w * a * a;
                    for (acc_i, sq_i) in acc.iter_mut().zip(&sq) {
                        *acc_i += scale * sq_i;
                    }
                }
                CarlesonKind::L1 => {
                    let scale = w * a.abs();
                    for (acc_i, sq_i) in acc.iter_mut().zip(&sq) {
                        *acc_i += scale * sq_i.sqrt();
                    }
                }
            }
        }
        let offsets = grid.ball_offsets(r);
        // lattice average over the discrete ball, scaled by the continuum
        // ball volume: cancels the volume overshoot of small lattice balls
        // (7 cells vs (4 pi / 3) r^3 at r = h) at every radius
        let ball_correction = 4.0 / 3.0 * PI * r.powi(3) / (offsets.len() as f64 * h3);
        let rfac = r.powf(-r_exponent) * h3 * ball_correction;
        for &center in centers {
            let mut sum = 0.0;
            for off in &offsets {
                let x = (center[0] as i64 + off[0]).rem_euclid(n as i64) as usize;
                let y = (center[1] as i64 + off[1]).rem_euclid(n as i64) as usize;
                let z = (center[2] as i64 + off[2]).rem_euclid(n as i64) as usize;
                sum += acc[(x * n + y) * n + z];
            }
            let val = match kind {
                CarlesonKind::L2 => (rfac * sum).max(0.0).sqrt(),
                CarlesonKind::L1 => rfac * sum,
            };
            if val > best {
                best = val;
                arg = Some((center, r));
            }
        }
    }
    Ok((best, arg))
}

fn mean_tol(f: &SpectralField) -> f64 {
    1e-12 * (1.0 + f.max_coeff())
}

/// Carleson-measure norm of the heat extension:
/// sup over cylinders of (r^{-3} int int |W|^2)^{1/2}.
pub fn bmo_minus1_norm(f: &SpectralField, grid: &CylinderGrid) -> Result<NormReport> {
    f.require_mean_zero(mean_tol(f))?;
    heat_carleson(f, grid, "bmo^-1")
}

/// Same functional applied to the full gradient of the heat extension.
pub fn bmo_norm(f: &SpectralField, grid: &CylinderGrid) -> Result<NormReport> {
    f.require_mean_zero(mean_tol(f))?;
    let grad = if f.components() == 3 {
        gradient_tensor(f)
    } else {
        crate::operators::gradient_stack(f)
    };
    heat_carleson(&grad, grid, "bmo")
}

fn heat_carleson(f: &SpectralField, grid: &CylinderGrid, name: &str) -> Result<NormReport> {
    let centers = grid.centers();
    let (value, arg) = carleson_sup(
        grid,
        &centers,
        grid.radii(),
        3.0,
        CarlesonKind::L2,
        &|_| 1.0,
        &mut |t| Ok(squared_magnitude(&heat_semigroup(f, t)?)),
    )?;
    let argmax = match arg {
        Some((center, radius)) => Argmax::Cylinder { center, radius },
        None => Argmax::None,
    };
    Ok(NormReport::new(name, value, argmax, grid.describe()))
}

/// Single-cylinder value of the heat-extension Carleson functional,
/// for argmax cross-checks.
pub fn heat_carleson_cylinder(
    f: &SpectralField,
    grid: &CylinderGrid,
    center: [usize; 3],
    radius: f64,
) -> Result<f64> {
    let (value, _) = carleson_sup(
        grid,
        &[center],
        &[radius],
        3.0,
        CarlesonKind::L2,
        &|_| 1.0,
        &mut |t| Ok(squared_magnitude(&heat_semigroup(f, t)?)),
    )?;
    Ok(value)
}

/// Canonical divergence-form representative g_i with f = sum_i d_i g_i.
pub fn divergence_representative(f: &SpectralField, i: usize) -> Result<SpectralField> {
    f.require_mean_zero(mean_tol(f))?;
    let mut out = f.clone();
    let m = f.cells();
    for (cell, w) in f.modes() {
        let nsq = w.norm_sq() as f64;
        let factor = if nsq == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            // d_i (Laplacian)^{-1}: i n_i * (-1/|n|^2)
            Complex64::new(0.0, -(w.0[i] as f64) / nsq)
        };
        for c in 0..f.components() {
            out.coeffs_mut()[c * m + cell] *= factor;
        }
    }
    Ok(out)
}

/// Upper bound for the second-order Carleson norm: the sum of the three
/// first-order norms of the canonical representatives.
pub fn bmo_minus2_upper(f: &SpectralField, grid: &CylinderGrid) -> Result<NormReport> {
    f.require_mean_zero(mean_tol(f))?;
    let mut total = 0.0;
    for i in 0..3 {
        let gi = divergence_representative(f, i)?;
        total += heat_carleson(&gi, grid, "bmo^-1")?.value;
    }
    Ok(NormReport::new(
        "bmo^-2_upper",
        total,
        Argmax::None,
        format!("{} (sum over 3 representatives)", grid.describe()),
    ))
}

/// Besov third index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesovQ {
    Infinity,
    Two,
}

/// Dyadic-block norm: q = infinity takes sup_j 2^{js} |P_j f|_inf,
/// q = 2 the l2 sum over levels.
pub fn besov_norm(f: &SpectralField, s: f64, q: BesovQ) -> NormReport {
    let filter = LPFilter::for_grid(f.grid_n());
    let mut best = 0.0f64;
    let mut best_level = None;
    let mut sq_sum = 0.0f64;
    for j in filter.levels() {
        let block_sup = sup_norm(&lp_block(f, j));
        if block_sup == 0.0 {
            continue;
        }
        let term = 2.0f64.powi(j).powf(s) * block_sup;
        sq_sum += term * term;
        if term > best {
            best = term;
            best_level = Some(j);
        }
    }
    let value = match q {
        BesovQ::Infinity => best,
        BesovQ::Two => sq_sum.sqrt(),
    };
    // no comma: the name lands in single CSV cells downstream
    let name = match q {
        BesovQ::Infinity => format!("besov[{s}:inf]"),
        BesovQ::Two => format!("besov[{s}:2]"),
    };
    let argmax = match best_level {
        Some(j) => Argmax::Level { j },
        None => Argmax::None,
    };
    NormReport::new(&name, value, argmax, filter.describe())
}

/// Weighted convolution sum_{j+k=n} a_j b_k / (|j| + |k|) on scalar
/// fields, dealiased.
pub fn bilinear_symbol_op(g: &SpectralField, h: &SpectralField) -> Result<SpectralField> {
    assert_eq!(g.components(), 1);
    assert_eq!(h.components(), 1);
    g.check_same_mesh(h)?;
    g.require_mean_zero(mean_tol(g))?;
    h.require_mean_zero(mean_tol(h))?;
    let n = g.grid_n();
    let band = dealias_band(n);
    let collect = |f: &SpectralField| -> Vec<(Wavevector, Complex64)> {
        f.modes()
            .filter(|&(cell, w)| !w.is_zero() && f.coeffs()[cell].norm_sqr() > 0.0)
            .map(|(cell, w)| (w, f.coeffs()[cell]))
            .collect()
    };
    let gm = collect(g);
    let hm = collect(h);
    let mut out = SpectralField::zeros(n, 1);
    out.set_real(g.is_real() && h.is_real());
    for &(j, a) in &gm {
        for &(k, b) in &hm {
            let sum = Wavevector([j.0[0] + k.0[0], j.0[1] + k.0[1], j.0[2] + k.0[2]]);
            if sum.max_abs() > band {
                continue;
            }
            let cell = match out.cell_of(sum) {
                Some(cell) => cell,
                None => continue,
            };
            let weight = 1.0 / (j.norm() + k.norm());
            out.coeffs_mut()[cell] += a * b * weight;
        }
    }
    Ok(out)
}

/// Ratio |F|_{B^kappa} / (|g|_{B^{kappa-1+a}} |h|_{B^{-a}}) with F the
/// weighted convolution of g and h.
pub fn besov_product_check(
    g: &SpectralField,
    h: &SpectralField,
    a: f64,
    kappa: f64,
) -> Result<NormReport> {
    if !(0.5 < a && a < 1.0) || !(0.0 < kappa && kappa < 1.0 - a) {
        return Err(Error::BadExponents { a, kappa });
    }
    let f = bilinear_symbol_op(g, h)?;
    let num = besov_norm(&f, kappa, BesovQ::Infinity).value;
    let ratio = if num == 0.0 {
        0.0
    } else {
        let den = besov_norm(g, kappa - 1.0 + a, BesovQ::Infinity).value
            * besov_norm(h, -a, BesovQ::Infinity).value;
        num / den
    };
    Ok(NormReport::new(
        "besov_product_ratio",
        ratio,
        Argmax::None,
        format!("a={a} kappa={kappa}"),
    ))
}

fn require_horizon(t: f64) -> Result<()> {
    if t <= 0.0 {
        return Err(Error::NonPositiveTime { t });
    }
    Ok(())
}

/// Times used for the sup-in-time part: stored samples for sampled
/// trajectories, a dense dyadic ladder for exactly evaluable heat flows.
fn sup_times(traj: &Trajectory, horizon: f64, grid: &CylinderGrid) -> Vec<f64> {
    if traj.is_heat_flow() {
        let t_min = (grid.t_floor() / 4.0).min(horizon / 64.0);
        dyadic_times(t_min, horizon, 8)
    } else {
        traj.times()
            .iter()
            .copied()
            .filter(|&t| t > 0.0 && t <= horizon * (1.0 + 1e-12))
            .collect()
    }
}

fn check_span(traj: &Trajectory, horizon: f64) -> Result<()> {
    traj.require_nonempty()?;
    if !traj.is_heat_flow() && traj.last_time()? < horizon * (1.0 - 1e-9) {
        return Err(Error::MeshMismatch {
            reason: format!(
                "trajectory ends at {} before horizon {horizon}",
                traj.last_time()?
            ),
        });
    }
    Ok(())
}

fn weighted_sup(traj: &Trajectory, times: &[f64], exponent: f64) -> Result<(f64, Option<f64>)> {
    let mut best = 0.0f64;
    let mut arg = None;
    for &t in times {
        if t <= 0.0 {
            continue;
        }
        let v = t.powf(exponent) * sup_norm(&traj.eval(t)?);
        if v > best {
            best = v;
            arg = Some(t);
        }
    }
    Ok((best, arg))
}

fn carleson_radii(grid: &CylinderGrid, horizon: f64) -> Vec<f64> {
    grid.radii()
        .iter()
        .copied()
        .filter(|r| r * r <= horizon * (1.0 + 1e-9))
        .collect()
}

struct SpaceTimeParts {
    sup: f64,
    sup_time: Option<f64>,
    carleson: f64,
    cylinder: Option<([usize; 3], f64)>,
}

fn space_time_norm(
    traj: &Trajectory,
    horizon: f64,
    grid: &CylinderGrid,
    sup_exponent: f64,
    carleson_amp: &dyn Fn(f64) -> f64,
    kind: CarlesonKind,
    r_exponent: f64,
) -> Result<SpaceTimeParts> {
    require_horizon(horizon)?;
    check_span(traj, horizon)?;
    let times = sup_times(traj, horizon, grid);
    let (sup, sup_time) = weighted_sup(traj, &times, sup_exponent)?;
    let centers = grid.centers();
    let radii = carleson_radii(grid, horizon);
    let (carleson, cylinder) = carleson_sup(
        grid,
        &centers,
        &radii,
        r_exponent,
        kind,
        carleson_amp,
        &mut |t| Ok(squared_magnitude(&traj.eval(t)?)),
    )?;
    Ok(SpaceTimeParts {
        sup,
        sup_time,
        carleson,
        cylinder,
    })
}

fn composite_report(name: &str, parts: SpaceTimeParts, grid: &CylinderGrid) -> NormReport {
    NormReport::new(
        name,
        parts.sup + parts.carleson,
        Argmax::Composite {
            sup_time: parts.sup_time,
            cylinder: parts.cylinder,
        },
        grid.describe(),
    )
}

/// sup_t t^{1/2} |g|_inf plus the L2 Carleson part over r <= sqrt(T).
pub fn x_norm(traj: &Trajectory, horizon: f64, grid: &CylinderGrid) -> Result<NormReport> {
    let parts = space_time_norm(traj, horizon, grid, 0.5, &|_| 1.0, CarlesonKind::L2, 3.0)?;
    Ok(composite_report("x_norm", parts, grid))
}

/// sup_t t |g|_inf plus the L1 Carleson part.
pub fn y_norm(traj: &Trajectory, horizon: f64, grid: &CylinderGrid) -> Result<NormReport> {
    let parts = space_time_norm(traj, horizon, grid, 1.0, &|_| 1.0, CarlesonKind::L1, 3.0)?;
    Ok(composite_report("y_norm", parts, grid))
}

/// sup_t t^{(1-d)/2} |g|_inf plus the L2 Carleson part with radius
/// exponent 1+2d, for 0 < d < 1.
pub fn z_norm(traj: &Trajectory, horizon: f64, d: f64, grid: &CylinderGrid) -> Result<NormReport> {
    if !(0.0 < d && d < 1.0) {
        return Err(Error::BadExponent {
            name: "d",
            value: d,
            range: "(0, 1)",
        });
    }
    let parts = space_time_norm(
        traj,
        horizon,
        grid,
        (1.0 - d) / 2.0,
        &|_| 1.0,
        CarlesonKind::L2,
        1.0 + 2.0 * d,
    )?;
    Ok(composite_report(&format!("z_norm[d={d}]"), parts, grid))
}

/// Trajectory of t -> Laplacian^m grad^k g(t).
///
/// Heat flows differentiate exactly through the semigroup; sampled
/// trajectories use spectral gradients and divided differences in time.
pub fn derivative_trajectory(traj: &Trajectory, m: usize, k: usize) -> Result<Trajectory> {
    traj.require_nonempty()?;
    if let Some(initial) = traj.heat_initial() {
        let mut f = initial.clone();
        for _ in 0..k {
            f = crate::operators::gradient_stack(&f);
        }
        for _ in 0..m {
            // d_t of a heat flow is the Laplacian, applied m times
            f = laplacian(&f);
        }
        return Trajectory::heat_flow(f, traj.times().to_vec());
    }
    let mut out = traj.map_samples(|_, s| {
        let mut f = s.clone();
        for _ in 0..k {
            f = crate::operators::gradient_stack(&f);
        }
        f
    })?;
    for _ in 0..m {
        out = divided_difference(&out)?;
    }
    Ok(out)
}

fn divided_difference(traj: &Trajectory) -> Result<Trajectory> {
    let times = traj.times().to_vec();
    if times.len() < 2 {
        return Err(Error::EmptyTrajectory);
    }
    let fields: Vec<SpectralField> = (0..times.len())
        .map(|i| {
            let (lo, hi) = if i == 0 {
                (0, 1)
            } else if i == times.len() - 1 {
                (times.len() - 2, times.len() - 1)
            } else {
                (i - 1, i + 1)
            };
            let mut d = traj.sample(hi).sub(&traj.sample(lo));
            d.scale(1.0 / (times[hi] - times[lo]));
            d
        })
        .collect();
    Trajectory::from_samples(times, fields)
}

/// Sum over 0 <= m <= M, 0 <= k <= K of
/// sup_t t^{(k+1)/2+m} |d_t^m grad^k g|_inf plus the L2 Carleson part of
/// t^{k/2+m} d_t^m grad^k g.
pub fn xmk_norm(
    traj: &Trajectory,
    horizon: f64,
    m_max: usize,
    k_max: usize,
    grid: &CylinderGrid,
) -> Result<NormReport> {
    assert!(m_max <= 2 && k_max <= 2, "desk scale is M, K <= 2");
    require_horizon(horizon)?;
    let mut total = 0.0;
    let mut worst_cylinder = None;
    let mut worst_val = 0.0;
    for m in 0..=m_max {
        for k in 0..=k_max {
            let dmk = derivative_trajectory(traj, m, k)?;
            let parts = space_time_norm(
                &dmk,
                horizon,
                grid,
                (k as f64 + 1.0) / 2.0 + m as f64,
                &|t| t.powf(k as f64 / 2.0 + m as f64),
                CarlesonKind::L2,
                3.0,
            )?;
            total += parts.sup + parts.carleson;
            if parts.carleson > worst_val {
                worst_val = parts.carleson;
                worst_cylinder = parts.cylinder;
            }
        }
    }
    Ok(NormReport::new(
        &format!("xmk_norm[M={m_max},K={k_max}]"),
        total,
        Argmax::Composite {
            sup_time: None,
            cylinder: worst_cylinder,
        },
        grid.describe(),
    ))
}

/// (int_0^T |g(t)|_inf^2 dt)^{1/2} by trapezoid over the sample ladder.
pub fn linf_sq_time_integral(traj: &Trajectory, horizon: f64) -> Result<f64> {
    require_horizon(horizon)?;
    check_span(traj, horizon)?;
    let mut times: Vec<f64> = if traj.is_heat_flow() {
        let t_min = horizon / 1024.0;
        let mut v = dyadic_times(t_min, horizon, 8);
        v.insert(0, 0.0);
        v
    } else {
        traj.times()
            .iter()
            .copied()
            .filter(|&t| t <= horizon * (1.0 + 1e-12))
            .collect()
    };
    if times.last().map_or(true, |&t| t < horizon * (1.0 - 1e-9)) {
        times.push(horizon);
    }
    let vals: Vec<f64> = times
        .iter()
        .map(|&t| traj.eval(t).map(|f| sup_norm(&f).powi(2)))
        .collect::<Result<_>>()?;
    let mut integral = 0.0;
    for i in 1..times.len() {
        integral += 0.5 * (vals[i] + vals[i - 1]) * (times[i] - times[i - 1]);
    }
    Ok(integral.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::psi;
    use crate::trajectory::heat_extension;
    use std::f64::consts::PI;

    fn single_mode(n: usize, w: [i64; 3]) -> SpectralField {
        let mut f = SpectralField::zeros(n, 1);
        f.set_coeff(0, Wavevector(w), Complex64::new(1.0, 0.0));
        f.set_real(false);
        f
    }

    fn closed_form_bmo1(m: f64) -> f64 {
        ((4.0 * PI / 3.0) * (1.0 - (-2.0 * m * PI * PI).exp()) / (2.0 * m)).sqrt()
    }

    #[test]
    fn bmo_minus1_zero_field() {
        let f = SpectralField::zeros(16, 3);
        let grid = CylinderGrid::for_grid(16);
        let r = bmo_minus1_norm(&f, &grid).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn bmo_minus1_single_mode_closed_form() {
        let n = 16;
        let grid = CylinderGrid::for_grid(n);
        for m in [1i64, 2, 4] {
            let w = match m {
                1 => [1, 0, 0],
                2 => [1, 1, 0],
                _ => [2, 0, 0],
            };
            let f = single_mode(n, w);
            let got = bmo_minus1_norm(&f, &grid).unwrap();
            let expect = closed_form_bmo1(m as f64);
            assert!(
                (got.value - expect).abs() / expect < 0.05,
                "m={m}: got {} expect {expect}",
                got.value
            );
            // sup attained at the largest radius
            match got.argmax {
                Argmax::Cylinder { radius, .. } => assert!((radius - PI).abs() < 1e-12),
                _ => panic!("expected cylinder argmax"),
            }
        }
    }

    #[test]
    fn bmo_minus1_homogeneous() {
        let n = 16;
        let grid = CylinderGrid::for_grid(n);
        let f = crate::operators::random_div_free(n, 5, 3);
        let mut g = f.clone();
        g.scale(2.0);
        let a = bmo_minus1_norm(&f, &grid).unwrap().value;
        let b = bmo_minus1_norm(&g, &grid).unwrap().value;
        assert_eq!(b, 2.0 * a);
    }

    #[test]
    fn bmo_minus1_rejects_mean() {
        let mut f = SpectralField::zeros(16, 3);
        f.set_coeff(0, Wavevector([0, 0, 0]), Complex64::new(1.0, 0.0));
        let grid = CylinderGrid::for_grid(16);
        assert!(matches!(
            bmo_minus1_norm(&f, &grid),
            Err(Error::NonZeroMean { .. })
        ));
    }

    #[test]
    fn bmo_minus1_argmax_reproduces_value() {
        let n = 16;
        let grid = CylinderGrid::for_grid(n);
        let f = crate::operators::random_div_free(n, 5, 9);
        let report = bmo_minus1_norm(&f, &grid).unwrap();
        if let Argmax::Cylinder { center, radius } = report.argmax {
            let again = heat_carleson_cylinder(&f, &grid, center, radius).unwrap();
            assert!((again - report.value).abs() <= 1e-12 * report.value);
        } else {
            panic!("expected cylinder argmax");
        }
    }

    #[test]
    fn bmo_single_mode_is_sqrt_m_times_bmo_minus1() {
        let n = 16;
        let grid = CylinderGrid::for_grid(n);
        let f = single_mode(n, [1, 1, 0]);
        let a = bmo_norm(&f, &grid).unwrap().value;
        let b = bmo_minus1_norm(&f, &grid).unwrap().value;
        assert!((a - 2.0f64.sqrt() * b).abs() < 1e-10 * a);
    }

    #[test]
    fn bmo_dominates_min_frequency_times_bmo_minus1() {
        let n = 16;
        let grid = CylinderGrid::for_grid(n);
        for seed in 0..3 {
            let f = crate::operators::random_div_free(n, 3, 60 + seed);
            let a = bmo_norm(&f, &grid).unwrap().value;
            let b = bmo_minus1_norm(&f, &grid).unwrap().value;
            // min frequency of a mean-free lattice field is 1
            assert!(a >= b - 1e-10);
        }
    }

    #[test]
    fn bmo_minus2_representative_reconstructs() {
        let f = crate::operators::random_div_free(16, 5, 4);
        let mut sum = SpectralField::zeros(16, 3);
        for i in 0..3 {
            let gi = divergence_representative(&f, i).unwrap();
            // d_i applied componentwise
            let m = gi.cells();
            let mut di = gi.clone();
            for (cell, w) in gi.modes() {
                let factor = Complex64::new(0.0, w.0[i] as f64);
                for c in 0..3 {
                    di.coeffs_mut()[c * m + cell] = gi.coeffs()[c * m + cell] * factor;
                }
            }
            sum.add_scaled(&di, 1.0);
        }
        let diff = sum.sub(&f).max_coeff();
        assert!(diff <= 1e-12 * f.max_coeff());
    }

    #[test]
    fn bmo_minus2_zero_field() {
        let grid = CylinderGrid::for_grid(16);
        let f = SpectralField::zeros(16, 3);
        assert_eq!(bmo_minus2_upper(&f, &grid).unwrap().value, 0.0);
    }

    #[test]
    fn besov_single_mode_value() {
        let n = 16;
        let f = single_mode(n, [1, 0, 0]);
        let r = besov_norm(&f, -1.0, BesovQ::Infinity);
        // |n| = 1 is split between levels -1 and 0; sup picks level -1
        let level_m1 = 2.0f64.powi(-1).powf(-1.0) * psi(2.0);
        let level_0 = psi(1.0);
        assert!((r.value - level_m1.max(level_0)).abs() < 1e-12);
        assert_eq!(r.argmax, Argmax::Level { j: -1 });
    }

    #[test]
    fn besov_homogeneous_and_zero() {
        let n = 16;
        let zero = SpectralField::zeros(n, 1);
        assert_eq!(besov_norm(&zero, 0.5, BesovQ::Two).value, 0.0);
        let f = single_mode(n, [2, 1, 0]);
        let mut g = f.clone();
        g.scale(4.0);
        let a = besov_norm(&f, -0.75, BesovQ::Two).value;
        let b = besov_norm(&g, -0.75, BesovQ::Two).value;
        assert!((b - 4.0 * a).abs() < 1e-12 * b);
    }

    #[test]
    fn bilinear_symbol_examples() {
        let n = 8;
        let g = single_mode(n, [1, 0, 0]);
        let h = single_mode(n, [0, 1, 0]);
        let f = bilinear_symbol_op(&g, &h).unwrap();
        assert!((f.coeff(0, Wavevector([1, 1, 0])) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        let nonzero = f.coeffs().iter().filter(|z| z.norm() > 0.0).count();
        assert_eq!(nonzero, 1);

        let hm = single_mode(n, [-1, 0, 0]);
        let f0 = bilinear_symbol_op(&g, &hm).unwrap();
        assert!((f0.coeff(0, Wavevector([0, 0, 0])) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn bilinear_symbol_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let n = 8;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut g = SpectralField::zeros(n, 1);
        let mut h = SpectralField::zeros(n, 1);
        for f in [&mut g, &mut h] {
            for cell in 0..f.cells() {
                let w = f.wavevector_of(cell);
                if !w.is_zero() && w.max_abs() <= 2 {
                    f.coeffs_mut()[cell] =
                        Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
                }
            }
            f.set_real(false);
        }
        let fast = bilinear_symbol_op(&g, &h).unwrap();
        // dense double loop over every stored mode pair
        let mut slow = SpectralField::zeros(n, 1);
        let band = dealias_band(n);
        for (cj, j) in g.modes() {
            if j.is_zero() {
                continue;
            }
            for (ck, k) in h.modes() {
                if k.is_zero() {
                    continue;
                }
                let s = Wavevector([j.0[0] + k.0[0], j.0[1] + k.0[1], j.0[2] + k.0[2]]);
                if s.max_abs() > band {
                    continue;
                }
                if let Some(cell) = slow.cell_of(s) {
                    let w = 1.0 / (j.norm() + k.norm());
                    let term = g.coeffs()[cj] * h.coeffs()[ck] * w;
                    slow.coeffs_mut()[cell] += term;
                }
            }
        }
        let diff = fast.sub(&slow).max_coeff();
        assert!(diff <= 1e-13 * slow.max_coeff().max(1.0));
    }

    #[test]
    fn bilinear_symbol_rejects_mean() {
        let n = 8;
        let mut g = single_mode(n, [1, 0, 0]);
        g.set_coeff(0, Wavevector([0, 0, 0]), Complex64::new(0.3, 0.0));
        let h = single_mode(n, [0, 1, 0]);
        assert!(matches!(
            bilinear_symbol_op(&g, &h),
            Err(Error::NonZeroMean { .. })
        ));
    }

    #[test]
    fn besov_product_check_validates_exponents() {
        let g = single_mode(16, [1, 0, 0]);
        let h = single_mode(16, [0, 1, 0]);
        assert!(matches!(
            besov_product_check(&g, &h, 0.4, 0.1),
            Err(Error::BadExponents { .. })
        ));
        assert!(matches!(
            besov_product_check(&g, &h, 0.75, 0.3),
            Err(Error::BadExponents { .. })
        ));
        let r = besov_product_check(&g, &h, 0.75, 0.2).unwrap();
        assert!(r.value.is_finite() && r.value > 0.0);
        let zero = SpectralField::zeros(16, 1);
        let rz = besov_product_check(&zero, &h, 0.75, 0.2).unwrap();
        assert_eq!(rz.value, 0.0);
    }

    #[test]
    fn x_norm_sup_part_closed_form() {
        let n = 16;
        let m = 4.0;
        let f = single_mode(n, [2, 0, 0]);
        let grid = CylinderGrid::for_grid(n);
        let traj = heat_extension(&f, &[0.0, 1.0]).unwrap();
        let report = x_norm(&traj, 1.0, &grid).unwrap();
        // spatially constant |W| = e^{-mt}: sup part is (2 e m)^{-1/2},
        // and the Carleson part adds the cylinder average
        let sup_exact = (2.0 * std::f64::consts::E * m).powf(-0.5);
        match report.argmax {
            Argmax::Composite { sup_time, .. } => {
                let t = sup_time.unwrap();
                assert!((t - 1.0 / (2.0 * m)).abs() / (1.0 / (2.0 * m)) < 0.2);
            }
            _ => panic!("expected composite argmax"),
        }
        let sup_part = {
            let times = sup_times(&traj, 1.0, &grid);
            weighted_sup(&traj, &times, 0.5).unwrap().0
        };
        assert!((sup_part - sup_exact).abs() / sup_exact < 0.03);
        assert!(report.value >= sup_part);
    }

    #[test]
    fn y_norm_of_squared_heat_flow() {
        let n = 16;
        let m = 4.0;
        let f = single_mode(n, [2, 0, 0]);
        let times = dyadic_times(1e-4, 1.0, 16);
        let heat = heat_extension(&f, &times).unwrap();
        let squared = heat
            .map_samples(|_, s| {
                let phys = fft::to_physical(s);
                let sq: Vec<Complex64> = phys
                    .iter()
                    .map(|z| Complex64::new(z.norm_sqr(), 0.0))
                    .collect();
                fft::from_physical(n, 1, sq, true)
            })
            .unwrap();
        let grid = CylinderGrid::for_grid(n);
        let report = y_norm(&squared, 1.0, &grid).unwrap();
        let sup_exact = 1.0 / (2.0 * std::f64::consts::E * m);
        // sup part: sup_t t e^{-2mt} = (2 e m)^{-1}; Carleson part of the
        // spatially constant |g| = e^{-2mt} adds
        // sup_r r^{-3} vol(B_r) (1 - e^{-2 m r^2})/(2m)
        let times_used: Vec<f64> = squared
            .times()
            .iter()
            .copied()
            .filter(|&t| t > 0.0 && t <= 1.0)
            .collect();
        let sup_part = weighted_sup(&squared, &times_used, 1.0).unwrap().0;
        assert!(
            (sup_part - sup_exact).abs() / sup_exact < 0.03,
            "sup {sup_part} vs {sup_exact}"
        );
        assert!(report.value > sup_part);
    }

    #[test]
    fn z_norm_validates_exponent() {
        let f = single_mode(16, [1, 0, 0]);
        let traj = heat_extension(&f, &[0.0, 1.0]).unwrap();
        let grid = CylinderGrid::for_grid(16);
        assert!(matches!(
            z_norm(&traj, 1.0, 1.5, &grid),
            Err(Error::BadExponent { .. })
        ));
        let r = z_norm(&traj, 1.0, 0.5, &grid).unwrap();
        assert!(r.value > 0.0);
    }

    #[test]
    fn empty_trajectory_is_rejected() {
        let traj = Trajectory::from_samples(vec![], vec![]).unwrap();
        let grid = CylinderGrid::for_grid(16);
        assert!(matches!(
            x_norm(&traj, 1.0, &grid),
            Err(Error::EmptyTrajectory)
        ));
    }

    #[test]
    fn zero_trajectory_norms_vanish() {
        let zero = SpectralField::zeros(16, 3);
        let traj = heat_extension(&zero, &[0.0, 1.0]).unwrap();
        let grid = CylinderGrid::for_grid(16);
        assert_eq!(x_norm(&traj, 1.0, &grid).unwrap().value, 0.0);
        assert_eq!(y_norm(&traj, 1.0, &grid).unwrap().value, 0.0);
        assert_eq!(xmk_norm(&traj, 1.0, 1, 1, &grid).unwrap().value, 0.0);
    }

    #[test]
    fn xmk_derivatives_match_heat_equation() {
        // for a heat flow, the divided-difference path must agree with the
        // exact multiplier path
        let n = 16;
        let f = crate::operators::random_div_free(n, 3, 17);
        let times = dyadic_times(1e-3, 0.5, 32);
        let heat = heat_extension(&f, &times).unwrap();
        let sampled = heat.map_samples(|_, s| s.clone()).unwrap();
        let exact = derivative_trajectory(&heat, 1, 0).unwrap();
        let approx = derivative_trajectory(&sampled, 1, 0).unwrap();
        let mid = times.len() / 2;
        let t = times[mid];
        let a = exact.eval(t).unwrap();
        let b = approx.eval(t).unwrap();
        let rel = a.sub(&b).max_coeff() / a.max_coeff();
        assert!(rel < 0.05, "divided difference off by {rel}");
    }

    #[test]
    fn norm_triangle_inequality_on_sup_parts() {
        let n = 16;
        let grid = CylinderGrid::for_grid(n);
        let f = crate::operators::random_div_free(n, 4, 31);
        let g = crate::operators::random_div_free(n, 4, 32);
        let sum = f.add(&g);
        let nf = bmo_minus1_norm(&f, &grid).unwrap().value;
        let ng = bmo_minus1_norm(&g, &grid).unwrap().value;
        let ns = bmo_minus1_norm(&sum, &grid).unwrap().value;
        assert!(ns <= nf + ng + 1e-10);
    }

    #[test]
    fn carleson_refinement_is_monotone() {
        let n = 16;
        let coarse = CylinderGrid::with_params(n, 8, 1, 4);
        let fine = CylinderGrid::with_params(n, 4, 0, 4);
        for seed in 0..3 {
            let f = crate::operators::random_div_free(n, 5, 300 + seed);
            let a = bmo_minus1_norm(&f, &coarse).unwrap().value;
            let b = bmo_minus1_norm(&f, &fine).unwrap().value;
            assert!(b >= a - 1e-12, "refinement decreased the sup: {a} -> {b}");
        }
    }

    #[test]
    fn time_node_refinement_converges_on_convex_integrand() {
        let n = 16;
        let f = single_mode(n, [1, 0, 0]);
        let base = CylinderGrid::with_params(n, 8, 0, 4);
        let fine = CylinderGrid::with_params(n, 8, 0, 8);
        let a = bmo_minus1_norm(&f, &base).unwrap().value;
        let b = bmo_minus1_norm(&f, &fine).unwrap().value;
        // midpoint underestimates convex e^{-2mt}; refinement grows toward it
        // (measured: 4 nodes sit 1.4e-3 below the closed form, 8 nodes 3.6e-4)
        assert!(b >= a - 1e-12);
        assert!((b - a).abs() / a < 2e-3);
    }

    #[test]
    fn linf_time_integral_single_mode() {
        // int_0^inf e^{-2mt} dt = 1/(2m), horizon 1 captures nearly all of
        // it for m = 4
        let n = 16;
        let f = single_mode(n, [2, 0, 0]);
        let traj = heat_extension(&f, &[0.0, 1.0]).unwrap();
        let got = linf_sq_time_integral(&traj, 1.0).unwrap();
        let expect = (1.0f64 / 8.0).sqrt();
        assert!((got - expect).abs() / expect < 0.01, "{got} vs {expect}");
    }
}
