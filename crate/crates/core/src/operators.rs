//! Exact spectral calculus and dealiased physical-space products.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fft;
use crate::field::{SpectralField, Wavevector};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Divergence tolerance used by preconditions, scaled to the field size.
fn div_tol(f: &SpectralField) -> f64 {
    1e-10 * (1.0 + f.max_coeff() * f.grid_n() as f64)
}

/// Project onto divergence-free fields: u_n -> u_n - n (n.u_n)/|n|^2.
/// The zero mode passes through unchanged.
pub fn leray_project(f: &SpectralField) -> SpectralField {
    assert_eq!(f.components(), 3);
    let mut out = f.clone();
    let m = f.cells();
    for (cell, w) in f.modes() {
        let nsq = w.norm_sq();
        if nsq == 0 {
            continue;
        }
        let mut dot = Complex64::new(0.0, 0.0);
        for c in 0..3 {
            dot += Complex64::new(w.0[c] as f64, 0.0) * f.coeffs()[c * m + cell];
        }
        let scale = dot / nsq as f64;
        for c in 0..3 {
            out.coeffs_mut()[c * m + cell] -= scale * w.0[c] as f64;
        }
    }
    out
}

/// Coefficient-wise curl: u_n -> i n x u_n.
pub fn curl(f: &SpectralField) -> SpectralField {
    assert_eq!(f.components(), 3);
    let mut out = SpectralField::zeros(f.grid_n(), 3);
    out.set_real(f.is_real());
    let m = f.cells();
    for (cell, w) in f.modes() {
        let n = [w.0[0] as f64, w.0[1] as f64, w.0[2] as f64];
        let u = [
            f.coeffs()[cell],
            f.coeffs()[m + cell],
            f.coeffs()[2 * m + cell],
        ];
        out.coeffs_mut()[cell] = I * (n[1] * u[2] - n[2] * u[1]);
        out.coeffs_mut()[m + cell] = I * (n[2] * u[0] - n[0] * u[2]);
        out.coeffs_mut()[2 * m + cell] = I * (n[0] * u[1] - n[1] * u[0]);
    }
    out
}

/// Inverse of curl on divergence-free mean-zero fields:
/// u_n -> i n x u_n / |n|^2.
pub fn inverse_curl(f: &SpectralField) -> Result<SpectralField> {
    assert_eq!(f.components(), 3);
    f.require_mean_zero(1e-13 * (1.0 + f.max_coeff()))?;
    f.require_div_free(div_tol(f))?;
    let mut out = curl(f);
    let m = f.cells();
    for (cell, w) in f.modes() {
        let nsq = w.norm_sq();
        if nsq == 0 {
            continue;
        }
        for c in 0..3 {
            out.coeffs_mut()[c * m + cell] /= nsq as f64;
        }
    }
    Ok(out)
}

/// Scalar gradient: 1 component in, 3 out.
pub fn gradient(f: &SpectralField) -> SpectralField {
    assert_eq!(f.components(), 1);
    let mut out = SpectralField::zeros(f.grid_n(), 3);
    out.set_real(f.is_real());
    let m = f.cells();
    for (cell, w) in f.modes() {
        for c in 0..3 {
            out.coeffs_mut()[c * m + cell] = I * w.0[c] as f64 * f.coeffs()[cell];
        }
    }
    out
}

/// Vector divergence: 3 components in, 1 out.
pub fn divergence(f: &SpectralField) -> SpectralField {
    assert_eq!(f.components(), 3);
    let mut out = SpectralField::zeros(f.grid_n(), 1);
    out.set_real(f.is_real());
    let m = f.cells();
    for (cell, w) in f.modes() {
        let mut dot = Complex64::new(0.0, 0.0);
        for c in 0..3 {
            dot += Complex64::new(w.0[c] as f64, 0.0) * f.coeffs()[c * m + cell];
        }
        out.coeffs_mut()[cell] = I * dot;
    }
    out
}

/// Full gradient of a vector field: component 3i+j holds d_i u_j.
pub fn gradient_tensor(f: &SpectralField) -> SpectralField {
    assert_eq!(f.components(), 3);
    let mut out = SpectralField::zeros(f.grid_n(), 9);
    out.set_real(f.is_real());
    let m = f.cells();
    for (cell, w) in f.modes() {
        for i in 0..3 {
            for j in 0..3 {
                out.coeffs_mut()[(3 * i + j) * m + cell] =
                    I * w.0[i] as f64 * f.coeffs()[j * m + cell];
            }
        }
    }
    out
}

/// Derivative stack for any component count: output component
/// 3c + i holds d_i f_c, so k applications represent the full rank-k
/// derivative tensor.
pub fn gradient_stack(f: &SpectralField) -> SpectralField {
    let fc = f.components();
    let mut out = SpectralField::zeros(f.grid_n(), 3 * fc);
    out.set_real(f.is_real());
    let m = f.cells();
    for (cell, w) in f.modes() {
        for c in 0..fc {
            for i in 0..3 {
                out.coeffs_mut()[(3 * c + i) * m + cell] =
                    I * w.0[i] as f64 * f.coeffs()[c * m + cell];
            }
        }
    }
    out
}

/// Row divergence of a rank-2 tensor: (div W)_j = sum_i d_i W_ij.
pub fn tensor_divergence(f: &SpectralField) -> SpectralField {
    assert_eq!(f.components(), 9);
    let mut out = SpectralField::zeros(f.grid_n(), 3);
    out.set_real(f.is_real());
    let m = f.cells();
    for (cell, w) in f.modes() {
        for j in 0..3 {
            let mut dot = Complex64::new(0.0, 0.0);
            for i in 0..3 {
                dot += Complex64::new(w.0[i] as f64, 0.0) * f.coeffs()[(3 * i + j) * m + cell];
            }
            out.coeffs_mut()[j * m + cell] = I * dot;
        }
    }
    out
}

/// Laplacian: multiplier -|n|^2 on every component.
pub fn laplacian(f: &SpectralField) -> SpectralField {
    let mut out = f.clone();
    let m = f.cells();
    for (cell, w) in f.modes() {
        let factor = -(w.norm_sq() as f64);
        for c in 0..f.components() {
            out.coeffs_mut()[c * m + cell] *= factor;
        }
    }
    out
}

/// Heat propagator: u_n -> exp(-|n|^2 t) u_n.
pub fn heat_semigroup(f: &SpectralField, t: f64) -> Result<SpectralField> {
    if t < 0.0 {
        return Err(Error::NegativeTime { t });
    }
    let mut out = f.clone();
    let m = f.cells();
    for (cell, w) in f.modes() {
        let factor = (-(w.norm_sq() as f64) * t).exp();
        for c in 0..f.components() {
            out.coeffs_mut()[c * m + cell] *= factor;
        }
    }
    Ok(out)
}

/// Fractional power of -Laplacian: u_n -> |n|^s u_n for n != 0.
///
/// For s >= 0 the zero mode passes through; for s < 0 the field must be
/// mean-zero and the zero mode maps to 0.
pub fn fractional_laplacian(f: &SpectralField, s: f64) -> Result<SpectralField> {
    if s < 0.0 {
        f.require_mean_zero(1e-13 * (1.0 + f.max_coeff()))?;
    }
    let mut out = f.clone();
    let m = f.cells();
    for (cell, w) in f.modes() {
        let nsq = w.norm_sq();
        if nsq == 0 {
            if s < 0.0 {
                for c in 0..f.components() {
                    out.coeffs_mut()[c * m + cell] = Complex64::new(0.0, 0.0);
                }
            }
            continue;
        }
        let factor = (nsq as f64).powf(s / 2.0);
        for c in 0..f.components() {
            out.coeffs_mut()[c * m + cell] *= factor;
        }
    }
    Ok(out)
}

/// Largest kept mode under the 2/3 rule.
pub fn dealias_band(n: usize) -> i64 {
    (n / 3) as i64
}

/// Zero all modes with any |n_i| > N/3.
pub fn dealias(f: &SpectralField) -> SpectralField {
    let mut out = f.clone();
    dealias_in_place(&mut out);
    out
}

pub fn dealias_in_place(f: &mut SpectralField) {
    let band = dealias_band(f.grid_n());
    let m = f.cells();
    for cell in 0..m {
        let w = f.wavevector_of(cell);
        if w.max_abs() > band {
            for c in 0..f.components() {
                f.coeffs_mut()[c * m + cell] = Complex64::new(0.0, 0.0);
            }
        }
    }
}

/// Physical max over grid points of the Euclidean component magnitude.
pub fn sup_norm(f: &SpectralField) -> f64 {
    let phys = fft::to_physical(f);
    let cells = f.cells();
    let mut worst = 0.0f64;
    for cell in 0..cells {
        let mut sq = 0.0;
        for c in 0..f.components() {
            sq += phys[c * cells + cell].norm_sqr();
        }
        worst = worst.max(sq);
    }
    worst.sqrt()
}

/// Dealiased pointwise product of two fields, combined by `combine`
/// which maps (a_components, b_components) at one grid point to
/// `out_components` values.
fn dealiased_product<F>(
    a: &SpectralField,
    b: &SpectralField,
    out_components: usize,
    combine: F,
) -> SpectralField
where
    F: Fn(&[Complex64], &[Complex64], &mut [Complex64]),
{
    assert_eq!(a.grid_n(), b.grid_n());
    let n = a.grid_n();
    let cells = a.cells();
    let ap = fft::to_physical(&dealias(a));
    let bp = fft::to_physical(&dealias(b));
    let mut prod = vec![Complex64::new(0.0, 0.0); out_components * cells];
    let mut av = vec![Complex64::new(0.0, 0.0); a.components()];
    let mut bv = vec![Complex64::new(0.0, 0.0); b.components()];
    let mut ov = vec![Complex64::new(0.0, 0.0); out_components];
    for cell in 0..cells {
        for c in 0..a.components() {
            av[c] = ap[c * cells + cell];
        }
        for c in 0..b.components() {
            bv[c] = bp[c * cells + cell];
        }
        combine(&av, &bv, &mut ov);
        for c in 0..out_components {
            prod[c * cells + cell] = ov[c];
        }
    }
    let mut out = fft::from_physical(n, out_components, prod, a.is_real() && b.is_real());
    dealias_in_place(&mut out);
    out
}

/// Dealiased cross product a x b.
pub fn cross_product(a: &SpectralField, b: &SpectralField) -> SpectralField {
    dealiased_product(a, b, 3, |u, v, out| {
        out[0] = u[1] * v[2] - u[2] * v[1];
        out[1] = u[2] * v[0] - u[0] * v[2];
        out[2] = u[0] * v[1] - u[1] * v[0];
    })
}

/// Dealiased scalar product a . b (3 components in, 1 out).
pub fn dot_product(a: &SpectralField, b: &SpectralField) -> SpectralField {
    dealiased_product(a, b, 1, |u, v, out| {
        out[0] = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    })
}

/// Dealiased outer product: component 3i+j holds a_i b_j.
pub fn outer_product(a: &SpectralField, b: &SpectralField) -> SpectralField {
    dealiased_product(a, b, 9, |u, v, out| {
        for i in 0..3 {
            for j in 0..3 {
                out[3 * i + j] = u[i] * v[j];
            }
        }
    })
}

/// Dealiased advection (b . grad) h.
pub fn advect(b: &SpectralField, h: &SpectralField) -> SpectralField {
    let grad_h = gradient_tensor(h);
    dealiased_product(b, &grad_h, 3, |bv, gv, out| {
        for i in 0..3 {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..3 {
                acc += bv[j] * gv[3 * j + i];
            }
            out[i] = acc;
        }
    })
}

/// Sup-norm residual of the rotation-form product rule
///
/// `b.grad h + h.grad b = -b x curl h - h x curl b + grad(b . h)`
///
/// with every product dealiased. Inputs must be divergence-free.
pub fn rotation_form_identity(b: &SpectralField, h: &SpectralField) -> Result<f64> {
    b.require_div_free(div_tol(b))?;
    h.require_div_free(div_tol(h))?;
    let bd = dealias(b);
    let hd = dealias(h);
    let lhs = advect(&bd, &hd).add(&advect(&hd, &bd));
    let cross = {
        let mut c = cross_product(&bd, &curl(&hd));
        c.add_scaled(&cross_product(&hd, &curl(&bd)), 1.0);
        c.scale(-1.0);
        c
    };
    let rhs = cross.add(&gradient(&dot_product(&bd, &hd)));
    Ok(sup_norm(&lhs.sub(&rhs)))
}

/// Random divergence-free mean-zero real field with modes |n_i| <= max_mode.
pub fn random_div_free(n: usize, max_mode: i64, seed: u64) -> SpectralField {
    leray_project(&random_cube_field(n, 3, max_mode, seed))
}

/// Random mean-zero real tensor field (9 components) supported on the same
/// mode cube as [`random_div_free`].
pub fn random_tensor(n: usize, max_mode: i64, seed: u64) -> SpectralField {
    random_cube_field(n, 9, max_mode, seed)
}

/// Random mean-zero real scalar field on the mode cube.
pub fn random_scalar(n: usize, max_mode: i64, seed: u64) -> SpectralField {
    random_cube_field(n, 1, max_mode, seed)
}

/// Draws in lexicographic wavevector order so a seed names the same field
/// on every grid that resolves the cube.
fn random_cube_field(n: usize, components: usize, max_mode: i64, seed: u64) -> SpectralField {
    assert!(
        max_mode < (n / 2) as i64,
        "mode cube must stay inside the resolved band"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::zeros(n, components);
    let m = f.cells();
    for w1 in -max_mode..=max_mode {
        for w2 in -max_mode..=max_mode {
            for w3 in -max_mode..=max_mode {
                let w = Wavevector([w1, w2, w3]);
                if w.is_zero() {
                    continue;
                }
                let cell = f.cell_of(w).unwrap();
                for c in 0..components {
                    let re = rng.gen::<f64>() - 0.5;
                    let im = rng.gen::<f64>() - 0.5;
                    f.coeffs_mut()[c * m + cell] = Complex64::new(re, im);
                }
            }
        }
    }
    f.hermitian_symmetrize();
    f.zero_mean();
    f
}
