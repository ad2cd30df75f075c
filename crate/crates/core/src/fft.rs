//! Three-dimensional FFTs on flat, row-major complex arrays.
//!
//! Conventions: physical samples live on the uniform grid
//! `x_j = 2 pi j / N` (equivalently `[-pi, pi]^3` by periodicity) and
//!
//! `u(x_j) = sum_n u_n exp(i n . x_j)`.
//!
//! `forward` maps physical samples to coefficients (scaled by `1/N^3`),
//! `inverse` maps coefficients to physical samples (unscaled).

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::field::SpectralField;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Cyclic transpose of a cube: out[(z n + x) n + y] = in[(x n + y) n + z].
fn rotate_axes(n: usize, src: &[Complex64], dst: &mut [Complex64]) {
    for x in 0..n {
        for y in 0..n {
            let row = (x * n + y) * n;
            for z in 0..n {
                dst[(z * n + x) * n + y] = src[row + z];
            }
        }
    }
}

fn transform_cube(n: usize, data: &mut [Complex64], forward: bool) {
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if forward {
            p.plan_fft_forward(n)
        } else {
            p.plan_fft_inverse(n)
        }
    });
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut tmp = vec![Complex64::new(0.0, 0.0); data.len()];
    for _ in 0..3 {
        // lines along the fastest axis are contiguous
        fft.process_with_scratch(data, &mut scratch);
        rotate_axes(n, data, &mut tmp);
        data.copy_from_slice(&tmp);
    }
}

/// Physical samples -> Fourier coefficients, in place, one or more
/// `n^3` slabs.
pub fn forward(n: usize, data: &mut [Complex64]) {
    let cells = n * n * n;
    assert_eq!(data.len() % cells, 0);
    let scale = 1.0 / cells as f64;
    for slab in data.chunks_exact_mut(cells) {
        transform_cube(n, slab, true);
        for z in slab.iter_mut() {
            *z *= scale;
        }
    }
}

/// Fourier coefficients -> physical samples, in place, one or more
/// `n^3` slabs.
pub fn inverse(n: usize, data: &mut [Complex64]) {
    let cells = n * n * n;
    assert_eq!(data.len() % cells, 0);
    for slab in data.chunks_exact_mut(cells) {
        transform_cube(n, slab, false);
    }
}

/// Physical samples of every component (flat, component-major).
pub fn to_physical(field: &SpectralField) -> Vec<Complex64> {
    let mut data = field.coeffs().to_vec();
    inverse(field.grid_n(), &mut data);
    data
}

/// Build a spectral field from physical samples.
pub fn from_physical(
    n: usize,
    components: usize,
    mut data: Vec<Complex64>,
    real_space: bool,
) -> SpectralField {
    forward(n, &mut data);
    SpectralField::from_coeffs(n, components, data, real_space)
}
