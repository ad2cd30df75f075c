//! Truncated Fourier representation of periodic vector fields.
//!
//! A field on `[-pi, pi]^3` is stored as complex Fourier coefficients on the
//! integer lattice, one flat slab per component, row-major with the third
//! axis fastest. Storage index `k` along an axis corresponds to the signed
//! mode `k` for `k <= N/2` and `k - N` otherwise, so modes range over
//! `-N/2+1 ..= N/2`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Integer wavevector on the dual lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Wavevector(pub [i64; 3]);

impl Wavevector {
    pub fn norm_sq(&self) -> i64 {
        let [a, b, c] = self.0;
        a * a + b * b + c * c
    }

    pub fn norm(&self) -> f64 {
        (self.norm_sq() as f64).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0, 0, 0]
    }

    /// Largest component magnitude.
    pub fn max_abs(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap()
    }

    pub fn neg(&self) -> Wavevector {
        Wavevector([-self.0[0], -self.0[1], -self.0[2]])
    }
}

/// Signed mode for a storage index along one axis.
#[inline]
pub fn signed_mode(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Storage index of a signed mode along one axis (wrapping).
#[inline]
pub fn storage_index(m: i64, n: usize) -> usize {
    m.rem_euclid(n as i64) as usize
}

/// Vector field (or scalar, or rank-2 tensor) in spectral representation.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid_n: usize,
    components: usize,
    coeffs: Vec<Complex64>,
    real_space: bool,
    label: Option<String>,
}

impl SpectralField {
    /// Zero field with `components` slabs on an `n^3` grid.
    ///
    /// `n` must be even and at least 4. Scalars use 1 component, vectors 3,
    /// rank-k tensors 3^k (row-major).
    pub fn zeros(n: usize, components: usize) -> SpectralField {
        assert!(n >= 4 && n % 2 == 0, "grid size must be even and >= 4");
        assert!(components >= 1);
        SpectralField {
            grid_n: n,
            components,
            coeffs: vec![Complex64::new(0.0, 0.0); components * n * n * n],
            real_space: true,
            label: None,
        }
    }

    pub fn from_coeffs(
        n: usize,
        components: usize,
        coeffs: Vec<Complex64>,
        real_space: bool,
    ) -> SpectralField {
        assert_eq!(coeffs.len(), components * n * n * n);
        let mut f = SpectralField::zeros(n, components);
        f.coeffs = coeffs;
        f.real_space = real_space;
        f
    }

    pub fn grid_n(&self) -> usize {
        self.grid_n
    }

    pub fn components(&self) -> usize {
        self.components
    }

    /// Number of lattice cells per component.
    pub fn cells(&self) -> usize {
        self.grid_n * self.grid_n * self.grid_n
    }

    pub fn is_real(&self) -> bool {
        self.real_space
    }

    pub fn set_real(&mut self, real: bool) {
        self.real_space = real;
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn set_label<S: Into<String>>(&mut self, label: S) {
        self.label = Some(label.into());
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let m = self.cells();
        &self.coeffs[c * m..(c + 1) * m]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let m = self.cells();
        &mut self.coeffs[c * m..(c + 1) * m]
    }

    /// Linear cell index of a wavevector, or None when out of band.
    pub fn cell_of(&self, w: Wavevector) -> Option<usize> {
        let n = self.grid_n as i64;
        let half = n / 2;
        for &m in &w.0 {
            if m < -half + 1 || m > half {
                return None;
            }
        }
        let kx = storage_index(w.0[0], self.grid_n);
        let ky = storage_index(w.0[1], self.grid_n);
        let kz = storage_index(w.0[2], self.grid_n);
        Some((kx * self.grid_n + ky) * self.grid_n + kz)
    }

    /// Wavevector of a linear cell index.
    pub fn wavevector_of(&self, cell: usize) -> Wavevector {
        let n = self.grid_n;
        let kz = cell % n;
        let ky = (cell / n) % n;
        let kx = cell / (n * n);
        Wavevector([signed_mode(kx, n), signed_mode(ky, n), signed_mode(kz, n)])
    }

    pub fn coeff(&self, c: usize, w: Wavevector) -> Complex64 {
        match self.cell_of(w) {
            Some(cell) => self.coeffs[c * self.cells() + cell],
            None => Complex64::new(0.0, 0.0),
        }
    }

    pub fn set_coeff(&mut self, c: usize, w: Wavevector, v: Complex64) {
        let cell = self
            .cell_of(w)
            .expect("wavevector outside representable band");
        let m = self.cells();
        self.coeffs[c * m + cell] = v;
    }

    /// Iterate (cell, wavevector) over one component grid.
    pub fn modes(&self) -> impl Iterator<Item = (usize, Wavevector)> + '_ {
        (0..self.cells()).map(move |cell| (cell, self.wavevector_of(cell)))
    }

    /// Euclidean magnitude of the zero mode across components.
    pub fn mean_magnitude(&self) -> f64 {
        let m = self.cells();
        (0..self.components)
            .map(|c| self.coeffs[c * m].norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn require_mean_zero(&self, tol: f64) -> Result<()> {
        let magnitude = self.mean_magnitude();
        if magnitude > tol {
            return Err(Error::NonZeroMean { magnitude });
        }
        Ok(())
    }

    pub fn zero_mean(&mut self) {
        let m = self.cells();
        for c in 0..self.components {
            self.coeffs[c * m] = Complex64::new(0.0, 0.0);
        }
    }

    /// Max over modes of |n . u_n| (vector fields only).
    pub fn divergence_residual(&self) -> f64 {
        assert_eq!(self.components, 3, "divergence needs a vector field");
        let m = self.cells();
        let mut worst = 0.0f64;
        for (cell, w) in self.modes() {
            let mut dot = Complex64::new(0.0, 0.0);
            for c in 0..3 {
                dot += Complex64::new(w.0[c] as f64, 0.0) * self.coeffs[c * m + cell];
            }
            worst = worst.max(dot.norm());
        }
        worst
    }

    pub fn require_div_free(&self, tol: f64) -> Result<()> {
        let residual = self.divergence_residual();
        if residual > tol {
            return Err(Error::NotDivergenceFree { residual });
        }
        Ok(())
    }

    /// L2 norm over the box: sqrt((2 pi)^3 sum |u_n|^2).
    pub fn l2_norm(&self) -> f64 {
        self.energy().sqrt()
    }

    /// Squared L2 norm, (2 pi)^3 sum |u_n|^2.
    pub fn energy(&self) -> f64 {
        let vol = (2.0 * std::f64::consts::PI).powi(3);
        vol * self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// Squared L2 norm of the gradient, (2 pi)^3 sum |n|^2 |u_n|^2.
    pub fn enstrophy(&self) -> f64 {
        let vol = (2.0 * std::f64::consts::PI).powi(3);
        let m = self.cells();
        let mut total = 0.0;
        for (cell, w) in self.modes() {
            let nsq = w.norm_sq() as f64;
            for c in 0..self.components {
                total += nsq * self.coeffs[c * m + cell].norm_sqr();
            }
        }
        vol * total
    }

    /// Largest coefficient magnitude.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max over modes of |u(-n) - conj(u(n))|.
    pub fn hermitian_residual(&self) -> f64 {
        let m = self.cells();
        let mut worst = 0.0f64;
        for (cell, w) in self.modes() {
            let neg = match self.cell_of(w.neg()) {
                Some(cell) => cell,
                // Nyquist rows are their own negatives modulo N.
                None => self.cell_of(reflect_nyquist(w, self.grid_n)).unwrap(),
            };
            for c in 0..self.components {
                let d = self.coeffs[c * m + neg] - self.coeffs[c * m + cell].conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    /// Project onto the Hermitian-symmetric subspace: pairs (n, -n) are
    /// averaged, self-paired Nyquist modes keep their real part.
    pub fn hermitian_symmetrize(&mut self) {
        let m = self.cells();
        for cell in 0..m {
            let w = self.wavevector_of(cell);
            let neg = match self.cell_of(w.neg()) {
                Some(cell) => cell,
                None => self.cell_of(reflect_nyquist(w, self.grid_n)).unwrap(),
            };
            if neg < cell {
                continue;
            }
            for c in 0..self.components {
                let a = self.coeffs[c * m + cell];
                let b = self.coeffs[c * m + neg];
                if neg == cell {
                    self.coeffs[c * m + cell] = Complex64::new(a.re, 0.0);
                } else {
                    let avg = 0.5 * (a + b.conj());
                    self.coeffs[c * m + cell] = avg;
                    self.coeffs[c * m + neg] = avg.conj();
                }
            }
        }
        self.real_space = true;
    }

    pub fn check_same_mesh(&self, other: &SpectralField) -> Result<()> {
        if self.grid_n != other.grid_n || self.components != other.components {
            return Err(Error::MeshMismatch {
                reason: format!(
                    "{}^3 x{} vs {}^3 x{}",
                    self.grid_n, self.components, other.grid_n, other.components
                ),
            });
        }
        Ok(())
    }

    pub fn scale(&mut self, s: f64) {
        for z in &mut self.coeffs {
            *z *= s;
        }
    }

    /// self += s * other. Panics on mesh mismatch.
    pub fn add_scaled(&mut self, other: &SpectralField, s: f64) {
        self.check_same_mesh(other).expect("mesh mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
        self.real_space = self.real_space && other.real_space;
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.add_scaled(other, -1.0);
        out
    }

    pub fn add(&self, other: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.add_scaled(other, 1.0);
        out
    }
}

/// Wavevector with components outside the band reflected by N (Nyquist
/// self-pairing: -N/2 is stored in the same cell as N/2).
fn reflect_nyquist(w: Wavevector, n: usize) -> Wavevector {
    let half = (n / 2) as i64;
    let mut out = w.0;
    for m in &mut out {
        if *m < -half + 1 {
            *m += n as i64;
        }
    }
    Wavevector(out)
}
