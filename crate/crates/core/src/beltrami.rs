//! Curl eigenfunctions on the integer lattice and the helical (±) spectral
//! decomposition of divergence-free fields.
//!
//! A single Fourier mode `h e^{in.x}` satisfies `curl = i n x`, so the curl
//! eigenproblem diagonalizes per wavevector: the plane orthogonal to `n`
//! carries two circular polarizations `h±(n)` with `i n x h± = ±|n| h±`.
//! Fields supported on one lattice shell `|n|^2 = lambda_sq` and one
//! polarization are Beltrami flows: `curl u = ±lambda u`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{SpectralField, Wavevector};
use crate::operators;

/// Complex 3-vector used for polarization directions.
pub type Cvec3 = [Complex64; 3];

/// Circular polarization sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Helicity {
    Plus,
    Minus,
}

/// True when `lambda_sq` has the form `4^a (8b + 7)` and therefore is not a
/// sum of three squares (Legendre).
pub fn legendre_blocked(lambda_sq: i64) -> bool {
    if lambda_sq < 1 {
        return true;
    }
    let mut m = lambda_sq;
    while m % 4 == 0 {
        m /= 4;
    }
    m % 8 == 7
}

/// All integer wavevectors with `|n|^2 = lambda_sq`, lexicographically
/// ordered.
pub fn lattice_shell(lambda_sq: i64) -> Result<Vec<Wavevector>> {
    if lambda_sq < 1 {
        return Err(Error::EmptyShell { lambda_sq });
    }
    let r = (lambda_sq as f64).sqrt().ceil() as i64;
    let mut shell = Vec::new();
    for n1 in -r..=r {
        let rem1 = lambda_sq - n1 * n1;
        if rem1 < 0 {
            continue;
        }
        for n2 in -r..=r {
            let rem2 = rem1 - n2 * n2;
            if rem2 < 0 {
                continue;
            }
            let n3 = (rem2 as f64).sqrt().round() as i64;
            if n3 * n3 != rem2 {
                continue;
            }
            if n3 == 0 {
                shell.push(Wavevector([n1, n2, 0]));
            } else {
                shell.push(Wavevector([n1, n2, -n3]));
                shell.push(Wavevector([n1, n2, n3]));
            }
        }
    }
    if shell.is_empty() {
        return Err(Error::EmptyShell { lambda_sq });
    }
    shell.sort_by_key(|w| w.0);
    Ok(shell)
}

/// Orthonormal circular polarizations `(h+, h-)` for a nonzero wavevector.
///
/// Tie-break: `e1 = (1,0,0)` on the third axis, otherwise
/// `e1 = (n2, -n1, 0)/|..|`; then `e2 = n_hat x e1` and
/// `h± = (e1 ± i e2)/sqrt(2)`. Both are unit vectors orthogonal to `n` with
/// `i n x h± = ±|n| h±` and `h- = conj(h+)`.
pub fn helical_basis(n: Wavevector) -> Result<(Cvec3, Cvec3)> {
    if n.is_zero() {
        return Err(Error::ZeroWavevector);
    }
    let [n1, n2, n3] = n.0;
    let e1 = if n1 == 0 && n2 == 0 {
        [1.0, 0.0, 0.0]
    } else {
        let len = ((n1 * n1 + n2 * n2) as f64).sqrt();
        [n2 as f64 / len, -n1 as f64 / len, 0.0]
    };
    let nn = n.norm();
    let nh = [n1 as f64 / nn, n2 as f64 / nn, n3 as f64 / nn];
    let e2 = [
        nh[1] * e1[2] - nh[2] * e1[1],
        nh[2] * e1[0] - nh[0] * e1[2],
        nh[0] * e1[1] - nh[1] * e1[0],
    ];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut plus = [Complex64::new(0.0, 0.0); 3];
    let mut minus = [Complex64::new(0.0, 0.0); 3];
    for c in 0..3 {
        plus[c] = Complex64::new(s * e1[c], s * e2[c]);
        minus[c] = plus[c].conj();
    }
    Ok((plus, minus))
}

/// Phase relating the frames at `n` and `-n`: `h+(-n) = sigma(n) conj(h+(n))`
/// with `sigma = +1` on the third axis and `-1` elsewhere.
fn conjugation_phase(n: Wavevector) -> f64 {
    if n.0[0] == 0 && n.0[1] == 0 {
        1.0
    } else {
        -1.0
    }
}

/// One lattice shell together with its polarization frames.
#[derive(Debug, Clone)]
pub struct ShellBasis {
    pub lambda_sq: i64,
    pub wavevectors: Vec<Wavevector>,
    /// `(h+(n), h-(n))` per wavevector, in `wavevectors` order.
    pub helical_pairs: Vec<(Cvec3, Cvec3)>,
}

impl ShellBasis {
    pub fn new(lambda_sq: i64) -> Result<ShellBasis> {
        let wavevectors = lattice_shell(lambda_sq)?;
        let helical_pairs = wavevectors
            .iter()
            .map(|&n| helical_basis(n))
            .collect::<Result<Vec<_>>>()?;
        Ok(ShellBasis {
            lambda_sq,
            wavevectors,
            helical_pairs,
        })
    }

    pub fn len(&self) -> usize {
        self.wavevectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wavevectors.is_empty()
    }

    pub fn lambda(&self) -> f64 {
        (self.lambda_sq as f64).sqrt()
    }
}

/// Beltrami field `sum_n a(n) h±(n) e^{in.x}` on one shell.
///
/// `amplitudes` pairs with `lattice_shell(lambda_sq)` order. The result is
/// real-valued only when the amplitudes respect the Hermitian pairing
/// `a(-n) = sigma(n) conj(a(n))` (see [`paired_amplitudes`]); the eigenrelation
/// `curl u = ±lambda u` holds regardless.
pub fn beltrami_field(
    grid_n: usize,
    lambda_sq: i64,
    amplitudes: &[Complex64],
    helicity: Helicity,
) -> Result<SpectralField> {
    let basis = ShellBasis::new(lambda_sq)?;
    assert_eq!(
        amplitudes.len(),
        basis.len(),
        "one amplitude per shell wavevector"
    );
    let mut f = SpectralField::zeros(grid_n, 3);
    let mut real = true;
    for (i, &n) in basis.wavevectors.iter().enumerate() {
        assert!(
            f.cell_of(n).is_some() && n.max_abs() < (grid_n / 2) as i64,
            "shell mode {:?} does not fit an unambiguous {}^3 grid",
            n,
            grid_n
        );
        let h = match helicity {
            Helicity::Plus => basis.helical_pairs[i].0,
            Helicity::Minus => basis.helical_pairs[i].1,
        };
        for c in 0..3 {
            f.set_coeff(c, n, amplitudes[i] * h[c]);
        }
    }
    if f.hermitian_residual() > 1e-12 * f.max_coeff().max(1e-300) {
        real = false;
    }
    f.set_real(real);
    Ok(f)
}

/// Reproducible complex amplitudes for `shell`, Hermitian-paired so the
/// resulting single-polarization field is real-valued.
pub fn paired_amplitudes(shell: &[Wavevector], seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = move || {
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    let mut amps = vec![Complex64::new(0.0, 0.0); shell.len()];
    for (i, &n) in shell.iter().enumerate() {
        if n.0 < n.neg().0 {
            continue; // filled by the partner below
        }
        let a = Complex64::new(gauss(), gauss());
        amps[i] = a;
        let j = shell
            .binary_search_by_key(&n.neg().0, |w| w.0)
            .expect("shell is closed under negation");
        amps[j] = conjugation_phase(n) * a.conj();
    }
    amps
}

/// Real-valued random Beltrami field on one shell, normalized to unit L2
/// norm. Deterministic in `seed`.
pub fn random_beltrami_field(
    grid_n: usize,
    lambda_sq: i64,
    helicity: Helicity,
    seed: u64,
) -> Result<SpectralField> {
    let shell = lattice_shell(lambda_sq)?;
    let amps = paired_amplitudes(&shell, seed);
    let mut f = beltrami_field(grid_n, lambda_sq, &amps, helicity)?;
    let norm = f.l2_norm();
    if norm > 0.0 {
        f.scale(1.0 / norm);
    }
    f.set_real(true);
    Ok(f)
}

/// Helical amplitudes of a divergence-free mean-zero field: per populated
/// wavevector, `u_n = a+(n) h+(n) + a-(n) h-(n)`.
#[derive(Debug, Clone)]
pub struct HelicalDecomposition {
    grid_n: usize,
    /// `(n, a+, a-)` for every mode carrying energy.
    pub modes: Vec<(Wavevector, Complex64, Complex64)>,
}

impl HelicalDecomposition {
    /// Expand `u` in the polarization frames. The input must be mean-zero and
    /// divergence-free; those are exactly the fields the frames span.
    pub fn analyze(u: &SpectralField) -> Result<HelicalDecomposition> {
        assert_eq!(u.components(), 3, "helical analysis needs a vector field");
        u.require_mean_zero(1e-12)?;
        u.require_div_free(1e-10)?;
        let mut modes = Vec::new();
        for (cell, n) in u.modes() {
            if n.is_zero() {
                continue;
            }
            let un = [u.coeffs()[cell], u.coeff(1, n), u.coeff(2, n)];
            if un.iter().all(|z| z.norm_sqr() == 0.0) {
                continue;
            }
            let (hp, hm) = helical_basis(n)?;
            let mut ap = Complex64::new(0.0, 0.0);
            let mut am = Complex64::new(0.0, 0.0);
            for c in 0..3 {
                ap += hp[c].conj() * un[c];
                am += hm[c].conj() * un[c];
            }
            modes.push((n, ap, am));
        }
        Ok(HelicalDecomposition {
            grid_n: u.grid_n(),
            modes,
        })
    }

    fn assemble<F: Fn(Complex64, Complex64) -> (Complex64, Complex64)>(
        &self,
        pick: F,
    ) -> SpectralField {
        let mut f = SpectralField::zeros(self.grid_n, 3);
        for &(n, ap, am) in &self.modes {
            let (hp, hm) = helical_basis(n).expect("nonzero by construction");
            let (cp, cm) = pick(ap, am);
            for c in 0..3 {
                let v = f.coeff(c, n) + cp * hp[c] + cm * hm[c];
                f.set_coeff(c, n, v);
            }
        }
        f
    }

    /// `sum a±(n) h±(n) e^{in.x}` over both signs.
    pub fn reconstruct(&self) -> SpectralField {
        self.assemble(|ap, am| (ap, am))
    }

    /// The +polarization part.
    pub fn plus_part(&self) -> SpectralField {
        self.assemble(|ap, _| (ap, Complex64::new(0.0, 0.0)))
    }

    /// The -polarization part.
    pub fn minus_part(&self) -> SpectralField {
        self.assemble(|_, am| (Complex64::new(0.0, 0.0), am))
    }
}

/// Split into circular polarizations via the closed formula
/// `u± = (u0 ± (-Laplacian)^{-1/2} curl u0)/2`.
pub fn split_pm(u0: &SpectralField) -> Result<(SpectralField, SpectralField)> {
    u0.require_mean_zero(1e-12)?;
    u0.require_div_free(1e-10)?;
    let rotor = operators::fractional_laplacian(&operators::curl(u0), -1.0)?;
    let mut plus = u0.clone();
    plus.add_scaled(&rotor, 1.0);
    plus.scale(0.5);
    let mut minus = u0.clone();
    minus.add_scaled(&rotor, -1.0);
    minus.scale(0.5);
    plus.set_real(u0.is_real());
    minus.set_real(u0.is_real());
    Ok((plus, minus))
}

/// Route the +polarization part around a spectral band: `u1+` collects
/// +modes with `|n| <= lambda/2` or `|n| >= 2 lambda`, `u2+` the open band
/// `lambda/2 < |n| < 2 lambda`, and `u0-` is the whole -polarization part.
/// Band edges are excluded from `u2+` (1e-9 relative tolerance).
pub fn band_split(
    u0: &SpectralField,
    lambda: f64,
) -> Result<(SpectralField, SpectralField, SpectralField)> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::BadExponent {
            name: "lambda",
            value: lambda,
            range: "(0, inf)",
        });
    }
    let (plus, minus) = split_pm(u0)?;
    let lsq = lambda * lambda;
    let (lo, hi) = (lsq / 4.0, 4.0 * lsq);
    let mut band = SpectralField::zeros(u0.grid_n(), 3);
    let mut rest = SpectralField::zeros(u0.grid_n(), 3);
    let m = band.cells();
    for (cell, n) in plus.modes() {
        let nsq = n.norm_sq() as f64;
        let in_band = nsq > lo * (1.0 + 1e-9) && nsq < hi * (1.0 - 1e-9);
        let dst = if in_band { &mut band } else { &mut rest };
        for c in 0..3 {
            dst.coeffs_mut()[c * m + cell] = plus.coeffs()[c * m + cell];
        }
    }
    band.set_real(u0.is_real());
    rest.set_real(u0.is_real());
    Ok((rest, band, minus))
}

/// One admissibility condition with both sides evaluated.
#[derive(Debug, Clone)]
pub struct AdmissibilityRow {
    pub condition: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Multi-shell Beltrami data `u0 = sum_i phi_i + u02` with an admissibility
/// report for the shell-radius conditions.
///
/// Each `phi_i` is a +polarization random Beltrami field on shell
/// `lambda_sqs[i]`, normalized then scaled by `amplitudes[i]`. The report
/// evaluates the radius ordering `1 <= lambda_1 < ... < lambda_N` and the
/// spread bound `lambda_N - lambda_1 <= epsilon lambda_1^(1-b)`.
pub fn corollary18_data(
    grid_n: usize,
    lambda_sqs: &[i64],
    amplitudes: &[f64],
    b: f64,
    epsilon: f64,
    u02: Option<&SpectralField>,
    seed: u64,
) -> Result<(SpectralField, Vec<AdmissibilityRow>)> {
    assert_eq!(lambda_sqs.len(), amplitudes.len());
    if lambda_sqs.is_empty() {
        return Err(Error::BadConfig {
            reason: "need at least one shell".into(),
        });
    }
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::BadExponent {
            name: "b",
            value: b,
            range: "(0, 1)",
        });
    }
    if !(epsilon > 0.0) {
        return Err(Error::BadExponent {
            name: "epsilon",
            value: epsilon,
            range: "(0, inf)",
        });
    }
    let lambdas: Vec<f64> = lambda_sqs.iter().map(|&l| (l as f64).sqrt()).collect();
    for w in lambdas.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::UnorderedRadii { lo: w[0], hi: w[1] });
        }
    }
    let mut u0 = SpectralField::zeros(grid_n, 3);
    for (i, &lsq) in lambda_sqs.iter().enumerate() {
        let phi = random_beltrami_field(grid_n, lsq, Helicity::Plus, seed.wrapping_add(i as u64))?;
        u0.add_scaled(&phi, amplitudes[i]);
    }
    if let Some(p) = u02 {
        u0.check_same_mesh(p)?;
        p.require_mean_zero(1e-12)?;
        p.require_div_free(1e-10)?;
        u0.add_scaled(p, 1.0);
    }
    let first = lambdas[0];
    let last = *lambdas.last().unwrap();
    let ordered = first >= 1.0 && lambdas.windows(2).all(|w| w[0] < w[1]);
    let spread = last - first;
    let spread_bound = epsilon * first.powf(1.0 - b);
    let rows = vec![
        AdmissibilityRow {
            condition: "1 <= lambda_1 < ... < lambda_N".into(),
            lhs: 1.0,
            rhs: first,
            holds: ordered,
        },
        AdmissibilityRow {
            condition: "lambda_N - lambda_1 <= epsilon * lambda_1^(1-b)".into(),
            lhs: spread,
            rhs: spread_bound,
            holds: spread <= spread_bound,
        },
    ];
    Ok((u0, rows))
}
