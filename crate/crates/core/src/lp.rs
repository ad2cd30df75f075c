//! Dyadic frequency decomposition.
//!
//! The radial cutoff `phi` is a smoothstep built from the classical
//! `exp(-1/s)` bump: `phi = 1` on `[0, 1/2]`, `0` on `[2, inf)`, smooth and
//! monotone in between. The annulus profile `psi(s) = phi(s/2) - phi(s)`
//! is supported in `(1/2, 4)` and the shifted profiles telescope to an
//! exact partition of unity on every nonzero resolvable frequency.

use crate::field::SpectralField;

fn bump(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

/// C-infinity transition from 0 at u<=0 to 1 at u>=1.
pub fn smoothstep(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let a = bump(u);
        a / (a + bump(1.0 - u))
    }
}

/// Radial low-pass cutoff: 1 on [0, 1/2], 0 on [2, inf).
pub fn phi(s: f64) -> f64 {
    1.0 - smoothstep((s - 0.5) / 1.5)
}

/// Annulus profile phi(s/2) - phi(s), supported in (1/2, 4).
pub fn psi(s: f64) -> f64 {
    phi(0.5 * s) - phi(s)
}

/// Dyadic levels covering a grid's resolvable frequencies.
#[derive(Debug, Clone, Copy)]
pub struct LPFilter {
    pub j_min: i32,
    pub j_max: i32,
}

impl LPFilter {
    /// Levels such that the telescoping sum equals 1 for every mode with
    /// 1 <= |n| <= sqrt(3) N/2.
    pub fn for_grid(n: usize) -> LPFilter {
        let r_max = 3.0f64.sqrt() * n as f64 / 2.0;
        LPFilter {
            j_min: -1,
            j_max: r_max.log2().ceil() as i32,
        }
    }

    pub fn levels(&self) -> impl Iterator<Item = i32> {
        self.j_min..=self.j_max
    }

    pub fn describe(&self) -> String {
        format!("lp[levels {}..={}]", self.j_min, self.j_max)
    }
}

/// Frequency block at level j: u_n -> psi(2^{-j} |n|) u_n.
pub fn lp_block(f: &SpectralField, j: i32) -> SpectralField {
    let mut out = f.clone();
    let m = f.cells();
    let scale = 2.0f64.powi(-j);
    for (cell, w) in f.modes() {
        let weight = psi(scale * w.norm());
        for c in 0..f.components() {
            out.coeffs_mut()[c * m + cell] *= weight;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Wavevector;
    use num_complex::Complex64;

    #[test]
    fn profile_range_and_support() {
        for i in 0..400 {
            let s = i as f64 * 0.02;
            let v = psi(s);
            assert!((0.0..=1.0).contains(&v));
            if s <= 0.5 || s >= 4.0 {
                assert_eq!(v, 0.0, "psi({s}) = {v}");
            }
        }
        assert!(psi(1.0) > 0.18 && psi(1.0) < 0.19);
        assert!((phi(1.0) - 1.0 / (1.0 + (-1.5f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn partition_of_unity_on_resolvable_modes() {
        let n = 16;
        let filter = LPFilter::for_grid(n);
        let f = SpectralField::zeros(n, 1);
        for (_, w) in f.modes() {
            if w.is_zero() {
                continue;
            }
            let total: f64 = filter
                .levels()
                .map(|j| psi(2.0f64.powi(-j) * w.norm()))
                .sum();
            assert!(
                (total - 1.0).abs() <= 1e-12,
                "partition fails at |n| = {}: {total}",
                w.norm()
            );
        }
    }

    #[test]
    fn blocks_resum_to_mean_free_field() {
        let f = crate::operators::random_div_free(16, 5, 77);
        let filter = LPFilter::for_grid(16);
        let mut sum = SpectralField::zeros(16, 3);
        for j in filter.levels() {
            sum.add_scaled(&lp_block(&f, j), 1.0);
        }
        let diff = sum.sub(&f).max_coeff();
        assert!(diff <= 1e-12 * f.max_coeff().max(1.0));
    }

    #[test]
    fn single_mode_block_weight() {
        let mut f = SpectralField::zeros(16, 1);
        f.set_coeff(0, Wavevector([0, 2, 0]), Complex64::new(1.0, 0.0));
        let block = lp_block(&f, 1);
        let got = block.coeff(0, Wavevector([0, 2, 0])).re;
        assert!((got - psi(1.0)).abs() < 1e-15);
    }

    #[test]
    fn blocks_three_levels_apart_are_disjoint() {
        let n = 16;
        let f = SpectralField::zeros(n, 1);
        let filter = LPFilter::for_grid(n);
        for (_, w) in f.modes() {
            if w.is_zero() {
                continue;
            }
            for j in filter.levels() {
                let a = psi(2.0f64.powi(-j) * w.norm());
                let b = psi(2.0f64.powi(-j - 3) * w.norm());
                assert!(a == 0.0 || b == 0.0);
            }
        }
    }
}
