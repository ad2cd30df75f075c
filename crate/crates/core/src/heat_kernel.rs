//! Symbolic derivatives of the Gaussian kernel
//! `K(x, t) = t^{-3/2} exp(-|x|^2 / 4t)` on R^3.
//!
//! Every derivative is K times a polynomial in `(x1, x2, x3, 1/t)`;
//! the module differentiates that polynomial exactly and confirms the
//! scaling factorization `t^{-(m + k/2)} K(x,t) J(x / sqrt(t))` with
//! `deg J <= k + 2m`.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Monomial key: powers of x1, x2, x3 and of 1/t.
type Key = (u32, u32, u32, u32);

/// Polynomial in (x1, x2, x3, 1/t) with f64 coefficients.
#[derive(Debug, Clone, Default)]
struct Poly {
    terms: HashMap<Key, f64>,
}

impl Poly {
    fn one() -> Poly {
        let mut p = Poly::default();
        p.terms.insert((0, 0, 0, 0), 1.0);
        p
    }

    fn add_term(&mut self, key: Key, coeff: f64) {
        let entry = self.terms.entry(key).or_insert(0.0);
        *entry += coeff;
        if *entry == 0.0 {
            self.terms.remove(&key);
        }
    }

    /// d/dx1 of (K * self) divided by K: d1 R - x1/(2t) R.
    fn derive_x1(&self) -> Poly {
        let mut out = Poly::default();
        for (&(a1, a2, a3, b), &c) in &self.terms {
            if a1 > 0 {
                out.add_term((a1 - 1, a2, a3, b), c * a1 as f64);
            }
            out.add_term((a1 + 1, a2, a3, b + 1), -0.5 * c);
        }
        out
    }

    /// d/dt of (K * self) divided by K:
    /// d_t R + (-3/(2t) + |x|^2/(4t^2)) R.
    fn derive_t(&self) -> Poly {
        let mut out = Poly::default();
        for (&(a1, a2, a3, b), &c) in &self.terms {
            // d_t of t^{-b} factor
            if b > 0 {
                out.add_term((a1, a2, a3, b + 1), -(b as f64) * c);
            }
            out.add_term((a1, a2, a3, b + 1), -1.5 * c);
            out.add_term((a1 + 2, a2, a3, b + 2), 0.25 * c);
            out.add_term((a1, a2 + 2, a3, b + 2), 0.25 * c);
            out.add_term((a1, a2, a3 + 2, b + 2), 0.25 * c);
        }
        out
    }

    fn eval(&self, x: [f64; 3], t: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(a1, a2, a3, b), &c)| {
                c * x[0].powi(a1 as i32)
                    * x[1].powi(a2 as i32)
                    * x[2].powi(a3 as i32)
                    * t.powi(-(b as i32))
            })
            .sum()
    }
}

/// The kernel itself.
pub fn gaussian_kernel(x: [f64; 3], t: f64) -> f64 {
    let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    t.powf(-1.5) * (-r2 / (4.0 * t)).exp()
}

/// Value of `d_t^m d_{x1}^k K` together with the relative discrepancy
/// between the direct polynomial evaluation and the rescaled
/// factorization through `J(x / sqrt(t))`.
#[derive(Debug, Clone, Copy)]
pub struct KernelDerivative {
    pub value: f64,
    pub factorized: f64,
    pub discrepancy: f64,
    pub poly_degree: u32,
}

/// Evaluate `d_t^m d_{x1}^k` of the kernel at (x, t), t > 0, m + k <= 4.
pub fn heat_kernel_eval(x: [f64; 3], t: f64, m: usize, k: usize) -> Result<KernelDerivative> {
    if t <= 0.0 {
        return Err(Error::NonPositiveTime { t });
    }
    assert!(m + k <= 4, "desk scale is m + k <= 4");
    let mut poly = Poly::one();
    for _ in 0..k {
        poly = poly.derive_x1();
    }
    for _ in 0..m {
        poly = poly.derive_t();
    }
    let kernel = gaussian_kernel(x, t);
    let value = kernel * poly.eval(x, t);

    // Factorization: each monomial x^alpha t^{-beta} must satisfy
    // beta = |alpha|/2 + m + k/2, giving a polynomial J of degree
    // <= k + 2m in y = x / sqrt(t).
    let mut degree = 0u32;
    let mut j_val = 0.0;
    let sqrt_t = t.sqrt();
    let y = [x[0] / sqrt_t, x[1] / sqrt_t, x[2] / sqrt_t];
    for (&(a1, a2, a3, b), &c) in &poly.terms {
        let alpha = a1 + a2 + a3;
        // 2 beta = |alpha| + 2m + k must hold exactly
        assert_eq!(2 * b, alpha + 2 * m as u32 + k as u32);
        assert!(alpha <= (k + 2 * m) as u32);
        degree = degree.max(alpha);
        j_val += c * y[0].powi(a1 as i32) * y[1].powi(a2 as i32) * y[2].powi(a3 as i32);
    }
    let factorized = t.powf(-(m as f64 + k as f64 / 2.0)) * kernel * j_val;
    let scale = value.abs().max(factorized.abs());
    let discrepancy = if scale == 0.0 {
        0.0
    } else {
        (value - factorized).abs() / scale
    };
    Ok(KernelDerivative {
        value,
        factorized,
        discrepancy,
        poly_degree: degree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeroth_derivative_is_kernel() {
        let x = [0.3, -0.2, 0.9];
        let t = 0.7;
        let d = heat_kernel_eval(x, t, 0, 0).unwrap();
        assert_eq!(d.value, gaussian_kernel(x, t));
        assert!(d.discrepancy < 1e-15);
        assert_eq!(d.poly_degree, 0);
    }

    #[test]
    fn time_derivative_at_origin() {
        let t = 0.5;
        let d = heat_kernel_eval([0.0; 3], t, 1, 0).unwrap();
        let expect = -1.5 * t.powf(-2.5);
        assert!((d.value - expect).abs() < 1e-12 * expect.abs());
    }

    #[test]
    fn rejects_non_positive_time() {
        assert!(matches!(
            heat_kernel_eval([0.0; 3], 0.0, 0, 0),
            Err(Error::NonPositiveTime { .. })
        ));
        assert!(matches!(
            heat_kernel_eval([0.0; 3], -1.0, 1, 1),
            Err(Error::NonPositiveTime { .. })
        ));
    }

    #[test]
    fn factorization_always_agrees() {
        let points = [
            ([0.1, 0.2, -0.3], 0.4),
            ([1.5, -0.7, 0.2], 1.3),
            ([0.0, 0.0, 0.0], 0.05),
            ([-2.0, 1.0, 0.5], 2.5),
        ];
        for (x, t) in points {
            for m in 0..=2usize {
                for k in 0..=2usize {
                    let d = heat_kernel_eval(x, t, m, k).unwrap();
                    assert!(
                        d.discrepancy < 1e-12,
                        "m={m} k={k}: discrepancy {}",
                        d.discrepancy
                    );
                    assert!(d.poly_degree <= (k + 2 * m) as u32);
                }
            }
        }
    }

    #[test]
    fn spatial_derivatives_match_finite_differences() {
        let x = [0.37, -0.81, 0.55];
        let t = 0.63;
        // h^2 truncation and eps/h^2 roundoff balance near h = eps^(1/4)
        let h = 1e-4;
        // second x1 derivative, central stencil
        let f = |x1: f64| gaussian_kernel([x1, x[1], x[2]], t);
        let fd = (f(x[0] + h) - 2.0 * f(x[0]) + f(x[0] - h)) / (h * h);
        let d = heat_kernel_eval(x, t, 0, 2).unwrap();
        assert!(
            (d.value - fd).abs() / fd.abs() < 1e-6,
            "symbolic {} vs fd {fd}",
            d.value
        );
    }

    #[test]
    fn time_derivative_matches_finite_differences() {
        let x = [0.2, 0.4, -0.1];
        let t = 0.9;
        let h = 1e-6;
        let fd = (gaussian_kernel(x, t + h) - gaussian_kernel(x, t - h)) / (2.0 * h);
        let d = heat_kernel_eval(x, t, 1, 0).unwrap();
        assert!((d.value - fd).abs() / fd.abs() < 1e-6);
    }

    #[test]
    fn mixed_derivative_matches_finite_differences() {
        let x = [0.6, -0.3, 0.2];
        let t = 0.8;
        let h = 1e-4;
        let g = |x1: f64, tt: f64| gaussian_kernel([x1, x[1], x[2]], tt);
        let fd = ((g(x[0] + h, t + h) - g(x[0] - h, t + h))
            - (g(x[0] + h, t - h) - g(x[0] - h, t - h)))
            / (4.0 * h * h);
        let d = heat_kernel_eval(x, t, 1, 1).unwrap();
        assert!(
            (d.value - fd).abs() / fd.abs() < 1e-5,
            "symbolic {} vs fd {fd}",
            d.value
        );
    }
}
