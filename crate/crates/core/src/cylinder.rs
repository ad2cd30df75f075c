//! Discrete parabolic cylinders Q(y0, r) = B(y0, r) x (0, r^2] on the
//! periodic box.
//!
//! Space integrals are Riemann sums over grid points inside the periodic
//! ball; time integrals are composite midpoint rules on a dyadic
//! subdivision of (0, r^2] whose finest level reaches the resolvable
//! scale.

use std::f64::consts::PI;

/// Sampling pattern for cylinder-based norms on an N^3 grid.
#[derive(Debug, Clone)]
pub struct CylinderGrid {
    n: usize,
    stride: usize,
    radii: Vec<f64>,
    nodes_per_level: usize,
    t_floor: f64,
}

impl CylinderGrid {
    /// Default pattern: centers on an 8^3 subgrid, dyadic radii from the
    /// grid spacing up to the half-period, 4 time nodes per level.
    pub fn for_grid(n: usize) -> CylinderGrid {
        CylinderGrid::with_params(n, (n / 8).max(1), 0, 4)
    }

    /// `coarsen_radii` drops that many of the smallest dyadic radii;
    /// useful for refinement monotonicity tests.
    pub fn with_params(
        n: usize,
        stride: usize,
        coarsen_radii: usize,
        nodes_per_level: usize,
    ) -> CylinderGrid {
        assert!(stride >= 1 && nodes_per_level >= 1);
        let r_min = 2.0 * PI / n as f64;
        let mut radii = Vec::new();
        let mut r = r_min * 2.0f64.powi(coarsen_radii as i32);
        while r <= PI * (1.0 + 1e-12) {
            radii.push(r.min(PI));
            r *= 2.0;
        }
        if radii.last().map_or(true, |&r| r < PI - 1e-9) {
            radii.push(PI);
        }
        CylinderGrid {
            n,
            stride,
            radii,
            nodes_per_level,
            t_floor: r_min * r_min,
        }
    }

    pub fn grid_n(&self) -> usize {
        self.n
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn nodes_per_level(&self) -> usize {
        self.nodes_per_level
    }

    /// Finest resolved time scale (grid spacing squared).
    pub fn t_floor(&self) -> f64 {
        self.t_floor
    }

    /// Grid spacing.
    pub fn h(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Cylinder centers as grid-index triples.
    pub fn centers(&self) -> Vec<[usize; 3]> {
        let picks: Vec<usize> = (0..self.n).step_by(self.stride).collect();
        let mut out = Vec::with_capacity(picks.len().pow(3));
        for &x in &picks {
            for &y in &picks {
                for &z in &picks {
                    out.push([x, y, z]);
                }
            }
        }
        out
    }

    /// Index offsets of grid points within periodic distance r of a center.
    pub fn ball_offsets(&self, r: f64) -> Vec<[i64; 3]> {
        let h = self.h();
        let reach = (r / h).floor() as i64;
        let half = (self.n / 2) as i64;
        let reach = reach.min(half);
        let mut out = Vec::new();
        for dx in -reach..=reach {
            for dy in -reach..=reach {
                for dz in -reach..=reach {
                    // signed offsets within half a period measure true
                    // periodic distance
                    let d2 = (dx * dx + dy * dy + dz * dz) as f64;
                    if d2.sqrt() * h <= r * (1.0 + 1e-12) {
                        out.push([dx, dy, dz]);
                    }
                }
            }
        }
        out
    }

    /// Midpoint nodes and weights covering (0, r^2] by dyadic levels.
    pub fn time_nodes(&self, r: f64) -> Vec<(f64, f64)> {
        let height = r * r;
        let levels = if height <= self.t_floor {
            0
        } else {
            (height / self.t_floor).log2().ceil() as usize
        };
        let mut nodes = Vec::new();
        let mut hi = height;
        for level in 0..=levels {
            let lo = if level == levels { 0.0 } else { hi * 0.5 };
            let panel = (hi - lo) / self.nodes_per_level as f64;
            for i in 0..self.nodes_per_level {
                let t = lo + (i as f64 + 0.5) * panel;
                nodes.push((t, panel));
            }
            hi = lo;
        }
        nodes.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        nodes
    }

    pub fn describe(&self) -> String {
        format!(
            "cylinders[n={} stride={} radii={} nodes/level={}]",
            self.n,
            self.stride,
            self.radii.len(),
            self.nodes_per_level
        )
    }
}
