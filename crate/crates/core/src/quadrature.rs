//! Equal-area midpoint grids on the sphere.
//!
//! Nodes sit at the midpoints of a uniform grid in `(u, phi)` with
//! `u = cos(theta) in (-1, 1)`, so every node carries Fubini-Study mass `1/N`.
//! A node lies in chart 0 when `u <= 0` (`|z| <= 1`) and in chart 1 otherwise.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::point::{fs_density, Chart, Point, C64};

#[derive(Clone, Copy, Debug)]
pub struct GridNode {
    pub point: Point,
    pub chart: Chart,
    pub local: C64,
    /// Fubini-Study mass of the cell.
    pub weight: f64,
}

impl GridNode {
    /// FS density of the node in its own chart.
    pub fn density(&self) -> f64 {
        fs_density(self.local)
    }
}

#[derive(Clone, Debug)]
pub struct SphereGrid {
    nu: usize,
    nphi: usize,
    nodes: Vec<GridNode>,
}

/// Point with sphere coordinates `(u, phi)`.
pub fn point_at(u: f64, phi: f64) -> Point {
    if u <= 0.0 {
        let r = ((1.0 + u) / (1.0 - u)).sqrt();
        Point::from_chart(Chart::Zero, C64::from_polar(r, phi))
    } else {
        let r = ((1.0 - u) / (1.0 + u)).sqrt();
        Point::from_chart(Chart::One, C64::from_polar(r, -phi))
    }
}

/// Inverse of [`point_at`], with `phi` in `[0, 2 pi)`.
pub fn sphere_parameters(p: &Point) -> (f64, f64) {
    let (h0, h1) = p.homogeneous();
    let (a, b) = (h0.norm_sqr(), h1.norm_sqr());
    let u = (b - a) / (a + b);
    let phase = (h1 * h0.conj()).arg();
    (u, phase.rem_euclid(2.0 * PI))
}

impl SphereGrid {
    pub fn new(nu: usize, nphi: usize) -> Result<Self> {
        if nu == 0 || nphi == 0 {
            return Err(Error::invalid("sphere grid dimensions must be positive"));
        }
        let w = 1.0 / (nu * nphi) as f64;
        let mut nodes = Vec::with_capacity(nu * nphi);
        for i in 0..nu {
            let u = -1.0 + (2 * i + 1) as f64 / nu as f64;
            for j in 0..nphi {
                let phi = 2.0 * PI * (j as f64 + 0.5) / nphi as f64;
                let point = point_at(u, phi);
                let (chart, local) = point.local();
                nodes.push(GridNode { point, chart, local, weight: w });
            }
        }
        Ok(SphereGrid { nu, nphi, nodes })
    }

    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nu, self.nphi)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[GridNode] {
        &self.nodes
    }

    /// `int f omega` for a function on the sphere.
    pub fn integrate<F>(&self, f: F) -> C64
    where
        F: Fn(&GridNode) -> C64 + Sync,
    {
        let vals: Vec<C64> = self.nodes.par_iter().map(|n| f(n) * n.weight).collect();
        vals.into_iter().sum()
    }

    /// `int g dA` for a density `g` given against the Lebesgue area element of the node's chart.
    pub fn integrate_density<F>(&self, g: F) -> C64
    where
        F: Fn(&GridNode) -> C64 + Sync,
    {
        self.integrate(|n| g(n) / n.density())
    }

    /// Node values in grid order.
    pub fn map<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&GridNode) -> T + Sync + Send,
    {
        self.nodes.par_iter().map(f).collect()
    }

    /// Node indices and weights of the bilinear stencil at `p` (periodic in
    /// `phi`, clamped in `u`).
    pub fn stencil(&self, p: &Point) -> [(usize, f64); 4] {
        let (u, phi) = sphere_parameters(p);
        let fu = ((u + 1.0) * self.nu as f64 / 2.0 - 0.5).clamp(0.0, (self.nu - 1) as f64);
        let fp = phi * self.nphi as f64 / (2.0 * PI) - 0.5;
        let i0 = (fu.floor() as usize).min(self.nu.saturating_sub(2));
        let tu = if self.nu == 1 { 0.0 } else { fu - i0 as f64 };
        let j0f = fp.floor();
        let tp = fp - j0f;
        let j0 = (j0f as isize).rem_euclid(self.nphi as isize) as usize;
        let j1 = (j0 + 1) % self.nphi;
        let i1 = (i0 + 1).min(self.nu - 1);
        let at = |i: usize, j: usize| i * self.nphi + j;
        [
            (at(i0, j0), (1.0 - tu) * (1.0 - tp)),
            (at(i0, j1), (1.0 - tu) * tp),
            (at(i1, j0), tu * (1.0 - tp)),
            (at(i1, j1), tu * tp),
        ]
    }

    /// Bilinear interpolation of node values.
    pub fn interpolate(&self, values: &[C64], p: &Point) -> C64 {
        self.stencil(p).iter().map(|&(k, w)| values[k] * w).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_mass() {
        let g = SphereGrid::square(40).unwrap();
        let m = g.integrate(|_| C64::new(1.0, 0.0));
        assert!((m.re - 1.0).abs() < 1e-12);
        let m = g.integrate_density(|n| C64::new(n.density(), 0.0));
        assert!((m.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn second_moment_of_height() {
        // u is uniform on (-1, 1): int u^2 omega = 1/3
        let g = SphereGrid::new(200, 4).unwrap();
        let m = g.integrate(|n| {
            let (u, _) = sphere_parameters(&n.point);
            C64::new(u * u, 0.0)
        });
        assert!((m.re - 1.0 / 3.0).abs() < 1e-4);
    }

    #[test]
    fn parameters_round_trip() {
        for &(u, phi) in &[(-0.9, 0.1), (0.0, 3.0), (0.7, 6.0), (0.999, 1.0)] {
            let (u2, p2) = sphere_parameters(&point_at(u, phi));
            assert!((u - u2).abs() < 1e-12 && (phi - p2).abs() < 1e-12);
        }
    }

    #[test]
    fn interpolation_is_exact_at_nodes_and_for_constants() {
        let g = SphereGrid::new(8, 12).unwrap();
        let vals: Vec<C64> = (0..g.len()).map(|k| C64::new(k as f64, 0.0)).collect();
        for (k, n) in g.nodes().iter().enumerate() {
            assert!((g.interpolate(&vals, &n.point) - vals[k]).norm() < 1e-9);
        }
        let ones = vec![C64::new(1.0, 0.0); g.len()];
        let v = g.interpolate(&ones, &Point::affine(C64::new(0.3, 2.0)));
        assert!((v - C64::new(1.0, 0.0)).norm() < 1e-14);
    }
}
