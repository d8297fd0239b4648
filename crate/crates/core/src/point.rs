//! Points of the Riemann sphere in homogeneous coordinates.
//!
//! A point is stored as a pair `[h0 : h1]` scaled so the larger entry has
//! modulus one. The two affine charts are `z = h1/h0` (chart `Zero`) and
//! `w = h0/h1` (chart `One`); every point has a preferred chart in which its
//! coordinate has modulus at most one.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type C64 = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Chart {
    /// `z = h1 / h0`, contains 0.
    Zero,
    /// `w = h0 / h1`, contains infinity.
    One,
}

impl Chart {
    pub fn other(self) -> Chart {
        match self {
            Chart::Zero => Chart::One,
            Chart::One => Chart::Zero,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Chart::Zero => 0,
            Chart::One => 1,
        }
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    h0: C64,
    h1: C64,
}

impl Point {
    pub fn from_homogeneous(h0: C64, h1: C64) -> Self {
        let s = h0.norm().max(h1.norm());
        assert!(s > 0.0 && s.is_finite(), "homogeneous coordinates must be finite and nonzero");
        Point { h0: h0 / s, h1: h1 / s }
    }

    pub fn affine(z: C64) -> Self {
        Self::from_homogeneous(C64::new(1.0, 0.0), z)
    }

    pub fn infinity() -> Self {
        Point { h0: C64::new(0.0, 0.0), h1: C64::new(1.0, 0.0) }
    }

    /// The point whose coordinate in `chart` is `coord`.
    pub fn from_chart(chart: Chart, coord: C64) -> Self {
        let one = C64::new(1.0, 0.0);
        match chart {
            Chart::Zero => Self::from_homogeneous(one, coord),
            Chart::One => Self::from_homogeneous(coord, one),
        }
    }

    pub fn homogeneous(&self) -> (C64, C64) {
        (self.h0, self.h1)
    }

    /// Preferred chart: the one where the local coordinate has modulus <= 1.
    pub fn chart(&self) -> Chart {
        if self.h1.norm() <= self.h0.norm() {
            Chart::Zero
        } else {
            Chart::One
        }
    }

    /// Coordinate in the given chart; infinite when the point is the chart's pole.
    pub fn coord(&self, chart: Chart) -> C64 {
        match chart {
            Chart::Zero => self.h1 / self.h0,
            Chart::One => self.h0 / self.h1,
        }
    }

    /// `(preferred chart, coordinate in it)`.
    pub fn local(&self) -> (Chart, C64) {
        let c = self.chart();
        (c, self.coord(c))
    }

    pub fn is_infinity(&self) -> bool {
        self.h0 == C64::new(0.0, 0.0)
    }

    pub fn affine_value(&self) -> Option<C64> {
        if self.is_infinity() {
            None
        } else {
            Some(self.h1 / self.h0)
        }
    }

    /// Chordal distance, normalized to lie in `[0, 1]`.
    pub fn chordal_distance(&self, other: &Point) -> f64 {
        let num = (self.h0 * other.h1 - self.h1 * other.h0).norm();
        let na = (self.h0.norm_sqr() + self.h1.norm_sqr()).sqrt();
        let nb = (other.h0.norm_sqr() + other.h1.norm_sqr()).sqrt();
        num / (na * nb)
    }

    /// Height on the unit sphere: -1 at 0, +1 at infinity.
    pub fn height(&self) -> f64 {
        let a = self.h0.norm_sqr();
        let b = self.h1.norm_sqr();
        (b - a) / (a + b)
    }

    /// Embedding in the unit sphere of R^3 (inverse stereographic projection).
    pub fn sphere_coords(&self) -> [f64; 3] {
        let a = self.h0.norm_sqr();
        let b = self.h1.norm_sqr();
        let p = self.h1 * self.h0.conj();
        let s = a + b;
        [2.0 * p.re / s, 2.0 * p.im / s, (b - a) / s]
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.affine_value() {
            None => write!(f, "inf"),
            Some(z) => write!(f, "{}{:+}i", z.re, z.im),
        }
    }
}

/// Fubini-Study density `(1/pi)(1+|z|^2)^-2` of the unit-mass area form in a chart.
pub fn fs_density(local: C64) -> f64 {
    let s = 1.0 + local.norm_sqr();
    1.0 / (PI * s * s)
}

/// Derivative of the chart change `eta = 1/xi` at `xi`, i.e. `d eta / d xi`.
pub fn transition_derivative(xi: C64) -> C64 {
    -(xi * xi).inv()
}

/// Jacobian `d(target coord)/d(source coord)` at point `p`.
pub fn chart_jacobian(p: &Point, from: Chart, to: Chart) -> C64 {
    if from == to {
        C64::new(1.0, 0.0)
    } else {
        transition_derivative(p.coord(from))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charts_and_infinity() {
        let p = Point::affine(C64::new(3.0, 4.0));
        assert_eq!(p.chart(), Chart::One);
        let w = p.coord(Chart::One);
        assert!((w - C64::new(3.0, 4.0).inv()).norm() < 1e-15);
        assert!(Point::infinity().is_infinity());
        assert_eq!(Point::infinity().chart(), Chart::One);
        assert_eq!(Point::infinity().coord(Chart::One), C64::new(0.0, 0.0));
    }

    #[test]
    fn chordal_distance_is_symmetric_and_bounded() {
        let a = Point::affine(C64::new(0.0, 0.0));
        let b = Point::infinity();
        assert!((a.chordal_distance(&b) - 1.0).abs() < 1e-15);
        let c = Point::affine(C64::new(1.0, 1.0));
        assert!((a.chordal_distance(&c) - c.chordal_distance(&a)).abs() < 1e-15);
    }

    #[test]
    fn density_transforms_by_jacobian() {
        for &(re, im) in &[(0.3, -0.2), (1.7, 0.4), (-5.0, 2.0)] {
            let z = C64::new(re, im);
            let w = z.inv();
            let jac = transition_derivative(w).norm_sqr(); // |dz/dw|^2
            assert!((fs_density(w) - fs_density(z) * jac).abs() < 1e-12 * fs_density(w));
        }
    }
}
