//! Smooth (1,0)-forms `g(z) dz` on P1 from the family
//! `g_{p,q}(z) = z^p conj(z)^q / (1 + |z|^2)^(p+q+2)`.
//!
//! In the chart `w = 1/z` the same form reads
//! `-w^q conj(w)^(p+2) / (1 + |w|^2)^(p+q+2) dw`, so every member is smooth on
//! the whole sphere.

use serde::Serialize;

use crate::point::{Chart, Point, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyForm {
    pub p: u32,
    pub q: u32,
}

impl FamilyForm {
    pub const fn new(p: u32, q: u32) -> Self {
        FamilyForm { p, q }
    }

    /// The 32 members `p in 0..8`, `q in 0..4`.
    pub fn family() -> Vec<FamilyForm> {
        (0..8).flat_map(|p| (0..4).map(move |q| FamilyForm { p, q })).collect()
    }

    /// Coefficient of the form in the given chart at local coordinate `t`.
    pub fn eval(&self, chart: Chart, t: C64) -> C64 {
        let s = (1.0 + t.norm_sqr()).powi((self.p + self.q + 2) as i32);
        match chart {
            Chart::Zero => t.powu(self.p) * t.conj().powu(self.q) / s,
            Chart::One => -(t.powu(self.q) * t.conj().powu(self.p + 2)) / s,
        }
    }

    pub fn at(&self, x: &Point, chart: Chart) -> C64 {
        self.eval(chart, x.coord(chart))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::transition_derivative;

    #[test]
    fn charts_agree_on_overlap() {
        for f in FamilyForm::family() {
            for &z in &[C64::new(0.7, 0.4), C64::new(-1.3, 2.0), C64::new(0.1, -0.9)] {
                let w = z.inv();
                // g(z) dz = g(z) (dz/dw) dw
                let lhs = f.eval(Chart::Zero, z) * transition_derivative(w);
                let rhs = f.eval(Chart::One, w);
                assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()), "{f:?}");
            }
        }
    }
}
