//! Two-chart atlas of P1 with a smooth partition of unity, and the induced
//! four product charts of P1 x P1.

use std::sync::Arc;

use super::forms::{in_open_square, to_square, FormCoefficients, SharedForm, Support, TestForm};
use crate::point::{Chart, Point, C64};

/// Partition functions switch between these moduli of the chart-0 coordinate.
const INNER: f64 = 0.9;
const OUTER: f64 = 1.0 / 0.9;

/// `exp(-1/t)` for `t > 0`.
fn flat(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Smooth step: 0 for `t <= 0`, 1 for `t >= 1`.
pub fn smooth_step(t: f64) -> f64 {
    let a = flat(t);
    let b = flat(1.0 - t);
    a / (a + b)
}

/// Partition function of chart `c`: supported where `|coord_c| < OUTER`.
pub fn partition(c: Chart, p: &Point) -> f64 {
    let (h0, h1) = p.homogeneous();
    let (a, b) = (h0.norm(), h1.norm());
    // modulus of the chart-0 coordinate, bounded representation
    let psi0 = if b <= INNER * a {
        1.0
    } else if b >= OUTER * a {
        0.0
    } else {
        smooth_step((OUTER - b / a) / (OUTER - INNER))
    };
    match c {
        Chart::Zero => psi0,
        Chart::One => 1.0 - psi0,
    }
}

/// Whether `p` lies in the preimage of `U0` under the chart-`c` square map.
pub fn in_inner_square(c: Chart, p: &Point) -> bool {
    let u = to_square(p.coord(c));
    u.is_finite() && in_open_square(u, 0.25, 0.75)
}

/// `psi_i(x) psi_j(y) beta` for one product chart.
pub struct LocalizedForm {
    pub base: SharedForm,
    pub charts: (Chart, Chart),
}

impl TestForm for LocalizedForm {
    fn id(&self) -> String {
        format!("{}@{}{}", self.base.id(), self.charts.0, self.charts.1)
    }

    fn coefficients(&self, x: &Point, cx: Chart, y: &Point, cy: Chart) -> FormCoefficients {
        let w = partition(self.charts.0, x) * partition(self.charts.1, y);
        if w == 0.0 {
            return FormCoefficients::default();
        }
        self.base.coefficients(x, cx, y, cy).scale(C64::new(w, 0.0))
    }

    fn support(&self) -> Support {
        Support::Local(self.charts.0, self.charts.1)
    }

    fn norm_bound(&self) -> f64 {
        self.base.norm_bound()
    }

    fn has_mixed(&self) -> bool {
        self.base.has_mixed()
    }
}

/// Splits a global form into four pieces, each supported in one product chart.
pub fn localize(form: SharedForm) -> Vec<LocalizedForm> {
    [Chart::Zero, Chart::One]
        .iter()
        .flat_map(|&a| [Chart::Zero, Chart::One].map(|b| (a, b)))
        .map(|charts| LocalizedForm { base: Arc::clone(&form), charts })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::SphereGrid;

    #[test]
    fn partition_sums_to_one_and_has_chart_support() {
        let g = SphereGrid::square(60).unwrap();
        for n in g.nodes() {
            let (p0, p1) = (partition(Chart::Zero, &n.point), partition(Chart::One, &n.point));
            assert!((p0 + p1 - 1.0).abs() < 1e-15);
            for (c, p) in [(Chart::Zero, p0), (Chart::One, p1)] {
                if p > 0.0 {
                    assert!(in_inner_square(c, &n.point));
                }
            }
        }
        assert_eq!(partition(Chart::Zero, &Point::infinity()), 0.0);
        assert_eq!(partition(Chart::One, &Point::infinity()), 1.0);
    }
}
