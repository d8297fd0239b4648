//! Holomorphic correspondences on P1 given by their graph polynomial.
//!
//! For a graph `P(x, y)` of bidegree `(m, n)`, the image `f(x)` is the set of
//! `n = d1` roots of `P(x, .)` and the preimage `f^-1(y)` the `m = d2` roots of
//! `P(., y)`, counted with multiplicity.

mod branch;
mod builtins;
mod periodic;

pub use branch::{to_affine, BranchTree, TreeMode, TreeNode, MAX_FULL_LEAVES};
pub use builtins::{builtin, BUILTIN_NAMES, NWM22_SEED};
pub use periodic::{periodic_points, twisted_coincidences, PeriodicPointRecord, MAX_PERIODIC_DEGREE};

use crate::error::{Error, Result};
use crate::point::{Chart, Point, C64};
use crate::poly::{
    roots_of, strip_fiber_factors, sylvester_resultant, AffinePoly2, BihomogeneousPolynomial, RootSet,
    StripReport,
};

/// Relative size of `dP/dy` below which a branch is treated as ramified.
pub const RAMIFICATION_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug)]
pub struct IterateBudget {
    /// Cap on `max(d1, d2)^n`.
    pub max_degree: u64,
    /// Cap on the number of coefficients `(d2^n + 1)(d1^n + 1)` of the iterate.
    pub max_coefficients: u64,
}

impl Default for IterateBudget {
    fn default() -> Self {
        IterateBudget { max_degree: 4096, max_coefficients: 1 << 16 }
    }
}

#[derive(Clone, Debug)]
struct ChartCache {
    poly: AffinePoly2,
    dx: AffinePoly2,
    dy: AffinePoly2,
}

#[derive(Clone, Debug)]
pub struct Correspondence {
    graph: BihomogeneousPolynomial,
    name: Option<String>,
    charts: Vec<ChartCache>,
}

#[derive(Clone, Debug)]
pub struct Composition {
    pub correspondence: Correspondence,
    pub report: StripReport,
}

impl Correspondence {
    /// Wraps a graph, rejecting forms that contain a fiber of either projection.
    pub fn new(graph: BihomogeneousPolynomial) -> Result<Self> {
        let graph = graph.normalized()?;
        let (m, n) = graph.bidegree();
        if m == 0 || n == 0 {
            return Err(Error::invalid(format!("bidegree ({m},{n}) has a zero degree")));
        }
        let (_, report) = strip_fiber_factors(&graph, None)?;
        if !report.removed.is_empty() {
            return Err(Error::invalid(format!(
                "graph contains {} fiber component(s)",
                report.removed.len()
            )));
        }
        Ok(Self::from_graph_unchecked(graph))
    }

    fn from_graph_unchecked(graph: BihomogeneousPolynomial) -> Self {
        let charts = [Chart::Zero, Chart::One]
            .iter()
            .flat_map(|&cx| [Chart::Zero, Chart::One].map(move |cy| (cx, cy)))
            .map(|(cx, cy)| {
                let poly = graph.chart_poly(cx, cy);
                ChartCache { dx: poly.dx(), dy: poly.dy(), poly }
            })
            .collect();
        Correspondence { graph, name: None, charts }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn graph(&self) -> &BihomogeneousPolynomial {
        &self.graph
    }

    /// Number of images of a point, the degree of `pi_1` on the graph.
    pub fn d1(&self) -> usize {
        self.graph.bidegree().1
    }

    /// Number of preimages of a point, the degree of `pi_2` on the graph.
    pub fn d2(&self) -> usize {
        self.graph.bidegree().0
    }

    fn chart(&self, cx: Chart, cy: Chart) -> &ChartCache {
        &self.charts[cx.index() * 2 + cy.index()]
    }

    /// `f(x)` with multiplicities.
    pub fn forward_fiber(&self, x: &Point) -> Result<RootSet> {
        let coeffs = self.graph.restrict_x(x, Chart::Zero);
        roots_of(&coeffs, self.d1(), crate::poly::roots::DEFAULT_TOLERANCE)
    }

    /// `f^-1(y)` with multiplicities.
    pub fn backward_fiber(&self, y: &Point) -> Result<RootSet> {
        let coeffs = self.graph.restrict_y(y, Chart::Zero);
        roots_of(&coeffs, self.d2(), crate::poly::roots::DEFAULT_TOLERANCE)
    }

    /// The `d1` points of `f(x)`, repeated by multiplicity.
    pub fn evaluate_forward(&self, x: &Point) -> Result<Vec<Point>> {
        Ok(self.forward_fiber(x)?.flatten())
    }

    pub fn evaluate_backward(&self, y: &Point) -> Result<Vec<Point>> {
        Ok(self.backward_fiber(y)?.flatten())
    }

    /// `dy/dx` along the branch of the graph through `(x, y)`, in the preferred
    /// charts of `x` and `y`. `multiplicity` is the multiplicity of `y` in `f(x)`;
    /// for repeated components the derivative is taken on the reduced branch.
    /// Returns `None` at ramification points of `pi_1`.
    pub fn branch_derivative(&self, x: &Point, y: &Point, multiplicity: usize) -> Option<C64> {
        let (cx, xi) = x.local();
        let (cy, eta) = y.local();
        self.branch_derivative_in(cx, xi, cy, eta, multiplicity)
    }

    pub fn branch_derivative_in(&self, cx: Chart, xi: C64, cy: Chart, eta: C64, multiplicity: usize) -> Option<C64> {
        let cache = self.chart(cx, cy);
        let (ax, ay) = (xi.norm(), eta.norm());
        let gx = cache.dx.eval(xi, eta);
        let gy = cache.dy.eval(xi, eta);
        let sx = cache.dx.eval_abs(ax, ay);
        let sy = cache.dy.eval_abs(ax, ay);
        let scale = sx.max(sy).max(f64::MIN_POSITIVE);
        if gy.norm() > RAMIFICATION_TOL * scale {
            return Some(-gx / gy);
        }
        if multiplicity <= 1 || gx.norm() > 1e-7 * scale {
            return None;
        }
        // k-fold component: the (k-1)-th y-derivative vanishes simply along it
        let mut h = cache.poly.clone();
        for _ in 0..(multiplicity - 1) {
            h = h.dy();
        }
        let (hx, hy) = (h.dx(), h.dy());
        let vx = hx.eval(xi, eta);
        let vy = hy.eval(xi, eta);
        let s = hx.eval_abs(ax, ay).max(hy.eval_abs(ax, ay)).max(f64::MIN_POSITIVE);
        if vy.norm() > RAMIFICATION_TOL * s {
            Some(-vx / vy)
        } else {
            None
        }
    }

    /// `dx/dy` along the branch through `(x, y)` seen from the target, charts as above.
    pub fn inverse_branch_derivative(&self, x: &Point, y: &Point, multiplicity: usize) -> Option<C64> {
        let (cx, xi) = x.local();
        let (cy, eta) = y.local();
        let cache = self.chart(cx, cy);
        let (ax, ay) = (xi.norm(), eta.norm());
        let gx = cache.dx.eval(xi, eta);
        let gy = cache.dy.eval(xi, eta);
        let scale = cache.dx.eval_abs(ax, ay).max(cache.dy.eval_abs(ax, ay)).max(f64::MIN_POSITIVE);
        if gx.norm() > RAMIFICATION_TOL * scale {
            return Some(-gy / gx);
        }
        if multiplicity <= 1 || gy.norm() > 1e-7 * scale {
            return None;
        }
        let mut h = cache.poly.clone();
        for _ in 0..(multiplicity - 1) {
            h = h.dx();
        }
        let (hx, hy) = (h.dx(), h.dy());
        let vx = hx.eval(xi, eta);
        let vy = hy.eval(xi, eta);
        let s = hx.eval_abs(ax, ay).max(hy.eval_abs(ax, ay)).max(f64::MIN_POSITIVE);
        if vx.norm() > RAMIFICATION_TOL * s {
            Some(-vy / vx)
        } else {
            None
        }
    }

    /// Exchanges the projections.
    pub fn adjoint(&self) -> Correspondence {
        let mut c = Self::from_graph_unchecked(self.graph.transpose());
        c.name = self.name.as_ref().map(|n| format!("{n}-adjoint"));
        c
    }

    /// `self o g`: first `g`, then `self`.
    pub fn compose(&self, g: &Correspondence) -> Result<Composition> {
        let raw = sylvester_resultant(&g.graph, &self.graph)?;
        let expected = (self.d2() * g.d2(), self.d1() * g.d1());
        let (graph, report) = strip_fiber_factors(&raw, Some(expected))?;
        let (m, n) = graph.bidegree();
        if m == 0 || n == 0 {
            return Err(Error::invalid("composition collapsed to a fiber"));
        }
        Ok(Composition { correspondence: Self::from_graph_unchecked(graph), report })
    }

    pub fn check_iterate_budget(&self, n: u32, budget: &IterateBudget) -> Result<()> {
        let d1 = (self.d1() as u64).checked_pow(n).unwrap_or(u64::MAX);
        let d2 = (self.d2() as u64).checked_pow(n).unwrap_or(u64::MAX);
        let top = d1.max(d2);
        if top > budget.max_degree {
            return Err(Error::DegreeCap { what: "max(d1, d2)^n", value: top, cap: budget.max_degree });
        }
        let coeffs = (d1 + 1).saturating_mul(d2 + 1);
        if coeffs > budget.max_coefficients {
            return Err(Error::DegreeCap {
                what: "iterate coefficient count",
                value: coeffs,
                cap: budget.max_coefficients,
            });
        }
        Ok(())
    }

    /// `f^n` by repeated composition `f o f^(k-1)`.
    pub fn iterate(&self, n: u32, budget: &IterateBudget) -> Result<Correspondence> {
        if n == 0 {
            return Err(Error::invalid("iterate order must be positive"));
        }
        self.check_iterate_budget(n, budget)?;
        let mut cur = self.clone();
        for _ in 1..n {
            cur = self.compose(&cur)?.correspondence;
        }
        cur.name = self.name.as_ref().map(|s| format!("{s}^{n}"));
        Ok(cur)
    }
}
