//! Test (1,1)-forms on P1 x P1.
//!
//! A form is stored through chart-local coefficients of
//! `(i/2) [a dx^dxb + b dy^dyb + c dx^dyb + e dy^dxb] + p dx^dy + q dxb^dyb`.
//! With this convention `(i/2) dx^dxb` is the Lebesgue area element, so the
//! Fubini-Study form has `a = rho(x)` and the pairing density on a branch is
//! read off directly against `dA`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::oneform::FamilyForm;
use crate::point::{chart_jacobian, fs_density, Chart, Point, C64};
use crate::quadrature::SphereGrid;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FormCoefficients {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub e: C64,
    /// `dx^dy` coefficient.
    pub p: C64,
    /// `dxb^dyb` coefficient.
    pub q: C64,
}

/// Which variable parametrizes a branch of the curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Parameter {
    /// `y = y(x)`.
    Source,
    /// `x = x(y)`.
    Target,
}

impl FormCoefficients {
    pub fn scale(self, s: C64) -> Self {
        FormCoefficients { a: self.a * s, b: self.b * s, c: self.c * s, e: self.e * s, p: self.p * s, q: self.q * s }
    }

    pub fn add(self, o: Self) -> Self {
        FormCoefficients {
            a: self.a + o.a,
            b: self.b + o.b,
            c: self.c + o.c,
            e: self.e + o.e,
            p: self.p + o.p,
            q: self.q + o.q,
        }
    }

    /// Density against `dA` of the pull-back to a holomorphic branch whose
    /// derivative (other variable with respect to the parameter) is `s`.
    pub fn pullback_density(&self, s: C64, param: Parameter) -> C64 {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        // 1-forms as (dt, dtb) coefficients
        let (dx, dxb, dy, dyb) = match param {
            Parameter::Source => ((one, zero), (zero, one), (s, zero), (zero, s.conj())),
            Parameter::Target => ((s, zero), (zero, s.conj()), (one, zero), (zero, one)),
        };
        let w = |u: (C64, C64), v: (C64, C64)| u.0 * v.1 - u.1 * v.0;
        // dt^dtb = -2i dA
        let minus_two_i = C64::new(0.0, -2.0);
        self.a * w(dx, dxb)
            + self.b * w(dy, dyb)
            + self.c * w(dx, dyb)
            + self.e * w(dy, dxb)
            + minus_two_i * (self.p * w(dx, dy) + self.q * w(dxb, dyb))
    }

    /// Converts coefficients computed in charts `(fx, fy)` to charts `(tx, ty)`.
    pub fn change_charts(self, x: &Point, fx: Chart, tx: Chart, y: &Point, fy: Chart, ty: Chart) -> Self {
        // d(from)/d(to)
        let jx = chart_jacobian(x, tx, fx);
        let jy = chart_jacobian(y, ty, fy);
        FormCoefficients {
            a: self.a * jx.norm_sqr(),
            b: self.b * jy.norm_sqr(),
            c: self.c * jx * jy.conj(),
            e: self.e * jy * jx.conj(),
            p: self.p * jx * jy,
            q: self.q * jx.conj() * jy.conj(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Support {
    Global,
    /// Inside the image of the open square `U0 x U0` of the given chart pair.
    Local(Chart, Chart),
}

pub trait TestForm: Send + Sync {
    fn id(&self) -> String;

    /// Coefficients in the charts `(cx, cy)` at `(x, y)`.
    fn coefficients(&self, x: &Point, cx: Chart, y: &Point, cy: Chart) -> FormCoefficients;

    fn support(&self) -> Support {
        Support::Global
    }

    /// Bound on the coefficients of the form, used for reporting.
    fn norm_bound(&self) -> f64;

    /// Whether the `c`/`e` components can be nonzero.
    fn has_mixed(&self) -> bool {
        true
    }

    /// `<pi_1^* delta_x, beta>`: integral of the `b` component over `{x} x P1`.
    fn vertical_fiber_integral(&self, x: &Point, grid: &SphereGrid) -> C64 {
        let cx = x.chart();
        grid.integrate_density(|n| self.coefficients(x, cx, &n.point, n.chart).b)
    }

    /// `<pi_2^* delta_y, beta>`: integral of the `a` component over `P1 x {y}`.
    fn horizontal_fiber_integral(&self, y: &Point, grid: &SphereGrid) -> C64 {
        let cy = y.chart();
        grid.integrate_density(|n| self.coefficients(&n.point, n.chart, y, cy).a)
    }
}

pub type SharedForm = Arc<dyn TestForm>;

/// `Omega = (pi_1^* omega + pi_2^* omega) / sqrt 2`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ProductKahlerForm;

impl TestForm for ProductKahlerForm {
    fn id(&self) -> String {
        "Omega".into()
    }

    fn coefficients(&self, x: &Point, cx: Chart, y: &Point, cy: Chart) -> FormCoefficients {
        FormCoefficients {
            a: C64::new(fs_density(x.coord(cx)) * FRAC_1_SQRT_2, 0.0),
            b: C64::new(fs_density(y.coord(cy)) * FRAC_1_SQRT_2, 0.0),
            ..Default::default()
        }
    }

    fn norm_bound(&self) -> f64 {
        FRAC_1_SQRT_2 / std::f64::consts::PI
    }

    fn has_mixed(&self) -> bool {
        false
    }

    fn vertical_fiber_integral(&self, _: &Point, _: &SphereGrid) -> C64 {
        C64::new(FRAC_1_SQRT_2, 0.0)
    }

    fn horizontal_fiber_integral(&self, _: &Point, _: &SphereGrid) -> C64 {
        C64::new(FRAC_1_SQRT_2, 0.0)
    }
}

/// Real polynomial in the coordinates `(X1, X2, X3)` of the unit sphere.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpherePolynomial {
    /// `(coefficient, [i, j, k])` for `X1^i X2^j X3^k`.
    pub terms: Vec<(f64, [u32; 3])>,
}

impl SpherePolynomial {
    pub fn constant(c: f64) -> Self {
        SpherePolynomial { terms: vec![(c, [0, 0, 0])] }
    }

    pub fn monomial(c: f64, exps: [u32; 3]) -> Self {
        SpherePolynomial { terms: vec![(c, exps)] }
    }

    pub fn plus(mut self, c: f64, exps: [u32; 3]) -> Self {
        self.terms.push((c, exps));
        self
    }

    pub fn eval(&self, p: &Point) -> f64 {
        let s = p.sphere_coords();
        self.terms
            .iter()
            .map(|(c, e)| c * s[0].powi(e[0] as i32) * s[1].powi(e[1] as i32) * s[2].powi(e[2] as i32))
            .sum()
    }

    /// Exact `int f omega`: `E[X1^i X2^j X3^k] = (i-1)!! (j-1)!! (k-1)!! / (i+j+k+1)!!`
    /// when all exponents are even, zero otherwise.
    pub fn integral(&self) -> f64 {
        fn dfact(n: i64) -> f64 {
            let mut r = 1.0;
            let mut k = n;
            while k > 1 {
                r *= k as f64;
                k -= 2;
            }
            r
        }
        self.terms
            .iter()
            .filter(|(_, e)| e.iter().all(|v| v % 2 == 0))
            .map(|(c, e)| {
                let (i, j, k) = (e[0] as i64, e[1] as i64, e[2] as i64);
                c * dfact(i - 1) * dfact(j - 1) * dfact(k - 1) / dfact(i + j + k + 1)
            })
            .sum()
    }

    pub fn sup_bound(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.abs()).sum()
    }
}

/// One separable summand of a [`GlobalForm`].
#[derive(Clone, Debug, Serialize)]
pub enum GlobalTerm {
    /// `a = h(x) k(y) rho(x)`.
    Source { h: SpherePolynomial, k: SpherePolynomial },
    /// `b = h(x) k(y) rho(y)`.
    Target { h: SpherePolynomial, k: SpherePolynomial },
    /// `c = s g1(x) conj(g2(y))`, `e = conj(c)`; the form is real.
    Mixed { g1: FamilyForm, g2: FamilyForm, scale: (f64, f64) },
}

/// A smooth real (1,1)-form on P1 x P1 written as a finite sum of separable terms.
#[derive(Clone, Debug, Serialize)]
pub struct GlobalForm {
    pub id: String,
    pub terms: Vec<GlobalTerm>,
}

impl GlobalForm {
    pub fn new(id: impl Into<String>, terms: Vec<GlobalTerm>) -> Self {
        GlobalForm { id: id.into(), terms }
    }

    /// Three smooth forms with generic (non-cancelling) behaviour under the
    /// rotational symmetries of the builtin examples.
    pub fn standard_family() -> Vec<GlobalForm> {
        use GlobalTerm::*;
        let h = |c: f64, e: [u32; 3]| SpherePolynomial::monomial(c, e);
        vec![
            GlobalForm::new(
                "target-radial",
                vec![Target { h: h(0.5, [0, 0, 0]).plus(0.5, [0, 0, 1]), k: h(1.0, [0, 0, 0]).plus(0.5, [0, 0, 1]) }],
            ),
            GlobalForm::new(
                "source-target",
                vec![
                    Source { h: h(1.0, [0, 0, 1]), k: h(1.0, [0, 0, 1]).plus(0.3, [1, 0, 0]) },
                    Target { h: h(1.0, [0, 0, 2]).plus(0.4, [0, 0, 1]), k: h(1.0, [0, 0, 0]).plus(-0.7, [0, 0, 1]) },
                ],
            ),
            GlobalForm::new(
                "mixed",
                vec![
                    Target { h: h(1.0, [0, 0, 0]).plus(-0.6, [0, 0, 1]).plus(0.2, [0, 1, 0]), k: h(0.8, [0, 0, 1]) },
                    Mixed { g1: FamilyForm::new(0, 1), g2: FamilyForm::new(0, 0), scale: (1.5, 0.5) },
                ],
            ),
        ]
    }
}

impl TestForm for GlobalForm {
    fn id(&self) -> String {
        self.id.clone()
    }

    fn coefficients(&self, x: &Point, cx: Chart, y: &Point, cy: Chart) -> FormCoefficients {
        let (xi, eta) = (x.coord(cx), y.coord(cy));
        let mut out = FormCoefficients::default();
        for t in &self.terms {
            match t {
                GlobalTerm::Source { h, k } => out.a += h.eval(x) * k.eval(y) * fs_density(xi),
                GlobalTerm::Target { h, k } => out.b += h.eval(x) * k.eval(y) * fs_density(eta),
                GlobalTerm::Mixed { g1, g2, scale } => {
                    let c = C64::new(scale.0, scale.1) * g1.eval(cx, xi) * g2.eval(cy, eta).conj();
                    out.c += c;
                    out.e += c.conj();
                }
            }
        }
        out
    }

    fn norm_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| match t {
                GlobalTerm::Source { h, k } | GlobalTerm::Target { h, k } => {
                    h.sup_bound() * k.sup_bound() / std::f64::consts::PI
                }
                GlobalTerm::Mixed { scale, .. } => (scale.0 * scale.0 + scale.1 * scale.1).sqrt(),
            })
            .sum()
    }

    fn has_mixed(&self) -> bool {
        self.terms.iter().any(|t| matches!(t, GlobalTerm::Mixed { .. }))
    }

    fn vertical_fiber_integral(&self, x: &Point, _: &SphereGrid) -> C64 {
        let v: f64 = self
            .terms
            .iter()
            .map(|t| match t {
                GlobalTerm::Target { h, k } => h.eval(x) * k.integral(),
                _ => 0.0,
            })
            .sum();
        C64::new(v, 0.0)
    }

    fn horizontal_fiber_integral(&self, y: &Point, _: &SphereGrid) -> C64 {
        let v: f64 = self
            .terms
            .iter()
            .map(|t| match t {
                GlobalTerm::Source { h, k } => h.integral() * k.eval(y),
                _ => 0.0,
            })
            .sum();
        C64::new(v, 0.0)
    }
}

/// `s * beta`.
pub struct ScaledForm {
    pub base: SharedForm,
    pub factor: C64,
}

impl TestForm for ScaledForm {
    fn id(&self) -> String {
        format!("{}*{}", self.factor, self.base.id())
    }
    fn coefficients(&self, x: &Point, cx: Chart, y: &Point, cy: Chart) -> FormCoefficients {
        self.base.coefficients(x, cx, y, cy).scale(self.factor)
    }
    fn support(&self) -> Support {
        self.base.support()
    }
    fn norm_bound(&self) -> f64 {
        self.base.norm_bound() * self.factor.norm()
    }
    fn has_mixed(&self) -> bool {
        self.base.has_mixed()
    }
    fn vertical_fiber_integral(&self, x: &Point, grid: &SphereGrid) -> C64 {
        self.base.vertical_fiber_integral(x, grid) * self.factor
    }
    fn horizontal_fiber_integral(&self, y: &Point, grid: &SphereGrid) -> C64 {
        self.base.horizontal_fiber_integral(y, grid) * self.factor
    }
}

/// Finite linear combination of forms.
pub struct SumForm {
    pub parts: Vec<(C64, SharedForm)>,
}

impl TestForm for SumForm {
    fn id(&self) -> String {
        let ids: Vec<String> = self.parts.iter().map(|(s, f)| format!("{s}*{}", f.id())).collect();
        ids.join("+")
    }
    fn coefficients(&self, x: &Point, cx: Chart, y: &Point, cy: Chart) -> FormCoefficients {
        self.parts
            .iter()
            .fold(FormCoefficients::default(), |acc, (s, f)| acc.add(f.coefficients(x, cx, y, cy).scale(*s)))
    }
    fn norm_bound(&self) -> f64 {
        self.parts.iter().map(|(s, f)| s.norm() * f.norm_bound()).sum()
    }
    fn has_mixed(&self) -> bool {
        self.parts.iter().any(|(_, f)| f.has_mixed())
    }
    fn vertical_fiber_integral(&self, x: &Point, grid: &SphereGrid) -> C64 {
        self.parts.iter().map(|(s, f)| f.vertical_fiber_integral(x, grid) * s).sum()
    }
    fn horizontal_fiber_integral(&self, y: &Point, grid: &SphereGrid) -> C64 {
        self.parts.iter().map(|(s, f)| f.horizontal_fiber_integral(y, grid) * s).sum()
    }
}

/// Adds `(2,0)` and `(0,2)` parts `p dx^dy + q dxb^dyb` built from the family
/// forms, `p = g1(x) g2(y)`, `q = conj(p)`.
pub struct WithHolomorphicPart {
    pub base: SharedForm,
    pub g1: FamilyForm,
    pub g2: FamilyForm,
}

impl TestForm for WithHolomorphicPart {
    fn id(&self) -> String {
        format!("{}+(2,0)", self.base.id())
    }
    fn coefficients(&self, x: &Point, cx: Chart, y: &Point, cy: Chart) -> FormCoefficients {
        let mut c = self.base.coefficients(x, cx, y, cy);
        let p = self.g1.at(x, cx) * self.g2.at(y, cy);
        c.p += p;
        c.q += p.conj();
        c
    }
    fn support(&self) -> Support {
        self.base.support()
    }
    fn norm_bound(&self) -> f64 {
        self.base.norm_bound() + 2.0
    }
    fn has_mixed(&self) -> bool {
        true
    }
}

/// Which single component a localized case form carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub enum Case {
    /// `phi dx^dxb`
    Source,
    /// `phi dy^dyb`
    Target,
    /// `phi dx^dyb`
    Mixed,
    /// `phi dy^dxb`
    MixedConjugate,
}

/// Scale of the chart-to-square maps: `tau(t) = t / CHART_SCALE + (1 + i)/2`.
/// The preimage of `U0 = (1/4, 3/4)^2` is the square `|Re t|, |Im t| < 1.2`,
/// which contains the closed unit disk, so two charts cover P1.
pub const CHART_SCALE: f64 = 4.8;

pub fn to_square(t: C64) -> C64 {
    t / CHART_SCALE + C64::new(0.5, 0.5)
}

pub fn in_open_square(u: C64, lo: f64, hi: f64) -> bool {
    u.re > lo && u.re < hi && u.im > lo && u.im < hi
}

type SquareFn = Arc<dyn Fn(C64, C64) -> C64 + Send + Sync>;

/// `phi(u, v)` times a single component in the square coordinates of one
/// chart pair, where `u = tau(x)`, `v = tau(y)` and `phi` vanishes outside `U0^2`.
#[derive(Clone)]
pub struct CaseForm {
    pub case: Case,
    pub charts: (Chart, Chart),
    phi: SquareFn,
    sup: f64,
    label: String,
}

impl CaseForm {
    /// Builds the form after checking that `phi` vanishes on a sample of `U^2 \ U0^2`.
    pub fn new(
        case: Case,
        charts: (Chart, Chart),
        label: impl Into<String>,
        phi: impl Fn(C64, C64) -> C64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let phi: SquareFn = Arc::new(phi);
        let m = 24;
        let pts: Vec<C64> = (0..m)
            .flat_map(|i| (0..m).map(move |j| C64::new((i as f64 + 0.5) / m as f64, (j as f64 + 0.5) / m as f64)))
            .collect();
        let mut sup = 0.0f64;
        for &u in &pts {
            for &v in &pts {
                let val = phi(u, v).norm();
                let inside = in_open_square(u, 0.25, 0.75) && in_open_square(v, 0.25, 0.75);
                if !inside && val > 1e-12 {
                    return Err(Error::SupportViolation(format!(
                        "phi({u}, {v}) = {val:.3e} outside the inner square"
                    )));
                }
                sup = sup.max(val);
            }
        }
        Ok(CaseForm { case, charts, phi, sup, label: label.into() })
    }

    /// Evaluates `phi` in square coordinates, zero outside `U0^2`.
    pub fn phi_at(&self, x: &Point, y: &Point) -> C64 {
        let (fx, fy) = self.charts;
        let (u, v) = (to_square(x.coord(fx)), to_square(y.coord(fy)));
        if !(u.is_finite() && v.is_finite()) || !in_open_square(u, 0.25, 0.75) || !in_open_square(v, 0.25, 0.75) {
            return C64::new(0.0, 0.0);
        }
        (self.phi)(u, v)
    }
}

impl TestForm for CaseForm {
    fn id(&self) -> String {
        format!("case-{:?}-{}{}-{}", self.case, self.charts.0, self.charts.1, self.label)
    }

    fn coefficients(&self, x: &Point, cx: Chart, y: &Point, cy: Chart) -> FormCoefficients {
        let phi = self.phi_at(x, y);
        if phi == C64::new(0.0, 0.0) {
            return FormCoefficients::default();
        }
        let (fx, fy) = self.charts;
        // du = dt / s in the form's charts
        let s2 = CHART_SCALE * CHART_SCALE;
        let mut c = FormCoefficients::default();
        match self.case {
            Case::Source => c.a = phi / s2,
            Case::Target => c.b = phi / s2,
            Case::Mixed => c.c = phi / s2,
            Case::MixedConjugate => c.e = phi / s2,
        }
        c.change_charts(x, fx, cx, y, fy, cy)
    }

    fn support(&self) -> Support {
        Support::Local(self.charts.0, self.charts.1)
    }

    fn norm_bound(&self) -> f64 {
        self.sup
    }

    fn has_mixed(&self) -> bool {
        matches!(self.case, Case::Mixed | Case::MixedConjugate)
    }
}

pub fn build_case_test_form(
    case: Case,
    charts: (Chart, Chart),
    label: &str,
    phi: impl Fn(C64, C64) -> C64 + Send + Sync + 'static,
) -> Result<CaseForm> {
    CaseForm::new(case, charts, label, phi)
}
