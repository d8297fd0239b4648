//! Normalized push-forward and pull-back of square-integrable (1,0)-forms and
//! estimates of their operator norm.
//!
//! A form `g dz` is stored by its coefficient at each grid node, written in the
//! node's preferred chart. The squared norm is `int i g dz ^ conj(g dz) = 2 int |g|^2 dA`,
//! which does not depend on the chart.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::correspondence::Correspondence;
use crate::error::{Error, Result};
use crate::oneform::FamilyForm;
use crate::point::{chart_jacobian, fs_density, Chart, Point, C64};
use crate::quadrature::SphereGrid;

/// Largest fraction of grid nodes that may sit on ramification values.
pub const MAX_FLAGGED_FRACTION: f64 = 0.01;

/// A (1,0)-form given by its coefficient in any chart.
pub trait FormField: Sync {
    fn coefficient(&self, chart: Chart, t: C64) -> C64;
}

impl<F> FormField for F
where
    F: Fn(Chart, C64) -> C64 + Sync,
{
    fn coefficient(&self, chart: Chart, t: C64) -> C64 {
        self(chart, t)
    }
}

impl FormField for FamilyForm {
    fn coefficient(&self, chart: Chart, t: C64) -> C64 {
        self.eval(chart, t)
    }
}

/// `sum c_k gamma_k` over family members.
#[derive(Clone, Debug)]
pub struct FamilyCombination {
    pub terms: Vec<(C64, FamilyForm)>,
}

impl FormField for FamilyCombination {
    fn coefficient(&self, chart: Chart, t: C64) -> C64 {
        self.terms.iter().map(|(c, g)| c * g.eval(chart, t)).sum()
    }
}

#[derive(Clone, Debug)]
pub struct OneZeroForm {
    /// Coefficient at each node, in the node's chart.
    pub values: Vec<C64>,
}

impl OneZeroForm {
    pub fn sample(grid: &SphereGrid, form: &dyn FormField) -> Self {
        OneZeroForm { values: grid.map(|n| form.coefficient(n.chart, n.local)) }
    }

    pub fn zero(grid: &SphereGrid) -> Self {
        OneZeroForm { values: vec![C64::new(0.0, 0.0); grid.len()] }
    }

    /// `2 int g conj(h) dA`.
    pub fn inner(&self, other: &OneZeroForm, grid: &SphereGrid) -> C64 {
        grid.nodes()
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(n, (a, b))| a * b.conj() * (2.0 * n.weight / n.density()))
            .sum()
    }

    pub fn norm(&self, grid: &SphereGrid) -> f64 {
        self.inner(self, grid).re.max(0.0).sqrt()
    }

    /// `(2 int |g|^2 dA)^(1/2)` with every node written in the given chart.
    pub fn norm_in_chart(&self, grid: &SphereGrid, chart: Chart) -> f64 {
        grid.nodes()
            .iter()
            .zip(&self.values)
            .map(|(n, v)| {
                let g = v * chart_jacobian(&n.point, chart, n.chart);
                2.0 * g.norm_sqr() * n.weight / fs_density(n.point.coord(chart))
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, s: C64) -> Self {
        OneZeroForm { values: self.values.iter().map(|v| v * s).collect() }
    }
}

/// A grid form evaluated anywhere by bilinear interpolation, after moving the
/// four corner values into the requested chart.
pub struct Interpolated<'a> {
    pub form: &'a OneZeroForm,
    pub grid: &'a SphereGrid,
}

impl FormField for Interpolated<'_> {
    fn coefficient(&self, chart: Chart, t: C64) -> C64 {
        let p = Point::from_chart(chart, t);
        let nodes = self.grid.nodes();
        self.grid
            .stencil(&p)
            .iter()
            .filter(|(_, w)| *w != 0.0)
            .map(|&(k, w)| {
                let n = &nodes[k];
                self.form.values[k] * chart_jacobian(&n.point, chart, n.chart) * w
            })
            .sum()
    }
}

/// Branch data of `g` at every node: `(image, multiplicity * derivative)`.
#[derive(Clone, Debug)]
pub struct TransferStencil {
    entries: Vec<Vec<(Point, C64)>>,
    flagged: Vec<bool>,
}

impl TransferStencil {
    /// `(T h)(x) = sum_{y in g(x)} h(y) y'(x)` in the node charts.
    pub fn new(g: &Correspondence, grid: &SphereGrid) -> Result<Self> {
        let per_node: Vec<Result<(Vec<(Point, C64)>, bool)>> = grid.map(|n| {
            let fiber = g.forward_fiber(&n.point)?;
            let mut out = Vec::with_capacity(fiber.clusters.len());
            for c in &fiber.clusters {
                match g.branch_derivative(&n.point, &c.point, c.multiplicity) {
                    Some(d) => out.push((c.point, d * c.multiplicity as f64)),
                    None => return Ok((Vec::new(), true)),
                }
            }
            Ok((out, false))
        });
        let mut entries = Vec::with_capacity(grid.len());
        let mut flagged = Vec::with_capacity(grid.len());
        for r in per_node {
            let (e, f) = r?;
            entries.push(e);
            flagged.push(f);
        }
        let count = flagged.iter().filter(|f| **f).count();
        if count as f64 > MAX_FLAGGED_FRACTION * grid.len() as f64 {
            return Err(Error::GridRefinement { flagged: count, total: grid.len() });
        }
        Ok(TransferStencil { entries, flagged })
    }

    pub fn flagged_count(&self) -> usize {
        self.flagged.iter().filter(|f| **f).count()
    }

    /// Flagged nodes get the value zero.
    pub fn apply(&self, form: &dyn FormField, scale: f64) -> OneZeroForm {
        use rayon::prelude::*;
        let values = self
            .entries
            .par_iter()
            .map(|e| {
                e.iter()
                    .map(|(y, d)| {
                        let (c, t) = y.local();
                        form.coefficient(c, t) * d
                    })
                    .sum::<C64>()
                    * scale
            })
            .collect();
        OneZeroForm { values }
    }
}

/// `f_* gamma` on the grid: `sum_{x in f^-1(y)} g(x) x'(y)` at each node `y`.
pub fn pushforward_form(f: &Correspondence, form: &dyn FormField, grid: &SphereGrid) -> Result<OneZeroForm> {
    Ok(TransferStencil::new(&f.adjoint(), grid)?.apply(form, 1.0))
}

/// `f^* eta` on the grid: `sum_{y in f(x)} h(y) y'(x)` at each node `x`.
pub fn pullback_form(f: &Correspondence, form: &dyn FormField, grid: &SphereGrid) -> Result<OneZeroForm> {
    Ok(TransferStencil::new(f, grid)?.apply(form, 1.0))
}

/// `(f_* gamma)(y)` at a single point, in `y`'s preferred chart; `None` at ramification values.
pub fn pushforward_at(f: &Correspondence, form: &dyn FormField, y: &Point) -> Result<Option<C64>> {
    let fiber = f.backward_fiber(y)?;
    let mut total = C64::new(0.0, 0.0);
    for c in &fiber.clusters {
        let Some(d) = f.inverse_branch_derivative(&c.point, y, c.multiplicity) else {
            return Ok(None);
        };
        let (cx, t) = c.point.local();
        total += form.coefficient(cx, t) * d * c.multiplicity as f64;
    }
    Ok(Some(total))
}

/// `(f^* eta)(x)` at a single point, in `x`'s preferred chart; `None` at ramification points.
pub fn pullback_at(f: &Correspondence, form: &dyn FormField, x: &Point) -> Result<Option<C64>> {
    let fiber = f.forward_fiber(x)?;
    let mut total = C64::new(0.0, 0.0);
    for c in &fiber.clusters {
        let Some(d) = f.branch_derivative(x, &c.point, c.multiplicity) else {
            return Ok(None);
        };
        let (cy, t) = c.point.local();
        total += form.coefficient(cy, t) * d * c.multiplicity as f64;
    }
    Ok(Some(total))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ContractionOptions {
    pub trials: usize,
    pub iterations: usize,
    pub seed: u64,
    /// Nodes per side of the fine grid; the Richardson check uses half as many.
    pub grid: usize,
}

impl Default for ContractionOptions {
    fn default() -> Self {
        ContractionOptions { trials: 64, iterations: 30, seed: 1, grid: 96 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ContractionReport {
    /// Largest `||A gamma|| / ||gamma||` over the trial family, `A = d^-1 f_*`.
    pub lower_bound: f64,
    /// Limiting per-step decay `||A^(k+1) gamma|| / ||A^k gamma||` from the best trial form.
    pub heuristic_estimate: f64,
    /// Power iteration on `A* A`, an estimate of `||A||` on the grid.
    pub norm_estimate: f64,
    pub grid_error: f64,
    pub flags: Vec<String>,
}

struct SingleGrid {
    lower_bound: f64,
    heuristic: f64,
    norm_estimate: f64,
    unstable: bool,
    flagged: usize,
}

/// Lower bound for `||d^-1 f_*||` over the trial family, the decay rate of its
/// iterates, and a power-iteration estimate of the norm.
pub fn contraction_estimate(f: &Correspondence, opts: &ContractionOptions) -> Result<ContractionReport> {
    if f.d1() != f.d2() {
        return Err(Error::invalid(format!(
            "contraction needs a balanced correspondence, got bidegree ({}, {})",
            f.d2(),
            f.d1()
        )));
    }
    if opts.grid < 8 || opts.iterations == 0 {
        return Err(Error::invalid("contraction needs grid >= 8 and at least one iteration"));
    }
    let fine = run_on_grid(f, opts, &SphereGrid::square(opts.grid)?)?;
    let coarse = run_on_grid(f, opts, &SphereGrid::square(opts.grid / 2)?)?;
    let grid_error = (fine.lower_bound - coarse.lower_bound)
        .abs()
        .max((fine.heuristic - coarse.heuristic).abs())
        .max((fine.norm_estimate - coarse.norm_estimate).abs());
    let mut flags = Vec::new();
    if fine.unstable {
        flags.push("unstable".to_string());
    }
    if fine.flagged > 0 {
        flags.push(format!("ramification_nodes={}", fine.flagged));
    }
    if fine.lower_bound > fine.norm_estimate + grid_error + 1e-9 {
        flags.push("lower_bound_exceeds_norm_estimate".to_string());
    }
    Ok(ContractionReport {
        lower_bound: fine.lower_bound,
        heuristic_estimate: fine.heuristic,
        norm_estimate: fine.norm_estimate,
        grid_error,
        flags,
    })
}

fn run_on_grid(f: &Correspondence, opts: &ContractionOptions, grid: &SphereGrid) -> Result<SingleGrid> {
    let d = f.d1() as f64;
    let push = TransferStencil::new(&f.adjoint(), grid)?;
    let pull = TransferStencil::new(f, grid)?;
    let family = FamilyForm::family();
    let basis: Vec<OneZeroForm> = family.iter().map(|g| OneZeroForm::sample(grid, g)).collect();
    let images: Vec<OneZeroForm> = family.iter().map(|g| push.apply(g, 1.0 / d)).collect();
    let k = family.len();
    let gram = |a: &[OneZeroForm], b: &[OneZeroForm]| {
        DMatrix::from_fn(k, k, |i, j| b[j].inner(&a[i], grid))
    };
    let g = gram(&basis, &basis);
    let h = gram(&images, &images);

    // optimum over the span: top eigenvalue of W* H W with W = G^-1/2 on its range
    let eg = SymmetricEigen::new(g.clone());
    let top = eg.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..k).filter(|&i| eg.eigenvalues[i] > 1e-11 * top).collect();
    let w = DMatrix::from_fn(k, keep.len(), |r, c| {
        eg.eigenvectors[(r, keep[c])] / C64::new(eg.eigenvalues[keep[c]].sqrt(), 0.0)
    });
    let m = w.adjoint() * &h * &w;
    let em = SymmetricEigen::new(m);
    let (best, _) = em.eigenvalues.iter().enumerate().fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let coeffs: DVector<C64> = &w * em.eigenvectors.column(best);
    let ratio = |c: &DVector<C64>| {
        let num = (c.adjoint() * &h * c)[(0, 0)].re;
        let den = (c.adjoint() * &g * c)[(0, 0)].re;
        (num / den).max(0.0).sqrt()
    };
    let mut lower_bound = ratio(&coeffs);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.trials {
        let c = DVector::from_fn(k, |_, _| {
            C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
        });
        lower_bound = lower_bound.max(ratio(&c));
    }

    let start = FamilyCombination { terms: coeffs.iter().copied().zip(family.iter().copied()).collect() };
    let start = OneZeroForm::sample(grid, &start);

    // repeated application of A; the dominant modes may be complex, so the
    // ratio is a geometric mean over the second half of the run
    let mut v = start.clone();
    let mut logs = Vec::with_capacity(opts.iterations);
    for _ in 0..opts.iterations {
        let nv = v.norm(grid);
        if nv == 0.0 {
            break;
        }
        v = push.apply(&Interpolated { form: &v.scale(C64::new(1.0 / nv, 0.0)), grid }, 1.0 / d);
        logs.push(v.norm(grid).ln());
    }
    let tail_mean = |from: usize| {
        let t = &logs[from.min(logs.len())..];
        if t.is_empty() {
            f64::NEG_INFINITY
        } else {
            t.iter().sum::<f64>() / t.len() as f64
        }
    };
    let n = logs.len();
    let heuristic = tail_mean(n / 2).exp();
    let unstable = n < 4 || (tail_mean(3 * n / 4) - tail_mean(n / 2)).abs() > 0.05;

    // power iteration on A* A for the norm itself
    let mut v = start;
    let mut norm_estimate = 0.0;
    for _ in 0..opts.iterations {
        let nv = v.norm(grid);
        if nv == 0.0 {
            break;
        }
        let av = push.apply(&Interpolated { form: &v.scale(C64::new(1.0 / nv, 0.0)), grid }, 1.0 / d);
        norm_estimate = av.norm(grid);
        v = pull.apply(&Interpolated { form: &av, grid }, 1.0 / d);
    }
    Ok(SingleGrid {
        lower_bound,
        heuristic: if heuristic.is_finite() { heuristic } else { 0.0 },
        norm_estimate,
        unstable,
        flagged: push.flagged_count().max(pull.flagged_count()),
    })
}
