//! Removal of fiber components: binary-form factors in one variable pair only.

use serde::Serialize;

use super::bihomogeneous::BihomogeneousPolynomial;
use super::roots::roots_of;
use super::univariate::synthetic_division;
use crate::error::Result;
use crate::point::{Point, C64};

/// Relative tolerance below which a coefficient row is considered to vanish.
pub const FIBER_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FiberVariable {
    /// A factor in the source pair: the vertical fiber `{x} x P1`.
    Source,
    /// A factor in the target pair: the horizontal fiber `P1 x {y}`.
    Target,
}

#[derive(Clone, Debug, Serialize)]
pub struct FiberFactor {
    pub variable: FiberVariable,
    /// Affine coordinate of the fiber, `None` for the point at infinity.
    pub at: Option<(f64, f64)>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct StripReport {
    pub removed: Vec<FiberFactor>,
    pub warning: Option<String>,
}

/// Strips fiber factors from `p`. With `expected` set, a result whose bidegree
/// still exceeds it is flagged "unstripped extraneous factor" in the report.
pub fn strip_fiber_factors(
    p: &BihomogeneousPolynomial,
    expected: Option<(usize, usize)>,
) -> Result<(BihomogeneousPolynomial, StripReport)> {
    let mut report = StripReport::default();
    let mut cur = p.normalized()?;
    // source-variable factors act on rows of the coefficient array
    cur = strip_source(&cur, FiberVariable::Source, &mut report)?;
    let t = strip_source(&cur.transpose(), FiberVariable::Target, &mut report)?;
    cur = t.transpose().normalized()?;

    if let Some((em, en)) = expected {
        let (m, n) = cur.bidegree();
        if m > em || n > en {
            report.warning = Some(format!(
                "unstripped extraneous factor: bidegree ({m},{n}) exceeds expected ({em},{en})"
            ));
        }
    }
    Ok((cur, report))
}

/// Columns `p_j(x) = sum_i c[i][j] x^i`, as binary forms in the source pair.
fn columns(p: &BihomogeneousPolynomial) -> Vec<Vec<C64>> {
    let (m, n) = p.bidegree();
    (0..=n).map(|j| (0..=m).map(|i| p.coeff(i, j)).collect()).collect()
}

fn from_columns(cols: &[Vec<C64>]) -> Result<BihomogeneousPolynomial> {
    let n = cols.len() - 1;
    let m = cols[0].len() - 1;
    let mut c = vec![C64::new(0.0, 0.0); (m + 1) * (n + 1)];
    for (j, col) in cols.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            c[i * (n + 1) + j] = v;
        }
    }
    BihomogeneousPolynomial::new(m, n, c)
}

fn strip_source(
    p: &BihomogeneousPolynomial,
    variable: FiberVariable,
    report: &mut StripReport,
) -> Result<BihomogeneousPolynomial> {
    let mut cols = columns(p);
    loop {
        let m = cols[0].len() - 1;
        if m == 0 {
            break;
        }
        let scale = cols
            .iter()
            .flat_map(|c| c.iter())
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        let tol = FIBER_TOL * scale;

        // x0 divides: every column has vanishing top coefficient
        if cols.iter().all(|c| c[m].norm() <= tol) {
            for c in cols.iter_mut() {
                c.pop();
            }
            report.removed.push(FiberFactor { variable, at: None });
            continue;
        }
        // x1 divides: every column has vanishing constant term
        if cols.iter().all(|c| c[0].norm() <= tol) {
            for c in cols.iter_mut() {
                c.remove(0);
            }
            report.removed.push(FiberFactor { variable, at: Some((0.0, 0.0)) });
            continue;
        }
        // general factor (x - a): common root of all columns
        let pivot = cols
            .iter()
            .max_by(|a, b| col_norm(a).total_cmp(&col_norm(b)))
            .unwrap()
            .clone();
        let Ok(rs) = roots_of(&pivot, m, 1.0) else { break };
        let mut found = None;
        for cl in &rs.clusters {
            let Some(a) = cl.point.affine_value() else { continue };
            if cols.iter().all(|c| vanishes_at(c, &cl.point)) {
                found = Some(a);
                break;
            }
        }
        match found {
            Some(a) => {
                for c in cols.iter_mut() {
                    let (q, _) = synthetic_division(c, a);
                    *c = q;
                }
                report.removed.push(FiberFactor { variable, at: Some((a.re, a.im)) });
            }
            None => break,
        }
    }
    from_columns(&cols)
}

fn col_norm(c: &[C64]) -> f64 {
    c.iter().map(|x| x.norm_sqr()).sum::<f64>()
}

/// Relative vanishing of the binary form `c` at `pt`.
fn vanishes_at(c: &[C64], pt: &Point) -> bool {
    let d = c.len() - 1;
    let (h0, h1) = pt.homogeneous();
    let mut val = C64::new(0.0, 0.0);
    let mut abs = 0.0;
    for (k, &ck) in c.iter().enumerate() {
        let mono = h1.powu(k as u32) * h0.powu((d - k) as u32);
        val += ck * mono;
        abs += ck.norm() * mono.norm();
    }
    let scale = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
    abs == 0.0 || val.norm() <= FIBER_TOL * scale.max(abs)
}
