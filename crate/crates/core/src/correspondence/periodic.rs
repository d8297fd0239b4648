use serde::Serialize;

use super::{Correspondence, IterateBudget};
use crate::error::{Error, Result};
use crate::point::{Point, C64};
use crate::poly::roots::{roots_of, RootSet, DEFAULT_TOLERANCE};

/// Cap on `d1^n + d2^n`, the degree of the diagonal restriction.
pub const MAX_PERIODIC_DEGREE: u64 = 1024;

/// Branches of `f^n` closer than this (chordally) at a periodic point make the
/// multiplier ambiguous.
pub const BRANCH_SEPARATION: f64 = 1e-5;

#[derive(Clone, Debug, Serialize)]
pub struct PeriodicPointRecord {
    #[serde(serialize_with = "serialize_point")]
    pub point: Point,
    pub period: u32,
    pub multiplicity: usize,
    /// `None` where the multiplier is undefined.
    pub multiplier_modulus: Option<f64>,
}

fn serialize_point<S: serde::Serializer>(p: &Point, s: S) -> std::result::Result<S::Ok, S::Error> {
    match p.affine_value() {
        Some(z) => [z.re, z.im].serialize(s),
        None => "inf".serialize(s),
    }
}

fn check_periodic_budget(f: &Correspondence, n: u32) -> Result<()> {
    let total = (f.d1() as u64)
        .checked_pow(n)
        .and_then(|a| (f.d2() as u64).checked_pow(n).map(|b| a + b))
        .unwrap_or(u64::MAX);
    if total > MAX_PERIODIC_DEGREE {
        return Err(Error::DegreeCap { what: "d1^n + d2^n", value: total, cap: MAX_PERIODIC_DEGREE });
    }
    Ok(())
}

/// Fixed points of `f^n` with multiplicities; their total is `d1^n + d2^n`.
pub fn periodic_points(f: &Correspondence, n: u32, budget: &IterateBudget) -> Result<Vec<PeriodicPointRecord>> {
    check_periodic_budget(f, n)?;
    let g = f.iterate(n, budget)?;
    let q = g.graph().diagonal_restriction();
    let scale = q.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale <= 1e-10 {
        return Err(Error::DiagonalComponent);
    }
    let (m, k) = g.graph().bidegree();
    let rs = roots_of(&q, m + k, DEFAULT_TOLERANCE)?;
    let mut out = Vec::with_capacity(rs.clusters.len());
    for cl in rs.clusters {
        out.push(PeriodicPointRecord {
            point: cl.point,
            period: n,
            multiplicity: cl.multiplicity,
            multiplier_modulus: multiplier(&g, &cl.point),
        });
    }
    Ok(out)
}

/// Intersection of the graph of `f^n` with the graph of the Moebius map
/// `x -> (c + d x) / (a + b x)` given by `twist = [[a, b], [c, d]]`.
/// The total multiplicity is again `d1^n + d2^n`; for correspondences whose
/// graph contains the diagonal this is the count on a perturbed diagonal.
pub fn twisted_coincidences(
    f: &Correspondence,
    n: u32,
    budget: &IterateBudget,
    twist: [[C64; 2]; 2],
) -> Result<RootSet> {
    check_periodic_budget(f, n)?;
    let g = f.iterate(n, budget)?;
    let q = g.graph().moebius_restriction(twist);
    if q.iter().all(|c| c.norm() <= 1e-10) {
        return Err(Error::DiagonalComponent);
    }
    let (m, k) = g.graph().bidegree();
    roots_of(&q, m + k, DEFAULT_TOLERANCE)
}

fn multiplier(g: &Correspondence, p: &Point) -> Option<f64> {
    let fiber = g.forward_fiber(p).ok()?;
    let mut by_dist: Vec<(f64, usize)> = fiber
        .clusters
        .iter()
        .enumerate()
        .map(|(i, c)| (c.point.chordal_distance(p), i))
        .collect();
    by_dist.sort_by(|a, b| a.0.total_cmp(&b.0));
    let &(_, best) = by_dist.first()?;
    if by_dist.get(1).is_some_and(|&(d, _)| d < BRANCH_SEPARATION) {
        return None;
    }
    let cl = &fiber.clusters[best];
    // evaluate on the diagonal point itself so both charts agree
    g.branch_derivative(p, p, cl.multiplicity).map(|d| d.norm())
}
