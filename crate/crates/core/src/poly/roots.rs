//! All-roots solver for complex polynomials with projective completion.
//!
//! Roots are found by Aberth-Ehrlich simultaneous iteration (companion
//! matrix eigenvalues as fallback). Multiplicities are assigned by merging
//! approximations whose Weierstrass inclusion disks overlap or which lie
//! within `CLUSTER_RADIUS * max(1, |z|)` of each other. Coefficients that
//! vanish below `ZERO_COEFF_TOL` relative to the largest one are treated as
//! exact zeros, producing roots at 0 (low end) or at infinity (high end).

use nalgebra::DMatrix;

use super::univariate::{derivative, horner, horner_abs, max_modulus, nth_derivative, UnivariatePoly};
use crate::error::{Error, Result};
use crate::point::{Chart, Point, C64};

pub const CLUSTER_RADIUS: f64 = 1e-6;
pub const ZERO_COEFF_TOL: f64 = 1e-14;
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
const MAX_ABERTH_ITER: usize = 800;

#[derive(Clone, Debug)]
pub struct RootCluster {
    pub point: Point,
    pub multiplicity: usize,
}

#[derive(Clone, Debug)]
pub struct RootSet {
    pub clusters: Vec<RootCluster>,
    /// Largest projective residual `|P(h0, h1)| / max|c|` over cluster centers.
    pub max_residual: f64,
}

impl RootSet {
    pub fn total_multiplicity(&self) -> usize {
        self.clusters.iter().map(|c| c.multiplicity).sum()
    }

    /// Roots repeated according to multiplicity.
    pub fn flatten(&self) -> Vec<Point> {
        self.clusters
            .iter()
            .flat_map(|c| std::iter::repeat(c.point).take(c.multiplicity))
            .collect()
    }
}

/// Roots of `p` completed to `nominal_degree` with points at infinity.
pub fn roots(p: &UnivariatePoly, nominal_degree: Option<usize>, tolerance: f64) -> Result<RootSet> {
    roots_of(p.coeffs(), nominal_degree.unwrap_or(p.degree()), tolerance)
}

pub fn roots_of(coeffs: &[C64], nominal_degree: usize, tolerance: f64) -> Result<RootSet> {
    let scale = max_modulus(coeffs);
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::Degenerate);
    }
    let thresh = ZERO_COEFF_TOL * scale;
    let hi = coeffs.iter().rposition(|c| c.norm() > thresh).unwrap();
    if hi > nominal_degree {
        return Err(Error::invalid(format!(
            "polynomial of degree {hi} exceeds nominal degree {nominal_degree}"
        )));
    }
    let lo = coeffs.iter().position(|c| c.norm() > thresh).unwrap();
    let core: Vec<C64> = coeffs[lo..=hi].iter().map(|c| c / scale).collect();
    let d = hi - lo;

    let mut approx = match d {
        0 => Vec::new(),
        1 => vec![-core[0] / core[1]],
        2 => quadratic(&core),
        _ => match aberth(&core) {
            Ok(z) => z,
            Err(partial) => companion(&core).unwrap_or(partial),
        },
    };
    for z in approx.iter_mut() {
        if !z.re.is_finite() || !z.im.is_finite() {
            *z = C64::new(1e300, 0.0);
        }
    }

    let mut members: Vec<(Point, usize)> = Vec::with_capacity(d + 2);
    if lo > 0 {
        members.push((Point::affine(C64::new(0.0, 0.0)), lo));
    }
    for cluster in cluster_roots(&core, &approx) {
        members.push(cluster);
    }
    if nominal_degree > hi {
        members.push((Point::infinity(), nominal_degree - hi));
    }
    // Merge the special clusters at 0 / infinity with numerically adjacent roots.
    let mut clusters: Vec<RootCluster> = Vec::new();
    for (p, m) in members {
        if let Some(c) = clusters.iter_mut().find(|c| {
            let special = c.point.is_infinity()
                || c.point.affine_value() == Some(C64::new(0.0, 0.0))
                || p.is_infinity()
                || p.affine_value() == Some(C64::new(0.0, 0.0));
            special && c.point.chordal_distance(&p) <= CLUSTER_RADIUS
        }) {
            if !c.point.is_infinity() && c.point.affine_value() != Some(C64::new(0.0, 0.0)) {
                c.point = p;
            }
            c.multiplicity += m;
        } else {
            clusters.push(RootCluster { point: p, multiplicity: m });
        }
    }

    let max_residual = clusters
        .iter()
        .map(|c| projective_residual(coeffs, nominal_degree, &c.point) / scale)
        .fold(0.0, f64::max);
    let set = RootSet { clusters, max_residual };
    debug_assert_eq!(set.total_multiplicity(), nominal_degree);
    if !(max_residual <= tolerance) {
        return Err(Error::NoConvergence {
            residual: max_residual,
            converged: 0,
            total: d,
            partial: approx,
        });
    }
    Ok(set)
}

/// `|P(h0, h1)|` for the homogenization of `coeffs` to `degree` at a normalized point.
pub fn projective_residual(coeffs: &[C64], degree: usize, p: &Point) -> f64 {
    let (h0, h1) = p.homogeneous();
    let mut acc = C64::new(0.0, 0.0);
    for (k, c) in coeffs.iter().enumerate() {
        acc += c * h1.powu(k as u32) * h0.powu((degree - k) as u32);
    }
    acc.norm()
}

fn quadratic(c: &[C64]) -> Vec<C64> {
    let (a, b, cc) = (c[2], c[1], c[0]);
    let disc = (b * b - 4.0 * a * cc).sqrt();
    // choose the sign that avoids cancellation
    let q = if (b.conj() * disc).re >= 0.0 { -(b + disc) / 2.0 } else { -(b - disc) / 2.0 };
    if q.norm() == 0.0 {
        return vec![C64::new(0.0, 0.0); 2];
    }
    vec![q / a, cc / q]
}

/// Newton correction `p/p'`, evaluated through the reversed polynomial when
/// `|z| > 1`, together with a flag for "residual at rounding level".
fn newton_step(c: &[C64], z: C64) -> (C64, bool) {
    let d = c.len() - 1;
    let eps = f64::EPSILON;
    if z.norm() <= 1.0 {
        let (p, dp) = horner_pair(c.iter().rev(), z);
        let bound = horner_abs(c, z.norm());
        let conv = p.norm() <= 4.0 * (d as f64 + 1.0) * eps * bound;
        (safe_div(p, dp), conv)
    } else {
        let u = z.inv();
        let (pr, dpr) = horner_pair(c.iter(), u);
        let bound = c.iter().fold(0.0, |acc, ck| acc * u.norm() + ck.norm());
        let conv = pr.norm() <= 4.0 * (d as f64 + 1.0) * eps * bound;
        let denom = pr * d as f64 - u * dpr;
        (safe_div(z * pr, denom), conv)
    }
}

fn horner_pair<'a>(coeffs_high_to_low: impl Iterator<Item = &'a C64>, z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for &ck in coeffs_high_to_low {
        dp = dp * z + p;
        p = p * z + ck;
    }
    (p, dp)
}

fn safe_div(a: C64, b: C64) -> C64 {
    if b.norm() == 0.0 {
        a * 1e-8
    } else {
        a / b
    }
}

fn aberth(c: &[C64]) -> std::result::Result<Vec<C64>, Vec<C64>> {
    let d = c.len() - 1;
    let radius = (c[0].norm() / c[d].norm()).powf(1.0 / d as f64);
    let mut z: Vec<C64> = (0..d)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / d as f64 + 0.4;
            C64::from_polar(radius, theta)
        })
        .collect();
    let mut done = vec![false; d];
    for _ in 0..MAX_ABERTH_ITER {
        let mut all = true;
        for i in 0..d {
            if done[i] {
                continue;
            }
            let (n, conv) = newton_step(c, z[i]);
            if conv {
                done[i] = true;
                continue;
            }
            all = false;
            let mut s = C64::new(0.0, 0.0);
            for j in 0..d {
                if j != i {
                    let diff = z[i] - z[j];
                    if diff.norm() > 0.0 {
                        s += diff.inv();
                    }
                }
            }
            let denom = C64::new(1.0, 0.0) - n * s;
            let step = if denom.norm() > 0.0 { n / denom } else { n };
            z[i] -= step;
            if step.norm() <= 2.0 * f64::EPSILON * z[i].norm() {
                done[i] = true;
            }
        }
        if all {
            return Ok(z);
        }
    }
    Err(z)
}

fn companion(c: &[C64]) -> Option<Vec<C64>> {
    let d = c.len() - 1;
    let lead = c[d];
    let mut m = DMatrix::<C64>::zeros(d, d);
    for i in 1..d {
        m[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for i in 0..d {
        m[(i, d - 1)] = -c[i] / lead;
    }
    let eig = nalgebra::linalg::Schur::new(m).eigenvalues()?;
    let mut z: Vec<C64> = eig.iter().copied().collect();
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (n, conv) = newton_step(c, *zi);
            if conv {
                break;
            }
            *zi -= n;
        }
    }
    Some(z)
}

/// Groups approximations into clusters and polishes each cluster center.
fn cluster_roots(c: &[C64], z: &[C64]) -> Vec<(Point, usize)> {
    let d = z.len();
    if d == 0 {
        return Vec::new();
    }
    let lead = c[d];
    let radii: Vec<f64> = (0..d)
        .map(|i| {
            let zi = z[i];
            let r = if zi.norm() <= 1.0 {
                let mut prod = lead;
                for (j, &zj) in z.iter().enumerate() {
                    if j != i {
                        prod *= zi - zj;
                    }
                }
                (horner(c, zi) / prod).norm()
            } else {
                // W_i = z_i p~(1/z_i) / (lead * prod_j (1 - z_j/z_i))
                let u = zi.inv();
                let rev = c.iter().fold(C64::new(0.0, 0.0), |acc, &ck| acc * u + ck);
                let mut prod = lead;
                for (j, &zj) in z.iter().enumerate() {
                    if j != i {
                        prod *= C64::new(1.0, 0.0) - zj * u;
                    }
                }
                (zi * rev / prod).norm()
            };
            if r.is_finite() {
                d as f64 * r
            } else {
                0.0
            }
        })
        .collect();

    let mut parent: Vec<usize> = (0..d).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut k = i;
        while p[k] != r {
            let next = p[k];
            p[k] = r;
            k = next;
        }
        r
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let dist = (z[i] - z[j]).norm();
            let tol = CLUSTER_RADIUS * z[i].norm().max(z[j].norm()).max(1.0);
            if dist <= radii[i] + radii[j] || dist <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in 0..d {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|(root, _)| *root == r) {
            Some((_, g)) => g.push(i),
            None => groups.push((r, vec![i])),
        }
    }

    let mut groups: Vec<Vec<usize>> = groups.into_iter().map(|(_, g)| g).collect();
    // Rounding in the coefficients splits a k-fold root into k roots roughly
    // eps^(1/k) apart, beyond the reach of the inclusion radii above.
    // Pieces of a split root need not look multiple in pairs, so each group is
    // tested together with growing sets of its nearest neighbours.
    'merge: loop {
        for a in 0..groups.len() {
            let ca = mean(z, &groups[a]);
            let mut near: Vec<(f64, usize)> = (0..groups.len())
                .filter(|&b| b != a)
                .map(|b| {
                    let cb = mean(z, &groups[b]);
                    ((ca - cb).norm() / ca.norm().max(cb.norm()).max(1.0), b)
                })
                .filter(|&(d, _)| d <= MERGE_REACH)
                .collect();
            near.sort_by(|x, y| x.0.total_cmp(&y.0));
            let mut joined = groups[a].clone();
            for t in 0..near.len() {
                joined.extend_from_slice(&groups[near[t].1]);
                if is_pseudo_multiple_root(c, z, &joined) {
                    let mut absorbed: Vec<usize> = near[..=t].iter().map(|&(_, b)| b).collect();
                    groups[a] = joined;
                    absorbed.sort_unstable_by(|x, y| y.cmp(x));
                    for b in absorbed {
                        groups.swap_remove(b);
                    }
                    continue 'merge;
                }
            }
        }
        break;
    }

    groups
        .into_iter()
        .map(|idx| {
            let k = idx.len();
            let mean_mod = idx.iter().map(|&i| z[i].norm()).sum::<f64>() / k as f64;
            let chart = if mean_mod <= 1.0 { Chart::Zero } else { Chart::One };
            let local: Vec<C64> = idx
                .iter()
                .map(|&i| if chart == Chart::Zero { z[i] } else { z[i].inv() })
                .collect();
            let mut center = local.iter().sum::<C64>() / k as f64;
            let spread = local.iter().map(|l| (l - center).norm()).fold(0.0, f64::max);
            let poly: Vec<C64> = if chart == Chart::Zero {
                c.to_vec()
            } else {
                c.iter().rev().copied().collect()
            };
            center = polish(&poly, center, k, spread);
            (Point::from_chart(chart, center), k)
        })
        .collect()
}

const MERGE_REACH: f64 = 1e-2;
/// Relative coefficient noise assumed by the multiple-root test.
const COEFF_NOISE: f64 = 1e-12;

fn mean(z: &[C64], idx: &[usize]) -> C64 {
    idx.iter().map(|&i| z[i]).sum::<C64>() / idx.len() as f64
}

/// Whether the roots `idx` are consistent with one k-fold root of a polynomial
/// whose coefficients each carry absolute noise `COEFF_NOISE * max|c|`: at
/// their center, the Taylor coefficients of order `j < k` must be as small as
/// the perturbation of a k-fold root allows. Coefficients obtained by
/// restricting a bihomogeneous form can be far below their own noise, so the
/// noise is not taken relative to each coefficient.
fn is_pseudo_multiple_root(c: &[C64], z: &[C64], idx: &[usize]) -> bool {
    let k = idx.len();
    let outside = idx.iter().map(|&i| z[i].norm()).sum::<f64>() / k as f64 > 1.0;
    let (poly, m): (Vec<C64>, C64) = if outside {
        (c.iter().rev().copied().collect(), idx.iter().map(|&i| z[i].inv()).sum::<C64>() / k as f64)
    } else {
        (c.to_vec(), mean(z, idx))
    };
    if poly.len() <= k {
        return false;
    }
    let r = m.norm();
    let floor = vec![C64::new(max_modulus(&poly), 0.0); poly.len()];
    let mut fact = 1.0;
    let mut taylor = Vec::with_capacity(k + 1);
    for j in 0..=k {
        if j > 0 {
            fact *= j as f64;
        }
        let d = nth_derivative(&poly, j);
        taylor.push((horner(&d, m).norm() / fact, horner_abs(&nth_derivative(&floor, j), r) / fact));
    }
    let top = taylor[k].0;
    if top <= COEFF_NOISE * taylor[k].1 {
        return false;
    }
    let base = COEFF_NOISE * taylor[0].1;
    let mut binom = 1.0;
    for (j, &(t, scale)) in taylor.iter().enumerate().take(k) {
        if j > 0 {
            binom = binom * (k - j + 1) as f64 / j as f64;
        }
        let allowed = 10.0 * binom * (base.powf((k - j) as f64 / k as f64) * top.powf(j as f64 / k as f64)).max(COEFF_NOISE * scale);
        if t > allowed {
            return false;
        }
    }
    true
}

/// Newton on the `(k-1)`-th derivative, which has a simple root at a k-fold root.
fn polish(c: &[C64], start: C64, k: usize, spread: f64) -> C64 {
    let g = nth_derivative(c, k - 1);
    let dg = derivative(&g);
    let limit = spread.max(1e-12) * 4.0 + 1e-14;
    let mut z = start;
    let mut best = horner(&g, z).norm();
    for _ in 0..4 {
        let dv = horner(&dg, z);
        if dv.norm() == 0.0 {
            break;
        }
        let next = z - horner(&g, z) / dv;
        let val = horner(&g, next).norm();
        if (next - start).norm() > limit || !(val < best) {
            break;
        }
        z = next;
        best = val;
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn has_root(set: &RootSet, z: C64, mult: usize) -> bool {
        set.clusters.iter().any(|cl| {
            cl.multiplicity == mult && cl.point.chordal_distance(&Point::affine(z)) < 1e-9
        })
    }

    #[test]
    fn z_squared_minus_one() {
        let s = roots(&UnivariatePoly::from_real(&[-1.0, 0.0, 1.0]), Some(2), 1e-8).unwrap();
        assert_eq!(s.total_multiplicity(), 2);
        assert!(has_root(&s, c(1.0, 0.0), 1));
        assert!(has_root(&s, c(-1.0, 0.0), 1));
    }

    #[test]
    fn double_root_at_zero() {
        let s = roots(&UnivariatePoly::from_real(&[0.0, 0.0, 1.0]), Some(2), 1e-8).unwrap();
        assert_eq!(s.clusters.len(), 1);
        assert_eq!(s.clusters[0].multiplicity, 2);
        assert_eq!(s.clusters[0].point.affine_value(), Some(c(0.0, 0.0)));
    }

    #[test]
    fn projective_completion_adds_infinity() {
        let s = roots(&UnivariatePoly::from_real(&[1.0, 0.0, 1.0]), Some(3), 1e-8).unwrap();
        assert_eq!(s.total_multiplicity(), 3);
        assert!(has_root(&s, c(0.0, 1.0), 1));
        assert!(has_root(&s, c(0.0, -1.0), 1));
        assert!(s.clusters.iter().any(|cl| cl.point.is_infinity() && cl.multiplicity == 1));
    }

    #[test]
    fn zero_polynomial_is_degenerate() {
        let err = roots(&UnivariatePoly::from_real(&[0.0, 0.0]), Some(1), 1e-8).unwrap_err();
        assert!(matches!(err, Error::Degenerate));
    }

    #[test]
    fn quadruple_roots_are_clustered() {
        let r = [c(0.3, 0.2), c(-0.3, -0.2)];
        let mut rs = Vec::new();
        for &x in &r {
            rs.extend(std::iter::repeat(x).take(4));
        }
        let p = UnivariatePoly::from_roots(&rs);
        let s = roots(&p, None, 1e-8).unwrap();
        assert_eq!(s.clusters.len(), 2, "{:?}", s.clusters);
        for cl in &s.clusters {
            assert_eq!(cl.multiplicity, 4);
            let z = cl.point.affine_value().unwrap();
            assert!(r.iter().any(|x| (x - z).norm() < 1e-8), "{z}");
        }
    }

    #[test]
    fn perturbed_quadruple_roots_are_clustered() {
        let r = [c(0.45, 0.04), c(-0.45, -0.04)];
        let mut rs = Vec::new();
        for &x in &r {
            rs.extend(std::iter::repeat(x).take(4));
        }
        let mut coeffs = UnivariatePoly::from_roots(&rs).coeffs().to_vec();
        for (i, v) in coeffs.iter_mut().enumerate() {
            *v *= 1.0 + 3e-15 * ((i as f64) * 1.7).sin();
        }
        let s = roots_of(&coeffs, 8, 1e-8).unwrap();
        assert_eq!(s.clusters.len(), 2, "{:?}", s.clusters);
        for cl in &s.clusters {
            assert_eq!(cl.multiplicity, 4);
            let z = cl.point.affine_value().unwrap();
            assert!(r.iter().any(|x| (x - z).norm() < 1e-6), "{z}");
        }
    }

    #[test]
    fn small_quadruple_roots_with_absolute_noise_are_clustered() {
        // (y^2 - x^2)^4 at |x| ~ 0.15: the low coefficients sit far below 1e-16
        let x = c(0.1446, 0.019);
        let rs: Vec<C64> = std::iter::repeat(x).take(4).chain(std::iter::repeat(-x).take(4)).collect();
        let mut coeffs = UnivariatePoly::from_roots(&rs).coeffs().to_vec();
        for (i, v) in coeffs.iter_mut().enumerate() {
            *v += c(1e-16 * ((i as f64) * 2.3).sin(), 1e-16 * ((i as f64) * 0.7).cos());
        }
        let s = roots_of(&coeffs, 8, 1e-8).unwrap();
        assert_eq!(s.clusters.len(), 2, "{:?}", s.clusters);
        for cl in &s.clusters {
            assert_eq!(cl.multiplicity, 4);
            let z = cl.point.affine_value().unwrap();
            assert!((z - x).norm().min((z + x).norm()) < 1e-6, "{z}");
        }
    }

    #[test]
    fn close_simple_roots_stay_apart() {
        let p = UnivariatePoly::from_roots(&[c(0.5, 0.0), c(0.5 + 1e-3, 0.0), c(-1.0, 0.2)]);
        let s = roots(&p, None, 1e-8).unwrap();
        assert_eq!(s.clusters.len(), 3);
    }

    #[test]
    fn high_degree_roots_of_unity() {
        let mut coeffs = vec![C64::new(0.0, 0.0); 257];
        coeffs[0] = c(-0.3, -0.1);
        coeffs[256] = c(1.0, 0.0);
        let s = roots_of(&coeffs, 256, 1e-8).unwrap();
        assert_eq!(s.clusters.len(), 256);
        let target = c(0.3, 0.1);
        for cl in &s.clusters {
            let z = cl.point.affine_value().unwrap();
            assert!((z.powu(256) - target).norm() < 1e-10);
        }
    }

    #[test]
    fn large_roots_are_accurate_in_second_chart() {
        let p = UnivariatePoly::from_roots(&[c(1e5, 0.0), c(0.5, 0.5), c(-3.0, 1.0)]);
        let s = roots(&p, None, 1e-8).unwrap();
        assert!(s
            .clusters
            .iter()
            .any(|cl| (cl.point.coord(Chart::One) - c(1e-5, 0.0)).norm() < 1e-15));
    }
}
