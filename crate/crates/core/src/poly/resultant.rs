//! Elimination of a shared variable by Sylvester resultants.
//!
//! The resultant is never expanded symbolically: it is sampled at a product
//! grid of roots of unity in the two surviving affine variables and the
//! coefficients are recovered by an inverse discrete Fourier transform.

use std::f64::consts::PI;

use super::bihomogeneous::BihomogeneousPolynomial;
use crate::error::{Error, Result};
use crate::point::{Chart, Point, C64};

/// `Res_t(A(x, t), B(t, z))` as a form in `(x, z)` of bidegree `(mA * mB, nA * nB)`,
/// where `A` has bidegree `(mA, nA)` in `(x, t)` and `B` has `(mB, nB)` in `(t, z)`.
pub fn sylvester_resultant(a: &BihomogeneousPolynomial, b: &BihomogeneousPolynomial) -> Result<BihomogeneousPolynomial> {
    let (ma, na) = a.bidegree();
    let (mb, nb) = b.bidegree();
    if na == 0 || mb == 0 {
        return Err(Error::invalid("eliminated variable must appear with degree >= 1 in both forms"));
    }
    let tol = 1e-13;
    let a_lead_zero = (0..=ma).all(|i| a.coeff(i, na).norm() <= tol);
    let b_lead_zero = (0..=nb).all(|j| b.coeff(mb, j).norm() <= tol);
    if a_lead_zero && b_lead_zero {
        return Err(Error::IllPosedElimination);
    }

    let big_m = ma * mb;
    let big_n = na * nb;
    let xs = unit_roots(big_m + 1);
    let zs = unit_roots(big_n + 1);
    let size = na + mb;

    // Values of the resultant on the grid, row-major in (x node, z node).
    let mut values = vec![C64::new(0.0, 0.0); (big_m + 1) * (big_n + 1)];
    for (k, &x) in xs.iter().enumerate() {
        let ax = a.restrict_x(&Point::affine(x), Chart::Zero); // degree na in t
        for (l, &z) in zs.iter().enumerate() {
            let bz = b.restrict_y(&Point::affine(z), Chart::Zero); // degree mb in t
            values[k * (big_n + 1) + l] = determinant(sylvester_matrix(&ax, &bz), size);
        }
    }
    // nodes have modulus one, so their homogeneous coordinates are exactly (1, x)

    let coeffs = inverse_dft_2d(&values, big_m + 1, big_n + 1);
    BihomogeneousPolynomial::new(big_m, big_n, coeffs)
}

fn unit_roots(n: usize) -> Vec<C64> {
    (0..n)
        .map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64))
        .collect()
}

/// Sylvester matrix of two polynomials given by ascending coefficients with
/// nominal degrees `p = f.len() - 1` and `q = g.len() - 1`.
pub fn sylvester_matrix(f: &[C64], g: &[C64]) -> Vec<C64> {
    let p = f.len() - 1;
    let q = g.len() - 1;
    let s = p + q;
    let mut m = vec![C64::new(0.0, 0.0); s * s];
    for r in 0..q {
        for (k, &fk) in f.iter().rev().enumerate() {
            m[r * s + r + k] = fk;
        }
    }
    for r in 0..p {
        for (k, &gk) in g.iter().rev().enumerate() {
            m[(q + r) * s + r + k] = gk;
        }
    }
    m
}

/// Determinant by LU factorization with partial pivoting.
pub fn determinant(mut m: Vec<C64>, n: usize) -> C64 {
    let mut det = C64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i * n + col].norm().total_cmp(&m[j * n + col].norm()))
            .unwrap();
        let pv = m[pivot * n + col];
        if pv.norm() == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if pivot != col {
            for k in 0..n {
                m.swap(pivot * n + k, col * n + k);
            }
            det = -det;
        }
        det *= pv;
        for r in (col + 1)..n {
            let factor = m[r * n + col] / pv;
            if factor.norm() == 0.0 {
                continue;
            }
            for k in col..n {
                let v = m[col * n + k];
                m[r * n + k] -= factor * v;
            }
        }
    }
    det
}

/// Recovers `c[a][b]` from samples `v[k][l] = sum c[a][b] w1^(ak) w2^(bl)`.
fn inverse_dft_2d(v: &[C64], rows: usize, cols: usize) -> Vec<C64> {
    let mut tmp = vec![C64::new(0.0, 0.0); rows * cols];
    let wr = unit_roots(rows);
    let wc = unit_roots(cols);
    for k in 0..rows {
        for b in 0..cols {
            let mut s = C64::new(0.0, 0.0);
            for l in 0..cols {
                s += v[k * cols + l] * wc[(b * l) % cols].conj();
            }
            tmp[k * cols + b] = s / cols as f64;
        }
    }
    let mut out = vec![C64::new(0.0, 0.0); rows * cols];
    for a in 0..rows {
        for b in 0..cols {
            let mut s = C64::new(0.0, 0.0);
            for k in 0..rows {
                s += tmp[k * cols + b] * wr[(a * k) % rows].conj();
            }
            out[a * cols + b] = s / rows as f64;
        }
    }
    out
}
