//! Bihomogeneous forms on P1 x P1.
//!
//! The coefficient `c[i][j]` multiplies `x0^(m-i) x1^i y0^(n-j) y1^j`, so in
//! the affine chart pair `(x, y) = (x1/x0, y1/y0)` the form reads
//! `sum c[i][j] x^i y^j`.

use crate::error::{Error, Result};
use crate::point::{Chart, Point, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct BihomogeneousPolynomial {
    m: usize,
    n: usize,
    coeffs: Vec<C64>,
}

impl BihomogeneousPolynomial {
    /// Row-major coefficients, `(m + 1) * (n + 1)` entries. Normalizes to max modulus 1.
    pub fn new(m: usize, n: usize, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != (m + 1) * (n + 1) {
            return Err(Error::invalid(format!(
                "bidegree ({m},{n}) needs {} coefficients, got {}",
                (m + 1) * (n + 1),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::invalid("non-finite coefficient"));
        }
        let p = BihomogeneousPolynomial { m, n, coeffs };
        p.normalized()
    }

    /// Unnormalized construction; the caller guarantees the length.
    pub(crate) fn raw(m: usize, n: usize, coeffs: Vec<C64>) -> Self {
        assert_eq!(coeffs.len(), (m + 1) * (n + 1));
        BihomogeneousPolynomial { m, n, coeffs }
    }

    pub fn from_terms(m: usize, n: usize, terms: &[(usize, usize, C64)]) -> Result<Self> {
        let mut c = vec![C64::new(0.0, 0.0); (m + 1) * (n + 1)];
        for &(i, j, v) in terms {
            if i > m || j > n {
                return Err(Error::invalid(format!("monomial ({i},{j}) outside bidegree ({m},{n})")));
            }
            c[i * (n + 1) + j] += v;
        }
        Self::new(m, n, c)
    }

    pub fn bidegree(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn coeff(&self, i: usize, j: usize) -> C64 {
        self.coeffs[i * (self.n + 1) + j]
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn max_modulus(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn normalized(&self) -> Result<Self> {
        let s = self.max_modulus();
        if s == 0.0 {
            return Err(Error::Degenerate);
        }
        Ok(BihomogeneousPolynomial {
            m: self.m,
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| c / s).collect(),
        })
    }

    /// Exchanges the two variable pairs.
    pub fn transpose(&self) -> Self {
        let (m, n) = (self.m, self.n);
        let mut c = vec![C64::new(0.0, 0.0); (m + 1) * (n + 1)];
        for i in 0..=m {
            for j in 0..=n {
                c[j * (m + 1) + i] = self.coeff(i, j);
            }
        }
        BihomogeneousPolynomial { m: n, n: m, coeffs: c }
    }

    pub fn eval(&self, x: &Point, y: &Point) -> C64 {
        let bx = binary_powers(x, self.m);
        let by = binary_powers(y, self.n);
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..=self.m {
            for j in 0..=self.n {
                acc += self.coeff(i, j) * bx[i] * by[j];
            }
        }
        acc
    }

    /// Coefficients of `P(x, .)` as a polynomial in the chart coordinate of `y_chart`,
    /// ascending, with nominal degree `n`.
    pub fn restrict_x(&self, x: &Point, y_chart: Chart) -> Vec<C64> {
        let bx = binary_powers(x, self.m);
        let mut out = vec![C64::new(0.0, 0.0); self.n + 1];
        for j in 0..=self.n {
            let mut s = C64::new(0.0, 0.0);
            for i in 0..=self.m {
                s += self.coeff(i, j) * bx[i];
            }
            let k = match y_chart {
                Chart::Zero => j,
                Chart::One => self.n - j,
            };
            out[k] = s;
        }
        out
    }

    /// Coefficients of `P(., y)` in the chart coordinate of `x_chart`, nominal degree `m`.
    pub fn restrict_y(&self, y: &Point, x_chart: Chart) -> Vec<C64> {
        let by = binary_powers(y, self.n);
        let mut out = vec![C64::new(0.0, 0.0); self.m + 1];
        for i in 0..=self.m {
            let mut s = C64::new(0.0, 0.0);
            for j in 0..=self.n {
                s += self.coeff(i, j) * by[j];
            }
            let k = match x_chart {
                Chart::Zero => i,
                Chart::One => self.m - i,
            };
            out[k] = s;
        }
        out
    }

    /// Dehomogenization in a chart pair.
    pub fn chart_poly(&self, cx: Chart, cy: Chart) -> AffinePoly2 {
        let (m, n) = (self.m, self.n);
        let mut c = vec![C64::new(0.0, 0.0); (m + 1) * (n + 1)];
        for i in 0..=m {
            for j in 0..=n {
                let a = if cx == Chart::Zero { i } else { m - i };
                let b = if cy == Chart::Zero { j } else { n - j };
                c[a * (n + 1) + b] = self.coeff(i, j);
            }
        }
        AffinePoly2 { deg_x: m, deg_y: n, coeffs: c }
    }

    /// `(dP/dx, dP/dy)` in the chart pair, by exact coefficient-wise differentiation.
    pub fn derivative_coefficients(&self, cx: Chart, cy: Chart) -> (AffinePoly2, AffinePoly2) {
        let p = self.chart_poly(cx, cy);
        (p.dx(), p.dy())
    }

    /// Substitutes the y-pair by the x-pair: a binary form of degree `m + n`,
    /// coefficients ascending in `x1`.
    pub fn diagonal_restriction(&self) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.m + self.n + 1];
        for i in 0..=self.m {
            for j in 0..=self.n {
                out[i + j] += self.coeff(i, j);
            }
        }
        out
    }

    /// Substitutes `(y0, y1) = (a x0 + b x1, c x0 + d x1)` for `m = [[a, b], [c, d]]`:
    /// the restriction to the graph of a Moebius map, degree `m + n`, ascending in `x1`.
    pub fn moebius_restriction(&self, mat: [[C64; 2]; 2]) -> Vec<C64> {
        let one = C64::new(1.0, 0.0);
        let powers = |row: [C64; 2]| {
            let mut p = vec![vec![one]];
            for k in 1..=self.n {
                p.push(convolve(&p[k - 1], &row));
            }
            p
        };
        let (p0, p1) = (powers(mat[0]), powers(mat[1]));
        let mut out = vec![C64::new(0.0, 0.0); self.m + self.n + 1];
        for j in 0..=self.n {
            let yj = convolve(&p0[self.n - j], &p1[j]);
            for i in 0..=self.m {
                let c = self.coeff(i, j);
                for (k, v) in yj.iter().enumerate() {
                    out[i + k] += c * v;
                }
            }
        }
        out
    }

    /// `|<P, Q>| / (|P| |Q|)` over coefficient arrays of equal bidegree.
    pub fn correlation(&self, other: &Self) -> f64 {
        if self.bidegree() != other.bidegree() {
            return 0.0;
        }
        let dot: C64 = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b.conj()).sum();
        let na: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let nb: f64 = other.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        dot.norm() / (na * nb)
    }
}

fn convolve(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `[h0^(d-k) h1^k]_{k=0..d}` for the normalized homogeneous coordinates of `p`.
pub(crate) fn binary_powers(p: &Point, d: usize) -> Vec<C64> {
    let (h0, h1) = p.homogeneous();
    let mut p0 = vec![C64::new(1.0, 0.0); d + 1];
    let mut p1 = vec![C64::new(1.0, 0.0); d + 1];
    for k in 1..=d {
        p0[k] = p0[k - 1] * h0;
        p1[k] = p1[k - 1] * h1;
    }
    (0..=d).map(|k| p0[d - k] * p1[k]).collect()
}

/// Dense affine polynomial in two variables; `coeffs[a * (deg_y + 1) + b]` multiplies `x^a y^b`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffinePoly2 {
    pub deg_x: usize,
    pub deg_y: usize,
    pub coeffs: Vec<C64>,
}

impl AffinePoly2 {
    pub fn coeff(&self, a: usize, b: usize) -> C64 {
        self.coeffs[a * (self.deg_y + 1) + b]
    }

    pub fn eval(&self, x: C64, y: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for a in (0..=self.deg_x).rev() {
            let mut row = C64::new(0.0, 0.0);
            for b in (0..=self.deg_y).rev() {
                row = row * y + self.coeff(a, b);
            }
            acc = acc * x + row;
        }
        acc
    }

    /// `sum |c_ab| |x|^a |y|^b`.
    pub fn eval_abs(&self, x: f64, y: f64) -> f64 {
        let mut acc = 0.0;
        for a in (0..=self.deg_x).rev() {
            let mut row = 0.0;
            for b in (0..=self.deg_y).rev() {
                row = row * y + self.coeff(a, b).norm();
            }
            acc = acc * x + row;
        }
        acc
    }

    pub fn dx(&self) -> AffinePoly2 {
        let (dx, dy) = (self.deg_x, self.deg_y);
        let nx = dx.saturating_sub(1);
        let mut c = vec![C64::new(0.0, 0.0); (nx + 1) * (dy + 1)];
        for a in 1..=dx {
            for b in 0..=dy {
                c[(a - 1) * (dy + 1) + b] = self.coeff(a, b) * a as f64;
            }
        }
        AffinePoly2 { deg_x: nx, deg_y: dy, coeffs: c }
    }

    pub fn dy(&self) -> AffinePoly2 {
        let (dx, dy) = (self.deg_x, self.deg_y);
        let ny = dy.saturating_sub(1);
        let mut c = vec![C64::new(0.0, 0.0); (dx + 1) * (ny + 1)];
        for a in 0..=dx {
            for b in 1..=dy {
                c[a * (ny + 1) + b - 1] = self.coeff(a, b) * b as f64;
            }
        }
        AffinePoly2 { deg_x: dx, deg_y: ny, coeffs: c }
    }
}
