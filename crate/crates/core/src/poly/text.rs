//! Plain-text polynomial files.
//!
//! ```text
//! name square
//! bidegree 2 1
//! 0 1 1.0000000000000000e0 0.0000000000000000e0
//! 2 0 -1.0000000000000000e0 0.0000000000000000e0
//! ```
//!
//! The `name` header is optional. Lines starting with `#` and blank lines are
//! ignored; monomials not listed have coefficient zero. Values are written
//! with 17 significant digits, which round-trips every `f64` exactly.

use std::fmt::Write as _;

use super::bihomogeneous::BihomogeneousPolynomial;
use crate::error::{Error, Result};
use crate::point::C64;

#[derive(Clone, Debug)]
pub struct PolynomialFile {
    pub name: Option<String>,
    pub poly: BihomogeneousPolynomial,
}

pub fn write_polynomial(name: Option<&str>, p: &BihomogeneousPolynomial) -> String {
    let mut out = String::new();
    if let Some(n) = name {
        writeln!(out, "name {n}").unwrap();
    }
    let (m, n) = p.bidegree();
    writeln!(out, "bidegree {m} {n}").unwrap();
    for i in 0..=m {
        for j in 0..=n {
            let c = p.coeff(i, j);
            if c != C64::new(0.0, 0.0) {
                writeln!(out, "{i} {j} {:.16e} {:.16e}", c.re, c.im).unwrap();
            }
        }
    }
    out
}

/// Parses the format above. Coefficients are kept as written (no renormalization).
pub fn read_polynomial(text: &str) -> Result<PolynomialFile> {
    let mut name = None;
    let mut bideg: Option<(usize, usize)> = None;
    let mut terms: Vec<(usize, usize, C64)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: &str| Error::Parse { line: line_no, msg: msg.to_string() };
        let mut tok = line.split_whitespace();
        let head = tok.next().unwrap();
        match head {
            "name" => {
                let rest: Vec<&str> = tok.collect();
                if rest.is_empty() {
                    return Err(err("missing name"));
                }
                name = Some(rest.join(" "));
            }
            "bidegree" => {
                let m = tok.next().and_then(|t| t.parse().ok()).ok_or_else(|| err("bad bidegree"))?;
                let n = tok.next().and_then(|t| t.parse().ok()).ok_or_else(|| err("bad bidegree"))?;
                if tok.next().is_some() {
                    return Err(err("trailing tokens after bidegree"));
                }
                bideg = Some((m, n));
            }
            _ => {
                if bideg.is_none() {
                    return Err(err("monomial before bidegree header"));
                }
                let i: usize = head.parse().map_err(|_| err("bad exponent index"))?;
                let j: usize = tok.next().and_then(|t| t.parse().ok()).ok_or_else(|| err("bad exponent index"))?;
                let re: f64 = tok.next().and_then(|t| t.parse().ok()).ok_or_else(|| err("bad real part"))?;
                let im: f64 = tok.next().and_then(|t| t.parse().ok()).ok_or_else(|| err("bad imaginary part"))?;
                if tok.next().is_some() {
                    return Err(err("trailing tokens after monomial"));
                }
                terms.push((i, j, C64::new(re, im)));
            }
        }
    }
    let (m, n) = bideg.ok_or(Error::Parse { line: 0, msg: "missing bidegree header".into() })?;
    let mut c = vec![C64::new(0.0, 0.0); (m + 1) * (n + 1)];
    for (i, j, v) in terms {
        if i > m || j > n {
            return Err(Error::invalid(format!("monomial ({i},{j}) outside bidegree ({m},{n})")));
        }
        c[i * (n + 1) + j] += v;
    }
    if c.iter().all(|v| *v == C64::new(0.0, 0.0)) {
        return Err(Error::Degenerate);
    }
    Ok(PolynomialFile { name, poly: BihomogeneousPolynomial::raw(m, n, c) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_named_file() {
        let f = read_polynomial("name square\nbidegree 2 1\n0 1 1 0\n2 0 -1 0\n").unwrap();
        assert_eq!(f.name.as_deref(), Some("square"));
        assert_eq!(f.poly.bidegree(), (2, 1));
        assert_eq!(f.poly.coeff(2, 0), C64::new(-1.0, 0.0));
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(matches!(read_polynomial("0 1 1 0\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(read_polynomial("bidegree 1 1\n0 x 1 0\n"), Err(Error::Parse { line: 2, .. })));
        assert!(read_polynomial("bidegree 1 1\n3 0 1 0\n").is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(vals in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 6)) {
            let c: Vec<C64> = vals.iter().map(|&(a, b)| C64::new(a, b)).collect();
            prop_assume!(c.iter().any(|v| v.norm() > 0.0));
            let p = BihomogeneousPolynomial::raw(2, 1, c);
            let back = read_polynomial(&write_polynomial(Some("t"), &p)).unwrap();
            prop_assert_eq!(back.poly, p);
        }
    }
}
