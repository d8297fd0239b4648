//! Fourier series on the 4-torus, truncation bounds, and the cut-off
//! test functions of the localized setting.

use std::collections::HashMap;
use std::f64::consts::PI;

use rustfft::FftPlanner;
use serde::Serialize;

use super::atlas::smooth_step;
use crate::error::{Error, Result};
use crate::point::C64;

pub type Index4 = [i64; 4];

/// `|I| = max |i_s|`.
pub fn index_norm(i: &Index4) -> i64 {
    i.iter().map(|v| v.abs()).max().unwrap_or(0)
}

/// Coefficients `a_I` of a 1-periodic function of four real variables.
#[derive(Clone, Debug)]
pub struct FourierCoefficients {
    /// Largest `|I|` stored.
    pub max_index: i64,
    coeffs: HashMap<Index4, C64>,
}

impl FourierCoefficients {
    pub fn get(&self, i: &Index4) -> Option<C64> {
        self.coeffs.get(i).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Index4, &C64)> {
        self.coeffs.iter()
    }

    /// `max |a_I| |I|^k` over `lo <= |I| <= hi`.
    pub fn weighted_max(&self, k: i32, lo: i64, hi: i64) -> f64 {
        self.coeffs
            .iter()
            .filter(|(i, _)| (lo..=hi).contains(&index_norm(i)))
            .map(|(i, a)| a.norm() * (index_norm(i) as f64).powi(k))
            .fold(0.0, f64::max)
    }
}

/// `a_I` for `|I| <= n` from an `m^4` product grid (`m > 2n`), by a 4-D FFT.
pub fn fourier_coefficients<F>(phi: F, n: usize, m: usize) -> Result<FourierCoefficients>
where
    F: Fn([f64; 4]) -> C64,
{
    if n == 0 || m <= 2 * n {
        return Err(Error::invalid(format!("grid size {m} must exceed twice the truncation {n}")));
    }
    let total = m.pow(4);
    let mut data = vec![C64::new(0.0, 0.0); total];
    let h = 1.0 / m as f64;
    for (k, v) in data.iter_mut().enumerate() {
        let idx = [k / (m * m * m), (k / (m * m)) % m, (k / m) % m, k % m];
        *v = phi(idx.map(|i| i as f64 * h));
    }
    let fft = FftPlanner::new().plan_fft_forward(m);
    let mut line = vec![C64::new(0.0, 0.0); m];
    for axis in 0..4 {
        let stride = m.pow(3 - axis as u32);
        for base in 0..total {
            if (base / stride) % m != 0 {
                continue;
            }
            for (t, l) in line.iter_mut().enumerate() {
                *l = data[base + t * stride];
            }
            fft.process(&mut line);
            for (t, l) in line.iter().enumerate() {
                data[base + t * stride] = *l;
            }
        }
    }
    let scale = 1.0 / total as f64;
    let n = n as i64;
    let wrap = |i: i64| i.rem_euclid(m as i64) as usize;
    let mut coeffs = HashMap::new();
    for i1 in -n..=n {
        for i2 in -n..=n {
            for i3 in -n..=n {
                for i4 in -n..=n {
                    let k = ((wrap(i1) * m + wrap(i2)) * m + wrap(i3)) * m + wrap(i4);
                    coeffs.insert([i1, i2, i3, i4], data[k] * scale);
                }
            }
        }
    }
    Ok(FourierCoefficients { max_index: n, coeffs })
}

/// Number of `I` with `|I| = m`.
pub fn shell_count(m: u64) -> u128 {
    if m == 0 {
        return 1;
    }
    let (a, b) = ((2 * m + 1) as u128, (2 * m - 1) as u128);
    a.pow(4) - b.pow(4)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TruncationBound {
    pub n: u64,
    /// `80 / N`.
    pub bound: f64,
    /// `sum_{N < |I| <= n_big} |I|^-5`, summed shell by shell.
    pub direct_tail: f64,
    pub n_big: u64,
}

pub fn truncation_error_bound(n: u64) -> Result<TruncationBound> {
    if n == 0 {
        return Err(Error::invalid("truncation order must be positive"));
    }
    let n_big = 200_000u64.max(100 * n);
    // sum small terms first
    let direct_tail = ((n + 1)..=n_big).rev().map(|m| shell_count(m) as f64 / (m as f64).powi(5)).sum();
    Ok(TruncationBound { n, bound: 80.0 / n as f64, direct_tail, n_big })
}

/// The bump `(16 (t - 1/4)(3/4 - t))^6` on `(1/4, 3/4)`, zero elsewhere; it is C5.
pub fn bump_profile(t: f64) -> f64 {
    if t <= 0.25 || t >= 0.75 {
        0.0
    } else {
        (16.0 * (t - 0.25) * (0.75 - t)).powi(6)
    }
}

/// Ascending coefficients of the bump in `s = t - 1/2`.
fn bump_polynomial() -> Vec<f64> {
    // 16 (t - 1/4)(3/4 - t) = 1 - 16 s^2
    let base = [1.0, 0.0, -16.0];
    let mut p = vec![1.0];
    for _ in 0..6 {
        let mut q = vec![0.0; p.len() + 2];
        for (i, &a) in p.iter().enumerate() {
            for (j, &b) in base.iter().enumerate() {
                q[i + j] += a * b;
            }
        }
        p = q;
    }
    p
}

fn poly_derivative(p: &[f64]) -> Vec<f64> {
    p.iter().enumerate().skip(1).map(|(i, &c)| c * i as f64).collect()
}

fn poly_eval(p: &[f64], t: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

/// `sup |p^(k)|` on the support, for `k = 0..=5`.
pub fn bump_derivative_sups() -> [f64; 6] {
    let mut p = bump_polynomial();
    let mut out = [0.0; 6];
    for o in out.iter_mut() {
        let m = 20_000;
        *o = (0..=m).map(|i| poly_eval(&p, -0.25 + 0.5 * i as f64 / m as f64).abs()).fold(0.0, f64::max);
        p = poly_derivative(&p);
    }
    out
}

/// `||phi||_{C^5}` of the product bump `prod p(x_s)`, as the largest sup of a
/// partial derivative of order at most 5.
pub fn product_bump_c5_norm() -> f64 {
    let s = bump_derivative_sups();
    let mut best = 0.0f64;
    for a in 0..=5usize {
        for b in 0..=(5 - a) {
            for c in 0..=(5 - a - b) {
                for d in 0..=(5 - a - b - c) {
                    best = best.max(s[a] * s[b] * s[c] * s[d]);
                }
            }
        }
    }
    best
}

/// The product bump normalized to unit C5 norm.
pub fn normalized_c5_bump() -> impl Fn([f64; 4]) -> C64 {
    let norm = product_bump_c5_norm();
    move |x: [f64; 4]| C64::new(x.iter().map(|&t| bump_profile(t.rem_euclid(1.0))).product::<f64>() / norm, 0.0)
}

/// One-dimensional factor of the cut-off: 1 on `[0.22, 0.78]`, 0 outside `(0.02, 0.98)`.
pub fn cutoff_profile(t: f64) -> f64 {
    smooth_step((t - 0.02) / 0.2) * smooth_step((0.98 - t) / 0.2)
}

/// `chi(u) = cutoff(Re u) cutoff(Im u)`: supported in `U`, equal to 1 near `U0`.
pub fn cutoff(u: C64) -> f64 {
    cutoff_profile(u.re) * cutoff_profile(u.im)
}

/// `max |d^a chi|` over `|a| <= 2`, by finite differences on a grid of `U`.
pub fn cutoff_c2_norm() -> f64 {
    let m = 2000;
    let h = 1.0 / m as f64;
    let vals: Vec<f64> = (0..=m).map(|i| cutoff_profile(i as f64 * h)).collect();
    let s0 = vals.iter().cloned().fold(0.0, f64::max);
    let s1 = (1..m).map(|i| ((vals[i + 1] - vals[i - 1]) / (2.0 * h)).abs()).fold(0.0, f64::max);
    let s2 = (1..m).map(|i| ((vals[i + 1] - 2.0 * vals[i] + vals[i - 1]) / (h * h)).abs()).fold(0.0, f64::max);
    // product structure: the worst mixed or pure derivative
    s0.max(s1 * s0).max(s2 * s0).max(s1 * s1)
}

/// `varphi_I(u) = exp(2 pi i (i1 u1 + i2 u2)) chi(u)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FourierTestFunction {
    pub index: [i64; 2],
}

impl FourierTestFunction {
    pub fn eval(&self, u: C64) -> C64 {
        let phase = 2.0 * PI * (self.index[0] as f64 * u.re + self.index[1] as f64 * u.im);
        C64::from_polar(cutoff(u), phase)
    }
}
