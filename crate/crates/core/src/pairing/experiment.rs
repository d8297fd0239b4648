//! Convergence experiments: pairings against the limit current for `n = 1..n_max`
//! and exponential rate fits.

use std::fmt::Write as _;

use serde::Serialize;

use super::forms::SharedForm;
use super::graph::{pair_graph_current_levels, pair_symbolic, PairingEstimate, Strategy};
use super::limit::{pair_limit_current, LimitCurrent};
use crate::correspondence::Correspondence;
use crate::error::{Error, Result};
use crate::quadrature::SphereGrid;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PairingRow {
    pub n: usize,
    pub pairing: (f64, f64),
    pub limit: (f64, f64),
    pub abs_error: f64,
    /// Fine/coarse grid disagreement plus three standard errors.
    pub noise: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum RateFit {
    Fitted { rate: f64, r_squared: f64, used_rows: Vec<usize> },
    Indeterminate { usable_rows: usize },
}

impl RateFit {
    pub fn rate(&self) -> Option<f64> {
        match self {
            RateFit::Fitted { rate, .. } => Some(*rate),
            RateFit::Indeterminate { .. } => None,
        }
    }

    pub fn r_squared(&self) -> Option<f64> {
        match self {
            RateFit::Fitted { r_squared, .. } => Some(*r_squared),
            RateFit::Indeterminate { .. } => None,
        }
    }
}

/// Least-squares fit of `ln(error)` against `n` over rows whose error exceeds
/// `noise_factor` times their noise; rate is `exp(slope)`.
pub fn fit_rate(rows: &[(usize, f64, f64)], noise_factor: f64) -> RateFit {
    let used: Vec<(usize, f64)> = rows
        .iter()
        .filter(|(_, err, noise)| *err > noise_factor * noise && *err > 0.0 && err.is_finite())
        .map(|&(n, e, _)| (n, e.ln()))
        .collect();
    if used.len() < 3 {
        return RateFit::Indeterminate { usable_rows: used.len() };
    }
    let k = used.len() as f64;
    let mx = used.iter().map(|(n, _)| *n as f64).sum::<f64>() / k;
    let my = used.iter().map(|(_, y)| y).sum::<f64>() / k;
    let sxx: f64 = used.iter().map(|(n, _)| (*n as f64 - mx).powi(2)).sum();
    let sxy: f64 = used.iter().map(|(n, y)| (*n as f64 - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let ss_tot: f64 = used.iter().map(|(_, y)| (y - my).powi(2)).sum();
    let ss_res: f64 = used.iter().map(|(n, y)| (y - my - slope * (*n as f64 - mx)).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    RateFit::Fitted { rate: slope.exp(), r_squared, used_rows: used.iter().map(|(n, _)| *n).collect() }
}

#[derive(Clone, Debug, Serialize)]
pub struct PairingReport {
    pub form_id: String,
    pub rows: Vec<PairingRow>,
    pub fit: RateFit,
    pub noise_floor: f64,
    pub jittered_nodes: usize,
}

#[derive(Serialize)]
struct Summary<'a> {
    form_id: &'a str,
    fitted_rate: Option<f64>,
    fit_quality: Option<f64>,
    noise_floor: f64,
}

impl PairingReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,pairing_re,pairing_im,limit_re,limit_im,abs_error\n");
        for r in &self.rows {
            writeln!(
                s,
                "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                r.n, r.pairing.0, r.pairing.1, r.limit.0, r.limit.1, r.abs_error
            )
            .unwrap();
        }
        s
    }

    /// `{form_id, fitted_rate, fit_quality, noise_floor}`; the rate is `null`
    /// when the fit is indeterminate.
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::to_value(Summary {
            form_id: &self.form_id,
            fitted_rate: self.fit.rate(),
            fit_quality: self.fit.r_squared(),
            noise_floor: self.noise_floor,
        })
        .expect("plain struct")
    }

    /// Scatter of `log10(error)` against `n` with the fitted line.
    pub fn to_svg(&self) -> String {
        let (w, h, pad) = (480.0, 320.0, 40.0);
        let pts: Vec<(f64, f64)> =
            self.rows.iter().filter(|r| r.abs_error > 0.0).map(|r| (r.n as f64, r.abs_error.log10())).collect();
        let mut s = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
        );
        writeln!(s, "<title>{}: log10 error vs n</title>", self.form_id).unwrap();
        if pts.is_empty() {
            s.push_str("</svg>\n");
            return s;
        }
        let (x0, x1) = (pts.iter().map(|p| p.0).fold(f64::MAX, f64::min), pts.iter().map(|p| p.0).fold(f64::MIN, f64::max));
        let (y0, y1) = (pts.iter().map(|p| p.1).fold(f64::MAX, f64::min), pts.iter().map(|p| p.1).fold(f64::MIN, f64::max));
        let sx = |x: f64| pad + (x - x0) / (x1 - x0).max(1e-12) * (w - 2.0 * pad);
        let sy = |y: f64| h - pad - (y - y0) / (y1 - y0).max(1e-12) * (h - 2.0 * pad);
        writeln!(s, "<line x1=\"{pad}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>", h - pad, w - pad, h - pad).unwrap();
        writeln!(s, "<line x1=\"{pad}\" y1=\"{pad}\" x2=\"{pad}\" y2=\"{}\" stroke=\"black\"/>", h - pad).unwrap();
        for (x, y) in &pts {
            writeln!(s, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"steelblue\"/>", sx(*x), sy(*y)).unwrap();
        }
        if let RateFit::Fitted { rate, used_rows, .. } = &self.fit {
            // line through the mean of the used points with slope log10(rate)
            let used: Vec<&(f64, f64)> = pts.iter().filter(|p| used_rows.contains(&(p.0 as usize))).collect();
            let k = used.len() as f64;
            let mx = used.iter().map(|p| p.0).sum::<f64>() / k;
            let my = used.iter().map(|p| p.1).sum::<f64>() / k;
            let m = rate.log10();
            let (ya, yb) = (my + m * (x0 - mx), my + m * (x1 - mx));
            writeln!(
                s,
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"firebrick\"/>",
                sx(x0),
                sy(ya.clamp(y0 - 1.0, y1 + 1.0)),
                sx(x1),
                sy(yb.clamp(y0 - 1.0, y1 + 1.0))
            )
            .unwrap();
            writeln!(s, "<text x=\"{}\" y=\"20\" font-size=\"12\">rate {:.4}</text>", pad, rate).unwrap();
        }
        s.push_str("</svg>\n");
        s
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentGrids {
    pub fine: SphereGrid,
    pub coarse: SphereGrid,
}

impl ExperimentGrids {
    pub fn standard() -> Self {
        ExperimentGrids { fine: SphereGrid::square(96).expect("grid"), coarse: SphereGrid::square(48).expect("grid") }
    }
}

/// Per-level, per-form pairings under a strategy.
pub fn pairings_by_level(
    f: &Correspondence,
    forms: &[SharedForm],
    n_max: usize,
    strategy: &Strategy,
    grid: &SphereGrid,
) -> Result<(Vec<Vec<PairingEstimate>>, usize)> {
    match strategy {
        Strategy::Tree(mode) => {
            let lv = pair_graph_current_levels(f, n_max, forms, *mode, grid)?;
            Ok((lv.levels, lv.jittered_nodes))
        }
        Strategy::Symbolic => {
            let mut levels = Vec::with_capacity(n_max);
            let mut jit = 0;
            for n in 1..=n_max {
                let lv = pair_symbolic(f, n, forms, grid)?;
                jit += lv.jittered_nodes;
                levels.push(lv.levels.into_iter().next().unwrap_or_default());
            }
            Ok((levels, jit))
        }
    }
}

/// Runs `n = 1..=n_max` for every form on the fine and coarse grids and fits the rate.
pub fn convergence_experiment(
    f: &Correspondence,
    forms: &[SharedForm],
    n_max: usize,
    strategy: &Strategy,
    grids: &ExperimentGrids,
    limit: &LimitCurrent,
) -> Result<Vec<PairingReport>> {
    if n_max == 0 {
        return Err(Error::invalid("n_max must be positive"));
    }
    if f.d1() > f.d2() {
        return Err(Error::invalid(
            "the normalized currents d2^-n [Gamma_n] diverge when d1 > d2; run the experiment on the adjoint",
        ));
    }
    let (fine, jit) = pairings_by_level(f, forms, n_max, strategy, &grids.fine)?;
    let (coarse, _) = pairings_by_level(f, forms, n_max, strategy, &grids.coarse)?;
    let mut out = Vec::with_capacity(forms.len());
    for (j, form) in forms.iter().enumerate() {
        let lf = pair_limit_current(limit, form.as_ref(), &grids.fine);
        let lc = pair_limit_current(limit, form.as_ref(), &grids.coarse);
        let rows: Vec<PairingRow> = (0..n_max)
            .map(|k| {
                let p = fine[k][j];
                let q = coarse[k][j];
                PairingRow {
                    n: k + 1,
                    pairing: (p.value.re, p.value.im),
                    limit: (lf.re, lf.im),
                    abs_error: (p.value - lf).norm(),
                    noise: (p.value - q.value).norm() + (lf - lc).norm() + 3.0 * p.standard_error,
                }
            })
            .collect();
        let fit = fit_rate(&rows.iter().map(|r| (r.n, r.abs_error, r.noise)).collect::<Vec<_>>(), 10.0);
        let noise_floor = rows.iter().map(|r| r.noise).fold(0.0, f64::max);
        out.push(PairingReport { form_id: form.id(), rows, fit, noise_floor, jittered_nodes: jit });
    }
    Ok(out)
}
