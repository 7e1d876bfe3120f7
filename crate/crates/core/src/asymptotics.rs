//! Normalising growth curves by `e^{-hR}` and judging whether the result
//! settles to a constant.

use alloc::format;
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Convergent,
    Oscillatory,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Convergent => "convergent",
            Verdict::Oscillatory => "oscillatory",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyzeOptions {
    /// Fraction of the radius range, at the top, used for the estimate.
    pub window: f64,
    pub osc_threshold: f64,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            window: 0.3,
            osc_threshold: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticsReport {
    pub h_used: f64,
    /// `(R, value·e^{-hR})` over the whole curve.
    pub normalized: Vec<(f64, f64)>,
    /// Smallest radius in the top window.
    pub window_start: f64,
    /// Mean of the normalised values over the top window.
    pub c_estimate: f64,
    /// `max |v - C| / C` over the top window.
    pub fluctuation: f64,
    /// Sign alternations of the detrended window whose swing exceeds the
    /// threshold.
    pub alternations: usize,
    pub verdict: Verdict,
    /// `(residue, residue / h)`, when a residue was supplied.
    pub residue_comparison: Option<(f64, f64)>,
}

impl AsymptoticsReport {
    pub fn with_residue(mut self, residue: f64) -> Self {
        self.residue_comparison = Some((residue, residue / self.h_used));
        self
    }
}

/// Minimum number of curve points.
pub const MIN_POINTS: usize = 10;

pub fn analyze(samples: &[(f64, f64)], h: f64, opts: &AnalyzeOptions) -> Result<AsymptoticsReport> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "h = {h}: no exponential asymptotic in the subexponential regime"
        )));
    }
    if samples.len() < MIN_POINTS {
        return Err(Error::InsufficientData(format!(
            "need at least {MIN_POINTS} points, got {}",
            samples.len()
        )));
    }
    if !(opts.window > 0.0 && opts.window <= 1.0) || !(opts.osc_threshold > 0.0) {
        return Err(Error::InvalidArgument(
            "window must lie in (0, 1] and the threshold be positive".into(),
        ));
    }
    if samples.windows(2).any(|w| !(w[0].0 < w[1].0))
        || samples.iter().any(|s| !s.1.is_finite() || s.1 < 0.0)
    {
        return Err(Error::InvalidArgument(
            "radii must increase and values be finite and nonnegative".into(),
        ));
    }
    let normalized: Vec<(f64, f64)> = samples
        .iter()
        .map(|&(r, v)| (r, v * math::exp(-h * r)))
        .collect();
    let (r0, r1) = (samples[0].0, samples[samples.len() - 1].0);
    let window_start = r1 - opts.window * (r1 - r0);
    let win: Vec<(f64, f64)> = normalized
        .iter()
        .copied()
        .filter(|&(r, _)| r >= window_start - 1e-12 * r1.abs().max(1.0))
        .collect();
    if win.len() < 3 {
        return Err(Error::InsufficientData(
            "fewer than 3 points in the top window".into(),
        ));
    }
    let c = win.iter().map(|p| p.1).sum::<f64>() / win.len() as f64;
    let fluctuation = if c > 0.0 {
        win.iter().map(|p| (p.1 - c).abs() / c).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let alternations = if c > 0.0 {
        swings(&win, c, opts.osc_threshold)
    } else {
        0
    };
    let verdict = if fluctuation < opts.osc_threshold {
        Verdict::Convergent
    } else if alternations >= 3 {
        Verdict::Oscillatory
    } else {
        Verdict::Inconclusive
    };
    Ok(AsymptoticsReport {
        h_used: h,
        normalized,
        window_start,
        c_estimate: c,
        fluctuation,
        alternations,
        verdict,
        residue_comparison: None,
    })
}

/// Counts sign changes of the residuals from a least-squares line, between
/// runs whose extremes differ by more than `threshold·c`.
fn swings(win: &[(f64, f64)], c: f64, threshold: f64) -> usize {
    let n = win.len() as f64;
    let mx = win.iter().map(|p| p.0).sum::<f64>() / n;
    let my = win.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = win.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = win.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    // extremes of consecutive same-sign runs
    let mut runs: Vec<f64> = Vec::new();
    for &(r, v) in win {
        let res = v - (my + slope * (r - mx));
        if res.abs() <= 1e-12 * c {
            continue;
        }
        match runs.last_mut() {
            Some(last) if (*last > 0.0) == (res > 0.0) => {
                if res.abs() > last.abs() {
                    *last = res;
                }
            }
            _ => runs.push(res),
        }
    }
    runs.windows(2)
        .filter(|w| (w[0] - w[1]).abs() > threshold * c)
        .count()
}

/// `C / D` from a volume report and an arc-count report on the same `h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantComparison {
    pub ratio: f64,
    /// `∫_0^∞ e^{-u} u² du`, the factor a one-line relation between the two
    /// constants would put here; shown for comparison, never asserted.
    pub displayed_factor: f64,
}

pub fn compare_constants(
    report_v: &AsymptoticsReport,
    report_n: &AsymptoticsReport,
) -> Result<ConstantComparison> {
    if report_v.verdict != Verdict::Convergent || report_n.verdict != Verdict::Convergent {
        return Err(Error::NotConvergent);
    }
    let (a, b) = (report_v.h_used, report_n.h_used);
    if (a - b).abs() > 1e-9 * a.abs().max(b.abs()) {
        return Err(Error::MismatchedEntropy { left: a, right: b });
    }
    Ok(ConstantComparison {
        ratio: report_v.c_estimate / report_n.c_estimate,
        displayed_factor: 2.0,
    })
}
