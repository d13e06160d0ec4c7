//! Checks of the known upper and lower bounds on `e₁` and `C` at a given
//! product, with the measured slack.

use serde::Serialize;

use super::series::lower_bound_series;
use super::waiting::WaitingTimeEstimate;
use crate::error::Result;
use crate::frac::to_f64;
use crate::product::{m_n_by_formula, script_m, ProductGroup};

/// A point estimate with its 95% half-width (zero for exact values).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub ci95: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { value, ci95: 0.0 }
    }
}

impl From<&WaitingTimeEstimate> for Estimate {
    fn from(e: &WaitingTimeEstimate) -> Self {
        Estimate {
            value: e.mean,
            ci95: e.ci95,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub measured: f64,
    pub ci95: f64,
    /// Distance to the nearest bound; negative when violated outright.
    pub slack: f64,
    pub pass: bool,
}

impl BoundCheck {
    /// `lower − ci ≤ measured ≤ upper + ci`.
    pub fn new(
        name: impl Into<String>,
        lower: Option<f64>,
        upper: Option<f64>,
        e: Estimate,
    ) -> Self {
        let below = lower.map_or(f64::INFINITY, |l| e.value - l);
        let above = upper.map_or(f64::INFINITY, |u| u - e.value);
        let slack = below.min(above);
        BoundCheck {
            name: name.into(),
            lower,
            upper,
            measured: e.value,
            ci95: e.ci95,
            slack,
            pass: slack >= -e.ci95,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct BoundReport {
    pub checks: Vec<BoundCheck>,
    /// Quantities reported without a pass/fail verdict.
    pub reported: Vec<(String, f64)>,
}

impl BoundReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Checks every applicable bound for the supplied estimates of `e₁(G)` and
/// `C(G)`. Bounds that depend on a single repeated factor are only checked
/// for direct powers.
pub fn theorem_bounds(
    g: &ProductGroup,
    e1: Option<Estimate>,
    cheb: Option<Estimate>,
) -> Result<BoundReport> {
    let mut report = BoundReport::default();
    let k = g.k() as f64;
    let log_k = k.ln();

    if let Some(e) = e1 {
        let upper = g
            .factors
            .iter()
            .map(|(f, _)| log_k / (f.invariants.l as f64).ln())
            .fold(f64::NEG_INFINITY, f64::max)
            + 6.0;
        report.checks.push(BoundCheck::new(
            "e1 <= max_i log k / log l(T_i) + 6",
            None,
            Some(upper),
            e,
        ));
        let m = script_m(&m_n_by_formula(g));
        report.checks.push(BoundCheck::new(
            "ceil(M(G)) - 4 <= e1",
            Some(m.ceil() - 4.0),
            None,
            e,
        ));
    }

    let Some(t) = g.power_of() else {
        return Ok(report);
    };
    let log_l = (t.invariants.l as f64).ln();
    let log_alpha = to_f64(&t.invariants.alpha).ln();

    if let Some(e) = e1 {
        let centre = log_k / log_l;
        report.checks.push(BoundCheck::new(
            "log k / log l - 3 <= e1 <= log k / log l + 6",
            Some(centre - 3.0),
            Some(centre + 6.0),
            e,
        ));
        report
            .reported
            .push(("c_T(k) = e1 - log k / log l".into(), e.value - centre));
    }
    if let Some(c) = cheb {
        report.checks.push(BoundCheck::new(
            "C >= (1 - 1/e) log k / log alpha",
            Some((1.0 - (-1.0f64).exp()) * log_k / log_alpha),
            None,
            c,
        ));
        let series = lower_bound_series(&t.invariants.alpha, g.k() as u64)?;
        report.checks.push(BoundCheck::new(
            "C >= sum_t 1 - (1 - alpha^-t)^k",
            Some(series.float),
            None,
            c,
        ));
        report.reported.push((
            "gamma = C - log k / log alpha".into(),
            c.value - log_k / log_alpha,
        ));
        if let Some(e) = e1 {
            report.reported.push(("C - e1".into(), c.value - e.value));
        }
    }
    Ok(report)
}
