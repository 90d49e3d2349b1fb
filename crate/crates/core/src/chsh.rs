//! CHSH correlators, the relaxed bound `B(I, S)` and the thresholds a given
//! violation imposes on indeterminism and signalling.

use serde::Serialize;

use crate::error::{check_range, Error, Result};
use crate::measures::measure_all;
use crate::model::{behavior_of, marginals, Behavior, JointDistribution, LambdaModel, PerPair};

/// Tolerance used to call a bound saturated.
pub const EQUALITY_TOLERANCE: f64 = 1e-9;

/// Expected product of outcomes, `P(++) + P(--) - P(+-) - P(-+)`.
pub fn correlator(dist: &JointDistribution) -> f64 {
    let [pp, pm, mp, mm] = dist.probs();
    pp + mm - pm - mp
}

/// The same correlator through the `(c, m, n)` parametrization,
/// `1 + 4c - 2(m + n)`.
pub fn correlator_from_marginals(dist: &JointDistribution) -> f64 {
    let mg = marginals(dist);
    1.0 + 4.0 * dist.probs()[0] - 2.0 * (mg.m + mg.n)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChshValue {
    pub value: f64,
    /// Correlators in setting-pair order `XY, X'Y, XY', X'Y'`.
    pub correlators: [f64; 4],
}

impl ChshValue {
    /// Amount by which the value exceeds the local bound 2.
    pub fn violation(&self) -> f64 {
        self.value - 2.0
    }
}

pub fn chsh_of(dists: &PerPair<JointDistribution>) -> ChshValue {
    let e = dists.map(correlator).0;
    ChshValue {
        value: e[0] + e[1] + e[2] - e[3],
        correlators: e,
    }
}

pub fn chsh(behavior: &Behavior) -> ChshValue {
    chsh_of(&behavior.dists)
}

/// Tight upper bound on the CHSH combination for models with indeterminism
/// at most `i` and signalling at most `s`.
pub fn bound_b(i: f64, s: f64) -> Result<f64> {
    check_range("I", i, 0.0, 0.5, "[0, 1/2]")?;
    check_range("S", s, 0.0, 1.0, "[0, 1]")?;
    Ok(if s < gap_signalling(i) { 2.0 + 4.0 * i } else { 4.0 })
}

/// Signalling needed to move a marginal across the gap between `[0, I]` and
/// `[1 - I, 1]`.
pub fn gap_signalling(i: f64) -> f64 {
    1.0 - 2.0 * i
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Thresholds {
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "I_V")]
    pub i_v: f64,
    #[serde(rename = "S_V")]
    pub s_v: f64,
}

impl Thresholds {
    pub fn s_gap(&self, i: f64) -> f64 {
        gap_signalling(i)
    }
}

/// Minimum indeterminism `V/4` and minimum signalling `1 - V/2`, one of which
/// any model producing a CHSH value `2 + V` must reach.
pub fn thresholds_for_violation(v: f64) -> Result<Thresholds> {
    check_range("V", v, 0.0, 2.0, "[0, 2]")?;
    Ok(Thresholds {
        v,
        i_v: v / 4.0,
        s_v: 1.0 - v / 2.0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Verdict {
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub pass: bool,
    pub equality: bool,
}

/// Checks `B(I, S) >= 2 + V` for a freedom-of-choice model. A failing verdict
/// means an implementation bug, not a property of the model.
pub fn check_model_consistency(model: &LambdaModel) -> Result<Verdict> {
    let report = measure_all(model);
    if !report.freedom_of_choice {
        return Err(Error::NotFreeChoice { m: report.m });
    }
    let value = chsh(&behavior_of(model)).value;
    let v = (value - 2.0).max(0.0);
    let b = bound_b(report.i, report.s)?;
    Ok(Verdict {
        v,
        i: report.i,
        s: report.s,
        b,
        pass: b >= 2.0 + v - EQUALITY_TOLERANCE,
        equality: (b - 2.0 - v).abs() <= EQUALITY_TOLERANCE,
    })
}
