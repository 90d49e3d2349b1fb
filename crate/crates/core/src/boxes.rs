//! Single-entry models that saturate the relaxed bound, plus deterministic
//! product boxes.
//!
//! Both parametrized families put `(I, 0, 0, 1 - I)` on `XY`, `X'Y` and
//! `XY'`; they differ on `X'Y'`. The `flip` option relabels `+` and `-` on
//! both sides, which moves every marginal from `I` to `1 - I`.

use serde::Serialize;

use crate::error::{check_range, Result};
use crate::model::{JointDistribution, LambdaModel, Outcome, PerPair};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoxSpec {
    Pr,
    /// Reaches `2 + 4I` with no signalling.
    NoSignal { i: f64, flip: bool },
    /// Reaches 4 with signalling `1 - 2I`.
    Signalling { i: f64, flip: bool },
    Deterministic {
        a_x: Outcome,
        a_xp: Outcome,
        b_y: Outcome,
        b_yp: Outcome,
    },
}

impl BoxSpec {
    pub fn build(&self) -> Result<LambdaModel> {
        match *self {
            BoxSpec::Pr => Ok(make_pr_box()),
            BoxSpec::NoSignal { i, flip } => make_nosignal_box_with(i, flip),
            BoxSpec::Signalling { i, flip } => make_signalling_box_with(i, flip),
            BoxSpec::Deterministic {
                a_x,
                a_xp,
                b_y,
                b_yp,
            } => Ok(make_deterministic_box(a_x, a_xp, b_y, b_yp)),
        }
    }
}

pub fn make_pr_box() -> LambdaModel {
    // Exact at I = 1/2, so this cannot fail.
    signalling_family(0.5, false, "pr-box")
}

pub fn make_nosignal_box(i: f64) -> Result<LambdaModel> {
    make_nosignal_box_with(i, false)
}

pub fn make_nosignal_box_with(i: f64, flip: bool) -> Result<LambdaModel> {
    check_range("I", i, 0.0, 0.5, "[0, 1/2]")?;
    let p = JointDistribution::new_unchecked([i, 0.0, 0.0, 1.0 - i]);
    let last = JointDistribution::new_unchecked([0.0, i, i, 1.0 - 2.0 * i]);
    Ok(single_box(p, last, flip, "nosignal-box", i))
}

pub fn make_signalling_box(i: f64) -> Result<LambdaModel> {
    make_signalling_box_with(i, false)
}

pub fn make_signalling_box_with(i: f64, flip: bool) -> Result<LambdaModel> {
    check_range("I", i, 0.0, 0.5, "[0, 1/2]")?;
    Ok(signalling_family(i, flip, "signalling-box"))
}

fn signalling_family(i: f64, flip: bool, kind: &str) -> LambdaModel {
    let p = JointDistribution::new_unchecked([i, 0.0, 0.0, 1.0 - i]);
    let last = JointDistribution::new_unchecked([0.0, i, 1.0 - i, 0.0]);
    single_box(p, last, flip, kind, i)
}

fn single_box(
    p: JointDistribution,
    last: JointDistribution,
    flip: bool,
    kind: &str,
    i: f64,
) -> LambdaModel {
    let (p, last) = if flip {
        (p.flipped(), last.flipped())
    } else {
        (p, last)
    };
    LambdaModel::single(kind, PerPair([p, p, p, last])).with_meta(serde_json::json!({
        "kind": kind,
        "I": i,
        "flip": flip,
    }))
}

/// Each observer's outcome fixed per own setting, independent of the other side.
pub fn make_deterministic_box(a_x: Outcome, a_xp: Outcome, b_y: Outcome, b_yp: Outcome) -> LambdaModel {
    use crate::model::{FirstSetting, SecondSetting};
    let dists = PerPair::from_fn(|pair| {
        let a = match pair.first() {
            FirstSetting::X => a_x,
            FirstSetting::XPrime => a_xp,
        };
        let b = match pair.second() {
            SecondSetting::Y => b_y,
            SecondSetting::YPrime => b_yp,
        };
        JointDistribution::point(a, b)
    });
    LambdaModel::single(format!("det {a_x}{a_xp} {b_y}{b_yp}"), dists).with_meta(serde_json::json!({
        "kind": "deterministic",
        "outcomes": [a_x.value(), a_xp.value(), b_y.value(), b_yp.value()],
    }))
}

/// All 16 deterministic product boxes.
pub fn all_deterministic_boxes() -> Vec<LambdaModel> {
    use Outcome::*;
    let mut out = Vec::with_capacity(16);
    for a_x in [Plus, Minus] {
        for a_xp in [Plus, Minus] {
            for b_y in [Plus, Minus] {
                for b_yp in [Plus, Minus] {
                    out.push(make_deterministic_box(a_x, a_xp, b_y, b_yp));
                }
            }
        }
    }
    out
}
