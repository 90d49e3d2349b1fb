//! Degrees of indeterminism, signalling and measurement dependence.
//!
//! All suprema over hidden variables become maxima over the model's support:
//! entries whose weight is zero under every setting pair are ignored. For
//! binary outcomes a shift in `P(+1)` equals the shift in `P(-1)`, so only the
//! `+1` marginals are compared.

use serde::Serialize;

use crate::model::{marginals, LambdaModel, SettingPair};

/// Which observer's marginals to inspect.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Observer {
    First,
    Second,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeasureReport {
    #[serde(rename = "I1")]
    pub i1: f64,
    #[serde(rename = "I2")]
    pub i2: f64,
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "S_1to2")]
    pub s_1to2: f64,
    #[serde(rename = "S_2to1")]
    pub s_2to1: f64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub freedom_of_choice: bool,
}

/// Largest shift of the second observer's marginal caused by the first
/// observer switching between X and X'.
pub fn signalling_1to2(model: &LambdaModel) -> f64 {
    use SettingPair::*;
    model
        .support()
        .map(|e| {
            let n = e.dists.map(|d| marginals(d).n);
            (n[XY] - n[XpY]).abs().max((n[XYp] - n[XpYp]).abs())
        })
        .fold(0.0, f64::max)
}

/// Largest shift of the first observer's marginal caused by the second
/// observer switching between Y and Y'.
pub fn signalling_2to1(model: &LambdaModel) -> f64 {
    use SettingPair::*;
    model
        .support()
        .map(|e| {
            let m = e.dists.map(|d| marginals(d).m);
            (m[XY] - m[XYp]).abs().max((m[XpY] - m[XpYp]).abs())
        })
        .fold(0.0, f64::max)
}

/// `max min(p, 1 - p)` over the observer's marginals `p`.
pub fn local_indeterminism(model: &LambdaModel, observer: Observer) -> f64 {
    model
        .support()
        .flat_map(|e| e.dists.0.iter())
        .map(|d| {
            let mg = marginals(d);
            let p = match observer {
                Observer::First => mg.m,
                Observer::Second => mg.n,
            };
            p.min(1.0 - p)
        })
        .fold(0.0, f64::max)
}

/// Largest `sum_lambda |w_a(lambda) - w_b(lambda)|` over pairs of setting
/// pairs `a`, `b`. Ranges over `[0, 2]`.
pub fn measurement_dependence(model: &LambdaModel) -> f64 {
    let mut worst = 0.0_f64;
    for (k, a) in SettingPair::ALL.into_iter().enumerate() {
        for b in SettingPair::ALL.into_iter().skip(k + 1) {
            let tv: f64 = model
                .lambdas()
                .iter()
                .map(|e| (e.weights[a] - e.weights[b]).abs())
                .sum();
            worst = worst.max(tv);
        }
    }
    worst
}

pub fn measure_all(model: &LambdaModel) -> MeasureReport {
    let i1 = local_indeterminism(model, Observer::First);
    let i2 = local_indeterminism(model, Observer::Second);
    let s_1to2 = signalling_1to2(model);
    let s_2to1 = signalling_2to1(model);
    MeasureReport {
        i1,
        i2,
        i: i1.max(i2),
        s_1to2,
        s_2to1,
        s: s_1to2.max(s_2to1),
        m: measurement_dependence(model),
        freedom_of_choice: model.has_freedom_of_choice(),
    }
}

/// Lower bound on `I` forced by a signalling degree `S`: a shifted marginal
/// either stays inside one of `[0, I]`, `[1 - I, 1]` or jumps the gap.
pub fn indeterminism_floor(s: f64) -> f64 {
    s.min((1.0 - s) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{JointDistribution, LambdaEntry, Outcome, PerPair};

    fn d(p: [f64; 4]) -> JointDistribution {
        JointDistribution::new(p).unwrap()
    }

    fn signalling_box(i: f64) -> LambdaModel {
        let p = d([i, 0.0, 0.0, 1.0 - i]);
        LambdaModel::single("box", PerPair([p, p, p, d([0.0, i, 1.0 - i, 0.0])]))
    }

    #[test]
    fn constant_model_has_no_signalling() {
        let p = d([0.1, 0.2, 0.3, 0.4]);
        let model = LambdaModel::single("c", PerPair([p; 4]));
        assert_eq!(signalling_1to2(&model), 0.0);
        assert_eq!(signalling_2to1(&model), 0.0);
    }

    #[test]
    fn signalling_box_one_way() {
        let model = signalling_box(0.3);
        assert!((signalling_1to2(&model) - 0.4).abs() < 1e-15);
        assert_eq!(signalling_2to1(&model), 0.0);
        let report = measure_all(&model);
        assert!((report.i - 0.3).abs() < 1e-15);
        assert!((report.s - 0.4).abs() < 1e-15);
        assert_eq!(report.m, 0.0);
    }

    #[test]
    fn pr_box_is_maximally_indeterministic() {
        let model = signalling_box(0.5);
        assert_eq!(signalling_1to2(&model), 0.0);
        assert_eq!(local_indeterminism(&model, Observer::First), 0.5);
        assert_eq!(local_indeterminism(&model, Observer::Second), 0.5);
    }

    #[test]
    fn flipping_first_outcome_with_y_is_full_signalling() {
        use Outcome::*;
        let model = LambdaModel::single(
            "flip",
            PerPair([
                JointDistribution::point(Plus, Plus),
                JointDistribution::point(Plus, Plus),
                JointDistribution::point(Minus, Plus),
                JointDistribution::point(Minus, Plus),
            ]),
        );
        assert_eq!(signalling_2to1(&model), 1.0);
        assert_eq!(signalling_1to2(&model), 0.0);
        assert_eq!(local_indeterminism(&model, Observer::First), 0.0);
    }

    #[test]
    fn no_signalling_box_indeterminism() {
        let i = 0.2;
        let p = d([i, 0.0, 0.0, 1.0 - i]);
        let model = LambdaModel::single("ns", PerPair([p, p, p, d([0.0, i, i, 1.0 - 2.0 * i])]));
        let report = measure_all(&model);
        assert!((report.i - 0.2).abs() < 1e-15);
        assert_eq!(report.s, 0.0);
    }

    #[test]
    fn measurement_dependence_examples() {
        use Outcome::*;
        let pp = PerPair([JointDistribution::point(Plus, Plus); 4]);
        let mm = PerPair([JointDistribution::point(Minus, Minus); 4]);
        let disjoint = LambdaModel::new(vec![
            LambdaEntry {
                label: "a".into(),
                weights: PerPair([1.0, 0.5, 0.5, 0.0]),
                dists: pp,
            },
            LambdaEntry {
                label: "b".into(),
                weights: PerPair([0.0, 0.5, 0.5, 1.0]),
                dists: mm,
            },
        ])
        .unwrap();
        assert_eq!(measurement_dependence(&disjoint), 2.0);

        let tilted = LambdaModel::new(vec![
            LambdaEntry {
                label: "a".into(),
                weights: PerPair([0.7, 0.5, 0.5, 0.5]),
                dists: pp,
            },
            LambdaEntry {
                label: "b".into(),
                weights: PerPair([0.3, 0.5, 0.5, 0.5]),
                dists: mm,
            },
        ])
        .unwrap();
        assert!((measurement_dependence(&tilted) - 0.4).abs() < 1e-15);
        assert!(!measure_all(&tilted).freedom_of_choice);

        let free = LambdaModel::new(vec![
            LambdaEntry::uniform("a", 0.5, pp),
            LambdaEntry::uniform("b", 0.5, mm),
        ])
        .unwrap();
        assert_eq!(measurement_dependence(&free), 0.0);
        assert!(measure_all(&free).freedom_of_choice);
    }

    #[test]
    fn zero_weight_entries_are_ignored() {
        use Outcome::*;
        let pp = PerPair([JointDistribution::point(Plus, Plus); 4]);
        let model = LambdaModel::new(vec![
            LambdaEntry::uniform("real", 1.0, pp),
            LambdaEntry::uniform("padding", 0.0, PerPair([d([0.25; 4]); 4])),
        ])
        .unwrap();
        assert_eq!(measure_all(&model).i, 0.0);
    }
}
