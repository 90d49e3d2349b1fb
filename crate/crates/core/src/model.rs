//! Behaviors and finite hidden-variable models for the two-party,
//! two-setting, two-outcome scenario.
//!
//! Outcomes are labelled `+1`/`-1`. Every joint distribution stores its four
//! probabilities in the fixed slot order `(+,+), (+,-), (-,+), (-,-)`, and the
//! four setting pairs are indexed `(X,Y) < (X',Y) < (X,Y') < (X',Y')`.
//!
//! A [`LambdaModel`] is a finite list of hidden-variable entries. Each entry
//! carries one weight per setting pair, so measurement-dependent models can be
//! represented; freedom of choice is the predicate
//! [`LambdaModel::has_freedom_of_choice`].

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Index, IndexMut};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Tolerance on the sum of a distribution or of a weight column.
pub const SUM_TOLERANCE: f64 = 1e-9;
/// Slack allowed on non-negativity when ingesting probabilities.
pub const NEGATIVITY_TOLERANCE: f64 = 1e-12;
/// Two weights closer than this count as equal for freedom of choice.
pub const FREEDOM_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub fn value(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }

    /// Sign with the convention `sgn(0) = +1`.
    pub fn from_sign(x: f64) -> Self {
        if x >= 0.0 {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }
}

impl Serialize for Outcome {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_i8(self.value() as i8)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Plus => "+",
            Outcome::Minus => "-",
        })
    }
}

/// Slot of the outcome pair `(a, b)` in a [`JointDistribution`].
pub fn slot(a: Outcome, b: Outcome) -> usize {
    match (a, b) {
        (Outcome::Plus, Outcome::Plus) => 0,
        (Outcome::Plus, Outcome::Minus) => 1,
        (Outcome::Minus, Outcome::Plus) => 2,
        (Outcome::Minus, Outcome::Minus) => 3,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FirstSetting {
    X,
    XPrime,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SecondSetting {
    Y,
    YPrime,
}

/// One of the four joint measurement settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SettingPair {
    XY,
    XpY,
    XYp,
    XpYp,
}

impl SettingPair {
    pub const ALL: [SettingPair; 4] = [
        SettingPair::XY,
        SettingPair::XpY,
        SettingPair::XYp,
        SettingPair::XpYp,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Key used in model files.
    pub fn key(self) -> &'static str {
        match self {
            SettingPair::XY => "XY",
            SettingPair::XpY => "XpY",
            SettingPair::XYp => "XYp",
            SettingPair::XpYp => "XpYp",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        SettingPair::ALL.into_iter().find(|p| p.key() == key)
    }

    pub fn new(first: FirstSetting, second: SecondSetting) -> Self {
        match (first, second) {
            (FirstSetting::X, SecondSetting::Y) => SettingPair::XY,
            (FirstSetting::XPrime, SecondSetting::Y) => SettingPair::XpY,
            (FirstSetting::X, SecondSetting::YPrime) => SettingPair::XYp,
            (FirstSetting::XPrime, SecondSetting::YPrime) => SettingPair::XpYp,
        }
    }

    pub fn first(self) -> FirstSetting {
        match self {
            SettingPair::XY | SettingPair::XYp => FirstSetting::X,
            SettingPair::XpY | SettingPair::XpYp => FirstSetting::XPrime,
        }
    }

    pub fn second(self) -> SecondSetting {
        match self {
            SettingPair::XY | SettingPair::XpY => SecondSetting::Y,
            SettingPair::XYp | SettingPair::XpYp => SecondSetting::YPrime,
        }
    }
}

impl fmt::Display for SettingPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// A value for each of the four setting pairs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerPair<T>(pub [T; 4]);

impl<T> PerPair<T> {
    pub fn from_fn(mut f: impl FnMut(SettingPair) -> T) -> Self {
        PerPair(SettingPair::ALL.map(&mut f))
    }

    pub fn iter(&self) -> impl Iterator<Item = (SettingPair, &T)> {
        SettingPair::ALL.into_iter().zip(self.0.iter())
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> PerPair<U> {
        PerPair(self.0.each_ref().map(f))
    }
}

impl<T> Index<SettingPair> for PerPair<T> {
    type Output = T;
    fn index(&self, pair: SettingPair) -> &T {
        &self.0[pair.index()]
    }
}

impl<T> IndexMut<SettingPair> for PerPair<T> {
    fn index_mut(&mut self, pair: SettingPair) -> &mut T {
        &mut self.0[pair.index()]
    }
}

/// Probabilities of `(+,+), (+,-), (-,+), (-,-)` for one setting pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointDistribution {
    probs: [f64; 4],
}

impl JointDistribution {
    /// Validates and builds a distribution. Entries in `[-1e-12, 0)` are set
    /// to zero; anything more negative, or a sum off by more than `1e-9`, is
    /// rejected.
    pub fn new(probs: [f64; 4]) -> Result<Self> {
        let mut clean = probs;
        for (slot, p) in clean.iter_mut().enumerate() {
            if !p.is_finite() {
                return Err(Error::InvalidDistribution(format!(
                    "non-finite probability {p} at slot {slot}"
                )));
            }
            if *p < -NEGATIVITY_TOLERANCE {
                return Err(Error::InvalidDistribution(format!(
                    "negative probability {p} at slot {slot}"
                )));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let sum: f64 = clean.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {sum}"
            )));
        }
        Ok(JointDistribution { probs: clean })
    }

    /// Builds a distribution the caller already knows to be valid.
    pub(crate) fn new_unchecked(probs: [f64; 4]) -> Self {
        JointDistribution { probs }
    }

    /// All mass on a single outcome pair.
    pub fn point(a: Outcome, b: Outcome) -> Self {
        let mut probs = [0.0; 4];
        probs[slot(a, b)] = 1.0;
        JointDistribution { probs }
    }

    /// The distribution `(c, m - c, n - c, 1 + c - m - n)` with marginals
    /// `m`, `n` and `(+,+)` probability `c`.
    pub fn from_marginals(m: f64, n: f64, c: f64) -> Result<Self> {
        JointDistribution::new([c, m - c, n - c, 1.0 + c - m - n])
    }

    pub fn probs(&self) -> [f64; 4] {
        self.probs
    }

    pub fn prob(&self, a: Outcome, b: Outcome) -> f64 {
        self.probs[slot(a, b)]
    }

    pub fn marginals(&self) -> Marginals {
        marginals(self)
    }

    /// Relabels `+` and `-` on both sides.
    pub fn flipped(&self) -> Self {
        let [a, b, c, d] = self.probs;
        JointDistribution {
            probs: [d, c, b, a],
        }
    }

    /// Convex combination `alpha * self + (1 - alpha) * other`.
    pub fn mix(&self, other: &JointDistribution, alpha: f64) -> Self {
        let mut probs = [0.0; 4];
        for (k, p) in probs.iter_mut().enumerate() {
            *p = alpha * self.probs[k] + (1.0 - alpha) * other.probs[k];
        }
        JointDistribution { probs }
    }
}

/// Probability of outcome `+1` for each observer, clamped to `[0, 1]`
/// against rounding in the sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Marginals {
    pub m: f64,
    pub n: f64,
}

pub fn marginals(dist: &JointDistribution) -> Marginals {
    let [pp, pm, mp, _] = dist.probs;
    Marginals {
        m: (pp + pm).clamp(0.0, 1.0),
        n: (pp + mp).clamp(0.0, 1.0),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LambdaEntry {
    pub label: String,
    pub weights: PerPair<f64>,
    pub dists: PerPair<JointDistribution>,
}

impl LambdaEntry {
    /// Entry with the same weight under every setting pair.
    pub fn uniform(label: impl Into<String>, weight: f64, dists: PerPair<JointDistribution>) -> Self {
        LambdaEntry {
            label: label.into(),
            weights: PerPair([weight; 4]),
            dists,
        }
    }

    /// True when the entry carries no weight under any setting pair.
    pub fn is_null(&self) -> bool {
        self.weights.0.iter().all(|&w| w == 0.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LambdaModel {
    lambdas: Vec<LambdaEntry>,
    meta: Option<Value>,
}

impl LambdaModel {
    /// Checks per-pair weight normalization and builds the model. The
    /// distributions inside each entry are already valid by construction.
    pub fn new(lambdas: Vec<LambdaEntry>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::EmptyModel);
        }
        for (k, entry) in lambdas.iter().enumerate() {
            for (pair, &w) in entry.weights.iter() {
                if !w.is_finite() || !(0.0..=1.0).contains(&w) {
                    return Err(Error::WeightRange {
                        lambda: k,
                        label: entry.label.clone(),
                        pair: pair.key(),
                        value: w,
                    });
                }
            }
        }
        for pair in SettingPair::ALL {
            let sum: f64 = lambdas.iter().map(|e| e.weights[pair]).sum();
            if (sum - 1.0).abs() > SUM_TOLERANCE {
                return Err(Error::WeightSum {
                    pair: pair.key(),
                    sum,
                });
            }
        }
        Ok(LambdaModel {
            lambdas,
            meta: None,
        })
    }

    /// A one-entry model with weight 1.
    pub fn single(label: impl Into<String>, dists: PerPair<JointDistribution>) -> Self {
        LambdaModel {
            lambdas: vec![LambdaEntry::uniform(label, 1.0, dists)],
            meta: None,
        }
    }

    pub fn with_meta(mut self, meta: Value) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn lambdas(&self) -> &[LambdaEntry] {
        &self.lambdas
    }

    pub fn meta(&self) -> Option<&Value> {
        self.meta.as_ref()
    }

    /// Entries with positive weight under at least one setting pair.
    pub fn support(&self) -> impl Iterator<Item = &LambdaEntry> {
        self.lambdas.iter().filter(|e| !e.is_null())
    }

    pub fn has_freedom_of_choice(&self) -> bool {
        self.lambdas.iter().all(|e| {
            let w = e.weights.0;
            w.iter().all(|&x| (x - w[0]).abs() <= FREEDOM_TOLERANCE)
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: RawModel = serde_json::from_str(text)?;
        validate_model(raw)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn to_raw(&self) -> RawModel {
        let lambdas = self
            .lambdas
            .iter()
            .map(|e| {
                let w = e.weights.0;
                let uniform = w.iter().all(|x| x.to_bits() == w[0].to_bits());
                RawLambda {
                    label: e.label.clone(),
                    weight: uniform.then_some(w[0]),
                    weights: (!uniform).then(|| {
                        e.weights
                            .iter()
                            .map(|(p, &x)| (p.key().to_string(), x))
                            .collect()
                    }),
                    dists: e
                        .dists
                        .iter()
                        .map(|(p, d)| (p.key().to_string(), d.probs()))
                        .collect(),
                }
            })
            .collect();
        RawModel {
            lambdas,
            meta: self.meta.clone(),
        }
    }

    pub fn to_json_string(&self) -> String {
        // Serializing plain maps, strings and finite floats cannot fail.
        serde_json::to_string_pretty(&self.to_raw()).expect("model serialization")
    }

    pub fn write_to(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json_string();
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// The observed distributions, one per setting pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Behavior {
    pub dists: PerPair<JointDistribution>,
}

impl Index<SettingPair> for Behavior {
    type Output = JointDistribution;
    fn index(&self, pair: SettingPair) -> &JointDistribution {
        &self.dists[pair]
    }
}

/// Weight-averages the per-entry distributions, separately for each
/// setting pair.
pub fn behavior_of(model: &LambdaModel) -> Behavior {
    let dists = PerPair::from_fn(|pair| {
        let mut acc = [0.0; 4];
        for entry in model.lambdas() {
            let w = entry.weights[pair];
            for (a, p) in acc.iter_mut().zip(entry.dists[pair].probs()) {
                *a += w * p;
            }
        }
        JointDistribution::new_unchecked(acc)
    });
    Behavior { dists }
}

/// On-disk form of a model.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawModel {
    pub lambdas: Vec<RawLambda>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Value>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawLambda {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<BTreeMap<String, f64>>,
    pub dists: BTreeMap<String, [f64; 4]>,
}

fn per_pair_from_map<T: Copy>(
    map: &BTreeMap<String, T>,
    lambda: usize,
    label: &str,
) -> Result<PerPair<T>> {
    if let Some(key) = map.keys().find(|k| SettingPair::from_key(k).is_none()) {
        return Err(Error::UnknownPair {
            lambda,
            label: label.to_string(),
            key: key.clone(),
        });
    }
    let mut out = Vec::with_capacity(4);
    for pair in SettingPair::ALL {
        match map.get(pair.key()) {
            Some(v) => out.push(*v),
            None => {
                return Err(Error::MissingPair {
                    lambda,
                    label: label.to_string(),
                    key: pair.key(),
                })
            }
        }
    }
    Ok(PerPair([out[0], out[1], out[2], out[3]]))
}

/// Turns parsed file contents into a validated model.
pub fn validate_model(raw: RawModel) -> Result<LambdaModel> {
    let mut lambdas = Vec::with_capacity(raw.lambdas.len());
    for (k, rl) in raw.lambdas.into_iter().enumerate() {
        let weights = match (rl.weight, &rl.weights) {
            (Some(w), None) => PerPair([w; 4]),
            (None, Some(map)) => per_pair_from_map(map, k, &rl.label)?,
            (Some(_), Some(_)) => {
                return Err(Error::WeightSpec {
                    lambda: k,
                    label: rl.label,
                    reason: "both \"weight\" and \"weights\" given",
                })
            }
            (None, None) => {
                return Err(Error::WeightSpec {
                    lambda: k,
                    label: rl.label,
                    reason: "missing \"weight\" or \"weights\"",
                })
            }
        };
        let raw_dists = per_pair_from_map(&rl.dists, k, &rl.label)?;
        let mut dists = [JointDistribution::point(Outcome::Plus, Outcome::Plus); 4];
        for (pair, probs) in raw_dists.iter() {
            if let Some((slot, &value)) = probs
                .iter()
                .enumerate()
                .find(|(_, &p)| p < -NEGATIVITY_TOLERANCE)
            {
                return Err(Error::NegativeProbability {
                    lambda: k,
                    label: rl.label,
                    pair: pair.key(),
                    slot,
                    value,
                });
            }
            dists[pair.index()] = JointDistribution::new(*probs).map_err(|_| {
                Error::Normalization {
                    lambda: k,
                    label: rl.label.clone(),
                    pair: pair.key(),
                    sum: probs.iter().sum(),
                }
            })?;
        }
        lambdas.push(LambdaEntry {
            label: rl.label,
            weights,
            dists: PerPair(dists),
        });
    }
    let model = LambdaModel::new(lambdas)?;
    Ok(match raw.meta {
        Some(meta) => model.with_meta(meta),
        None => model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(p: [f64; 4]) -> JointDistribution {
        JointDistribution::new(p).unwrap()
    }

    fn model_json(lambdas: &str) -> String {
        format!("{{\"lambdas\": [{lambdas}]}}")
    }

    const ALL_PP: &str = r#""dists": {"XY": [1,0,0,0], "XpY": [1,0,0,0], "XYp": [1,0,0,0], "XpYp": [1,0,0,0]}"#;
    const ALL_MM: &str = r#""dists": {"XY": [0,0,0,1], "XpY": [0,0,0,1], "XYp": [0,0,0,1], "XpYp": [0,0,0,1]}"#;

    #[test]
    fn single_lambda_accepted() {
        let text = model_json(&format!(r#"{{"label": "a", "weight": 1, {ALL_PP}}}"#));
        let model = LambdaModel::from_json_str(&text).unwrap();
        assert_eq!(model.lambdas().len(), 1);
        assert!(model.has_freedom_of_choice());
    }

    #[test]
    fn negative_probability_rejected() {
        let text = model_json(
            r#"{"label": "a", "weight": 1, "dists": {"XY": [0.5,0.5,0.5,-0.5], "XpY": [1,0,0,0], "XYp": [1,0,0,0], "XpYp": [1,0,0,0]}}"#,
        );
        let err = LambdaModel::from_json_str(&text).unwrap_err();
        assert!(matches!(err, Error::NegativeProbability { slot: 3, .. }), "{err}");
    }

    #[test]
    fn weight_sum_rejected() {
        let text = model_json(&format!(
            r#"{{"label": "a", "weights": {{"XY": 0.6, "XpY": 0.5, "XYp": 0.5, "XpYp": 0.5}}, {ALL_PP}}},
               {{"label": "b", "weight": 0.5, {ALL_MM}}}"#
        ));
        match LambdaModel::from_json_str(&text).unwrap_err() {
            Error::WeightSum { pair, sum } => {
                assert_eq!(pair, "XY");
                assert!((sum - 1.1).abs() < 1e-12);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn missing_pair_and_bad_sum_rejected() {
        let text = model_json(
            r#"{"label": "a", "weight": 1, "dists": {"XY": [1,0,0,0], "XpY": [1,0,0,0], "XYp": [1,0,0,0]}}"#,
        );
        assert!(matches!(
            LambdaModel::from_json_str(&text).unwrap_err(),
            Error::MissingPair { key: "XpYp", .. }
        ));
        let text = model_json(
            r#"{"label": "a", "weight": 1, "dists": {"XY": [0.5,0.5,0.5,0], "XpY": [1,0,0,0], "XYp": [1,0,0,0], "XpYp": [1,0,0,0]}}"#,
        );
        assert!(matches!(
            LambdaModel::from_json_str(&text).unwrap_err(),
            Error::Normalization { pair: "XY", .. }
        ));
    }

    #[test]
    fn tiny_negative_clamped() {
        let dist = d([0.5, 0.5 + 5e-13, -5e-13, 0.0]);
        assert_eq!(dist.probs()[2], 0.0);
    }

    #[test]
    fn malformed_json_reports_line() {
        let err = LambdaModel::from_json_str("{\n\"lambdas\": [\n  {\"label\": 1}\n]}").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn behavior_single_lambda_is_identity() {
        let dists = PerPair([
            d([0.1, 0.2, 0.3, 0.4]),
            d([0.25; 4]),
            d([1.0, 0.0, 0.0, 0.0]),
            d([0.0, 0.5, 0.5, 0.0]),
        ]);
        let model = LambdaModel::single("only", dists);
        assert_eq!(behavior_of(&model).dists, dists);
    }

    #[test]
    fn behavior_symmetric_deterministic_pair() {
        let text = model_json(&format!(
            r#"{{"label": "up", "weight": 0.5, {ALL_PP}}}, {{"label": "down", "weight": 0.5, {ALL_MM}}}"#
        ));
        let b = behavior_of(&LambdaModel::from_json_str(&text).unwrap());
        for pair in SettingPair::ALL {
            assert_eq!(b[pair].probs(), [0.5, 0.0, 0.0, 0.5]);
        }
    }

    #[test]
    fn behavior_convex_combination() {
        let text = model_json(&format!(
            r#"{{"label": "up", "weight": 0.25, {ALL_PP}}}, {{"label": "down", "weight": 0.75, {ALL_MM}}}"#
        ));
        let b = behavior_of(&LambdaModel::from_json_str(&text).unwrap());
        assert_eq!(b[SettingPair::XpYp].probs(), [0.25, 0.0, 0.0, 0.75]);
    }

    #[test]
    fn marginal_examples() {
        let i = 0.3;
        let mg = marginals(&d([i, 0.0, 0.0, 1.0 - i]));
        assert_eq!((mg.m, mg.n), (0.3, 0.3));
        let mg = marginals(&d([0.0, i, 1.0 - i, 0.0]));
        assert_eq!((mg.m, mg.n), (0.3, 0.7));
        let mg = marginals(&d([0.25; 4]));
        assert_eq!((mg.m, mg.n), (0.5, 0.5));
    }

    #[test]
    fn setting_pair_order_and_keys() {
        assert_eq!(SettingPair::ALL.map(SettingPair::index), [0, 1, 2, 3]);
        for p in SettingPair::ALL {
            assert_eq!(SettingPair::from_key(p.key()), Some(p));
            assert_eq!(SettingPair::new(p.first(), p.second()), p);
        }
        assert!(SettingPair::XY < SettingPair::XpY && SettingPair::XYp < SettingPair::XpYp);
    }

    #[test]
    fn measurement_dependent_weights_round_trip() {
        let text = model_json(&format!(
            r#"{{"label": "a", "weights": {{"XY": 1, "XpY": 0.5, "XYp": 0.5, "XpYp": 0}}, {ALL_PP}}},
               {{"label": "b", "weights": {{"XY": 0, "XpY": 0.5, "XYp": 0.5, "XpYp": 1}}, {ALL_MM}}}"#
        ));
        let model = LambdaModel::from_json_str(&text).unwrap();
        assert!(!model.has_freedom_of_choice());
        let again = LambdaModel::from_json_str(&model.to_json_string()).unwrap();
        assert_eq!(model, again);
    }
}
