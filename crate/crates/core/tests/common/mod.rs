#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relaxed_bell::model::{LambdaEntry, PerPair};
use relaxed_bell::{JointDistribution, LambdaModel};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random distribution; some slots are forced to zero so that deterministic
/// and boundary cases show up often.
pub fn random_probs<R: Rng>(rng: &mut R) -> [f64; 4] {
    loop {
        let mut p = [0.0; 4];
        for x in &mut p {
            if rng.random_bool(0.3) {
                continue;
            }
            *x = -rng.random::<f64>().max(1e-300).ln();
        }
        let sum: f64 = p.iter().sum();
        if sum > 0.0 {
            return p.map(|x| x / sum);
        }
    }
}

/// Distribution with both marginals in `[0, i] ∪ [1 - i, 1]`, built from
/// marginals and a valid joint term.
pub fn banded_probs<R: Rng>(rng: &mut R, i: f64) -> [f64; 4] {
    let pick = |rng: &mut R| {
        let x = rng.random_range(0.0..=i);
        if rng.random_bool(0.5) {
            x
        } else {
            1.0 - x
        }
    };
    let m = pick(rng);
    let n = pick(rng);
    let lo = (m + n - 1.0).max(0.0);
    let hi = m.min(n);
    let c = match rng.random_range(0..3) {
        0 => lo,
        1 => hi,
        _ => rng.random_range(lo..=hi),
    };
    let p = [c, m - c, n - c, 1.0 - m - n + c];
    p.map(|x| x.max(0.0))
}

/// Random weights summing to one, occasionally with exact zeros.
pub fn random_weights<R: Rng>(rng: &mut R, count: usize) -> Vec<f64> {
    loop {
        let w: Vec<f64> = (0..count)
            .map(|_| {
                if count > 1 && rng.random_bool(0.1) {
                    0.0
                } else {
                    rng.random::<f64>() + 1e-3
                }
            })
            .collect();
        let sum: f64 = w.iter().sum();
        if sum > 0.0 {
            return w.iter().map(|x| x / sum).collect();
        }
    }
}

/// Raw pieces of a random freedom-of-choice model: weights and, per entry,
/// the four distributions in pair order XY, X'Y, XY', X'Y'.
pub struct RawRandom {
    pub weights: Vec<f64>,
    pub probs: Vec<[[f64; 4]; 4]>,
}

pub fn random_raw<R: Rng>(rng: &mut R, max_lambdas: usize) -> RawRandom {
    let count = rng.random_range(1..=max_lambdas);
    let weights = random_weights(rng, count);
    let probs = (0..count)
        .map(|_| {
            if rng.random_bool(0.4) {
                let i = rng.random_range(0.0..=0.5);
                std::array::from_fn(|_| banded_probs(rng, i))
            } else {
                std::array::from_fn(|_| random_probs(rng))
            }
        })
        .collect();
    RawRandom { weights, probs }
}

pub fn build(raw: &RawRandom) -> LambdaModel {
    let entries = raw
        .weights
        .iter()
        .zip(&raw.probs)
        .enumerate()
        .map(|(k, (&w, p))| {
            let dists = PerPair::from_fn(|pair| JointDistribution::new(p[pair.index()]).expect("valid distribution"));
            LambdaEntry::uniform(format!("l{k}"), w, dists)
        })
        .collect();
    LambdaModel::new(entries).expect("valid model")
}

pub fn random_model<R: Rng>(rng: &mut R, max_lambdas: usize) -> (RawRandom, LambdaModel) {
    let raw = random_raw(rng, max_lambdas);
    let model = build(&raw);
    (raw, model)
}

/// Straight-line recomputation of (I, S, CHSH) from raw arrays.
pub fn reference_measures(raw: &RawRandom) -> (f64, f64, f64) {
    let mut i: f64 = 0.0;
    let mut s: f64 = 0.0;
    let mut e = [0.0; 4];
    for (w, p) in raw.weights.iter().zip(&raw.probs) {
        for (k, d) in p.iter().enumerate() {
            e[k] += w * (d[0] - d[1] - d[2] + d[3]);
        }
        if *w == 0.0 {
            continue;
        }
        let m: Vec<f64> = p.iter().map(|d| d[0] + d[1]).collect();
        let n: Vec<f64> = p.iter().map(|d| d[0] + d[2]).collect();
        for x in m.iter().chain(&n) {
            i = i.max(x.min(1.0 - x));
        }
        // Second party's marginal as the first party switches X <-> X'.
        s = s.max((n[0] - n[1]).abs()).max((n[2] - n[3]).abs());
        // First party's marginal as the second party switches Y <-> Y'.
        s = s.max((m[0] - m[2]).abs()).max((m[1] - m[3]).abs());
    }
    (i, s, e[0] + e[1] + e[2] - e[3])
}

pub fn reference_bound(i: f64, s: f64) -> f64 {
    if s < 1.0 - 2.0 * i {
        2.0 + 4.0 * i
    } else {
        4.0
    }
}

pub fn entropy(p: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    term(p) + term(1.0 - p)
}
