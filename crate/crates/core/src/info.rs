//! Entropy and channel-capacity forms of the complementarity thresholds.
//! All quantities are in bits.

use serde::Serialize;

use crate::error::{check_range, Error, Result};

/// `-p log2 p - (1 - p) log2 (1 - p)`, with `H(0) = H(1) = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    check_range("p", p, 0.0, 1.0, "[0, 1]")?;
    Ok(entropy_term(p) + entropy_term(1.0 - p))
}

fn entropy_term(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

/// Capacity of the binary symmetric channel obtained from a marginal shift
/// `s`: `1 - H((1 - s) / 2)`.
pub fn channel_capacity(s: f64) -> Result<f64> {
    check_range("S", s, 0.0, 1.0, "[0, 1]")?;
    Ok(1.0 - binary_entropy((1.0 - s) / 2.0)?)
}

/// Mutual information between an equiprobable choice of two settings and an
/// outcome distributed as `(p, 1 - p)` or `(p + s, 1 - p - s)`.
pub fn mutual_info_shift(p: f64, s: f64) -> Result<f64> {
    check_range("p", p, 0.0, 1.0, "[0, 1]")?;
    check_range("S", s, 0.0, 1.0, "[0, 1]")?;
    if p + s > 1.0 {
        return Err(Error::OutOfRange {
            name: "p + S",
            value: p + s,
            range: "[0, 1]",
        });
    }
    Ok(binary_entropy(p + s / 2.0)? - 0.5 * binary_entropy(p)? - 0.5 * binary_entropy(p + s)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InfoReport {
    #[serde(rename = "H_of_I", skip_serializing_if = "Option::is_none")]
    pub h_of_i: Option<f64>,
    #[serde(rename = "C_of_S", skip_serializing_if = "Option::is_none")]
    pub c_of_s: Option<f64>,
    #[serde(rename = "H_V")]
    pub h_v: f64,
    #[serde(rename = "C_V")]
    pub c_v: f64,
}

/// Local random bits `H(V/4)` and signalling bits `1 - H(V/4)` required to
/// model a CHSH violation `V`; optionally `H(I)` and `C(S)` for a model.
pub fn info_thresholds(v: f64, model: Option<(f64, f64)>) -> Result<InfoReport> {
    check_range("V", v, 0.0, 2.0, "[0, 2]")?;
    let h_v = binary_entropy(v / 4.0)?;
    let (h_of_i, c_of_s) = match model {
        Some((i, s)) => {
            check_range("I", i, 0.0, 0.5, "[0, 1/2]")?;
            (Some(binary_entropy(i)?), Some(channel_capacity(s)?))
        }
        None => (None, None),
    };
    Ok(InfoReport {
        h_of_i,
        c_of_s,
        h_v,
        c_v: 1.0 - h_v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quantum_v() -> f64 {
        2.0 * 2f64.sqrt() - 2.0
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(quantum_v() / 4.0).unwrap() - 0.736).abs() < 1e-3);
        assert!(binary_entropy(1.5).is_err());
    }

    #[test]
    fn entropy_symmetric_and_concave() {
        for k in 0..=100 {
            let p = k as f64 / 100.0;
            let h = binary_entropy(p).unwrap();
            assert!((h - binary_entropy(1.0 - p).unwrap()).abs() < 1e-15);
            if (1..100).contains(&k) {
                let lo = binary_entropy(p - 0.01).unwrap();
                let hi = binary_entropy(p + 0.01).unwrap();
                assert!(h >= 0.5 * (lo + hi) - 1e-15);
            }
        }
    }

    #[test]
    fn capacity_examples() {
        assert_eq!(channel_capacity(0.0).unwrap(), 0.0);
        assert_eq!(channel_capacity(1.0).unwrap(), 1.0);
        assert!((channel_capacity(2.0 - 2f64.sqrt()).unwrap() - 0.264).abs() < 1e-3);
        let mut prev = -1.0;
        for k in 0..=200 {
            let c = channel_capacity(k as f64 / 200.0).unwrap();
            assert!(c > prev);
            prev = c;
        }
    }

    #[test]
    fn mutual_info_examples() {
        for p in [0.0, 0.2, 0.7, 1.0] {
            assert_eq!(mutual_info_shift(p, 0.0).unwrap(), 0.0);
        }
        // 1 - H(1/4), evaluated independently.
        let expected = 1.0 + 0.25 * 0.25f64.log2() + 0.75 * 0.75f64.log2();
        let got = mutual_info_shift(0.25, 0.5).unwrap();
        assert!((got - expected).abs() < 1e-12);
        assert!((got - 0.188_721_875_540_867).abs() < 1e-12);
        assert!((got - channel_capacity(0.5).unwrap()).abs() < 1e-12);
        assert_eq!(mutual_info_shift(0.0, 1.0).unwrap(), 1.0);
        assert!(mutual_info_shift(0.6, 0.5).is_err());
    }

    #[test]
    fn threshold_examples() {
        let r = info_thresholds(quantum_v(), None).unwrap();
        assert!((r.h_v - 0.736).abs() < 1e-3);
        assert!((r.c_v - 0.264).abs() < 1e-3);
        assert!((r.h_v + r.c_v - 1.0).abs() < 1e-15);
        let r = info_thresholds(2.0, None).unwrap();
        assert_eq!((r.h_v, r.c_v), (1.0, 0.0));
        let r = info_thresholds(0.0, Some((0.25, 0.5))).unwrap();
        assert_eq!((r.h_v, r.c_v), (0.0, 1.0));
        assert!((r.h_of_i.unwrap() + r.c_of_s.unwrap() - 1.0).abs() < 1e-12);
    }
}
