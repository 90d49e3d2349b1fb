//! Thresholds on indeterminism and signalling for a range of violations,
//! in probability and in bits.

use relaxed_bell::chsh::thresholds_for_violation;
use relaxed_bell::info::{channel_capacity, info_thresholds, mutual_info_shift};

fn main() -> relaxed_bell::Result<()> {
    println!("{:>8} {:>8} {:>8} {:>8} {:>8}", "V", "I_V", "S_V", "H_V", "C_V");
    let tsirelson = 2.0 * 2f64.sqrt() - 2.0;
    for v in [0.0, 0.25, 0.5, tsirelson, 1.0, 1.5, 2.0] {
        let t = thresholds_for_violation(v)?;
        let bits = info_thresholds(v, None)?;
        println!("{v:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4}", t.i_v, t.s_v, bits.h_v, bits.c_v);
    }

    // A shift of S in a binary marginal carries the least information when
    // the marginal starts at (1 - S) / 2.
    let s = 0.4;
    let (best, at) = (0..=600)
        .map(|k| k as f64 / 1000.0)
        .map(|p| (mutual_info_shift(p, s).unwrap(), p))
        .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a });
    println!("S={s}: min over p {best:.6} at p={at}, capacity {:.6}", channel_capacity(s)?);
    Ok(())
}
