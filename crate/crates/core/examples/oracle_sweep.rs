//! Grid search for the largest CHSH value under (I, S) constraints,
//! printed next to the closed-form bound.
//!
//!     cargo run --release --example oracle_sweep [step]

use relaxed_bell::oracle::{argmax_to_model, verify_tightness, OracleOptions};
use relaxed_bell::measures::measure_all;

fn main() -> relaxed_bell::Result<()> {
    let step = std::env::args().nth(1).map_or(Ok(0.05), |s| s.parse()).expect("step must be a number");
    let opts = OracleOptions { step, ..OracleOptions::default() };
    let is = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5];
    let ss = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
    let reports = verify_tightness(&is, &ss, &opts)?;

    print!("{:>6}", "I \\ S");
    for s in ss {
        print!("{s:>8.1}");
    }
    println!();
    for (row, i) in reports.chunks(ss.len()).zip(is) {
        print!("{i:>6.1}");
        for r in row {
            print!("{:>8.3}", r.max_e);
        }
        println!();
    }

    let r = &reports[2 * ss.len() + 1];
    let witness = measure_all(&argmax_to_model(&r.argmax)?);
    println!(
        "witness at I={}, S={}: m={:?} n={:?} reaches {:.3} with I'={:.3}, S'={:.3}",
        r.i, r.s, r.argmax.m, r.argmax.n, r.max_e, witness.i, witness.s
    );
    Ok(())
}
