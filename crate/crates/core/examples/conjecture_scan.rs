//! Looks for singlet models with S + 2I below 1 among mixtures and random
//! behavior-preserving perturbations of them.
//!
//!     cargo run --release --example conjecture_scan [perturbed]

use relaxed_bell::singlet::{conjecture_scan, ScanConfig};

fn main() -> relaxed_bell::Result<()> {
    let perturbed = std::env::args().nth(1).map_or(1000, |s| s.parse().expect("count"));
    let cfg = ScanConfig { perturbed, ..ScanConfig::default() };
    let report = conjecture_scan(&cfg)?;
    for e in &report.mixture {
        println!("mixture w={:.1}  I={:.4} S={:.4} S+2I={:.6}", e.w, e.i, e.s, e.s_plus_2i);
    }
    println!(
        "{} perturbed models admitted out of {} proposals ({} invalid, {} changed the behavior)",
        report.perturbed_admitted, report.proposals, report.rejected_invalid, report.rejected_behavior
    );
    println!("min S+2I = {:.9}, min C+H = {:.9}", report.min_s_plus_2i, report.min_c_plus_h);
    println!("candidates below 1: {}", report.counterexample_candidates.len());
    println!("{}", report.note);
    Ok(())
}
