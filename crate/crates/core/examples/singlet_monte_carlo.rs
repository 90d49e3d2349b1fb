//! Monte Carlo CHSH for the Toner-Bacon / quantum mixture.
//!
//!     cargo run --release --example singlet_monte_carlo [samples] [seed]

use relaxed_bell::singlet::{analytic_chsh, estimate_chsh, mixture_measures, ChshSettings, MixtureSpec};

fn main() -> relaxed_bell::Result<()> {
    let mut args = std::env::args().skip(1);
    let samples: usize = args.next().map_or(200_000, |s| s.parse().expect("samples"));
    let seed: u64 = args.next().map_or(2024, |s| s.parse().expect("seed"));
    let settings = ChshSettings::default();
    println!("analytic CHSH {:.6}", analytic_chsh(&settings).value);
    for w in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let spec = MixtureSpec::new(w)?;
        let (i, s) = mixture_measures(&spec)?;
        let est = estimate_chsh(&spec, &settings, samples, seed)?;
        println!(
            "w={w:<4} I={i:.3} S={s:.3} S+2I={:.3}  CHSH={:.4} +/- {:.4}",
            s + 2.0 * i,
            est.value,
            est.stderr
        );
    }
    Ok(())
}
