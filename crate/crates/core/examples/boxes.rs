//! The two saturating box families, the PR box and the deterministic boxes.

use relaxed_bell::boxes::{all_deterministic_boxes, make_nosignal_box_with, make_pr_box, make_signalling_box_with};
use relaxed_bell::chsh::{bound_b, chsh};
use relaxed_bell::measures::measure_all;
use relaxed_bell::{behavior_of, LambdaModel};

fn row(name: &str, model: &LambdaModel) -> relaxed_bell::Result<()> {
    let r = measure_all(model);
    let v = chsh(&behavior_of(model)).value;
    println!("{name:<22} I={:.3} S={:.3} CHSH={v:.4} B={:.4}", r.i, r.s, bound_b(r.i, r.s)?);
    Ok(())
}

fn main() -> relaxed_bell::Result<()> {
    row("pr", &make_pr_box())?;
    for i in [0.0, 0.1, 0.25, 0.4, 0.5] {
        for flip in [false, true] {
            row(&format!("nosignal I={i} flip={flip}"), &make_nosignal_box_with(i, flip)?)?;
            row(&format!("signalling I={i} flip={flip}"), &make_signalling_box_with(i, flip)?)?;
        }
    }
    let values: Vec<f64> = all_deterministic_boxes().iter().map(|m| chsh(&behavior_of(m)).value).collect();
    println!("deterministic CHSH values: {values:?}");

    // Any box serializes to the model file format read by `relaxed-bell analyze`.
    println!("{}", make_nosignal_box_with(0.25, false)?.to_json_string());
    Ok(())
}
