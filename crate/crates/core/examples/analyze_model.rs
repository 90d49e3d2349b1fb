//! Measures a model and checks it against the relaxed bound.
//!
//!     cargo run --example analyze_model [path/to/model.json]
//!
//! Without a path, a two-entry mixture of a no-signalling box and a
//! deterministic box is used.

use relaxed_bell::boxes::{make_deterministic_box, make_nosignal_box};
use relaxed_bell::chsh::{bound_b, check_model_consistency, chsh};
use relaxed_bell::measures::measure_all;
use relaxed_bell::model::LambdaEntry;
use relaxed_bell::{behavior_of, LambdaModel, Outcome};

fn demo_model() -> relaxed_bell::Result<LambdaModel> {
    let soft = make_nosignal_box(0.2)?;
    let hard = make_deterministic_box(Outcome::Plus, Outcome::Plus, Outcome::Plus, Outcome::Plus);
    LambdaModel::new(vec![
        LambdaEntry::uniform("soft", 0.7, soft.lambdas()[0].dists),
        LambdaEntry::uniform("hard", 0.3, hard.lambdas()[0].dists),
    ])
}

fn main() -> relaxed_bell::Result<()> {
    let model = match std::env::args().nth(1) {
        Some(path) => LambdaModel::from_path(path)?,
        None => demo_model()?,
    };
    let r = measure_all(&model);
    let value = chsh(&behavior_of(&model));
    println!("entries     {}", model.lambdas().len());
    println!("I1, I2, I   {:.6}, {:.6}, {:.6}", r.i1, r.i2, r.i);
    println!("S 1->2, 2->1, S  {:.6}, {:.6}, {:.6}", r.s_1to2, r.s_2to1, r.s);
    println!("M           {:.6}", r.m);
    println!("correlators {:?}", value.correlators);
    println!("CHSH        {:.6}", value.value);
    println!("B(I, S)     {:.6}", bound_b(r.i, r.s)?);
    if r.freedom_of_choice {
        let v = check_model_consistency(&model)?;
        println!("verdict     {} (saturated: {})", if v.pass { "pass" } else { "FAIL" }, v.equality);
    } else {
        println!("weights depend on the settings; the bound does not apply");
    }
    Ok(())
}
