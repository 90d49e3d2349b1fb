//! Indeterminism and signalling in hidden-variable models of CHSH
//! correlations.
//!
//! - [`model`]: behaviors, finite hidden-variable models, the model file format
//! - [`measures`]: degrees of indeterminism `I`, signalling `S`, measurement
//!   dependence `M`
//! - [`chsh`]: correlators, the relaxed bound `B(I, S)`, violation thresholds
//! - [`info`]: binary entropy and channel-capacity forms of the thresholds
//! - [`boxes`]: PR box and the two saturating box families
//! - [`oracle`]: grid search that independently checks `B(I, S)`
//! - [`singlet`]: quantum, Toner-Bacon and mixed singlet models, Monte Carlo
//!   estimation, and the `S + 2I >= 1` scanner
//! - [`cli`]: the `relaxed-bell` command-line front end
//!
//! ## Examples
//!
//! ```text
//! cargo run --example analyze_model [model.json]   measures, CHSH and verdict
//! cargo run --example boxes                        box families against B(I, S)
//! cargo run --release --example oracle_sweep       max CHSH table over (I, S)
//! cargo run --release --example singlet_monte_carlo
//! cargo run --release --example conjecture_scan
//! cargo run --example info_thresholds              thresholds in bits
//! ```
//!
//! ```
//! use relaxed_bell::boxes::make_nosignal_box;
//! use relaxed_bell::chsh::{bound_b, chsh};
//! use relaxed_bell::measures::measure_all;
//! use relaxed_bell::behavior_of;
//!
//! let model = make_nosignal_box(0.25)?;
//! let r = measure_all(&model);
//! assert_eq!(chsh(&behavior_of(&model)).value, bound_b(r.i, r.s)?);
//! # Ok::<(), relaxed_bell::Error>(())
//! ```

pub mod boxes;
pub mod chsh;
pub mod cli;
pub mod error;
pub mod info;
pub mod measures;
pub mod model;
pub mod oracle;
pub mod singlet;

pub use error::{Error, Result};
pub use model::{behavior_of, Behavior, JointDistribution, LambdaModel, Outcome, PerPair, SettingPair};
