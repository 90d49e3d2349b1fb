//! Singlet-state models: the quantum joint distribution, the Toner-Bacon
//! one-bit protocol, their convex mixture, seeded Monte Carlo estimation of
//! correlators, and a scanner that looks for singlet models with
//! `S + 2I < 1`.
//!
//! Randomness comes from `ChaCha8Rng` seeded with `seed_from_u64(seed)`;
//! chunk `k` of a Monte Carlo run uses stream `k` of that generator, so
//! results do not depend on the number of worker threads. Uniform points on
//! the sphere are normalized triples of standard normal draws.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::chsh::{chsh_of, correlator, ChshValue};
use crate::error::{check_range, Error, Result};
use crate::info::{binary_entropy, channel_capacity};
use crate::model::{slot, JointDistribution, Outcome, PerPair, SettingPair};

pub const UNIT_TOLERANCE: f64 = 1e-9;
/// Samples per Monte Carlo chunk; each chunk owns one generator stream.
pub const CHUNK_SIZE: usize = 8192;
/// Largest change in any grid probability a perturbation may cause.
pub const BEHAVIOR_TOLERANCE: f64 = 1e-6;
/// Scanned models below `1 - COUNTEREXAMPLE_MARGIN` are flagged.
pub const COUNTEREXAMPLE_MARGIN: f64 = 1e-6;
/// Agreement required between analytic and sampled mixture measures.
pub const CONFIRMATION_TOLERANCE: f64 = 1e-9;

/// A measurement direction (unit 3-vector).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Direction([f64; 3]);

impl Direction {
    pub fn new(v: [f64; 3]) -> Result<Self> {
        let norm = norm(v);
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::NonUnitVector(v));
        }
        Ok(Direction(v))
    }

    /// Normalizes any non-zero vector.
    pub fn normalized(v: [f64; 3]) -> Result<Self> {
        let n = norm(v);
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::NonUnitVector(v));
        }
        Ok(Direction([v[0] / n, v[1] / n, v[2] / n]))
    }

    /// Direction at `degrees` in the x-z plane, measured from the z axis.
    pub fn planar(degrees: f64) -> Self {
        let t = degrees.to_radians();
        Direction([t.sin(), 0.0, t.cos()])
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let v: [f64; 3] = [
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            ];
            let n = norm(v);
            if n > 1e-12 {
                return Direction([v[0] / n, v[1] / n, v[2] / n]);
            }
        }
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        dot(self.0, other.0)
    }

    pub fn neg(&self) -> Direction {
        Direction([-self.0[0], -self.0[1], -self.0[2]])
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(v: [f64; 3]) -> f64 {
    dot(v, v).sqrt()
}

/// Shared randomness of the Toner-Bacon protocol: two independent uniform
/// unit vectors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TbHidden {
    pub lambda1: Direction,
    pub lambda2: Direction,
}

impl TbHidden {
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        TbHidden {
            lambda1: Direction::random(rng),
            lambda2: Direction::random(rng),
        }
    }

    /// `(-lambda1, -lambda2)`: flips both outcomes for almost every setting.
    pub fn antipode(&self) -> Self {
        TbHidden {
            lambda1: self.lambda1.neg(),
            lambda2: self.lambda2.neg(),
        }
    }
}

/// `P(a, b) = (1 - ab x.y) / 4`.
pub fn qm_singlet_dist(x: &Direction, y: &Direction) -> JointDistribution {
    let t = x.dot(y).clamp(-1.0, 1.0);
    let same = (1.0 - t) / 4.0;
    let opposite = (1.0 + t) / 4.0;
    JointDistribution::new_unchecked([same, opposite, opposite, same])
}

/// Toner-Bacon outputs: `a = -sgn(x.l1)`, bit `c = sgn(x.l1) sgn(x.l2)`,
/// `b = sgn(y.(l1 + c l2))`, with `sgn(0) = +1`.
pub fn tb_outcomes(x: &Direction, y: &Direction, h: &TbHidden) -> (Outcome, Outcome) {
    let s1 = Outcome::from_sign(x.dot(&h.lambda1)).value();
    let s2 = Outcome::from_sign(x.dot(&h.lambda2)).value();
    let c = s1 * s2;
    let a = Outcome::from_sign(x.dot(&h.lambda1)).flip();
    let l1 = h.lambda1.components();
    let l2 = h.lambda2.components();
    let mixed = [l1[0] + c * l2[0], l1[1] + c * l2[1], l1[2] + c * l2[2]];
    let b = Outcome::from_sign(dot(y.components(), mixed));
    (a, b)
}

/// Weight `w` on the Toner-Bacon component.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MixtureSpec {
    pub w: f64,
}

impl MixtureSpec {
    pub fn new(w: f64) -> Result<Self> {
        check_range("w", w, 0.0, 1.0, "[0, 1]")?;
        Ok(MixtureSpec { w })
    }
}

/// `w * point(a_TB, b_TB) + (1 - w) * qm_singlet_dist(x, y)`.
pub fn mixture_dist(spec: &MixtureSpec, x: &Direction, y: &Direction, h: &TbHidden) -> JointDistribution {
    let (a, b) = tb_outcomes(x, y, h);
    JointDistribution::point(a, b).mix(&qm_singlet_dist(x, y), spec.w)
}

/// Correlator of `mixture_dist`, without building the distribution.
fn mixture_correlator(spec: &MixtureSpec, x: &Direction, y: &Direction, h: &TbHidden) -> f64 {
    let (a, b) = tb_outcomes(x, y, h);
    spec.w * a.value() * b.value() - (1.0 - spec.w) * x.dot(y)
}

/// The four CHSH directions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChshSettings {
    pub x: Direction,
    pub xp: Direction,
    pub y: Direction,
    pub yp: Direction,
}

impl ChshSettings {
    /// Planar settings from angles in degrees.
    pub fn planar(x: f64, xp: f64, y: f64, yp: f64) -> Self {
        ChshSettings {
            x: Direction::planar(x),
            xp: Direction::planar(xp),
            y: Direction::planar(y),
            yp: Direction::planar(yp),
        }
    }

    pub fn pair(&self, pair: SettingPair) -> (Direction, Direction) {
        use crate::model::{FirstSetting, SecondSetting};
        let a = match pair.first() {
            FirstSetting::X => self.x,
            FirstSetting::XPrime => self.xp,
        };
        let b = match pair.second() {
            SecondSetting::Y => self.y,
            SecondSetting::YPrime => self.yp,
        };
        (a, b)
    }
}

impl Default for ChshSettings {
    /// First observer at 0° and 90°, second at 225° and 135°.
    fn default() -> Self {
        ChshSettings::planar(0.0, 90.0, 225.0, 135.0)
    }
}

/// CHSH value of the quantum singlet behavior, evaluated in closed form.
pub fn analytic_chsh(settings: &ChshSettings) -> ChshValue {
    chsh_of(&PerPair::from_fn(|pair| {
        let (x, y) = settings.pair(pair);
        qm_singlet_dist(&x, &y)
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    #[serde(rename = "E")]
    pub e: f64,
    pub stderr: f64,
    pub samples: usize,
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Monte Carlo average of the mixture correlator over uniform hidden
/// variables. `stderr` is the sample standard deviation over `sqrt(samples)`.
pub fn estimate_correlator(
    spec: &MixtureSpec,
    x: &Direction,
    y: &Direction,
    samples: usize,
    seed: u64,
) -> Result<Estimate> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    let chunks = samples.div_ceil(CHUNK_SIZE);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = chunk_rng(seed, k);
            let len = CHUNK_SIZE.min(samples - k * CHUNK_SIZE);
            let mut sum = 0.0;
            let mut sq = 0.0;
            for _ in 0..len {
                let h = TbHidden::sample(&mut rng);
                let v = mixture_correlator(spec, x, y, &h);
                sum += v;
                sq += v * v;
            }
            (sum, sq)
        })
        .collect();
    let (sum, sq) = partial
        .iter()
        .fold((0.0, 0.0), |(s, q), &(a, b)| (s + a, q + b));
    let nf = samples as f64;
    let mean = sum / nf;
    let stderr = if samples > 1 {
        let var = ((sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
        (var / nf).sqrt()
    } else {
        0.0
    };
    Ok(Estimate {
        e: mean,
        stderr,
        samples,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChshEstimate {
    pub value: f64,
    pub stderr: f64,
    pub correlators: [Estimate; 4],
}

/// Monte Carlo CHSH value. Setting pair `k` uses seed `seed + k`.
pub fn estimate_chsh(spec: &MixtureSpec, settings: &ChshSettings, samples: usize, seed: u64) -> Result<ChshEstimate> {
    let mut est = Vec::with_capacity(4);
    for pair in SettingPair::ALL {
        let (x, y) = settings.pair(pair);
        est.push(estimate_correlator(spec, &x, &y, samples, seed.wrapping_add(pair.index() as u64))?);
    }
    let correlators = [est[0], est[1], est[2], est[3]];
    Ok(ChshEstimate {
        value: est[0].e + est[1].e + est[2].e - est[3].e,
        stderr: est.iter().map(|e| e.stderr * e.stderr).sum::<f64>().sqrt(),
        correlators,
    })
}

/// Directions available to each observer.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SettingGrid {
    pub first: Vec<Direction>,
    pub second: Vec<Direction>,
}

impl SettingGrid {
    /// Fibonacci-lattice points for both observers, the second set rotated
    /// about the z axis so that no direction is repeated or antipodal across
    /// the two sets.
    pub fn fibonacci(count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidArgument("setting grid needs at least 2 directions".into()));
        }
        Ok(SettingGrid {
            first: fibonacci_sphere(count, 0.0),
            second: fibonacci_sphere(count, 0.5),
        })
    }

    pub fn from_chsh(settings: &ChshSettings) -> Self {
        SettingGrid {
            first: vec![settings.x, settings.xp],
            second: vec![settings.y, settings.yp],
        }
    }
}

fn fibonacci_sphere(count: usize, offset: f64) -> Vec<Direction> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|k| {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * (k as f64 + offset);
            Direction([r * phi.cos(), r * phi.sin(), z])
        })
        .collect()
}

/// A finite singlet model: equal-weight hidden variables, each with a joint
/// distribution for every pair of grid directions.
#[derive(Clone, Debug)]
pub struct GridModel {
    grid: SettingGrid,
    hidden: usize,
    dists: Vec<JointDistribution>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridMeasures {
    #[serde(rename = "I1")]
    pub i1: f64,
    #[serde(rename = "I2")]
    pub i2: f64,
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "S_1to2")]
    pub s_1to2: f64,
    #[serde(rename = "S_2to1")]
    pub s_2to1: f64,
    #[serde(rename = "S")]
    pub s: f64,
}

impl GridModel {
    /// Builds the model from `dist(k, i, j)` for hidden variable `k`, first
    /// direction `i` and second direction `j`.
    pub fn build(
        grid: SettingGrid,
        hidden: usize,
        mut dist: impl FnMut(usize, usize, usize) -> Result<JointDistribution>,
    ) -> Result<Self> {
        let (na, nb) = (grid.first.len(), grid.second.len());
        let mut dists = Vec::with_capacity(hidden * na * nb);
        for k in 0..hidden {
            for i in 0..na {
                for j in 0..nb {
                    dists.push(dist(k, i, j)?);
                }
            }
        }
        Ok(GridModel { grid, hidden, dists })
    }

    pub fn grid(&self) -> &SettingGrid {
        &self.grid
    }

    fn at(&self, k: usize, i: usize, j: usize) -> &JointDistribution {
        let (na, nb) = (self.grid.first.len(), self.grid.second.len());
        &self.dists[(k * na + i) * nb + j]
    }

    /// Equal-weight average over hidden variables, row-major over the grid.
    pub fn behavior(&self) -> Vec<[f64; 4]> {
        let (na, nb) = (self.grid.first.len(), self.grid.second.len());
        let mut out = vec![[0.0; 4]; na * nb];
        for k in 0..self.hidden {
            for i in 0..na {
                for j in 0..nb {
                    let p = self.at(k, i, j).probs();
                    let acc = &mut out[i * nb + j];
                    for s in 0..4 {
                        acc[s] += p[s];
                    }
                }
            }
        }
        let scale = 1.0 / self.hidden as f64;
        for acc in &mut out {
            for v in acc.iter_mut() {
                *v *= scale;
            }
        }
        out
    }

    pub fn measures(&self) -> GridMeasures {
        let (na, nb) = (self.grid.first.len(), self.grid.second.len());
        let (mut i1, mut i2, mut s12, mut s21) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
        for k in 0..self.hidden {
            for j in 0..nb {
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for i in 0..na {
                    let mg = self.at(k, i, j).marginals();
                    i1 = i1.max(mg.m.min(1.0 - mg.m));
                    i2 = i2.max(mg.n.min(1.0 - mg.n));
                    lo = lo.min(mg.n);
                    hi = hi.max(mg.n);
                }
                s12 = s12.max(hi - lo);
            }
            for i in 0..na {
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for j in 0..nb {
                    let m = self.at(k, i, j).marginals().m;
                    lo = lo.min(m);
                    hi = hi.max(m);
                }
                s21 = s21.max(hi - lo);
            }
        }
        GridMeasures {
            i1,
            i2,
            i: i1.max(i2),
            s_1to2: s12,
            s_2to1: s21,
            s: s12.max(s21),
        }
    }
}

fn max_abs_diff(a: &[[f64; 4]], b: &[[f64; 4]]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(p, q)| p.iter().zip(q).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}

/// Largest deviation of a grid behavior from the singlet prediction.
pub fn singlet_deviation(grid: &SettingGrid, behavior: &[[f64; 4]]) -> f64 {
    let expected: Vec<[f64; 4]> = grid
        .first
        .iter()
        .flat_map(|x| grid.second.iter().map(move |y| qm_singlet_dist(x, y).probs()))
        .collect();
    max_abs_diff(&expected, behavior)
}

/// `count` hidden variables made of `count / 2` samples and their antipodes.
pub fn antithetic_hidden(count: usize, seed: u64) -> Vec<TbHidden> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() + 1 < count {
        let h = TbHidden::sample(&mut rng);
        out.push(h);
        out.push(h.antipode());
    }
    if out.len() < count {
        out.push(TbHidden::sample(&mut rng));
    }
    out
}

pub fn mixture_grid_model(spec: &MixtureSpec, grid: &SettingGrid, hidden: &[TbHidden]) -> GridModel {
    let g = grid.clone();
    GridModel::build(grid.clone(), hidden.len(), |k, i, j| {
        Ok(mixture_dist(spec, &g.first[i], &g.second[j], &hidden[k]))
    })
    .expect("mixture distributions are valid")
}

const CONFIRM_SEED: u64 = 0x5eed_0001;
const CONFIRM_HIDDEN: usize = 64;
const CONFIRM_SETTINGS: usize = 8;

/// `I = (1 - w) / 2` and `S = w` for the mixture, confirmed against a sampled
/// finite version of the model.
pub fn mixture_measures(spec: &MixtureSpec) -> Result<(f64, f64)> {
    let i = (1.0 - spec.w) / 2.0;
    let s = spec.w;
    let grid = SettingGrid::fibonacci(CONFIRM_SETTINGS)?;
    let hidden = antithetic_hidden(CONFIRM_HIDDEN, CONFIRM_SEED);
    let measured = mixture_grid_model(spec, &grid, &hidden).measures();
    let checks = [
        ("I", measured.i, i),
        ("S", measured.s, s),
        ("S_1to2", measured.s_1to2, s),
        ("S_2to1", measured.s_2to1, 0.0),
    ];
    for (name, got, want) in checks {
        if (got - want).abs() > CONFIRMATION_TOLERANCE {
            return Err(Error::InvariantBreach(format!(
                "mixture w = {}: sampled {name} = {got}, analytic {want}",
                spec.w
            )));
        }
    }
    Ok((i, s))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanConfig {
    pub w_grid: Vec<f64>,
    /// Number of admissible perturbed models to collect.
    pub perturbed: usize,
    /// Hidden variables per model (antithetic pairs).
    pub hidden: usize,
    pub setting_count: usize,
    pub seed: u64,
    /// Proposal budget for perturbed models.
    pub max_proposals: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            w_grid: (0..=10).map(|k| k as f64 / 10.0).collect(),
            perturbed: 1000,
            hidden: 64,
            setting_count: 8,
            seed: 2024,
            max_proposals: 20_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Mixture,
    Perturbed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanEntry {
    pub family: Family,
    pub index: usize,
    pub w: f64,
    pub epsilon: f64,
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "S_plus_2I")]
    pub s_plus_2i: f64,
    #[serde(rename = "C_plus_H")]
    pub c_plus_h: f64,
    /// Largest probability change relative to the unperturbed model.
    pub perturbation_deviation: f64,
    /// Largest deviation of the finite model from the exact singlet.
    pub sampling_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanReport {
    pub note: &'static str,
    pub seed: u64,
    pub setting_count: usize,
    pub hidden: usize,
    pub mixture: Vec<ScanEntry>,
    pub perturbed_admitted: usize,
    pub proposals: usize,
    pub rejected_invalid: usize,
    pub rejected_behavior: usize,
    #[serde(rename = "min_S_plus_2I")]
    pub min_s_plus_2i: f64,
    #[serde(rename = "min_C_plus_H")]
    pub min_c_plus_h: f64,
    pub worst: Option<ScanEntry>,
    pub counterexample_candidates: Vec<ScanEntry>,
    #[serde(skip)]
    pub perturbed_entries: Vec<ScanEntry>,
}

pub const SCAN_NOTE: &str = "evidence only: a scan can exhibit a counterexample to S + 2I >= 1 but \
never prove it; the region 0 < S < 1/3 remains open and the scanned families cover it only partially";

fn scan_entry(family: Family, index: usize, w: f64, epsilon: f64, m: &GridMeasures) -> Result<ScanEntry> {
    let i = m.i.clamp(0.0, 0.5);
    let s = m.s.clamp(0.0, 1.0);
    Ok(ScanEntry {
        family,
        index,
        w,
        epsilon,
        i: m.i,
        s: m.s,
        s_plus_2i: m.s + 2.0 * m.i,
        c_plus_h: channel_capacity(s)? + binary_entropy(i)?,
        perturbation_deviation: 0.0,
        sampling_deviation: 0.0,
    })
}

enum Proposal {
    Admitted(ScanEntry),
    Invalid,
    BehaviorMismatch,
}

/// Random antithetic deformation of the quantum component of a mixture.
///
/// For hidden-variable pair `k` (a sample and its antipode) the quantum part's
/// marginals and correlator at directions `(x, y)` are shifted by
/// `+eps * (dm, dn, dcorr)` on the sample and `-eps * (dm, dn, dcorr)` on the
/// antipode, so the grid behavior is unchanged while `I` and `S` move.
struct Perturbation {
    w: f64,
    u: Direction,
    v: Direction,
    u2: Direction,
    coeffs: Vec<[f64; 4]>,
}

impl Perturbation {
    fn sample(rng: &mut ChaCha8Rng, pairs: usize) -> Self {
        let w = rng.random_range(0.0..1.0);
        let u = Direction::random(rng);
        let v = Direction::random(rng);
        let u2 = Direction::random(rng);
        let coeffs = (0..pairs)
            .map(|_| std::array::from_fn(|_| rng.random_range(-1.0..=1.0)))
            .collect();
        Perturbation { w, u, v, u2, coeffs }
    }

    /// Change of the quantum component's four probabilities per unit `eps`.
    fn direction(&self, k: usize, x: &Direction, y: &Direction) -> [f64; 4] {
        let [alpha, beta, gamma, delta] = self.coeffs[k / 2];
        let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        let xu = x.dot(&self.u);
        let yv = y.dot(&self.v);
        let dm = sign * alpha * xu;
        let dn = sign * (beta * yv + delta * x.dot(&self.u2) * yv);
        let dcorr = sign * gamma * xu * yv;
        let dc = (dcorr + 2.0 * (dm + dn)) / 4.0;
        [dc, dm - dc, dn - dc, dc - dm - dn]
    }
}

fn propose(index: usize, cfg: &ScanConfig, grid: &SettingGrid, hidden: &[TbHidden]) -> Result<Proposal> {
    let mut rng = chunk_rng(cfg.seed ^ 0x9e37_79b9_7f4a_7c15, index);
    let pert = Perturbation::sample(&mut rng, hidden.len().div_ceil(2));
    let spec = MixtureSpec::new(pert.w)?;
    let base = mixture_grid_model(&spec, grid, hidden);

    // Largest eps keeping every probability non-negative.
    let mut eps_max = f64::INFINITY;
    for (k, _) in hidden.iter().enumerate() {
        for (i, x) in grid.first.iter().enumerate() {
            for (j, y) in grid.second.iter().enumerate() {
                let p0 = base.at(k, i, j).probs();
                let d = pert.direction(k, x, y);
                for s in 0..4 {
                    let step = (1.0 - pert.w) * d[s];
                    if step < 0.0 {
                        eps_max = eps_max.min(p0[s] / -step);
                    }
                }
            }
        }
    }
    if !eps_max.is_finite() {
        eps_max = 0.0;
    }
    let eps = eps_max * rng.random_range(0.0..1.25);

    let built = GridModel::build(grid.clone(), hidden.len(), |k, i, j| {
        let p0 = base.at(k, i, j).probs();
        let d = pert.direction(k, &grid.first[i], &grid.second[j]);
        let mut p = [0.0; 4];
        for s in 0..4 {
            p[s] = p0[s] + (1.0 - pert.w) * eps * d[s];
        }
        JointDistribution::new(p)
    });
    let model = match built {
        Ok(model) => model,
        Err(_) => return Ok(Proposal::Invalid),
    };
    let base_behavior = base.behavior();
    let deviation = max_abs_diff(&model.behavior(), &base_behavior);
    if deviation > BEHAVIOR_TOLERANCE {
        return Ok(Proposal::BehaviorMismatch);
    }
    let mut entry = scan_entry(Family::Perturbed, index, pert.w, eps, &model.measures())?;
    entry.perturbation_deviation = deviation;
    entry.sampling_deviation = singlet_deviation(grid, &base_behavior);
    Ok(Proposal::Admitted(entry))
}

/// Measures `S + 2I` and `C(S) + H(I)` over the mixture family and over
/// random perturbations of it that leave the grid behavior unchanged.
pub fn conjecture_scan(cfg: &ScanConfig) -> Result<ScanReport> {
    if cfg.hidden < 2 {
        return Err(Error::InvalidArgument("scan needs at least 2 hidden variables".into()));
    }
    let grid = SettingGrid::fibonacci(cfg.setting_count)?;
    let hidden = antithetic_hidden(cfg.hidden, cfg.seed);

    let mut mixture = Vec::with_capacity(cfg.w_grid.len());
    for (index, &w) in cfg.w_grid.iter().enumerate() {
        let spec = MixtureSpec::new(w)?;
        let model = mixture_grid_model(&spec, &grid, &hidden);
        let mut entry = scan_entry(Family::Mixture, index, w, 0.0, &model.measures())?;
        entry.sampling_deviation = singlet_deviation(&grid, &model.behavior());
        mixture.push(entry);
    }

    let mut perturbed_entries = Vec::with_capacity(cfg.perturbed);
    let (mut rejected_invalid, mut rejected_behavior, mut proposals) = (0, 0, 0);
    const BATCH: usize = 256;
    while perturbed_entries.len() < cfg.perturbed && proposals < cfg.max_proposals {
        let batch_len = BATCH.min(cfg.max_proposals - proposals);
        let results: Vec<Result<Proposal>> = (proposals..proposals + batch_len)
            .into_par_iter()
            .map(|index| propose(index, cfg, &grid, &hidden))
            .collect();
        for result in results {
            if perturbed_entries.len() >= cfg.perturbed {
                break;
            }
            proposals += 1;
            match result? {
                Proposal::Admitted(entry) => perturbed_entries.push(entry),
                Proposal::Invalid => rejected_invalid += 1,
                Proposal::BehaviorMismatch => rejected_behavior += 1,
            }
        }
    }

    let all = mixture.iter().chain(&perturbed_entries);
    let worst = all
        .clone()
        .min_by(|a, b| a.s_plus_2i.total_cmp(&b.s_plus_2i))
        .copied();
    let min_c_plus_h = all.clone().map(|e| e.c_plus_h).fold(f64::INFINITY, f64::min);
    let counterexample_candidates = all
        .filter(|e| e.s_plus_2i < 1.0 - COUNTEREXAMPLE_MARGIN)
        .copied()
        .collect();
    Ok(ScanReport {
        note: SCAN_NOTE,
        seed: cfg.seed,
        setting_count: cfg.setting_count,
        hidden: hidden.len(),
        mixture,
        perturbed_admitted: perturbed_entries.len(),
        proposals,
        rejected_invalid,
        rejected_behavior,
        min_s_plus_2i: worst.map_or(f64::INFINITY, |e| e.s_plus_2i),
        min_c_plus_h,
        worst,
        counterexample_candidates,
        perturbed_entries,
    })
}

/// `(i, j, sampled correlator, singlet correlator)` for every grid cell.
pub fn grid_correlators(grid: &SettingGrid, behavior: &[[f64; 4]]) -> Vec<(usize, usize, f64, f64)> {
    let nb = grid.second.len();
    behavior
        .iter()
        .enumerate()
        .map(|(idx, p)| {
            let (i, j) = (idx / nb, idx % nb);
            let d = JointDistribution::new_unchecked(*p);
            (i, j, correlator(&d), -grid.first[i].dot(&grid.second[j]))
        })
        .collect()
}

/// Point distribution on the Toner-Bacon outcomes.
pub fn tb_dist(x: &Direction, y: &Direction, h: &TbHidden) -> JointDistribution {
    let (a, b) = tb_outcomes(x, y, h);
    let mut p = [0.0; 4];
    p[slot(a, b)] = 1.0;
    JointDistribution::new_unchecked(p)
}
