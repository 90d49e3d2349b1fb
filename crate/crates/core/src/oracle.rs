//! Grid oracle for the relaxed CHSH bound.
//!
//! For a single hidden variable, write each setting pair's distribution as
//! `(c, m - c, n - c, 1 + c - m - n)`. The CHSH combination is maximised over
//! the `c`'s by `4 - 2J` with
//!
//! ```text
//! J = |m1 - n1| + |m2 - n2| + |m3 - n3| + |m4 + n4 - 1|
//! ```
//!
//! so the oracle minimises `J` over marginals drawn from the admissible grid
//! `{0, step, ...} ∩ ([0, I] ∪ [1 - I, 1])` subject to the four signalling
//! constraints, then compares `4 - 2 min J` with [`bound_b`].
//!
//! The eight marginals and their eight couplings (four `J` terms, four
//! signalling constraints) form a single cycle, so the exact grid minimum is
//! found by dynamic programming around the cycle instead of enumerating the
//! full product. Ties are broken towards the lexicographically smallest
//! `(m1..m4, n1..n4)`, which is what a full enumeration in that order returns.

use rayon::prelude::*;
use serde::Serialize;

use crate::chsh::{bound_b, chsh_of, correlator};
use crate::error::{check_range, Error, Result};
use crate::model::{JointDistribution, LambdaModel, PerPair};

/// Slack on signalling constraints and on subinterval membership.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-12;
/// Two `J` values closer than this are treated as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;
/// Largest allowed excess of the oracle maximum over the analytic bound.
pub const BOUND_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_STEP: f64 = 0.05;
/// Keeps the cubic cycle search tractable.
pub const MAX_GRID_POINTS: usize = 2001;

/// Which marginal pairs the signalling budget constrains.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintLayout {
    /// Pairs that differ only in the other observer's setting:
    /// `|m1 - m3|, |m2 - m4|` (Y vs Y') and `|n1 - n2|, |n3 - n4|` (X vs X').
    #[default]
    Operational,
    /// `|m1 - m2|, |m3 - m4|, |n1 - n3|, |n2 - n4|`, i.e. the same constraint
    /// set with the labels of pairs 2 and 3 exchanged. `J` is symmetric under
    /// that exchange, so both layouts give the same maximum.
    Swapped,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleOptions {
    pub step: f64,
    /// Add `0, I, 1 - I, 1` to the uniform grid.
    pub endpoints: bool,
    pub layout: ConstraintLayout,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            step: DEFAULT_STEP,
            endpoints: true,
            layout: ConstraintLayout::Operational,
        }
    }
}

/// Marginals and `(+,+)` probabilities for the four setting pairs, indexed
/// `XY, X'Y, XY', X'Y'`. Ordered lexicographically over `(m, n, c)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
pub struct BoxParams {
    pub m: [f64; 4],
    pub n: [f64; 4],
    pub c: [f64; 4],
}

impl BoxParams {
    /// Checks `max(0, m + n - 1) <= c <= min(m, n)` for every pair.
    pub fn check_positivity(&self) -> Result<()> {
        for j in 0..4 {
            let (m, n, c) = (self.m[j], self.n[j], self.c[j]);
            let ok_range = (0.0..=1.0).contains(&m) && (0.0..=1.0).contains(&n);
            let lo = (m + n - 1.0).max(0.0);
            let hi = m.min(n);
            if !ok_range || c < lo - FEASIBILITY_TOLERANCE || c > hi + FEASIBILITY_TOLERANCE {
                return Err(Error::InvalidArgument(format!(
                    "pair {}: (m, n, c) = ({m}, {n}, {c}) violates positivity",
                    j + 1
                )));
            }
        }
        Ok(())
    }

    pub fn distributions(&self) -> Result<PerPair<JointDistribution>> {
        let mut out = Vec::with_capacity(4);
        for j in 0..4 {
            out.push(JointDistribution::from_marginals(self.m[j], self.n[j], self.c[j])?);
        }
        Ok(PerPair([out[0], out[1], out[2], out[3]]))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "max_E")]
    pub max_e: f64,
    #[serde(rename = "min_J")]
    pub min_j: f64,
    pub argmax: BoxParams,
    #[serde(rename = "analytic_B")]
    pub analytic_b: f64,
    pub gap: f64,
    pub grid_step: f64,
    pub grid_points: usize,
    pub endpoints: bool,
}

pub fn j_functional(m: &[f64; 4], n: &[f64; 4]) -> f64 {
    (m[0] - n[0]).abs() + (m[1] - n[1]).abs() + (m[2] - n[2]).abs() + (m[3] + n[3] - 1.0).abs()
}

/// Largest CHSH value over the `c`'s for fixed marginals, with the
/// maximising `c`'s. The first three correlators are pushed up to
/// `1 - 2|m - n|` and the subtracted one down to `2|m + n - 1| - 1`.
pub fn e_max_given_marginals(m: [f64; 4], n: [f64; 4]) -> Result<(f64, BoxParams)> {
    let mut c = [0.0; 4];
    for j in 0..3 {
        c[j] = m[j].min(n[j]);
    }
    c[3] = (m[3] + n[3] - 1.0).max(0.0);
    let params = BoxParams { m, n, c };
    params.check_positivity()?;
    let dists = params.distributions()?;
    let e = chsh_of(&dists).value;
    let expected = 4.0 - 2.0 * j_functional(&m, &n);
    if (e - expected).abs() > 1e-12 {
        return Err(Error::InvariantBreach(format!(
            "direct CHSH {e} differs from 4 - 2J = {expected}"
        )));
    }
    Ok((e, params))
}

/// Grid points lying in `[0, I] ∪ [1 - I, 1]`, sorted and deduplicated.
pub fn admissible_grid(i: f64, step: f64, endpoints: bool) -> Result<Vec<f64>> {
    check_range("I", i, 0.0, 0.5, "[0, 1/2]")?;
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidArgument(format!("grid step {step} must lie in (0, 1]")));
    }
    let count = (1.0 / step + 1e-9).floor() as usize;
    if count + 1 > MAX_GRID_POINTS {
        return Err(Error::InvalidArgument(format!(
            "grid step {step} gives more than {MAX_GRID_POINTS} points"
        )));
    }
    let admissible = |p: f64| p <= i + FEASIBILITY_TOLERANCE || p >= 1.0 - i - FEASIBILITY_TOLERANCE;
    let mut points: Vec<f64> = Vec::new();
    if endpoints {
        points.extend([0.0, i, 1.0 - i, 1.0]);
    }
    for k in 0..=count {
        let p = (k as f64 * step).min(1.0);
        if admissible(p) && points.iter().all(|q| (q - p).abs() > FEASIBILITY_TOLERANCE) {
            points.push(p);
        }
    }
    points.sort_by(f64::total_cmp);
    points.dedup_by(|a, b| (*a - *b).abs() <= FEASIBILITY_TOLERANCE);
    Ok(points)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Coupling {
    /// `|a - b|`
    Diff,
    /// `|a + b - 1|`
    Anti,
    /// zero if `|a - b| <= S`, infinite otherwise
    Budget,
}

// Variables: m1..m4 -> 0..3, n1..n4 -> 4..7.
fn couplings(layout: ConstraintLayout) -> [(usize, usize, Coupling); 8] {
    use Coupling::*;
    let budget = match layout {
        ConstraintLayout::Operational => [(0, 2), (1, 3), (4, 5), (6, 7)],
        ConstraintLayout::Swapped => [(0, 1), (2, 3), (4, 6), (5, 7)],
    };
    [
        (0, 4, Diff),
        (1, 5, Diff),
        (2, 6, Diff),
        (3, 7, Anti),
        (budget[0].0, budget[0].1, Budget),
        (budget[1].0, budget[1].1, Budget),
        (budget[2].0, budget[2].1, Budget),
        (budget[3].0, budget[3].1, Budget),
    ]
}

/// The couplings arranged as a closed walk `order[0] - order[1] - ... - order[0]`,
/// with `kinds[k]` joining `order[k]` and `order[k + 1 mod 8]`.
fn cycle(layout: ConstraintLayout) -> ([usize; 8], [Coupling; 8]) {
    let edges = couplings(layout);
    let mut order = [0usize; 8];
    let mut kinds = [Coupling::Diff; 8];
    let mut used = [false; 8];
    let mut current = 0usize;
    for k in 0..8 {
        order[k] = current;
        let (idx, &(a, b, kind)) = edges
            .iter()
            .enumerate()
            .find(|(idx, &(a, b, _))| !used[*idx] && (a == current || b == current))
            .expect("every variable has two couplings");
        used[idx] = true;
        kinds[k] = kind;
        current = if a == current { b } else { a };
    }
    debug_assert_eq!(current, 0);
    (order, kinds)
}

struct CycleSearch<'a> {
    grid: &'a [f64],
    order: [usize; 8],
    kinds: [Coupling; 8],
    diff: Vec<f64>,
    anti: Vec<f64>,
    budget: Vec<f64>,
}

impl<'a> CycleSearch<'a> {
    fn new(grid: &'a [f64], s: f64, layout: ConstraintLayout) -> Self {
        let g = grid.len();
        let mut diff = vec![0.0; g * g];
        let mut anti = vec![0.0; g * g];
        let mut budget = vec![0.0; g * g];
        for (a, &x) in grid.iter().enumerate() {
            for (b, &y) in grid.iter().enumerate() {
                diff[a * g + b] = (x - y).abs();
                anti[a * g + b] = (x + y - 1.0).abs();
                budget[a * g + b] = if (x - y).abs() <= s + FEASIBILITY_TOLERANCE {
                    0.0
                } else {
                    f64::INFINITY
                };
            }
        }
        let (order, kinds) = cycle(layout);
        CycleSearch {
            grid,
            order,
            kinds,
            diff,
            anti,
            budget,
        }
    }

    fn cost(&self, kind: Coupling, a: usize, b: usize) -> f64 {
        let g = self.grid.len();
        match kind {
            Coupling::Diff => self.diff[a * g + b],
            Coupling::Anti => self.anti[a * g + b],
            Coupling::Budget => self.budget[a * g + b],
        }
    }

    /// Minimum `J` with variable `v` restricted to `domains[v]`.
    fn min_j(&self, domains: &[Vec<usize>; 8]) -> f64 {
        let start = &domains[self.order[0]];
        start
            .par_iter()
            .map(|&s0| self.min_j_from(s0, domains))
            .reduce(|| f64::INFINITY, f64::min)
    }

    fn min_j_from(&self, s0: usize, domains: &[Vec<usize>; 8]) -> f64 {
        let first = &domains[self.order[1]];
        let mut cur: Vec<f64> = first.iter().map(|&x| self.cost(self.kinds[0], s0, x)).collect();
        let mut cur_dom = first;
        for k in 1..7 {
            let next_dom = &domains[self.order[k + 1]];
            let kind = self.kinds[k];
            let next: Vec<f64> = next_dom
                .iter()
                .map(|&y| {
                    cur_dom
                        .iter()
                        .zip(&cur)
                        .map(|(&x, &acc)| acc + self.cost(kind, x, y))
                        .fold(f64::INFINITY, f64::min)
                })
                .collect();
            cur = next;
            cur_dom = next_dom;
        }
        cur_dom
            .iter()
            .zip(&cur)
            .map(|(&x, &acc)| acc + self.cost(self.kinds[7], x, s0))
            .fold(f64::INFINITY, f64::min)
    }

    /// Lexicographically smallest `(m1..m4, n1..n4)` reaching `best`.
    fn argmin(&self, best: f64) -> Option<[usize; 8]> {
        let full: Vec<usize> = (0..self.grid.len()).collect();
        let mut domains: [Vec<usize>; 8] = std::array::from_fn(|_| full.clone());
        let mut chosen = [0usize; 8];
        for var in 0..8 {
            let candidates = std::mem::take(&mut domains[var]);
            let mut found = None;
            for &value in &candidates {
                domains[var] = vec![value];
                if self.min_j(&domains) <= best + TIE_TOLERANCE {
                    found = Some(value);
                    break;
                }
            }
            chosen[var] = found?;
        }
        Some(chosen)
    }
}

pub fn brute_force_max(i: f64, s: f64, grid_step: f64) -> Result<OracleReport> {
    brute_force_max_with(
        i,
        s,
        &OracleOptions {
            step: grid_step,
            ..OracleOptions::default()
        },
    )
}

/// Maximum of the CHSH combination over single-variable boxes whose
/// marginals lie on the admissible grid and respect the signalling budget.
pub fn brute_force_max_with(i: f64, s: f64, opts: &OracleOptions) -> Result<OracleReport> {
    check_range("S", s, 0.0, 1.0, "[0, 1]")?;
    let analytic_b = bound_b(i, s)?;
    let grid = admissible_grid(i, opts.step, opts.endpoints)?;
    let search = CycleSearch::new(&grid, s, opts.layout);
    let full: Vec<usize> = (0..grid.len()).collect();
    let domains: [Vec<usize>; 8] = std::array::from_fn(|_| full.clone());
    let best = search.min_j(&domains);
    if !best.is_finite() {
        // Equal marginals everywhere always satisfy the budget.
        return Err(Error::InvariantBreach("no feasible grid point".into()));
    }
    let idx = search
        .argmin(best)
        .ok_or_else(|| Error::InvariantBreach("argmin reconstruction failed".into()))?;
    let m = [grid[idx[0]], grid[idx[1]], grid[idx[2]], grid[idx[3]]];
    let n = [grid[idx[4]], grid[idx[5]], grid[idx[6]], grid[idx[7]]];
    let (max_e, argmax) = e_max_given_marginals(m, n)?;
    let gap = analytic_b - max_e;
    if gap < -BOUND_TOLERANCE {
        return Err(Error::InvariantBreach(format!(
            "oracle maximum {max_e} exceeds B({i}, {s}) = {analytic_b}"
        )));
    }
    Ok(OracleReport {
        i,
        s,
        max_e,
        min_j: j_functional(&m, &n),
        argmax,
        analytic_b,
        gap,
        grid_step: opts.step,
        grid_points: grid.len(),
        endpoints: opts.endpoints,
    })
}

/// Runs the oracle on every `(I, S)` cell and checks `0 <= gap <= 4 * step`.
pub fn verify_tightness(i_grid: &[f64], s_grid: &[f64], opts: &OracleOptions) -> Result<Vec<OracleReport>> {
    let mut out = Vec::with_capacity(i_grid.len() * s_grid.len());
    for &i in i_grid {
        for &s in s_grid {
            let report = brute_force_max_with(i, s, opts)?;
            if report.gap > 4.0 * opts.step + BOUND_TOLERANCE {
                return Err(Error::InvariantBreach(format!(
                    "bound not approached at (I, S) = ({i}, {s}): gap {}",
                    report.gap
                )));
            }
            out.push(report);
        }
    }
    Ok(out)
}

/// Materializes oracle parameters as a one-entry model.
pub fn argmax_to_model(params: &BoxParams) -> Result<LambdaModel> {
    params.check_positivity()?;
    Ok(LambdaModel::single("oracle-argmax", params.distributions()?))
}

/// CHSH value of the box described by `params`, via explicit correlators.
pub fn direct_chsh(params: &BoxParams) -> Result<f64> {
    let dists = params.distributions()?;
    let e: Vec<f64> = dists.0.iter().map(correlator).collect();
    Ok(e[0] + e[1] + e[2] - e[3])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::make_pr_box;

    #[test]
    fn j_examples() {
        let i = 0.2;
        assert!((j_functional(&[i; 4], &[i; 4]) - 0.6).abs() < 1e-15);
        assert_eq!(j_functional(&[0.5; 4], &[0.5; 4]), 0.0);
        assert_eq!(j_functional(&[0.0; 4], &[1.0; 4]), 3.0);
    }

    #[test]
    fn e_max_examples() {
        let (e, p) = e_max_given_marginals([0.5; 4], [0.5; 4]).unwrap();
        assert_eq!(e, 4.0);
        assert_eq!(p.c, [0.5, 0.5, 0.5, 0.0]);
        assert_eq!(argmax_to_model(&p).unwrap().lambdas()[0].dists, make_pr_box().lambdas()[0].dists);

        let (e, _) = e_max_given_marginals([0.25; 4], [0.25; 4]).unwrap();
        assert_eq!(e, 3.0);

        // c = (0, 0, 0, 0): every distribution is (0, 0, 1, 0), correlator -1.
        let (e, p) = e_max_given_marginals([0.0; 4], [1.0; 4]).unwrap();
        assert_eq!(e, -2.0);
        assert_eq!(direct_chsh(&p).unwrap(), -2.0);
    }

    #[test]
    fn grid_contents() {
        let g = admissible_grid(0.2, 0.05, true).unwrap();
        assert_eq!(g.len(), 10);
        assert_eq!(g[4], 0.2);
        assert_eq!(g[5], 0.8);
        let g = admissible_grid(0.23, 0.1, true).unwrap();
        assert!(g.contains(&0.23) && g.contains(&0.77));
        let g = admissible_grid(0.23, 0.1, false).unwrap();
        assert!(!g.contains(&0.23));
        assert!(admissible_grid(0.2, 0.0, true).is_err());
        assert!(admissible_grid(0.2, 1e-4, true).is_err());
    }

    #[test]
    fn cycle_visits_every_variable() {
        for layout in [ConstraintLayout::Operational, ConstraintLayout::Swapped] {
            let (order, kinds) = cycle(layout);
            let mut seen = order;
            seen.sort();
            assert_eq!(seen, [0, 1, 2, 3, 4, 5, 6, 7]);
            assert_eq!(kinds.iter().filter(|k| **k == Coupling::Budget).count(), 4);
        }
    }

    #[test]
    fn oracle_examples() {
        let r = brute_force_max(0.0, 0.0, 0.05).unwrap();
        assert_eq!(r.max_e, 2.0);
        let r = brute_force_max(0.25, 0.0, 0.05).unwrap();
        assert_eq!(r.max_e, 3.0);
        assert_eq!(r.gap, 0.0);
        let r = brute_force_max(0.2, 0.6, 0.05).unwrap();
        assert_eq!(r.max_e, 4.0);
        assert_eq!(r.analytic_b, 4.0);
    }

    #[test]
    fn argmax_respects_budget() {
        use crate::measures::measure_all;
        for (i, s) in [(0.25, 0.0), (0.3, 0.4), (0.1, 0.3), (0.2, 0.7)] {
            let r = brute_force_max(i, s, 0.05).unwrap();
            let model = argmax_to_model(&r.argmax).unwrap();
            let m = measure_all(&model);
            assert!(m.i <= i + 1e-12 && m.s <= s + 1e-12, "{i} {s} -> {m:?}");
            let e = crate::chsh::chsh(&crate::model::behavior_of(&model)).value;
            assert!((e - r.max_e).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_params_rejected() {
        let p = BoxParams {
            m: [0.5; 4],
            n: [0.5; 4],
            c: [0.6, 0.5, 0.5, 0.0],
        };
        assert!(argmax_to_model(&p).is_err());
    }
}
