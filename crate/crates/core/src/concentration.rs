//! Lower-tail bounds for weighted subset counts of a binomial random set,
//! with exact and Monte Carlo oracles, and the two corollaries for bounded
//! weights and for sampling whole blocks.

use std::collections::BTreeMap;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hypercore::Hypergraph;
use crate::vertex_set::{Vertex, VertexSet};

/// Nonnegative weights on subsets of a ground set of at most 64 elements,
/// and the inclusion probability of the random subset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSystem {
    ground: usize,
    p: f64,
    /// Subset bitmask to weight; zero weights are not stored.
    weights: BTreeMap<u64, f64>,
}

impl WeightSystem {
    pub fn new(ground: usize, p: f64) -> Result<Self> {
        if ground == 0 || ground > 64 {
            return invalid(format!("ground set size {ground} outside 1..=64"));
        }
        if !(0.0..=1.0).contains(&p) {
            return invalid(format!("probability {p} outside [0, 1]"));
        }
        Ok(WeightSystem {
            ground,
            p,
            weights: BTreeMap::new(),
        })
    }

    /// Adds `w` to the weight of `set`.
    pub fn add(&mut self, set: &[usize], w: f64) -> Result<()> {
        if !(w >= 0.0 && w.is_finite()) {
            return invalid(format!("weight {w} is not a nonnegative number"));
        }
        let mut mask = 0u64;
        for &v in set {
            if v >= self.ground {
                return invalid(format!("element {v} outside the ground set"));
            }
            mask |= 1 << v;
        }
        if w > 0.0 {
            *self.weights.entry(mask).or_insert(0.0) += w;
        }
        Ok(())
    }

    pub fn ground(&self) -> usize {
        self.ground
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn support(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.weights.iter().map(|(&m, &w)| (m, w))
    }

    pub fn expectation(&self) -> f64 {
        self.support()
            .map(|(a, w)| w * self.p.powi(a.count_ones() as i32))
            .sum()
    }

    /// Sum over ordered pairs `(A, B)` with `A ∩ B ≠ ∅`, including `A = B`.
    pub fn delta(&self) -> f64 {
        let s: Vec<(u64, f64)> = self.support().collect();
        let mut total = 0.0;
        for &(a, wa) in &s {
            for &(b, wb) in &s {
                if a & b != 0 {
                    total += wa * wb * self.p.powi((a | b).count_ones() as i32);
                }
            }
        }
        total
    }

    /// `X` for the outcome whose members are the bits of `outcome`.
    pub fn value(&self, outcome: u64) -> f64 {
        self.support()
            .filter(|(a, _)| a & !outcome == 0)
            .map(|(_, w)| w)
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JansonBound {
    pub expectation: f64,
    pub delta: f64,
    pub t: f64,
    pub bound: f64,
    /// `Δ = 0` with `t > 0`: the tail event is impossible.
    pub degenerate: bool,
}

fn tolerance(ex: f64) -> f64 {
    1e-9 * ex.abs().max(1.0)
}

/// `P(X ≤ EX − t) ≤ exp(−t²/(2Δ))`.
pub fn janson_bound(ws: &WeightSystem, t: f64) -> Result<JansonBound> {
    let expectation = ws.expectation();
    if !(t >= 0.0 && t <= expectation + tolerance(expectation)) {
        return invalid(format!("t = {t} outside [0, EX = {expectation}]"));
    }
    let delta = ws.delta();
    let degenerate = delta == 0.0 && t > 0.0;
    let bound = if t == 0.0 {
        1.0
    } else if degenerate {
        0.0
    } else {
        (-t * t / (2.0 * delta)).exp()
    };
    Ok(JansonBound {
        expectation,
        delta,
        t,
        bound,
        degenerate,
    })
}

pub const EXACT_TAIL_MAX_GROUND: usize = 20;

/// `P(X ≤ EX − t)` by summing over all `2^|V|` outcomes.
pub fn janson_exact_tail(ws: &WeightSystem, t: f64) -> Result<f64> {
    if ws.ground > EXACT_TAIL_MAX_GROUND {
        return invalid(format!(
            "exact tail needs |V| <= {EXACT_TAIL_MAX_GROUND}, got {}",
            ws.ground
        ));
    }
    let ex = ws.expectation();
    let threshold = ex - t + tolerance(ex);
    let (p, q) = (ws.p, 1.0 - ws.p);
    let n = ws.ground as i32;
    let mut tail = 0.0;
    for outcome in 0..(1u64 << ws.ground) {
        if ws.value(outcome) <= threshold {
            let k = outcome.count_ones() as i32;
            tail += p.powi(k) * q.powi(n - k);
        }
    }
    Ok(tail.min(1.0))
}

/// A Monte Carlo frequency with its 95% Wilson score interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub trials: u64,
    pub hits: u64,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Estimate {
    pub fn from_counts(hits: u64, trials: u64) -> Self {
        let (lower, upper) = wilson(hits, trials, 1.959_963_984_540_054);
        Estimate {
            trials,
            hits,
            estimate: if trials == 0 {
                0.0
            } else {
                hits as f64 / trials as f64
            },
            lower,
            upper,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower - 1e-12 <= x && x <= self.upper + 1e-12
    }
}

pub fn wilson(hits: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = hits as f64 / n;
    let z2 = z * z;
    let centre = (phat + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

const CHUNK: u64 = 4096;

/// Counts hits over `trials` draws split into fixed chunks; chunk `c` uses
/// stream `c` of the seed, so results do not depend on the thread count.
fn chunked_hits(trials: u64, seed: u64, hit: impl Fn(&mut ChaCha8Rng) -> bool + Sync) -> u64 {
    let chunks = trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let len = CHUNK.min(trials - c * CHUNK);
            (0..len).filter(|_| hit(&mut rng)).count() as u64
        })
        .sum()
}

pub fn janson_mc_tail(ws: &WeightSystem, t: f64, trials: u64, seed: u64) -> Result<Estimate> {
    if trials == 0 {
        return invalid("at least one trial is needed");
    }
    let ex = ws.expectation();
    let threshold = ex - t + tolerance(ex);
    let hits = chunked_hits(trials, seed, |rng| {
        let mut outcome = 0u64;
        for v in 0..ws.ground {
            if rng.gen_bool(ws.p) {
                outcome |= 1 << v;
            }
        }
        ws.value(outcome) <= threshold
    });
    Ok(Estimate::from_counts(hits, trials))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub bound: f64,
    /// The bound is at least 1 and says nothing.
    pub vacuous: bool,
}

impl TailBound {
    fn new(bound: f64) -> Self {
        TailBound {
            bound,
            vacuous: bound >= 1.0,
        }
    }
}

/// `3·exp(−ξ²m/(12k²))`, the two-sided bound for `|X − EX| ≥ ξm^k` with
/// weights in `[0, 1]` on `k`-sets and `p = m/|V|`.
pub fn bounded_tail_bound(ground: usize, m: usize, k: usize, xi: f64) -> Result<TailBound> {
    if !(ground >= m && m >= k && k >= 1) {
        return invalid(format!("need |V| >= m >= k >= 1, got {ground}, {m}, {k}"));
    }
    if !(xi > 0.0 && xi < 1.0) {
        return invalid(format!("xi = {xi} outside (0, 1)"));
    }
    let k = k as f64;
    Ok(TailBound::new(
        3.0 * (-xi * xi * m as f64 / (12.0 * k * k)).exp(),
    ))
}

/// Two-sided deviation frequency of `X` over random `V_p`, `p = m/|V|`, for
/// weights on `k`-sets given as a weight system.
pub fn bounded_mc_deviation(
    ws: &WeightSystem,
    k: usize,
    m: usize,
    xi: f64,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    if trials == 0 {
        return invalid("at least one trial is needed");
    }
    let ex = ws.expectation();
    let gap = xi * (m as f64).powi(k as i32);
    let hits = chunked_hits(trials, seed, |rng| {
        let mut outcome = 0u64;
        for v in 0..ws.ground {
            if rng.gen_bool(ws.p) {
                outcome |= 1 << v;
            }
        }
        (ws.value(outcome) - ex).abs() >= gap
    });
    Ok(Estimate::from_counts(hits, trials))
}

/// `12√m·exp(−ξ²m/(48k^{2k+2}))` without any range check.
pub fn block_sampling_formula(m: usize, k: usize, xi: f64) -> f64 {
    let m = m as f64;
    let kk = (k as f64).powi(2 * k as i32 + 2);
    12.0 * m.sqrt() * (-xi * xi * m / (48.0 * kk)).exp()
}

/// The block-sampling bound, requiring `ν ≥ m ≥ k` and `16k²/m < ξ < 1`.
pub fn block_sampling_bound(nu: usize, m: usize, k: usize, xi: f64) -> Result<TailBound> {
    if !(nu >= m && m >= k && k >= 1) {
        return invalid(format!("need nu >= m >= k >= 1, got {nu}, {m}, {k}"));
    }
    let floor = 16.0 * (k * k) as f64 / m as f64;
    if xi <= floor {
        return invalid(format!("xi = {xi} not above 16k^2/m = {floor}"));
    }
    if xi >= 1.0 {
        return invalid(format!("xi = {xi} not below 1"));
    }
    Ok(TailBound::new(block_sampling_formula(m, k, xi)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreconditionPolicy {
    /// Violated preconditions are errors.
    Strict,
    /// Violations are listed in the result and the check still runs.
    Report,
}

/// What the block sampling counts.
pub enum Sampled<'a> {
    /// Ordered tuples `Q ⊆ V^k`; counts `|Q ∩ S^k|`.
    Tuples {
        universe: usize,
        k: usize,
        tuples: &'a [Vec<Vertex>],
    },
    /// Edges of a `k`-uniform hypergraph inside `S`.
    Edges(&'a Hypergraph),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockCheck {
    pub density: f64,
    pub eta: f64,
    pub xi: f64,
    pub samples: u64,
    pub empirical: Estimate,
    pub bound: TailBound,
    /// Empirical frequency at most the bound; a vacuous bound always passes.
    pub pass: bool,
    pub violations: Vec<String>,
}

/// Ordered tuples grouped by their first `k − 1` coordinates.
struct PrefixTable {
    rows: Vec<(Vec<Vertex>, VertexSet)>,
}

impl PrefixTable {
    fn new(universe: usize, tuples: impl IntoIterator<Item = Vec<Vertex>>) -> Self {
        let mut map: BTreeMap<Vec<Vertex>, VertexSet> = BTreeMap::new();
        for t in tuples {
            let (last, prefix) = t.split_last().expect("nonempty tuple");
            map.entry(prefix.to_vec())
                .or_insert_with(|| VertexSet::new(universe))
                .insert(*last);
        }
        PrefixTable {
            rows: map.into_iter().collect(),
        }
    }

    fn len(&self) -> usize {
        self.rows.iter().map(|(_, s)| s.len()).sum()
    }

    fn count_inside(&self, s: &VertexSet) -> usize {
        self.rows
            .iter()
            .filter(|(p, _)| p.iter().all(|&v| s.contains(v)))
            .map(|(_, last)| last.intersection_len(s))
            .sum()
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Samples `trials` uniformly random `m`-sets of blocks and counts how often
/// the count inside their union deviates from its density prediction by at
/// least `ξ(Mm)^k` (scaled by `1/k!` for hypergraph edges).
pub fn block_sampling_check(
    target: Sampled<'_>,
    blocks: &[VertexSet],
    m: usize,
    xi: f64,
    trials: u64,
    seed: u64,
    policy: PreconditionPolicy,
) -> Result<BlockCheck> {
    let (universe, k, table, scale) = match target {
        Sampled::Tuples {
            universe,
            k,
            tuples,
        } => {
            if tuples
                .iter()
                .any(|t| t.len() != k || t.iter().any(|&v| v >= universe))
            {
                return invalid("tuples must have k coordinates below the universe size");
            }
            (
                universe,
                k,
                PrefixTable::new(universe, tuples.iter().cloned()),
                1.0,
            )
        }
        Sampled::Edges(h) => {
            let mut ordered = Vec::new();
            for e in h.edges() {
                permutations(e, &mut ordered);
            }
            (
                h.n(),
                h.k(),
                PrefixTable::new(h.n(), ordered),
                factorial(h.k()),
            )
        }
    };
    let nu = blocks.len();
    let block_size = blocks.first().map_or(0, VertexSet::len);
    let mut covered = VertexSet::new(universe);
    for b in blocks {
        if b.len() != block_size || b.universe() != universe || !b.is_disjoint(&covered) {
            return invalid("blocks must be disjoint, of equal size, over the same universe");
        }
        covered.union_with(b);
    }
    let rest = universe - covered.len();
    let size = universe as f64;
    let eta = (block_size.max(rest) as f64 / size) * (1.0 + 1e-12) + f64::MIN_POSITIVE;

    let mut violations = Vec::new();
    let kf = k as f64;
    let mut need = |ok: bool, msg: String| {
        if !ok {
            violations.push(msg);
        }
    };
    need(m >= k && k >= 1, format!("m = {m} < k = {k}"));
    need(nu >= m, format!("nu = {nu} < m = {m}"));
    need(
        eta < 1.0 / (2.0 * kf),
        format!("eta = {eta:.4} not below 1/(2k)"),
    );
    let lower = (8.0 * kf * kf * eta).max(16.0 * kf * kf / m as f64);
    need(
        xi > lower,
        format!("xi = {xi} not above max(8k^2 eta, 16k^2/m) = {lower:.4}"),
    );
    need(xi < 1.0, format!("xi = {xi} not below 1"));
    if policy == PreconditionPolicy::Strict && !violations.is_empty() {
        return Err(Error::InvalidArgument(violations.join("; ")));
    }
    if nu < m || m == 0 {
        return invalid(format!("cannot sample {m} of {nu} blocks"));
    }

    let density = table.len() as f64 / size.powi(k as i32);
    let sm = (block_size * m) as f64;
    let predicted = density * sm.powi(k as i32) / scale;
    let gap = xi * sm.powi(k as i32) / scale;
    let hits = chunked_hits(trials, seed, |rng| {
        let mut s = VertexSet::new(universe);
        for i in index::sample(rng, nu, m) {
            s.union_with(&blocks[i]);
        }
        let count = table.count_inside(&s) as f64 / scale;
        (count - predicted).abs() >= gap
    });
    let empirical = Estimate::from_counts(hits, trials);
    let bound = TailBound::new(block_sampling_formula(m, k, xi));
    let pass = bound.vacuous || empirical.estimate <= bound.bound;
    Ok(BlockCheck {
        density,
        eta,
        xi,
        samples: trials,
        empirical,
        bound,
        pass,
        violations,
    })
}

fn permutations(e: &[Vertex], out: &mut Vec<Vec<Vertex>>) {
    fn rec(rest: &mut Vec<Vertex>, cur: &mut Vec<Vertex>, out: &mut Vec<Vec<Vertex>>) {
        if rest.is_empty() {
            out.push(cur.clone());
            return;
        }
        for i in 0..rest.len() {
            let v = rest.remove(i);
            cur.push(v);
            rec(rest, cur, out);
            cur.pop();
            rest.insert(i, v);
        }
    }
    rec(&mut e.to_vec(), &mut Vec::new(), out);
}

/// Consecutive blocks of `block_size` vertices; the remainder is left out.
pub fn consecutive_blocks(universe: usize, block_size: usize) -> Vec<VertexSet> {
    (0..universe / block_size)
        .map(|i| VertexSet::from_iter_in(universe, i * block_size..(i + 1) * block_size))
        .collect()
}

/// Each ordered `k`-tuple of distinct vertices kept with probability `d`.
pub fn random_tuples(universe: usize, k: usize, d: f64, seed: u64) -> Vec<Vec<Vertex>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut t = vec![0; k];
    fn rec(
        i: usize,
        universe: usize,
        d: f64,
        t: &mut Vec<Vertex>,
        rng: &mut ChaCha8Rng,
        out: &mut Vec<Vec<Vertex>>,
    ) {
        if i == t.len() {
            if rng.gen_bool(d) {
                out.push(t.clone());
            }
            return;
        }
        for v in 0..universe {
            if !t[..i].contains(&v) {
                t[i] = v;
                rec(i + 1, universe, d, t, rng, out);
            }
        }
    }
    rec(0, universe, d, &mut t, &mut rng, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn singletons() -> WeightSystem {
        let mut ws = WeightSystem::new(4, 0.5).unwrap();
        for v in 0..4 {
            ws.add(&[v], 1.0).unwrap();
        }
        ws
    }

    /// Independent summation: Δ as a sum over elements shared by two sets.
    fn delta_by_overlap(ws: &WeightSystem) -> f64 {
        let s: Vec<(u64, f64)> = ws.support().collect();
        let mut total = 0.0;
        for &(a, wa) in &s {
            for &(b, wb) in &s {
                let shared = (0..ws.ground()).any(|v| a >> v & 1 == 1 && b >> v & 1 == 1);
                if shared {
                    let union = (0..ws.ground()).filter(|&v| (a | b) >> v & 1 == 1).count();
                    total += wa * wb * ws.p().powi(union as i32);
                }
            }
        }
        total
    }

    #[test]
    fn singleton_example() {
        let ws = singletons();
        let b = janson_bound(&ws, 1.0).unwrap();
        assert_eq!(b.expectation, 2.0);
        assert_eq!(b.delta, 2.0);
        assert_eq!(delta_by_overlap(&ws), 2.0);
        assert!((b.bound - (-0.25f64).exp()).abs() < 1e-15);
        assert!((janson_exact_tail(&ws, 1.0).unwrap() - 5.0 / 16.0).abs() < 1e-15);
        assert_eq!(janson_bound(&ws, 0.0).unwrap().bound, 1.0);
        assert!(janson_bound(&ws, 2.5).is_err());
        assert!(janson_bound(&ws, -0.1).is_err());
    }

    #[test]
    fn single_set_and_extreme_probabilities() {
        let mut ws = WeightSystem::new(5, 0.3).unwrap();
        ws.add(&[0, 2, 4], 1.0).unwrap();
        let b = janson_bound(&ws, 0.01).unwrap();
        assert!((b.delta - 0.3f64.powi(3)).abs() < 1e-15);
        assert!((b.bound - (-0.0001 / (2.0 * 0.027f64)).exp()).abs() < 1e-12);

        let mut sure = singletons();
        sure.p = 1.0;
        assert_eq!(janson_exact_tail(&sure, 1.0).unwrap(), 0.0);
        let mut never = singletons();
        never.p = 0.0;
        assert_eq!(janson_exact_tail(&never, 0.0).unwrap(), 1.0);
        assert!(janson_bound(&never, 0.5).is_err());
        let big = WeightSystem::new(21, 0.5).unwrap();
        assert!(janson_exact_tail(&big, 0.0).is_err());
    }

    #[test]
    fn monte_carlo_agrees_and_is_deterministic() {
        let ws = singletons();
        let e = janson_mc_tail(&ws, 1.0, 20_000, 7).unwrap();
        assert!(e.contains(5.0 / 16.0), "{e:?}");
        assert_eq!(e, janson_mc_tail(&ws, 1.0, 20_000, 7).unwrap());
        let one = janson_mc_tail(&ws, 1.0, 1, 3).unwrap();
        assert!(one.estimate == 0.0 || one.estimate == 1.0);
        assert!(janson_mc_tail(&ws, 1.0, 0, 3).is_err());
    }

    #[test]
    fn bounded_weights() {
        let b = bounded_tail_bound(100, 12, 1, 0.999_999).unwrap();
        assert!((b.bound - 3.0 * (-1.0f64).exp()).abs() < 1e-5);
        assert!(bounded_tail_bound(10, 12, 1, 0.5).is_err());
        assert!(bounded_tail_bound(10, 5, 1, 1.0).is_err());
        // vacuous exactly when ξ²m < 12k² ln 3
        let v = bounded_tail_bound(100, 20, 2, 0.5).unwrap();
        assert_eq!(v.vacuous, 0.25 * 20.0 < 48.0 * 3f64.ln());
    }

    #[test]
    fn block_bound_range_and_monotonicity() {
        assert!(block_sampling_bound(100, 50, 2, 0.6).is_err());
        assert!(block_sampling_bound(100, 50, 1, 1.0).is_err());
        let a = block_sampling_bound(200, 100, 1, 0.5).unwrap().bound;
        let b = block_sampling_bound(200, 150, 1, 0.5).unwrap().bound;
        let c = block_sampling_bound(200, 100, 1, 0.7).unwrap().bound;
        assert!(b < a && c < a);
    }

    #[test]
    fn full_tuple_set_never_deviates() {
        let universe = 40;
        let blocks = consecutive_blocks(universe, 4);
        let mut all = Vec::new();
        for x in 0..universe {
            for y in 0..universe {
                all.push(vec![x, y]);
            }
        }
        let r = block_sampling_check(
            Sampled::Tuples {
                universe,
                k: 2,
                tuples: &all,
            },
            &blocks,
            5,
            0.5,
            200,
            1,
            PreconditionPolicy::Report,
        )
        .unwrap();
        assert_eq!(r.density, 1.0);
        assert_eq!(r.empirical.hits, 0);
        assert!(r.pass);
        assert!(!r.violations.is_empty());
        assert!(block_sampling_check(
            Sampled::Tuples {
                universe,
                k: 2,
                tuples: &all
            },
            &blocks,
            5,
            0.5,
            200,
            1,
            PreconditionPolicy::Strict,
        )
        .is_err());
    }

    #[test]
    fn edge_counts_match_tuple_counts() {
        let h = Hypergraph::from_predicate(2, 12, |e| (e[0] + e[1]) % 3 != 0).unwrap();
        let mut tuples = Vec::new();
        for e in h.edges() {
            tuples.push(vec![e[0], e[1]]);
            tuples.push(vec![e[1], e[0]]);
        }
        let blocks = consecutive_blocks(12, 2);
        let a = block_sampling_check(
            Sampled::Edges(&h),
            &blocks,
            3,
            0.5,
            500,
            4,
            PreconditionPolicy::Report,
        )
        .unwrap();
        let b = block_sampling_check(
            Sampled::Tuples {
                universe: 12,
                k: 2,
                tuples: &tuples,
            },
            &blocks,
            3,
            0.5,
            500,
            4,
            PreconditionPolicy::Report,
        )
        .unwrap();
        assert_eq!(a.empirical, b.empirical);
        assert!((a.density - b.density).abs() < 1e-12);
    }

    prop_compose! {
        fn weight_system()(ground in 1usize..=10, p in 0.0f64..=1.0, sets in proptest::collection::vec((proptest::collection::vec(0usize..10, 1..4), 0.0f64..3.0), 1..8)) -> WeightSystem {
            let mut ws = WeightSystem::new(ground, p).unwrap();
            for (s, w) in sets {
                let s: Vec<usize> = s.into_iter().map(|v| v % ground).collect();
                ws.add(&s, w).unwrap();
            }
            ws
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(150))]

        #[test]
        fn exact_tail_dominated(ws in weight_system()) {
            let ex = ws.expectation();
            let diag: f64 = ws.support().map(|(a, w)| w * w * ws.p().powi(a.count_ones() as i32)).sum();
            prop_assert!(ws.delta() + 1e-12 >= diag);
            prop_assert!((ws.delta() - delta_by_overlap(&ws)).abs() <= 1e-9 * ws.delta().max(1.0));
            let mut prev = f64::INFINITY;
            for i in 0..20 {
                let t = ex * i as f64 / 19.0;
                let b = janson_bound(&ws, t).unwrap();
                let tail = janson_exact_tail(&ws, t).unwrap();
                prop_assert!(tail <= b.bound + 1e-12, "t={} tail={} bound={}", t, tail, b.bound);
                prop_assert!(b.bound <= prev + 1e-15);
                prev = b.bound;
            }
        }
    }
}
