//! Lower-bound constructions and random dense test beds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hypercore::{binomial, for_each_subset, Hypergraph};
use crate::vertex_set::{Vertex, VertexSet};

/// The two-part split used by the extremal constructions.
///
/// `x` is always the prefix `0..2n/3`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledPartition {
    pub n: usize,
    pub x: VertexSet,
    pub y: VertexSet,
    /// An edge `e` is excluded exactly when `|e ∩ x|` equals this.
    pub forbidden_intersection: usize,
}

impl LabeledPartition {
    fn prefix(n: usize, forbidden_intersection: usize) -> Self {
        let x = VertexSet::from_iter_in(n, 0..2 * n / 3);
        let y = x.complement();
        LabeledPartition {
            n,
            x,
            y,
            forbidden_intersection,
        }
    }

    pub fn admits(&self, e: &[Vertex]) -> bool {
        e.iter().filter(|&&v| self.x.contains(v)).count() != self.forbidden_intersection
    }
}

fn construction(n: usize, forbidden: usize) -> Result<(Hypergraph, LabeledPartition)> {
    if n < 6 || !n.is_multiple_of(3) {
        return invalid(format!(
            "construction needs n divisible by 3 and at least 6, got {n}"
        ));
    }
    let part = LabeledPartition::prefix(n, forbidden);
    let h = Hypergraph::from_predicate(4, n, |e| part.admits(e))?;
    Ok((h, part))
}

/// All 4-sets except those meeting the prefix `X` in exactly two vertices.
pub fn construction_a(n: usize) -> Result<(Hypergraph, LabeledPartition)> {
    construction(n, 2)
}

/// All 4-sets except those meeting the prefix `X` in exactly three vertices.
pub fn construction_b(n: usize) -> Result<(Hypergraph, LabeledPartition)> {
    construction(n, 3)
}

/// Each `k`-subset kept independently with probability `p`.
pub fn random_hypergraph(n: usize, k: usize, p: f64, seed: u64) -> Result<Hypergraph> {
    if !(0.0..=1.0).contains(&p) {
        return invalid(format!("edge probability {p} outside [0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Hypergraph::from_predicate(k, n, |_| rng.gen_bool(p))
}

#[derive(Clone, Debug)]
pub struct RepairedSample {
    pub hypergraph: Hypergraph,
    pub repairs: usize,
    pub resamples: usize,
}

/// A random 4-uniform hypergraph whose minimum pair degree reaches `target`.
///
/// Each resample is patched by adding, for the currently worst pair, the
/// lexicographically first missing 4-set through it. `max_retries` bounds the
/// number of fresh samples; repairs within a sample are unbounded since each
/// one adds an edge.
pub fn random_with_min_pair_degree(
    n: usize,
    target: usize,
    p: f64,
    seed: u64,
    max_retries: usize,
) -> Result<RepairedSample> {
    if n < 4 {
        return invalid("pair-degree target needs at least 4 vertices");
    }
    let cap = binomial(n - 2, 2) as usize;
    if target > cap {
        return invalid(format!("target {target} exceeds C(n-2, 2) = {cap}"));
    }
    for attempt in 0..max_retries.max(1) {
        let h = random_hypergraph(n, 4, p, seed.wrapping_add(attempt as u64))?;
        let mut present = vec![false; binomial(n, 4) as usize];
        let mut pair_deg = vec![vec![0usize; n]; n];
        let mut idx = 0;
        let mut all = Vec::with_capacity(present.len());
        for_each_subset(n, 4, |e| {
            all.push([e[0], e[1], e[2], e[3]]);
            if h.contains(e) {
                present[idx] = true;
                for a in 0..4 {
                    for b in a + 1..4 {
                        pair_deg[e[a]][e[b]] += 1;
                    }
                }
            }
            idx += 1;
        });
        let mut repairs = 0;
        loop {
            let mut worst = (usize::MAX, 0, 0);
            for a in 0..n {
                for b in a + 1..n {
                    if pair_deg[a][b] < worst.0 {
                        worst = (pair_deg[a][b], a, b);
                    }
                }
            }
            if worst.0 >= target {
                break;
            }
            let (_, a, b) = worst;
            let slot =
                (0..all.len()).find(|&i| !present[i] && all[i].contains(&a) && all[i].contains(&b));
            let Some(i) = slot else {
                break;
            };
            present[i] = true;
            let e = all[i];
            for x in 0..4 {
                for y in x + 1..4 {
                    pair_deg[e[x]][e[y]] += 1;
                }
            }
            repairs += 1;
        }
        let edges: Vec<[Vertex; 4]> = all
            .iter()
            .zip(&present)
            .filter(|(_, &p)| p)
            .map(|(e, _)| *e)
            .collect();
        let hypergraph = Hypergraph::new(4, n, &edges)?;
        if hypergraph.min_j_degree(2)?.0 >= target {
            return Ok(RepairedSample {
                hypergraph,
                repairs,
                resamples: attempt,
            });
        }
    }
    Err(Error::Generation(format!(
        "no sample reached pair degree {target} after {max_retries} attempts"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oracle_pair_degree_min(n: usize, forbidden: usize) -> usize {
        let x = 2 * n / 3;
        let mut best = usize::MAX;
        for a in 0..n {
            for b in a + 1..n {
                let mut d = 0;
                for c in 0..n {
                    for e in c + 1..n {
                        if [a, b].contains(&c) || [a, b].contains(&e) {
                            continue;
                        }
                        let in_x = [a, b, c, e].iter().filter(|&&v| v < x).count();
                        if in_x != forbidden {
                            d += 1;
                        }
                    }
                }
                best = best.min(d);
            }
        }
        best
    }

    #[test]
    fn small_cases() {
        let (h6, _) = construction_a(6).unwrap();
        assert_eq!(h6.edge_count(), 15 - 6);
        let (h9, part) = construction_a(9).unwrap();
        assert_eq!(h9.degree(&[6, 7]).unwrap(), 6);
        let (d, w) = h9.min_j_degree(2).unwrap();
        assert_eq!(d, 6);
        assert!(w.iter().all(|&v| part.y.contains(v)));
        let (b6, _) = construction_b(6).unwrap();
        assert!(!b6.contains(&[0, 1, 2, 4]));
        assert!(construction_a(10).is_err());
        assert!(construction_b(3).is_err());
    }

    #[test]
    fn intersections_and_pair_degrees() {
        for n in [6, 9, 12] {
            for (forbidden, build) in [(2, construction_a as fn(usize) -> _), (3, construction_b)] {
                let (h, part) = build(n).unwrap();
                assert_eq!(part.x.len(), 2 * n / 3);
                assert!(part.x.is_disjoint(&part.y));
                for_each_subset(n, 4, |e| {
                    let meet = e.iter().filter(|&&v| part.x.contains(v)).count();
                    assert_eq!(h.contains(e), meet != forbidden);
                });
                assert_eq!(
                    h.min_j_degree(2).unwrap().0,
                    oracle_pair_degree_min(n, forbidden)
                );
            }
        }
    }

    #[test]
    fn pair_density_rises_toward_five_ninths() {
        let ratios: Vec<f64> = [6, 9, 12]
            .iter()
            .map(|&n| {
                let (h, _) = construction_a(n).unwrap();
                h.min_j_degree(2).unwrap().0 as f64 * 2.0 / (n * n) as f64
            })
            .collect();
        assert!(ratios.iter().all(|&r| r < 5.0 / 9.0));
        assert!(ratios.windows(2).all(|w| w[0] <= w[1]), "{ratios:?}");
    }

    #[test]
    fn random_extremes_and_determinism() {
        assert_eq!(
            random_hypergraph(8, 4, 1.0, 3).unwrap(),
            Hypergraph::complete(4, 8).unwrap()
        );
        assert_eq!(random_hypergraph(8, 4, 0.0, 3).unwrap().edge_count(), 0);
        assert_eq!(
            random_hypergraph(10, 3, 0.4, 11).unwrap(),
            random_hypergraph(10, 3, 0.4, 11).unwrap()
        );
        assert!(random_hypergraph(5, 3, 1.5, 0).is_err());
    }

    #[test]
    fn random_edge_count_statistics() {
        let total = binomial(10, 4);
        let sigma = (total * 0.25).sqrt();
        for seed in 0..100 {
            let m = random_hypergraph(10, 4, 0.5, seed).unwrap().edge_count() as f64;
            assert!((m - 0.5 * total).abs() <= 4.0 * sigma, "seed {seed}: {m}");
        }
    }

    #[test]
    fn repaired_samples_meet_target() {
        let s = random_with_min_pair_degree(12, 0, 0.3, 5, 1).unwrap();
        assert_eq!(s.repairs, 0);
        assert_eq!(s.hypergraph, random_hypergraph(12, 4, 0.3, 5).unwrap());

        let full = binomial(8, 2) as usize;
        let s = random_with_min_pair_degree(10, full, 0.2, 1, 1).unwrap();
        assert_eq!(s.hypergraph, Hypergraph::complete(4, 10).unwrap());

        let target = (0.8 * binomial(18, 2)).ceil() as usize;
        let s = random_with_min_pair_degree(20, target, 0.85, 9, 3).unwrap();
        assert!(s.hypergraph.min_j_degree(2).unwrap().0 >= target);
        assert!(random_with_min_pair_degree(10, full + 1, 0.5, 0, 1).is_err());
    }
}
