//! Tight walks, paths and cycles: validation, splicing, exhaustive search and
//! greedy path covers.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hypercore::Hypergraph;
use crate::vertex_set::{Vertex, VertexSet};

/// A cap on search node expansions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    limit: u64,
    used: u64,
}

impl Budget {
    pub fn new(limit: u64) -> Self {
        Budget { limit, used: 0 }
    }

    /// Records one expansion; `false` once the cap is reached.
    #[inline]
    pub fn spend(&mut self) -> bool {
        if self.used >= self.limit {
            return false;
        }
        self.used += 1;
        true
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn exhausted(&self) -> bool {
        self.used >= self.limit
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SequenceKind {
    Walk,
    Path,
    Cycle,
}

/// Proof that a sequence is a tight walk, path or cycle in a host.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: SequenceKind,
    pub k: usize,
    pub vertices: Vec<Vertex>,
    /// Every window that was checked, in sequence order.
    pub windows: Vec<Vec<Vertex>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    OutOfRange {
        position: usize,
        vertex: Vertex,
    },
    RepeatedVertex {
        vertex: Vertex,
        first: usize,
        second: usize,
    },
    MissingEdge {
        position: usize,
        window: Vec<Vertex>,
    },
}

pub type Verdict = std::result::Result<Certificate, Violation>;

fn window_at(seq: &[Vertex], start: usize, k: usize) -> Vec<Vertex> {
    (0..k).map(|i| seq[(start + i) % seq.len()]).collect()
}

/// Checks every (cyclic, for cycles) window of `k` consecutive vertices.
///
/// Returns the first violation found: an out-of-range vertex, then a
/// repeated vertex (paths and cycles), then the first missing window.
pub fn validate(seq: &[Vertex], h: &Hypergraph, kind: SequenceKind) -> Result<Verdict> {
    let k = h.k();
    let min = if kind == SequenceKind::Cycle {
        k + 1
    } else {
        k
    };
    if seq.len() < min {
        return invalid(format!(
            "a tight {kind:?} needs at least {min} vertices, got {}",
            seq.len()
        ));
    }
    if let Some((position, &vertex)) = seq.iter().enumerate().find(|(_, &v)| v >= h.n()) {
        return Ok(Err(Violation::OutOfRange { position, vertex }));
    }
    if kind != SequenceKind::Walk {
        let mut seen = vec![usize::MAX; h.n()];
        for (i, &v) in seq.iter().enumerate() {
            if seen[v] != usize::MAX {
                return Ok(Err(Violation::RepeatedVertex {
                    vertex: v,
                    first: seen[v],
                    second: i,
                }));
            }
            seen[v] = i;
        }
    }
    let count = if kind == SequenceKind::Cycle {
        seq.len()
    } else {
        seq.len() - k + 1
    };
    let mut windows = Vec::with_capacity(count);
    for start in 0..count {
        let w = window_at(seq, start, k);
        if !h.contains(&w) {
            return Ok(Err(Violation::MissingEdge {
                position: start,
                window: w,
            }));
        }
        windows.push(w);
    }
    Ok(Ok(Certificate {
        kind,
        k,
        vertices: seq.to_vec(),
        windows,
    }))
}

fn validated(seq: &[Vertex], h: &Hypergraph, kind: SequenceKind) -> Result<()> {
    match validate(seq, h, kind)? {
        Ok(_) => Ok(()),
        Err(v) => invalid(format!("not a tight {kind:?}: {v:?}")),
    }
}

/// A tight path certified against the host it was built from.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TightPath {
    k: usize,
    vertices: Vec<Vertex>,
}

impl TightPath {
    pub fn new(h: &Hypergraph, vertices: Vec<Vertex>) -> Result<Self> {
        validated(&vertices, h, SequenceKind::Path)?;
        Ok(TightPath { k: h.k(), vertices })
    }

    /// Wraps a sequence whose validity the caller has already established.
    pub(crate) fn trusted(k: usize, vertices: Vec<Vertex>) -> Self {
        debug_assert!(vertices.len() >= k - 1);
        TightPath { k, vertices }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Vertex> {
        self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Number of edges along the path.
    pub fn edge_length(&self) -> usize {
        self.vertices.len() + 1 - self.k
    }

    pub fn start_tuple(&self) -> &[Vertex] {
        &self.vertices[..self.k - 1]
    }

    pub fn end_tuple(&self) -> &[Vertex] {
        &self.vertices[self.vertices.len() + 1 - self.k..]
    }

    /// Vertices strictly between the start and end tuples.
    pub fn inner(&self) -> &[Vertex] {
        let k1 = self.k - 1;
        if self.vertices.len() <= 2 * k1 {
            &[]
        } else {
            &self.vertices[k1..self.vertices.len() - k1]
        }
    }

    #[must_use]
    pub fn reversed(&self) -> TightPath {
        let mut v = self.vertices.clone();
        v.reverse();
        TightPath {
            k: self.k,
            vertices: v,
        }
    }

    pub fn vertex_set(&self, universe: usize) -> VertexSet {
        VertexSet::from_slice(universe, &self.vertices)
    }
}

/// The first and last `k − 1` vertices of a path, in path order.
pub fn end_triples(p: &TightPath) -> (Vec<Vertex>, Vec<Vertex>) {
    (p.start_tuple().to_vec(), p.end_tuple().to_vec())
}

/// A tight cycle; every cyclic window of `k` vertices is an edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TightCycle {
    k: usize,
    vertices: Vec<Vertex>,
}

impl TightCycle {
    pub fn new(h: &Hypergraph, vertices: Vec<Vertex>) -> Result<Self> {
        validated(&vertices, h, SequenceKind::Cycle)?;
        Ok(TightCycle { k: h.k(), vertices })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

/// JSON shape shared by cycle and path outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceRecord {
    pub kind: SequenceKind,
    pub vertices: Vec<Vertex>,
    pub certified: bool,
}

impl SequenceRecord {
    pub fn certify(h: &Hypergraph, kind: SequenceKind, vertices: &[Vertex]) -> Self {
        let certified = matches!(validate(vertices, h, kind), Ok(Ok(_)));
        SequenceRecord {
            kind,
            vertices: vertices.to_vec(),
            certified,
        }
    }
}

/// Joins `p`, the interior of `connector`, and `q` into one path.
///
/// The connector must start with `p`'s end tuple and finish with `q`'s start
/// tuple, both in order.
pub fn splice(
    h: &Hypergraph,
    p: &TightPath,
    q: &TightPath,
    connector: &TightPath,
) -> Result<TightPath> {
    let k1 = h.k() - 1;
    let c = connector.vertices();
    if c.len() < 2 * k1 {
        return invalid("connector shorter than two end tuples");
    }
    for (a, b) in c[..k1].iter().zip(p.end_tuple()) {
        if a != b {
            return Err(Error::Splice(*a));
        }
    }
    for (a, b) in c[c.len() - k1..].iter().zip(q.start_tuple()) {
        if a != b {
            return Err(Error::Splice(*a));
        }
    }
    let mut seen = VertexSet::new(h.n());
    let mut out = Vec::with_capacity(p.len() + q.len() + c.len() - 2 * k1);
    let pieces: [&[Vertex]; 3] = [p.vertices(), &c[k1..c.len() - k1], q.vertices()];
    for &v in pieces.iter().flat_map(|s| s.iter()) {
        if v >= h.n() || !seen.insert(v) {
            return Err(Error::Splice(v));
        }
        out.push(v);
    }
    match validate(&out, h, SequenceKind::Path)? {
        Ok(_) => Ok(TightPath::trusted(h.k(), out)),
        Err(Violation::MissingEdge { window, .. }) => Err(Error::Splice(window[0])),
        Err(Violation::RepeatedVertex { vertex, .. } | Violation::OutOfRange { vertex, .. }) => {
            Err(Error::Splice(vertex))
        }
    }
}

/// Result of an exhaustive Hamiltonicity search.
#[derive(Clone, Debug, PartialEq)]
pub enum BruteOutcome {
    Cycle(TightCycle),
    /// The search space was exhausted without a cycle.
    None {
        expansions: u64,
    },
    Timeout {
        expansions: u64,
    },
}

pub const DEFAULT_BRUTE_VERTEX_CAP: usize = 16;

struct Brute<'a> {
    h: &'a Hypergraph,
    n: usize,
    edge_masks: Vec<Vec<u64>>,
    seq: Vec<Vertex>,
    unvisited: u64,
    budget: Budget,
}

impl Brute<'_> {
    fn closes(&self) -> bool {
        let k = self.h.k();
        (self.n + 1 - k..self.n).all(|s| self.h.contains(&window_at(&self.seq, s, k)))
    }

    /// Every unvisited vertex still needs an edge inside the vertices that
    /// can surround it in a completion.
    fn feasible(&self) -> bool {
        let k1 = self.h.k() - 1;
        let mut around = self.unvisited;
        let len = self.seq.len();
        for &v in self.seq[len.saturating_sub(k1)..]
            .iter()
            .chain(&self.seq[..k1.min(len)])
        {
            around |= 1 << v;
        }
        let mut rest = self.unvisited;
        while rest != 0 {
            let u = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if !self.edge_masks[u].iter().any(|&m| m & !around == 0) {
                return false;
            }
        }
        true
    }

    fn search(&mut self) -> Option<bool> {
        if !self.budget.spend() {
            return None;
        }
        let k1 = self.h.k() - 1;
        if self.seq.len() == self.n {
            return Some(self.seq[1] < self.seq[self.n - 1] && self.closes());
        }
        if self.seq.len() >= 2 {
            let max_left = 63 - self.unvisited.leading_zeros() as usize;
            if max_left < self.seq[1] {
                return Some(false);
            }
        }
        if !self.feasible() {
            return Some(false);
        }
        let mut candidates = self.unvisited;
        if self.seq.len() >= k1 {
            let ext = self.h.extensions(&self.seq[self.seq.len() - k1..]);
            let mut mask = 0u64;
            for v in &ext {
                mask |= 1 << v;
            }
            candidates &= mask;
        }
        while candidates != 0 {
            let v = candidates.trailing_zeros() as usize;
            candidates &= candidates - 1;
            self.seq.push(v);
            self.unvisited &= !(1 << v);
            let r = self.search();
            if r != Some(false) {
                return r;
            }
            self.seq.pop();
            self.unvisited |= 1 << v;
        }
        Some(false)
    }
}

/// Exhaustive search for a tight Hamiltonian cycle.
///
/// Vertex 0 is fixed first and reflections are skipped by requiring the
/// second vertex to precede the last one.
pub fn find_tight_hamiltonian_brute(h: &Hypergraph, budget: u64) -> Result<BruteOutcome> {
    find_tight_hamiltonian_brute_capped(h, budget, DEFAULT_BRUTE_VERTEX_CAP)
}

pub fn find_tight_hamiltonian_brute_capped(
    h: &Hypergraph,
    budget: u64,
    vertex_cap: usize,
) -> Result<BruteOutcome> {
    if budget == 0 {
        return invalid("search budget must be positive");
    }
    let n = h.n();
    if n > vertex_cap.min(64) {
        return invalid(format!(
            "{n} vertices exceeds the exhaustive search cap of {}",
            vertex_cap.min(64)
        ));
    }
    if h.k() < 2 || n < h.k() + 1 {
        return Ok(BruteOutcome::None { expansions: 0 });
    }
    let mut edge_masks = vec![Vec::new(); n];
    for e in h.edges() {
        let m = e.iter().fold(0u64, |m, &v| m | 1 << v);
        for &v in e {
            edge_masks[v].push(m);
        }
    }
    let full = if n == 64 { !0 } else { (1u64 << n) - 1 };
    let mut b = Brute {
        h,
        n,
        edge_masks,
        seq: vec![0],
        unvisited: full & !1,
        budget: Budget::new(budget),
    };
    Ok(match b.search() {
        Some(true) => BruteOutcome::Cycle(TightCycle::new(h, b.seq)?),
        Some(false) => BruteOutcome::None {
            expansions: b.budget.used(),
        },
        None => BruteOutcome::Timeout {
            expansions: b.budget.used(),
        },
    })
}

/// Outcome of a bounded path search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome<T> {
    Found(T),
    Exhausted,
    BudgetSpent,
}

impl<T> SearchOutcome<T> {
    pub fn found(self) -> Option<T> {
        match self {
            SearchOutcome::Found(t) => Some(t),
            _ => None,
        }
    }
}

/// Depth-first search for a tight path on exactly `len` vertices of `allowed`
/// whose start and end tuples both satisfy `end_ok`.
pub fn find_path_with_ends(
    h: &Hypergraph,
    allowed: &VertexSet,
    len: usize,
    end_ok: &dyn Fn(&[Vertex]) -> bool,
    rng: &mut ChaCha8Rng,
    budget: &mut Budget,
) -> SearchOutcome<Vec<Vertex>> {
    let k1 = h.k() - 1;
    if len < h.k() || allowed.len() < len {
        return SearchOutcome::Exhausted;
    }
    let mut starts = allowed.to_vec();
    starts.shuffle(rng);
    let mut seq = Vec::with_capacity(len);
    let mut used = VertexSet::new(h.n());

    fn grow(
        h: &Hypergraph,
        allowed: &VertexSet,
        len: usize,
        end_ok: &dyn Fn(&[Vertex]) -> bool,
        rng: &mut ChaCha8Rng,
        budget: &mut Budget,
        seq: &mut Vec<Vertex>,
        used: &mut VertexSet,
    ) -> Option<bool> {
        if !budget.spend() {
            return None;
        }
        let k1 = h.k() - 1;
        if seq.len() == k1 && !end_ok(seq) {
            return Some(false);
        }
        if seq.len() == len {
            return Some(end_ok(&seq[len - k1..]));
        }
        let mut cand = allowed.difference(used);
        if seq.len() >= k1 {
            cand.intersect_with(&h.extensions(&seq[seq.len() - k1..]));
        }
        let mut order = cand.to_vec();
        order.shuffle(rng);
        for v in order {
            seq.push(v);
            used.insert(v);
            let r = grow(h, allowed, len, end_ok, rng, budget, seq, used);
            if r != Some(false) {
                return r;
            }
            seq.pop();
            used.remove(v);
        }
        Some(false)
    }

    for s in starts {
        seq.clear();
        used.clear();
        seq.push(s);
        used.insert(s);
        match grow(h, allowed, len, end_ok, rng, budget, &mut seq, &mut used) {
            Some(true) => return SearchOutcome::Found(seq),
            Some(false) => {}
            None => return SearchOutcome::BudgetSpent,
        }
        if k1 == 0 {
            break;
        }
    }
    SearchOutcome::Exhausted
}

/// Vertex-disjoint tight paths of a fixed size and the vertices left over.
#[derive(Clone, Debug, PartialEq)]
pub struct PathCover {
    pub paths: Vec<TightPath>,
    pub uncovered: VertexSet,
    /// True when a complete search proved no further path fits.
    pub maximal_certified: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct CoverOptions {
    pub seed: u64,
    /// Expansion cap for each individual path search.
    pub search_budget: u64,
    /// Fresh randomized attempts after a search runs out of budget.
    pub restarts: usize,
}

impl Default for CoverOptions {
    fn default() -> Self {
        CoverOptions {
            seed: 0,
            search_budget: 200_000,
            restarts: 3,
        }
    }
}

/// Repeatedly removes a tight path on `m` vertices with acceptable end tuples
/// until the search fails.
pub fn greedy_path_cover(
    h: &Hypergraph,
    excluded: &VertexSet,
    m: usize,
    end_ok: &dyn Fn(&[Vertex]) -> bool,
    opts: CoverOptions,
) -> Result<PathCover> {
    if m < h.k() + 1 {
        return invalid(format!(
            "cover paths need at least k + 1 = {} vertices",
            h.k() + 1
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut free = excluded.complement();
    let mut paths = Vec::new();
    loop {
        let mut outcome = SearchOutcome::BudgetSpent;
        for _ in 0..=opts.restarts {
            let mut budget = Budget::new(opts.search_budget);
            outcome = find_path_with_ends(h, &free, m, end_ok, &mut rng, &mut budget);
            if outcome != SearchOutcome::BudgetSpent {
                break;
            }
        }
        match outcome {
            SearchOutcome::Found(seq) => {
                for &v in &seq {
                    free.remove(v);
                }
                paths.push(TightPath::trusted(h.k(), seq));
            }
            SearchOutcome::Exhausted => {
                return Ok(PathCover {
                    paths,
                    uncovered: free,
                    maximal_certified: true,
                })
            }
            SearchOutcome::BudgetSpent => {
                return Ok(PathCover {
                    paths,
                    uncovered: free,
                    maximal_certified: false,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extremal::{construction_a, construction_b, random_hypergraph};
    use proptest::prelude::*;

    fn naive_windows_ok(seq: &[Vertex], h: &Hypergraph, cyclic: bool) -> bool {
        let k = h.k();
        let n = seq.len();
        let count = if cyclic { n } else { n + 1 - k };
        (0..count).all(|s| {
            let mut w: Vec<Vertex> = (0..k).map(|i| seq[(s + i) % n]).collect();
            w.sort();
            h.edges().any(|e| e == w.as_slice())
        })
    }

    fn permutations_have_cycle(h: &Hypergraph) -> bool {
        fn rec(h: &Hypergraph, seq: &mut Vec<Vertex>, left: &mut Vec<Vertex>) -> bool {
            if left.is_empty() {
                return naive_windows_ok(seq, h, true);
            }
            for i in 0..left.len() {
                let v = left.remove(i);
                seq.push(v);
                if rec(h, seq, left) {
                    return true;
                }
                seq.pop();
                left.insert(i, v);
            }
            false
        }
        let mut seq = vec![0];
        let mut left: Vec<Vertex> = (1..h.n()).collect();
        rec(h, &mut seq, &mut left)
    }

    #[test]
    fn validate_examples() {
        let h = Hypergraph::complete(4, 8).unwrap();
        let cyc: Vec<Vertex> = (0..8).collect();
        let cert = validate(&cyc, &h, SequenceKind::Cycle).unwrap().unwrap();
        assert_eq!(cert.windows.len(), 8);
        assert!(validate(&[0, 1, 2], &h, SequenceKind::Path).is_err());
        assert!(validate(&[0, 1, 2, 3], &h, SequenceKind::Cycle).is_err());
        assert_eq!(
            validate(&[0, 1, 2, 3, 1], &h, SequenceKind::Path).unwrap(),
            Err(Violation::RepeatedVertex {
                vertex: 1,
                first: 1,
                second: 4
            })
        );
        assert!(validate(&[0, 1, 2, 3, 0], &h, SequenceKind::Walk)
            .unwrap()
            .is_ok());

        let (a, _) = construction_a(9).unwrap();
        // Window 2 7 8 0 meets X in exactly two vertices.
        let seq = [6, 2, 7, 8, 0];
        assert_eq!(
            validate(&seq, &a, SequenceKind::Path).unwrap(),
            Err(Violation::MissingEdge {
                position: 1,
                window: vec![2, 7, 8, 0]
            })
        );
    }

    #[test]
    fn end_triples_examples() {
        let h = Hypergraph::complete(4, 8).unwrap();
        let p = TightPath::new(&h, vec![0, 1, 2, 3, 4]).unwrap();
        assert_eq!(end_triples(&p), (vec![0, 1, 2], vec![2, 3, 4]));
        let single = TightPath::new(&h, vec![5, 6, 7, 0]).unwrap();
        assert_eq!(end_triples(&single), (vec![5, 6, 7], vec![6, 7, 0]));
        let (s, e) = end_triples(&p.reversed());
        assert_eq!((s, e), (vec![4, 3, 2], vec![2, 1, 0]));
    }

    #[test]
    fn splice_examples() {
        let h = Hypergraph::complete(4, 12).unwrap();
        let p = TightPath::new(&h, vec![0, 1, 2, 3]).unwrap();
        let q = TightPath::new(&h, vec![6, 7, 8, 9]).unwrap();
        let direct = TightPath::new(&h, vec![1, 2, 3, 6, 7, 8]).unwrap();
        let joined = splice(&h, &p, &q, &direct).unwrap();
        assert_eq!(joined.vertices(), &[0, 1, 2, 3, 6, 7, 8, 9]);
        let via = TightPath::new(&h, vec![1, 2, 3, 4, 5, 6, 7, 8]).unwrap();
        let joined = splice(&h, &p, &q, &via).unwrap();
        assert_eq!(joined.len(), p.len() + q.len() + 2);
        let clash = TightPath::new(&h, vec![1, 2, 3, 0, 6, 7, 8]).unwrap();
        assert_eq!(splice(&h, &p, &q, &clash), Err(Error::Splice(0)));
        let wrong_start = TightPath::new(&h, vec![1, 2, 4, 6, 7, 8]).unwrap();
        assert_eq!(splice(&h, &p, &q, &wrong_start), Err(Error::Splice(4)));
    }

    #[test]
    fn brute_examples() {
        let h = Hypergraph::complete(4, 8).unwrap();
        assert!(matches!(
            find_tight_hamiltonian_brute(&h, 1_000_000).unwrap(),
            BruteOutcome::Cycle(_)
        ));
        let (a, _) = construction_a(9).unwrap();
        assert!(matches!(
            find_tight_hamiltonian_brute(&a, 100_000_000).unwrap(),
            BruteOutcome::None { .. }
        ));
        let (b, _) = construction_b(9).unwrap();
        assert!(matches!(
            find_tight_hamiltonian_brute(&b, 100_000_000).unwrap(),
            BruteOutcome::None { .. }
        ));
        assert!(matches!(
            find_tight_hamiltonian_brute(&a, 3).unwrap(),
            BruteOutcome::Timeout { expansions: 3 }
        ));
        assert!(find_tight_hamiltonian_brute(&h, 0).is_err());
        let big = Hypergraph::complete(3, 17).unwrap();
        assert!(find_tight_hamiltonian_brute(&big, 10).is_err());
    }

    #[test]
    fn brute_agrees_with_permutations() {
        for seed in 0..50u64 {
            let p = if seed % 2 == 0 { 0.3 } else { 0.7 };
            let k = 3 + (seed % 4 / 2) as usize;
            let n = 6 + (seed % 4) as usize;
            let h = random_hypergraph(n, k, p, seed).unwrap();
            let brute = find_tight_hamiltonian_brute(&h, u64::MAX).unwrap();
            let expected = permutations_have_cycle(&h);
            match brute {
                BruteOutcome::Cycle(c) => {
                    assert!(expected, "seed {seed}");
                    assert!(naive_windows_ok(c.vertices(), &h, true));
                }
                BruteOutcome::None { .. } => assert!(!expected, "seed {seed}"),
                BruteOutcome::Timeout { .. } => unreachable!(),
            }
        }
    }

    #[test]
    fn cover_examples() {
        let h = Hypergraph::complete(4, 20).unwrap();
        let none = VertexSet::new(20);
        let cover = greedy_path_cover(&h, &none, 7, &|_| true, CoverOptions::default()).unwrap();
        assert!(cover.paths.len() >= 2);
        assert!(cover.maximal_certified);
        assert!(cover.uncovered.len() < 7);
        let mut seen = VertexSet::new(20);
        for p in &cover.paths {
            assert_eq!(p.len(), 7);
            assert!(validate(p.vertices(), &h, SequenceKind::Path)
                .unwrap()
                .is_ok());
            for &v in p.vertices() {
                assert!(seen.insert(v));
            }
        }
        let small = Hypergraph::complete(4, 6).unwrap();
        let c = greedy_path_cover(
            &small,
            &VertexSet::new(6),
            7,
            &|_| true,
            CoverOptions::default(),
        )
        .unwrap();
        assert!(c.paths.is_empty());
        assert_eq!(c.uncovered.len(), 6);
        assert!(greedy_path_cover(
            &small,
            &VertexSet::new(6),
            4,
            &|_| true,
            CoverOptions::default()
        )
        .is_err());
    }

    proptest! {
        #[test]
        fn validator_matches_naive_scanner(seed in any::<u64>(), k in 3usize..5, len in 4usize..10, p in 0.3f64..1.0) {
            let n = 10;
            let h = random_hypergraph(n, k, p, seed % 1000).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut all: Vec<Vertex> = (0..n).collect();
            all.shuffle(&mut rng);
            let seq = &all[..len.max(k + 1)];
            let path_ok = validate(seq, &h, SequenceKind::Path).unwrap().is_ok();
            prop_assert_eq!(path_ok, naive_windows_ok(seq, &h, false));
            let cyc_ok = validate(seq, &h, SequenceKind::Cycle).unwrap().is_ok();
            prop_assert_eq!(cyc_ok, naive_windows_ok(seq, &h, true));
            if path_ok {
                let mut r = seq.to_vec();
                r.reverse();
                prop_assert!(validate(&r, &h, SequenceKind::Path).unwrap().is_ok());
            }
            if cyc_ok {
                let mut rot = seq.to_vec();
                rot.rotate_left(1);
                prop_assert!(validate(&rot, &h, SequenceKind::Cycle).unwrap().is_ok());
                rot.reverse();
                prop_assert!(validate(&rot, &h, SequenceKind::Cycle).unwrap().is_ok());
            }
        }
    }
}
