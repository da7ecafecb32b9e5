//! Canonical k-uniform hypergraphs on the vertex set `0..n`.

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::vertex_set::{Vertex, VertexSet};

pub const MAX_UNIFORMITY: usize = 8;
/// Packed membership keys use 16 bits per vertex.
pub const MAX_VERTICES: usize = 1 << 16;

const DENSE_INDEX_LIMIT: u64 = 1 << 28;
const FACE_INDEX_WORD_LIMIT: u64 = 1 << 23;

/// Binomial coefficients `C(v, j)` for `v ≤ n`, `j ≤ k`, saturating at `u64::MAX`.
#[derive(Clone, Debug)]
struct Binomials {
    k: usize,
    table: Vec<u64>,
}

impl Binomials {
    fn new(n: usize, k: usize) -> Self {
        let mut table = vec![0u64; (n + 1) * (k + 1)];
        for v in 0..=n {
            table[v * (k + 1)] = 1;
            for j in 1..=k.min(v) {
                let a = table[(v - 1) * (k + 1) + j - 1];
                let b = if j < v {
                    table[(v - 1) * (k + 1) + j]
                } else {
                    0
                };
                table[v * (k + 1) + j] = a.saturating_add(b);
            }
        }
        Binomials { k, table }
    }

    #[inline]
    fn get(&self, v: usize, j: usize) -> u64 {
        self.table[v * (self.k + 1) + j]
    }

    /// Colex rank of an ascending set.
    #[inline]
    fn rank(&self, sorted: &[Vertex]) -> u64 {
        sorted
            .iter()
            .enumerate()
            .map(|(i, &v)| self.get(v, i + 1))
            .sum()
    }
}

/// Binomial coefficient as `f64`, exact for small arguments.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Calls `f` on every `j`-subset of `0..n` in lexicographic order.
pub fn for_each_subset(n: usize, j: usize, mut f: impl FnMut(&[Vertex])) {
    if j > n {
        return;
    }
    let mut c: Vec<Vertex> = (0..j).collect();
    loop {
        f(&c);
        let mut i = j;
        while i > 0 && c[i - 1] == n - j + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        c[i - 1] += 1;
        for t in i..j {
            c[t] = c[t - 1] + 1;
        }
    }
}

#[derive(Clone, Debug)]
enum EdgeIndex {
    Dense(Vec<u64>),
    Sparse(HashSet<u128>),
}

/// An immutable k-uniform hypergraph with O(1) edge membership.
///
/// Edges are stored ascending inside and sorted lexicographically across,
/// so iteration order is deterministic.
#[derive(Clone, Debug)]
pub struct Hypergraph {
    k: usize,
    n: usize,
    edges: Vec<Vertex>,
    index: EdgeIndex,
    faces: Option<Vec<u64>>,
    binom: Binomials,
}

impl PartialEq for Hypergraph {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.n == other.n && self.edges == other.edges
    }
}

impl Eq for Hypergraph {}

/// A hypergraph together with the original label of each of its vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct Relabeled {
    pub hypergraph: Hypergraph,
    pub labels: Vec<Vertex>,
}

impl Relabeled {
    pub fn original(&self, v: Vertex) -> Vertex {
        self.labels[v]
    }
}

fn pack(sorted: &[Vertex]) -> u128 {
    sorted.iter().fold(0u128, |acc, &v| acc << 16 | v as u128)
}

fn check_shape(k: usize, n: usize) -> Result<()> {
    if !(1..=MAX_UNIFORMITY).contains(&k) {
        return invalid(format!("uniformity {k} outside 1..={MAX_UNIFORMITY}"));
    }
    if n > MAX_VERTICES {
        return invalid(format!("{n} vertices exceeds the limit of {MAX_VERTICES}"));
    }
    Ok(())
}

impl Hypergraph {
    /// Builds a hypergraph from edges given in any vertex order.
    pub fn new<E, I>(k: usize, n: usize, edges: I) -> Result<Self>
    where
        E: AsRef<[Vertex]>,
        I: IntoIterator<Item = E>,
    {
        check_shape(k, n)?;
        let mut flat = Vec::new();
        for (i, e) in edges.into_iter().enumerate() {
            let e = e.as_ref();
            if e.len() != k {
                return invalid(format!("edge {i} has {} vertices, expected {k}", e.len()));
            }
            let mut s = e.to_vec();
            s.sort_unstable();
            if s.windows(2).any(|w| w[0] == w[1]) {
                return invalid(format!("edge {i} repeats a vertex"));
            }
            if s[k - 1] >= n {
                return invalid(format!("edge {i} has vertex {} outside 0..{n}", s[k - 1]));
            }
            flat.extend_from_slice(&s);
        }
        let mut rows: Vec<&[Vertex]> = flat.chunks_exact(k).collect();
        rows.sort_unstable();
        if let Some(w) = rows.windows(2).find(|w| w[0] == w[1]) {
            return invalid(format!("duplicate edge {:?}", w[0]));
        }
        let sorted: Vec<Vertex> = rows.concat();
        Ok(Self::from_canonical(k, n, sorted))
    }

    /// `edges` must be ascending within and sorted across, without duplicates.
    fn from_canonical(k: usize, n: usize, edges: Vec<Vertex>) -> Self {
        let binom = Binomials::new(n, k);
        let total = binom.get(n, k);
        let index = if total <= DENSE_INDEX_LIMIT {
            let mut bits = vec![0u64; (total as usize).div_ceil(64).max(1)];
            for e in edges.chunks_exact(k) {
                let r = binom.rank(e) as usize;
                bits[r >> 6] |= 1 << (r & 63);
            }
            EdgeIndex::Dense(bits)
        } else {
            EdgeIndex::Sparse(edges.chunks_exact(k).map(pack).collect())
        };
        let words = n.div_ceil(64) as u64;
        let face_total = binom.get(n, k - 1);
        let faces = (face_total.saturating_mul(words) <= FACE_INDEX_WORD_LIMIT).then(|| {
            let words = words as usize;
            let mut table = vec![0u64; face_total as usize * words];
            let mut face = [0usize; MAX_UNIFORMITY];
            for e in edges.chunks_exact(k) {
                for skip in 0..k {
                    let mut t = 0;
                    for (i, &v) in e.iter().enumerate() {
                        if i != skip {
                            face[t] = v;
                            t += 1;
                        }
                    }
                    let r = binom.rank(&face[..k - 1]) as usize;
                    let w = e[skip];
                    table[r * words + (w >> 6)] |= 1 << (w & 63);
                }
            }
            table
        });
        Hypergraph {
            k,
            n,
            edges,
            index,
            faces,
            binom,
        }
    }

    pub fn empty(k: usize, n: usize) -> Result<Self> {
        check_shape(k, n)?;
        Ok(Self::from_canonical(k, n, Vec::new()))
    }

    pub fn complete(k: usize, n: usize) -> Result<Self> {
        Self::from_predicate(k, n, |_| true)
    }

    /// All k-subsets of `0..n` accepted by `keep`.
    pub fn from_predicate(
        k: usize,
        n: usize,
        mut keep: impl FnMut(&[Vertex]) -> bool,
    ) -> Result<Self> {
        check_shape(k, n)?;
        let mut flat = Vec::new();
        for_each_subset(n, k, |e| {
            if keep(e) {
                flat.extend_from_slice(e);
            }
        });
        Ok(Self::from_canonical(k, n, flat))
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len() / self.k
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = &[Vertex]> + '_ {
        self.edges.chunks_exact(self.k)
    }

    /// Edge density relative to the complete hypergraph.
    pub fn density(&self) -> f64 {
        let total = binomial(self.n, self.k);
        if total == 0.0 {
            0.0
        } else {
            self.edge_count() as f64 / total
        }
    }

    /// Membership for a vertex tuple given in any order.
    pub fn contains(&self, e: &[Vertex]) -> bool {
        if e.len() != self.k {
            return false;
        }
        let mut buf = [0usize; MAX_UNIFORMITY];
        let s = &mut buf[..self.k];
        s.copy_from_slice(e);
        s.sort_unstable();
        self.contains_sorted(s)
    }

    #[inline]
    fn contains_sorted(&self, s: &[Vertex]) -> bool {
        if s.windows(2).any(|w| w[0] == w[1]) || s[s.len() - 1] >= self.n {
            return false;
        }
        match &self.index {
            EdgeIndex::Dense(bits) => {
                let r = self.binom.rank(s) as usize;
                bits[r >> 6] >> (r & 63) & 1 == 1
            }
            EdgeIndex::Sparse(set) => set.contains(&pack(s)),
        }
    }

    /// Vertices `w` such that `face ∪ {w}` is an edge; `face` has `k − 1` distinct vertices.
    pub fn extensions(&self, face: &[Vertex]) -> VertexSet {
        assert_eq!(
            face.len() + 1,
            self.k,
            "extension face must have k - 1 vertices"
        );
        let mut buf = [0usize; MAX_UNIFORMITY];
        let s = &mut buf[..self.k - 1];
        s.copy_from_slice(face);
        s.sort_unstable();
        if s.windows(2).any(|w| w[0] == w[1]) || s.last().is_some_and(|&v| v >= self.n) {
            return VertexSet::new(self.n);
        }
        match &self.faces {
            Some(table) => {
                let words = self.n.div_ceil(64);
                let r = self.binom.rank(s) as usize;
                VertexSet::from_words(self.n, &table[r * words..(r + 1) * words])
            }
            None => {
                let mut out = VertexSet::new(self.n);
                let mut e = [0usize; MAX_UNIFORMITY];
                e[..self.k - 1].copy_from_slice(s);
                for w in 0..self.n {
                    if s.contains(&w) {
                        continue;
                    }
                    e[self.k - 1] = w;
                    if self.contains(&e[..self.k]) {
                        out.insert(w);
                    }
                }
                out
            }
        }
    }

    /// Number of edges containing every vertex of `s`.
    pub fn degree(&self, s: &[Vertex]) -> Result<usize> {
        if s.len() > self.k {
            return invalid(format!(
                "degree of a {}-set in a {}-uniform hypergraph",
                s.len(),
                self.k
            ));
        }
        if let Some(&v) = s.iter().find(|&&v| v >= self.n) {
            return invalid(format!("vertex {v} outside 0..{}", self.n));
        }
        let mut sorted = s.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return invalid("degree set repeats a vertex");
        }
        Ok(if s.len() == self.k {
            usize::from(self.contains_sorted(&sorted))
        } else if s.len() + 1 == self.k {
            self.extensions(&sorted).len()
        } else {
            self.edges()
                .filter(|e| sorted.iter().all(|v| e.binary_search(v).is_ok()))
                .count()
        })
    }

    pub fn degree_of_set(&self, s: &VertexSet) -> Result<usize> {
        self.degree(&s.to_vec())
    }

    /// Degrees of all `j`-sets, indexed by colex rank.
    fn degree_table(&self, j: usize) -> Vec<u32> {
        let binom = Binomials::new(self.n, j);
        let mut table = vec![0u32; binom.get(self.n, j) as usize];
        let mut sub = [0usize; MAX_UNIFORMITY];
        for e in self.edges() {
            for_each_subset(self.k, j, |idx| {
                for (t, &i) in idx.iter().enumerate() {
                    sub[t] = e[i];
                }
                table[binom.rank(&sub[..j]) as usize] += 1;
            });
        }
        table
    }

    /// Minimum degree over all `j`-sets with a lexicographically first witness.
    pub fn min_j_degree(&self, j: usize) -> Result<(usize, Vec<Vertex>)> {
        if j == 0 || j > self.k {
            return invalid(format!("j = {j} outside 1..={}", self.k));
        }
        if self.n < j {
            return invalid(format!("no {j}-sets among {} vertices", self.n));
        }
        let table = self.degree_table(j);
        let binom = Binomials::new(self.n, j);
        let mut best: Option<(usize, Vec<Vertex>)> = None;
        for_each_subset(self.n, j, |s| {
            let d = table[binom.rank(s) as usize] as usize;
            if best.as_ref().is_none_or(|(b, _)| d < *b) {
                best = Some((d, s.to_vec()));
            }
        });
        Ok(best.expect("at least one j-set"))
    }

    /// The link of `anchor`: edges `e ∖ anchor` over all edges `e ⊇ anchor`.
    ///
    /// With `drop_anchor`, the anchor vertices leave the universe and the
    /// rest are relabeled in increasing order.
    pub fn link(&self, anchor: &[Vertex], drop_anchor: bool) -> Result<Relabeled> {
        if anchor.len() >= self.k {
            return invalid(format!(
                "link of a {}-set in a {}-uniform hypergraph",
                anchor.len(),
                self.k
            ));
        }
        let set = VertexSet::from_iter_in(self.n, anchor.iter().copied().filter(|&v| v < self.n));
        if set.len() != anchor.len() {
            return invalid("link anchor repeats a vertex or leaves the vertex range");
        }
        let labels: Vec<Vertex> = if drop_anchor {
            (0..self.n).filter(|v| !set.contains(*v)).collect()
        } else {
            (0..self.n).collect()
        };
        let mut new_id = vec![usize::MAX; self.n];
        for (i, &v) in labels.iter().enumerate() {
            new_id[v] = i;
        }
        let k2 = self.k - anchor.len();
        let mut flat = Vec::new();
        for e in self.edges() {
            if anchor.iter().all(|v| e.binary_search(v).is_ok()) {
                flat.extend(e.iter().filter(|v| !set.contains(**v)).map(|&v| new_id[v]));
            }
        }
        let hypergraph = Self::canonicalise(k2, labels.len(), flat);
        Ok(Relabeled { hypergraph, labels })
    }

    /// Sub-hypergraph of edges inside `keep`, relabeled to `0..|keep|`.
    pub fn induced(&self, keep: &VertexSet) -> Relabeled {
        let labels: Vec<Vertex> = keep.iter().filter(|&v| v < self.n).collect();
        let mut new_id = vec![usize::MAX; self.n];
        for (i, &v) in labels.iter().enumerate() {
            new_id[v] = i;
        }
        let mut flat = Vec::new();
        for e in self.edges() {
            if e.iter().all(|&v| keep.contains(v)) {
                flat.extend(e.iter().map(|&v| new_id[v]));
            }
        }
        let hypergraph = Self::canonicalise(self.k, labels.len(), flat);
        Relabeled { hypergraph, labels }
    }

    /// Edges already ascending within; relabeling is monotone so they stay so.
    fn canonicalise(k: usize, n: usize, flat: Vec<Vertex>) -> Self {
        let mut rows: Vec<&[Vertex]> = flat.chunks_exact(k).collect();
        rows.sort_unstable();
        let sorted = rows.concat();
        Self::from_canonical(k, n, sorted)
    }

    /// Text form: a `k n` header followed by one ascending edge per line.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(16 + self.edges.len() * 3);
        let _ = writeln!(out, "{} {}", self.k, self.n);
        for e in self.edges() {
            let mut first = true;
            for v in e {
                if !first {
                    out.push(' ');
                }
                first = false;
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let err = |line: usize, message: &str| Error::Parse {
            line,
            message: message.to_string(),
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hl, header) = lines.next().ok_or_else(|| err(1, "missing header"))?;
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| err(hl, "malformed header")))
            .collect::<Result<_>>()?;
        let [k, n] = nums[..] else {
            return Err(err(hl, "header must be \"k n\""));
        };
        check_shape(k, n).map_err(|e| err(hl, &e.to_string()))?;
        let mut flat = Vec::new();
        let mut seen = HashSet::new();
        for (ln, line) in lines {
            let start = flat.len();
            for tok in line.split_whitespace() {
                let v: usize = tok.parse().map_err(|_| err(ln, "malformed vertex"))?;
                flat.push(v);
            }
            let e = &flat[start..];
            if e.len() != k {
                return Err(err(ln, &format!("expected {k} vertices")));
            }
            if e.iter().any(|&v| v >= n) {
                return Err(err(ln, "vertex out of range"));
            }
            if e.windows(2).any(|w| w[0] >= w[1]) {
                return Err(err(ln, "vertices not strictly ascending"));
            }
            if !seen.insert(pack(e)) {
                return Err(err(ln, "duplicate edge"));
            }
        }
        Ok(Self::canonicalise(k, n, flat))
    }
}

/// Serializable summary used in reports.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct HypergraphSummary {
    pub k: usize,
    pub n: usize,
    pub edges: usize,
}

impl From<&Hypergraph> for HypergraphSummary {
    fn from(h: &Hypergraph) -> Self {
        HypergraphSummary {
            k: h.k,
            n: h.n,
            edges: h.edge_count(),
        }
    }
}
