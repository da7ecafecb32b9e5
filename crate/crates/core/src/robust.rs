//! Graphs with many short paths between every pair of vertices.
//!
//! A graph is `(β, ℓ)`-robust when every pair of distinct vertices is joined
//! by at least `β·|V|^(ℓ−1)` paths with exactly `ℓ` edges.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::hypercore::{for_each_subset, Hypergraph};
use crate::report::LemmaReport;
use crate::vertex_set::{Vertex, VertexSet};

pub const DEFAULT_PATH_LENGTH_CAP: usize = 8;
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 14;

/// A simple graph on `0..n` with bitset adjacency.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<VertexSet>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph {
            adj: vec![VertexSet::new(n); n],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::new(n);
        for v in 0..n {
            g.adj[v] = VertexSet::full(n);
            g.adj[v].remove(v);
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[(Vertex, Vertex)]) -> Result<Self> {
        let mut g = Graph::new(n);
        for &(a, b) in edges {
            if a == b || a >= n || b >= n {
                return invalid(format!("bad graph edge ({a}, {b}) on {n} vertices"));
            }
            g.add_edge(a, b);
        }
        Ok(g)
    }

    /// A 2-uniform hypergraph viewed as a graph.
    pub fn from_hypergraph(h: &Hypergraph) -> Result<Self> {
        if h.k() != 2 {
            return invalid(format!(
                "expected a 2-uniform hypergraph, got k = {}",
                h.k()
            ));
        }
        let mut g = Graph::new(h.n());
        for e in h.edges() {
            g.add_edge(e[0], e[1]);
        }
        Ok(g)
    }

    /// The link graph of `{u, v}` in a 4-uniform hypergraph; `u` and `v`
    /// stay in the vertex set as isolated vertices.
    pub fn pair_link(h: &Hypergraph, u: Vertex, v: Vertex) -> Self {
        debug_assert_eq!(h.k(), 4);
        let n = h.n();
        let mut g = Graph::new(n);
        for x in 0..n {
            if x != u && x != v {
                g.adj[x] = h.extensions(&[u, v, x]);
            }
        }
        g
    }

    /// The link graph of `u` in a 3-uniform hypergraph.
    pub fn vertex_link(h: &Hypergraph, u: Vertex) -> Self {
        debug_assert_eq!(h.k(), 3);
        let n = h.n();
        let mut g = Graph::new(n);
        for x in 0..n {
            if x != u {
                g.adj[x] = h.extensions(&[u, x]);
            }
        }
        g
    }

    pub fn add_edge(&mut self, a: Vertex, b: Vertex) {
        self.adj[a].insert(b);
        self.adj[b].insert(a);
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.adj.len()
    }

    #[inline]
    pub fn neighbors(&self, v: Vertex) -> &VertexSet {
        &self.adj[v]
    }

    #[inline]
    pub fn has_edge(&self, a: Vertex, b: Vertex) -> bool {
        self.adj[a].contains(b)
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(VertexSet::len).sum::<usize>() / 2
    }

    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        let mut out = Vec::new();
        for a in 0..self.n() {
            for b in self.adj[a].iter().filter(|&b| b > a) {
                out.push((a, b));
            }
        }
        out
    }

    /// The subgraph induced by `keep`, on the same vertex universe.
    #[must_use]
    pub fn induced(&self, keep: &VertexSet) -> Graph {
        let mut g = Graph::new(self.n());
        for v in keep {
            g.adj[v] = self.adj[v].intersection(keep);
        }
        g
    }

    /// Edges inside `keep`.
    pub fn edges_within(&self, keep: &VertexSet) -> usize {
        keep.iter()
            .map(|v| self.adj[v].intersection_len(keep))
            .sum::<usize>()
            / 2
    }

    /// Edges with exactly one end in `keep`.
    pub fn cut(&self, keep: &VertexSet) -> usize {
        keep.iter()
            .map(|v| self.adj[v].len() - self.adj[v].intersection_len(keep))
            .sum()
    }

    pub fn non_isolated(&self) -> VertexSet {
        VertexSet::from_iter_in(self.n(), (0..self.n()).filter(|&v| !self.adj[v].is_empty()))
    }
}

fn paths_within(
    g: &Graph,
    within: &VertexSet,
    on_path: &mut VertexSet,
    cur: Vertex,
    y: Vertex,
    left: usize,
) -> u64 {
    if left == 1 {
        return u64::from(g.has_edge(cur, y));
    }
    if left == 2 {
        let mut common = g.neighbors(cur).intersection(g.neighbors(y));
        common.intersect_with(within);
        common.difference_with(on_path);
        return common.len() as u64;
    }
    let mut next = g.neighbors(cur).intersection(within);
    next.difference_with(on_path);
    next.remove(y);
    let mut total = 0;
    for w in &next {
        on_path.insert(w);
        total += paths_within(g, within, on_path, w, y, left - 1);
        on_path.remove(w);
    }
    total
}

/// Number of `x`–`y` paths with `ell` edges and distinct vertices, all in `within`.
pub fn count_paths_within(
    g: &Graph,
    within: &VertexSet,
    x: Vertex,
    y: Vertex,
    ell: usize,
    cap: usize,
) -> Result<u64> {
    if x == y {
        return invalid("path endpoints must differ");
    }
    if ell == 0 || ell > cap {
        return invalid(format!("path length {ell} outside 1..={cap}"));
    }
    if !within.contains(x) || !within.contains(y) {
        return Ok(0);
    }
    let mut on_path = VertexSet::from_slice(g.n(), &[x, y]);
    Ok(paths_within(g, within, &mut on_path, x, y, ell))
}

pub fn count_paths_fixed_length(g: &Graph, x: Vertex, y: Vertex, ell: usize) -> Result<u64> {
    count_paths_within(
        g,
        &VertexSet::full(g.n()),
        x,
        y,
        ell,
        DEFAULT_PATH_LENGTH_CAP,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessCheck {
    pub robust: bool,
    /// The pair with fewest paths, if any pair exists.
    pub worst_pair: Option<(Vertex, Vertex)>,
    pub worst_count: u64,
    pub threshold: f64,
}

/// Checks robustness of `G[within]`; `|V|` in the threshold is `|within|`.
pub fn is_robust_within(
    g: &Graph,
    within: &VertexSet,
    beta: f64,
    ell: usize,
) -> Result<RobustnessCheck> {
    if ell == 0 || ell > DEFAULT_PATH_LENGTH_CAP {
        return invalid(format!(
            "path length {ell} outside 1..={DEFAULT_PATH_LENGTH_CAP}"
        ));
    }
    let verts = within.to_vec();
    let threshold = beta * (verts.len() as f64).powi(ell as i32 - 1);
    if ell == 3 {
        return Ok(three_edge_minimum(g, within, &verts, threshold));
    }
    let worst = verts
        .par_iter()
        .enumerate()
        .filter_map(|(i, &x)| {
            let mut on_path = VertexSet::new(g.n());
            verts[i + 1..]
                .iter()
                .map(|&y| {
                    on_path.clear();
                    on_path.insert(x);
                    on_path.insert(y);
                    (paths_within(g, within, &mut on_path, x, y, ell), x, y)
                })
                .min()
        })
        .min();
    Ok(match worst {
        None => RobustnessCheck {
            robust: true,
            worst_pair: None,
            worst_count: 0,
            threshold,
        },
        Some((c, x, y)) => RobustnessCheck {
            robust: c as f64 >= threshold,
            worst_pair: Some((x, y)),
            worst_count: c,
            threshold,
        },
    })
}

/// Three-edge paths from walk counts: walks `x a b y` minus those with
/// `a = y` or `b = x`, which exist only when `xy` is an edge.
fn three_edge_minimum(
    g: &Graph,
    within: &VertexSet,
    verts: &[Vertex],
    threshold: f64,
) -> RobustnessCheck {
    let m = verts.len();
    let nbr: Vec<VertexSet> = verts
        .iter()
        .map(|&v| g.neighbors(v).intersection(within))
        .collect();
    let mut common = vec![0u32; m * m];
    for i in 0..m {
        for j in i..m {
            let c = nbr[i].intersection_len(&nbr[j]) as u32;
            common[i * m + j] = c;
            common[j * m + i] = c;
        }
    }
    let mut pos = vec![usize::MAX; g.n()];
    for (i, &v) in verts.iter().enumerate() {
        pos[v] = i;
    }
    let mut worst: Option<(u64, Vertex, Vertex)> = None;
    let mut walks = vec![0u64; m];
    for i in 0..m {
        walks.iter_mut().for_each(|w| *w = 0);
        for a in &nbr[i] {
            let row = &common[pos[a] * m..(pos[a] + 1) * m];
            for (w, &c) in walks.iter_mut().zip(row) {
                *w += u64::from(c);
            }
        }
        let di = nbr[i].len() as u64;
        for j in i + 1..m {
            let mut p = walks[j];
            if nbr[i].contains(verts[j]) {
                p -= di + nbr[j].len() as u64 - 1;
            }
            if worst.is_none_or(|(c, _, _)| p < c) {
                worst = Some((p, verts[i], verts[j]));
            }
        }
    }
    match worst {
        None => RobustnessCheck {
            robust: true,
            worst_pair: None,
            worst_count: 0,
            threshold,
        },
        Some((c, x, y)) => RobustnessCheck {
            robust: c as f64 >= threshold,
            worst_pair: Some((x, y)),
            worst_count: c,
            threshold,
        },
    }
}

pub fn is_robust(g: &Graph, beta: f64, ell: usize) -> Result<RobustnessCheck> {
    is_robust_within(g, &VertexSet::full(g.n()), beta, ell)
}

/// Ordered walks with three edges, i.e. homomorphic copies of the 3-edge path.
pub fn count_walks_length3(g: &Graph) -> u128 {
    let deg: Vec<u128> = (0..g.n()).map(|v| g.degree(v) as u128).collect();
    (0..g.n())
        .map(|a| g.neighbors(a).iter().map(|b| deg[a] * deg[b]).sum::<u128>())
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkGap {
    pub walks: f64,
    pub bound: f64,
    pub gap: f64,
    pub regular: bool,
}

/// Compares the number of 3-edge walks with `(2e)³ / n²`.
pub fn blakley_roy_gap(g: &Graph) -> WalkGap {
    let n = g.n();
    let walks = count_walks_length3(g) as f64;
    let bound = if n == 0 {
        0.0
    } else {
        (2.0 * g.edge_count() as f64).powi(3) / (n * n) as f64
    };
    let regular = (1..n).all(|v| g.degree(v) == g.degree(0));
    WalkGap {
        walks,
        bound,
        gap: walks - bound,
        regular,
    }
}

/// A positive real kept as `mantissa · 2^exponent` with `mantissa ∈ [1, 2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledFloat {
    pub mantissa: f64,
    pub exponent: i64,
}

impl ScaledFloat {
    pub fn from_log2(log2: f64) -> Self {
        let exponent = log2.floor();
        ScaledFloat {
            mantissa: (log2 - exponent).exp2(),
            exponent: exponent as i64,
        }
    }

    pub fn from_f64(x: f64) -> Self {
        assert!(x > 0.0 && x.is_finite());
        Self::from_log2(x.log2())
    }

    pub fn log2(&self) -> f64 {
        self.mantissa.log2() + self.exponent as f64
    }

    /// The value as `f64`, which is `0.0` when it underflows.
    pub fn to_f64(&self) -> f64 {
        self.mantissa * (self.exponent as f64).exp2()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustConstants {
    pub mu_prime: f64,
    pub ell: u64,
    /// Natural logarithm of β.
    pub ln_beta: f64,
    pub beta: ScaledFloat,
}

/// The constants attached to a density parameter and a cut parameter:
/// `μ′ = min(μ/4, α/72)`, `ℓ` the least odd integer above `8/μ′² + 1`, and
/// `β = (μ′/2)^(6ℓ) / 72`.
pub fn robust_constants(alpha: f64, mu: f64) -> Result<RobustConstants> {
    if !(alpha > 0.0 && alpha < 1.0) || mu <= 0.0 || !mu.is_finite() {
        return invalid(format!(
            "need 0 < alpha < 1 and mu > 0, got alpha = {alpha}, mu = {mu}"
        ));
    }
    let mu_prime = (mu / 4.0).min(alpha / 72.0);
    let raw = 8.0 / (mu_prime * mu_prime) + 1.0;
    // decimal inputs often put the bound on an integer up to rounding
    let floor_bound = if (raw - raw.round()).abs() <= 1e-9 * raw {
        raw.round()
    } else {
        raw
    };
    let mut ell = floor_bound.floor() as u64 + 1;
    if ell.is_multiple_of(2) {
        ell += 1;
    }
    let ln_beta = -(72f64.ln()) + 6.0 * ell as f64 * (mu_prime / 2.0).ln();
    Ok(RobustConstants {
        mu_prime,
        ell,
        ln_beta,
        beta: ScaledFloat::from_log2(ln_beta / std::f64::consts::LN_2),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtractMode {
    /// Constants from [`robust_constants`]; requires the density hypothesis.
    Asymptotic,
    Desk,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractParams {
    pub alpha: f64,
    pub mu: f64,
    pub beta: f64,
    pub ell: usize,
    pub mode: ExtractMode,
    pub exhaustive_cap: usize,
}

impl ExtractParams {
    pub fn desk(alpha: f64, mu: f64, beta: f64, ell: usize) -> Self {
        ExtractParams {
            alpha,
            mu,
            beta,
            ell,
            mode: ExtractMode::Desk,
            exhaustive_cap: DEFAULT_EXHAUSTIVE_CAP,
        }
    }

    /// Smallest admissible subgraph size for a universe of `n` vertices.
    pub fn min_size(&self, n: usize) -> usize {
        ((2.0 / 3.0 + self.alpha / 2.0) * n as f64 - 1e-9)
            .ceil()
            .max(0.0) as usize
    }

    pub fn edge_floor(&self, n: usize, size: usize) -> f64 {
        let n = n as f64;
        let gap = n - size as f64;
        (5.0 / 9.0 + self.alpha / 2.0) * n * n / 2.0 - gap * gap / 2.0
    }

    pub fn cut_ceiling(&self, n: usize) -> f64 {
        self.mu * (n * n) as f64
    }
}

/// A certified robust induced subgraph together with every clause value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustCertificate {
    pub vertices: VertexSet,
    pub params: ExtractParams,
    pub beta_scaled: ScaledFloat,
    pub worst_pair: Option<(Vertex, Vertex)>,
    pub worst_count: u64,
    /// `worst_count / |U|^(ℓ−1)`.
    pub min_ratio: f64,
    pub cut: usize,
    pub edges: usize,
}

impl RobustCertificate {
    fn measure(g: &Graph, keep: &VertexSet, params: ExtractParams) -> Result<(Self, bool)> {
        let check = is_robust_within(g, keep, params.beta, params.ell)?;
        let size = keep.len();
        let cert = RobustCertificate {
            vertices: keep.clone(),
            params,
            beta_scaled: ScaledFloat::from_f64(params.beta.max(f64::MIN_POSITIVE)),
            worst_pair: check.worst_pair,
            worst_count: check.worst_count,
            min_ratio: check.worst_count as f64 / (size.max(1) as f64).powi(params.ell as i32 - 1),
            cut: g.cut(keep),
            edges: g.edges_within(keep),
        };
        let ok = check.robust && cert.failing_clause(g.n()).is_none();
        Ok((cert, ok))
    }

    fn failing_clause(&self, n: usize) -> Option<Clause> {
        let p = &self.params;
        if self.vertices.len() < p.min_size(n) {
            Some(Clause::Size)
        } else if self.cut as f64 > p.cut_ceiling(n) {
            Some(Clause::Cut)
        } else if (self.edges as f64) < p.edge_floor(n, self.vertices.len()) {
            Some(Clause::EdgeCount)
        } else {
            None
        }
    }

    /// Recomputes every stored quantity from `g` and checks all clauses.
    pub fn verify(&self, g: &Graph) -> Result<bool> {
        let (fresh, ok) = Self::measure(g, &self.vertices, self.params)?;
        Ok(ok && fresh == *self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clause {
    Precondition,
    Size,
    Cut,
    EdgeCount,
    Robustness,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractFailure {
    pub clause: Clause,
    pub detail: String,
}

pub type Extraction = std::result::Result<RobustCertificate, ExtractFailure>;

/// Searches for a robust induced subgraph meeting the size, cut and edge
/// clauses. Any certificate returned has been recomputed from scratch.
pub fn extract_robust_subgraph(g: &Graph, params: ExtractParams) -> Result<Extraction> {
    let n = g.n();
    let mut params = params;
    if params.mode == ExtractMode::Asymptotic {
        let need = (5.0 / 9.0 + params.alpha) * (n * n) as f64 / 2.0;
        if (g.edge_count() as f64) < need {
            return Ok(Err(ExtractFailure {
                clause: Clause::Precondition,
                detail: format!(
                    "{} edges, density hypothesis needs {need:.1}",
                    g.edge_count()
                ),
            }));
        }
        let c = robust_constants(params.alpha, params.mu)?;
        if c.ell > DEFAULT_PATH_LENGTH_CAP as u64 {
            return invalid(format!(
                "path length {} from the asymptotic constants exceeds the cap",
                c.ell
            ));
        }
        params.ell = c.ell as usize;
        params.beta = c.beta.to_f64();
    }
    let min_size = params.min_size(n);
    let mut keep = g.non_isolated();
    let mut last_failure = Clause::Size;
    while keep.len() >= min_size.max(1) {
        let check = is_robust_within(g, &keep, params.beta, params.ell)?;
        if check.robust {
            let (cert, ok) = RobustCertificate::measure(g, &keep, params)?;
            if ok {
                return Ok(Ok(cert));
            }
            last_failure = cert.failing_clause(n).unwrap_or(Clause::Robustness);
            break;
        }
        last_failure = Clause::Robustness;
        let (x, y) = check.worst_pair.expect("non-robust implies a pair");
        let dx = g.neighbors(x).intersection_len(&keep);
        let dy = g.neighbors(y).intersection_len(&keep);
        keep.remove(if dx < dy || (dx == dy && x > y) { x } else { y });
    }
    if n <= params.exhaustive_cap {
        if let Some(cert) = exhaustive_extract(g, params)? {
            return Ok(Ok(cert));
        }
    }
    Ok(Err(ExtractFailure {
        clause: last_failure,
        detail: format!("no admissible subgraph of size at least {min_size} found"),
    }))
}

fn exhaustive_extract(g: &Graph, params: ExtractParams) -> Result<Option<RobustCertificate>> {
    let n = g.n();
    for size in (params.min_size(n).max(1)..=n).rev() {
        let mut found = None;
        let mut err = None;
        for_each_subset(n, size, |s| {
            if found.is_some() || err.is_some() {
                return;
            }
            let keep = VertexSet::from_slice(n, s);
            match RobustCertificate::measure(g, &keep, params) {
                Ok((cert, true)) => found = Some(cert),
                Ok(_) => {}
                Err(e) => err = Some(e),
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        if found.is_some() {
            return Ok(found);
        }
    }
    Ok(None)
}

/// Ordered pairs `(u, v)` in `U²` with `uv` an edge of both graphs and `v`
/// of degree above `n/3` inside `G[U]`, against `(3/4)·α·n²`.
pub fn check_lemma_l36(g: &Graph, g2: &Graph, keep: &VertexSet, alpha: f64) -> Result<LemmaReport> {
    let n = g.n();
    if g2.n() != n || keep.universe() != n {
        return invalid("both graphs and the subset must share one vertex set");
    }
    let nf = n as f64;
    let dense = (5.0 / 9.0 + alpha) * nf * nf / 2.0;
    let hypotheses = g.edge_count() as f64 >= dense
        && g2.edge_count() as f64 >= dense
        && keep.len() as f64 >= 2.0 * nf / 3.0
        && g.cut(keep) as f64 <= alpha * nf * nf / 4.0;
    let heavy = VertexSet::from_iter_in(
        n,
        keep.iter()
            .filter(|&v| g.neighbors(v).intersection_len(keep) as f64 > nf / 3.0),
    );
    let lhs: usize = keep
        .iter()
        .map(|u| g.neighbors(u).intersection3_len(g2.neighbors(u), &heavy))
        .sum();
    Ok(LemmaReport::new(
        "L36",
        hypotheses,
        lhs as f64,
        0.75 * alpha * nf * nf,
    ))
}
