//! Connectable pairs and triples, bridges, and exact evaluation of the
//! counting inequalities built on them.
//!
//! Everything here works on a [`LinkSystem`]: a 3-uniform hypergraph on a
//! vertex set `V` together with a robust vertex set `U_w` inside the link
//! graph of every `w ∈ V`. A 3-uniform host with its [`RobustFamily3`] is one
//! such system; every vertex link of a 4-uniform host with its
//! [`RobustFamily4`] is another ([`LinkView`]).

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hypercore::Hypergraph;
use crate::report::{Checklist, LemmaReport, Relation};
use crate::robust::{
    extract_robust_subgraph, is_robust_within, ExtractParams, Graph, RobustCertificate,
};
use crate::vertex_set::{Vertex, VertexSet};

/// `count ≥ ζ·size`, with slack for the rounding of the product.
pub fn meets_fraction(count: usize, zeta: f64, size: usize) -> bool {
    count as f64 >= zeta * size as f64 - 1e-9
}

fn check_zeta(zeta: f64) -> Result<()> {
    if zeta > 0.0 && zeta <= 1.0 {
        Ok(())
    } else {
        invalid(format!("connectability fraction {zeta} outside (0, 1]"))
    }
}

pub trait LinkSystem: Sync {
    fn universe(&self) -> usize;

    fn vertices(&self) -> &VertexSet;

    /// `{z ∈ V : xyz is an edge}`.
    fn common_link(&self, x: Vertex, y: Vertex) -> VertexSet;

    /// Vertex set of the robust subgraph chosen in the link graph of `w`.
    fn robust_set(&self, w: Vertex) -> &VertexSet;

    fn beta(&self) -> f64;

    fn ell(&self) -> usize;

    /// Whether `R_w` is `(β, ℓ)`-robust. Recomputed unless already certified.
    fn robust_certified(&self, w: Vertex) -> Result<bool> {
        Ok(is_robust_within(
            &self.link_graph(w),
            self.robust_set(w),
            self.beta(),
            self.ell(),
        )?
        .robust)
    }

    /// The link graph of `w` restricted to `V`.
    fn link_graph(&self, w: Vertex) -> Graph {
        let mut g = Graph::new(self.universe());
        for x in self.vertices().iter().filter(|&x| x != w) {
            for y in self.common_link(w, x).iter().filter(|&y| y > x) {
                g.add_edge(x, y);
            }
        }
        g
    }
}

/// One robust subgraph per vertex link of a 3-uniform host.
#[derive(Clone, Debug)]
pub struct RobustFamily3<'h> {
    host: &'h Hypergraph,
    vertices: VertexSet,
    certificates: Vec<RobustCertificate>,
    params: ExtractParams,
    min_degree: usize,
}

pub fn build_family3(host: &Hypergraph, params: ExtractParams) -> Result<RobustFamily3<'_>> {
    if host.k() != 3 {
        return invalid(format!("expected a 3-uniform host, got k = {}", host.k()));
    }
    let n = host.n();
    let results: Vec<_> = (0..n)
        .into_par_iter()
        .map(|v| extract_robust_subgraph(&Graph::vertex_link(host, v), params))
        .collect();
    let mut certificates = Vec::with_capacity(n);
    for (v, r) in results.into_iter().enumerate() {
        match r? {
            Ok(cert) => certificates.push(cert),
            Err(f) => {
                return Err(Error::Extraction {
                    location: vec![v],
                    detail: format!("{:?}: {}", f.clause, f.detail),
                })
            }
        }
    }
    let params = certificates.first().map_or(params, |c| c.params);
    Ok(RobustFamily3 {
        host,
        vertices: VertexSet::full(n),
        certificates,
        params,
        min_degree: if n >= 3 { host.min_j_degree(1)?.0 } else { 0 },
    })
}

impl<'h> RobustFamily3<'h> {
    pub fn host(&self) -> &'h Hypergraph {
        self.host
    }

    pub fn params(&self) -> ExtractParams {
        self.params
    }

    pub fn certificate(&self, v: Vertex) -> &RobustCertificate {
        &self.certificates[v]
    }

    /// `δ₁` of the host.
    pub fn min_degree(&self) -> usize {
        self.min_degree
    }

    /// Re-verifies every certificate against a freshly computed link.
    pub fn verify(&self) -> Result<bool> {
        for (v, c) in self.certificates.iter().enumerate() {
            if !c.verify(&Graph::vertex_link(self.host, v))? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl LinkSystem for RobustFamily3<'_> {
    fn universe(&self) -> usize {
        self.host.n()
    }

    fn vertices(&self) -> &VertexSet {
        &self.vertices
    }

    fn common_link(&self, x: Vertex, y: Vertex) -> VertexSet {
        self.host.extensions(&[x, y])
    }

    fn robust_set(&self, w: Vertex) -> &VertexSet {
        &self.certificates[w].vertices
    }

    fn beta(&self) -> f64 {
        self.params.beta
    }

    fn ell(&self) -> usize {
        self.params.ell
    }

    fn robust_certified(&self, _w: Vertex) -> Result<bool> {
        Ok(true)
    }
}

/// One robust subgraph per pair link of a 4-uniform host.
#[derive(Clone, Debug)]
pub struct RobustFamily4<'h> {
    host: &'h Hypergraph,
    certificates: Vec<RobustCertificate>,
    params: ExtractParams,
    min_pair_degree: usize,
    empty: VertexSet,
}

fn pair_slot(n: usize, u: Vertex, v: Vertex) -> usize {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    a * n - a * (a + 1) / 2 + (b - a - 1)
}

pub fn build_family4(host: &Hypergraph, params: ExtractParams) -> Result<RobustFamily4<'_>> {
    if host.k() != 4 {
        return invalid(format!("expected a 4-uniform host, got k = {}", host.k()));
    }
    let n = host.n();
    let pairs: Vec<(Vertex, Vertex)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    let results: Vec<_> = pairs
        .par_iter()
        .map(|&(u, v)| extract_robust_subgraph(&Graph::pair_link(host, u, v), params))
        .collect();
    let mut certificates = Vec::with_capacity(pairs.len());
    for (&(u, v), r) in pairs.iter().zip(results) {
        match r? {
            Ok(cert) => certificates.push(cert),
            Err(f) => {
                return Err(Error::Extraction {
                    location: vec![u, v],
                    detail: format!("{:?}: {}", f.clause, f.detail),
                })
            }
        }
    }
    let params = certificates.first().map_or(params, |c| c.params);
    Ok(RobustFamily4 {
        host,
        certificates,
        params,
        min_pair_degree: if n >= 4 { host.min_j_degree(2)?.0 } else { 0 },
        empty: VertexSet::new(n),
    })
}

impl<'h> RobustFamily4<'h> {
    pub fn host(&self) -> &'h Hypergraph {
        self.host
    }

    pub fn n(&self) -> usize {
        self.host.n()
    }

    pub fn params(&self) -> ExtractParams {
        self.params
    }

    /// `δ₂` of the host.
    pub fn min_pair_degree(&self) -> usize {
        self.min_pair_degree
    }

    pub fn certificate(&self, u: Vertex, v: Vertex) -> Option<&RobustCertificate> {
        (u != v && u < self.n() && v < self.n())
            .then(|| &self.certificates[pair_slot(self.n(), u, v)])
    }

    /// `U_uv`; empty when `u = v`.
    pub fn robust_set(&self, u: Vertex, v: Vertex) -> &VertexSet {
        self.certificate(u, v).map_or(&self.empty, |c| &c.vertices)
    }

    /// The 3-uniform system `H̄_v` with robust sets `U_uv`.
    pub fn link_view(&self, v: Vertex) -> LinkView<'_> {
        let mut vertices = VertexSet::full(self.n());
        vertices.remove(v);
        LinkView {
            family: self,
            v,
            vertices,
        }
    }

    pub fn verify(&self) -> Result<bool> {
        let n = self.n();
        for u in 0..n {
            for v in u + 1..n {
                if !self.certificates[pair_slot(n, u, v)]
                    .verify(&Graph::pair_link(self.host, u, v))?
                {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

pub struct LinkView<'a> {
    family: &'a RobustFamily4<'a>,
    v: Vertex,
    vertices: VertexSet,
}

impl LinkView<'_> {
    pub fn anchor(&self) -> Vertex {
        self.v
    }
}

impl LinkSystem for LinkView<'_> {
    fn universe(&self) -> usize {
        self.family.n()
    }

    fn vertices(&self) -> &VertexSet {
        &self.vertices
    }

    fn common_link(&self, x: Vertex, y: Vertex) -> VertexSet {
        self.family.host.extensions(&[self.v, x, y])
    }

    fn robust_set(&self, w: Vertex) -> &VertexSet {
        self.family.robust_set(w, self.v)
    }

    fn beta(&self) -> f64 {
        self.family.params.beta
    }

    fn ell(&self) -> usize {
        self.family.params.ell
    }

    fn robust_certified(&self, _w: Vertex) -> Result<bool> {
        Ok(true)
    }
}

/// A link system cut down to a vertex subset, with robust sets intersected
/// accordingly. Robustness is re-checked against `beta`, never inherited.
pub struct Restricted<'a, S: ?Sized> {
    inner: &'a S,
    vertices: VertexSet,
    robust: Vec<VertexSet>,
    beta: f64,
}

pub fn restrict<'a, S: LinkSystem + ?Sized>(
    inner: &'a S,
    keep: &VertexSet,
    beta: f64,
) -> Restricted<'a, S> {
    let vertices = keep.intersection(inner.vertices());
    let robust = (0..inner.universe())
        .map(|w| {
            if vertices.contains(w) {
                inner.robust_set(w).intersection(&vertices)
            } else {
                VertexSet::new(inner.universe())
            }
        })
        .collect();
    Restricted {
        inner,
        vertices,
        robust,
        beta,
    }
}

impl<S: LinkSystem + ?Sized> LinkSystem for Restricted<'_, S> {
    fn universe(&self) -> usize {
        self.inner.universe()
    }

    fn vertices(&self) -> &VertexSet {
        &self.vertices
    }

    fn common_link(&self, x: Vertex, y: Vertex) -> VertexSet {
        self.inner.common_link(x, y).intersection(&self.vertices)
    }

    fn robust_set(&self, w: Vertex) -> &VertexSet {
        &self.robust[w]
    }

    fn beta(&self) -> f64 {
        self.beta
    }

    fn ell(&self) -> usize {
        self.inner.ell()
    }
}

/// Witness sets and connectability for all pairs (arity 2) or all ordered
/// triples (arity 3) over one vertex universe.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectivityIndex {
    arity: usize,
    universe: usize,
    size: usize,
    zeta: f64,
    words: usize,
    witnesses: Vec<u64>,
    counts: Vec<u32>,
}

impl ConnectivityIndex {
    fn empty(arity: usize, universe: usize, size: usize, zeta: f64) -> Self {
        let slots = universe.pow(arity as u32);
        let words = universe.div_ceil(64);
        ConnectivityIndex {
            arity,
            universe,
            size,
            zeta,
            words,
            witnesses: vec![0; slots * words],
            counts: vec![0; slots],
        }
    }

    fn slot(&self, t: &[Vertex]) -> Option<usize> {
        if t.len() != self.arity || t.iter().any(|&v| v >= self.universe) {
            return None;
        }
        for i in 0..t.len() {
            if t[..i].contains(&t[i]) {
                return None;
            }
        }
        Some(t.iter().fold(0, |acc, &v| acc * self.universe + v))
    }

    fn add_witness(&mut self, slot: usize, w: Vertex) {
        let word = &mut self.witnesses[slot * self.words + w / 64];
        let bit = 1u64 << (w % 64);
        if *word & bit == 0 {
            *word |= bit;
            self.counts[slot] += 1;
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    /// `ζ·|V|`.
    pub fn threshold(&self) -> f64 {
        self.zeta * self.size as f64
    }

    /// The witness set; empty for malformed tuples.
    pub fn witness(&self, t: &[Vertex]) -> VertexSet {
        match self.slot(t) {
            Some(s) => VertexSet::from_words(
                self.universe,
                &self.witnesses[s * self.words..(s + 1) * self.words],
            ),
            None => VertexSet::new(self.universe),
        }
    }

    pub fn witness_count(&self, t: &[Vertex]) -> usize {
        self.slot(t).map_or(0, |s| self.counts[s] as usize)
    }

    pub fn is_connectable(&self, t: &[Vertex]) -> bool {
        self.slot(t)
            .is_some_and(|s| meets_fraction(self.counts[s] as usize, self.zeta, self.size))
    }

    /// All `v` with `prefix ++ [v]` connectable.
    pub fn successors(&self, prefix: &[Vertex]) -> VertexSet {
        let mut t = prefix.to_vec();
        t.push(0);
        VertexSet::from_iter_in(
            self.universe,
            (0..self.universe).filter(|&v| {
                *t.last_mut().unwrap() = v;
                self.is_connectable(&t)
            }),
        )
    }

    /// Connectable tuples in lexicographic order; pairs listed once as `x < y`.
    pub fn connectable(&self) -> Vec<Vec<Vertex>> {
        let n = self.universe;
        let mut out = Vec::new();
        for s in 0..self.counts.len() {
            if !meets_fraction(self.counts[s] as usize, self.zeta, self.size) {
                continue;
            }
            let mut t = vec![0; self.arity];
            let mut r = s;
            for i in (0..self.arity).rev() {
                t[i] = r % n;
                r /= n;
            }
            if self.arity == 2 && t[0] > t[1] {
                continue;
            }
            if self.slot(&t).is_some() {
                out.push(t);
            }
        }
        out
    }

    /// Number of connectable tuples, counting pairs once and triples as ordered.
    pub fn connectable_count(&self) -> usize {
        self.connectable().len()
    }
}

/// `memb[x] = {w ∈ V : x ∈ U_w}`.
fn memberships<S: LinkSystem + ?Sized>(sys: &S) -> Vec<VertexSet> {
    let n = sys.universe();
    let mut memb = vec![VertexSet::new(n); n];
    for w in sys.vertices().iter() {
        for x in sys.robust_set(w).iter() {
            memb[x].insert(w);
        }
    }
    memb
}

/// `U_xy` for every ordered pair, as flat words plus counts.
fn pair_witnesses<S: LinkSystem + ?Sized>(sys: &S) -> (Vec<VertexSet>, Vec<u32>) {
    let n = sys.universe();
    let memb = memberships(sys);
    let verts = sys.vertices();
    let rows: Vec<Vec<(Vertex, VertexSet)>> = (0..n)
        .into_par_iter()
        .map(|x| {
            if !verts.contains(x) {
                return Vec::new();
            }
            verts
                .iter()
                .filter(|&y| y > x)
                .map(|y| {
                    let mut u = sys.common_link(x, y);
                    u.intersect_with(&memb[x]);
                    u.intersect_with(&memb[y]);
                    (y, u)
                })
                .collect()
        })
        .collect();
    let mut sets = vec![VertexSet::new(n); n * n];
    let mut counts = vec![0u32; n * n];
    for (x, row) in rows.into_iter().enumerate() {
        for (y, u) in row {
            counts[x * n + y] = u.len() as u32;
            counts[y * n + x] = u.len() as u32;
            sets[y * n + x] = u.clone();
            sets[x * n + y] = u;
        }
    }
    (sets, counts)
}

fn connectable_rows(sys: &(impl LinkSystem + ?Sized), counts: &[u32], zeta: f64) -> Vec<VertexSet> {
    let n = sys.universe();
    let size = sys.vertices().len();
    (0..n)
        .map(|x| {
            VertexSet::from_iter_in(
                n,
                (0..n)
                    .filter(|&y| meets_fraction(counts[x * n + y] as usize, zeta, size) && x != y),
            )
        })
        .collect()
}

/// Witness sets `U_xy = {w ∈ V : xy ∈ E(R_w)}` and `ζ·|V|` connectability.
pub fn connectable_pairs<S: LinkSystem + ?Sized>(sys: &S, zeta: f64) -> Result<ConnectivityIndex> {
    check_zeta(zeta)?;
    let n = sys.universe();
    let (sets, counts) = pair_witnesses(sys);
    let mut idx = ConnectivityIndex::empty(2, n, sys.vertices().len(), zeta);
    for (s, u) in sets.iter().enumerate() {
        idx.witnesses[s * idx.words..(s + 1) * idx.words].copy_from_slice(u.words());
    }
    idx.counts = counts;
    Ok(idx)
}

fn for_each_bridge3<S: LinkSystem + ?Sized>(
    sys: &S,
    rows: &[VertexSet],
    mut f: impl FnMut(Vertex, Vertex, Vertex),
) {
    for x in sys.vertices().iter() {
        for y in rows[x].iter() {
            let mut zs = sys.common_link(x, y);
            zs.intersect_with(&rows[y]);
            for z in zs.iter() {
                f(x, y, z);
            }
        }
    }
}

fn pair_rows(idx: &ConnectivityIndex) -> Vec<VertexSet> {
    (0..idx.universe).map(|x| idx.successors(&[x])).collect()
}

/// Ordered triples `(x, y, z)` with `xyz` an edge and `xy`, `yz` connectable.
pub fn bridges3<S: LinkSystem + ?Sized>(sys: &S, idx: &ConnectivityIndex) -> Vec<[Vertex; 3]> {
    let mut out = Vec::new();
    for_each_bridge3(sys, &pair_rows(idx), |x, y, z| out.push([x, y, z]));
    out
}

pub fn is_bridge3<S: LinkSystem + ?Sized>(
    sys: &S,
    idx: &ConnectivityIndex,
    x: Vertex,
    y: Vertex,
    z: Vertex,
) -> bool {
    idx.is_connectable(&[x, y]) && idx.is_connectable(&[y, z]) && sys.common_link(x, y).contains(z)
}

/// `U_xyz = {v : (x, y, z) is a ζ-bridge in H̄_v}` for all ordered triples.
pub fn connectable_triples(family: &RobustFamily4<'_>, zeta: f64) -> Result<ConnectivityIndex> {
    Ok(connectable_triples_multi(family, &[zeta])?.remove(0))
}

/// As [`connectable_triples`] for several fractions, sharing the per-link
/// pair computation.
pub fn connectable_triples_multi(
    family: &RobustFamily4<'_>,
    zetas: &[f64],
) -> Result<Vec<ConnectivityIndex>> {
    for &z in zetas {
        check_zeta(z)?;
    }
    let n = family.n();
    let mut out: Vec<_> = zetas
        .iter()
        .map(|&z| ConnectivityIndex::empty(3, n, n, z))
        .collect();
    for v in 0..n {
        let view = family.link_view(v);
        let (_, counts) = pair_witnesses(&view);
        for (idx, &zeta) in out.iter_mut().zip(zetas) {
            let rows = connectable_rows(&view, &counts, zeta);
            for_each_bridge3(&view, &rows, |x, y, z| {
                idx.add_witness((x * n + y) * n + z, v)
            });
        }
    }
    Ok(out)
}

/// Calls `f` on every ordered quadruple `(a, b, c, d)` with `abcd` an edge
/// and `(a, b, c)`, `(b, c, d)` connectable.
pub fn for_each_bridge4(
    host: &Hypergraph,
    idx: &ConnectivityIndex,
    mut f: impl FnMut([Vertex; 4]),
) {
    let n = idx.universe();
    let succ: Vec<VertexSet> = (0..n * n)
        .map(|s| idx.successors(&[s / n, s % n]))
        .collect();
    for a in 0..n {
        for b in 0..n {
            for c in succ[a * n + b].iter() {
                let mut ds = host.extensions(&[a, b, c]);
                ds.intersect_with(&succ[b * n + c]);
                for d in ds.iter() {
                    f([a, b, c, d]);
                }
            }
        }
    }
}

pub fn bridges4(host: &Hypergraph, idx: &ConnectivityIndex) -> Vec<[Vertex; 4]> {
    let mut out = Vec::new();
    for_each_bridge4(host, idx, |q| out.push(q));
    out
}

pub fn count_bridges4(host: &Hypergraph, idx: &ConnectivityIndex) -> usize {
    let mut c = 0;
    for_each_bridge4(host, idx, |_| c += 1);
    c
}

pub fn is_bridge4(host: &Hypergraph, idx: &ConnectivityIndex, q: [Vertex; 4]) -> bool {
    idx.is_connectable(&q[..3]) && idx.is_connectable(&q[1..]) && host.contains(&q)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LemmaId {
    F41,
    NB3,
    L35,
    F41analog,
    NCT,
    NB4,
}

impl LemmaId {
    pub const ALL: [LemmaId; 6] = [
        LemmaId::F41,
        LemmaId::NB3,
        LemmaId::L35,
        LemmaId::F41analog,
        LemmaId::NCT,
        LemmaId::NB4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LemmaId::F41 => "F41",
            LemmaId::NB3 => "NB3",
            LemmaId::L35 => "L35",
            LemmaId::F41analog => "F41analog",
            LemmaId::NCT => "NCT",
            LemmaId::NB4 => "NB4",
        }
    }

    pub fn uniformity(self) -> usize {
        match self {
            LemmaId::F41 | LemmaId::NB3 | LemmaId::L35 => 3,
            _ => 4,
        }
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LemmaId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LemmaId::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown lemma id {s:?}")))
    }
}

fn common_parameters(c: &mut Checklist, alpha: f64, beta: f64, ell: usize) {
    c.require(alpha > 0.0 && alpha < 1.0 / 3.0, || {
        format!("alpha = {alpha} outside (0, 1/3)")
    })
    .require(beta > 0.0, || format!("beta = {beta} not positive"))
    .require(ell >= 3 && ell % 2 == 1, || {
        format!("path length {ell} not an odd integer >= 3")
    });
}

/// The 3-uniform setup hypotheses with cut parameter `mu`, evaluated exactly.
pub fn check_setup3<S: LinkSystem + ?Sized>(sys: &S, alpha: f64, mu: f64) -> Result<Checklist> {
    let mut c = Checklist::new();
    common_parameters(&mut c, alpha, sys.beta(), sys.ell());
    let verts = sys.vertices();
    let size = verts.len() as f64;
    let degree_floor = (5.0 / 9.0 + alpha) * size * size / 2.0;
    let worst = verts
        .iter()
        .map(|x| {
            let twice: usize = verts
                .iter()
                .filter(|&y| y != x)
                .map(|y| sys.common_link(x, y).len())
                .sum();
            (twice / 2, x)
        })
        .min();
    if let Some((d, x)) = worst {
        c.require(d as f64 >= degree_floor, || {
            format!("vertex {x} has degree {d} < {degree_floor:.2}")
        });
    } else {
        c.require(false, || "empty vertex set".into());
    }
    let mut failed = [false; 4];
    for w in verts.iter() {
        let u = sys.robust_set(w);
        let m = u.len() as f64;
        let (mut inside, mut cut) = (0usize, 0usize);
        for x in u.iter() {
            let l = sys.common_link(w, x);
            inside += l.intersection_len(u);
            cut += l.len() - l.intersection_len(u);
        }
        let edges = inside / 2;
        let checks = [
            m >= (2.0 / 3.0 + alpha / 2.0) * size - 1e-9,
            cut as f64 <= mu * size * size + 1e-9,
            edges as f64
                >= (5.0 / 9.0 + alpha / 2.0) * size * size / 2.0 - (size - m).powi(2) / 2.0 - 1e-9,
        ];
        let names = ["size", "cut", "edge count"];
        for (i, ok) in checks.into_iter().enumerate() {
            if !ok && !failed[i] {
                failed[i] = true;
                c.require(false, || {
                    format!("robust subgraph at {w} fails the {} clause", names[i])
                });
            }
        }
        if !failed[3] && !sys.robust_certified(w)? {
            failed[3] = true;
            c.require(false, || format!("robust subgraph at {w} is not robust"));
        }
    }
    Ok(c)
}

/// The 4-uniform setup hypotheses, plus the 3-uniform setup with cut
/// parameter `α/4` in every vertex link, which the per-link counting steps use.
pub fn check_setup4(family: &RobustFamily4<'_>, alpha: f64) -> Result<Checklist> {
    let mut c = Checklist::new();
    let p = family.params();
    common_parameters(&mut c, alpha, p.beta, p.ell);
    let n = family.n();
    let nf = n as f64;
    let floor = (5.0 / 9.0 + alpha) * nf * nf / 2.0;
    let d2 = family.min_pair_degree();
    c.require(d2 as f64 >= floor, || {
        format!("pair degree {d2} < {floor:.2}")
    });
    let mu = alpha.powi(3) / 18.0;
    let mut failed = [false; 3];
    for u in 0..n {
        for v in u + 1..n {
            let cert = family.certificate(u, v).expect("pair in range");
            let m = cert.vertices.len() as f64;
            let checks = [
                m >= (2.0 / 3.0 + alpha / 2.0) * nf - 1e-9,
                cert.cut as f64 <= mu * nf * nf + 1e-9,
                cert.edges as f64
                    >= (5.0 / 9.0 + alpha / 2.0) * nf * nf / 2.0 - (nf - m).powi(2) / 2.0 - 1e-9,
            ];
            for (i, ok) in checks.into_iter().enumerate() {
                if !ok && !failed[i] {
                    failed[i] = true;
                    c.require(false, || {
                        format!("pair {{{u}, {v}}} fails robust clause {}", i + 1)
                    });
                }
            }
        }
    }
    for v in 0..n {
        let link = check_setup3(&family.link_view(v), alpha, alpha / 4.0)?;
        if !link.holds() {
            c.require(false, || {
                format!("link of {v}: {}", link.unmet().join("; "))
            });
            break;
        }
    }
    Ok(c)
}

/// Ordered pairs `(x, y)` of `V` that are not connectable, weighted by `|U_xy|`.
fn unconnectable_witness_mass(idx: &ConnectivityIndex, verts: &VertexSet) -> usize {
    let mut total = 0;
    for x in verts.iter() {
        for y in verts.iter().filter(|&y| y != x) {
            if !idx.is_connectable(&[x, y]) {
                total += idx.witness_count(&[x, y]);
            }
        }
    }
    total
}

/// Triples `(x, y, z)` with `xy ∈ E(R_z)` and `xy` not connectable, against `ζ|V|³`.
pub fn verify_f41<S: LinkSystem + ?Sized>(sys: &S, zeta: f64, alpha: f64) -> Result<LemmaReport> {
    let idx = connectable_pairs(sys, zeta)?;
    let setup = check_setup3(sys, alpha, alpha / 4.0)?;
    let size = sys.vertices().len() as f64;
    let lhs = unconnectable_witness_mass(&idx, sys.vertices()) as f64;
    Ok(LemmaReport::with_unmet(
        "F41",
        setup.into_unmet(),
        lhs,
        Relation::AtMost,
        zeta * size.powi(3),
    ))
}

/// Ordered edges that are not bridges, and the number of bridges.
pub fn verify_nb3<S: LinkSystem + ?Sized>(
    sys: &S,
    zeta: f64,
    alpha: f64,
) -> Result<[LemmaReport; 2]> {
    let idx = connectable_pairs(sys, zeta)?;
    let setup = check_setup3(sys, alpha, alpha / 4.0)?;
    let verts = sys.vertices();
    let size = verts.len() as f64;
    let ordered_edges: usize = verts
        .iter()
        .map(|x| {
            verts
                .iter()
                .filter(|&y| y != x)
                .map(|y| sys.common_link(x, y).len())
                .sum::<usize>()
        })
        .sum();
    let bridges = bridges3(sys, &idx).len();
    let first = LemmaReport::with_unmet(
        "NB3",
        setup.unmet().to_vec(),
        (ordered_edges - bridges) as f64,
        Relation::AtMost,
        (2.0 / 9.0 + alpha / 2.0 + 2.0 * zeta) * size.powi(3),
    );
    let mut second = setup;
    second.require(zeta < alpha / 4.0, || {
        format!("zeta = {zeta} not below alpha/4")
    });
    let second = LemmaReport::with_unmet(
        "NB3.bridges",
        second.into_unmet(),
        bridges as f64,
        Relation::Exceeds,
        size.powi(3) / 3.0,
    );
    Ok([first, second])
}

/// Bridges of `H` that are edges of a second 3-uniform hypergraph on
/// `other_vertices`, against `α|V|³/2`.
pub fn verify_l35<S: LinkSystem + ?Sized>(
    sys: &S,
    other: &Hypergraph,
    other_vertices: &VertexSet,
    zeta: f64,
    alpha: f64,
) -> Result<LemmaReport> {
    if other.k() != 3 || other.n() != sys.universe() || other_vertices.universe() != sys.universe()
    {
        return invalid("second hypergraph must be 3-uniform on the same universe");
    }
    let idx = connectable_pairs(sys, zeta)?;
    let mut c = check_setup3(sys, alpha, alpha.powi(3) / 18.0)?;
    let verts = sys.vertices();
    let nf = verts.len() as f64;
    c.require(zeta < alpha * alpha / 9.0, || {
        format!("zeta = {zeta} not below alpha^2/9")
    });
    let floor = (5.0 / 9.0 + alpha) * nf * nf / 2.0;
    let other_degree = other_vertices
        .iter()
        .map(|x| {
            let twice: usize = other_vertices
                .iter()
                .filter(|&y| y != x)
                .map(|y| other.extensions(&[x, y]).intersection_len(other_vertices))
                .sum();
            twice / 2
        })
        .min();
    c.require(other_degree.is_some_and(|d| d as f64 >= floor), || {
        format!("second hypergraph has minimum degree {other_degree:?} < {floor:.2}")
    });
    let sym = verts.difference(other_vertices).len() + other_vertices.difference(verts).len();
    c.require(sym as f64 <= alpha * nf / 18.0 + 1e-9, || {
        format!("vertex sets differ in {sym} vertices")
    });
    let mut lhs = 0usize;
    for_each_bridge3(sys, &pair_rows(&idx), |x, y, z| {
        if other_vertices.contains(x)
            && other_vertices.contains(y)
            && other_vertices.contains(z)
            && other.contains(&[x, y, z])
        {
            lhs += 1;
        }
    });
    Ok(LemmaReport::with_unmet(
        "L35",
        c.into_unmet(),
        lhs as f64,
        Relation::AtLeast,
        alpha * nf.powi(3) / 2.0,
    ))
}

/// The three 4-uniform inequalities, sharing one setup check.
pub fn verify_four(
    family: &RobustFamily4<'_>,
    idx: &ConnectivityIndex,
    alpha: f64,
) -> Result<[LemmaReport; 3]> {
    if idx.arity() != 3 || idx.universe() != family.n() {
        return invalid("triple index does not match the family");
    }
    let setup = check_setup4(family, alpha)?;
    let zeta = idx.zeta();
    let n = family.n();
    let nf = n as f64;

    let mut nct = setup.clone();
    nct.require(zeta < alpha / 4.0, || {
        format!("zeta = {zeta} not below alpha/4")
    });
    nct.require(
        (nf - 1.0).powi(3) >= (1.0 - 3.0 * zeta) * nf.powi(3),
        || format!("n = {n} too small for (n-1)^3 >= (1-3 zeta) n^3"),
    );
    let connectable = idx.connectable_count();
    let nct = LemmaReport::with_unmet(
        "NCT",
        nct.into_unmet(),
        connectable as f64,
        Relation::AtLeast,
        (1.0 / 3.0 - 2.0 * zeta) * nf.powi(3),
    );

    let mut mass = 0usize;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let t = [a, b, c];
                if !idx.is_connectable(&t) {
                    mass += idx.witness_count(&t);
                }
            }
        }
    }
    let analog = LemmaReport::with_unmet(
        "F41analog",
        setup.unmet().to_vec(),
        mass as f64,
        Relation::AtMost,
        zeta * nf.powi(4),
    );

    let mut nb4 = setup;
    nb4.require(nf >= (5.0 / 9.0 + alpha) / zeta, || {
        format!("n = {n} below (5/9 + alpha)/zeta")
    });
    let nb4 = LemmaReport::with_unmet(
        "NB4",
        nb4.into_unmet(),
        count_bridges4(family.host(), idx) as f64,
        Relation::AtLeast,
        (1.0 / 9.0 - 7.0 * zeta) * nf.powi(4),
    );
    Ok([nct, analog, nb4])
}

/// Input for [`verify_counting_lemma`].
pub enum LemmaInstance<'a> {
    Three {
        system: &'a dyn LinkSystem,
        zeta: f64,
        alpha: f64,
        /// Second hypergraph and its vertex set, for `L35`.
        other: Option<(&'a Hypergraph, &'a VertexSet)>,
    },
    Four {
        family: &'a RobustFamily4<'a>,
        zeta: f64,
        alpha: f64,
    },
}

pub fn verify_counting_lemma(
    id: LemmaId,
    instance: &LemmaInstance<'_>,
) -> Result<Vec<LemmaReport>> {
    match (id, instance) {
        (
            LemmaId::F41,
            LemmaInstance::Three {
                system,
                zeta,
                alpha,
                ..
            },
        ) => Ok(vec![verify_f41(*system, *zeta, *alpha)?]),
        (
            LemmaId::NB3,
            LemmaInstance::Three {
                system,
                zeta,
                alpha,
                ..
            },
        ) => Ok(verify_nb3(*system, *zeta, *alpha)?.to_vec()),
        (
            LemmaId::L35,
            LemmaInstance::Three {
                system,
                zeta,
                alpha,
                other,
            },
        ) => {
            let report = match other {
                Some((h, v)) => verify_l35(*system, h, v, *zeta, *alpha)?,
                None => {
                    let own = system_as_hypergraph(*system)?;
                    verify_l35(*system, &own, system.vertices(), *zeta, *alpha)?
                }
            };
            Ok(vec![report])
        }
        (
            LemmaId::F41analog | LemmaId::NCT | LemmaId::NB4,
            LemmaInstance::Four {
                family,
                zeta,
                alpha,
            },
        ) => {
            let idx = connectable_triples(family, *zeta)?;
            let all = verify_four(family, &idx, *alpha)?;
            Ok(all.into_iter().filter(|r| r.lemma == id.name()).collect())
        }
        _ => invalid(format!(
            "lemma {id} needs a {}-uniform instance",
            id.uniformity()
        )),
    }
}

/// The hypergraph of edges `xyz` inside `V`, rebuilt from `common_link`.
pub fn system_as_hypergraph<S: LinkSystem + ?Sized>(sys: &S) -> Result<Hypergraph> {
    let verts = sys.vertices().to_vec();
    let mut edges = Vec::new();
    for (i, &x) in verts.iter().enumerate() {
        for &y in &verts[i + 1..] {
            for z in sys.common_link(x, y).iter().filter(|&z| z > y) {
                edges.push([x, y, z]);
            }
        }
    }
    Hypergraph::new(3, sys.universe(), &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extremal::random_hypergraph;
    use crate::robust::ExtractParams;
    use proptest::prelude::*;

    fn desk() -> ExtractParams {
        ExtractParams::desk(0.1, 1.0, 0.01, 3)
    }

    fn oracle_pair_witness(
        h: &Hypergraph,
        fam: &RobustFamily3<'_>,
        x: Vertex,
        y: Vertex,
    ) -> VertexSet {
        let n = h.n();
        let mut u = VertexSet::new(n);
        for w in 0..n {
            let r = &fam.certificate(w).vertices;
            if w != x && w != y && r.contains(x) && r.contains(y) && h.contains(&[w, x, y]) {
                u.insert(w);
            }
        }
        u
    }

    /// Triple witnesses straight from the definitions, via membership tests only.
    fn oracle_triple_witness(
        h: &Hypergraph,
        fam: &RobustFamily4<'_>,
        zeta: f64,
        t: [Vertex; 3],
    ) -> VertexSet {
        let n = h.n();
        let pair_ok = |v: Vertex, x: Vertex, y: Vertex| {
            let c = (0..n)
                .filter(|&w| {
                    ![v, x, y].contains(&w)
                        && fam.robust_set(w, v).contains(x)
                        && fam.robust_set(w, v).contains(y)
                        && h.contains(&[v, w, x, y])
                })
                .count();
            c as f64 >= zeta * (n - 1) as f64 - 1e-9
        };
        let [x, y, z] = t;
        VertexSet::from_iter_in(
            n,
            (0..n).filter(|&v| {
                ![x, y, z].contains(&v)
                    && h.contains(&[v, x, y, z])
                    && pair_ok(v, x, y)
                    && pair_ok(v, y, z)
            }),
        )
    }

    #[test]
    fn complete_three_uniform() {
        let h = Hypergraph::complete(3, 8).unwrap();
        let fam = build_family3(&h, desk()).unwrap();
        for v in 0..8 {
            let mut expect = VertexSet::full(8);
            expect.remove(v);
            assert_eq!(fam.certificate(v).vertices, expect);
        }
        assert!(fam.verify().unwrap());
        let idx = connectable_pairs(&fam, 6.0 / 8.0).unwrap();
        assert_eq!(idx.witness(&[0, 1]).to_vec(), (2..8).collect::<Vec<_>>());
        assert_eq!(idx.connectable_count(), 28);
        assert!(connectable_pairs(&fam, 1.0)
            .unwrap()
            .connectable()
            .is_empty());
        assert_eq!(bridges3(&fam, &idx).len(), 8 * 7 * 6);
        let r = verify_f41(&fam, 0.01, 0.1).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(r.pass);
        assert!(connectable_pairs(&fam, 0.0).is_err());
    }

    #[test]
    fn isolated_vertex_fails_at_its_location() {
        let edges: Vec<[Vertex; 3]> = Hypergraph::complete(3, 12)
            .unwrap()
            .edges()
            .filter(|e| !e.contains(&5))
            .map(|e| [e[0], e[1], e[2]])
            .collect();
        let h = Hypergraph::new(3, 12, &edges).unwrap();
        match build_family3(&h, desk()) {
            Err(Error::Extraction { location, .. }) => assert_eq!(location, vec![5]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn random_family3_reverifies() {
        let h = random_hypergraph(14, 3, 0.85, 2).unwrap();
        let fam = build_family3(&h, desk()).unwrap();
        assert!(fam.verify().unwrap());
    }

    #[test]
    fn complete_four_uniform_triples() {
        let h = Hypergraph::complete(4, 12).unwrap();
        let fam = build_family4(&h, desk()).unwrap();
        let idx = connectable_triples(&fam, 0.05).unwrap();
        assert_eq!(idx.connectable_count(), 12 * 11 * 10);
        assert_eq!(idx.witness(&[0, 1, 2]).len(), 9);
        let r = verify_counting_lemma(
            LemmaId::NCT,
            &LemmaInstance::Four {
                family: &fam,
                zeta: 0.05,
                alpha: 0.1,
            },
        )
        .unwrap();
        assert_eq!(r[0].lhs, 1320.0);
        assert!(r[0].pass);

        let none = connectable_triples(&fam, 1.0).unwrap();
        assert!(none.connectable().is_empty());
        assert!(bridges4(&h, &none).is_empty());
    }

    #[test]
    fn lemma_ids_parse() {
        assert_eq!("nb4".parse::<LemmaId>().unwrap(), LemmaId::NB4);
        assert!(matches!(
            "Z9".parse::<LemmaId>(),
            Err(Error::InvalidArgument(_))
        ));
        let h = Hypergraph::complete(3, 8).unwrap();
        let fam = build_family3(&h, desk()).unwrap();
        let inst = LemmaInstance::Three {
            system: &fam,
            zeta: 0.1,
            alpha: 0.1,
            other: None,
        };
        assert!(verify_counting_lemma(LemmaId::NCT, &inst).is_err());
        assert_eq!(verify_counting_lemma(LemmaId::NB3, &inst).unwrap().len(), 2);
    }

    #[test]
    fn bridge_projection_and_reversal() {
        let mut built = 0;
        for seed in 0..6 {
            let h = random_hypergraph(12, 4, 0.95, seed).unwrap();
            let Ok(fam) = build_family4(&h, ExtractParams::desk(0.05, 1.0, 0.005, 3)) else {
                continue;
            };
            built += 1;
            let idx = connectable_triples(&fam, 0.2).unwrap();
            for t in idx.connectable() {
                assert!(idx.is_connectable(&[t[2], t[1], t[0]]));
                assert_eq!(idx.witness(&t), idx.witness(&[t[2], t[1], t[0]]));
            }
            let bridges = bridges4(&h, &idx);
            let mut brute = Vec::new();
            for a in 0..12 {
                for b in 0..12 {
                    for c in 0..12 {
                        for d in 0..12 {
                            if is_bridge4(&h, &idx, [a, b, c, d]) {
                                brute.push([a, b, c, d]);
                            }
                        }
                    }
                }
            }
            assert_eq!(bridges, brute);
            for q in bridges {
                assert!(
                    h.contains(&q) && idx.is_connectable(&q[..3]) && idx.is_connectable(&q[1..])
                );
            }
        }
        assert!(built > 0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn pair_witnesses_match_oracle(seed in any::<u64>(), n in 6usize..12, p in 0.6f64..1.0, zeta in 0.05f64..0.9) {
            let h = random_hypergraph(n, 3, p, seed).unwrap();
            let fam = match build_family3(&h, ExtractParams::desk(0.05, 1.0, 0.001, 3)) {
                Ok(f) => f,
                Err(_) => return Ok(()),
            };
            let idx = connectable_pairs(&fam, zeta).unwrap();
            for x in 0..n {
                for y in 0..n {
                    if x == y { continue; }
                    let u = oracle_pair_witness(&h, &fam, x, y);
                    prop_assert_eq!(idx.witness(&[x, y]), u.clone());
                    prop_assert_eq!(idx.is_connectable(&[x, y]), u.len() as f64 >= zeta * n as f64 - 1e-9);
                }
            }
            let brute: Vec<[Vertex; 3]> = (0..n).flat_map(|x| (0..n).flat_map(move |y| (0..n).map(move |z| [x, y, z])))
                .filter(|&[x, y, z]| x != y && y != z && x != z && h.contains(&[x, y, z]) && idx.is_connectable(&[x, y]) && idx.is_connectable(&[y, z]))
                .collect();
            prop_assert_eq!(bridges3(&fam, &idx), brute);
            let tighter = connectable_pairs(&fam, (zeta + 0.1).min(1.0)).unwrap();
            for t in tighter.connectable() {
                prop_assert!(idx.is_connectable(&t));
            }
        }

        #[test]
        fn triple_witnesses_match_oracle(seed in any::<u64>(), n in 11usize..14, zeta in 0.05f64..0.6) {
            let h = random_hypergraph(n, 4, 0.96, seed).unwrap();
            let fam = match build_family4(&h, ExtractParams::desk(0.05, 1.0, 0.001, 3)) {
                Ok(f) => f,
                Err(_) => return Ok(()),
            };
            let both = connectable_triples_multi(&fam, &[zeta, (zeta + 0.2).min(1.0)]).unwrap();
            let idx = &both[0];
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        if x == y || y == z || x == z { continue; }
                        prop_assert_eq!(idx.witness(&[x, y, z]), oracle_triple_witness(&h, &fam, zeta, [x, y, z]));
                    }
                }
            }
            for t in both[1].connectable() {
                prop_assert!(idx.is_connectable(&t));
            }
            let tight_bridges = bridges4(&h, &both[1]);
            let loose = bridges4(&h, idx);
            prop_assert!(tight_bridges.iter().all(|q| loose.contains(q)));
        }

        #[test]
        fn verifiers_sound_on_random_instances(seed in any::<u64>(), zeta in 0.01f64..0.08) {
            let h = random_hypergraph(10, 3, 0.97, seed).unwrap();
            let fam = match build_family3(&h, ExtractParams::desk(0.05, 1.0, 0.01, 3)) {
                Ok(f) => f,
                Err(_) => return Ok(()),
            };
            let inst = LemmaInstance::Three { system: &fam, zeta, alpha: 0.05, other: None };
            for id in [LemmaId::F41, LemmaId::NB3, LemmaId::L35] {
                for r in verify_counting_lemma(id, &inst).unwrap() {
                    prop_assert!(!r.violated(), "{:?}", r);
                }
            }
        }
    }
}
