//! Connecting prescribed end tuples by tight paths with an exact number of
//! inner vertices, the residue menus for those counts, and the reservoir that
//! connections draw their inner vertices from.
//!
//! Every search first tries the structured construction built from robust
//! link subgraphs and connectable tuples, then falls back to a direct
//! depth-first search. Returned paths are always re-validated.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::connectivity::{ConnectivityIndex, LinkSystem, RobustFamily4};
use crate::error::{invalid, Error, Result};
use crate::hypercore::Hypergraph;
use crate::tightpaths::{Budget, TightPath};
use crate::vertex_set::{Vertex, VertexSet};

/// Inner-vertex counts, one per residue class mod `k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthMenu {
    pub k: usize,
    pub ell: usize,
    /// `values[i − 1]` is the count for residue `i`, for `i = 1..=k`.
    pub values: Vec<usize>,
}

pub fn residue_lengths(k: usize, ell: usize) -> Result<LengthMenu> {
    if ell < 3 || ell.is_multiple_of(2) {
        return invalid(format!("base length {ell} must be odd and at least 3"));
    }
    let values = match k {
        3 => vec![3 * ell + 1, 6 * ell + 5, 9 * ell + 9],
        4 => vec![32 * ell + 49, 8 * ell + 10, 16 * ell + 23, 24 * ell + 36],
        _ => return invalid(format!("length menus exist for k = 3, 4, not {k}")),
    };
    Ok(LengthMenu { k, ell, values })
}

impl LengthMenu {
    /// The count for a residue class; `0` and `k` name the same class.
    pub fn inner_for(&self, residue: usize) -> usize {
        let i = residue % self.k;
        self.values[if i == 0 { self.k } else { i } - 1]
    }
}

/// Extension queries on a uniform hypergraph, concrete or a vertex link.
trait Host {
    fn k(&self) -> usize;
    fn universe(&self) -> usize;
    fn ext(&self, face: &[Vertex]) -> VertexSet;

    fn is_tight(&self, seq: &[Vertex]) -> bool {
        let k = self.k();
        let distinct = VertexSet::from_slice(self.universe(), seq).len() == seq.len();
        distinct
            && seq
                .windows(k)
                .all(|w| self.ext(&w[..k - 1]).contains(w[k - 1]))
    }
}

impl Host for Hypergraph {
    fn k(&self) -> usize {
        Hypergraph::k(self)
    }

    fn universe(&self) -> usize {
        self.n()
    }

    fn ext(&self, face: &[Vertex]) -> VertexSet {
        self.extensions(face)
    }
}

struct LinkHost<'a, S: ?Sized>(&'a S);

impl<S: LinkSystem + ?Sized> Host for LinkHost<'_, S> {
    fn k(&self) -> usize {
        3
    }

    fn universe(&self) -> usize {
        self.0.universe()
    }

    fn ext(&self, face: &[Vertex]) -> VertexSet {
        self.0.common_link(face[0], face[1])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    ProofGuided,
    Direct,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectDiagnostics {
    pub strategy: Option<Strategy>,
    pub expansions: u64,
    pub inner_count: usize,
    pub residue: Option<usize>,
    pub budget_exhausted: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Connection {
    pub path: Option<TightPath>,
    pub diagnostics: ConnectDiagnostics,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectOptions {
    pub seed: u64,
    /// Expansion cap shared by both strategies.
    pub budget: u64,
    /// Hub choices tried by the structured construction.
    pub guided_attempts: usize,
    pub guided: bool,
}

impl Default for ConnectOptions {
    fn default() -> Self {
        ConnectOptions {
            seed: 0,
            budget: 200_000,
            guided_attempts: 8,
            guided: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerCount {
    /// The menu value for this residue class.
    Residue(usize),
    Exact(usize),
}

/// Randomized depth-first search for the inner vertices of a tight path
/// `start ++ inner ++ end`.
fn direct<H: Host + ?Sized>(
    h: &H,
    start: &[Vertex],
    end: &[Vertex],
    inner: usize,
    allowed: &VertexSet,
    rng: &mut ChaCha8Rng,
    budget: &mut Budget,
) -> Option<Vec<Vertex>> {
    let k1 = h.k() - 1;
    let mut seq = start.to_vec();
    if inner == 0 {
        seq.extend_from_slice(end);
        return h.is_tight(&seq).then(Vec::new);
    }
    let mut used = VertexSet::from_slice(h.universe(), start);
    for &v in end {
        used.insert(v);
    }
    let free = allowed.difference(&used);
    if free.len() < inner {
        return None;
    }

    fn grow<H: Host + ?Sized>(
        h: &H,
        end: &[Vertex],
        target: usize,
        free: &mut VertexSet,
        rng: &mut ChaCha8Rng,
        budget: &mut Budget,
        seq: &mut Vec<Vertex>,
    ) -> bool {
        if !budget.spend() {
            return false;
        }
        let k1 = h.k() - 1;
        let mut cand = h.ext(&seq[seq.len() - k1..]);
        cand.intersect_with(free);
        let last = seq.len() + 1 == target;
        if last {
            for t in 1..=k1 {
                let mut face = seq[seq.len() - (k1 - t)..].to_vec();
                face.extend_from_slice(&end[..t]);
                cand.intersect_with(&h.ext(&face));
            }
        }
        let mut order = cand.to_vec();
        order.shuffle(rng);
        for v in order {
            seq.push(v);
            if last {
                return true;
            }
            free.remove(v);
            if grow(h, end, target, free, rng, budget, seq) {
                return true;
            }
            free.insert(v);
            seq.pop();
            if budget.exhausted() {
                return false;
            }
        }
        false
    }

    let mut free = free;
    let target = start.len() + inner;
    grow(h, end, target, &mut free, rng, budget, &mut seq).then(|| seq[k1..].to_vec())
}

/// `{w : xy is an edge of R_w}`.
fn pair_witness<S: LinkSystem + ?Sized>(sys: &S, x: Vertex, y: Vertex) -> VertexSet {
    let mut u = sys.common_link(x, y);
    for w in u.clone().iter() {
        let r = sys.robust_set(w);
        if !(r.contains(x) && r.contains(y)) {
            u.remove(w);
        }
    }
    u
}

/// A path `from → … → to` with `len` intermediate vertices in the robust
/// subgraph `R_hub`, intermediates drawn from `free`.
fn robust_path<S: LinkSystem + ?Sized>(
    sys: &S,
    hub: Vertex,
    from: Vertex,
    to: Vertex,
    len: usize,
    free: &VertexSet,
    rng: &mut ChaCha8Rng,
    budget: &mut Budget,
) -> Option<Vec<Vertex>> {
    let robust = sys.robust_set(hub);
    let nbr = |p: Vertex| sys.common_link(hub, p).intersection(robust);
    let mut path = vec![from];
    let mut avail = free.intersection(robust);
    avail.remove(from);
    avail.remove(to);

    #[allow(clippy::too_many_arguments)]
    fn step(
        nbr: &dyn Fn(Vertex) -> VertexSet,
        to: Vertex,
        len: usize,
        avail: &mut VertexSet,
        rng: &mut ChaCha8Rng,
        budget: &mut Budget,
        path: &mut Vec<Vertex>,
    ) -> bool {
        if !budget.spend() {
            return false;
        }
        let here = *path.last().unwrap();
        if path.len() == len + 1 {
            return nbr(here).contains(to);
        }
        let mut order = nbr(here).intersection(avail).to_vec();
        order.shuffle(rng);
        for p in order {
            path.push(p);
            avail.remove(p);
            if step(nbr, to, len, avail, rng, budget, path) {
                return true;
            }
            avail.insert(p);
            path.pop();
            if budget.exhausted() {
                return false;
            }
        }
        false
    }

    step(&nbr, to, len, &mut avail, rng, budget, &mut path).then(|| path[1..].to_vec())
}

/// The structured 3-uniform construction with `3m + 1` inner vertices:
/// `a b u₁ p₁ p₂ u₂ … p₂ₘ u_{m+1} x y`, where `b p₁ … p₂ₘ x` is a path in a
/// robust subgraph `R_v` with `v ∈ U_ab ∩ U_xy`, and each `uᵢ` sees the three
/// consecutive pairs around it.
#[allow(clippy::too_many_arguments)]
fn guided3<S: LinkSystem + ?Sized>(
    sys: &S,
    ab: [Vertex; 2],
    xy: [Vertex; 2],
    m: usize,
    allowed: &VertexSet,
    attempts: usize,
    rng: &mut ChaCha8Rng,
    budget: &mut Budget,
) -> Option<Vec<Vertex>> {
    let [a, b] = ab;
    let [x, y] = xy;
    let mut hubs = pair_witness(sys, a, b)
        .intersection(&pair_witness(sys, x, y))
        .to_vec();
    hubs.shuffle(rng);
    let mut free = allowed.clone();
    for v in [a, b, x, y] {
        free.remove(v);
    }
    for v in hubs.into_iter().take(attempts) {
        for _ in 0..attempts {
            let ps = robust_path(sys, v, b, x, 2 * m, &free, rng, budget)?;
            let mut s = vec![a, b];
            s.extend_from_slice(&ps);
            s.extend_from_slice(&[x, y]);
            let mut spare = free.clone();
            for &p in &ps {
                spare.remove(p);
            }
            let mut hubs_on_path = Vec::with_capacity(m + 1);
            for i in 0..=m {
                let mut cand = spare.clone();
                for j in 0..3 {
                    cand.intersect_with(&sys.common_link(s[2 * i + j], s[2 * i + j + 1]));
                }
                let mut options = cand.to_vec();
                let Some(&u) = options.choose(rng) else {
                    break;
                };
                options.clear();
                spare.remove(u);
                hubs_on_path.push(u);
            }
            if hubs_on_path.len() == m + 1 {
                let mut inner = Vec::with_capacity(3 * m + 1);
                for i in 0..m {
                    inner.extend_from_slice(&[hubs_on_path[i], s[2 + 2 * i], s[3 + 2 * i]]);
                }
                inner.push(hubs_on_path[m]);
                return Some(inner);
            }
            if budget.exhausted() {
                return None;
            }
        }
    }
    None
}

/// Number of structured pieces and their `m`-values for a 3-uniform count,
/// or `None` if the count is too small.
fn plan3(inner: usize) -> Option<Vec<usize>> {
    let t = (inner + 2) % 3 + 1;
    let total = (inner + 3).checked_sub(4 * t)? / 3;
    Some(split(total, t))
}

/// As [`plan3`] for 4-uniform counts: `t` pieces of `8m + 10` joined by `t − 1`
/// connectable triples.
fn plan4(inner: usize) -> Option<Vec<usize>> {
    (1..=8)
        .find(|&t| inner + 3 >= 13 * t && (inner + 3 - 13 * t).is_multiple_of(8))
        .map(|t| split((inner + 3 - 13 * t) / 8, t))
}

fn split(total: usize, parts: usize) -> Vec<usize> {
    (0..parts)
        .map(|i| total / parts + usize::from(i < total % parts))
        .collect()
}

/// Connects pairs in a 3-uniform link system; the path is checked window by
/// window against the system before it is returned.
#[allow(clippy::too_many_arguments)]
pub fn connect3<S: LinkSystem + ?Sized>(
    sys: &S,
    idx: &ConnectivityIndex,
    ab: [Vertex; 2],
    xy: [Vertex; 2],
    inner: usize,
    allowed: &VertexSet,
    opts: ConnectOptions,
) -> Result<Connection> {
    if idx.arity() != 2 {
        return invalid("connect3 needs a pair index");
    }
    let ends = [ab[0], ab[1], xy[0], xy[1]];
    if VertexSet::from_slice(sys.universe(), &ends).len() != 4 {
        return Err(Error::Precondition(format!(
            "end pairs {ab:?} and {xy:?} are not disjoint"
        )));
    }
    for p in [ab, xy] {
        if !idx.is_connectable(&p) {
            return Err(Error::Precondition(format!(
                "pair {p:?} is not connectable"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut budget = Budget::new(opts.budget);
    let allowed = allowed.intersection(sys.vertices());
    let host = LinkHost(sys);
    let mut found = None;
    if opts.guided {
        if let Some(plan) = plan3(inner) {
            found = pieces3(
                sys,
                idx,
                ab,
                xy,
                &plan,
                &allowed,
                opts.guided_attempts,
                &mut rng,
                &mut budget,
            )
            .map(|p| (p, Strategy::ProofGuided));
        }
    }
    if found.is_none() && !budget.exhausted() {
        found = direct(&host, &ab, &xy, inner, &allowed, &mut rng, &mut budget)
            .map(|p| (p, Strategy::Direct));
    }
    let mut diagnostics = ConnectDiagnostics {
        strategy: None,
        expansions: budget.used(),
        inner_count: inner,
        residue: None,
        budget_exhausted: budget.exhausted(),
    };
    let path = match found {
        Some((mid, strategy)) => {
            let seq: Vec<Vertex> = ab.iter().chain(&mid).chain(&xy).copied().collect();
            if mid.len() != inner
                || !host.is_tight(&seq)
                || !mid.iter().all(|&v| allowed.contains(v))
            {
                return Err(Error::Precondition(format!(
                    "internal search produced an invalid path {seq:?}"
                )));
            }
            diagnostics.strategy = Some(strategy);
            Some(TightPath::trusted(3, seq))
        }
        None => None,
    };
    Ok(Connection { path, diagnostics })
}

/// Structured pieces joined through bridges `h₁h₂h₃`: a piece ends at
/// `(h₁, h₂)` and the next one starts at `(h₂, h₃)`.
#[allow(clippy::too_many_arguments)]
fn pieces3<S: LinkSystem + ?Sized>(
    sys: &S,
    idx: &ConnectivityIndex,
    ab: [Vertex; 2],
    xy: [Vertex; 2],
    plan: &[usize],
    allowed: &VertexSet,
    attempts: usize,
    rng: &mut ChaCha8Rng,
    budget: &mut Budget,
) -> Option<Vec<Vertex>> {
    let mut free = allowed.clone();
    for v in ab.iter().chain(&xy) {
        free.remove(*v);
    }
    let mut hubs = Vec::new();
    for _ in 1..plan.len() {
        let h = sample_bridge(sys, idx, &free, rng, 200)?;
        for v in h {
            free.remove(v);
        }
        hubs.push(h);
    }
    let mut out = Vec::new();
    let mut start = ab;
    for (i, &m) in plan.iter().enumerate() {
        let end = if i + 1 < plan.len() {
            [hubs[i][0], hubs[i][1]]
        } else {
            xy
        };
        let part = guided3(sys, start, end, m, &free, attempts, rng, budget)?;
        for &v in &part {
            free.remove(v);
        }
        out.extend_from_slice(&part);
        if i + 1 < plan.len() {
            out.extend_from_slice(&hubs[i]);
            start = [hubs[i][1], hubs[i][2]];
        }
    }
    Some(out)
}

fn sample_bridge<S: LinkSystem + ?Sized>(
    sys: &S,
    idx: &ConnectivityIndex,
    free: &VertexSet,
    rng: &mut ChaCha8Rng,
    tries: usize,
) -> Option<[Vertex; 3]> {
    let pool = free.to_vec();
    if pool.len() < 3 {
        return None;
    }
    for _ in 0..tries {
        let x = pool[rng.gen_range(0..pool.len())];
        let y = pool[rng.gen_range(0..pool.len())];
        if x == y || !idx.is_connectable(&[x, y]) {
            continue;
        }
        let mut zs = sys.common_link(x, y).intersection(free);
        zs.intersect_with(&idx.successors(&[y]));
        if let Some(&z) = zs.to_vec().choose(rng) {
            return Some([x, y, z]);
        }
    }
    None
}

/// One side of the structured 4-uniform construction: given the hub `u`,
/// finds `[u₁, p₁, p₂, p₃, u₂, …, u_{m+1}, p_{3m+1}]` such that
/// `a b c u₁ p₁ … u_{m+1} p_{3m+1} q₁ q₂ u` is a tight path.
#[allow(clippy::too_many_arguments)]
fn half4(
    family: &RobustFamily4<'_>,
    hub: Vertex,
    abc: [Vertex; 3],
    q: [Vertex; 2],
    m: usize,
    free: &VertexSet,
    attempts: usize,
    rng: &mut ChaCha8Rng,
    budget: &mut Budget,
) -> Option<Vec<Vertex>> {
    let h = family.host();
    let view = family.link_view(hub);
    let [a, b, c] = abc;
    let s = guided3(&view, [b, c], q, m, free, attempts, rng, budget)
        .or_else(|| direct(&LinkHost(&view), &[b, c], &q, 3 * m + 1, free, rng, budget))?;
    let mut e = vec![a, b, c];
    e.extend_from_slice(&s);
    e.extend_from_slice(&q);
    let mut spare = free.clone();
    for &p in &s {
        spare.remove(p);
    }
    let mut out = Vec::with_capacity(4 * m + 2);
    for i in 1..=m + 1 {
        let mut cand = spare.clone();
        for j in 0..4 {
            cand.intersect_with(&h.extensions(&e[3 * i - 3 + j..3 * i + j]));
        }
        let u = *cand.to_vec().choose(rng)?;
        spare.remove(u);
        out.push(u);
        out.extend_from_slice(&e[3 * i..(3 * i + 3).min(3 * m + 4)]);
    }
    Some(out)
}

/// A 3-edge walk `q₁q₂q₃q₄` on distinct vertices of `free` in `R_uw`.
fn robust_walk(
    family: &RobustFamily4<'_>,
    u: Vertex,
    w: Vertex,
    free: &VertexSet,
    rng: &mut ChaCha8Rng,
    budget: &mut Budget,
) -> Option<[Vertex; 4]> {
    let h = family.host();
    let robust = family.robust_set(u, w).intersection(free);
    let nbr = |p: Vertex| h.extensions(&[u, w, p]).intersection(&robust);
    let mut starts = robust.to_vec();
    starts.shuffle(rng);
    for q1 in starts {
        for q2 in nbr(q1).to_vec() {
            for q3 in nbr(q2).iter().filter(|&q3| q3 != q1) {
                if !budget.spend() {
                    return None;
                }
                let mut last = nbr(q3);
                last.remove(q1);
                last.remove(q2);
                if let Some(q4) = last.first() {
                    return Some([q1, q2, q3, q4]);
                }
            }
        }
    }
    None
}

/// The structured construction with `8m + 10` inner vertices.
#[allow(clippy::too_many_arguments)]
fn guided4(
    family: &RobustFamily4<'_>,
    idx: &ConnectivityIndex,
    abc: [Vertex; 3],
    xyz: [Vertex; 3],
    m: usize,
    free: &VertexSet,
    attempts: usize,
    rng: &mut ChaCha8Rng,
    budget: &mut Budget,
) -> Option<Vec<Vertex>> {
    let mut us = idx.witness(&abc).intersection(free).to_vec();
    let mut ws = idx.witness(&xyz).intersection(free).to_vec();
    us.shuffle(rng);
    ws.shuffle(rng);
    let [x, y, z] = xyz;
    for t in 0..attempts.min(us.len() * ws.len()) {
        let u = us[t % us.len()];
        let w = ws[(t / us.len() + t) % ws.len()];
        if u == w {
            continue;
        }
        let mut rest = free.clone();
        rest.remove(u);
        rest.remove(w);
        let q = robust_walk(family, u, w, &rest, rng, budget)?;
        for v in q {
            rest.remove(v);
        }
        let Some(left) = half4(
            family,
            u,
            abc,
            [q[0], q[1]],
            m,
            &rest,
            attempts,
            rng,
            budget,
        ) else {
            if budget.exhausted() {
                return None;
            }
            continue;
        };
        for &v in &left {
            rest.remove(v);
        }
        let Some(right) = half4(
            family,
            w,
            [z, y, x],
            [q[3], q[2]],
            m,
            &rest,
            attempts,
            rng,
            budget,
        ) else {
            if budget.exhausted() {
                return None;
            }
            continue;
        };
        let mut inner = left;
        inner.extend_from_slice(&[q[0], q[1], u, w, q[2], q[3]]);
        inner.extend(right.into_iter().rev());
        return Some(inner);
    }
    None
}

fn sample_connectable_triple(
    idx: &ConnectivityIndex,
    free: &VertexSet,
    rng: &mut ChaCha8Rng,
    tries: usize,
) -> Option<[Vertex; 3]> {
    let pool = free.to_vec();
    if pool.len() < 3 {
        return None;
    }
    for _ in 0..tries {
        let t = [0, 1, 2].map(|_| pool[rng.gen_range(0..pool.len())]);
        if idx.is_connectable(&t) {
            return Some(t);
        }
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn pieces4(
    family: &RobustFamily4<'_>,
    idx: &ConnectivityIndex,
    abc: [Vertex; 3],
    xyz: [Vertex; 3],
    plan: &[usize],
    free: &VertexSet,
    attempts: usize,
    rng: &mut ChaCha8Rng,
    budget: &mut Budget,
) -> Option<Vec<Vertex>> {
    let mut free = free.clone();
    let mut hubs = Vec::new();
    for _ in 1..plan.len() {
        let t = sample_connectable_triple(idx, &free, rng, 500)?;
        for v in t {
            free.remove(v);
        }
        hubs.push(t);
    }
    let mut out = Vec::new();
    let mut start = abc;
    for (i, &m) in plan.iter().enumerate() {
        let end = if i + 1 < plan.len() { hubs[i] } else { xyz };
        let part = guided4(family, idx, start, end, m, &free, attempts, rng, budget)?;
        for &v in &part {
            free.remove(v);
        }
        out.extend_from_slice(&part);
        if i + 1 < plan.len() {
            out.extend_from_slice(&hubs[i]);
            start = hubs[i];
        }
    }
    Some(out)
}

/// Connects two disjoint connectable triples by a tight path in the host
/// whose inner vertices all lie in `allowed`.
pub fn connect4(
    family: &RobustFamily4<'_>,
    idx: &ConnectivityIndex,
    abc: [Vertex; 3],
    xyz: [Vertex; 3],
    count: InnerCount,
    allowed: &VertexSet,
    opts: ConnectOptions,
) -> Result<Connection> {
    let h = family.host();
    if idx.arity() != 3 || idx.universe() != h.n() {
        return invalid("connect4 needs the triple index of this host");
    }
    let (inner, residue) = match count {
        InnerCount::Exact(c) => (c, None),
        InnerCount::Residue(r) => {
            if !(1..=4).contains(&r) {
                return invalid(format!("residue {r} outside 1..=4"));
            }
            (
                residue_lengths(4, family.params().ell)?.inner_for(r),
                Some(r),
            )
        }
    };
    let ends: Vec<Vertex> = abc.iter().chain(&xyz).copied().collect();
    if VertexSet::from_slice(h.n(), &ends).len() != 6 {
        return Err(Error::Precondition(format!(
            "end triples {abc:?} and {xyz:?} are not disjoint"
        )));
    }
    for t in [abc, xyz] {
        if !idx.is_connectable(&t) {
            return Err(Error::Precondition(format!(
                "triple {t:?} is not connectable"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut budget = Budget::new(opts.budget);
    let mut free = allowed.clone();
    for &v in &ends {
        free.remove(v);
    }
    let mut found = None;
    if opts.guided {
        if let Some(plan) = plan4(inner) {
            found = pieces4(
                family,
                idx,
                abc,
                xyz,
                &plan,
                &free,
                opts.guided_attempts,
                &mut rng,
                &mut budget,
            )
            .map(|p| (p, Strategy::ProofGuided));
        }
    }
    if found.is_none() && !budget.exhausted() {
        found = direct(h, &abc, &xyz, inner, &free, &mut rng, &mut budget)
            .map(|p| (p, Strategy::Direct));
    }
    let mut diagnostics = ConnectDiagnostics {
        strategy: None,
        expansions: budget.used(),
        inner_count: inner,
        residue,
        budget_exhausted: budget.exhausted(),
    };
    let path = match found {
        Some((mid, strategy)) => {
            let seq: Vec<Vertex> = abc.iter().chain(&mid).chain(&xyz).copied().collect();
            if mid.len() != inner || !mid.iter().all(|&v| free.contains(v)) {
                return Err(Error::Precondition(format!(
                    "internal search produced an invalid path {seq:?}"
                )));
            }
            diagnostics.strategy = Some(strategy);
            Some(TightPath::new(h, seq)?)
        }
        None => None,
    };
    Ok(Connection { path, diagnostics })
}

/// A random vertex set reserved for connections, with usage accounting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReservoirState {
    pub reservoir: VertexSet,
    pub used: VertexSet,
    pub budget: usize,
    pub theta_star: f64,
    pub theta_star_star: f64,
    pub ell: usize,
    pub seed: u64,
    pub resamples: usize,
}

/// `⌊θ⋆²θ⋆⋆/(400ℓ)·n⌋`.
pub fn reservoir_budget(theta_star: f64, theta_star_star: f64, ell: usize, n: usize) -> usize {
    (theta_star * theta_star * theta_star_star / (400.0 * ell as f64) * n as f64 + 1e-9).floor()
        as usize
}

impl ReservoirState {
    pub fn available(&self) -> VertexSet {
        self.reservoir.difference(&self.used)
    }

    /// Replaces the usage cap.
    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    /// Adds vertices to the pool without touching the usage count.
    pub fn extend_pool(&mut self, extra: &VertexSet) {
        self.reservoir.union_with(extra);
    }

    /// Marks `inner` as used, atomically.
    pub fn spend(&mut self, inner: &[Vertex]) -> Result<()> {
        if self.used.len() + inner.len() > self.budget {
            return Err(Error::BudgetExceeded {
                used: self.used.len(),
                requested: inner.len(),
                budget: self.budget,
            });
        }
        let avail = self.available();
        if let Some(&v) = inner.iter().find(|&&v| !avail.contains(v)) {
            return Err(Error::Precondition(format!(
                "vertex {v} is not an unused reservoir vertex"
            )));
        }
        for &v in inner {
            self.used.insert(v);
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidueRate {
    pub residue: usize,
    pub inner_count: usize,
    pub attempts: usize,
    pub successes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReservoirReport {
    pub size: usize,
    pub lower: f64,
    pub upper: f64,
    pub resamples: usize,
    pub validation: Vec<ResidueRate>,
}

/// Which connections to try inside a fresh reservoir.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationPlan {
    pub samples: usize,
    /// `(residue, inner count)` pairs.
    pub counts: Vec<(usize, usize)>,
    pub options: ConnectOptions,
}

pub fn sample_reservoir(
    family: &RobustFamily4<'_>,
    idx: &ConnectivityIndex,
    theta_star: f64,
    theta_star_star: f64,
    seed: u64,
    plan: &ValidationPlan,
) -> Result<(ReservoirState, ReservoirReport)> {
    if !(theta_star > 0.0 && theta_star < 1.0) || !(theta_star_star > 0.0 && theta_star_star < 1.0)
    {
        return invalid("reservoir fractions must lie in (0, 1)");
    }
    let n = family.n();
    let p = 0.75 * theta_star * theta_star;
    let lower = theta_star * theta_star * n as f64 / 2.0;
    let upper = theta_star * theta_star * n as f64;
    let ell = family.params().ell;
    for attempt in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
        let reservoir = VertexSet::from_iter_in(n, (0..n).filter(|_| rng.gen_bool(p)));
        let size = reservoir.len() as f64;
        if size < lower || size > upper {
            continue;
        }
        let state = ReservoirState {
            reservoir,
            used: VertexSet::new(n),
            budget: reservoir_budget(theta_star, theta_star_star, ell, n),
            theta_star,
            theta_star_star,
            ell,
            seed,
            resamples: attempt as usize,
        };
        let validation = validate_reservoir(family, idx, &state.reservoir, plan, &mut rng)?;
        let report = ReservoirReport {
            size: state.reservoir.len(),
            lower,
            upper,
            resamples: attempt as usize,
            validation,
        };
        return Ok((state, report));
    }
    Err(Error::Generation(format!(
        "reservoir size left [{lower:.1}, {upper:.1}] in 10 samples"
    )))
}

fn validate_reservoir(
    family: &RobustFamily4<'_>,
    idx: &ConnectivityIndex,
    reservoir: &VertexSet,
    plan: &ValidationPlan,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<ResidueRate>> {
    let outside = reservoir.complement();
    let mut rates = Vec::new();
    for &(residue, inner) in &plan.counts {
        let mut rate = ResidueRate {
            residue,
            inner_count: inner,
            attempts: 0,
            successes: 0,
        };
        for _ in 0..plan.samples {
            let Some(abc) = sample_connectable_triple(idx, &outside, rng, 500) else {
                break;
            };
            let mut rest = outside.clone();
            for v in abc {
                rest.remove(v);
            }
            let Some(xyz) = sample_connectable_triple(idx, &rest, rng, 500) else {
                break;
            };
            let opts = ConnectOptions {
                seed: rng.gen(),
                ..plan.options
            };
            rate.attempts += 1;
            if connect4(
                family,
                idx,
                abc,
                xyz,
                InnerCount::Exact(inner),
                reservoir,
                opts,
            )?
            .path
            .is_some()
            {
                rate.successes += 1;
            }
        }
        rates.push(rate);
    }
    Ok(rates)
}

/// A connection through unused reservoir vertices; on success those
/// vertices are marked used.
pub fn reserve_connect(
    state: &mut ReservoirState,
    family: &RobustFamily4<'_>,
    idx: &ConnectivityIndex,
    abc: [Vertex; 3],
    xyz: [Vertex; 3],
    count: InnerCount,
    opts: ConnectOptions,
) -> Result<Connection> {
    let inner = match count {
        InnerCount::Exact(c) => c,
        InnerCount::Residue(r) => residue_lengths(4, family.params().ell)?.inner_for(r),
    };
    if state.used.len() + inner > state.budget {
        return Err(Error::BudgetExceeded {
            used: state.used.len(),
            requested: inner,
            budget: state.budget,
        });
    }
    let conn = connect4(family, idx, abc, xyz, count, &state.available(), opts)?;
    if let Some(p) = &conn.path {
        state.spend(p.inner())?;
    }
    Ok(conn)
}
