//! Absorbers: 35-vertex gadgets that can swap four outside vertices into a
//! path without changing its end triples, and the absorbing path built from
//! them.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::connectivity::{is_bridge4, ConnectivityIndex, RobustFamily4};
use crate::connector::{connect4, ConnectOptions, InnerCount, ReservoirState};
use crate::error::{invalid, Error, Result};
use crate::hypercore::Hypergraph;
use crate::tightpaths::{find_path_with_ends, Budget, SearchOutcome, TightPath};
use crate::vertex_set::{Vertex, VertexSet};

/// Edges of the joint 3-uniform link of `anchors` that contain `p` and `q`.
fn joint(h: &Hypergraph, anchors: &[Vertex], p: Vertex, q: Vertex) -> VertexSet {
    let mut out = h.extensions(&[anchors[0], p, q]);
    for &a in &anchors[1..] {
        out.intersect_with(&h.extensions(&[a, p, q]));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    /// Complete multipartite copies in the auxiliary hypergraph of
    /// connectable triples or bridges.
    Multipartite,
    /// Only the windows and end triples that the output needs.
    Direct,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    pub seed: u64,
    pub budget: u64,
    pub limit: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            seed: 0,
            budget: 100_000,
            limit: 1,
        }
    }
}

/// Sextuples `b₁…b₆` that form a 3-uniform tight path in the joint link of
/// all `anchors`, with `(b₁,b₂,b₃)` and `(b₄,b₅,b₆)` connectable. Copies of
/// `K₂,₂,₂` among connectable joint-link triples are tried first, then a
/// direct search. Sextuples avoid `forbidden` and the anchors.
pub fn joint_link_paths(
    h: &Hypergraph,
    idx: &ConnectivityIndex,
    anchors: &[Vertex],
    forbidden: &VertexSet,
    opts: SearchOptions,
) -> Result<Vec<[Vertex; 6]>> {
    if h.k() != 4 || idx.arity() != 3 {
        return invalid("joint link paths need a 4-uniform host and a triple index");
    }
    if anchors.is_empty() || VertexSet::from_slice(h.n(), anchors).len() != anchors.len() {
        return invalid("anchors must be distinct and nonempty");
    }
    let mut free = forbidden.complement();
    for &a in anchors {
        free.remove(a);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut budget = Budget::new(opts.budget);
    let mut out = Vec::new();
    for mode in [SearchMode::Multipartite, SearchMode::Direct] {
        if out.len() >= opts.limit {
            break;
        }
        sextuples(
            h,
            idx,
            anchors,
            &free,
            mode,
            opts.limit,
            &mut rng,
            &mut budget,
            &mut out,
        );
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn sextuples(
    h: &Hypergraph,
    idx: &ConnectivityIndex,
    anchors: &[Vertex],
    free: &VertexSet,
    mode: SearchMode,
    limit: usize,
    rng: &mut ChaCha8Rng,
    budget: &mut Budget,
    out: &mut Vec<[Vertex; 6]>,
) {
    let conn = |t: [Vertex; 3]| idx.is_connectable(&t);
    let in_aux = |t: [Vertex; 3]| conn(t) && joint(h, anchors, t[0], t[1]).contains(t[2]);
    let mut firsts = free.to_vec();
    firsts.shuffle(rng);
    for &b1 in &firsts {
        let mut seconds = free.to_vec();
        seconds.shuffle(rng);
        for &b2 in &seconds {
            if b2 == b1 {
                continue;
            }
            let mut thirds = joint(h, anchors, b1, b2).intersection(free).to_vec();
            thirds.shuffle(rng);
            for &b3 in &thirds {
                if !budget.spend() {
                    return;
                }
                if !conn([b1, b2, b3]) {
                    continue;
                }
                let mut left = free.clone();
                for v in [b1, b2, b3] {
                    left.remove(v);
                }
                let mut b4s = joint(h, anchors, b2, b3).intersection(&left).to_vec();
                b4s.shuffle(rng);
                let found = b4s.into_iter().find_map(|b4| {
                    if mode == SearchMode::Multipartite && !conn([b4, b2, b3]) {
                        return None;
                    }
                    let mut b5s = joint(h, anchors, b3, b4).intersection(&left);
                    b5s.remove(b4);
                    if mode == SearchMode::Multipartite {
                        b5s.intersect_with(&joint(h, anchors, b1, b3));
                    }
                    b5s.iter().find_map(|b5| {
                        if !budget.spend() {
                            return None;
                        }
                        if mode == SearchMode::Multipartite
                            && !(conn([b1, b5, b3]) && conn([b4, b5, b3]))
                        {
                            return None;
                        }
                        let mut b6s = joint(h, anchors, b4, b5).intersection(&left);
                        b6s.remove(b4);
                        b6s.remove(b5);
                        b6s.iter()
                            .find(|&b6| {
                                conn([b4, b5, b6])
                                    && (mode == SearchMode::Direct
                                        || [[b1, b2, b6], [b1, b5, b6], [b4, b2, b6]]
                                            .into_iter()
                                            .all(in_aux))
                            })
                            .map(|b6| [b1, b2, b3, b4, b5, b6])
                    })
                });
                if let Some(s) = found {
                    if !out.contains(&s) {
                        out.push(s);
                        if out.len() >= limit {
                            return;
                        }
                    }
                }
                if budget.exhausted() {
                    return;
                }
            }
        }
    }
}

/// 11-tuples `u₁…u₄ x₁…x₄ w₁w₂w₃` such that both this sequence and
/// `u₁…u₄ w₁w₂w₃` are tight paths, with `(u₁,u₂,u₃)` and `(w₁,w₂,w₃)`
/// connectable. Copies of `K₃,₃,₃,₂` among bridges are tried first, then a
/// direct search.
pub fn find_elves(
    h: &Hypergraph,
    idx: &ConnectivityIndex,
    forbidden: &VertexSet,
    opts: SearchOptions,
) -> Result<Vec<[Vertex; 11]>> {
    if h.k() != 4 || idx.arity() != 3 {
        return invalid("elves need a 4-uniform host and a triple index");
    }
    let free = forbidden.complement();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut budget = Budget::new(opts.budget);
    let mut out: Vec<[Vertex; 11]> = Vec::new();
    for mode in [SearchMode::Multipartite, SearchMode::Direct] {
        let mut firsts = free.to_vec();
        firsts.shuffle(&mut rng);
        for v in firsts {
            if out.len() >= opts.limit || budget.exhausted() {
                break;
            }
            let mut seq = vec![v];
            let mut left = free.clone();
            left.remove(v);
            if elf_step(h, idx, mode, &mut left, &mut seq, &mut rng, &mut budget) {
                let t: [Vertex; 11] = seq.try_into().expect("eleven vertices");
                if !out.contains(&t) {
                    out.push(t);
                }
            }
        }
        if out.len() >= opts.limit {
            break;
        }
        budget = Budget::new(opts.budget);
    }
    Ok(out)
}

/// Whether `v` may follow `seq` in an elf.
fn elf_admits(
    h: &Hypergraph,
    idx: &ConnectivityIndex,
    mode: SearchMode,
    seq: &[Vertex],
    v: Vertex,
) -> bool {
    let p = seq.len();
    if p == 2 && !idx.is_connectable(&[seq[0], seq[1], v]) {
        return false;
    }
    if p == 10 && !idx.is_connectable(&[seq[8], seq[9], v]) {
        return false;
    }
    match mode {
        SearchMode::Direct => {
            if p >= 3 && !h.contains(&[seq[p - 3], seq[p - 2], seq[p - 1], v]) {
                return false;
            }
            // windows of the short path u₁…u₄w₁w₂w₃ that skip x₁…x₄
            match p {
                8 => h.contains(&[seq[1], seq[2], seq[3], v]),
                9 => h.contains(&[seq[2], seq[3], seq[8], v]),
                10 => h.contains(&[seq[3], seq[8], seq[9], v]),
                _ => true,
            }
        }
        SearchMode::Multipartite => {
            if p < 3 {
                return true;
            }
            let class = p % 4;
            let members = |c: usize| -> Vec<Vertex> { (c..p).step_by(4).map(|i| seq[i]).collect() };
            let others: Vec<Vec<Vertex>> = (0..4)
                .map(|c| if c == class { vec![v] } else { members(c) })
                .collect();
            for &a in &others[0] {
                for &b in &others[1] {
                    for &c in &others[2] {
                        for &d in &others[3] {
                            if !is_bridge4(h, idx, [a, b, c, d]) {
                                return false;
                            }
                        }
                    }
                }
            }
            true
        }
    }
}

fn elf_step(
    h: &Hypergraph,
    idx: &ConnectivityIndex,
    mode: SearchMode,
    left: &mut VertexSet,
    seq: &mut Vec<Vertex>,
    rng: &mut ChaCha8Rng,
    budget: &mut Budget,
) -> bool {
    if seq.len() == 11 {
        return true;
    }
    if !budget.spend() {
        return false;
    }
    let p = seq.len();
    let mut cand = if p >= 3 {
        h.extensions(&seq[p - 3..]).intersection(left)
    } else {
        left.clone()
    };
    cand.intersect_with(left);
    let mut order = cand.to_vec();
    order.shuffle(rng);
    for v in order {
        if !elf_admits(h, idx, mode, seq, v) {
            continue;
        }
        seq.push(v);
        left.remove(v);
        if elf_step(h, idx, mode, left, seq, rng, budget) {
            return true;
        }
        left.insert(v);
        seq.pop();
        if budget.exhausted() {
            return false;
        }
    }
    false
}

/// Four link-path sextuples plus an elf. When `target` is set the absorber
/// is specific to it; otherwise swap feasibility is decided when absorbing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Absorber {
    pub target: Option<[Vertex; 4]>,
    pub sextuples: [[Vertex; 6]; 4],
    pub u: [Vertex; 4],
    pub x: [Vertex; 4],
    pub w: [Vertex; 3],
}

fn b_path(b: &[Vertex; 6], middle: Vertex) -> Vec<Vertex> {
    vec![b[0], b[1], b[2], middle, b[3], b[4], b[5]]
}

/// Whether `b` is a 3-uniform tight path in the link of `a`.
fn in_link(h: &Hypergraph, a: Vertex, b: &[Vertex; 6]) -> bool {
    !b.contains(&a) && b.windows(3).all(|t| h.contains(&[a, t[0], t[1], t[2]]))
}

impl Absorber {
    pub fn from_parts(
        target: Option<[Vertex; 4]>,
        sextuples: [[Vertex; 6]; 4],
        elf: [Vertex; 11],
    ) -> Self {
        Absorber {
            target,
            sextuples,
            u: [elf[0], elf[1], elf[2], elf[3]],
            x: [elf[4], elf[5], elf[6], elf[7]],
            w: [elf[8], elf[9], elf[10]],
        }
    }

    /// All 35 vertices: the sextuples, then `u`, `x`, `w`.
    pub fn vertices(&self) -> Vec<Vertex> {
        let mut out: Vec<Vertex> = self.sextuples.iter().flatten().copied().collect();
        out.extend_from_slice(&self.u);
        out.extend_from_slice(&self.x);
        out.extend_from_slice(&self.w);
        out
    }

    /// The five 7-vertex paths as they sit in an absorbing path.
    pub fn paths(&self) -> [Vec<Vertex>; 5] {
        let mut fifth = self.u.to_vec();
        fifth.extend_from_slice(&self.w);
        [
            b_path(&self.sextuples[0], self.x[0]),
            b_path(&self.sextuples[1], self.x[1]),
            b_path(&self.sextuples[2], self.x[2]),
            b_path(&self.sextuples[3], self.x[3]),
            fifth,
        ]
    }

    /// The five sequences after absorbing `z`: `zᵢ` replaces `xᵢ` and the
    /// `x`'s move into the middle of the fifth path.
    pub fn swapped_paths(&self, z: [Vertex; 4]) -> [Vec<Vertex>; 5] {
        let mut fifth = self.u.to_vec();
        fifth.extend_from_slice(&self.x);
        fifth.extend_from_slice(&self.w);
        [
            b_path(&self.sextuples[0], z[0]),
            b_path(&self.sextuples[1], z[1]),
            b_path(&self.sextuples[2], z[2]),
            b_path(&self.sextuples[3], z[3]),
            fifth,
        ]
    }

    /// Whether `z` can be swapped in slot by slot.
    pub fn accepts(&self, h: &Hypergraph, z: [Vertex; 4]) -> bool {
        (0..4).all(|i| in_link(h, z[i], &self.sextuples[i]))
    }

    /// Some ordering of four vertices of `pool` that this absorber accepts,
    /// smallest vertices first.
    pub fn assignment(&self, h: &Hypergraph, pool: &[Vertex]) -> Option<[Vertex; 4]> {
        fn fill(
            a: &Absorber,
            h: &Hypergraph,
            pool: &[Vertex],
            slot: usize,
            taken: &mut Vec<Vertex>,
        ) -> bool {
            if slot == 4 {
                return true;
            }
            for &z in pool {
                if !taken.contains(&z) && in_link(h, z, &a.sextuples[slot]) {
                    taken.push(z);
                    if fill(a, h, pool, slot + 1, taken) {
                        return true;
                    }
                    taken.pop();
                }
            }
            false
        }
        let mut taken = Vec::with_capacity(4);
        fill(self, h, pool, 0, &mut taken).then(|| [taken[0], taken[1], taken[2], taken[3]])
    }

    /// Re-checks every defining property, returning the first that fails.
    pub fn verify(
        &self,
        h: &Hypergraph,
        idx: &ConnectivityIndex,
    ) -> std::result::Result<(), String> {
        let all = self.vertices();
        if VertexSet::from_slice(h.n(), &all).len() != 35 || all.iter().any(|&v| v >= h.n()) {
            return Err("vertices are not 35 distinct vertices of the host".into());
        }
        if let Some(t) = self.target {
            if t.iter().any(|a| all.contains(a)) {
                return Err("absorber meets its target".into());
            }
        }
        for i in 0..4 {
            let b = &self.sextuples[i];
            if !in_link(h, self.x[i], b) {
                return Err(format!("sextuple {i} is not a path in the link of x{i}"));
            }
            if let Some(t) = self.target {
                if !in_link(h, t[i], b) {
                    return Err(format!(
                        "sextuple {i} is not a path in the link of its target"
                    ));
                }
            }
            if !idx.is_connectable(&b[..3]) || !idx.is_connectable(&b[3..]) {
                return Err(format!("sextuple {i} has a non-connectable end triple"));
            }
        }
        let long: Vec<Vertex> = self
            .u
            .iter()
            .chain(&self.x)
            .chain(&self.w)
            .copied()
            .collect();
        if TightPath::new(h, long).is_err() {
            return Err("the 11-vertex sequence is not a tight path".into());
        }
        if !idx.is_connectable(&self.u[..3]) || !idx.is_connectable(&self.w) {
            return Err("elf end triples are not connectable".into());
        }
        for (i, p) in self.paths().into_iter().enumerate() {
            if TightPath::new(h, p).is_err() {
                return Err(format!("path {i} is not a tight path"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbsorberSearch {
    pub absorber: Option<Absorber>,
    /// `elf` or `sextuple i` when the search stopped early.
    pub failed_stage: Option<String>,
}

/// One elf, then four sextuples, all pairwise disjoint and avoiding
/// `forbidden` and the target.
pub fn find_absorber(
    h: &Hypergraph,
    idx: &ConnectivityIndex,
    target: Option<[Vertex; 4]>,
    forbidden: &VertexSet,
    opts: SearchOptions,
) -> Result<AbsorberSearch> {
    let mut blocked = forbidden.clone();
    if let Some(t) = target {
        for a in t {
            blocked.insert(a);
        }
    }
    let fail = |stage: String| AbsorberSearch {
        absorber: None,
        failed_stage: Some(stage),
    };
    let one = SearchOptions { limit: 1, ..opts };
    let Some(elf) = find_elves(h, idx, &blocked, one)?.pop() else {
        return Ok(fail("elf".into()));
    };
    for &v in &elf {
        blocked.insert(v);
    }
    let mut sextuples = [[0; 6]; 4];
    for i in 0..4 {
        let x = elf[4 + i];
        let anchors: Vec<Vertex> = match target {
            Some(t) if t[i] != x => vec![t[i], x],
            _ => vec![x],
        };
        let s = SearchOptions {
            seed: opts.seed.wrapping_add(i as u64 + 1),
            ..one
        };
        let Some(b) = joint_link_paths(h, idx, &anchors, &blocked, s)?.pop() else {
            return Ok(fail(format!("sextuple {i}")));
        };
        for v in b {
            blocked.insert(v);
        }
        sextuples[i] = b;
    }
    Ok(AbsorberSearch {
        absorber: Some(Absorber::from_parts(target, sextuples, elf)),
        failed_stage: None,
    })
}

/// Where an absorber path sits inside the absorbing path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub absorber: usize,
    /// 0..4 for the sextuple paths, 4 for the elf path.
    pub part: usize,
    pub offset: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbsorbingPath {
    pub vertices: Vec<Vertex>,
    pub absorbers: Vec<Absorber>,
    pub segments: Vec<Segment>,
    /// Inner vertex counts of the joining connections, in order.
    pub connections: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbsorbingConfig {
    pub absorbers: usize,
    /// Connection inner counts, tried in order for each join.
    pub inner_counts: Vec<usize>,
    /// Upper bound on the number of vertices of the path, if any.
    pub cap: Option<usize>,
    pub seed: u64,
    pub search_budget: u64,
    pub connect: ConnectOptions,
}

impl AbsorbingPath {
    pub fn path(&self, h: &Hypergraph) -> Result<TightPath> {
        TightPath::new(h, self.vertices.clone())
    }

    pub fn vertex_set(&self, universe: usize) -> VertexSet {
        VertexSet::from_slice(universe, &self.vertices)
    }
}

/// Collects disjoint generic absorbers outside the reservoir and joins their
/// paths into one tight path. Errors name the stage that failed.
pub fn build_absorbing_path(
    family: &RobustFamily4<'_>,
    idx: &ConnectivityIndex,
    reservoir: &ReservoirState,
    cfg: &AbsorbingConfig,
) -> Result<AbsorbingPath> {
    let h = family.host();
    let n = h.n();
    let mut blocked = reservoir.reservoir.clone();
    if cfg.absorbers == 0 {
        let allowed = blocked.complement();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut budget = Budget::new(cfg.search_budget);
        let ok = |t: &[Vertex]| idx.is_connectable(t);
        return match find_path_with_ends(h, &allowed, 7, &ok, &mut rng, &mut budget) {
            SearchOutcome::Found(vertices) => Ok(AbsorbingPath {
                vertices,
                absorbers: Vec::new(),
                segments: Vec::new(),
                connections: Vec::new(),
            }),
            _ => Err(Error::Absorption(
                "absorber collection: no short path with connectable ends".into(),
            )),
        };
    }
    let mut absorbers = Vec::with_capacity(cfg.absorbers);
    for i in 0..cfg.absorbers {
        let opts = SearchOptions {
            seed: cfg.seed.wrapping_add(1000 * i as u64),
            budget: cfg.search_budget,
            limit: 1,
        };
        let found = find_absorber(h, idx, None, &blocked, opts)?;
        let Some(a) = found.absorber else {
            return Err(Error::Absorption(format!(
                "absorber collection: absorber {i} failed at {}",
                found.failed_stage.unwrap_or_default()
            )));
        };
        for v in a.vertices() {
            blocked.insert(v);
        }
        absorbers.push(a);
    }

    let pieces: Vec<(usize, usize, Vec<Vertex>)> = absorbers
        .iter()
        .enumerate()
        .flat_map(|(i, a)| {
            a.paths()
                .into_iter()
                .enumerate()
                .map(move |(part, p)| (i, part, p))
        })
        .collect();
    let mut vertices = pieces[0].2.clone();
    let mut segments = vec![Segment {
        absorber: pieces[0].0,
        part: pieces[0].1,
        offset: 0,
    }];
    let mut connections = Vec::new();
    for (j, (ai, part, p)) in pieces.iter().enumerate().skip(1) {
        let allowed = blocked.complement();
        let from = [
            vertices[vertices.len() - 3],
            vertices[vertices.len() - 2],
            vertices[vertices.len() - 1],
        ];
        let to = [p[0], p[1], p[2]];
        let mut joined = None;
        for (t, &c) in cfg.inner_counts.iter().enumerate() {
            let opts = ConnectOptions {
                seed: cfg.connect.seed.wrapping_add((j * 31 + t) as u64),
                ..cfg.connect
            };
            if let Some(path) =
                connect4(family, idx, from, to, InnerCount::Exact(c), &allowed, opts)?.path
            {
                joined = Some(path);
                break;
            }
        }
        let Some(link) = joined else {
            return Err(Error::Absorption(format!(
                "connection: could not join segment {j}"
            )));
        };
        for &v in link.inner() {
            blocked.insert(v);
            vertices.push(v);
        }
        connections.push(link.inner().len());
        segments.push(Segment {
            absorber: *ai,
            part: *part,
            offset: vertices.len(),
        });
        vertices.extend_from_slice(p);
    }
    if let Some(cap) = cfg.cap {
        if vertices.len() > cap {
            return Err(Error::Absorption(format!(
                "connection: absorbing path has {} vertices, cap is {cap}",
                vertices.len()
            )));
        }
    }
    TightPath::new(h, vertices.clone())?;
    debug_assert!(VertexSet::from_slice(n, &vertices).is_disjoint(&reservoir.reservoir));
    Ok(AbsorbingPath {
        vertices,
        absorbers,
        segments,
        connections,
    })
}

/// Swaps every vertex of `z` into the absorbing path, four at a time, using
/// unused absorbers first-fit. The result has the same end triples and the
/// vertex set `V(P_A) ∪ Z`.
pub fn absorb(h: &Hypergraph, ap: &AbsorbingPath, z: &VertexSet) -> Result<TightPath> {
    if !z.len().is_multiple_of(4) {
        return Err(Error::Absorption(format!(
            "|Z| = {} is not divisible by 4",
            z.len()
        )));
    }
    if let Some(&v) = ap.vertices.iter().find(|&&v| z.contains(v)) {
        return Err(Error::Absorption(format!(
            "vertex {v} of Z lies on the absorbing path"
        )));
    }
    let mut pool = z.to_vec();
    let mut swaps: Vec<Option<[Vertex; 4]>> = vec![None; ap.absorbers.len()];
    while !pool.is_empty() {
        let hit = ap
            .absorbers
            .iter()
            .enumerate()
            .filter(|(i, _)| swaps[*i].is_none())
            .find_map(|(i, a)| a.assignment(h, &pool).map(|q| (i, q)));
        let Some((i, q)) = hit else {
            return Err(Error::Absorption(format!(
                "no feasible absorber for the quadruple among {pool:?}"
            )));
        };
        pool.retain(|v| !q.contains(v));
        swaps[i] = Some(q);
    }
    let mut out = ap.vertices.clone();
    let mut insertions: Vec<(usize, [Vertex; 4])> = Vec::new();
    for s in &ap.segments {
        let Some(q) = swaps[s.absorber] else { continue };
        let a = &ap.absorbers[s.absorber];
        if s.part < 4 {
            out[s.offset + 3] = q[s.part];
        } else {
            insertions.push((s.offset + 4, a.x));
        }
    }
    insertions.sort_by_key(|&(at, _)| std::cmp::Reverse(at));
    for (at, xs) in insertions {
        out.splice(at..at, xs);
    }
    TightPath::new(h, out)
}
