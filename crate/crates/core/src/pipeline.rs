//! End-to-end search for a tight Hamiltonian cycle in a dense 4-uniform
//! hypergraph by the absorption method, plus the path cover it relies on and
//! a sampler for the usefulness of societies of cover blocks.

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::absorption::{absorb, build_absorbing_path, AbsorbingConfig, AbsorbingPath};
use crate::connectivity::{
    build_family4, check_setup3, connectable_pairs, connectable_triples_multi, is_bridge3,
    restrict, ConnectivityIndex, LinkSystem, LinkView, RobustFamily4,
};
use crate::connector::{
    connect4, reservoir_budget, residue_lengths, sample_reservoir, ConnectOptions, InnerCount,
    ValidationPlan,
};
use crate::error::{invalid, Error, Result};
use crate::hypercore::Hypergraph;
use crate::robust::{ExtractMode, ExtractParams};
use crate::tightpaths::{
    greedy_path_cover, validate, Budget, CoverOptions, SequenceKind, TightCycle, TightPath,
};
use crate::vertex_set::{Vertex, VertexSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Budgets, caps and connection lengths from the closed-form constants.
    Asymptotic,
    /// Explicit small-scale overrides.
    Desk,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub mode: Mode,
    pub alpha: f64,
    pub mu: f64,
    pub beta: f64,
    pub ell: usize,
    pub zeta_star: f64,
    pub zeta_star_star: f64,
    pub theta_star: f64,
    pub theta_star_star: f64,
    /// Vertices per cover path.
    pub cover_path_len: usize,
    pub absorbers: usize,
    pub search_budget: u64,
    pub connect_budget: u64,
    pub seed: u64,
    pub min_n: usize,
    /// Residue class of the connections between consecutive paths.
    pub intermediate_residue: usize,
    /// Desk: cap on vertices taken from the reservoir; `None` allows the whole pool.
    pub reservoir_budget: Option<usize>,
    /// Desk: cap on the absorbing path; `None` means no cap.
    pub absorbing_cap: Option<usize>,
    /// Desk: inner counts tried when joining absorber paths.
    pub absorber_inner: Vec<usize>,
    /// Desk: how many extra multiples of 4 beyond the smallest residue-correct
    /// count a connection may use.
    pub connection_slack: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig::desk()
    }
}

impl PipelineConfig {
    pub fn desk() -> Self {
        PipelineConfig {
            mode: Mode::Desk,
            alpha: 0.1,
            mu: 1.0,
            beta: 0.01,
            ell: 3,
            zeta_star: 0.2,
            zeta_star_star: 0.1,
            theta_star: 0.365,
            theta_star_star: 0.5,
            cover_path_len: 7,
            absorbers: 1,
            search_budget: 100_000,
            connect_budget: 50_000,
            seed: 0,
            min_n: 24,
            intermediate_residue: 1,
            reservoir_budget: None,
            absorbing_cap: None,
            absorber_inner: vec![0, 1, 2, 3],
            connection_slack: 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let frac = |x: f64| x > 0.0 && x < 1.0;
        if self.cover_path_len < 7 || self.cover_path_len % 4 != 3 {
            return invalid(format!(
                "cover path length {} must be >= 7 and 3 mod 4",
                self.cover_path_len
            ));
        }
        if self.ell < 3 || self.ell.is_multiple_of(2) {
            return invalid(format!("path length {} must be odd and >= 3", self.ell));
        }
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("zeta_star", self.zeta_star),
            ("zeta_star_star", self.zeta_star_star),
            ("theta_star", self.theta_star),
            ("theta_star_star", self.theta_star_star),
        ] {
            if !frac(v) {
                return invalid(format!("{name} = {v} outside (0, 1)"));
            }
        }
        if !(self.mu > 0.0) {
            return invalid("mu must be positive");
        }
        if !(1..=4).contains(&self.intermediate_residue) {
            return invalid("intermediate residue outside 1..=4");
        }
        Ok(())
    }

    fn extract_params(&self) -> ExtractParams {
        let mut p = ExtractParams::desk(self.alpha, self.mu, self.beta, self.ell);
        if self.mode == Mode::Asymptotic {
            p.mode = ExtractMode::Asymptotic;
        }
        p
    }

    /// Inner counts for a connection in residue class `r`, in the order tried.
    fn inner_counts(&self, r: usize) -> Result<Vec<usize>> {
        Ok(match self.mode {
            Mode::Asymptotic => vec![residue_lengths(4, self.ell)?.inner_for(r)],
            Mode::Desk => {
                let base = if r.is_multiple_of(4) { 4 } else { r % 4 };
                (0..=self.connection_slack).map(|j| base + 4 * j).collect()
            }
        })
    }
}

/// Disjoint tight paths of the cover length and the vertices they miss.
#[derive(Clone, Debug, PartialEq)]
pub struct Cover {
    pub paths: Vec<TightPath>,
    pub uncovered: VertexSet,
    pub maximal_certified: bool,
    /// Paths that came from link skeletons rather than the greedy search.
    pub augmented: usize,
}

impl Cover {
    pub fn uncovered_fraction(&self) -> f64 {
        self.uncovered.len() as f64 / self.uncovered.universe().max(1) as f64
    }
}

/// Greedy cover of `V ∖ excluded` by `M`-vertex tight paths whose end
/// triples are connectable in `idx`, followed by [`augment_cover`] passes.
pub fn path_cover(
    h: &Hypergraph,
    idx: &ConnectivityIndex,
    excluded: &VertexSet,
    cover_path_len: usize,
    seed: u64,
    budget: u64,
) -> Result<Cover> {
    if cover_path_len < 7 {
        return invalid("cover paths need at least 7 vertices");
    }
    let end_ok = |t: &[Vertex]| idx.is_connectable(t);
    let opts = CoverOptions {
        seed,
        search_budget: budget,
        restarts: 2,
    };
    let greedy = greedy_path_cover(h, excluded, cover_path_len, &end_ok, opts)?;
    let mut cover = Cover {
        paths: greedy.paths,
        uncovered: greedy.uncovered,
        maximal_certified: greedy.maximal_certified,
        augmented: 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    while cover.uncovered.len() >= cover_path_len {
        let Some(p) = augment_cover(h, idx, &cover.uncovered, cover_path_len, &mut rng, budget)
        else {
            break;
        };
        for &v in p.vertices() {
            cover.uncovered.remove(v);
        }
        cover.paths.push(p);
        cover.augmented += 1;
    }
    Ok(cover)
}

/// One cover path built from a 3-uniform path on `¾(M+1)` vertices in the
/// link of some `u ∈ free`: `u` goes after the first three skeleton vertices
/// and further link vertices after every following three.
pub fn augment_cover(
    h: &Hypergraph,
    idx: &ConnectivityIndex,
    free: &VertexSet,
    cover_path_len: usize,
    rng: &mut ChaCha8Rng,
    budget: u64,
) -> Option<TightPath> {
    let skeleton_len = 3 * (cover_path_len + 1) / 4;
    let inserts = cover_path_len - skeleton_len;
    let mut hubs = free.to_vec();
    hubs.shuffle(rng);
    let mut spent = Budget::new(budget);
    for u in hubs.into_iter().take(8) {
        let mut rest = free.clone();
        rest.remove(u);
        let link = Link { host: h, anchor: u };
        let Some(s) = link.skeleton(&rest, skeleton_len, idx, rng, &mut spent) else {
            continue;
        };
        let mut spare = rest.clone();
        for &v in &s {
            spare.remove(v);
        }
        let mut seq = s[..3].to_vec();
        let mut ok = true;
        for j in 0..inserts {
            let hub = if j == 0 {
                Some(u)
            } else {
                let mut cand = spare.clone();
                for t in 0..4 {
                    cand.intersect_with(&h.extensions(&s[3 * j + t..3 * j + t + 3]));
                }
                cand.to_vec().choose(rng).copied()
            };
            let Some(hub) = hub else {
                ok = false;
                break;
            };
            spare.remove(hub);
            seq.push(hub);
            seq.extend_from_slice(&s[3 * j + 3..3 * j + 6]);
        }
        if ok {
            if let Ok(p) = TightPath::new(h, seq) {
                return Some(p);
            }
        }
    }
    None
}

struct Link<'a> {
    host: &'a Hypergraph,
    anchor: Vertex,
}

impl Link<'_> {
    /// A tight path of `len` vertices of `allowed` in the link, with both end
    /// triples connectable in the host.
    fn skeleton(
        &self,
        allowed: &VertexSet,
        len: usize,
        idx: &ConnectivityIndex,
        rng: &mut ChaCha8Rng,
        budget: &mut Budget,
    ) -> Option<Vec<Vertex>> {
        fn grow(
            link: &Link<'_>,
            left: &mut VertexSet,
            len: usize,
            idx: &ConnectivityIndex,
            rng: &mut ChaCha8Rng,
            budget: &mut Budget,
            seq: &mut Vec<Vertex>,
        ) -> bool {
            if seq.len() == 3 && !idx.is_connectable(seq) {
                return false;
            }
            if seq.len() == len {
                return idx.is_connectable(&seq[len - 3..]);
            }
            if !budget.spend() {
                return false;
            }
            let mut cand = if seq.len() >= 2 {
                let p = seq.len();
                link.host
                    .extensions(&[link.anchor, seq[p - 2], seq[p - 1]])
                    .intersection(left)
            } else {
                left.clone()
            };
            cand.remove(link.anchor);
            let mut order = cand.to_vec();
            order.shuffle(rng);
            for v in order {
                seq.push(v);
                left.remove(v);
                if grow(link, left, len, idx, rng, budget, seq) {
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
        let mut left = allowed.clone();
        let mut seq = Vec::with_capacity(len);
        grow(self, &mut left, len, idx, rng, budget, &mut seq).then_some(seq)
    }
}

/// Equal-size blocks (usually cover paths), the leftover and the
/// exceptional vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockPartition {
    pub blocks: Vec<VertexSet>,
    pub leftover: VertexSet,
    pub exceptional: VertexSet,
}

impl BlockPartition {
    pub fn new(
        blocks: Vec<VertexSet>,
        leftover: VertexSet,
        exceptional: VertexSet,
    ) -> Result<Self> {
        let size = blocks.first().map_or(0, VertexSet::len);
        let mut seen = exceptional.clone();
        for b in &blocks {
            if b.len() != size || !b.is_disjoint(&seen) {
                return invalid("blocks must be pairwise disjoint and of equal size");
            }
            seen.union_with(b);
        }
        if size > 0 && leftover.len() >= size {
            return invalid("leftover must be smaller than a block");
        }
        Ok(BlockPartition {
            blocks,
            leftover,
            exceptional,
        })
    }

    pub fn from_cover(cover: &Cover, exceptional: VertexSet) -> Result<Self> {
        let n = cover.uncovered.universe();
        let blocks = cover.paths.iter().map(|p| p.vertex_set(n)).collect();
        let m = cover.paths.first().map_or(usize::MAX, TightPath::len);
        let mut leftover = cover.uncovered.difference(&exceptional);
        if leftover.len() >= m {
            let spill: Vec<Vertex> = leftover.iter().skip(m - 1).collect();
            for v in spill {
                leftover.remove(v);
            }
        }
        Self::new(blocks, leftover, exceptional)
    }

    pub fn block_size(&self) -> usize {
        self.blocks.first().map_or(0, VertexSet::len)
    }
}

/// Which clause of usefulness failed first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SocietyClause {
    Degree,
    Setup,
    Bridges,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SocietyReport {
    pub samples: usize,
    pub useful: usize,
    /// Failures by first failing clause: degree, setup, bridges.
    pub histogram: [usize; 3],
}

impl SocietyReport {
    pub fn useful_fraction(&self) -> Option<f64> {
        (self.samples > 0).then(|| self.useful as f64 / self.samples as f64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SocietyParams {
    pub alpha: f64,
    pub beta: f64,
    pub zeta_star_star: f64,
}

/// Samples `samples` societies of `m` blocks not containing `u` and checks
/// the three usefulness clauses exactly for each.
#[allow(clippy::too_many_arguments)]
pub fn society_stats(
    family: &RobustFamily4<'_>,
    idx: &ConnectivityIndex,
    u: Vertex,
    partition: &BlockPartition,
    m: usize,
    samples: usize,
    seed: u64,
    params: SocietyParams,
) -> Result<SocietyReport> {
    let h = family.host();
    let eligible: Vec<&VertexSet> = partition.blocks.iter().filter(|b| !b.contains(u)).collect();
    if m == 0 || m > eligible.len() {
        return invalid(format!(
            "society size {m} exceeds the {} eligible blocks",
            eligible.len()
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SocietyReport::default();
    let total = (m * partition.block_size()) as f64;
    let view = family.link_view(u);
    for _ in 0..samples {
        let mut s = VertexSet::new(h.n());
        for i in index::sample(&mut rng, eligible.len(), m) {
            s.union_with(eligible[i]);
        }
        report.samples += 1;
        let clause = first_failing_clause(h, idx, &view, u, &s, total, params)?;
        match clause {
            None => report.useful += 1,
            Some(SocietyClause::Degree) => report.histogram[0] += 1,
            Some(SocietyClause::Setup) => report.histogram[1] += 1,
            Some(SocietyClause::Bridges) => report.histogram[2] += 1,
        }
    }
    Ok(report)
}

fn first_failing_clause(
    h: &Hypergraph,
    idx: &ConnectivityIndex,
    view: &LinkView<'_>,
    u: Vertex,
    s: &VertexSet,
    total: f64,
    params: SocietyParams,
) -> Result<Option<SocietyClause>> {
    let floor = (5.0 / 9.0 + params.alpha / 4.0) * total * total / 2.0;
    let min_degree = s
        .iter()
        .map(|v| {
            let twice: usize = s
                .iter()
                .filter(|&x| x != v)
                .map(|x| h.extensions(&[u, v, x]).intersection_len(s))
                .sum();
            twice / 2
        })
        .min()
        .unwrap_or(0);
    if (min_degree as f64) < floor {
        return Ok(Some(SocietyClause::Degree));
    }
    let restricted = restrict(view, s, params.beta / 2.0);
    if !check_setup3(&restricted, params.alpha / 4.0, params.alpha / 16.0)?.holds() {
        return Ok(Some(SocietyClause::Setup));
    }
    let pairs = connectable_pairs(&restricted, params.zeta_star_star)?;
    let mut count = 0usize;
    let verts = s.to_vec();
    for &x in &verts {
        for &y in &verts {
            if x == y {
                continue;
            }
            for z in view.common_link(x, y).intersection(s).iter() {
                if idx.is_connectable(&[x, y, z]) && is_bridge3(&restricted, &pairs, x, y, z) {
                    count += 1;
                }
            }
        }
    }
    let need = params.zeta_star_star * total.powi(3);
    if (count as f64) < need {
        return Ok(Some(SocietyClause::Bridges));
    }
    Ok(None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Family,
    Index,
    Reservoir,
    AbsorbingPath,
    Cover,
    Connection,
    Closing,
    Absorb,
    Validation,
}

/// Vertices a stage consumed and how many it could have used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub consumed: usize,
    pub available: usize,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub stage: Stage,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineRun {
    pub n: usize,
    pub stages: Vec<StageRecord>,
    pub cycle: Option<Vec<Vertex>>,
    pub failure: Option<Failure>,
    /// `|Z|` at the absorb stage, when reached.
    pub absorbed: Option<usize>,
}

impl PipelineRun {
    pub fn succeeded(&self) -> bool {
        self.cycle.is_some()
    }
}

/// Every cyclic window is an edge and the cycle visits each vertex once.
pub fn validate_result(h: &Hypergraph, cycle: &[Vertex]) -> bool {
    cycle.len() == h.n()
        && cycle.len() >= h.k()
        && VertexSet::from_slice(h.n(), cycle).len() == h.n()
        && matches!(validate(cycle, h, SequenceKind::Cycle), Ok(Ok(_)))
}

struct Run {
    record: PipelineRun,
}

impl Run {
    fn note(&mut self, stage: Stage, consumed: usize, available: usize, note: impl Into<String>) {
        self.record.stages.push(StageRecord {
            stage,
            consumed,
            available,
            note: note.into(),
        });
    }

    fn fail(mut self, stage: Stage, detail: impl Into<String>) -> PipelineRun {
        self.record.failure = Some(Failure {
            stage,
            detail: detail.into(),
        });
        self.record
    }
}

/// Runs the whole construction: robust family, connectivity indices,
/// reservoir, absorbing path, cover, connections through the reservoir,
/// closing connection and absorption of what is left. A returned cycle has
/// always passed [`validate_result`].
pub fn find_hamiltonian_absorption(h: &Hypergraph, cfg: &PipelineConfig) -> Result<PipelineRun> {
    cfg.validate()?;
    if h.k() != 4 {
        return invalid("the absorption pipeline needs a 4-uniform host");
    }
    let n = h.n();
    if n < cfg.min_n {
        return invalid(format!(
            "n = {n} is below the configured minimum {}",
            cfg.min_n
        ));
    }
    let mut run = Run {
        record: PipelineRun {
            n,
            stages: Vec::new(),
            cycle: None,
            failure: None,
            absorbed: None,
        },
    };

    let family = match build_family4(h, cfg.extract_params()) {
        Ok(f) => f,
        Err(e) => return Ok(run.fail(Stage::Family, e.to_string())),
    };
    run.note(
        Stage::Family,
        0,
        n,
        format!("min pair degree {}", family.min_pair_degree()),
    );
    let [strong, weak]: [ConnectivityIndex; 2] =
        connectable_triples_multi(&family, &[cfg.zeta_star, cfg.zeta_star_star])?
            .try_into()
            .expect("two indices");
    run.note(
        Stage::Index,
        0,
        n,
        format!(
            "{} / {} connectable triples",
            strong.connectable_count(),
            weak.connectable_count()
        ),
    );

    let plan = ValidationPlan {
        samples: 0,
        counts: Vec::new(),
        options: ConnectOptions::default(),
    };
    let mut reservoir = match sample_reservoir(
        &family,
        &weak,
        cfg.theta_star,
        cfg.theta_star_star,
        cfg.seed,
        &plan,
    ) {
        Ok((state, _)) => state,
        Err(e) => return Ok(run.fail(Stage::Reservoir, e.to_string())),
    };
    run.note(
        Stage::Reservoir,
        reservoir.reservoir.len(),
        n,
        format!("{} resamples", reservoir.resamples),
    );

    let absorbing_cfg = AbsorbingConfig {
        absorbers: cfg.absorbers,
        inner_counts: match cfg.mode {
            Mode::Asymptotic => vec![residue_lengths(4, cfg.ell)?.inner_for(2)],
            Mode::Desk => cfg.absorber_inner.clone(),
        },
        cap: match cfg.mode {
            Mode::Asymptotic => Some((cfg.theta_star * n as f64).floor() as usize),
            Mode::Desk => cfg.absorbing_cap,
        },
        seed: cfg.seed,
        search_budget: cfg.search_budget,
        connect: ConnectOptions {
            seed: cfg.seed,
            budget: cfg.connect_budget,
            ..ConnectOptions::default()
        },
    };
    let ap = match build_absorbing_path(&family, &strong, &reservoir, &absorbing_cfg) {
        Ok(ap) => ap,
        Err(e) => return Ok(run.fail(Stage::AbsorbingPath, e.to_string())),
    };
    let ap_set = ap.vertex_set(n);
    run.note(
        Stage::AbsorbingPath,
        ap.vertices.len(),
        n - reservoir.reservoir.len(),
        "",
    );

    let excluded = reservoir.reservoir.union(&ap_set);
    let cover = path_cover(
        h,
        &weak,
        &excluded,
        cfg.cover_path_len,
        cfg.seed,
        cfg.search_budget,
    )?;
    run.note(
        Stage::Cover,
        cover.paths.len() * cfg.cover_path_len,
        n - excluded.len(),
        format!(
            "{} paths, {} augmented, {} uncovered",
            cover.paths.len(),
            cover.augmented,
            cover.uncovered.len()
        ),
    );

    // Uncovered vertices join the reservoir pool so the closing connection
    // can pick them up.
    reservoir.extend_pool(&cover.uncovered);
    reservoir.budget = match (cfg.mode, cfg.reservoir_budget) {
        (Mode::Asymptotic, _) => reservoir_budget(cfg.theta_star, cfg.theta_star_star, cfg.ell, n),
        (Mode::Desk, Some(b)) => b,
        (Mode::Desk, None) => reservoir.reservoir.len(),
    };
    let pool_size = reservoir.available().len();

    let mut t = ap.vertices.clone();
    // Every stage claims fresh vertices; an overlap means broken bookkeeping.
    let mut claimed = ap_set.clone();
    let mut dissolved = 0;
    let intermediate = cfg.inner_counts(cfg.intermediate_residue)?;
    let mut attempt = 0u64;
    for path in &cover.paths {
        let from = last3(&t);
        let to = [path.vertices()[0], path.vertices()[1], path.vertices()[2]];
        let mut joined = None;
        for &c in &intermediate {
            if reservoir.used.len() + c > reservoir.budget {
                break;
            }
            attempt += 1;
            let opts = connect_options(cfg, attempt);
            let conn = connect4(
                &family,
                &weak,
                from,
                to,
                InnerCount::Exact(c),
                &reservoir.available(),
                opts,
            )?;
            if let Some(p) = conn.path {
                reservoir.spend(p.inner())?;
                joined = Some(p);
                break;
            }
        }
        match joined {
            Some(link) => {
                if !claim(&mut claimed, link.inner()) || !claim(&mut claimed, path.vertices()) {
                    return Ok(run.fail(Stage::Connection, "stage vertex sets overlap"));
                }
                t.extend_from_slice(link.inner());
                t.extend_from_slice(path.vertices());
            }
            None => {
                dissolved += 1;
                reservoir.extend_pool(&path.vertex_set(n));
                reservoir.budget += path.len();
            }
        }
    }
    let reservoir_used_intermediate = reservoir.used.len();
    run.note(
        Stage::Connection,
        reservoir_used_intermediate,
        pool_size,
        format!("{dissolved} cover paths dissolved into the pool"),
    );
    if TightPath::new(h, t.clone()).is_err() {
        return Ok(run.fail(Stage::Connection, "joined path failed validation"));
    }

    // Closing: i ≡ n − |V(T)| (mod 4).
    let pool = reservoir.available();
    let residue = (n - t.len()) % 4;
    let candidates: Vec<usize> = match cfg.mode {
        Mode::Asymptotic => {
            vec![residue_lengths(4, cfg.ell)?.inner_for(if residue == 0 { 4 } else { residue })]
        }
        Mode::Desk => (0..=cfg.absorbers)
            .rev()
            .filter_map(|j| pool.len().checked_sub(4 * j))
            .filter(|&c| c > 0)
            .collect(),
    };
    let from = last3(&t);
    let to = [t[0], t[1], t[2]];
    let mut last_error = String::from("no admissible closing length");
    for &c in &candidates {
        if reservoir.used.len() + c > reservoir.budget {
            continue;
        }
        attempt += 1;
        let conn = connect4(
            &family,
            &weak,
            from,
            to,
            InnerCount::Exact(c),
            &pool,
            connect_options(cfg, attempt),
        )?;
        let Some(closing) = conn.path else {
            last_error = format!("no closing path with {c} inner vertices");
            continue;
        };
        if closing.inner().iter().any(|&v| claimed.contains(v)) {
            return Ok(run.fail(Stage::Closing, "closing path reuses claimed vertices"));
        }
        let mut cycle = t.clone();
        cycle.extend_from_slice(closing.inner());
        let z = VertexSet::from_slice(n, &cycle).complement();
        if !z.len().is_multiple_of(4) {
            return Err(Error::Precondition(format!(
                "|Z| = {} breaks the residue bookkeeping",
                z.len()
            )));
        }
        match finish(h, &ap, &cycle, &z) {
            Ok(done) => {
                run.note(Stage::Closing, c, pool.len(), format!("residue {residue}"));
                run.note(Stage::Absorb, z.len(), 4 * cfg.absorbers, "");
                run.record.absorbed = Some(z.len());
                if !validate_result(h, &done) {
                    return Ok(run.fail(Stage::Validation, "final cycle failed validation"));
                }
                TightCycle::new(h, done.clone())?;
                run.record.cycle = Some(done);
                return Ok(run.record);
            }
            Err(e) => last_error = e.to_string(),
        }
    }
    let stage = if last_error.starts_with("absorption") {
        Stage::Absorb
    } else {
        Stage::Closing
    };
    Ok(run.fail(stage, last_error))
}

fn claim(claimed: &mut VertexSet, vs: &[Vertex]) -> bool {
    vs.iter().all(|&v| claimed.insert(v))
}

fn last3(t: &[Vertex]) -> [Vertex; 3] {
    [t[t.len() - 3], t[t.len() - 2], t[t.len() - 1]]
}

fn connect_options(cfg: &PipelineConfig, attempt: u64) -> ConnectOptions {
    ConnectOptions {
        seed: cfg.seed.wrapping_mul(0x9e37_79b9).wrapping_add(attempt),
        budget: cfg.connect_budget,
        ..ConnectOptions::default()
    }
}

/// Absorbs `z` into the absorbing path, which is the prefix of `cycle`.
fn finish(
    h: &Hypergraph,
    ap: &AbsorbingPath,
    cycle: &[Vertex],
    z: &VertexSet,
) -> Result<Vec<Vertex>> {
    let q = absorb(h, ap, z)?;
    let mut out = q.into_vertices();
    out.extend_from_slice(&cycle[ap.vertices.len()..]);
    Ok(out)
}
