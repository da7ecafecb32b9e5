use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use clap::ValueEnum;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use tightcycle::absorption::{find_absorber, Absorber, SearchOptions};
use tightcycle::concentration::{
    janson_bound, janson_exact_tail, janson_mc_tail, WeightSystem, EXACT_TAIL_MAX_GROUND,
};
use tightcycle::connectivity::{
    build_family3, build_family4, connectable_pairs, connectable_triples, verify_counting_lemma,
    LemmaId, LemmaInstance,
};
use tightcycle::connector::{connect3, connect4, residue_lengths, ConnectOptions, InnerCount};
use tightcycle::extremal::{construction_a, construction_b, random_hypergraph};
use tightcycle::pipeline::{find_hamiltonian_absorption, validate_result, PipelineConfig};
use tightcycle::report::LemmaReport;
use tightcycle::robust::{
    blakley_roy_gap, check_lemma_l36, extract_robust_subgraph, ExtractParams, Graph,
};
use tightcycle::tightpaths::{find_tight_hamiltonian_brute, BruteOutcome};
use tightcycle::{Error, Hypergraph, Vertex, VertexSet};

use crate::report::{create, digest, CmdResult, Outcome, Sink};
use crate::{Family, FamilyArgs, InstanceArgs, Lemma, Method, ScanMethod};

fn lib<T>(r: tightcycle::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn read_hypergraph(path: &Path) -> Result<Hypergraph, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Hypergraph::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse().map_err(|_| format!("bad {what} {t:?}")))
        .collect()
}

fn outcome(ok: bool) -> Outcome {
    if ok {
        Outcome::Success
    } else {
        Outcome::Failure
    }
}

#[derive(Serialize)]
struct CycleFile<'a> {
    kind: &'a str,
    vertices: &'a [Vertex],
    certified: bool,
}

fn write_cycle(path: &Path, vertices: &[Vertex], certified: bool) -> Result<(), String> {
    let mut f = create(path)?;
    let body = serde_json::to_string(&CycleFile {
        kind: "cycle",
        vertices,
        certified,
    })
    .map_err(|e| e.to_string())?;
    writeln!(f, "{body}").map_err(|e| e.to_string())
}

pub fn gen(
    sink: &mut Sink,
    seed: u64,
    family: Family,
    n: usize,
    p: f64,
    k: usize,
    out: &Path,
) -> CmdResult {
    let start = Instant::now();
    let (h, partition) = match family {
        Family::ConstructionA => lib(construction_a(n)).map(|(h, part)| (h, Some(part)))?,
        Family::ConstructionB => lib(construction_b(n)).map(|(h, part)| (h, Some(part)))?,
        Family::Random => (lib(random_hypergraph(n, k, p, seed))?, None),
    };
    fs::write(out, h.to_text()).map_err(|e| format!("{}: {e}", out.display()))?;
    let family_name = family.to_possible_value().map(|v| v.get_name().to_string());
    let sidecar = json!({
        "family": family_name,
        "n": n,
        "k": h.k(),
        "p": if family == Family::Random { Some(p) } else { None },
        "seed": seed,
        "edges": h.edge_count(),
        "partition": partition.as_ref().map(|part| json!({
            "x": part.x.to_vec(),
            "y": part.y.to_vec(),
            "forbidden_intersection": part.forbidden_intersection,
        })),
    });
    let mut side = out.as_os_str().to_owned();
    side.push(".json");
    fs::write(&side, format!("{sidecar}\n")).map_err(|e| e.to_string())?;
    sink.emit(
        "gen",
        "desk",
        seed,
        json!({ "family": family_name, "n": n, "p": p, "k": k }),
        json!({ "file": out.display().to_string(), "edges": h.edge_count(), "density": h.density() }),
        start.elapsed(),
    )?;
    Ok(Outcome::Success)
}

pub fn degree(sink: &mut Sink, seed: u64, file: &Path, j: usize) -> CmdResult {
    let start = Instant::now();
    let h = read_hypergraph(file)?;
    let (value, witness) = lib(h.min_j_degree(j))?;
    sink.emit(
        "degree",
        "desk",
        seed,
        json!({ "file": file.display().to_string(), "j": j }),
        json!({ "n": h.n(), "k": h.k(), "min_degree": value, "witness": witness }),
        start.elapsed(),
    )?;
    Ok(Outcome::Success)
}

pub fn find_cycle(
    sink: &mut Sink,
    seed: u64,
    file: &Path,
    method: Method,
    config: Option<&Path>,
    budget: u64,
    out: Option<&Path>,
) -> CmdResult {
    let start = Instant::now();
    let h = read_hypergraph(file)?;
    match method {
        Method::Brute => {
            let res = lib(find_tight_hamiltonian_brute(&h, budget))?;
            let (result, found) = match &res {
                BruteOutcome::Cycle(c) => (
                    json!({ "outcome": "cycle", "exhaustive": false, "vertices": c.vertices(), "certified": true, "digest": digest(c.vertices()) }),
                    Some(c.vertices().to_vec()),
                ),
                BruteOutcome::None { expansions } => (
                    json!({ "outcome": "none", "exhaustive": true, "expansions": expansions }),
                    None,
                ),
                BruteOutcome::Timeout { expansions } => (
                    json!({ "outcome": "timeout", "exhaustive": false, "expansions": expansions }),
                    None,
                ),
            };
            if let (Some(v), Some(path)) = (&found, out) {
                write_cycle(path, v, true)?;
            }
            sink.emit(
                "find-cycle",
                "desk",
                seed,
                json!({ "method": "brute", "budget": budget, "file": file.display().to_string() }),
                result,
                start.elapsed(),
            )?;
            Ok(outcome(found.is_some()))
        }
        Method::Pipeline => {
            let mut cfg = match config {
                Some(path) => load_config(path)?,
                None => PipelineConfig::default(),
            };
            cfg.seed = seed;
            let run = lib(find_hamiltonian_absorption(&h, &cfg))?;
            let certified = run.cycle.as_deref().is_some_and(|c| validate_result(&h, c));
            if let (Some(v), Some(path)) = (&run.cycle, out) {
                write_cycle(path, v, certified)?;
            }
            let result = json!({
                "outcome": if run.cycle.is_some() { "cycle" } else { "failure" },
                "certified": certified,
                "digest": run.cycle.as_deref().map(digest),
                "run": run,
            });
            let mode = serde_json::to_value(cfg.mode).map_err(|e| e.to_string())?;
            sink.emit(
                "find-cycle",
                mode.as_str().unwrap_or("desk"),
                seed,
                &cfg,
                result,
                start.elapsed(),
            )?;
            Ok(outcome(certified))
        }
    }
}

pub fn load_config(path: &Path) -> Result<PipelineConfig, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let cfg: PipelineConfig =
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    lib(cfg.validate())?;
    Ok(cfg)
}

fn instance_host(inst: &InstanceArgs, k: usize, seed: u64) -> Result<Hypergraph, String> {
    let h = match &inst.file {
        Some(path) => read_hypergraph(path)?,
        None => lib(random_hypergraph(inst.n, k, inst.p, seed))?,
    };
    if h.k() != k {
        return Err(format!(
            "this lemma needs a {k}-uniform instance, got {}-uniform",
            h.k()
        ));
    }
    Ok(h)
}

fn unmet(lemma: &str, why: String) -> LemmaReport {
    LemmaReport::with_unmet(
        lemma,
        vec![why],
        0.0,
        tightcycle::report::Relation::AtLeast,
        0.0,
    )
}

pub fn verify(sink: &mut Sink, seed: u64, lemma: Lemma, inst: &InstanceArgs) -> CmdResult {
    let start = Instant::now();
    let name = lemma
        .to_possible_value()
        .map(|v| v.get_name().to_string())
        .unwrap_or_default();
    let params = ExtractParams::desk(inst.alpha, inst.mu, inst.beta, inst.ell);
    let reports: Vec<LemmaReport> = match lemma {
        Lemma::BlakleyRoy => {
            let g = lib(Graph::from_hypergraph(&instance_host(inst, 2, seed)?))?;
            let gap = blakley_roy_gap(&g);
            vec![LemmaReport::new(&name, true, gap.walks, gap.bound)]
        }
        Lemma::L36 => {
            let g = lib(Graph::from_hypergraph(&instance_host(inst, 2, seed)?))?;
            let g2 = lib(Graph::from_hypergraph(&lib(random_hypergraph(
                g.n(),
                2,
                inst.p,
                seed.wrapping_add(1),
            ))?))?;
            vec![lib(check_lemma_l36(
                &g,
                &g2,
                &VertexSet::full(g.n()),
                inst.alpha,
            ))?]
        }
        Lemma::F41 | Lemma::Nb3 | Lemma::L35 => {
            let h = instance_host(inst, 3, seed)?;
            let id: LemmaId = lib(name.parse())?;
            match build_family3(&h, params) {
                Ok(fam) => lib(verify_counting_lemma(
                    id,
                    &LemmaInstance::Three {
                        system: &fam,
                        zeta: inst.zeta,
                        alpha: inst.alpha,
                        other: None,
                    },
                ))?,
                Err(e @ Error::Extraction { .. }) => vec![unmet(&name, e.to_string())],
                Err(e) => return Err(e.to_string()),
            }
        }
        Lemma::F41analog | Lemma::Nct | Lemma::Nb4 => {
            let h = instance_host(inst, 4, seed)?;
            let id: LemmaId = lib(name.parse())?;
            match build_family4(&h, params) {
                Ok(fam) => lib(verify_counting_lemma(
                    id,
                    &LemmaInstance::Four {
                        family: &fam,
                        zeta: inst.zeta,
                        alpha: inst.alpha,
                    },
                ))?,
                Err(e @ Error::Extraction { .. }) => vec![unmet(&name, e.to_string())],
                Err(e) => return Err(e.to_string()),
            }
        }
    };
    let pass = reports.iter().all(|r| r.pass);
    let elapsed = start.elapsed();
    let config = json!({
        "lemma": name,
        "file": inst.file.as_ref().map(|p| p.display().to_string()),
        "n": inst.n, "p": inst.p,
        "alpha": inst.alpha, "mu": inst.mu, "beta": inst.beta, "ell": inst.ell, "zeta": inst.zeta,
    });
    for r in &reports {
        sink.emit("verify", "desk", seed, &config, r, elapsed)?;
    }
    Ok(outcome(pass))
}

pub struct ConnectRequest<'a> {
    pub file: &'a Path,
    pub from: &'a str,
    pub to: &'a str,
    pub residue: Option<usize>,
    pub inner: Option<usize>,
    pub allowed: Option<&'a str>,
    pub budget: u64,
    pub family: &'a FamilyArgs,
}

pub fn connect(sink: &mut Sink, seed: u64, req: ConnectRequest<'_>) -> CmdResult {
    let start = Instant::now();
    let h = read_hypergraph(req.file)?;
    let k = h.k();
    let from: Vec<Vertex> = parse_list(req.from, "vertex")?;
    let to: Vec<Vertex> = parse_list(req.to, "vertex")?;
    if from.len() != k - 1 || to.len() != k - 1 {
        return Err(format!(
            "a {k}-uniform connection needs {}-tuples at both ends",
            k - 1
        ));
    }
    let allowed = match req.allowed {
        Some(list) => VertexSet::from_iter_in(
            h.n(),
            parse_list::<Vertex>(list, "vertex")?
                .into_iter()
                .filter(|&v| v < h.n()),
        ),
        None => {
            let mut all = VertexSet::full(h.n());
            for v in from.iter().chain(&to) {
                all.remove(*v);
            }
            all
        }
    };
    let fa = req.family;
    let params = ExtractParams::desk(fa.alpha, fa.mu, fa.beta, fa.ell);
    let opts = ConnectOptions {
        seed,
        budget: req.budget,
        ..ConnectOptions::default()
    };
    let residue = req.residue.unwrap_or(1);
    let conn = match k {
        3 => {
            let fam = lib(build_family3(&h, params))?;
            let idx = lib(connectable_pairs(&fam, fa.zeta))?;
            let inner = match req.inner {
                Some(m) => m,
                None => lib(residue_lengths(3, fa.ell))?.inner_for(residue),
            };
            lib(connect3(
                &fam,
                &idx,
                [from[0], from[1]],
                [to[0], to[1]],
                inner,
                &allowed,
                opts,
            ))?
        }
        4 => {
            let fam = lib(build_family4(&h, params))?;
            let idx = lib(connectable_triples(&fam, fa.zeta))?;
            let count = match req.inner {
                Some(m) => InnerCount::Exact(m),
                None => InnerCount::Residue(residue),
            };
            lib(connect4(
                &fam,
                &idx,
                [from[0], from[1], from[2]],
                [to[0], to[1], to[2]],
                count,
                &allowed,
                opts,
            ))?
        }
        _ => {
            return Err(format!(
                "connections need a 3- or 4-uniform host, got {k}-uniform"
            ))
        }
    };
    let found = conn.path.is_some();
    sink.emit(
        "connect",
        "desk",
        seed,
        json!({
            "file": req.file.display().to_string(), "from": from, "to": to,
            "residue": req.residue, "inner": req.inner, "allowed": allowed.len(), "budget": req.budget,
            "alpha": fa.alpha, "mu": fa.mu, "beta": fa.beta, "ell": fa.ell, "zeta": fa.zeta,
        }),
        json!({
            "outcome": if found { "path" } else { "none" },
            "vertices": conn.path.as_ref().map(|p| p.vertices()),
            "diagnostics": conn.diagnostics,
        }),
        start.elapsed(),
    )?;
    Ok(outcome(found))
}

#[derive(Serialize)]
struct InventoryEntry<'a> {
    vertices: Vec<Vertex>,
    absorber: &'a Absorber,
    verified: bool,
}

pub fn absorbers(
    sink: &mut Sink,
    seed: u64,
    file: &Path,
    count: usize,
    budget: u64,
    fa: &FamilyArgs,
) -> CmdResult {
    let start = Instant::now();
    let h = read_hypergraph(file)?;
    if h.k() != 4 {
        return Err("absorbers need a 4-uniform host".into());
    }
    let fam = lib(build_family4(
        &h,
        ExtractParams::desk(fa.alpha, fa.mu, fa.beta, fa.ell),
    ))?;
    let idx = lib(connectable_triples(&fam, fa.zeta))?;
    let mut used = VertexSet::new(h.n());
    let mut found = Vec::new();
    let mut stopped = None;
    for i in 0..count {
        let opts = SearchOptions {
            seed: seed.wrapping_add(i as u64),
            budget,
            limit: 1,
        };
        let search = lib(find_absorber(&h, &idx, None, &used, opts))?;
        match search.absorber {
            Some(a) => {
                for v in a.vertices() {
                    used.insert(v);
                }
                found.push(a);
            }
            None => {
                stopped = search.failed_stage;
                break;
            }
        }
    }
    let inventory: Vec<InventoryEntry<'_>> = found
        .iter()
        .map(|a| InventoryEntry {
            vertices: a.vertices(),
            absorber: a,
            verified: a.verify(&h, &idx).is_ok(),
        })
        .collect();
    let ok = found.len() == count && inventory.iter().all(|e| e.verified);
    sink.emit(
        "absorbers",
        "desk",
        seed,
        json!({ "file": file.display().to_string(), "count": count, "budget": budget,
                "alpha": fa.alpha, "mu": fa.mu, "beta": fa.beta, "ell": fa.ell, "zeta": fa.zeta }),
        json!({ "requested": count, "found": found.len(), "failed_stage": stopped, "inventory": inventory }),
        start.elapsed(),
    )?;
    Ok(outcome(ok))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Four singletons with p = 1/2.
    Singletons,
    /// All 3-subsets of 8 elements with p = 1/2.
    Triples,
    /// The edges of a 6-cycle with p = 0.7.
    Hexagon,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightSpec {
    ground: usize,
    p: f64,
    sets: Vec<WeightedSet>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightedSet {
    set: Vec<usize>,
    #[serde(default = "unit")]
    weight: f64,
}

fn unit() -> f64 {
    1.0
}

fn preset_system(preset: Preset) -> tightcycle::Result<WeightSystem> {
    match preset {
        Preset::Singletons => {
            let mut ws = WeightSystem::new(4, 0.5)?;
            for v in 0..4 {
                ws.add(&[v], 1.0)?;
            }
            Ok(ws)
        }
        Preset::Triples => {
            let mut ws = WeightSystem::new(8, 0.5)?;
            for a in 0..8 {
                for b in a + 1..8 {
                    for c in b + 1..8 {
                        ws.add(&[a, b, c], 1.0)?;
                    }
                }
            }
            Ok(ws)
        }
        Preset::Hexagon => {
            let mut ws = WeightSystem::new(6, 0.7)?;
            for v in 0..6 {
                ws.add(&[v, (v + 1) % 6], 1.0)?;
            }
            Ok(ws)
        }
    }
}

pub fn janson(
    sink: &mut Sink,
    seed: u64,
    spec: Option<&Path>,
    preset: Option<Preset>,
    t_grid: Option<&str>,
    points: usize,
    trials: u64,
) -> CmdResult {
    let start = Instant::now();
    let ws = match (spec, preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            let parsed: WeightSpec =
                serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
            let mut ws = lib(WeightSystem::new(parsed.ground, parsed.p))?;
            for s in parsed.sets {
                lib(ws.add(&s.set, s.weight))?;
            }
            ws
        }
        (None, Some(p)) => lib(preset_system(p))?,
        (None, None) => return Err("give --spec or --preset".into()),
    };
    let ex = ws.expectation();
    let grid: Vec<f64> = match t_grid {
        Some(list) => parse_list(list, "deviation")?,
        None if points <= 1 => vec![0.0],
        None => (0..points)
            .map(|i| ex * i as f64 / (points - 1) as f64)
            .collect(),
    };
    let mut rows = Vec::new();
    let mut dominated = true;
    for (i, &t) in grid.iter().enumerate() {
        let b = lib(janson_bound(&ws, t))?;
        let exact = if ws.ground() <= EXACT_TAIL_MAX_GROUND {
            Some(lib(janson_exact_tail(&ws, t))?)
        } else {
            None
        };
        let mc = if trials > 0 {
            Some(lib(janson_mc_tail(
                &ws,
                t,
                trials,
                seed.wrapping_add(i as u64),
            ))?)
        } else {
            None
        };
        let pass = exact.is_none_or(|e| e <= b.bound + 1e-12);
        dominated &= pass;
        rows.push(json!({ "t": t, "bound": b, "exact": exact, "empirical": mc, "pass": pass }));
    }
    sink.emit(
        "janson",
        "desk",
        seed,
        json!({ "ground": ws.ground(), "p": ws.p(), "support": ws.support().count(),
                "preset": preset.and_then(|p| p.to_possible_value()).map(|v| v.get_name().to_string()),
                "spec": spec.map(|p| p.display().to_string()), "trials": trials }),
        json!({ "expectation": ex, "delta": ws.delta(), "grid": rows, "dominated": dominated }),
        start.elapsed(),
    )?;
    Ok(outcome(dominated))
}

fn parse_range(s: &str) -> Result<Vec<usize>, String> {
    if let Some((lo, rest)) = s.split_once("..") {
        let (hi, step) = rest.split_once(':').unwrap_or((rest, "1"));
        let num = |x: &str| {
            x.trim()
                .parse::<usize>()
                .map_err(|_| format!("bad range {s:?}"))
        };
        let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
        if step == 0 || lo > hi {
            return Err(format!("empty range {s:?}"));
        }
        Ok((lo..=hi).step_by(step).collect())
    } else {
        parse_list(s, "vertex count")
    }
}

#[derive(Serialize, Clone, Debug, PartialEq)]
struct ScanRow {
    family: String,
    n: usize,
    p: f64,
    seed: u64,
    method: String,
    edges: usize,
    min_pair_degree: Option<usize>,
    pair_degree_ratio: Option<f64>,
    outcome: String,
    validated: bool,
    stage: String,
}

fn scan_cell(
    family: Family,
    n: usize,
    p: f64,
    seed: u64,
    method: ScanMethod,
    budget: u64,
) -> ScanRow {
    let family_name = family
        .to_possible_value()
        .map(|v| v.get_name().to_string())
        .unwrap_or_default();
    let mut row = ScanRow {
        family: family_name,
        n,
        p,
        seed,
        method: String::new(),
        edges: 0,
        min_pair_degree: None,
        pair_degree_ratio: None,
        outcome: "invalid".into(),
        validated: false,
        stage: String::new(),
    };
    let host = match family {
        Family::ConstructionA => construction_a(n).map(|x| x.0),
        Family::ConstructionB => construction_b(n).map(|x| x.0),
        Family::Random => random_hypergraph(n, 4, p, seed),
    };
    let h = match host {
        Ok(h) => h,
        Err(e) => {
            row.stage = e.to_string();
            return row;
        }
    };
    row.edges = h.edge_count();
    if let Ok((d, _)) = h.min_j_degree(2) {
        row.min_pair_degree = Some(d);
        row.pair_degree_ratio = Some(2.0 * d as f64 / (n * n) as f64);
    }
    let brute = match method {
        ScanMethod::Brute => true,
        ScanMethod::Pipeline => false,
        ScanMethod::Auto => n <= 16,
    };
    if brute {
        row.method = "brute".into();
        match find_tight_hamiltonian_brute(&h, budget) {
            Ok(BruteOutcome::Cycle(c)) => {
                row.outcome = "cycle".into();
                row.validated = validate_result(&h, c.vertices());
            }
            Ok(BruteOutcome::None { .. }) => row.outcome = "none".into(),
            Ok(BruteOutcome::Timeout { .. }) => row.outcome = "timeout".into(),
            Err(e) => row.stage = e.to_string(),
        }
    } else {
        row.method = "pipeline".into();
        let cfg = PipelineConfig {
            seed,
            ..PipelineConfig::default()
        };
        match find_hamiltonian_absorption(&h, &cfg) {
            Ok(run) => match (&run.cycle, &run.failure) {
                (Some(c), _) => {
                    row.outcome = "cycle".into();
                    row.validated = validate_result(&h, c);
                }
                (None, f) => {
                    row.outcome = "failure".into();
                    row.stage = f
                        .as_ref()
                        .map(|f| format!("{:?}", f.stage).to_lowercase())
                        .unwrap_or_default();
                }
            },
            Err(e) => row.stage = e.to_string(),
        }
    }
    row
}

#[allow(clippy::too_many_arguments)]
pub fn scan(
    sink: &mut Sink,
    seed: u64,
    family: Family,
    n_range: &str,
    p_list: &str,
    seeds: u64,
    method: ScanMethod,
    budget: u64,
    out: Option<&Path>,
) -> CmdResult {
    let start = Instant::now();
    let ns = parse_range(n_range)?;
    let ps: Vec<f64> = parse_list(p_list, "probability")?;
    if ps.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err("probabilities must lie in [0, 1]".into());
    }
    let mut cells = Vec::new();
    for &n in &ns {
        for &p in &ps {
            for s in 0..seeds {
                cells.push((n, p, seed.wrapping_add(s)));
            }
        }
    }
    let mut rows: Vec<ScanRow> = cells
        .par_iter()
        .map(|&(n, p, s)| scan_cell(family, n, p, s, method, budget))
        .collect();
    rows.sort_by(|a, b| (a.n, a.seed).cmp(&(b.n, b.seed)).then(a.p.total_cmp(&b.p)));
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for r in &rows {
            w.serialize(r).map_err(|e| e.to_string())?;
        }
        w.flush().map_err(|e| e.to_string())?;
    }
    let failures = rows.iter().filter(|r| r.outcome != "cycle").count();
    match out {
        Some(path) => {
            fs::write(path, &buf).map_err(|e| format!("{}: {e}", path.display()))?;
            sink.emit(
                "scan",
                "desk",
                seed,
                json!({ "family": rows.first().map(|r| r.family.clone()), "n": ns, "p": ps, "seeds": seeds, "budget": budget }),
                json!({ "rows": rows.len(), "cycles": rows.len() - failures, "csv": path.display().to_string() }),
                start.elapsed(),
            )?;
        }
        None => std::io::stdout()
            .write_all(&buf)
            .map_err(|e| e.to_string())?,
    }
    Ok(Outcome::Success)
}

pub fn robust(
    sink: &mut Sink,
    seed: u64,
    file: &Path,
    vertex: Option<usize>,
    pair: Option<&str>,
    [alpha, mu, beta]: [f64; 3],
    ell: usize,
) -> CmdResult {
    let start = Instant::now();
    let h = read_hypergraph(file)?;
    let in_range = |v: usize| {
        if v < h.n() {
            Ok(v)
        } else {
            Err(format!("vertex {v} out of range"))
        }
    };
    let g = match (h.k(), vertex, pair) {
        (2, None, None) => lib(Graph::from_hypergraph(&h))?,
        (3, Some(v), None) => Graph::vertex_link(&h, in_range(v)?),
        (4, None, Some(list)) => {
            let uv: Vec<usize> = parse_list(list, "vertex")?;
            if uv.len() != 2 || uv[0] == uv[1] {
                return Err("--pair needs two distinct vertices".into());
            }
            Graph::pair_link(&h, in_range(uv[0])?, in_range(uv[1])?)
        }
        (k, _, _) => {
            return Err(format!(
                "use a graph file, --vertex with a 3-uniform file or --pair with a 4-uniform file (got {k}-uniform)"
            ))
        }
    };
    let params = ExtractParams::desk(alpha, mu, beta, ell);
    let extraction = lib(extract_robust_subgraph(&g, params))?;
    let ok = extraction.is_ok();
    let result = match &extraction {
        Ok(cert) => json!({
            "outcome": "certified",
            "size": cert.vertices.len(),
            "vertices": cert.vertices.to_vec(),
            "edges_within": g.edges_within(&cert.vertices),
            "edge_floor": params.edge_floor(g.n(), cert.vertices.len()),
            "cut": g.cut(&cert.vertices),
            "cut_ceiling": params.cut_ceiling(g.n()),
            "min_size": params.min_size(g.n()),
            "certificate": cert,
        }),
        Err(f) => json!({ "outcome": "failure", "clause": f.clause, "detail": f.detail }),
    };
    sink.emit(
        "robust",
        "desk",
        seed,
        json!({ "file": file.display().to_string(), "vertex": vertex, "pair": pair, "params": params }),
        result,
        start.elapsed(),
    )?;
    Ok(outcome(ok))
}
