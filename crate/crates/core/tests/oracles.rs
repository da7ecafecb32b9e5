use std::collections::HashSet;

use num_bigint::BigUint;
use tightcycle::extremal::{construction_a, construction_b, random_hypergraph};
use tightcycle::hypercore::Hypergraph;
use tightcycle::pipeline::{find_hamiltonian_absorption, validate_result, PipelineConfig, Stage};
use tightcycle::robust::robust_constants;
use tightcycle::tightpaths::{find_tight_hamiltonian_brute, BruteOutcome};

/// Natural log of a big integer from its bit length and top 64 bits.
fn ln_big(x: &BigUint) -> f64 {
    let shift = x.bits().saturating_sub(64);
    let top: BigUint = x >> shift;
    let top = top.iter_u64_digits().next().unwrap_or(0) as f64;
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `ℓ` and `ln β` for `μ′ = num/den` in integer arithmetic: `ℓ` is the least
/// odd integer above `8 den²/num² + 1` and `β = num^(6ℓ) / (72 (2 den)^(6ℓ))`.
fn exact_constants(num: u64, den: u64) -> (u64, f64) {
    let (num, den) = (BigUint::from(num), BigUint::from(den));
    let whole: u64 = (BigUint::from(8u32) * &den * &den / (&num * &num))
        .try_into()
        .unwrap();
    let mut ell = whole + 2;
    if ell.is_multiple_of(2) {
        ell += 1;
    }
    let e = 6 * ell as u32;
    let numerator = num.pow(e);
    let denominator = BigUint::from(72u32) * (den * 2u32).pow(e);
    (ell, ln_big(&numerator) - ln_big(&denominator))
}

/// Every cyclic window of four vertices, sorted, is an edge and no vertex repeats.
fn naive_cycle_check(h: &Hypergraph, cycle: &[usize]) -> bool {
    let edges: HashSet<Vec<usize>> = h
        .edges()
        .map(|e| {
            let mut e = e.to_vec();
            e.sort_unstable();
            e
        })
        .collect();
    let distinct: HashSet<usize> = cycle.iter().copied().collect();
    distinct.len() == h.n()
        && cycle.len() == h.n()
        && (0..cycle.len()).all(|i| {
            let mut w: Vec<usize> = (0..h.k()).map(|j| cycle[(i + j) % cycle.len()]).collect();
            w.sort_unstable();
            edges.contains(&w)
        })
}

#[test]
fn log_beta_matches_exact_arithmetic() {
    // (alpha, mu, mu' as a fraction)
    for (alpha, mu, num, den) in [
        (0.72, 1.0, 1, 100),
        (0.9, 0.036, 9, 1000),
        (0.36, 0.2, 1, 200),
    ] {
        let c = robust_constants(alpha, mu).unwrap();
        let (ell, ln_beta) = exact_constants(num, den);
        assert_eq!(c.ell, ell, "alpha={alpha} mu={mu}");
        let rel = ((c.ln_beta - ln_beta) / ln_beta).abs();
        assert!(
            rel < 1e-12,
            "alpha={alpha} mu={mu}: {} vs {ln_beta}",
            c.ln_beta
        );
        assert!((c.beta.log2() * std::f64::consts::LN_2 - ln_beta).abs() / ln_beta.abs() < 1e-12);
        assert_eq!(c.beta.to_f64(), 0.0);
    }
}

#[test]
fn pipeline_never_returns_uncertified_cycles() {
    let probabilities = [0.3, 0.6, 0.8, 0.9, 0.95, 1.0];
    let mut cycles = 0;
    for seed in 0..1000u64 {
        let n = 24 + (seed as usize * 7) % 21;
        let p = probabilities[seed as usize % probabilities.len()];
        let h = random_hypergraph(n, 4, p, seed).unwrap();
        let run = find_hamiltonian_absorption(
            &h,
            &PipelineConfig {
                seed,
                ..PipelineConfig::desk()
            },
        )
        .unwrap();
        match (&run.cycle, &run.failure) {
            (Some(c), None) => {
                assert!(validate_result(&h, c), "seed {seed}");
                assert!(naive_cycle_check(&h, c), "seed {seed}");
                assert_eq!(run.absorbed.map(|z| z % 4), Some(0));
                cycles += 1;
            }
            (None, Some(f)) => assert_ne!(f.stage, Stage::Validation, "seed {seed}"),
            other => panic!("seed {seed}: inconsistent run {other:?}"),
        }
    }
    assert!(cycles > 0);
}

#[test]
fn small_hosts_agree_with_brute_force() {
    let cfg = PipelineConfig {
        min_n: 6,
        ..PipelineConfig::desk()
    };
    let mut hosts = Vec::new();
    for n in [9, 12] {
        hosts.push(construction_a(n).unwrap().0);
        hosts.push(construction_b(n).unwrap().0);
    }
    for seed in 0..24u64 {
        let n = 8 + seed as usize % 5;
        hosts.push(random_hypergraph(n, 4, 0.7 + 0.0125 * seed as f64, seed).unwrap());
    }
    for (i, h) in hosts.iter().enumerate() {
        let brute = find_tight_hamiltonian_brute(h, 1_000_000_000).unwrap();
        let run = find_hamiltonian_absorption(
            h,
            &PipelineConfig {
                seed: i as u64,
                ..cfg.clone()
            },
        )
        .unwrap();
        if let Some(c) = &run.cycle {
            assert!(validate_result(h, c) && naive_cycle_check(h, c));
            assert!(
                matches!(brute, BruteOutcome::Cycle(_)),
                "host {i}: pipeline cycle but brute {brute:?}"
            );
        }
        if matches!(brute, BruteOutcome::None { .. }) {
            assert!(run.failure.is_some(), "host {i}");
        }
    }
}

#[test]
fn pipeline_runs_are_reproducible() {
    for seed in [3u64, 11] {
        let h = random_hypergraph(52, 4, 0.9, seed).unwrap();
        let cfg = PipelineConfig {
            seed,
            ..PipelineConfig::desk()
        };
        let a = serde_json::to_string(&find_hamiltonian_absorption(&h, &cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&find_hamiltonian_absorption(&h, &cfg).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
