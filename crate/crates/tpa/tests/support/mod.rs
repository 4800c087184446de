#![allow(dead_code)]

use std::collections::BTreeMap;

pub mod listings;
pub mod oracle;
pub mod wf_table;

pub const BRANDS_CHAUM: &str = include_str!("../../../../scenarios/brands_chaum.proto");
pub const MAFIA_DEMO: &str = include_str!("../../../../scenarios/mafia-demo.topo");
pub const RELAY_SCHEDULE: &str = include_str!("../../../../scenarios/relay.sched");
pub const BRANDS_CHAUM_ATTACKS: &str = include_str!("../../../../scenarios/brands_chaum.attacks");

/// Splits into identifier-like words and single other characters, dropping whitespace.
fn words(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in s.chars() {
        if c.is_alphanumeric() || matches!(c, '_' | '\'' | '?' | '#' | '$') {
            cur.push(c);
        } else {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            if !c.is_whitespace() {
                out.push(c.to_string());
            }
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn is_variable(w: &str) -> bool {
    let first = w.chars().next().unwrap_or(' ');
    first.is_uppercase()
        || w.ends_with('?')
        || w.starts_with('#')
        || w.starts_with('$')
        || (first == 't' && w[1..].chars().next().is_some_and(|c| c.is_ascii_digit()))
}

/// Text with whitespace removed and variables renamed by order of first occurrence.
pub fn alpha_normal(s: &str) -> Vec<String> {
    let mut names: BTreeMap<String, String> = BTreeMap::new();
    words(s)
        .into_iter()
        .map(|w| {
            if is_variable(&w) {
                let n = names.len();
                names.entry(w).or_insert_with(|| format!("v{n}")).clone()
            } else {
                w
            }
        })
        .collect()
}

pub fn alpha_eq(a: &str, b: &str) -> bool {
    alpha_normal(a) == alpha_normal(b)
}

/// A topology over `v`, `p`, `i` with random integer distances closed under shortest
/// paths, so the triangle inequalities hold, and a random bound `d`.
pub fn random_topology(seed: u64) -> tpa::sim::Topology {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let locs = ["v", "p", "i"];
    let mut m = [[0i64; 3]; 3];
    for a in 0..3 {
        for b in a + 1..3 {
            let x = rng.gen_range(1..=6);
            m[a][b] = x;
            m[b][a] = x;
        }
    }
    for k in 0..3 {
        for a in 0..3 {
            for b in 0..3 {
                m[a][b] = m[a][b].min(m[a][k] + m[k][b]);
            }
        }
    }
    let mut dists = Vec::new();
    for a in 0..3 {
        for b in a + 1..3 {
            dists.push((locs[a].to_string(), locs[b].to_string(), tpa::constraints::q(m[a][b])));
        }
    }
    let consts = BTreeMap::from([("d".to_string(), tpa::constraints::q(rng.gen_range(1..=4)))]);
    let placement = BTreeMap::from([("verifier".to_string(), "v".to_string()), ("prover".to_string(), "p".to_string())]);
    tpa::sim::Topology::new(format!("random{seed}"), locs.iter().map(|s| s.to_string()).collect(), dists, consts, placement, Some("i".into()), vec![]).unwrap()
}
