//! Built-in scenarios: protocol, attack patterns, topologies and the verdict each
//! pattern is expected to get at its own bounds.

use crate::analyzer::{parse_attacks, AttackPattern};
use crate::process::{parse_spec, ProtocolSpec};
use crate::sim::{parse_topology, Topology};
use std::collections::BTreeMap;

pub const BRANDS_CHAUM_PROTO: &str = include_str!("../../../scenarios/brands_chaum.proto");
pub const BRANDS_CHAUM_ATTACKS: &str = include_str!("../../../scenarios/brands_chaum.attacks");
pub const MAFIA_DEMO_TOPO: &str = include_str!("../../../scenarios/mafia-demo.topo");
pub const RELAY_SCHEDULE: &str = include_str!("../../../scenarios/relay.sched");
pub const MEADOWS_XOR_PROTO: &str = include_str!("../../../scenarios/meadows_xor.proto");
pub const MEADOWS_XOR_ATTACKS: &str = include_str!("../../../scenarios/meadows_xor.attacks");
pub const MEADOWS_ID_PROTO: &str = include_str!("../../../scenarios/meadows_id.proto");
pub const MEADOWS_ID_ATTACKS: &str = include_str!("../../../scenarios/meadows_id.attacks");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expected {
    NoAttack,
    AttackFound,
}

impl Expected {
    /// Same spelling as `Verdict::name`.
    pub fn name(self) -> &'static str {
        match self {
            Expected::NoAttack => "no-attack",
            Expected::AttackFound => "attack-found",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: &'static str,
    pub spec: ProtocolSpec,
    pub patterns: Vec<AttackPattern>,
    pub topologies: Vec<Topology>,
    pub expected: BTreeMap<String, Expected>,
    /// Message formats rebuilt from a short description rather than a full listing.
    pub reconstructed: bool,
}

impl Scenario {
    pub fn pattern(&self, name: &str) -> Option<&AttackPattern> {
        self.patterns.iter().find(|p| p.name == name)
    }

    pub fn topology(&self, name: &str) -> Option<&Topology> {
        self.topologies.iter().find(|t| t.name == name || t.name.replace('_', "-") == name)
    }
}

fn build(name: &'static str, proto: &str, attacks: &str, expected: [(&str, Expected); 2], reconstructed: bool) -> Scenario {
    Scenario {
        name,
        spec: parse_spec(proto).expect("built-in protocol parses"),
        patterns: parse_attacks(attacks).expect("built-in patterns parse"),
        topologies: vec![parse_topology(MAFIA_DEMO_TOPO).expect("built-in topology parses")],
        expected: expected.into_iter().map(|(p, e)| (p.to_string(), e)).collect(),
        reconstructed,
    }
}

/// Brands-Chaum with forward, conc, deconc and sign-as-self capabilities. Mafia fraud
/// fails, distance hijacking succeeds.
pub fn brands_chaum() -> Scenario {
    build(
        "brands-chaum",
        BRANDS_CHAUM_PROTO,
        BRANDS_CHAUM_ATTACKS,
        [("mafia", Expected::NoAttack), ("hijacking", Expected::AttackFound)],
        false,
    )
}

/// The two reconstructed Meadows-style variants: rapid reply `n_V ⊕ n_P ; P`, safe
/// against both attacks, and `n_V ; n_P ⊕ P`, open to hijacking.
pub fn meadows_variants() -> (Scenario, Scenario) {
    (
        build(
            "meadows-xor",
            MEADOWS_XOR_PROTO,
            MEADOWS_XOR_ATTACKS,
            [("mafia", Expected::NoAttack), ("hijacking", Expected::NoAttack)],
            true,
        ),
        build(
            "meadows-id",
            MEADOWS_ID_PROTO,
            MEADOWS_ID_ATTACKS,
            [("mafia", Expected::NoAttack), ("hijacking", Expected::AttackFound)],
            true,
        ),
    )
}

pub const SCENARIOS: &[&str] = &["brands-chaum", "meadows-xor", "meadows-id"];

pub fn scenario(name: &str) -> Option<Scenario> {
    match name {
        "brands-chaum" | "brands_chaum" => Some(brands_chaum()),
        "meadows-xor" | "meadows_xor" => Some(meadows_variants().0),
        "meadows-id" | "meadows_id" => Some(meadows_variants().1),
        _ => None,
    }
}
