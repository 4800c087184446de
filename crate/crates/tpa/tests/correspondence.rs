mod support;

use std::collections::BTreeMap;
use std::time::Instant;
use support::*;
use tpa::analyzer::{check_realizable, induce, model_for, parse_attacks, replay, search, witness_topology, Model, Verdict};
use tpa::process::parse_spec;
use tpa::sim::{self, RandomScheduler};

const SEEDS_PER_TOPOLOGY: u64 = 20;

fn bounds() -> BTreeMap<String, u32> {
    BTreeMap::from([("verifier".into(), 1), ("prover".into(), 1), ("forward".into(), 3)])
}

#[test]
fn concrete_runs_induce_successful_symbolic_traces() {
    let spec = parse_spec(BRANDS_CHAUM).unwrap();
    let t = Instant::now();
    let mut runs = 0;
    let mut recvs = 0;
    for topo_seed in 1..=5 {
        let topo = random_topology(topo_seed);
        for seed in 0..SEEDS_PER_TOPOLOGY {
            let mut sched = RandomScheduler::new(topo_seed * 1000 + seed, bounds(), 0);
            let trace = sim::run(&spec, &topo, &mut sched, 120).unwrap();
            let (st, w) = induce(&spec, &topo, &trace).unwrap_or_else(|e| panic!("{}: {e}", topo.name));
            let model = Model::new(&spec, tpa::analyzer::agents_of(&topo, &spec));
            let all = model.base.union(&st.constraints);
            assert_eq!(all.holds_in(&w), Some(true), "{} seed {seed}", topo.name);
            assert!(check_realizable(&st.log, &all), "{} seed {seed}", topo.name);
            runs += 1;
            recvs += trace.labels().filter(|l| matches!(l.action, sim::Action::Recv(_))).count();
        }
    }
    eprintln!("{runs} runs with {recvs} receptions in {:?}", t.elapsed());
    assert!(recvs > runs);
}

#[test]
fn attack_witnesses_replay_concretely() {
    let spec = parse_spec(BRANDS_CHAUM).unwrap();
    let mut replayed = 0;
    for p in parse_attacks(BRANDS_CHAUM_ATTACKS).unwrap() {
        let Verdict::AttackFound { witness, state, .. } = search(&spec, &p, &p.bounds) else { continue };
        let model = model_for(&spec, &p);
        let topo = witness_topology(&spec, &model.agents, &witness).unwrap();
        let trace = replay(&spec, &topo, &state, 200).unwrap_or_else(|e| panic!("{}: {e}", p.name));
        assert!(trace.labels().count() >= state.log.len() - state.procs.len(), "{}", p.name);
        replayed += 1;
    }
    assert!(replayed > 0);
}
