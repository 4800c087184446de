use std::time::Instant;
use tpa::analyzer::search;
use tpa::constraints::{parse_constraint_set, q};
use tpa::library::{brands_chaum, meadows_variants, scenario, Expected, Scenario, SCENARIOS};
use tpa::process::wf;

fn reproduces_expected(s: &Scenario) {
    for p in &s.patterns {
        let want = s.expected[&p.name];
        let t = Instant::now();
        let v = search(&s.spec, p, &p.bounds);
        eprintln!("{} {}: {} after {} states in {:?}", s.name, p.name, v.name(), v.explored(), t.elapsed());
        assert_eq!(v.name(), want.name(), "{} {}", s.name, p.name);
    }
}

#[test]
fn brands_chaum_verdicts() {
    reproduces_expected(&brands_chaum());
}

#[test]
fn meadows_xor_verdicts() {
    reproduces_expected(&meadows_variants().0);
}

#[test]
fn meadows_id_verdicts() {
    reproduces_expected(&meadows_variants().1);
}

#[test]
fn every_shipped_role_is_well_formed() {
    for name in SCENARIOS {
        let s = scenario(name).unwrap();
        assert_eq!(s.name, *name);
        for r in &s.spec.roles {
            assert!(wf(&r.body), "{name}: {}", r.name);
        }
        assert_eq!(s.expected.len(), s.patterns.len(), "{name}");
        for p in &s.patterns {
            assert!(s.expected.contains_key(&p.name), "{name}: {}", p.name);
        }
    }
}

#[test]
fn brands_chaum_contents() {
    let s = brands_chaum();
    assert!(!s.reconstructed);
    let names: Vec<&str> = s.spec.roles.iter().map(|r| r.name.as_str()).collect();
    assert_eq!(names, ["verifier", "prover", "forward", "conc", "deconc", "sign"]);
    let verifier = s.spec.roles[0].body.to_string();
    assert!(verifier.contains("open(N_P,S_P,Commit)"), "{verifier}");
    assert!(verifier.contains("$t3 ⊖ $t2 ≤ 2*d"), "{verifier}");
    let mafia = &s.pattern("mafia").unwrap().smt;
    for c in parse_constraint_set("d(v,i) <= d ; d(v,p) > d").unwrap().iter() {
        assert!(mafia.contains(c), "{c} not in {mafia}");
    }
    assert_eq!(s.pattern("hijacking").unwrap().smt, parse_constraint_set("d(v,i) > d ; d(v,p) <= d").unwrap());
    assert_eq!(s.expected["hijacking"], Expected::AttackFound);
    let topo = s.topology("mafia-demo").unwrap();
    assert_eq!(topo.consts["d"], q(1));
    assert_eq!(topo.dist("p", "v"), q(2));
    assert_eq!(topo.dist("v", "i"), q(1));
    assert_eq!(topo.dist("p", "i"), q(1));
}

#[test]
fn meadows_variants_are_marked_reconstructed() {
    let (a, b) = meadows_variants();
    assert!(a.reconstructed && b.reconstructed);
    assert_eq!(a.expected["hijacking"], Expected::NoAttack);
    assert_eq!(b.expected["hijacking"], Expected::AttackFound);
    assert!(a.expected["mafia"] == Expected::NoAttack && b.expected["mafia"] == Expected::NoAttack);
    assert!(scenario("no-such-protocol").is_none());
}
