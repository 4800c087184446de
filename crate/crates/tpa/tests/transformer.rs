mod support;

use std::collections::BTreeSet;
use support::listings::*;
use support::{alpha_eq, BRANDS_CHAUM};
use tpa::process::{parse_proc, parse_spec, LabeledProc};
use tpa::term::{Term, Var, VarKind};
use tpa::transform::{render_role_strands, render_strand, tpa2pa, tpa2pa_star, transform_spec, UItem, URole};

fn roles() -> Vec<URole> {
    transform_spec(&parse_spec(BRANDS_CHAUM).unwrap())
}

fn role(name: &str) -> URole {
    roles().into_iter().find(|r| r.name == name).unwrap()
}

#[test]
fn honest_roles_match_the_untimed_listing() {
    for (name, want) in [("verifier", VERIFIER_UNTIMED), ("prover", PROVER_UNTIMED)] {
        let got = role(name).body.to_string();
        assert!(alpha_eq(&got, want), "{name}:\n{got}");
    }
}

#[test]
fn intruder_capabilities_match_the_untimed_listing() {
    for (name, want) in [("forward", FORWARD_UNTIMED), ("conc", CONC_UNTIMED)] {
        let got = role(name).body.to_string();
        assert!(alpha_eq(&got, want), "{name}:\n{got}");
    }
}

#[test]
fn strands_match_the_listing() {
    for (name, want) in [("verifier", VERIFIER_STRAND), ("prover", PROVER_STRAND)] {
        let got = render_role_strands(&role(name));
        assert!(alpha_eq(&got, want), "{name}:\n{got}");
    }
}

#[test]
fn every_recv_is_followed_by_its_guard() {
    fn check(items: &[UItem]) {
        for (k, it) in items.iter().enumerate() {
            match it {
                UItem::Recv { .. } => {
                    assert!(matches!(items.get(k + 1), Some(UItem::If { guard: true, .. })), "{it}")
                }
                UItem::If { then, otherwise, .. } | UItem::Choice(then, otherwise) => {
                    check(&then.0);
                    check(&otherwise.0);
                }
                UItem::Send { .. } => {}
            }
        }
    }
    for r in roles() {
        check(&r.body.0);
    }
}

#[test]
fn introduced_variables_are_fresh() {
    let spec = parse_spec(BRANDS_CHAUM).unwrap();
    for (src, u) in spec.roles.iter().zip(roles()) {
        let introduced = u.body.introduced_vars();
        let names: BTreeSet<&str> = introduced.iter().map(|v| v.name.as_str()).collect();
        assert_eq!(names.len(), introduced.len(), "{}", u.name);
        for v in src.body.vars() {
            if v.kind != VarKind::Time {
                assert!(!names.contains(v.name.as_str()), "{} reuses {v}", u.name);
            }
        }
        assert_eq!(u.body.skeleton().messages(), src.body.messages());
    }
}

#[test]
fn small_cases() {
    let me = Term::Var(Var::choice("R"));
    assert_eq!(render_strand(&tpa2pa_star(&parse_proc("nilP").unwrap(), &me, &BTreeSet::new())), "[ nil ]");
    let u = tpa2pa_star(&parse_proc("+(m @ $t1) . -(M @ $t2)").unwrap(), &me, &BTreeSet::new());
    assert!(matches!(u.0.as_slice(), [UItem::Send { .. }, UItem::Recv { .. }, UItem::If { guard: true, .. }]));
    let cfg = vec![LabeledProc { role: "r".into(), instance: 1, step: 1, body: parse_proc("+(m @ $t1)").unwrap() }];
    assert_eq!(tpa2pa(&cfg).len(), 1);
    assert!(tpa2pa(&[]).is_empty());
}
