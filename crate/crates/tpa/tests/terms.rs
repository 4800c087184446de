use proptest::prelude::*;
use std::collections::BTreeSet;
use tpa::term::{match_all, normalize, Subst, Term, Var};

fn c(s: &str) -> Term {
    Term::constant(s)
}

fn ground_leaf() -> impl Strategy<Value = Term> {
    prop_oneof![
        Just(c("a")),
        Just(c("b")),
        Just(c("c")),
        Just(Term::zero()),
        Just(Term::nonce(c("v"), c("k1"))),
        Just(Term::nonce(c("p"), c("k2"))),
    ]
}

fn grow(leaf: BoxedStrategy<Term>, depth: u32) -> BoxedStrategy<Term> {
    leaf.prop_recursive(depth, 12, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|t| Term::app("h", vec![t])),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Term::commit(x, y)),
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Term::Concat),
            prop::collection::vec(inner, 2..=3).prop_map(Term::Xor),
        ]
    })
    .boxed()
}

fn ground() -> BoxedStrategy<Term> {
    grow(ground_leaf().boxed(), 3)
}

fn pattern() -> BoxedStrategy<Term> {
    let var = prop_oneof![Just("X"), Just("Y"), Just("Z")].prop_map(|n| Term::Var(Var::pattern(n)));
    grow(prop_oneof![2 => ground_leaf(), 1 => var].boxed(), 2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn normalize_is_idempotent(t in ground()) {
        let n = normalize(&t);
        prop_assert_eq!(normalize(&n), n);
    }

    #[test]
    fn xor_laws(x in ground(), y in ground(), z in ground()) {
        let n = |t: Term| normalize(&t);
        prop_assert_eq!(n(Term::xor(x.clone(), x.clone())), Term::zero());
        prop_assert_eq!(n(Term::xor(x.clone(), Term::zero())), n(x.clone()));
        prop_assert_eq!(n(Term::xor(x.clone(), y.clone())), n(Term::xor(y.clone(), x.clone())));
        prop_assert_eq!(
            n(Term::xor(Term::xor(x.clone(), y.clone()), z.clone())),
            n(Term::xor(x.clone(), Term::xor(y.clone(), z.clone())))
        );
        prop_assert_eq!(n(Term::xor(Term::xor(x.clone(), y.clone()), y)), n(x));
    }

    #[test]
    fn concat_is_associative(x in ground(), y in ground(), z in ground()) {
        prop_assert_eq!(
            normalize(&Term::concat(Term::concat(x.clone(), y.clone()), z.clone())),
            normalize(&Term::concat(x, Term::concat(y, z)))
        );
    }

    #[test]
    fn normal_forms_are_shared_by_equal_terms(x in ground(), y in ground()) {
        // x ⊕ y ⊕ y and x differ syntactically but not modulo the theory.
        let a = Term::app("h", vec![Term::Xor(vec![x.clone(), y.clone(), y])]);
        prop_assert_eq!(normalize(&a), normalize(&Term::app("h", vec![x])));
    }
}

/// Normalization without cancellation: flattening, unit removal and sorting only.
fn flat(t: &Term) -> Term {
    match t {
        Term::Const(_) | Term::Var(_) => t.clone(),
        Term::App(f, xs) => Term::App(f.clone(), xs.iter().map(flat).collect()),
        Term::Concat(xs) => {
            let mut out = Vec::new();
            for x in xs.iter().map(flat) {
                match x {
                    Term::Concat(ys) => out.extend(ys),
                    x => out.push(x),
                }
            }
            if out.len() == 1 { out.pop().unwrap() } else { Term::Concat(out) }
        }
        Term::Xor(xs) => {
            let mut out = Vec::new();
            for x in xs.iter().map(flat) {
                match x {
                    Term::Xor(ys) => out.extend(ys),
                    x if x.is_zero() => {}
                    x => out.push(x),
                }
            }
            out.sort();
            match out.len() {
                0 => Term::zero(),
                1 => out.pop().unwrap(),
                _ => Term::Xor(out),
            }
        }
    }
}

fn collect(t: &Term, out: &mut BTreeSet<Term>) {
    out.insert(t.clone());
    match t {
        Term::App(_, xs) => xs.iter().for_each(|x| collect(x, out)),
        Term::Concat(xs) => {
            for i in 0..xs.len() {
                for j in i + 1..=xs.len() {
                    out.insert(normalize(&Term::Concat(xs[i..j].to_vec())));
                }
            }
            xs.iter().for_each(|x| collect(x, out));
        }
        Term::Xor(xs) => {
            for mask in 0u32..(1 << xs.len()) {
                let pick = (0..xs.len()).filter(|k| mask & (1 << k) != 0).map(|k| xs[k].clone()).collect();
                out.insert(normalize(&Term::Xor(pick)));
            }
            xs.iter().for_each(|x| collect(x, out));
        }
        _ => {}
    }
}

/// Every substitution into pieces of `g` whose instance of `p` equals `g` with no
/// cancellation.
fn brute_force(p: &Term, g: &Term) -> BTreeSet<Subst> {
    let mut pieces = BTreeSet::from([Term::zero()]);
    collect(g, &mut pieces);
    let pieces: Vec<Term> = pieces.into_iter().collect();
    let vars: Vec<Var> = p.vars().into_iter().collect();
    let mut clean = BTreeSet::new();
    let mut idx = vec![0usize; vars.len()];
    loop {
        let s: Subst = vars.iter().cloned().zip(idx.iter().map(|&i| pieces[i].clone())).collect();
        if flat(&raw(p, &s)) == *g {
            clean.insert(s);
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return clean;
            }
            idx[k] += 1;
            if idx[k] < pieces.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// The instance of `p` under `s` before normalization.
fn raw(p: &Term, s: &Subst) -> Term {
    p.map_vars(&mut |v| s.get(v).cloned().unwrap_or_else(|| Term::Var(v.clone())))
}

fn instance(p: &Term, vals: &[Term]) -> Term {
    let names = ["X", "Y", "Z"];
    p.map_vars(&mut |v| names.iter().position(|n| *n == v.name).map_or_else(|| Term::Var(v.clone()), |i| vals[i].clone()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn matcher_agrees_with_brute_force(
        p in pattern(),
        vals in prop::collection::vec(grow(ground_leaf().boxed(), 1), 3),
        other in ground(),
        hit in any::<bool>(),
    ) {
        let g = normalize(&if hit { instance(&p, &vals) } else { other });
        // Matching is against the pattern's normal form, where `X ⊕ X` has no variables.
        let p = normalize(&p);
        let got: BTreeSet<Subst> = match_all(&p, &g).into_iter().collect();
        let clean = brute_force(&p, &g);
        for s in &got {
            prop_assert_eq!(normalize(&s.apply(&p)), g.clone(), "{} {}", p, s);
            prop_assert_eq!(s.domain(), p.vars(), "{} {}", p, s);
        }
        for s in got.iter().filter(|s| flat(&raw(&p, s)) == g) {
            prop_assert!(clean.contains(s), "{} {}", p, s);
        }
        prop_assert!(clean.is_subset(&got), "{} against {}: missed {:?}", p, g, clean.difference(&got).collect::<Vec<_>>());
    }
}
