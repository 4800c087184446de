//! Message terms, the four variable kinds, substitutions, normalization and matching.
//!
//! Normal forms: `;` is flattened (associative), `⊕` operands are flattened, sorted,
//! pairwise cancelled and stripped of the unit `0`, and `open(N,S,commit(N,S))` becomes
//! `true`. Matching is syntactic on normal forms except under `;` (associative) and `⊕`
//! (associative-commutative with unit and nilpotence).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub const ZERO: &str = "0";
pub const TRUE: &str = "true";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarKind {
    Fresh,
    Choice,
    Pattern,
    Time,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub name: String,
    pub kind: VarKind,
}

impl Var {
    pub fn new(name: impl Into<String>, kind: VarKind) -> Var {
        Var { name: name.into(), kind }
    }
    pub fn fresh(name: impl Into<String>) -> Var {
        Var::new(name, VarKind::Fresh)
    }
    pub fn choice(name: impl Into<String>) -> Var {
        Var::new(name, VarKind::Choice)
    }
    pub fn pattern(name: impl Into<String>) -> Var {
        Var::new(name, VarKind::Pattern)
    }
    pub fn time(name: impl Into<String>) -> Var {
        Var::new(name, VarKind::Time)
    }

    /// Variables a matcher may bind. Fresh variables behave as constants once renamed.
    pub fn is_bindable(&self) -> bool {
        matches!(self.kind, VarKind::Pattern | VarKind::Choice)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            VarKind::Fresh => write!(f, "#{}", self.name),
            VarKind::Choice => write!(f, "{}?", self.name),
            VarKind::Pattern => write!(f, "{}", self.name),
            VarKind::Time => write!(f, "${}", self.name),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    /// Agent names, role names, `0` and `true`.
    Const(String),
    Var(Var),
    /// Constructor application, including `n`, `s`, `commit`, `open` and `sign`.
    App(String, Vec<Term>),
    Concat(Vec<Term>),
    Xor(Vec<Term>),
}

impl Term {
    pub fn constant(name: impl Into<String>) -> Term {
        Term::Const(name.into())
    }
    pub fn var(v: Var) -> Term {
        Term::Var(v)
    }
    pub fn app(f: impl Into<String>, args: Vec<Term>) -> Term {
        Term::App(f.into(), args)
    }
    pub fn zero() -> Term {
        Term::Const(ZERO.into())
    }
    pub fn truth() -> Term {
        Term::Const(TRUE.into())
    }
    pub fn nonce(agent: Term, fresh: Term) -> Term {
        Term::app("n", vec![agent, fresh])
    }
    pub fn secret(agent: Term, fresh: Term) -> Term {
        Term::app("s", vec![agent, fresh])
    }
    pub fn commit(n: Term, s: Term) -> Term {
        Term::app("commit", vec![n, s])
    }
    pub fn open(n: Term, s: Term, c: Term) -> Term {
        Term::app("open", vec![n, s, c])
    }
    pub fn sign(agent: Term, m: Term) -> Term {
        Term::app("sign", vec![agent, m])
    }
    pub fn concat(a: Term, b: Term) -> Term {
        Term::Concat(vec![a, b])
    }
    pub fn xor(a: Term, b: Term) -> Term {
        Term::Xor(vec![a, b])
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Term::Const(c) if c == ZERO)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Const(_) => {}
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::App(_, xs) | Term::Concat(xs) | Term::Xor(xs) => {
                for x in xs {
                    x.collect_vars(out);
                }
            }
        }
    }

    /// No pattern, choice or time variables. Fresh variables count as names.
    pub fn is_ground(&self) -> bool {
        self.vars().iter().all(|v| v.kind == VarKind::Fresh)
    }

    pub fn subterms(&self) -> Vec<Term> {
        let mut out = vec![self.clone()];
        if let Term::App(_, xs) | Term::Concat(xs) | Term::Xor(xs) = self {
            for x in xs {
                out.extend(x.subterms());
            }
        }
        out
    }

    pub fn map_vars(&self, f: &mut impl FnMut(&Var) -> Term) -> Term {
        match self {
            Term::Const(_) => self.clone(),
            Term::Var(v) => f(v),
            Term::App(g, xs) => Term::App(g.clone(), xs.iter().map(|x| x.map_vars(f)).collect()),
            Term::Concat(xs) => Term::Concat(xs.iter().map(|x| x.map_vars(f)).collect()),
            Term::Xor(xs) => Term::Xor(xs.iter().map(|x| x.map_vars(f)).collect()),
        }
    }
}

fn xor_operands(t: &Term) -> Vec<Term> {
    match t {
        Term::Xor(xs) => xs.clone(),
        t if t.is_zero() => vec![],
        t => vec![t.clone()],
    }
}

fn concat_items(t: &Term) -> Vec<Term> {
    match t {
        Term::Concat(xs) => xs.clone(),
        t => vec![t.clone()],
    }
}

/// Builds the normal form of an XOR of already-normalized operands.
fn xor_of(items: Vec<Term>) -> Term {
    let mut flat: Vec<Term> = items.iter().flat_map(xor_operands).collect();
    flat.sort();
    let mut out: Vec<Term> = Vec::with_capacity(flat.len());
    for t in flat {
        if out.last() == Some(&t) {
            out.pop();
        } else {
            out.push(t);
        }
    }
    match out.len() {
        0 => Term::zero(),
        1 => out.pop().unwrap(),
        _ => Term::Xor(out),
    }
}

fn concat_of(items: Vec<Term>) -> Term {
    let mut flat: Vec<Term> = items.iter().flat_map(concat_items).collect();
    if flat.len() == 1 {
        flat.pop().unwrap()
    } else {
        Term::Concat(flat)
    }
}

pub fn normalize(t: &Term) -> Term {
    match t {
        Term::Const(_) | Term::Var(_) => t.clone(),
        Term::App(f, xs) => {
            let xs: Vec<Term> = xs.iter().map(normalize).collect();
            if f == "open" && xs.len() == 3 && xs[2] == Term::commit(xs[0].clone(), xs[1].clone()) {
                return Term::truth();
            }
            Term::App(f.clone(), xs)
        }
        Term::Concat(xs) => concat_of(xs.iter().map(normalize).collect()),
        Term::Xor(xs) => xor_of(xs.iter().map(normalize).collect()),
    }
}

/// Finite map from variables to terms.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subst(BTreeMap<Var, Term>);

impl Subst {
    pub fn new() -> Subst {
        Subst::default()
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.0.get(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.0.iter()
    }

    pub fn domain(&self) -> BTreeSet<Var> {
        self.0.keys().cloned().collect()
    }

    /// Adds `v ↦ t`, keeping the map idempotent. Refuses to bind a fresh variable to
    /// anything but a fresh variable.
    pub fn bind(&mut self, v: Var, t: Term) -> bool {
        if v.kind == VarKind::Fresh && !matches!(&t, Term::Var(w) if w.kind == VarKind::Fresh) {
            return false;
        }
        let t = self.apply(&t);
        if t.vars().contains(&v) {
            return false;
        }
        let single = Subst(BTreeMap::from([(v.clone(), t.clone())]));
        for val in self.0.values_mut() {
            *val = single.apply(val);
        }
        self.0.insert(v, t);
        true
    }

    /// Homomorphic replacement followed by normalization.
    pub fn apply(&self, t: &Term) -> Term {
        if self.0.is_empty() {
            return normalize(t);
        }
        normalize(&t.map_vars(&mut |v| self.0.get(v).cloned().unwrap_or_else(|| Term::Var(v.clone()))))
    }

    /// Union of two substitutions that agree on their common domain.
    pub fn merge(&self, other: &Subst) -> Option<Subst> {
        let mut out = self.clone();
        for (v, t) in other.iter() {
            match out.get(v) {
                Some(u) if normalize(u) != normalize(t) => return None,
                Some(_) => {}
                None => {
                    if !out.bind(v.clone(), t.clone()) {
                        return None;
                    }
                }
            }
        }
        Some(out)
    }
}

impl FromIterator<(Var, Term)> for Subst {
    fn from_iter<I: IntoIterator<Item = (Var, Term)>>(iter: I) -> Self {
        let mut s = Subst::new();
        for (v, t) in iter {
            s.bind(v, t);
        }
        s
    }
}

impl fmt::Display for Subst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, t)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v} ↦ {t}")?;
        }
        write!(f, "}}")
    }
}

pub fn apply(s: &Subst, t: &Term) -> Term {
    s.apply(t)
}

/// Renames every fresh variable `f` to `f@role.instance`.
pub fn fresh_rename(t: &Term, role: &str, instance: u32) -> Term {
    t.map_vars(&mut |v| {
        if v.kind == VarKind::Fresh {
            Term::Var(Var::fresh(format!("{}@{}.{}", v.name, role, instance)))
        } else {
            Term::Var(v.clone())
        }
    })
}

/// First solution of `match_all`, if any.
pub fn match_term(pattern: &Term, ground: &Term) -> Option<Subst> {
    match_all(pattern, ground).into_iter().next()
}

/// Every substitution σ over the pattern's variables with `normalize(pσ) = ground`
/// found by associative matching under `;` and AC matching with unit and nilpotence
/// under `⊕`. The bindings of an XOR pattern's bare variables range over sub-XORs of the
/// unmatched ground operands; cancellations between pattern and ground are not invented.
pub fn match_all(pattern: &Term, ground: &Term) -> Vec<Subst> {
    match_with(pattern, ground, &Subst::new())
}

/// As `match_all`, extending an existing substitution.
pub fn match_with(pattern: &Term, ground: &Term, s: &Subst) -> Vec<Subst> {
    let p = normalize(pattern);
    let g = normalize(ground);
    let mut out: Vec<Subst> = Vec::new();
    for sol in m(&p, &g, s.clone()) {
        if sol.apply(&p) == g && !out.contains(&sol) {
            out.push(sol);
        }
    }
    out
}

fn m(p: &Term, g: &Term, s: Subst) -> Vec<Subst> {
    match p {
        Term::Var(v) if v.is_bindable() => match s.get(v) {
            Some(val) => {
                if normalize(val) == *g {
                    vec![s]
                } else {
                    vec![]
                }
            }
            None => {
                let mut s = s;
                if s.bind(v.clone(), g.clone()) {
                    vec![s]
                } else {
                    vec![]
                }
            }
        },
        Term::Var(_) | Term::Const(_) => {
            if p == g {
                vec![s]
            } else {
                vec![]
            }
        }
        Term::App(f, ps) => match g {
            Term::App(h, gs) if f == h && ps.len() == gs.len() => {
                let mut acc = vec![s];
                for (pi, gi) in ps.iter().zip(gs) {
                    let mut next = Vec::new();
                    for s in acc {
                        let pi = s.apply(pi);
                        next.extend(m(&pi, gi, s));
                    }
                    acc = next;
                    if acc.is_empty() {
                        break;
                    }
                }
                acc
            }
            _ => vec![],
        },
        Term::Concat(ps) => match_seq(ps, &concat_items(g), s),
        Term::Xor(ps) => match_xor(ps.clone(), xor_operands(g), s),
    }
}

fn unbound_var<'a>(t: &'a Term, s: &Subst) -> Option<&'a Var> {
    match t {
        Term::Var(v) if v.is_bindable() && s.get(v).is_none() => Some(v),
        _ => None,
    }
}

fn match_seq(ps: &[Term], gs: &[Term], s: Subst) -> Vec<Subst> {
    if ps.is_empty() {
        return if gs.is_empty() { vec![s] } else { vec![] };
    }
    if gs.len() < ps.len() {
        return vec![];
    }
    if ps.len() == 1 {
        let p = s.apply(&ps[0]);
        return m(&p, &concat_of(gs.to_vec()), s);
    }
    let p0 = s.apply(&ps[0]);
    let mut out = Vec::new();
    if unbound_var(&p0, &s).is_some() {
        for k in 1..=gs.len() - (ps.len() - 1) {
            for s2 in m(&p0, &concat_of(gs[..k].to_vec()), s.clone()) {
                out.extend(match_seq(&ps[1..], &gs[k..], s2));
            }
        }
    } else {
        // A bound variable may stand for several items of the sequence.
        let items = concat_items(&p0);
        if items.len() > 1 {
            if items.len() <= gs.len() && items[..] == gs[..items.len()] {
                out.extend(match_seq(&ps[1..], &gs[items.len()..], s));
            }
        } else {
            for s2 in m(&p0, &gs[0], s) {
                out.extend(match_seq(&ps[1..], &gs[1..], s2));
            }
        }
    }
    out
}

fn match_xor(ps: Vec<Term>, gs: Vec<Term>, s: Subst) -> Vec<Subst> {
    let mut ground_side = gs;
    let mut vars: Vec<Var> = Vec::new();
    let mut structured: Vec<Term> = Vec::new();
    for p in &ps {
        let p = s.apply(p);
        if p.is_ground() {
            ground_side.push(p);
        } else if let Some(v) = unbound_var(&p, &s) {
            vars.push(v.clone());
        } else {
            structured.push(p);
        }
    }
    let g = xor_operands(&xor_of(ground_side));
    if let Some((n, rest)) = structured.split_first() {
        let mut out = Vec::new();
        for j in 0..g.len() {
            for s2 in m(n, &g[j], s.clone()) {
                let mut remaining_p: Vec<Term> = rest.to_vec();
                remaining_p.extend(vars.iter().cloned().map(Term::Var));
                let mut remaining_g = g.clone();
                remaining_g.remove(j);
                out.extend(match_xor(remaining_p, remaining_g, s2));
            }
        }
        return out;
    }
    match vars.len() {
        0 => {
            if g.is_empty() {
                vec![s]
            } else {
                vec![]
            }
        }
        1 => {
            let mut s = s;
            if s.bind(vars[0].clone(), xor_of(g)) {
                vec![s]
            } else {
                vec![]
            }
        }
        k => {
            // Distribute the leftover ground operands over the variables.
            let mut out = Vec::new();
            let total = k.checked_pow(g.len() as u32).unwrap_or(usize::MAX).min(1 << 16);
            for code in 0..total {
                let mut buckets: Vec<Vec<Term>> = vec![Vec::new(); k];
                let mut c = code;
                for item in &g {
                    buckets[c % k].push(item.clone());
                    c /= k;
                }
                let mut s2 = s.clone();
                let ok = vars
                    .iter()
                    .zip(buckets)
                    .all(|(v, b)| s2.bind(v.clone(), xor_of(b)));
                if ok {
                    out.push(s2);
                }
            }
            out
        }
    }
}

fn needs_parens_in_xor(t: &Term) -> bool {
    matches!(t, Term::Xor(_) | Term::Concat(_))
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) => write!(f, "{c}"),
            Term::Var(v) => write!(f, "{v}"),
            Term::App(g, xs) => {
                write!(f, "{g}(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            Term::Concat(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ; ")?;
                    }
                    // `;` associates to the right, so only a nested left item needs parentheses.
                    if matches!(x, Term::Concat(_)) && i + 1 < xs.len() {
                        write!(f, "({x})")?;
                    } else {
                        write!(f, "{x}")?;
                    }
                }
                Ok(())
            }
            Term::Xor(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ⊕ ")?;
                    }
                    if needs_parens_in_xor(x) {
                        write!(f, "({x})")?;
                    } else {
                        write!(f, "{x}")?;
                    }
                }
                Ok(())
            }
        }
    }
}
