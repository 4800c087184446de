//! Linear real arithmetic over time variables and symbolic distances, with monus.
//!
//! Atoms are named real variables (time variables, the neighbourhood bound `d`, ...),
//! distance atoms `d(A,B)` over participant names, and monus atoms `x ⊖ y`. Distance atoms
//! are canonicalized to an ordered pair and `d(A,A)` folds to `0`.

mod fm;
mod parse;
mod smt;

pub use fm::{is_satisfiable, EliminationOrder, SatResult, Solver, SolverError};
pub use parse::{
    parse_constraint, parse_constraint_set, parse_constraints_until_brace, parse_lin_constraint, parse_lin_expr,
    parse_lin_expr_str, rel_of,
};
pub use smt::{export_smtlib, smt_symbol};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `3`, `-2`, `2.5`, `1/3`.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().ok()?;
        let b: BigInt = b.trim().parse().ok()?;
        if b.is_zero() {
            return None;
        }
        return Some(Q::new(a, b));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let int_part: BigInt = if int == "-" || int.is_empty() { BigInt::zero() } else { int.parse().ok()? };
        let frac_part: BigInt = frac.parse().ok()?;
        let scale = BigInt::from(10).pow(frac.len() as u32);
        let frac_q = Q::new(frac_part, scale);
        let base = Q::from_integer(int_part.abs());
        let v = base + frac_q;
        return Some(if neg { -v } else { v });
    }
    s.parse::<BigInt>().ok().map(Q::from_integer)
}

/// Rationals print as integers or `a/b`.
pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Var(String),
    Dist(String, String),
    Monus(Box<LinExpr>, Box<LinExpr>),
}

impl Atom {
    pub fn var(name: impl Into<String>) -> Atom {
        Atom::Var(name.into())
    }

    /// Canonical distance atom; `None` when both ends coincide.
    pub fn dist(a: &str, b: &str) -> Option<Atom> {
        match a.cmp(b) {
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Less => Some(Atom::Dist(a.to_string(), b.to_string())),
            std::cmp::Ordering::Greater => Some(Atom::Dist(b.to_string(), a.to_string())),
        }
    }

    pub fn is_dist(&self) -> bool {
        matches!(self, Atom::Dist(..))
    }

    pub fn is_monus(&self) -> bool {
        matches!(self, Atom::Monus(..))
    }
}

pub type Assignment = BTreeMap<Atom, Q>;

/// `constant + Σ coeff·atom`, zero coefficients never stored.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LinExpr {
    pub constant: Q,
    pub terms: BTreeMap<Atom, Q>,
}

impl LinExpr {
    pub fn zero() -> LinExpr {
        LinExpr::default()
    }

    pub fn constant(c: Q) -> LinExpr {
        LinExpr { constant: c, terms: BTreeMap::new() }
    }

    pub fn int(n: i64) -> LinExpr {
        LinExpr::constant(q(n))
    }

    pub fn atom(a: Atom) -> LinExpr {
        LinExpr { constant: Q::zero(), terms: BTreeMap::from([(a, Q::one())]) }
    }

    pub fn var(name: impl Into<String>) -> LinExpr {
        LinExpr::atom(Atom::var(name))
    }

    pub fn dist(a: &str, b: &str) -> LinExpr {
        match Atom::dist(a, b) {
            Some(at) => LinExpr::atom(at),
            None => LinExpr::zero(),
        }
    }

    /// `x ⊖ y`; evaluated on the spot when both sides are constants.
    pub fn monus(x: LinExpr, y: LinExpr) -> LinExpr {
        if x.is_constant() && y.is_constant() {
            let d = &x.constant - &y.constant;
            return LinExpr::constant(if d.is_positive() { d } else { Q::zero() });
        }
        LinExpr::atom(Atom::Monus(Box::new(x), Box::new(y)))
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, a: &Atom) -> Q {
        self.terms.get(a).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add_term(&mut self, a: Atom, c: Q) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(a.clone()).or_insert_with(Q::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&a);
        }
    }

    pub fn scale(&self, k: &Q) -> LinExpr {
        if k.is_zero() {
            return LinExpr::zero();
        }
        LinExpr {
            constant: &self.constant * k,
            terms: self.terms.iter().map(|(a, c)| (a.clone(), c * k)).collect(),
        }
    }

    /// Top-level atoms, monus atoms included.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        self.terms.keys().cloned().collect()
    }

    /// Variables and distances at any depth, monus atoms excluded.
    pub fn base_atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        for a in self.terms.keys() {
            match a {
                Atom::Monus(x, y) => {
                    out.extend(x.base_atoms());
                    out.extend(y.base_atoms());
                }
                a => {
                    out.insert(a.clone());
                }
            }
        }
        out
    }

    pub fn has_monus(&self) -> bool {
        self.terms.keys().any(Atom::is_monus)
    }

    /// Replaces atoms for which `f` answers, recursing into monus arguments. Monus atoms
    /// whose arguments become constant are evaluated.
    pub fn substitute(&self, f: &dyn Fn(&Atom) -> Option<LinExpr>) -> LinExpr {
        let mut out = LinExpr::constant(self.constant.clone());
        for (a, c) in &self.terms {
            let replaced = match a {
                Atom::Monus(x, y) => match f(a) {
                    Some(e) => e,
                    None => LinExpr::monus(x.substitute(f), y.substitute(f)),
                },
                _ => f(a).unwrap_or_else(|| LinExpr::atom(a.clone())),
            };
            out = out + replaced.scale(c);
        }
        out
    }

    /// Replaces every occurrence of one atom.
    pub fn replace(&self, target: &Atom, by: &LinExpr) -> LinExpr {
        self.substitute(&|a| if a == target { Some(by.clone()) } else { None })
    }

    /// Exact value, or `None` if some atom is unassigned.
    pub fn eval(&self, env: &dyn Fn(&Atom) -> Option<Q>) -> Option<Q> {
        let mut acc = self.constant.clone();
        for (a, c) in &self.terms {
            let v = match a {
                Atom::Monus(x, y) => {
                    let d = x.eval(env)? - y.eval(env)?;
                    if d.is_positive() {
                        d
                    } else {
                        Q::zero()
                    }
                }
                a => env(a)?,
            };
            acc += c * v;
        }
        Some(acc)
    }

    pub fn eval_in(&self, w: &Assignment) -> Option<Q> {
        self.eval(&|a| w.get(a).cloned())
    }

    /// Renders with a custom spelling for named variables.
    pub fn render(&self, name: &dyn Fn(&str) -> String) -> String {
        let mut parts: Vec<(bool, String)> = Vec::new();
        for (a, c) in &self.terms {
            let body = render_atom(a, name);
            let neg = c.is_negative();
            let mag = c.abs();
            let text = if mag.is_one() { body } else { format!("{}*{}", fmt_q(&mag), wrap_if_sum(&body)) };
            parts.push((neg, text));
        }
        if !self.constant.is_zero() || parts.is_empty() {
            parts.push((self.constant.is_negative(), fmt_q(&self.constant.abs())));
        }
        let mut out = String::new();
        for (i, (neg, text)) in parts.iter().enumerate() {
            if i == 0 {
                if *neg {
                    out.push('-');
                }
            } else {
                out.push_str(if *neg { " - " } else { " + " });
            }
            out.push_str(text);
        }
        out
    }
}

fn wrap_if_sum(s: &str) -> String {
    if s.contains(' ') {
        format!("({s})")
    } else {
        s.to_string()
    }
}

fn render_atom(a: &Atom, name: &dyn Fn(&str) -> String) -> String {
    match a {
        Atom::Var(v) => name(v),
        Atom::Dist(x, y) => format!("d({},{})", name(x), name(y)),
        Atom::Monus(x, y) => {
            let xs = x.render(name);
            let ys = y.render(name);
            format!("{} ⊖ {}", wrap_if_sum(&xs), wrap_if_sum(&ys))
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", render_atom(self, &|s| s.to_string()))
    }
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(&|s| s.to_string()))
    }
}

impl Add for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: LinExpr) -> LinExpr {
        self.constant += rhs.constant;
        for (a, c) in rhs.terms {
            self.add_term(a, c);
        }
        self
    }
}

impl Sub for LinExpr {
    type Output = LinExpr;
    fn sub(self, rhs: LinExpr) -> LinExpr {
        self + rhs.scale(&-Q::one())
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self.scale(&-Q::one())
    }
}

impl Mul<&Q> for LinExpr {
    type Output = LinExpr;
    fn mul(self, k: &Q) -> LinExpr {
        self.scale(k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rel {
    Eq,
    Le,
    Lt,
    Ge,
    Gt,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Eq => "=",
            Rel::Le => "≤",
            Rel::Lt => "<",
            Rel::Ge => "≥",
            Rel::Gt => ">",
        }
    }

    pub fn ascii(self) -> &'static str {
        match self {
            Rel::Eq => "=",
            Rel::Le => "<=",
            Rel::Lt => "<",
            Rel::Ge => ">=",
            Rel::Gt => ">",
        }
    }

    pub fn holds(self, lhs: &Q, rhs: &Q) -> bool {
        match self {
            Rel::Eq => lhs == rhs,
            Rel::Le => lhs <= rhs,
            Rel::Lt => lhs < rhs,
            Rel::Ge => lhs >= rhs,
            Rel::Gt => lhs > rhs,
        }
    }
}

/// Relation of a constraint in `expr rel 0` form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NormRel {
    Eq,
    Le,
    Lt,
}

/// A constraint as written (`lhs rel rhs`). Solvers work on `normalized()`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinConstraint {
    pub lhs: LinExpr,
    pub rel: Rel,
    pub rhs: LinExpr,
}

impl LinConstraint {
    pub fn new(lhs: LinExpr, rel: Rel, rhs: LinExpr) -> LinConstraint {
        LinConstraint { lhs, rel, rhs }
    }
    pub fn eq(lhs: LinExpr, rhs: LinExpr) -> LinConstraint {
        LinConstraint::new(lhs, Rel::Eq, rhs)
    }
    pub fn le(lhs: LinExpr, rhs: LinExpr) -> LinConstraint {
        LinConstraint::new(lhs, Rel::Le, rhs)
    }
    pub fn lt(lhs: LinExpr, rhs: LinExpr) -> LinConstraint {
        LinConstraint::new(lhs, Rel::Lt, rhs)
    }
    pub fn ge(lhs: LinExpr, rhs: LinExpr) -> LinConstraint {
        LinConstraint::new(lhs, Rel::Ge, rhs)
    }
    pub fn gt(lhs: LinExpr, rhs: LinExpr) -> LinConstraint {
        LinConstraint::new(lhs, Rel::Gt, rhs)
    }

    /// `expr rel 0` with `≥`/`>` turned into `≤`/`<` by negation.
    pub fn normalized(&self) -> (LinExpr, NormRel) {
        let diff = self.lhs.clone() - self.rhs.clone();
        match self.rel {
            Rel::Eq => (diff, NormRel::Eq),
            Rel::Le => (diff, NormRel::Le),
            Rel::Lt => (diff, NormRel::Lt),
            Rel::Ge => (-diff, NormRel::Le),
            Rel::Gt => (-diff, NormRel::Lt),
        }
    }

    pub fn holds(&self, env: &dyn Fn(&Atom) -> Option<Q>) -> Option<bool> {
        Some(self.rel.holds(&self.lhs.eval(env)?, &self.rhs.eval(env)?))
    }

    pub fn holds_in(&self, w: &Assignment) -> Option<bool> {
        self.holds(&|a| w.get(a).cloned())
    }

    /// The negation as a disjunction of constraints.
    pub fn negate(&self) -> Vec<LinConstraint> {
        let (l, r) = (self.lhs.clone(), self.rhs.clone());
        match self.rel {
            Rel::Eq => vec![LinConstraint::lt(l.clone(), r.clone()), LinConstraint::gt(l, r)],
            Rel::Le => vec![LinConstraint::gt(l, r)],
            Rel::Lt => vec![LinConstraint::ge(l, r)],
            Rel::Ge => vec![LinConstraint::lt(l, r)],
            Rel::Gt => vec![LinConstraint::le(l, r)],
        }
    }

    pub fn substitute(&self, f: &dyn Fn(&Atom) -> Option<LinExpr>) -> LinConstraint {
        LinConstraint { lhs: self.lhs.substitute(f), rel: self.rel, rhs: self.rhs.substitute(f) }
    }

    pub fn has_monus(&self) -> bool {
        self.lhs.has_monus() || self.rhs.has_monus()
    }

    pub fn base_atoms(&self) -> BTreeSet<Atom> {
        let mut s = self.lhs.base_atoms();
        s.extend(self.rhs.base_atoms());
        s
    }

    pub fn render(&self, name: &dyn Fn(&str) -> String) -> String {
        format!("{} {} {}", self.lhs.render(name), self.rel.symbol(), self.rhs.render(name))
    }
}

impl fmt::Display for LinConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(&|s| s.to_string()))
    }
}

/// Ordered, append-only (per search branch) collection of constraints.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConstraintSet {
    items: Vec<LinConstraint>,
}

impl ConstraintSet {
    pub fn new() -> ConstraintSet {
        ConstraintSet::default()
    }

    pub fn from_vec(items: Vec<LinConstraint>) -> ConstraintSet {
        ConstraintSet { items }
    }

    pub fn push(&mut self, c: LinConstraint) {
        self.items.push(c);
    }

    pub fn extend(&mut self, cs: impl IntoIterator<Item = LinConstraint>) {
        self.items.extend(cs);
    }

    pub fn mark(&self) -> usize {
        self.items.len()
    }

    pub fn undo(&mut self, mark: usize) {
        self.items.truncate(mark);
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LinConstraint> {
        self.items.iter()
    }

    pub fn items(&self) -> &[LinConstraint] {
        &self.items
    }

    pub fn contains(&self, c: &LinConstraint) -> bool {
        self.items.contains(c)
    }

    pub fn has_monus(&self) -> bool {
        self.items.iter().any(LinConstraint::has_monus)
    }

    pub fn base_atoms(&self) -> BTreeSet<Atom> {
        self.items.iter().flat_map(LinConstraint::base_atoms).collect()
    }

    pub fn union(&self, other: &ConstraintSet) -> ConstraintSet {
        let mut out = self.clone();
        out.extend(other.items.iter().cloned());
        out
    }

    /// True iff every constraint evaluates to true; `None` if some atom is missing.
    pub fn holds_in(&self, w: &Assignment) -> Option<bool> {
        let mut all = true;
        for c in &self.items {
            all &= c.holds_in(w)?;
        }
        Some(all)
    }

    /// Disjunctive case split removing every monus atom. Each distinct `x ⊖ y` gives one
    /// branch with `y < x` and the atom replaced by `x − y`, and one with `y ≥ x` and the
    /// atom replaced by `0`.
    pub fn eliminate_monus(&self) -> Vec<ConstraintSet> {
        let Some((x, y)) = self.innermost_monus() else {
            return vec![self.clone()];
        };
        let atom = Atom::Monus(Box::new(x.clone()), Box::new(y.clone()));
        let split = |side: LinConstraint, value: LinExpr| {
            let mut items = vec![side];
            items.extend(self.items.iter().map(|c| c.substitute(&|a| (*a == atom).then(|| value.clone()))));
            ConstraintSet { items }
        };
        let positive = split(LinConstraint::lt(y.clone(), x.clone()), x.clone() - y.clone());
        let truncated = split(LinConstraint::ge(y, x), LinExpr::zero());
        let mut out = positive.eliminate_monus();
        out.extend(truncated.eliminate_monus());
        out
    }

    fn innermost_monus(&self) -> Option<(LinExpr, LinExpr)> {
        fn find(e: &LinExpr) -> Option<(LinExpr, LinExpr)> {
            for a in e.terms.keys() {
                if let Atom::Monus(x, y) = a {
                    return find(x).or_else(|| find(y)).or_else(|| Some(((**x).clone(), (**y).clone())));
                }
            }
            None
        }
        self.items.iter().find_map(|c| find(&c.lhs).or_else(|| find(&c.rhs)))
    }
}

impl FromIterator<LinConstraint> for ConstraintSet {
    fn from_iter<I: IntoIterator<Item = LinConstraint>>(iter: I) -> Self {
        ConstraintSet { items: iter.into_iter().collect() }
    }
}

impl fmt::Display for ConstraintSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.items {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Metric-space axioms for a finite participant set: nonnegativity of every pairwise
/// distance and every triangle inequality over distinct triples. Identity and symmetry
/// hold by construction of distance atoms.
pub fn metric_axioms(participants: &[String]) -> ConstraintSet {
    let mut ps: Vec<String> = participants.to_vec();
    ps.sort();
    ps.dedup();
    let mut cs = ConstraintSet::new();
    for i in 0..ps.len() {
        for j in i + 1..ps.len() {
            cs.push(LinConstraint::ge(LinExpr::dist(&ps[i], &ps[j]), LinExpr::zero()));
        }
    }
    for i in 0..ps.len() {
        for j in i + 1..ps.len() {
            for k in 0..ps.len() {
                if k == i || k == j {
                    continue;
                }
                cs.push(LinConstraint::le(
                    LinExpr::dist(&ps[i], &ps[j]),
                    LinExpr::dist(&ps[i], &ps[k]) + LinExpr::dist(&ps[k], &ps[j]),
                ));
            }
        }
    }
    cs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_atoms_are_canonical() {
        assert_eq!(LinExpr::dist("v", "p"), LinExpr::dist("p", "v"));
        assert_eq!(LinExpr::dist("a", "a"), LinExpr::zero());
    }

    #[test]
    fn normalized_form_flips_greater() {
        let c = LinConstraint::gt(LinExpr::var("x"), LinExpr::int(0));
        let (e, r) = c.normalized();
        assert_eq!(r, NormRel::Lt);
        assert_eq!(e, -LinExpr::var("x"));
    }

    #[test]
    fn monus_split_matches_the_verifier_check() {
        let t3 = LinExpr::var("t3");
        let t2 = LinExpr::var("t2");
        let two_d = LinExpr::var("d").scale(&q(2));
        let cs = ConstraintSet::from_vec(vec![LinConstraint::le(LinExpr::monus(t3.clone(), t2.clone()), two_d.clone())]);
        let branches = cs.eliminate_monus();
        assert_eq!(branches.len(), 2);
        assert_eq!(
            branches[0].items(),
            &[LinConstraint::lt(t2.clone(), t3.clone()), LinConstraint::le(t3.clone() - t2.clone(), two_d.clone())]
        );
        assert_eq!(branches[1].items(), &[LinConstraint::ge(t2, t3), LinConstraint::le(LinExpr::zero(), two_d)]);
    }

    #[test]
    fn monus_free_set_is_its_own_split() {
        let cs = ConstraintSet::from_vec(vec![LinConstraint::le(LinExpr::var("x"), LinExpr::int(1))]);
        assert_eq!(cs.eliminate_monus(), vec![cs.clone()]);
    }

    #[test]
    fn two_monus_atoms_give_four_branches() {
        let m1 = LinExpr::monus(LinExpr::var("a"), LinExpr::var("b"));
        let m2 = LinExpr::monus(LinExpr::var("c"), LinExpr::var("e"));
        let cs = ConstraintSet::from_vec(vec![LinConstraint::le(m1 + m2, LinExpr::int(1))]);
        let branches = cs.eliminate_monus();
        assert_eq!(branches.len(), 4);
        assert!(branches.iter().all(|b| !b.has_monus()));
    }

    #[test]
    fn constant_monus_folds() {
        assert_eq!(LinExpr::monus(LinExpr::int(1), LinExpr::int(3)), LinExpr::zero());
        assert_eq!(LinExpr::monus(LinExpr::int(4), LinExpr::int(1)), LinExpr::int(3));
    }

    #[test]
    fn metric_axiom_counts() {
        let names = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        assert_eq!(metric_axioms(&names(&["v", "p", "i"])).len(), 3 + 3);
        assert_eq!(metric_axioms(&names(&["a", "b", "c", "e"])).len(), 6 + 12);
        assert!(metric_axioms(&names(&["a"])).is_empty());
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_q("2.0"), Some(q(2)));
        assert_eq!(parse_q("0.25"), Some(q_frac(1, 4)));
        assert_eq!(parse_q("-1.5"), Some(q_frac(-3, 2)));
        assert_eq!(parse_q("1/3"), Some(q_frac(1, 3)));
        assert_eq!(parse_q("x"), None);
    }

    #[test]
    fn eval_handles_monus() {
        let e = LinExpr::monus(LinExpr::var("a"), LinExpr::var("b"));
        let w: Assignment = [(Atom::var("a"), q(1)), (Atom::var("b"), q(3))].into_iter().collect();
        assert_eq!(e.eval_in(&w), Some(q(0)));
    }

    #[test]
    fn render_is_readable() {
        let e = LinExpr::var("t0") + LinExpr::dist("p", "v");
        assert_eq!(e.to_string(), "t0 + d(p,v)");
        let c = LinConstraint::le(LinExpr::monus(LinExpr::var("t3"), LinExpr::var("t2")), LinExpr::var("d").scale(&q(2)));
        assert_eq!(c.to_string(), "t3 ⊖ t2 ≤ 2*d");
    }
}
