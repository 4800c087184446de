//! SMT-LIB2 (QF_LRA) export.

use super::{Atom, ConstraintSet, LinExpr, Rel, Q};
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;

/// SMT name of a variable or distance atom. Simple symbols pass through, anything else
/// is quoted with `|...|`.
pub fn smt_symbol(a: &Atom) -> String {
    match a {
        Atom::Var(v) => symbol_text(v),
        Atom::Dist(x, y) => symbol_text(&format!("d_{x}_{y}")),
        Atom::Monus(..) => unreachable!("monus atoms are encoded, not declared"),
    }
}

fn symbol_text(s: &str) -> String {
    let simple = !s.is_empty()
        && !s.starts_with(|c: char| c.is_ascii_digit())
        && s.chars().all(|c| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c));
    if simple {
        s.to_string()
    } else {
        format!("|{}|", s.replace('|', "_").replace('\\', "_"))
    }
}

fn number(x: &Q) -> String {
    let mag = x.abs();
    let body = if mag.is_integer() {
        format!("{}.0", mag.numer())
    } else {
        format!("(/ {}.0 {}.0)", mag.numer(), mag.denom())
    };
    if x.is_negative() {
        format!("(- {body})")
    } else {
        body
    }
}

fn expr(e: &LinExpr) -> String {
    let mut parts = Vec::new();
    for (a, c) in &e.terms {
        let atom = match a {
            Atom::Monus(x, y) => {
                let (xs, ys) = (expr(x), expr(y));
                format!("(ite (< {ys} {xs}) (- {xs} {ys}) 0.0)")
            }
            a => smt_symbol(a),
        };
        parts.push(if c.is_one() {
            atom
        } else if (-c).is_one() {
            format!("(- {atom})")
        } else {
            format!("(* {} {atom})", number(c))
        });
    }
    if !e.constant.is_zero() || parts.is_empty() {
        parts.push(number(&e.constant));
    }
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        format!("(+ {})", parts.join(" "))
    }
}

fn rel(r: Rel) -> &'static str {
    match r {
        Rel::Eq => "=",
        Rel::Le => "<=",
        Rel::Lt => "<",
        Rel::Ge => ">=",
        Rel::Gt => ">",
    }
}

/// Renders the set as a QF_LRA script ending in `(check-sat)`. Distance atoms get a
/// nonnegativity assertion; monus becomes `ite`.
pub fn export_smtlib(cs: &ConstraintSet) -> String {
    let atoms: BTreeSet<Atom> = cs.base_atoms();
    let mut decls: Vec<(String, bool)> = atoms.iter().map(|a| (smt_symbol(a), a.is_dist())).collect();
    decls.sort();
    decls.dedup();
    let mut out = String::from("(set-logic QF_LRA)\n");
    for (name, _) in &decls {
        out.push_str(&format!("(declare-const {name} Real)\n"));
    }
    for (name, is_dist) in &decls {
        if *is_dist {
            out.push_str(&format!("(assert (>= {name} 0.0))\n"));
        }
    }
    for c in cs.iter() {
        out.push_str(&format!("(assert ({} {} {}))\n", rel(c.rel), expr(&c.lhs), expr(&c.rhs)));
    }
    out.push_str("(check-sat)\n");
    out
}
