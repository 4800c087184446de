//! Parser for messages, conditions, processes and protocol files.
//!
//! The grammar is written out in `docs/grammar.ebnf`. Identifiers starting with an
//! upper-case letter are pattern variables; lower-case identifiers are constants
//! (agent names, `true`) and `0` is the xor unit.

use super::{
    const_names_of, wf_check, Cond, CondAtom, ConstDecl, Item, Proc, ProtocolSpec, RoleDef, RoleKind,
    WfViolation, DEFAULT_THEORY,
};
use crate::constraints::{parse_lin_constraint, parse_lin_expr, rel_of, LinConstraint, LinExpr};
use crate::syntax::{Cursor, SyntaxError, Tok};
use crate::term::{Term, Var};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("role `{role}` is not well formed: {violation}")]
    IllFormed { role: String, violation: WfViolation },
    #[error("{0}")]
    Invalid(String),
}

const COND_STOPS: &[&str] = &["then", "∧", "and"];
const LIN_RELS: &[&str] = &["=", "<", "≤", ">", "≥"];

pub(crate) fn term(cur: &mut Cursor) -> Result<Term, SyntaxError> {
    let mut parts = vec![xor_term(cur)?];
    while cur.eat_sym(";") {
        parts.push(xor_term(cur)?);
    }
    Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Term::Concat(parts) })
}

fn xor_term(cur: &mut Cursor) -> Result<Term, SyntaxError> {
    let mut parts = vec![atom(cur)?];
    while cur.eat_sym("⊕") || cur.eat_kw("xor") {
        parts.push(atom(cur)?);
    }
    Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Term::Xor(parts) })
}

fn atom(cur: &mut Cursor) -> Result<Term, SyntaxError> {
    let pos = cur.pos();
    match cur.next() {
        Some(Tok::Num(n)) if n == "0" => Ok(Term::zero()),
        Some(Tok::Choice(v)) => Ok(Term::Var(Var::choice(v))),
        Some(Tok::Fresh(v)) => Ok(Term::Var(Var::fresh(v))),
        Some(Tok::Time(v)) => Ok(Term::Var(Var::time(v))),
        Some(Tok::Ident(f)) if cur.is_sym("(") => {
            cur.expect_sym("(")?;
            let mut args = Vec::new();
            if !cur.is_sym(")") {
                args.push(term(cur)?);
                while cur.eat_sym(",") {
                    args.push(term(cur)?);
                }
            }
            cur.expect_sym(")")?;
            Ok(Term::App(f, args))
        }
        Some(Tok::Ident(x)) if is_keyword(&x) => Err(SyntaxError::new(pos, format!("keyword `{x}` cannot be a message"))),
        Some(Tok::Ident(x)) if x.starts_with(|c: char| c.is_uppercase()) => Ok(Term::Var(Var::pattern(x))),
        Some(Tok::Ident(x)) => Ok(Term::Const(x)),
        Some(Tok::Sym("(")) => {
            let t = term(cur)?;
            cur.expect_sym(")")?;
            Ok(t)
        }
        Some(t) => Err(SyntaxError::new(pos, format!("unexpected `{t}` in message"))),
        None => Err(SyntaxError::new(pos, "unexpected end of input in message")),
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(s, "if" | "then" | "else" | "nilP" | "and" | "xor" | "role" | "intruder" | "const" | "protocol")
}

fn cond(cur: &mut Cursor) -> Result<Cond, SyntaxError> {
    let mut atoms = vec![cond_atom(cur)?];
    while cur.eat_sym("∧") || cur.eat_kw("and") {
        atoms.push(cond_atom(cur)?);
    }
    Ok(Cond(atoms))
}

fn cond_atom(cur: &mut Cursor) -> Result<CondAtom, SyntaxError> {
    if cur.scan_for(&["=="], COND_STOPS) {
        let l = term(cur)?;
        cur.expect_sym("==")?;
        let r = term(cur)?;
        Ok(CondAtom::Eq(l, r))
    } else if cur.scan_for(LIN_RELS, COND_STOPS) {
        Ok(CondAtom::Lin(parse_lin_constraint(cur)?))
    } else {
        Ok(CondAtom::Eq(term(cur)?, Term::truth()))
    }
}

pub(crate) fn proc(cur: &mut Cursor) -> Result<Proc, SyntaxError> {
    let mut p = alt(cur)?;
    while cur.eat_sym(".") {
        p = p.then(alt(cur)?);
    }
    Ok(p)
}

fn alt(cur: &mut Cursor) -> Result<Proc, SyntaxError> {
    let first = unit(cur)?;
    if cur.eat_sym("?") {
        let rest = alt(cur)?;
        return Ok(Proc::choice(first, rest));
    }
    Ok(first)
}

fn unit(cur: &mut Cursor) -> Result<Proc, SyntaxError> {
    if cur.eat_kw("nilP") {
        return Ok(Proc::nil());
    }
    let send = cur.eat_sym("+") || cur.eat_kw("send");
    if send || cur.eat_sym("-") || cur.eat_kw("recv") {
        cur.expect_sym("(")?;
        let m = term(cur)?;
        cur.expect_sym("@")?;
        let pos = cur.pos();
        let t = match cur.next() {
            Some(Tok::Time(t)) => Var::time(t),
            _ => return Err(SyntaxError::new(pos, "expected a time variable such as `$t1` after `@`")),
        };
        cur.expect_sym(")")?;
        return Ok(if send { Proc::send(m, t) } else { Proc::recv(m, t) });
    }
    if cur.eat_kw("if") {
        let c = cond(cur)?;
        cur.expect_kw("then")?;
        let a = unit(cur)?;
        let b = if cur.eat_kw("else") { unit(cur)? } else { Proc::nil() };
        return Ok(Proc::cond(c, a, b));
    }
    if cur.eat_sym("(") {
        let p = proc(cur)?;
        cur.expect_sym(")")?;
        return Ok(p);
    }
    Err(cur.err(format!("expected an action, `if`, `nilP` or `(`, found {}", cur.describe())))
}

fn finish<T>(cur: &Cursor, v: T) -> Result<T, SyntaxError> {
    if cur.is_done() {
        Ok(v)
    } else {
        Err(cur.err(format!("trailing input {}", cur.describe())))
    }
}

pub fn parse_term(text: &str) -> Result<Term, SyntaxError> {
    let mut cur = Cursor::new(text)?;
    let t = term(&mut cur)?;
    finish(&cur, t)
}

pub fn parse_cond(text: &str) -> Result<Cond, SyntaxError> {
    let mut cur = Cursor::new(text)?;
    let c = cond(&mut cur)?;
    finish(&cur, c)
}

pub fn parse_proc(text: &str) -> Result<Proc, SyntaxError> {
    let mut cur = Cursor::new(text)?;
    let p = proc(&mut cur)?;
    finish(&cur, p)
}

pub fn parse_spec(text: &str) -> Result<ProtocolSpec, ParseError> {
    let mut cur = Cursor::new(text)?;
    let spec = spec(&mut cur)?;
    finish(&cur, ())?;
    validate(&spec)?;
    Ok(spec)
}

fn spec(cur: &mut Cursor) -> Result<ProtocolSpec, SyntaxError> {
    cur.expect_kw("protocol")?;
    let name = cur.ident()?;
    cur.expect_sym("{")?;
    let mut out = ProtocolSpec { name, theory: DEFAULT_THEORY.into(), consts: Vec::new(), roles: Vec::new() };
    while !cur.eat_sym("}") {
        if cur.eat_kw("const") {
            let name = cur.ident()?;
            let constraint = if rel_of(cur.peek()).is_some() {
                let rel = rel_of(cur.next().as_ref()).unwrap();
                Some(LinConstraint::new(LinExpr::var(name.clone()), rel, parse_lin_expr(cur)?))
            } else {
                None
            };
            cur.expect_sym(";")?;
            out.consts.push(ConstDecl { name, constraint });
        } else if cur.eat_kw("theory") {
            out.theory = cur.ident()?;
            cur.expect_sym(";")?;
        } else if cur.is_kw("role") || cur.is_kw("intruder") {
            let kind = if cur.eat_kw("role") { RoleKind::Honest } else { RoleKind::Intruder };
            if kind == RoleKind::Intruder {
                cur.next();
            }
            let name = cur.ident()?;
            let mut self_var = None;
            if cur.eat_sym("(") {
                let pos = cur.pos();
                match cur.next() {
                    Some(Tok::Choice(v)) => self_var = Some(Var::choice(v)),
                    _ => return Err(SyntaxError::new(pos, "expected a choice variable such as `V?`")),
                }
                cur.expect_sym(")")?;
            }
            cur.expect_sym("{")?;
            let body = proc(cur)?;
            cur.expect_sym("}")?;
            cur.eat_sym(";");
            out.roles.push(RoleDef { name, kind, self_var, body });
        } else {
            return Err(cur.err(format!(
                "expected `const`, `theory`, `role`, `intruder` or `}}`, found {}",
                cur.describe()
            )));
        }
    }
    Ok(out)
}

fn cond_constraints(p: &Proc, out: &mut Vec<LinConstraint>) {
    for it in &p.0 {
        match it {
            Item::If(c, a, b) => {
                for at in &c.0 {
                    if let CondAtom::Lin(l) = at {
                        out.push(l.clone());
                    }
                }
                cond_constraints(a, out);
                cond_constraints(b, out);
            }
            Item::Choice(a, b) => {
                cond_constraints(a, out);
                cond_constraints(b, out);
            }
            _ => {}
        }
    }
}

fn validate(spec: &ProtocolSpec) -> Result<(), ParseError> {
    let invalid = |s: String| Err(ParseError::Invalid(s));
    if spec.theory != DEFAULT_THEORY {
        return invalid(format!("unknown equational theory `{}`; only `{DEFAULT_THEORY}` is supported", spec.theory));
    }
    if spec.honest().next().is_none() {
        return invalid(format!("protocol `{}`: no roles declared", spec.name));
    }
    let mut seen = BTreeSet::new();
    for r in &spec.roles {
        if !seen.insert(r.name.as_str()) {
            return invalid(format!("role `{}` is declared twice", r.name));
        }
    }
    let consts: BTreeSet<&str> = spec.consts.iter().map(|c| c.name.as_str()).collect();
    if consts.len() != spec.consts.len() {
        return invalid("a constant is declared twice".into());
    }
    for c in &spec.consts {
        if let Some(k) = &c.constraint {
            for n in const_names_of(k) {
                if !consts.contains(n.as_str()) {
                    return invalid(format!("constant `{}` refers to undeclared `{n}`", c.name));
                }
            }
        }
    }
    for r in &spec.roles {
        if r.body.is_nil() {
            return invalid(format!("role `{}` has an empty body", r.name));
        }
        let mut lin = Vec::new();
        cond_constraints(&r.body, &mut lin);
        for l in &lin {
            for n in const_names_of(l) {
                if !consts.contains(n.as_str()) {
                    return invalid(format!("role `{}`: `{n}` in `{l}` is not a declared constant", r.name));
                }
            }
        }
        for v in r.body.vars() {
            if v.kind == crate::term::VarKind::Time && consts.contains(v.name.as_str()) {
                return invalid(format!("role `{}`: time variable `{v}` clashes with constant `{}`", r.name, v.name));
            }
        }
        wf_check(&r.body).map_err(|violation| ParseError::IllFormed { role: r.name.clone(), violation })?;
    }
    Ok(())
}
