//! Timed process terms, protocol specifications, well-formedness and shared variables.
//!
//! A process is a flat list of actions. `nilP` is the empty list, so sequential
//! composition is list concatenation and its associativity and unit laws hold by
//! construction.

mod parse;
mod print;

pub use parse::{parse_cond, parse_proc, parse_spec, parse_term, ParseError};
pub(crate) use parse::term as term_at;

use crate::constraints::{Atom, LinConstraint};
use crate::term::{Term, Var, VarKind};
use std::collections::BTreeSet;
use std::fmt;

/// One conjunct of a conditional.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CondAtom {
    /// Term equality decided on normal forms. A bare term `t` is `t == true`.
    Eq(Term, Term),
    /// Linear constraint; atoms `$t` are time variables, other names are constants.
    Lin(LinConstraint),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cond(pub Vec<CondAtom>);

impl Cond {
    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for a in &self.0 {
            match a {
                CondAtom::Eq(l, r) => {
                    out.extend(l.vars());
                    out.extend(r.vars());
                }
                CondAtom::Lin(c) => out.extend(time_vars_of(c)),
            }
        }
        out
    }

    pub fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> Cond {
        Cond(
            self.0
                .iter()
                .map(|a| match a {
                    CondAtom::Eq(l, r) => CondAtom::Eq(f(l), f(r)),
                    CondAtom::Lin(c) => CondAtom::Lin(c.clone()),
                })
                .collect(),
        )
    }

    pub fn is_linear(&self) -> bool {
        self.0.iter().all(|a| matches!(a, CondAtom::Lin(_)))
    }
}

/// Time variables occurring in a linear constraint, i.e. atoms spelled `$name`.
pub fn time_vars_of(c: &LinConstraint) -> BTreeSet<Var> {
    c.base_atoms()
        .into_iter()
        .filter_map(|a| match a {
            Atom::Var(n) => n.strip_prefix('$').map(Var::time),
            _ => None,
        })
        .collect()
}

/// Constant names (anything but `$t`) in a linear constraint.
pub fn const_names_of(c: &LinConstraint) -> BTreeSet<String> {
    c.base_atoms()
        .into_iter()
        .filter_map(|a| match a {
            Atom::Var(n) if !n.starts_with('$') => Some(n),
            _ => None,
        })
        .collect()
}

/// The atom standing for a time variable inside linear constraints.
pub fn time_atom(v: &Var) -> Atom {
    Atom::Var(format!("${}", v.name))
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Item {
    Send(Term, Var),
    Recv(Term, Var),
    If(Cond, Proc, Proc),
    Choice(Proc, Proc),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Proc(pub Vec<Item>);

impl Proc {
    pub fn nil() -> Proc {
        Proc(Vec::new())
    }

    pub fn is_nil(&self) -> bool {
        self.0.is_empty()
    }

    pub fn send(m: Term, t: Var) -> Proc {
        Proc(vec![Item::Send(m, t)])
    }

    pub fn recv(m: Term, t: Var) -> Proc {
        Proc(vec![Item::Recv(m, t)])
    }

    pub fn cond(c: Cond, then: Proc, otherwise: Proc) -> Proc {
        Proc(vec![Item::If(c, then, otherwise)])
    }

    pub fn choice(p: Proc, q: Proc) -> Proc {
        Proc(vec![Item::Choice(p, q)])
    }

    /// Sequential composition.
    pub fn then(mut self, next: Proc) -> Proc {
        self.0.extend(next.0);
        self
    }

    pub fn head(&self) -> Option<&Item> {
        self.0.first()
    }

    /// Everything after the head.
    pub fn tail(&self) -> Proc {
        Proc(self.0.iter().skip(1).cloned().collect())
    }

    /// All variables, time variables of actions included.
    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for it in &self.0 {
            match it {
                Item::Send(m, t) | Item::Recv(m, t) => {
                    out.extend(m.vars());
                    out.insert(t.clone());
                }
                Item::If(c, p, q) => {
                    out.extend(c.vars());
                    out.extend(p.vars());
                    out.extend(q.vars());
                }
                Item::Choice(p, q) => {
                    out.extend(p.vars());
                    out.extend(q.vars());
                }
            }
        }
        out
    }

    /// Applies `f` to every message and every term inside term-equality conditions.
    pub fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> Proc {
        Proc(
            self.0
                .iter()
                .map(|it| match it {
                    Item::Send(m, t) => Item::Send(f(m), t.clone()),
                    Item::Recv(m, t) => Item::Recv(f(m), t.clone()),
                    Item::If(c, a, b) => Item::If(c.map_terms(f), a.map_terms(f), b.map_terms(f)),
                    Item::Choice(a, b) => Item::Choice(a.map_terms(f), b.map_terms(f)),
                })
                .collect(),
        )
    }

    /// Messages in action order, branches included.
    pub fn messages(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        for it in &self.0 {
            match it {
                Item::Send(m, _) | Item::Recv(m, _) => out.push(m),
                Item::If(_, p, q) | Item::Choice(p, q) => {
                    out.extend(p.messages());
                    out.extend(q.messages());
                }
            }
        }
        out
    }

    /// Number of send/recv actions along the longest branch.
    pub fn depth(&self) -> usize {
        let mut n = 0;
        for (i, it) in self.0.iter().enumerate() {
            match it {
                Item::Send(..) | Item::Recv(..) => n += 1,
                Item::If(_, p, q) | Item::Choice(p, q) => {
                    let rest = Proc(self.0[i + 1..].to_vec()).depth();
                    return n + p.depth().max(q.depth()) + rest;
                }
            }
        }
        n
    }
}

/// Shared variables: the variables bound on every path through the process.
///
/// The time variable of an action counts as bound by that action, so that later
/// conditionals may test it.
pub fn sh_var(p: &Proc) -> BTreeSet<Var> {
    let Some(first) = p.0.first() else {
        return BTreeSet::new();
    };
    let rest = sh_var(&p.tail());
    let mut out = match first {
        Item::Send(m, t) | Item::Recv(m, t) => {
            let mut s = m.vars();
            s.insert(t.clone());
            s
        }
        Item::If(c, a, b) => {
            let mut s = c.vars();
            s.extend(sh_var(a).intersection(&sh_var(b)).cloned());
            s
        }
        Item::Choice(a, b) => sh_var(a).intersection(&sh_var(b)).cloned().collect(),
    };
    out.extend(rest);
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WfClause {
    /// A message shares a variable with the prefix that some path of the prefix leaves unbound.
    UnsharedVariable,
    /// The time variable of an action already occurs in its message or in the prefix.
    TimeVariableReused,
    /// A conditional is the first step of a process.
    ConditionalAtStart,
    /// A conditional's then-branch is empty.
    EmptyThenBranch,
    /// A condition mentions a variable not bound on every path of the prefix.
    UnboundCondition,
    /// Both branches of a choice are empty.
    EmptyChoice,
    /// A time variable appears inside a message.
    TimeInMessage,
    /// A fresh variable appears outside a constructor argument position.
    MisplacedFresh,
}

impl WfClause {
    pub fn describe(self) -> &'static str {
        match self {
            WfClause::UnsharedVariable => "message variables shared with the prefix must be bound on every path of the prefix",
            WfClause::TimeVariableReused => "the time variable of an action must not occur in its message or earlier in the process",
            WfClause::ConditionalAtStart => "a conditional needs a non-empty prefix (P ≠ nilP)",
            WfClause::EmptyThenBranch => "the then-branch of a conditional must not be nilP",
            WfClause::UnboundCondition => "condition variables must be bound on every path of the prefix",
            WfClause::EmptyChoice => "a choice needs at least one non-nilP branch",
            WfClause::TimeInMessage => "time variables have sort Real and cannot occur inside messages",
            WfClause::MisplacedFresh => "fresh variables may only occur as constructor arguments",
        }
    }
}

impl fmt::Display for WfClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.describe())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WfViolation {
    pub clause: WfClause,
    /// The offending prefix, printed.
    pub at: String,
}

impl fmt::Display for WfViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (at `{}`)", self.clause, self.at)
    }
}

pub fn wf(p: &Proc) -> bool {
    wf_check(p).is_ok()
}

/// Well-formedness with the first violated clause.
pub fn wf_check(p: &Proc) -> Result<(), WfViolation> {
    for m in p.messages() {
        sort_check(m, false).map_err(|clause| WfViolation { clause, at: m.to_string() })?;
    }
    wf_items(&p.0)
}

fn sort_check(t: &Term, under_app: bool) -> Result<(), WfClause> {
    match t {
        Term::Var(v) if v.kind == VarKind::Time => Err(WfClause::TimeInMessage),
        Term::Var(v) if v.kind == VarKind::Fresh && !under_app => Err(WfClause::MisplacedFresh),
        Term::Var(_) | Term::Const(_) => Ok(()),
        Term::App(_, xs) => xs.iter().try_for_each(|x| sort_check(x, true)),
        Term::Concat(xs) | Term::Xor(xs) => xs.iter().try_for_each(|x| sort_check(x, false)),
    }
}

fn wf_items(items: &[Item]) -> Result<(), WfViolation> {
    let n = items.len();
    if n == 0 {
        return Ok(());
    }
    let violation = |clause, upto: &[Item]| WfViolation { clause, at: Proc(upto.to_vec()).to_string() };
    let prefix = Proc(items[..n - 1].to_vec());
    match &items[n - 1] {
        Item::Send(m, t) | Item::Recv(m, t) => {
            let pv = prefix.vars();
            let sh = sh_var(&prefix);
            if !m.vars().intersection(&pv).all(|v| sh.contains(v)) {
                return Err(violation(WfClause::UnsharedVariable, items));
            }
            if m.vars().contains(t) || pv.contains(t) {
                return Err(violation(WfClause::TimeVariableReused, items));
            }
            wf_items(&prefix.0)
        }
        Item::If(c, a, b) => {
            if prefix.is_nil() {
                return Err(violation(WfClause::ConditionalAtStart, items));
            }
            if a.is_nil() {
                return Err(violation(WfClause::EmptyThenBranch, items));
            }
            if !c.vars().is_subset(&sh_var(&prefix)) {
                return Err(violation(WfClause::UnboundCondition, items));
            }
            wf_items(&prefix.clone().then(a.clone()).0)?;
            wf_items(&prefix.then(b.clone()).0)
        }
        Item::Choice(a, b) => {
            if a.is_nil() && b.is_nil() {
                return Err(violation(WfClause::EmptyChoice, items));
            }
            wf_items(&prefix.clone().then(a.clone()).0)?;
            wf_items(&prefix.then(b.clone()).0)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RoleKind {
    Honest,
    Intruder,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoleDef {
    pub name: String,
    pub kind: RoleKind,
    /// Choice variable standing for the executing agent, bound when an instance starts.
    pub self_var: Option<Var>,
    pub body: Proc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstDecl {
    pub name: String,
    pub constraint: Option<LinConstraint>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProtocolSpec {
    pub name: String,
    pub theory: String,
    pub consts: Vec<ConstDecl>,
    pub roles: Vec<RoleDef>,
}

pub const DEFAULT_THEORY: &str = "xor";

impl ProtocolSpec {
    pub fn role(&self, name: &str) -> Option<&RoleDef> {
        self.roles.iter().find(|r| r.name == name)
    }

    pub fn honest(&self) -> impl Iterator<Item = &RoleDef> {
        self.roles.iter().filter(|r| r.kind == RoleKind::Honest)
    }

    pub fn capabilities(&self) -> impl Iterator<Item = &RoleDef> {
        self.roles.iter().filter(|r| r.kind == RoleKind::Intruder)
    }

    /// Constraints declared on constants, e.g. `d > 0`.
    pub fn const_constraints(&self) -> Vec<LinConstraint> {
        self.consts.iter().filter_map(|c| c.constraint.clone()).collect()
    }
}

/// A process of a running configuration: role, instance, next step and body.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabeledProc {
    pub role: String,
    pub instance: u32,
    pub step: u32,
    pub body: Proc,
}

/// Highest instance number of `role` among the labels, 0 if absent.
pub fn id<'a>(procs: impl IntoIterator<Item = (&'a str, u32)>, role: &str) -> u32 {
    procs.into_iter().filter(|(r, _)| *r == role).map(|(_, i)| i).max().unwrap_or(0)
}
