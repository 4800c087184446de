//! Attack patterns: per-role event fragments plus constraints over their times and the
//! distances between agents.
//!
//! ```text
//! attack hijacking {
//!   bounds { verifier = 1 ; prover = 1 ; capabilities = 2 ; steps = 60 ; states = 200000 ; use conc sign }
//!   agents { verifier = v ; prover = p ; intruder = i }
//!   verifier : recv sign(i, N ; X) @ i:$t1 -> v:$t2 ;
//!   smt { d(v,i) > d ; d(v,p) <= d }
//! }
//! ```
//!
//! `recv M @ A:$s -> B:$t` matches a reception of a message sent by agent `A` at `$s`
//! and received by `B` at `$t`. `send M @ A:$s` matches a send, and `send M @ A:$s ->
//! B:$t` asks for a receiver as well. Locations are agent names or upper-case variables.
//! A fragment's events must occur in order in one process of the role, other events may
//! come in between, and different fragments use different processes.

use super::{Agents, Bounds, EventKind, SymProc, SymState};
use crate::constraints::{parse_constraints_until_brace, parse_lin_constraint, Atom, ConstraintSet, LinConstraint, LinExpr};
use crate::process::term_at;
use crate::sim::ProcId;
use crate::syntax::{Cursor, SyntaxError, Tok};
use crate::term::{match_with, Subst, Term, Var};
use crate::transform::{UItem, UProc};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternEvent {
    pub kind: EventKind,
    pub msg: Term,
    /// Sender location and send time.
    pub from: (Term, String),
    /// Receiver location and reception time; always present for receptions.
    pub to: Option<(Term, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fragment {
    pub role: String,
    pub events: Vec<PatternEvent>,
    pub wheres: Vec<LinConstraint>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttackPattern {
    pub name: String,
    pub bounds: Bounds,
    pub agents: Agents,
    pub fragments: Vec<Fragment>,
    pub smt: ConstraintSet,
}

/// One way of matching every fragment.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GoalMatch {
    pub subst: Subst,
    /// Pattern time names (`$t1`) to state expressions.
    pub times: BTreeMap<String, LinExpr>,
    /// Equalities from time names bound more than once.
    pub eqs: Vec<LinConstraint>,
    pub procs: Vec<ProcId>,
}

impl GoalMatch {
    fn bind_time(&mut self, name: &str, e: LinExpr) {
        match self.times.get(name) {
            Some(old) if *old != e => self.eqs.push(LinConstraint::eq(old.clone(), e)),
            Some(_) => {}
            None => {
                self.times.insert(name.to_string(), e);
            }
        }
    }

    fn agent_name(&self, n: &str) -> String {
        match self.subst.get(&Var::pattern(n)) {
            Some(Term::Const(a)) => a.clone(),
            _ => n.to_string(),
        }
    }

    /// A pattern constraint over the matched state's atoms.
    pub fn resolve(&self, c: &LinConstraint) -> LinConstraint {
        c.substitute(&|a| match a {
            Atom::Var(n) if n.starts_with('$') => self.times.get(n).cloned(),
            Atom::Dist(x, y) => Some(LinExpr::dist(&self.agent_name(x), &self.agent_name(y))),
            _ => None,
        })
    }
}

fn bind_agent(loc: &Term, agent: &str, s: &Subst) -> Option<Subst> {
    match_with(loc, &Term::constant(agent), s).into_iter().next()
}

fn match_event(st: &SymState, p: &SymProc, pe: &PatternEvent, k: usize, acc: &GoalMatch) -> Vec<GoalMatch> {
    let ev = &p.events[k];
    if pe.kind != ev.kind {
        return vec![];
    }
    let Some(entry) = st.ik.get(&ev.entry) else {
        return vec![];
    };
    let mut out = Vec::new();
    for s in match_with(&pe.msg, &ev.msg, &acc.subst) {
        match pe.kind {
            EventKind::Recv => {
                let Some((to_loc, to_t)) = &pe.to else { continue };
                let Some(s) = bind_agent(&pe.from.0, &entry.sender_agent, &s) else { continue };
                let Some(s) = bind_agent(to_loc, &p.agent, &s) else { continue };
                let mut m = GoalMatch { subst: s, ..acc.clone() };
                m.bind_time(&pe.from.1, entry.sent.clone());
                m.bind_time(to_t, ev.time.clone());
                out.push(m);
            }
            EventKind::Send => {
                let Some(s) = bind_agent(&pe.from.0, &p.agent, &s) else { continue };
                let mut base = GoalMatch { subst: s, ..acc.clone() };
                base.bind_time(&pe.from.1, ev.time.clone());
                match &pe.to {
                    None => out.push(base),
                    Some((to_loc, to_t)) => {
                        for (_, agent, t) in &entry.receivers {
                            if let Some(s) = bind_agent(to_loc, agent, &base.subst) {
                                let mut m = GoalMatch { subst: s, ..base.clone() };
                                m.bind_time(to_t, t.clone());
                                out.push(m);
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

fn embed(st: &SymState, p: &SymProc, evs: &[PatternEvent], from: usize, acc: GoalMatch, out: &mut Vec<GoalMatch>) {
    let Some((first, rest)) = evs.split_first() else {
        out.push(acc);
        return;
    };
    for k in from..p.events.len() {
        for m in match_event(st, p, first, k, &acc) {
            embed(st, p, rest, k + 1, m, out);
        }
    }
}

impl AttackPattern {
    /// Every way the fragments occur in the state, ignoring constraints.
    pub fn matches(&self, st: &SymState) -> Vec<GoalMatch> {
        let mut out = Vec::new();
        self.fragments_from(st, 0, GoalMatch::default(), &mut out);
        out
    }

    fn fragments_from(&self, st: &SymState, i: usize, acc: GoalMatch, out: &mut Vec<GoalMatch>) {
        let Some(f) = self.fragments.get(i) else {
            out.push(acc);
            return;
        };
        for p in st.procs.iter().filter(|p| p.role == f.role && !acc.procs.contains(&p.id())) {
            let mut start = acc.clone();
            start.procs.push(p.id());
            let mut partial = Vec::new();
            embed(st, p, &f.events, 0, start, &mut partial);
            for m in partial {
                self.fragments_from(st, i + 1, m, out);
            }
        }
    }

    /// The `where` and `smt` constraints.
    pub fn constraints(&self) -> impl Iterator<Item = &LinConstraint> {
        self.fragments.iter().flat_map(|f| f.wheres.iter()).chain(self.smt.iter())
    }

    /// Constraints mentioning no time name, which hold in any goal state.
    pub fn static_constraints(&self) -> Vec<LinConstraint> {
        self.constraints()
            .filter(|c| {
                c.base_atoms().iter().all(|a| match a {
                    Atom::Var(n) => !n.starts_with('$'),
                    Atom::Dist(x, y) => !starts_upper(x) && !starts_upper(y),
                    Atom::Monus(..) => true,
                })
            })
            .cloned()
            .collect()
    }

    fn time_names(&self) -> BTreeSet<String> {
        let mut s = BTreeSet::new();
        for e in self.fragments.iter().flat_map(|f| f.events.iter()) {
            s.insert(e.from.1.clone());
            if let Some((_, t)) = &e.to {
                s.insert(t.clone());
            }
        }
        s
    }

    /// Checks that fragments name roles of the specification and constraints use only
    /// time names bound by some event.
    pub fn validate(&self, spec: &crate::process::ProtocolSpec) -> Result<(), String> {
        for f in &self.fragments {
            if spec.role(&f.role).is_none() {
                return Err(format!("pattern `{}` names unknown role `{}`", self.name, f.role));
            }
        }
        let bound = self.time_names();
        for c in self.constraints() {
            for a in c.base_atoms() {
                if let Atom::Var(n) = &a {
                    if n.starts_with('$') && !bound.contains(n) {
                        return Err(format!("pattern `{}`: `{n}` in `{c}` is not bound by any event", self.name));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Event kinds along every path of a body.
fn kind_paths(u: &UProc) -> Vec<Vec<EventKind>> {
    let mut paths = vec![Vec::new()];
    for it in &u.0 {
        let alts: Vec<Vec<EventKind>> = match it {
            UItem::Send { .. } => vec![vec![EventKind::Send]],
            UItem::Recv { .. } => vec![vec![EventKind::Recv]],
            UItem::If { then, otherwise, .. } | UItem::Choice(then, otherwise) => {
                let mut a = kind_paths(then);
                a.extend(kind_paths(otherwise));
                a
            }
        };
        paths = paths
            .iter()
            .flat_map(|p| alts.iter().map(move |a| p.iter().chain(a.iter()).copied().collect::<Vec<_>>()))
            .collect();
    }
    paths
}

fn is_subsequence(want: &[EventKind], path: &[EventKind]) -> bool {
    let mut it = path.iter();
    want.iter().all(|k| it.any(|x| x == k))
}

fn future_fits(evs: &[PatternEvent], body: &UProc) -> bool {
    let want: Vec<EventKind> = evs.iter().map(|e| e.kind).collect();
    want.is_empty() || kind_paths(body).iter().any(|p| is_subsequence(&want, p))
}

/// Whether the fragment can still be completed by the process: some prefix occurs in
/// its past events and the kinds of the rest occur along a path of its body.
fn fits(st: &SymState, p: &SymProc, evs: &[PatternEvent], from: usize, acc: &GoalMatch) -> bool {
    if future_fits(evs, &p.body) {
        return true;
    }
    let Some((first, rest)) = evs.split_first() else {
        return true;
    };
    (from..p.events.len()).any(|k| match_event(st, p, first, k, acc).iter().any(|m| fits(st, p, rest, k + 1, m)))
}

impl AttackPattern {
    /// True if the pattern names honest roles only and asks for no receivers of sends,
    /// so that capability runs whose output nobody uses never matter for a match.
    pub fn honest_only(&self, spec: &crate::process::ProtocolSpec) -> bool {
        self.fragments.iter().all(|f| {
            spec.role(&f.role).is_some_and(|r| r.kind == crate::process::RoleKind::Honest)
                && f.events.iter().all(|e| e.kind == EventKind::Recv || e.to.is_none())
        })
    }

    /// False when some fragment can occur in no extension of the state. `fresh` tells
    /// whether another instance of a role may still start; its body is then `body`.
    pub fn feasible(&self, st: &SymState, fresh: &dyn Fn(&str) -> Option<UProc>) -> bool {
        self.fragments.iter().all(|f| {
            st.procs.iter().filter(|p| p.role == f.role).any(|p| fits(st, p, &f.events, 0, &GoalMatch::default()))
                || fresh(&f.role).is_some_and(|b| future_fits(&f.events, &b))
        })
    }
}

fn starts_upper(s: &str) -> bool {
    s.starts_with(|c: char| c.is_uppercase())
}

fn time_name(cur: &mut Cursor) -> Result<String, SyntaxError> {
    let pos = cur.pos();
    match cur.next() {
        Some(Tok::Time(t)) => Ok(format!("${t}")),
        _ => Err(SyntaxError::new(pos, "expected a time variable such as `$t1`")),
    }
}

fn located(cur: &mut Cursor) -> Result<(Term, String), SyntaxError> {
    let loc = term_at(cur)?;
    cur.expect_sym(":")?;
    Ok((loc, time_name(cur)?))
}

fn number(cur: &mut Cursor) -> Result<u64, SyntaxError> {
    let pos = cur.pos();
    match cur.next() {
        Some(Tok::Num(n)) => n.parse().map_err(|_| SyntaxError::new(pos, format!("expected a whole number, found `{n}`"))),
        _ => Err(SyntaxError::new(pos, "expected a number")),
    }
}

fn bounds_block(cur: &mut Cursor, b: &mut Bounds) -> Result<(), SyntaxError> {
    cur.expect_sym("{")?;
    while !cur.eat_sym("}") {
        let key = cur.ident()?;
        if key == "use" {
            let mut caps = BTreeSet::new();
            while matches!(cur.peek(), Some(Tok::Ident(_))) {
                caps.insert(cur.ident()?);
            }
            b.allowed = Some(caps);
        } else {
            cur.expect_sym("=")?;
            let n = number(cur)?;
            match key.as_str() {
                "capabilities" => b.capabilities = n as u32,
                "steps" => b.steps = n as usize,
                "states" => b.states = n as usize,
                role => {
                    b.roles.insert(role.to_string(), n as u32);
                }
            }
        }
        cur.eat_sym(";");
    }
    Ok(())
}

fn agents_block(cur: &mut Cursor, a: &mut Agents) -> Result<(), SyntaxError> {
    cur.expect_sym("{")?;
    while !cur.eat_sym("}") {
        let role = cur.ident()?;
        cur.expect_sym("=")?;
        let agent = cur.ident()?;
        if role == "intruder" {
            a.intruder = agent;
        } else {
            a.roles.insert(role, agent);
        }
        cur.eat_sym(";");
    }
    Ok(())
}

fn fragment(cur: &mut Cursor, role: String) -> Result<Fragment, SyntaxError> {
    let mut f = Fragment { role, events: Vec::new(), wheres: Vec::new() };
    loop {
        if cur.eat_kw("where") {
            f.wheres.push(parse_lin_constraint(cur)?);
        } else if cur.is_kw("recv") || cur.is_kw("send") {
            let kind = if cur.eat_kw("recv") {
                EventKind::Recv
            } else {
                cur.expect_kw("send")?;
                EventKind::Send
            };
            let msg = term_at(cur)?;
            cur.expect_sym("@")?;
            let from = located(cur)?;
            let to = if cur.eat_sym("→") { Some(located(cur)?) } else { None };
            if kind == EventKind::Recv && to.is_none() {
                return Err(cur.err("a reception needs `-> LOC:$t` for the receiver"));
            }
            f.events.push(PatternEvent { kind, msg, from, to });
        } else {
            return Ok(f);
        }
        cur.eat_sym(";");
    }
}

fn attack(cur: &mut Cursor) -> Result<AttackPattern, SyntaxError> {
    cur.expect_kw("attack")?;
    let name = cur.ident()?;
    cur.expect_sym("{")?;
    let mut pat = AttackPattern {
        name,
        bounds: Bounds::default(),
        agents: Agents::default(),
        fragments: Vec::new(),
        smt: ConstraintSet::new(),
    };
    while !cur.eat_sym("}") {
        if cur.eat_kw("bounds") {
            bounds_block(cur, &mut pat.bounds)?;
        } else if cur.eat_kw("agents") {
            agents_block(cur, &mut pat.agents)?;
        } else if cur.eat_kw("smt") {
            cur.expect_sym("{")?;
            pat.smt.extend(parse_constraints_until_brace(cur)?.iter().cloned());
            cur.expect_sym("}")?;
        } else {
            let role = cur.ident()?;
            cur.expect_sym(":")?;
            let f = fragment(cur, role)?;
            pat.fragments.push(f);
        }
    }
    Ok(pat)
}

/// Every `attack` block of a file.
pub fn parse_attacks(text: &str) -> Result<Vec<AttackPattern>, SyntaxError> {
    let mut cur = Cursor::new(text)?;
    let mut out = Vec::new();
    while !cur.is_done() {
        out.push(attack(&mut cur)?);
    }
    Ok(out)
}

pub fn parse_attack(text: &str) -> Result<AttackPattern, SyntaxError> {
    let mut cur = Cursor::new(text)?;
    let a = attack(&mut cur)?;
    if !cur.is_done() {
        return Err(cur.err(format!("trailing input {}", cur.describe())));
    }
    Ok(a)
}
