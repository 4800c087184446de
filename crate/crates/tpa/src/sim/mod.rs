//! Concrete timed semantics over a fixed topology.
//!
//! A state holds the running processes, the network of sent messages with their
//! reception records, and the global clock. Receiving happens exactly when a message
//! reaches the receiver's location, and a process does not receive its own
//! transmissions or the same transmission twice.

mod schedule;
mod topology;
mod trace;

pub use schedule::{parse_schedule, FirstScheduler, RandomScheduler, Schedule, ScheduleStep, Scheduler, ScriptScheduler};
pub use topology::{parse_topology, Topology, TopologyError};
pub use trace::{Trace, TraceLine};

use crate::constraints::{fmt_q, Atom, Q};
use crate::process::{Cond, CondAtom, Item, Proc, ProtocolSpec, RoleDef};
use crate::term::{fresh_rename, match_with, normalize, Subst, Term, Var, VarKind};
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

pub type ProcId = (String, u32);

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NetEntry {
    pub msg: Term,
    pub sender: ProcId,
    pub sender_loc: String,
    pub sent_at: Q,
    pub receivers: Vec<(ProcId, Q)>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RunProc {
    pub role: String,
    pub instance: u32,
    /// Number of the next step, starting at 1.
    pub step: u32,
    pub location: String,
    pub body: Proc,
    pub env: Subst,
    pub times: BTreeMap<String, Q>,
}

impl RunProc {
    pub fn id(&self) -> ProcId {
        (self.role.clone(), self.instance)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimedState {
    pub procs: Vec<RunProc>,
    pub net: Vec<NetEntry>,
    pub clock: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    /// Sent and stored in the network.
    Send(Term),
    /// Sent without being stored.
    Discard(Term),
    Recv(Term),
    Cond(String),
    Choice,
    Time,
    New,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Send(m) => write!(f, "+({m})"),
            Action::Discard(m) => write!(f, "{m}"),
            Action::Recv(m) => write!(f, "-({m})"),
            Action::Cond(c) => write!(f, "{c}"),
            Action::Choice => f.write_str("?"),
            Action::Time => f.write_str("Time"),
            Action::New => f.write_str("New"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TransitionLabel {
    /// `None` for time steps.
    pub proc: Option<ProcId>,
    pub step: u32,
    pub action: Action,
    /// 1 or 2 for conditionals and choices, 0 otherwise.
    pub branch: u8,
    pub clock: Q,
    /// For receptions: the sender and the index of the network entry.
    pub from: Option<(ProcId, usize)>,
}

impl fmt::Display for TransitionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.proc {
            Some((r, i)) => write!(f, "({r},{i},{},{},{},{})", self.step, self.action, self.branch, fmt_q(&self.clock)),
            None => write!(f, "(⊥,⊥,⊥,{},0,{})", self.action, fmt_q(&self.clock)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Mte {
    Finite(Q),
    Infinite,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("replay error at schedule step {step} (`{line}`): {reason}")]
    Replay { step: usize, line: String, reason: String },
    #[error("state invariant violated after step {step}: {reason}")]
    Invariant { step: usize, reason: String },
}

/// Agent names a scheduler may pick for unbound choice variables.
pub fn default_menu(topo: &Topology) -> Vec<Term> {
    topo.locations.iter().map(|l| Term::constant(l.clone())).collect()
}

/// Evaluates a condition under a process's bindings. `None` if something is unbound.
pub fn eval_cond(c: &Cond, p: &RunProc, topo: &Topology) -> Option<bool> {
    let w = topo.assignment();
    for a in &c.0 {
        let ok = match a {
            CondAtom::Eq(l, r) => {
                let (l, r) = (normalize(&p.env.apply(l)), normalize(&p.env.apply(r)));
                if !l.is_ground() || !r.is_ground() {
                    return None;
                }
                l == r
            }
            CondAtom::Lin(k) => {
                let env = |at: &Atom| -> Option<Q> {
                    match at {
                        Atom::Var(n) if n.starts_with('$') => p.times.get(&n[1..]).cloned(),
                        Atom::Dist(a, b) => Some(topo.dist(a, b)),
                        other => w.get(other).cloned(),
                    }
                };
                k.holds(&env)?
            }
        };
        if !ok {
            return Some(false);
        }
    }
    Some(true)
}

fn receivable(e: &NetEntry, p: &RunProc) -> bool {
    e.sender != p.id() && !e.receivers.iter().any(|(r, _)| *r == p.id())
}

fn arrival(e: &NetEntry, loc: &str, topo: &Topology) -> Q {
    e.sent_at.clone() + topo.dist(&e.sender_loc, loc)
}

fn advance(p: &RunProc, rest: Proc) -> RunProc {
    RunProc { step: p.step + 1, body: rest, ..p.clone() }
}

fn unbound_choices(m: &Term, env: &Subst) -> Vec<Var> {
    m.vars().into_iter().filter(|v| v.kind == VarKind::Choice && env.get(v).is_none()).collect()
}

/// All ways to bind the listed variables from the menu.
fn instantiations(vars: &[Var], menu: &[Term], env: &Subst) -> Vec<Subst> {
    let mut acc = vec![env.clone()];
    for v in vars {
        let mut next = Vec::new();
        for s in &acc {
            for t in menu {
                let mut s2 = s.clone();
                if s2.bind(v.clone(), t.clone()) {
                    next.push(s2);
                }
            }
        }
        acc = next;
    }
    acc
}

/// A new instance of `role` at its topology location, with fresh variables renamed and
/// the self variable bound to the location's agent name.
pub fn spawn(st: &TimedState, role: &RoleDef, topo: &Topology) -> Option<(TransitionLabel, TimedState)> {
    let loc = topo.location_of(role)?.to_string();
    let inst = crate::process::id(st.procs.iter().map(|p| (p.role.as_str(), p.instance)), &role.name) + 1;
    let body = role.body.map_terms(&mut |t| fresh_rename(t, &role.name, inst));
    let mut env = Subst::new();
    if let Some(v) = &role.self_var {
        env.bind(v.clone(), Term::constant(loc.clone()));
    }
    let p = RunProc { role: role.name.clone(), instance: inst, step: 1, location: loc, body, env, times: BTreeMap::new() };
    let mut next = st.clone();
    next.procs.push(p);
    let label = TransitionLabel {
        proc: Some((role.name.clone(), inst)),
        step: 1,
        action: Action::New,
        branch: 0,
        clock: st.clock.clone(),
        from: None,
    };
    Some((label, next))
}

/// Successors of one process's head action under every rule that applies.
pub fn process_steps(st: &TimedState, k: usize, topo: &Topology, menu: &[Term]) -> Vec<(TransitionLabel, TimedState)> {
    let p = &st.procs[k];
    let Some(head) = p.body.head() else {
        return vec![];
    };
    let rest = p.body.tail();
    let label = |action, branch, from| TransitionLabel {
        proc: Some(p.id()),
        step: p.step,
        action,
        branch,
        clock: st.clock.clone(),
        from,
    };
    let mut out = Vec::new();
    match head {
        Item::Send(m, t) => {
            for env in instantiations(&unbound_choices(m, &p.env), menu, &p.env) {
                let msg = normalize(&env.apply(m));
                let mut q = advance(p, rest.clone());
                q.env = env;
                q.times.insert(t.name.clone(), st.clock.clone());
                let dup = st.net.iter().any(|e| {
                    e.msg == msg && e.sender == p.id() && e.sent_at == st.clock && e.receivers.is_empty()
                });
                if !dup {
                    let mut next = st.clone();
                    next.procs[k] = q.clone();
                    next.net.push(NetEntry {
                        msg: msg.clone(),
                        sender: p.id(),
                        sender_loc: p.location.clone(),
                        sent_at: st.clock.clone(),
                        receivers: vec![],
                    });
                    out.push((label(Action::Send(msg.clone()), 0, None), next));
                }
                let mut next = st.clone();
                next.procs[k] = q;
                out.push((label(Action::Discard(msg), 0, None), next));
            }
        }
        Item::Recv(m, t) => {
            for (ei, e) in st.net.iter().enumerate() {
                if !receivable(e, p) || arrival(e, &p.location, topo) != st.clock {
                    continue;
                }
                for env in match_with(m, &e.msg, &p.env) {
                    let mut q = advance(p, rest.clone());
                    q.env = env;
                    q.times.insert(t.name.clone(), st.clock.clone());
                    let mut next = st.clone();
                    next.procs[k] = q;
                    next.net[ei].receivers.push((p.id(), st.clock.clone()));
                    out.push((label(Action::Recv(e.msg.clone()), 0, Some((e.sender.clone(), ei))), next));
                }
            }
        }
        Item::If(c, a, b) => {
            if let Some(v) = eval_cond(c, p, topo) {
                let (branch, cont) = if v { (1, a) } else { (2, b) };
                let mut next = st.clone();
                next.procs[k] = advance(p, cont.clone().then(rest));
                out.push((label(Action::Cond(c.map_terms(&mut |t| normalize(&p.env.apply(t))).to_string()), branch, None), next));
            }
        }
        Item::Choice(a, b) => {
            for (branch, cont) in [(1, a), (2, b)] {
                let mut next = st.clone();
                next.procs[k] = advance(p, cont.clone().then(rest.clone()));
                out.push((label(Action::Choice, branch, None), next));
            }
        }
    }
    out
}

/// Smallest non-zero time until an in-flight message can reach a waiting receiver.
pub fn mte(st: &TimedState, topo: &Topology) -> Mte {
    let mut best: Option<Q> = None;
    for p in &st.procs {
        match p.body.head() {
            None => {}
            Some(Item::Send(..)) | Some(Item::If(..)) | Some(Item::Choice(..)) => return Mte::Finite(Q::zero()),
            Some(Item::Recv(m, _)) => {
                for e in &st.net {
                    if !receivable(e, p) {
                        continue;
                    }
                    let rem = arrival(e, &p.location, topo) - st.clock.clone();
                    if !rem.is_positive() || match_with(m, &e.msg, &p.env).is_empty() {
                        continue;
                    }
                    if best.as_ref().is_none_or(|b| rem < *b) {
                        best = Some(rem);
                    }
                }
            }
        }
    }
    best.map_or(Mte::Infinite, Mte::Finite)
}

pub fn advance_time(st: &TimedState, topo: &Topology) -> Option<TimedState> {
    match mte(st, topo) {
        Mte::Finite(q) if !q.is_zero() => {
            let mut next = st.clone();
            next.clock = st.clock.clone() + q;
            Some(next)
        }
        _ => None,
    }
}

/// Every successor of the state: new processes, process steps and time advancement.
pub fn enabled(st: &TimedState, topo: &Topology, spec: &ProtocolSpec) -> Vec<(TransitionLabel, TimedState)> {
    let menu = default_menu(topo);
    let mut out: Vec<_> = spec.roles.iter().filter_map(|r| spawn(st, r, topo)).collect();
    for k in 0..st.procs.len() {
        out.extend(process_steps(st, k, topo, &menu));
    }
    if let Some(next) = advance_time(st, topo) {
        let label = TransitionLabel { proc: None, step: 0, action: Action::Time, branch: 0, clock: next.clock.clone(), from: None };
        out.push((label, next));
    }
    out
}

/// Network and clock invariants that every reachable state satisfies.
pub fn check_invariants(st: &TimedState, topo: &Topology) -> Result<(), String> {
    let loc_of = |id: &ProcId| st.procs.iter().find(|p| p.id() == *id).map(|p| p.location.clone());
    for e in &st.net {
        if e.sent_at > st.clock {
            return Err(format!("`{}` was sent after the current clock", e.msg));
        }
        let mut last: Option<(Q, Q)> = None;
        for (r, t) in &e.receivers {
            let loc = loc_of(r).ok_or_else(|| format!("unknown receiver {r:?}"))?;
            let d = topo.dist(&e.sender_loc, &loc);
            if *t != e.sent_at.clone() + d.clone() {
                return Err(format!("`{}` reached {:?} at {} instead of sent time plus distance", e.msg, r, fmt_q(t)));
            }
            if *t > st.clock {
                return Err(format!("reception of `{}` lies in the future", e.msg));
            }
            if let Some((lt, ld)) = &last {
                if lt <= t && *ld > d {
                    return Err(format!("receivers of `{}` are not ordered by distance", e.msg));
                }
            }
            last = Some((t.clone(), d));
        }
    }
    Ok(())
}

/// The value a time variable of a process took, used by tests and the trace printer.
pub fn time_of(st: &TimedState, id: &ProcId, var: &Var) -> Option<Q> {
    st.procs.iter().find(|p| p.id() == *id).and_then(|p| p.times.get(&var.name).cloned())
}

/// Runs from the empty state until the scheduler stops, nothing is enabled or
/// `max_steps` transitions were taken.
pub fn run(spec: &ProtocolSpec, topo: &Topology, sched: &mut dyn Scheduler, max_steps: usize) -> Result<Trace, SimError> {
    topo.check_spec(spec)?;
    let mut st = TimedState::default();
    let mut trace = Trace::new(st.clone());
    for n in 0..max_steps {
        let options = enabled(&st, topo, spec);
        let Some(i) = sched.pick(&st, &options)? else {
            break;
        };
        let (label, next) = options[i].clone();
        check_invariants(&next, topo).map_err(|reason| SimError::Invariant { step: n + 1, reason })?;
        trace.push(label, next.clone());
        st = next;
    }
    Ok(trace)
}
