//! Bounded forward symbolic search over untimed configurations.
//!
//! Processes run the bodies produced by the transformation. A send happens at the
//! sender's current time. A reception introduces a fresh time atom, and the guard that
//! follows it is conjoined right away. States whose constraints are unsatisfiable are
//! dropped when they are created.
//!
//! Time atoms are named after the process: `verifier1_start` for the moment instance 1
//! of `verifier` starts and `verifier1_t3` for its reception time `t3`.

mod correspond;
mod pattern;
mod realize;

pub use correspond::{agents_of, induce, replay, witness_topology};
pub use pattern::{parse_attack, parse_attacks, AttackPattern, Fragment, GoalMatch, PatternEvent};
pub use realize::{check_realizable, collinear_embed, permutations};

use crate::constraints::{
    fmt_q, is_satisfiable, metric_axioms, Assignment, Atom, ConstraintSet, LinConstraint, LinExpr, SatResult,
    SolverError,
};
use crate::process::{CondAtom, ProtocolSpec, RoleKind};
use crate::sim::{Action, ProcId};
use crate::term::{fresh_rename, match_with, normalize, Subst, Term, Var, VarKind};
use crate::transform::{atom_name, transform_spec, UItem, UProc, URole};
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};

/// Knowledge entries are named by their sender and the sender's step number.
pub type EntryId = (ProcId, u32);

/// Agent names of the roles. Every intruder capability acts as `intruder`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Agents {
    pub roles: BTreeMap<String, String>,
    pub intruder: String,
}

impl Default for Agents {
    fn default() -> Self {
        Agents { roles: BTreeMap::new(), intruder: "i".into() }
    }
}

impl Agents {
    pub fn of(&self, role: &str, kind: RoleKind) -> String {
        match kind {
            RoleKind::Intruder => self.intruder.clone(),
            RoleKind::Honest => self.roles.get(role).cloned().unwrap_or_else(|| role.to_string()),
        }
    }

    pub fn participants(&self, spec: &ProtocolSpec) -> Vec<String> {
        let set: BTreeSet<String> = spec.roles.iter().map(|r| self.of(&r.name, r.kind)).collect();
        set.into_iter().collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Bounds {
    /// Instances per honest role; roles not listed get `default_instances`.
    pub roles: BTreeMap<String, u32>,
    pub default_instances: u32,
    /// Total number of intruder capability instances.
    pub capabilities: u32,
    /// Capabilities that may be used; `None` allows all of them.
    pub allowed: Option<BTreeSet<String>>,
    pub steps: usize,
    pub states: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            roles: BTreeMap::new(),
            default_instances: 1,
            capabilities: 3,
            allowed: None,
            steps: 60,
            states: 200_000,
        }
    }
}

impl Bounds {
    pub fn instances(&self, role: &str) -> u32 {
        *self.roles.get(role).unwrap_or(&self.default_instances)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IkEntry {
    pub msg: Term,
    pub sender: ProcId,
    pub sender_agent: String,
    pub sent: LinExpr,
    /// Receiving process, its agent and the reception time, in order of reception.
    pub receivers: Vec<(ProcId, String, LinExpr)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum EventKind {
    Send,
    Recv,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event {
    pub kind: EventKind,
    pub msg: Term,
    pub time: LinExpr,
    pub entry: EntryId,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymProc {
    pub role: String,
    pub instance: u32,
    pub kind: RoleKind,
    pub agent: String,
    /// Number of the next step, starting at 1.
    pub step: u32,
    pub body: UProc,
    pub env: Subst,
    /// Time names of the untimed body (`t1`, `t1'`, `t2?`) to expressions.
    pub times: BTreeMap<String, LinExpr>,
    /// Participant names of the body (`V?`, `A1`, `I`) to agents.
    pub names: BTreeMap<String, String>,
    pub now: LinExpr,
    pub events: Vec<Event>,
}

impl SymProc {
    pub fn id(&self) -> ProcId {
        (self.role.clone(), self.instance)
    }

    fn agent_of(&self, name: &str) -> String {
        self.names.get(name).cloned().unwrap_or_else(|| name.to_string())
    }

    /// A condition of the body over the state's atoms.
    pub fn resolve(&self, c: &LinConstraint) -> LinConstraint {
        c.substitute(&|a| match a {
            Atom::Var(n) => self.times.get(n).cloned(),
            Atom::Dist(x, y) => Some(LinExpr::dist(&self.agent_of(x), &self.agent_of(y))),
            Atom::Monus(..) => None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymLabel {
    pub proc: ProcId,
    pub agent: String,
    pub step: u32,
    pub action: Action,
    pub branch: u8,
    /// The process's time after the step.
    pub time: LinExpr,
    /// Entry sent or received.
    pub entry: Option<EntryId>,
    /// Sender agent, for receptions.
    pub peer: Option<String>,
}

impl fmt::Display for SymLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (r, i) = &self.proc;
        write!(f, "({r},{i},{},{},{},{})", self.step, self.action, self.branch, self.time)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymState {
    pub procs: Vec<SymProc>,
    pub ik: BTreeMap<EntryId, IkEntry>,
    pub constraints: ConstraintSet,
    pub log: Vec<SymLabel>,
    /// Capability outputs of the current burst not yet received, in lazy mode.
    pub pending: Vec<EntryId>,
}

impl SymState {
    pub fn proc(&self, id: &ProcId) -> Option<&SymProc> {
        self.procs.iter().find(|p| p.id() == *id)
    }

    /// Hash of the state up to interleaving: processes, knowledge with receivers as a set
    /// and constraints as a set. The log is left out.
    pub fn key(&self) -> u128 {
        let mut procs: Vec<&SymProc> = self.procs.iter().collect();
        procs.sort();
        let ik: Vec<(&EntryId, &Term, &LinExpr, BTreeSet<&(ProcId, String, LinExpr)>)> =
            self.ik.iter().map(|(k, e)| (k, &e.msg, &e.sent, e.receivers.iter().collect())).collect();
        let cs: BTreeSet<&LinConstraint> = self.constraints.iter().collect();
        let half = |salt: u8| {
            let mut h = DefaultHasher::new();
            salt.hash(&mut h);
            procs.hash(&mut h);
            ik.hash(&mut h);
            cs.hash(&mut h);
            self.pending.hash(&mut h);
            h.finish() as u128
        };
        (half(0) << 64) | half(1)
    }
}

fn map_uproc(u: &UProc, f: &mut impl FnMut(&Term) -> Term) -> UProc {
    UProc(
        u.0.iter()
            .map(|it| match it {
                UItem::Send { msg, me, time, to } => {
                    UItem::Send { msg: f(msg), me: f(me), time: time.clone(), to: to.clone() }
                }
                UItem::Recv { msg, from, sent, me, time, rest } => UItem::Recv {
                    msg: f(msg),
                    from: from.clone(),
                    sent: sent.clone(),
                    me: f(me),
                    time: time.clone(),
                    rest: rest.clone(),
                },
                UItem::If { cond, then, otherwise, guard } => UItem::If {
                    cond: cond.map_terms(&mut *f),
                    then: map_uproc(then, &mut *f),
                    otherwise: map_uproc(otherwise, &mut *f),
                    guard: *guard,
                },
                UItem::Choice(a, b) => UItem::Choice(map_uproc(a, &mut *f), map_uproc(b, &mut *f)),
            })
            .collect(),
    )
}

fn unbound_choices(m: &Term, env: &Subst) -> Vec<Var> {
    m.vars().into_iter().filter(|v| v.kind == VarKind::Choice && env.get(v).is_none()).collect()
}

fn instantiations(vars: &[Var], menu: &[Term], env: &Subst) -> Vec<Subst> {
    let mut acc = vec![env.clone()];
    for v in vars {
        acc = acc
            .iter()
            .flat_map(|s| {
                menu.iter().filter_map(move |t| {
                    let mut s2 = s.clone();
                    s2.bind(v.clone(), t.clone()).then_some(s2)
                })
            })
            .collect();
    }
    acc
}

/// The transformed specification together with agent names and the constraints every
/// state is checked against.
#[derive(Clone, Debug)]
pub struct Model {
    pub spec: ProtocolSpec,
    pub roles: Vec<URole>,
    pub agents: Agents,
    /// Conjoined with every satisfiability check but not stored in states.
    pub base: ConstraintSet,
    /// Drop branches after which the process performs no further action.
    pub prune_idle: bool,
    /// Check satisfiability after receptions too, not only at conditionals and goals.
    pub check_receptions: bool,
    /// Run capabilities only in bursts that end with an honest process receiving the
    /// burst's one remaining output. Sound when the goal names honest processes only.
    pub lazy: bool,
}

impl Model {
    pub fn new(spec: &ProtocolSpec, agents: Agents) -> Model {
        let mut base = ConstraintSet::from_vec(spec.const_constraints());
        base.extend(metric_axioms(&agents.participants(spec)).iter().cloned());
        Model { spec: spec.clone(), roles: transform_spec(spec), agents, base, prune_idle: true, check_receptions: true, lazy: false }
    }

    fn sat(&self, cs: &ConstraintSet) -> Result<bool, SolverError> {
        Ok(is_satisfiable(&self.base.union(cs))?.is_sat())
    }

    fn menu(&self) -> Vec<Term> {
        self.agents.participants(&self.spec).into_iter().map(Term::constant).collect()
    }

    /// A new instance of `role` that has not acted yet.
    pub fn spawn(&self, st: &SymState, role: &str) -> Option<SymState> {
        let ur = self.roles.iter().find(|r| r.name == role)?;
        let def = self.spec.role(role)?;
        let inst = crate::process::id(st.procs.iter().map(|p| (p.role.as_str(), p.instance)), role) + 1;
        let agent = self.agents.of(role, ur.kind);
        let mut env = Subst::new();
        if let Some(v) = &def.self_var {
            env.bind(v.clone(), Term::constant(agent.clone()));
        }
        let start = LinExpr::var(format!("{role}{inst}_start"));
        let p = SymProc {
            role: role.to_string(),
            instance: inst,
            kind: ur.kind,
            agent: agent.clone(),
            step: 1,
            body: map_uproc(&ur.body, &mut |t| fresh_rename(t, role, inst)),
            env,
            times: BTreeMap::new(),
            names: BTreeMap::from([(ur.me.to_string(), agent.clone())]),
            now: start.clone(),
            events: Vec::new(),
        };
        let mut next = st.clone();
        next.constraints.push(LinConstraint::ge(start.clone(), LinExpr::zero()));
        next.log.push(SymLabel {
            proc: p.id(),
            agent,
            step: 1,
            action: Action::New,
            branch: 0,
            time: start,
            entry: None,
            peer: None,
        });
        next.procs.push(p);
        Some(next)
    }

    fn may_spawn(&self, st: &SymState, r: &URole, b: &Bounds) -> bool {
        match r.kind {
            RoleKind::Honest => {
                let n = st.procs.iter().filter(|p| p.role == r.name).count() as u32;
                n < b.instances(&r.name)
            }
            RoleKind::Intruder => {
                let n = st.procs.iter().filter(|p| p.kind == RoleKind::Intruder).count() as u32;
                n < b.capabilities && b.allowed.as_ref().is_none_or(|a| a.contains(&r.name))
            }
        }
    }

    fn idle(&self, cont: &UProc) -> bool {
        self.prune_idle && !cont.has_action()
    }

    /// Successors of process `k`'s next action.
    pub fn proc_steps(&self, st: &SymState, k: usize) -> Result<Vec<SymState>, SolverError> {
        let p = &st.procs[k];
        let Some(head) = p.body.head() else {
            return Ok(vec![]);
        };
        let rest = p.body.tail();
        let label = |action, branch, time: &LinExpr, entry, peer| SymLabel {
            proc: p.id(),
            agent: p.agent.clone(),
            step: p.step,
            action,
            branch,
            time: time.clone(),
            entry,
            peer,
        };
        let mut out = Vec::new();
        match head {
            UItem::Send { msg, time, .. } => {
                for env in instantiations(&unbound_choices(msg, &p.env), &self.menu(), &p.env) {
                    let m = normalize(&env.apply(msg));
                    let eid = (p.id(), p.step);
                    let mut q = p.clone();
                    q.env = env;
                    q.times.insert(atom_name(time), p.now.clone());
                    q.events.push(Event { kind: EventKind::Send, msg: m.clone(), time: p.now.clone(), entry: eid.clone() });
                    q.step += 1;
                    q.body = rest.clone();
                    let mut next = st.clone();
                    next.ik.insert(
                        eid.clone(),
                        IkEntry {
                            msg: m.clone(),
                            sender: p.id(),
                            sender_agent: p.agent.clone(),
                            sent: p.now.clone(),
                            receivers: vec![],
                        },
                    );
                    if self.lazy && p.kind == RoleKind::Intruder {
                        next.pending.push(eid.clone());
                        next.pending.sort();
                    }
                    next.log.push(label(Action::Send(m), 0, &p.now, Some(eid), None));
                    next.procs[k] = q;
                    out.push(next);
                }
            }
            UItem::Recv { msg, from, sent, time, .. } => {
                for (eid, e) in &st.ik {
                    if e.sender == p.id() || e.receivers.iter().any(|(r, _, _)| *r == p.id()) {
                        continue;
                    }
                    if self.lazy && p.kind == RoleKind::Honest && !st.pending.is_empty() && st.pending != [eid.clone()] {
                        continue;
                    }
                    for env in match_with(msg, &e.msg, &p.env) {
                        let t = LinExpr::var(format!("{}{}_{}", p.role, p.instance, time.name));
                        let mut q = p.clone();
                        q.env = env;
                        q.times.insert(atom_name(sent), e.sent.clone());
                        q.times.insert(atom_name(time), t.clone());
                        q.names.insert(atom_name(from), e.sender_agent.clone());
                        q.events.push(Event { kind: EventKind::Recv, msg: e.msg.clone(), time: t.clone(), entry: eid.clone() });
                        q.step += 1;
                        q.now = t.clone();
                        let mut cs = st.constraints.clone();
                        cs.push(LinConstraint::ge(t.clone(), p.now.clone()));
                        q.body = match rest.head() {
                            Some(UItem::If { cond, then, guard: true, .. }) => {
                                for a in &cond.0 {
                                    if let CondAtom::Lin(c) = a {
                                        cs.push(q.resolve(c));
                                    }
                                }
                                then.clone().then(rest.tail())
                            }
                            _ => rest.clone(),
                        };
                        if self.check_receptions && !self.sat(&cs)? {
                            continue;
                        }
                        let mut next = st.clone();
                        next.constraints = cs;
                        next.pending.retain(|x| x != eid);
                        if let Some(entry) = next.ik.get_mut(eid) {
                            entry.receivers.push((p.id(), p.agent.clone(), t.clone()));
                        }
                        next.log.push(label(Action::Recv(e.msg.clone()), 0, &t, Some(eid.clone()), Some(e.sender_agent.clone())));
                        next.procs[k] = q;
                        out.push(next);
                    }
                }
            }
            UItem::If { cond, then, otherwise, .. } => {
                let text = cond.map_terms(&mut |t| normalize(&p.env.apply(t))).to_string();
                let mut terms_hold = true;
                let mut lins = Vec::new();
                for a in &cond.0 {
                    match a {
                        CondAtom::Eq(l, r) => terms_hold &= normalize(&p.env.apply(l)) == normalize(&p.env.apply(r)),
                        CondAtom::Lin(c) => lins.push(p.resolve(c)),
                    }
                }
                // The negation of a conjunction is one branch per negated conjunct.
                let mut cases: Vec<(u8, &UProc, Vec<LinConstraint>)> = Vec::new();
                if terms_hold {
                    cases.push((1, then, lins.clone()));
                    for c in &lins {
                        for n in c.negate() {
                            cases.push((2, otherwise, vec![n]));
                        }
                    }
                } else {
                    cases.push((2, otherwise, vec![]));
                }
                for (branch, cont, extra) in cases {
                    let body = cont.clone().then(rest.clone());
                    if self.idle(&body) {
                        continue;
                    }
                    let mut cs = st.constraints.clone();
                    cs.extend(extra.iter().cloned());
                    if !extra.is_empty() && !self.sat(&cs)? {
                        continue;
                    }
                    let mut next = st.clone();
                    next.constraints = cs;
                    next.procs[k] = SymProc { step: p.step + 1, body, ..p.clone() };
                    next.log.push(label(Action::Cond(text.clone()), branch, &p.now, None, None));
                    out.push(next);
                }
            }
            UItem::Choice(a, b) => {
                for (branch, cont) in [(1, a), (2, b)] {
                    let body = cont.clone().then(rest.clone());
                    if self.idle(&body) {
                        continue;
                    }
                    let mut next = st.clone();
                    next.procs[k] = SymProc { step: p.step + 1, body, ..p.clone() };
                    next.log.push(label(Action::Choice, branch, &p.now, None, None));
                    out.push(next);
                }
            }
        }
        Ok(out)
    }

    /// True if the process's next action depends on nothing but the process and
    /// leaves every other step enabled: a send, or a branch none of whose arms is
    /// cut as idle. Such a step commutes with all others and, since later steps of the
    /// same process only add events, taking it first loses no goal state.
    fn local(&self, p: &SymProc) -> bool {
        let rest = p.body.tail();
        match p.body.head() {
            Some(UItem::Send { .. }) => true,
            Some(UItem::If { then, otherwise, .. } | UItem::Choice(then, otherwise)) => {
                !self.idle(&then.clone().then(rest.clone())) && !self.idle(&otherwise.clone().then(rest))
            }
            _ => false,
        }
    }

    /// Process steps plus new instances within the bounds. A new instance is only
    /// created together with its first action. When some process has a local next
    /// action, only that action is taken.
    pub fn successors(&self, st: &SymState, bounds: &Bounds) -> Result<Vec<SymState>, SolverError> {
        if let Some(k) = st.procs.iter().position(|p| self.local(p)) {
            return self.proc_steps(st, k);
        }
        if self.lazy {
            // A started capability finishes before anything else moves.
            if let Some(k) = st.procs.iter().position(|p| p.kind == RoleKind::Intruder && p.body.has_action()) {
                return self.proc_steps(st, k);
            }
        }
        let mut out = Vec::new();
        for k in 0..st.procs.len() {
            out.extend(self.proc_steps(st, k)?);
        }
        for r in &self.roles {
            if !self.may_spawn(st, r, bounds) {
                continue;
            }
            if let Some(s) = self.spawn(st, &r.name) {
                let k = s.procs.len() - 1;
                out.extend(self.proc_steps(&s, k)?);
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub enum Verdict {
    AttackFound {
        /// Labels in order of their witness times.
        trace: Vec<SymLabel>,
        witness: Assignment,
        /// Accumulated, pattern and metric constraints the witness satisfies.
        constraints: ConstraintSet,
        realizable: bool,
        explored: usize,
        state: Box<SymState>,
    },
    NoAttack {
        explored: usize,
        bounds: Bounds,
    },
    Inconclusive {
        explored: usize,
        bounds: Bounds,
        reason: String,
    },
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::AttackFound { .. } => "attack-found",
            Verdict::NoAttack { .. } => "no-attack",
            Verdict::Inconclusive { .. } => "inconclusive",
        }
    }

    pub fn is_attack(&self) -> bool {
        matches!(self, Verdict::AttackFound { .. })
    }

    pub fn explored(&self) -> usize {
        match self {
            Verdict::AttackFound { explored, .. }
            | Verdict::NoAttack { explored, .. }
            | Verdict::Inconclusive { explored, .. } => *explored,
        }
    }

    pub fn to_json(&self, bounds: &Bounds) -> Value {
        let mut v = json!({
            "verdict": self.name(),
            "explored": self.explored(),
            "bounds": bounds,
        });
        match self {
            Verdict::AttackFound { trace, witness, realizable, .. } => {
                v["trace"] = json!(trace.iter().map(|l| l.to_string()).collect::<Vec<_>>());
                v["witness"] = json!(witness.iter().map(|(a, q)| (a.to_string(), fmt_q(q))).collect::<BTreeMap<_, _>>());
                v["realizable"] = json!(realizable);
            }
            Verdict::Inconclusive { reason, .. } => v["reason"] = json!(reason),
            Verdict::NoAttack { .. } => {}
        }
        v
    }
}

/// A witness placing all participants on a line, if the constraints allow one.
fn collinear_witness(cs: &ConstraintSet, participants: &[String]) -> Result<Option<Assignment>, SolverError> {
    if participants.len() < 3 {
        return Ok(None);
    }
    let pos = |a: &str| LinExpr::var(format!("pos({a})"));
    for order in permutations(participants) {
        if order.first() > order.last() {
            continue;
        }
        let mut line = cs.clone();
        line.push(LinConstraint::eq(pos(&order[0]), LinExpr::zero()));
        for w in order.windows(2) {
            line.push(LinConstraint::ge(pos(&w[1]), pos(&w[0])));
        }
        for i in 0..order.len() {
            for j in i + 1..order.len() {
                line.push(LinConstraint::eq(LinExpr::dist(&order[i], &order[j]), pos(&order[j]) - pos(&order[i])));
            }
        }
        if let SatResult::Sat(w) = is_satisfiable(&line)? {
            return Ok(Some(w.into_iter().filter(|(a, _)| !matches!(a, Atom::Var(n) if n.starts_with("pos("))).collect()));
        }
    }
    Ok(None)
}

fn restrict(w: &Assignment, cs: &ConstraintSet) -> Assignment {
    let keep = cs.base_atoms();
    w.iter().filter(|(a, _)| keep.contains(a)).map(|(a, q)| (a.clone(), q.clone())).collect()
}

/// Time order of the log under a witness; ties keep log order.
pub fn order_by_witness(log: &[SymLabel], w: &Assignment) -> Vec<SymLabel> {
    let mut v: Vec<SymLabel> = log.to_vec();
    v.sort_by_key(|l| l.time.eval_in(w));
    v
}

struct Found {
    witness: Assignment,
    constraints: ConstraintSet,
}

fn check_goal(model: &Model, pattern: &AttackPattern, st: &SymState) -> Result<Option<Found>, SolverError> {
    for m in pattern.matches(st) {
        let mut cs = st.constraints.clone();
        cs.extend(m.eqs.iter().cloned());
        cs.extend(pattern.constraints().map(|c| m.resolve(c)));
        let full = model.base.union(&cs);
        let SatResult::Sat(plain) = is_satisfiable(&full)? else {
            continue;
        };
        let participants = model.agents.participants(&model.spec);
        let w = collinear_witness(&full, &participants)?.unwrap_or(plain);
        // What the witness is reported against: the accumulated and pattern constraints,
        // the metric axioms over agents that took part and the constants they mention.
        let agents: BTreeSet<String> = st.log.iter().map(|l| l.agent.clone()).chain(st.log.iter().filter_map(|l| l.peer.clone())).collect();
        let mut reported = cs;
        reported.extend(metric_axioms(&agents.into_iter().collect::<Vec<_>>()).iter().cloned());
        let mentioned = reported.base_atoms();
        reported.extend(model.spec.const_constraints().into_iter().filter(|c| c.base_atoms().is_subset(&mentioned)));
        let witness = restrict(&w, &reported);
        if reported.holds_in(&witness) != Some(true) {
            return Err(SolverError::WitnessRejected(reported.to_string()));
        }
        return Ok(Some(Found { witness, constraints: reported }));
    }
    Ok(None)
}

/// The model a pattern is searched with: its agent names, with the pattern's
/// constraints over distances and constants conjoined from the start.
pub fn model_for(spec: &ProtocolSpec, pattern: &AttackPattern) -> Model {
    let mut model = Model::new(spec, pattern.agents.clone());
    model.base.extend(pattern.static_constraints());
    model.lazy = pattern.honest_only(spec);
    model
}

/// Searches the bounded state space for a state matching the pattern, allowing one
/// more capability per round, so an attack found uses as few as possible. The state
/// bound applies to each round; `explored` counts states over all rounds.
pub fn search(spec: &ProtocolSpec, pattern: &AttackPattern, bounds: &Bounds) -> Verdict {
    let model = model_for(spec, pattern);
    let mut total = 0;
    for caps in 0..=bounds.capabilities {
        let round = Bounds { capabilities: caps, ..bounds.clone() };
        let mut v = search_round(&model, pattern, &round);
        total += v.explored();
        match &mut v {
            Verdict::NoAttack { .. } => continue,
            Verdict::AttackFound { explored, .. } => *explored = total,
            Verdict::Inconclusive { explored, bounds: b, .. } => {
                *explored = total;
                *b = bounds.clone();
            }
        }
        return v;
    }
    Verdict::NoAttack { explored: total, bounds: bounds.clone() }
}

/// Depth-first search within fixed bounds.
fn search_round(model: &Model, pattern: &AttackPattern, bounds: &Bounds) -> Verdict {
    let mut seen: HashSet<u128> = HashSet::new();
    let inconclusive = |seen: &HashSet<u128>, reason: String| Verdict::Inconclusive {
        explored: seen.len(),
        bounds: bounds.clone(),
        reason,
    };
    let found = |st: SymState, f: Found, explored: usize| {
        let trace = order_by_witness(&st.log, &f.witness);
        let realizable = check_realizable(&trace, &f.constraints);
        Verdict::AttackFound {
            trace,
            witness: f.witness,
            constraints: f.constraints,
            realizable,
            explored,
            state: Box::new(st),
        }
    };
    let init = SymState::default();
    seen.insert(init.key());
    match check_goal(model, pattern, &init) {
        Ok(Some(f)) => return found(init, f, 1),
        Ok(None) => {}
        Err(e) => return inconclusive(&seen, e.to_string()),
    }
    let mut stack = vec![init];
    while let Some(st) = stack.pop() {
        let mut succ = match model.successors(&st, bounds) {
            Ok(s) => s,
            Err(e) => return inconclusive(&seen, e.to_string()),
        };
        // Honest steps are pushed last so that they are explored first.
        succ.sort_by_key(|s| {
            let last = s.log.last().and_then(|l| s.proc(&l.proc));
            last.is_some_and(|p| p.kind == RoleKind::Honest)
        });
        for s in succ {
            if s.log.len() > bounds.steps || !seen.insert(s.key()) {
                continue;
            }
            let fresh = |role: &str| {
                let r = model.roles.iter().find(|r| r.name == role)?;
                model.may_spawn(&s, r, bounds).then(|| r.body.clone())
            };
            if !pattern.feasible(&s, &fresh) {
                continue;
            }
            if seen.len() > bounds.states {
                return inconclusive(&seen, format!("state bound {} reached before exhaustion", bounds.states));
            }
            match check_goal(model, pattern, &s) {
                Ok(Some(f)) => return found(s, f, seen.len()),
                Ok(None) => {}
                Err(e) => return inconclusive(&seen, e.to_string()),
            }
            stack.push(s);
        }
    }
    Verdict::NoAttack { explored: seen.len(), bounds: bounds.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::parse_spec;

    const PING: &str = "protocol ping { role a (A?) { +(m(A?) @ $t1) } role b { -(m(X) @ $t1) . +(X @ $t2) } }";

    #[test]
    fn empty_state_only_spawns() {
        let spec = parse_spec(PING).unwrap();
        let model = Model::new(&spec, Agents::default());
        let succ = model.successors(&SymState::default(), &Bounds::default()).unwrap();
        // `b` cannot start: it begins with a reception and nothing was sent.
        assert_eq!(succ.len(), 1);
        assert_eq!(succ[0].log.len(), 2);
        assert_eq!(succ[0].log[0].action, Action::New);
    }

    #[test]
    fn reception_ties_time_to_distance() {
        let spec = parse_spec(PING).unwrap();
        let model = Model::new(&spec, Agents::default());
        let s1 = model.successors(&SymState::default(), &Bounds::default()).unwrap().remove(0);
        let s2 = model.successors(&s1, &Bounds::default()).unwrap();
        let recv = s2.iter().find(|s| s.procs.iter().any(|p| p.role == "b")).unwrap();
        let text = recv.constraints.to_string();
        assert!(text.contains("b1_t1 = a1_start + d(a,b)"), "{text}");
    }

    #[test]
    fn state_keys_ignore_interleaving() {
        let spec = parse_spec("protocol two { role a { +(x @ $t1) } role b { +(y @ $t1) } }").unwrap();
        let model = Model::new(&spec, Agents::default());
        let b = Bounds::default();
        let s1 = model.successors(&SymState::default(), &b).unwrap();
        let keys: BTreeSet<u128> = s1.iter().flat_map(|s| model.successors(s, &b).unwrap()).map(|s| s.key()).collect();
        assert_eq!(keys.len(), 1);
    }
}
