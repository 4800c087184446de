//! Moving between concrete runs and symbolic traces.
//!
//! `induce` follows the labels of a simulator trace through the symbolic semantics and
//! records the clock of every start and reception, so that the topology together with
//! those clocks is a candidate witness. `replay` goes the other way: it searches for a
//! concrete run on a witness topology in which every process performs the same sends
//! and receptions, from the same senders, as in a symbolic state.

use super::{Agents, EntryId, EventKind, Model, SymState};
use crate::constraints::{q, Assignment, Atom, LinExpr, Q};
use crate::process::{ProtocolSpec, RoleKind};
use crate::sim::{enabled, Action, ProcId, TimedState, Topology, TopologyError, Trace, TransitionLabel};
use crate::term::Term;
use num_traits::Zero;
use std::collections::{BTreeMap, HashSet};

/// Agent names of a topology: role locations, with capabilities at the intruder's.
pub fn agents_of(topo: &Topology, spec: &ProtocolSpec) -> Agents {
    let mut a = Agents::default();
    for r in &spec.roles {
        if let Some(loc) = topo.location_of(r) {
            match r.kind {
                RoleKind::Honest => {
                    a.roles.insert(r.name.clone(), loc.to_string());
                }
                RoleKind::Intruder => a.intruder = loc.to_string(),
            }
        }
    }
    a
}

fn single_atom(e: &LinExpr) -> Option<Atom> {
    e.terms.keys().next().cloned()
}

/// The symbolic state reached by following a concrete trace, with the induced
/// assignment: the topology's distances and constants plus the clock of each start and
/// reception.
pub fn induce(spec: &ProtocolSpec, topo: &Topology, trace: &Trace) -> Result<(SymState, Assignment), String> {
    let mut model = Model::new(spec, agents_of(topo, spec));
    model.prune_idle = false;
    let mut st = SymState::default();
    let mut w = topo.assignment();
    let mut entries: Vec<EntryId> = Vec::new();
    for (n, (label, conc)) in trace.steps.iter().enumerate() {
        let fail = |why: &str| format!("step {} `{label}`: {why}", n + 1);
        if label.action == Action::Time {
            continue;
        }
        let Some(pid) = &label.proc else {
            return Err(fail("label without a process"));
        };
        match &label.action {
            Action::New => {
                st = model.spawn(&st, &pid.0).ok_or_else(|| fail("unknown role"))?;
                if let Some(a) = st.log.last().and_then(|l| single_atom(&l.time)) {
                    w.insert(a, label.clock.clone());
                }
                continue;
            }
            Action::Discard(_) => return Err(fail("discarded sends have no symbolic counterpart")),
            _ => {}
        }
        let k = st.procs.iter().position(|p| p.id() == *pid).ok_or_else(|| fail("process not started"))?;
        let env = &conc.procs.iter().find(|p| p.id() == *pid).ok_or_else(|| fail("process missing"))?.env;
        let wanted_entry = match label.from {
            Some((_, ei)) => Some(entries.get(ei).cloned().ok_or_else(|| fail("unknown network entry"))?),
            None => None,
        };
        let succ = model.proc_steps(&st, k).map_err(|e| fail(&e.to_string()))?;
        let mut chosen = None;
        for s in succ {
            let Some(last) = s.log.last() else { continue };
            let same = match (&last.action, &label.action) {
                (Action::Cond(_), Action::Cond(_)) => true,
                (a, b) => a == b,
            };
            if !same || last.branch != label.branch || s.procs[k].env != *env {
                continue;
            }
            if wanted_entry.is_some() && last.entry != wanted_entry {
                continue;
            }
            let mut w2 = w.clone();
            if matches!(label.action, Action::Recv(_)) {
                if let Some(a) = single_atom(&last.time) {
                    w2.insert(a, label.clock.clone());
                }
            }
            if model.base.union(&s.constraints).holds_in(&w2) == Some(true) {
                chosen = Some((s, w2));
                break;
            }
        }
        let (s, w2) = chosen.ok_or_else(|| fail("no symbolic step agrees with the run"))?;
        if let (Action::Send(_), Some(e)) = (&label.action, s.log.last().and_then(|l| l.entry.clone())) {
            entries.push(e);
        }
        st = s;
        w = w2;
    }
    Ok((st, w))
}

/// A topology with the witness's distances and constants and every role placed at its
/// agent. Distances the witness leaves open are set to the largest known one, which
/// keeps the triangle inequalities.
pub fn witness_topology(spec: &ProtocolSpec, agents: &Agents, witness: &Assignment) -> Result<Topology, TopologyError> {
    let locs = agents.participants(spec);
    let known: Vec<Q> = witness.iter().filter(|(a, _)| a.is_dist()).map(|(_, v)| v.clone()).collect();
    let fill = known.iter().max().cloned().unwrap_or_else(|| q(1));
    let mut dists = Vec::new();
    for (i, a) in locs.iter().enumerate() {
        for b in &locs[i + 1..] {
            let v = Atom::dist(a, b).and_then(|at| witness.get(&at).cloned()).unwrap_or_else(|| fill.clone());
            dists.push((a.clone(), b.clone(), v));
        }
    }
    let consts = spec
        .consts
        .iter()
        .map(|c| (c.name.clone(), witness.get(&Atom::var(c.name.clone())).cloned().unwrap_or_else(|| q(1))))
        .collect();
    let placement = spec.honest().map(|r| (r.name.clone(), agents.of(&r.name, r.kind))).collect();
    Topology::new("witness", locs, dists, consts, placement, Some(agents.intruder.clone()), vec![])
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Expect {
    kind: EventKind,
    msg: Term,
    sender: Option<ProcId>,
}

struct Replay<'a> {
    spec: &'a ProtocolSpec,
    topo: &'a Topology,
    want: BTreeMap<ProcId, Vec<Expect>>,
    max_steps: usize,
    seen: HashSet<TimedState>,
    budget: usize,
}

impl Replay<'_> {
    fn done(&self, st: &TimedState, progress: &BTreeMap<ProcId, usize>) -> bool {
        self.want.iter().all(|(id, evs)| st.procs.iter().any(|p| p.id() == *id) && progress.get(id).copied().unwrap_or(0) == evs.len())
    }

    /// Progress after taking the label, or `None` if the label leaves the symbolic run.
    fn admit(&self, l: &TransitionLabel, progress: &BTreeMap<ProcId, usize>) -> Option<BTreeMap<ProcId, usize>> {
        let Some(pid) = &l.proc else {
            return Some(progress.clone());
        };
        let evs = self.want.get(pid)?;
        let k = progress.get(pid).copied().unwrap_or(0);
        let next = evs.get(k);
        let mut p2 = progress.clone();
        match &l.action {
            Action::New => Some(p2),
            Action::Discard(_) => None,
            Action::Cond(_) | Action::Choice => Some(p2),
            Action::Send(m) => match next {
                Some(e) if e.kind == EventKind::Send && e.msg == *m => {
                    p2.insert(pid.clone(), k + 1);
                    Some(p2)
                }
                None => Some(p2),
                _ => None,
            },
            Action::Recv(m) => {
                let sender = l.from.as_ref().map(|(s, _)| s.clone());
                match next {
                    Some(e) if e.kind == EventKind::Recv && e.msg == *m && e.sender == sender => {
                        p2.insert(pid.clone(), k + 1);
                        Some(p2)
                    }
                    _ => None,
                }
            }
            Action::Time => Some(p2),
        }
    }

    fn dfs(&mut self, st: &TimedState, progress: &BTreeMap<ProcId, usize>, path: &mut Vec<(TransitionLabel, TimedState)>) -> bool {
        if self.done(st, progress) {
            return true;
        }
        if path.len() >= self.max_steps || self.budget == 0 || !self.seen.insert(st.clone()) {
            return false;
        }
        self.budget -= 1;
        let mut options = enabled(st, self.topo, self.spec);
        options.sort_by_key(|(l, _)| match l.action {
            Action::New => 1,
            Action::Time => 2,
            _ => 0,
        });
        for (l, next) in options {
            let Some(p2) = self.admit(&l, progress) else { continue };
            path.push((l, next.clone()));
            if self.dfs(&next, &p2, path) {
                return true;
            }
            path.pop();
        }
        false
    }
}

/// A concrete run on `topo` reproducing the events of every process of `target`.
pub fn replay(spec: &ProtocolSpec, topo: &Topology, target: &SymState, max_steps: usize) -> Result<Trace, String> {
    topo.check_spec(spec).map_err(|e| e.to_string())?;
    let mut want = BTreeMap::new();
    for p in &target.procs {
        let evs = p
            .events
            .iter()
            .map(|e| Expect {
                kind: e.kind,
                msg: e.msg.clone(),
                sender: match e.kind {
                    EventKind::Recv => target.ik.get(&e.entry).map(|x| x.sender.clone()),
                    EventKind::Send => None,
                },
            })
            .collect();
        want.insert(p.id(), evs);
    }
    let mut r = Replay { spec, topo, want, max_steps, seen: HashSet::new(), budget: 200_000 };
    let init = TimedState { clock: Q::zero(), ..TimedState::default() };
    let mut path = Vec::new();
    if r.dfs(&init, &BTreeMap::new(), &mut path) {
        let mut t = Trace::new(init);
        for (l, s) in path {
            t.push(l, s);
        }
        Ok(t)
    } else {
        Err(format!("no concrete run within {max_steps} steps reproduces the symbolic events"))
    }
}
