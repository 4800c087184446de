//! Schedulers resolve the nondeterminism of a run.
//!
//! Schedule files hold one step per line; `#` starts a comment.
//!
//! ```text
//! new prover
//! send prover 1
//! send-discard prover 1
//! time
//! recv intruder_forward 1 [from prover 1] [entry 0]
//! cond verifier 1
//! choice verifier 1 2
//! ```

use super::{Action, SimError, TimedState, TransitionLabel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScheduleStep {
    New(String),
    Send { role: String, instance: u32, store: bool },
    Recv { role: String, instance: u32, from: Option<(String, u32)>, entry: Option<usize> },
    Cond { role: String, instance: u32 },
    Choice { role: String, instance: u32, branch: u8 },
    Time,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schedule {
    pub steps: Vec<(ScheduleStep, String)>,
}

pub fn parse_schedule(text: &str) -> Result<Schedule, String> {
    let mut steps = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let w: Vec<&str> = line.split_whitespace().collect();
        let err = |m: &str| format!("schedule line {}: {m}: `{line}`", n + 1);
        let inst = |s: Option<&&str>| s.and_then(|x| x.parse::<u32>().ok()).ok_or_else(|| err("expected an instance number"));
        let role = |s: Option<&&str>| s.map(|x| x.to_string()).ok_or_else(|| err("expected a role name"));
        let step = match w[0] {
            "new" if w.len() == 2 => ScheduleStep::New(w[1].to_string()),
            "time" if w.len() == 1 => ScheduleStep::Time,
            "send" | "send-discard" if w.len() == 3 => {
                ScheduleStep::Send { role: role(w.get(1))?, instance: inst(w.get(2))?, store: w[0] == "send" }
            }
            "cond" if w.len() == 3 => ScheduleStep::Cond { role: role(w.get(1))?, instance: inst(w.get(2))? },
            "choice" if w.len() == 4 => {
                let branch = match w[3] {
                    "1" => 1,
                    "2" => 2,
                    _ => return Err(err("branch must be 1 or 2")),
                };
                ScheduleStep::Choice { role: role(w.get(1))?, instance: inst(w.get(2))?, branch }
            }
            "recv" if w.len() >= 3 => {
                let (mut from, mut entry) = (None, None);
                let mut k = 3;
                while k < w.len() {
                    match w[k] {
                        "from" => {
                            from = Some((role(w.get(k + 1))?, inst(w.get(k + 2))?));
                            k += 3;
                        }
                        "entry" => {
                            entry = Some(w.get(k + 1).and_then(|x| x.parse().ok()).ok_or_else(|| err("expected an entry index"))?);
                            k += 2;
                        }
                        _ => return Err(err("unexpected word")),
                    }
                }
                ScheduleStep::Recv { role: role(w.get(1))?, instance: inst(w.get(2))?, from, entry }
            }
            _ => return Err(err("unknown step")),
        };
        steps.push((step, line.to_string()));
    }
    Ok(Schedule { steps })
}

impl ScheduleStep {
    pub fn matches(&self, l: &TransitionLabel) -> bool {
        let who = |r: &str, i: u32| l.proc.as_ref().is_some_and(|(lr, li)| lr == r && *li == i);
        match self {
            ScheduleStep::New(r) => l.action == Action::New && l.proc.as_ref().is_some_and(|(lr, _)| lr == r),
            ScheduleStep::Time => l.action == Action::Time,
            ScheduleStep::Send { role, instance, store } => {
                who(role, *instance)
                    && matches!((&l.action, store), (Action::Send(_), true) | (Action::Discard(_), false))
            }
            ScheduleStep::Recv { role, instance, from, entry } => {
                who(role, *instance)
                    && matches!(l.action, Action::Recv(_))
                    && from.as_ref().is_none_or(|f| l.from.as_ref().is_some_and(|(s, _)| s == f))
                    && entry.is_none_or(|e| l.from.as_ref().is_some_and(|(_, k)| *k == e))
            }
            ScheduleStep::Cond { role, instance } => who(role, *instance) && matches!(l.action, Action::Cond(_)),
            ScheduleStep::Choice { role, instance, branch } => {
                who(role, *instance) && l.action == Action::Choice && l.branch == *branch
            }
        }
    }
}

pub trait Scheduler {
    /// Index of the option to take, or `None` to stop.
    fn pick(&mut self, st: &TimedState, options: &[(TransitionLabel, TimedState)]) -> Result<Option<usize>, SimError>;
}

/// Replays a schedule, failing on the first step that is not enabled.
pub struct ScriptScheduler {
    schedule: Schedule,
    at: usize,
}

impl ScriptScheduler {
    pub fn new(schedule: Schedule) -> ScriptScheduler {
        ScriptScheduler { schedule, at: 0 }
    }
}

impl Scheduler for ScriptScheduler {
    fn pick(&mut self, _st: &TimedState, options: &[(TransitionLabel, TimedState)]) -> Result<Option<usize>, SimError> {
        let Some((step, line)) = self.schedule.steps.get(self.at) else {
            return Ok(None);
        };
        self.at += 1;
        match options.iter().position(|(l, _)| step.matches(l)) {
            Some(i) => Ok(Some(i)),
            None => Err(SimError::Replay {
                step: self.at,
                line: line.clone(),
                reason: "no enabled transition matches".into(),
            }),
        }
    }
}

fn within_bounds(bounds: &BTreeMap<String, u32>, default: u32, l: &TransitionLabel) -> bool {
    match (&l.action, &l.proc) {
        (Action::New, Some((r, i))) => *i <= *bounds.get(r).unwrap_or(&default),
        _ => true,
    }
}

/// Takes process steps in order, then new processes within the bounds, then time.
/// Sends are always stored.
pub struct FirstScheduler {
    pub bounds: BTreeMap<String, u32>,
    pub default_bound: u32,
}

impl Scheduler for FirstScheduler {
    fn pick(&mut self, _st: &TimedState, options: &[(TransitionLabel, TimedState)]) -> Result<Option<usize>, SimError> {
        let rank = |l: &TransitionLabel| match l.action {
            Action::Discard(_) => None,
            Action::New if !within_bounds(&self.bounds, self.default_bound, l) => None,
            Action::New => Some(1),
            Action::Time => Some(2),
            _ => Some(0),
        };
        Ok((0..options.len()).filter_map(|i| rank(&options[i].0).map(|r| (r, i))).min().map(|(_, i)| i))
    }
}

/// Uniform choice among stored sends, receptions, branches, time steps and new
/// processes within the bounds, from a seeded generator.
pub struct RandomScheduler {
    rng: ChaCha8Rng,
    pub bounds: BTreeMap<String, u32>,
    pub default_bound: u32,
}

impl RandomScheduler {
    pub fn new(seed: u64, bounds: BTreeMap<String, u32>, default_bound: u32) -> RandomScheduler {
        RandomScheduler { rng: ChaCha8Rng::seed_from_u64(seed), bounds, default_bound }
    }
}

impl Scheduler for RandomScheduler {
    fn pick(&mut self, _st: &TimedState, options: &[(TransitionLabel, TimedState)]) -> Result<Option<usize>, SimError> {
        let ok: Vec<usize> = (0..options.len())
            .filter(|&i| {
                let l = &options[i].0;
                !matches!(l.action, Action::Discard(_)) && within_bounds(&self.bounds, self.default_bound, l)
            })
            .collect();
        if ok.is_empty() {
            return Ok(None);
        }
        Ok(Some(ok[self.rng.gen_range(0..ok.len())]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_lines_parse() {
        let s = parse_schedule("new prover\nsend prover 1 # commit\n\ntime\nrecv verifier 1 from intruder_forward 2 entry 1\nchoice r 1 2").unwrap();
        assert_eq!(s.steps.len(), 5);
        assert_eq!(
            s.steps[3].0,
            ScheduleStep::Recv {
                role: "verifier".into(),
                instance: 1,
                from: Some(("intruder_forward".into(), 2)),
                entry: Some(1)
            }
        );
        assert!(parse_schedule("jump").is_err());
        assert!(parse_schedule("choice r 1 3").is_err());
    }
}
