//! Runs as label sequences, with a JSON-lines rendering that carries a digest of every
//! state.

use super::{Action, TimedState, TransitionLabel};
use crate::constraints::fmt_q;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub initial: TimedState,
    pub steps: Vec<(TransitionLabel, TimedState)>,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct TraceLine {
    pub index: usize,
    pub role: Option<String>,
    pub instance: Option<u32>,
    pub step: Option<u32>,
    pub action: String,
    pub branch: u8,
    pub clock: String,
    pub digest: String,
}

/// Canonical text of a state; the digest is taken over this.
pub fn state_text(st: &TimedState) -> String {
    let mut s = format!("clock {}\n", fmt_q(&st.clock));
    for p in &st.procs {
        let _ = writeln!(s, "proc {} {} {} @{} : {} | {}", p.role, p.instance, p.step, p.location, p.body, p.env);
        for (v, t) in &p.times {
            let _ = writeln!(s, "  ${v} = {}", fmt_q(t));
        }
    }
    for e in &st.net {
        let rs: Vec<String> = e.receivers.iter().map(|((r, i), t)| format!("({r},{i}):{}", fmt_q(t))).collect();
        let _ = writeln!(
            s,
            "net {} @ ({},{}):{} -> {{{}}}",
            e.msg,
            e.sender.0,
            e.sender.1,
            fmt_q(&e.sent_at),
            rs.join(" ")
        );
    }
    s
}

pub fn digest(st: &TimedState) -> String {
    let h = Sha256::digest(state_text(st).as_bytes());
    h.iter().fold(String::with_capacity(64), |mut acc, b| {
        let _ = write!(acc, "{b:02x}");
        acc
    })
}

impl Trace {
    pub fn new(initial: TimedState) -> Trace {
        Trace { initial, steps: Vec::new() }
    }

    pub fn push(&mut self, label: TransitionLabel, st: TimedState) {
        self.steps.push((label, st));
    }

    pub fn last_state(&self) -> &TimedState {
        self.steps.last().map_or(&self.initial, |(_, s)| s)
    }

    pub fn labels(&self) -> impl Iterator<Item = &TransitionLabel> {
        self.steps.iter().map(|(l, _)| l)
    }

    /// Clock values at which a message was received, in order.
    pub fn reception_clocks(&self) -> Vec<crate::constraints::Q> {
        self.labels().filter(|l| matches!(l.action, Action::Recv(_))).map(|l| l.clock.clone()).collect()
    }

    pub fn lines(&self) -> Vec<TraceLine> {
        let mut out = vec![TraceLine {
            index: 0,
            role: None,
            instance: None,
            step: None,
            action: "Init".into(),
            branch: 0,
            clock: fmt_q(&self.initial.clock),
            digest: digest(&self.initial),
        }];
        for (k, (l, st)) in self.steps.iter().enumerate() {
            out.push(TraceLine {
                index: k + 1,
                role: l.proc.as_ref().map(|p| p.0.clone()),
                instance: l.proc.as_ref().map(|p| p.1),
                step: l.proc.as_ref().map(|_| l.step),
                action: l.action.to_string(),
                branch: l.branch,
                clock: fmt_q(&l.clock),
                digest: digest(st),
            });
        }
        out
    }

    pub fn to_jsonl(&self) -> String {
        let mut s = String::new();
        for line in self.lines() {
            s.push_str(&serde_json::to_string(&line).expect("trace lines serialize"));
            s.push('\n');
        }
        s
    }

    /// One label per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (l, _) in &self.steps {
            let _ = writeln!(s, "{l}");
        }
        s
    }
}
