//! Untiming: every timed action becomes an annotated untimed action.
//!
//! A send `+(M @ $t)` becomes `+(M @ me : t? → AS?)` with fresh choice variables, and
//! later uses of `$t` read `t?`. A receive `-(M @ $t)` becomes
//! `-(M @ A : t' → me : t ⊎ AS)` with fresh pattern variables, followed by the guard
//! `t = t' + d(A,me) ∧ d(A,me) ≥ 0` whose else branch is `nilP`. Conditionals and
//! choices are mapped branch by branch.
//!
//! Names are derived from the time variable: `$t3` gives `A3`, `t3'`, `t3`, `AS3` and
//! `t3?`, with a trailing `_` added on a clash.

mod print;

pub use print::{render_role_strands, render_strand, strand_paths};

use crate::constraints::{Atom, LinConstraint, LinExpr};
use crate::process::{Cond, CondAtom, Item, LabeledProc, Proc, ProtocolSpec, RoleDef, RoleKind};
use crate::term::{Term, Var, VarKind};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UItem {
    /// `+(msg @ me : time → to)`; `time` and `to` are choice variables.
    Send { msg: Term, me: Term, time: Var, to: Var },
    /// `-(msg @ from : sent → me : time ⊎ rest)`; all four are pattern variables.
    Recv { msg: Term, from: Var, sent: Var, me: Term, time: Var, rest: Var },
    /// `guard` marks the conditionals introduced after a receive.
    If { cond: Cond, then: UProc, otherwise: UProc, guard: bool },
    Choice(UProc, UProc),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UProc(pub Vec<UItem>);

impl UProc {
    pub fn nil() -> UProc {
        UProc(Vec::new())
    }

    pub fn is_nil(&self) -> bool {
        self.0.is_empty()
    }

    pub fn head(&self) -> Option<&UItem> {
        self.0.first()
    }

    pub fn tail(&self) -> UProc {
        UProc(self.0.iter().skip(1).cloned().collect())
    }

    pub fn then(mut self, next: UProc) -> UProc {
        self.0.extend(next.0);
        self
    }

    /// True if some path still sends or receives.
    pub fn has_action(&self) -> bool {
        self.0.iter().any(|it| match it {
            UItem::Send { .. } | UItem::Recv { .. } => true,
            UItem::If { then, otherwise, .. } => then.has_action() || otherwise.has_action(),
            UItem::Choice(a, b) => a.has_action() || b.has_action(),
        })
    }

    /// Sends and receives with guards and user conditionals erased, branches in order.
    pub fn skeleton(&self) -> Proc {
        let mut out = Vec::new();
        for it in &self.0 {
            match it {
                UItem::Send { msg, time, .. } => out.push(Item::Send(msg.clone(), Var::time(time.name.clone()))),
                UItem::Recv { msg, time, .. } => out.push(Item::Recv(msg.clone(), Var::time(time.name.clone()))),
                UItem::If { then, guard: true, .. } => out.extend(then.skeleton().0),
                UItem::If { cond, then, otherwise, guard: false } => {
                    out.push(Item::If(cond.clone(), then.skeleton(), otherwise.skeleton()))
                }
                UItem::Choice(a, b) => out.push(Item::Choice(a.skeleton(), b.skeleton())),
            }
        }
        Proc(out)
    }

    /// Every variable the transformation introduced, in order of appearance.
    pub fn introduced_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        for it in &self.0 {
            match it {
                UItem::Send { time, to, .. } => out.extend([time.clone(), to.clone()]),
                UItem::Recv { from, sent, time, rest, .. } => {
                    out.extend([from.clone(), sent.clone(), time.clone(), rest.clone()])
                }
                UItem::If { then, otherwise, .. } | UItem::Choice(then, otherwise) => {
                    out.extend(then.introduced_vars());
                    out.extend(otherwise.introduced_vars());
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct URole {
    pub name: String,
    pub kind: RoleKind,
    pub me: Term,
    pub body: UProc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ULabeledProc {
    pub role: String,
    pub instance: u32,
    pub step: u32,
    pub body: UProc,
}

/// The term naming the executing agent: the self variable, else `I` for intruder
/// capabilities and the role name for honest roles.
pub fn me_of(role: &RoleDef) -> Term {
    match (&role.self_var, role.kind) {
        (Some(v), _) => Term::Var(v.clone()),
        (None, RoleKind::Intruder) => Term::constant("I"),
        (None, RoleKind::Honest) => Term::constant(role.name.clone()),
    }
}

/// Spelling of a variable inside linear constraints.
pub fn atom_name(v: &Var) -> String {
    v.to_string()
}

pub fn guard_cond(from: &Var, sent: &Var, me: &Term, time: &Var) -> Cond {
    let (a, m) = (atom_name(from), me.to_string());
    let d = LinExpr::dist(&a, &m);
    Cond(vec![
        CondAtom::Lin(LinConstraint::eq(LinExpr::var(atom_name(time)), LinExpr::var(atom_name(sent)) + d.clone())),
        CondAtom::Lin(LinConstraint::ge(d, LinExpr::zero())),
    ])
}

struct Ctx {
    me: Term,
    used: BTreeSet<String>,
    /// `$t` atom name to its replacement.
    ren: BTreeMap<String, String>,
}

impl Ctx {
    fn fresh(&mut self, base: String) -> String {
        let mut n = base;
        while self.used.contains(&n) {
            n.push('_');
        }
        self.used.insert(n.clone());
        n
    }

    fn rename_cond(&self, c: &Cond) -> Cond {
        Cond(
            c.0.iter()
                .map(|a| match a {
                    CondAtom::Lin(k) => CondAtom::Lin(k.substitute(&|at| match at {
                        Atom::Var(n) => self.ren.get(n).map(|r| LinExpr::var(r.clone())),
                        _ => None,
                    })),
                    other => other.clone(),
                })
                .collect(),
        )
    }
}

fn suffix(t: &Var) -> String {
    match t.name.strip_prefix('t') {
        Some(k) if !k.is_empty() && k.chars().all(|c| c.is_ascii_digit()) => k.to_string(),
        _ => t.name.clone(),
    }
}

fn star(items: &[Item], cx: &mut Ctx) -> UProc {
    let Some((first, rest)) = items.split_first() else {
        return UProc::nil();
    };
    match first {
        Item::Send(m, t) => {
            let k = suffix(t);
            let time = Var::choice(cx.fresh(format!("t{k}")));
            let to = Var::choice(cx.fresh(format!("AS{k}")));
            cx.ren.insert(format!("${}", t.name), atom_name(&time));
            let head = UItem::Send { msg: m.clone(), me: cx.me.clone(), time, to };
            UProc(vec![head]).then(star(rest, cx))
        }
        Item::Recv(m, t) => {
            let k = suffix(t);
            let from = Var::pattern(cx.fresh(format!("A{k}")));
            let sent = Var::pattern(cx.fresh(format!("t{k}'")));
            let time = Var::pattern(cx.fresh(format!("t{k}")));
            let more = Var::pattern(cx.fresh(format!("AS{k}")));
            cx.ren.insert(format!("${}", t.name), atom_name(&time));
            let cond = guard_cond(&from, &sent, &cx.me, &time);
            let head = UItem::Recv { msg: m.clone(), from, sent, me: cx.me.clone(), time, rest: more };
            let guard = UItem::If { cond, then: star(rest, cx), otherwise: UProc::nil(), guard: true };
            UProc(vec![head, guard])
        }
        Item::If(c, a, b) => {
            let cond = cx.rename_cond(c);
            let then = star(&a.0, cx);
            let otherwise = star(&b.0, cx);
            UProc(vec![UItem::If { cond, then, otherwise, guard: false }]).then(star(rest, cx))
        }
        Item::Choice(a, b) => {
            let l = star(&a.0, cx);
            let r = star(&b.0, cx);
            UProc(vec![UItem::Choice(l, r)]).then(star(rest, cx))
        }
    }
}

/// Untimed version of one process body; `reserved` lists names the introduced variables
/// must avoid besides the body's own.
pub fn tpa2pa_star(p: &Proc, me: &Term, reserved: &BTreeSet<String>) -> UProc {
    // Time variables disappear, so their names are free for reuse.
    let mut used: BTreeSet<String> =
        p.vars().into_iter().filter(|v| v.kind != VarKind::Time).map(|v| v.name).collect();
    used.extend(me.vars().into_iter().map(|v| v.name));
    used.extend(reserved.iter().cloned());
    let mut cx = Ctx { me: me.clone(), used, ren: BTreeMap::new() };
    star(&p.0, &mut cx)
}

pub fn transform_role(role: &RoleDef, consts: &BTreeSet<String>) -> URole {
    let me = me_of(role);
    URole { name: role.name.clone(), kind: role.kind, me: me.clone(), body: tpa2pa_star(&role.body, &me, consts) }
}

pub fn transform_spec(spec: &ProtocolSpec) -> Vec<URole> {
    let consts: BTreeSet<String> = spec.consts.iter().map(|c| c.name.clone()).collect();
    spec.roles.iter().map(|r| transform_role(r, &consts)).collect()
}

/// Configuration-level mapping: each labeled process is transformed with the agent
/// term `(role,instance)`.
pub fn tpa2pa(cfg: &[LabeledProc]) -> Vec<ULabeledProc> {
    cfg.iter()
        .map(|lp| {
            let me = Term::app("pid", vec![Term::constant(lp.role.clone()), Term::constant(lp.instance.to_string())]);
            ULabeledProc {
                role: lp.role.clone(),
                instance: lp.instance,
                step: lp.step,
                body: tpa2pa_star(&lp.body, &me, &BTreeSet::new()),
            }
        })
        .collect()
}
