//! Printing in the same syntax the parser reads.

use super::{Cond, CondAtom, Item, Proc, ProtocolSpec, RoleKind};
use crate::term::{Term, TRUE};
use std::fmt;

impl fmt::Display for CondAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CondAtom::Eq(l, Term::Const(c)) if c == TRUE => write!(f, "{l}"),
            CondAtom::Eq(l, r) => write!(f, "{l} == {r}"),
            CondAtom::Lin(c) => write!(f, "{c}"),
        }
    }
}

impl fmt::Display for Cond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ∧ ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// A process in a position that takes a single unit: bare when it is one action.
fn unit(p: &Proc) -> String {
    match p.0.as_slice() {
        [] => "nilP".into(),
        [it @ (Item::Send(..) | Item::Recv(..))] => it.to_string(),
        _ => format!("({p})"),
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Item::Send(m, t) => write!(f, "+({m} @ {t})"),
            Item::Recv(m, t) => write!(f, "-({m} @ {t})"),
            Item::If(c, a, b) if b.is_nil() => write!(f, "if {c} then {}", unit(a)),
            Item::If(c, a, b) => write!(f, "if {c} then {} else {}", unit(a), unit(b)),
            Item::Choice(a, b) => write!(f, "{} ? {}", unit(a), unit(b)),
        }
    }
}

impl fmt::Display for Proc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_nil() {
            return f.write_str("nilP");
        }
        for (i, it) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" . ")?;
            }
            write!(f, "{it}")?;
        }
        Ok(())
    }
}

impl Proc {
    /// One top-level step per line.
    pub fn pretty(&self, indent: &str) -> String {
        if self.is_nil() {
            return format!("{indent}nilP");
        }
        let lines: Vec<String> = self.0.iter().map(|it| format!("{indent}{it}")).collect();
        lines.join(" .\n")
    }
}

impl fmt::Display for ProtocolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "protocol {} {{", self.name)?;
        writeln!(f, "  theory {} ;", self.theory)?;
        for c in &self.consts {
            match &c.constraint {
                Some(k) => writeln!(f, "  const {k} ;")?,
                None => writeln!(f, "  const {} ;", c.name)?,
            }
        }
        for r in &self.roles {
            let kw = if r.kind == RoleKind::Honest { "role" } else { "intruder" };
            match &r.self_var {
                Some(v) => writeln!(f, "  {kw} {} ({v}) {{", r.name)?,
                None => writeln!(f, "  {kw} {} {{", r.name)?,
            }
            writeln!(f, "{}", r.body.pretty("    "))?;
            writeln!(f, "  }}")?;
        }
        writeln!(f, "}}")
    }
}
