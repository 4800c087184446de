//! Untimed process text and strand rendering.

use super::{UItem, UProc, URole};
use crate::process::{Cond, CondAtom, RoleKind};
use crate::term::{Term, TRUE};
use std::fmt;

fn unit(p: &UProc) -> String {
    match p.0.as_slice() {
        [] => "nilP".into(),
        [it @ (UItem::Send { .. } | UItem::Recv { .. })] => it.to_string(),
        _ => format!("({p})"),
    }
}

impl fmt::Display for UItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UItem::Send { msg, me, time, to } => write!(f, "+({msg} @ {me} : {time} → {to})"),
            UItem::Recv { msg, from, sent, me, time, rest } => {
                write!(f, "-({msg} @ {from} : {sent} → {me} : {time} ⊎ {rest})")
            }
            UItem::If { cond, then, otherwise, .. } if otherwise.is_nil() => write!(f, "if {cond} then {}", unit(then)),
            UItem::If { cond, then, otherwise, .. } => {
                write!(f, "if {cond} then {} else {}", unit(then), unit(otherwise))
            }
            UItem::Choice(a, b) => write!(f, "{} ? {}", unit(a), unit(b)),
        }
    }
}

impl fmt::Display for UProc {
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

impl UProc {
    /// One action per line, nesting shown by indentation.
    pub fn pretty(&self, indent: usize) -> String {
        let pad = "  ".repeat(indent);
        if self.is_nil() {
            return format!("{pad}nilP");
        }
        let mut lines = Vec::new();
        for it in &self.0 {
            let line = match it {
                UItem::If { cond, then, otherwise, .. } if then.is_nil() && otherwise.is_nil() => {
                    format!("{pad}if {cond} then nilP")
                }
                UItem::If { cond, then, otherwise, .. } => {
                    let mut s = format!("{pad}if {cond} then (\n{}\n{pad})", then.pretty(indent + 1));
                    if !otherwise.is_nil() {
                        s.push_str(&format!(" else (\n{}\n{pad})", otherwise.pretty(indent + 1)));
                    }
                    s
                }
                UItem::Choice(a, b) => {
                    format!("{pad}(\n{}\n{pad}) ? (\n{}\n{pad})", a.pretty(indent + 1), b.pretty(indent + 1))
                }
                _ => format!("{pad}{it}"),
            };
            lines.push(line);
        }
        lines.join(" .\n")
    }
}

impl fmt::Display for URole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kw = if self.kind == RoleKind::Honest { "role" } else { "intruder" };
        writeln!(f, "{kw} {} {{", self.name)?;
        writeln!(f, "{}", self.body.pretty(1))?;
        write!(f, "}}")
    }
}

fn plain(name: &str) -> String {
    name.trim_start_matches(['$', '#']).trim_end_matches('?').to_string()
}

fn plain_term(t: &Term) -> String {
    t.map_vars(&mut |v| Term::Const(v.name.clone())).to_string()
}

fn plain_cond(c: &Cond) -> String {
    let parts: Vec<String> = c
        .0
        .iter()
        .map(|a| match a {
            CondAtom::Eq(l, Term::Const(k)) if k == TRUE => plain_term(l),
            CondAtom::Eq(l, r) => format!("{} == {}", plain_term(l), plain_term(r)),
            CondAtom::Lin(k) => k.render(&plain),
        })
        .collect();
    let body = parts.join(" ∧ ");
    if c.is_linear() {
        format!("({body})")
    } else {
        body
    }
}

fn strand_item(it: &UItem) -> String {
    match it {
        UItem::Send { msg, me, time, to } => {
            format!("+({} @ {} : {} -> {})", plain_term(msg), plain_term(me), plain(&time.name), plain(&to.name))
        }
        UItem::Recv { msg, from, sent, me, time, rest } => format!(
            "-({} @ {} : {} -> {} : {} ⊎ {})",
            plain_term(msg),
            plain(&from.name),
            plain(&sent.name),
            plain_term(me),
            plain(&time.name),
            plain(&rest.name)
        ),
        _ => unreachable!("only actions are rendered directly"),
    }
}

fn cross(prefixes: Vec<Vec<String>>, tails: &[Vec<String>]) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    for p in &prefixes {
        for t in tails {
            let mut x = p.clone();
            x.extend(t.iter().cloned());
            out.push(x);
        }
    }
    out
}

/// Every complete path as a list of strand items. Else branches that perform no action
/// are left out; other else branches carry the negated condition.
pub fn strand_paths(p: &UProc) -> Vec<Vec<String>> {
    let mut paths = vec![Vec::new()];
    for it in &p.0 {
        match it {
            UItem::Send { .. } | UItem::Recv { .. } => {
                let s = strand_item(it);
                for path in &mut paths {
                    path.push(s.clone());
                }
            }
            UItem::If { cond, then, otherwise, .. } => {
                let mut alts: Vec<Vec<String>> = strand_paths(then)
                    .into_iter()
                    .map(|mut t| {
                        t.insert(0, plain_cond(cond));
                        t
                    })
                    .collect();
                if otherwise.has_action() {
                    for mut t in strand_paths(otherwise) {
                        t.insert(0, format!("¬{}", plain_cond(cond)));
                        alts.push(t);
                    }
                }
                paths = cross(paths, &alts);
            }
            UItem::Choice(a, b) => {
                let mut alts = strand_paths(a);
                alts.extend(strand_paths(b));
                paths = cross(paths, &alts);
            }
        }
    }
    paths
}

/// Strand text, one strand per path.
pub fn render_strand(p: &UProc) -> String {
    let lines: Vec<String> = strand_paths(p)
        .into_iter()
        .map(|items| if items.is_empty() { "[ nil ]".to_string() } else { format!("[ {} ]", items.join(", ")) })
        .collect();
    lines.join("\n")
}

pub fn render_role_strands(r: &URole) -> String {
    render_strand(&r.body).lines().map(|l| format!("({}): {l}", r.name)).collect::<Vec<_>>().join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::parse_proc;
    use crate::term::Var;
    use crate::transform::tpa2pa_star;
    use std::collections::BTreeSet;

    fn strand(src: &str) -> String {
        let p = parse_proc(src).unwrap();
        render_strand(&tpa2pa_star(&p, &Term::Var(Var::choice("R")), &BTreeSet::new()))
    }

    #[test]
    fn nil_and_lone_send() {
        assert_eq!(render_strand(&UProc::nil()), "[ nil ]");
        assert_eq!(strand("+(m @ $t1)"), "[ +(m @ R : t1 -> AS1) ]");
    }

    #[test]
    fn choice_gives_two_strands() {
        let s = strand("-(X @ $t1) . ((+(a @ $t2)) ? (+(b @ $t3)))");
        assert_eq!(s.lines().count(), 2);
    }
}
