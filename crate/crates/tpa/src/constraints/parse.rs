//! Text syntax for linear constraints.
//!
//! ```text
//! set        := { constraint [ ";" | "," | "and" | "∧" ] }
//! constraint := expr rel expr          rel ∈ { =, ==, <, <=, ≤, >, >=, ≥ }
//! expr       := term { ("+" | "-") term }
//! term       := unary { ("⊖" | "monus") unary }
//! unary      := "-" unary | product
//! product    := factor { ("*" | "/") factor }     at most one non-constant factor
//! factor     := number | ident | $ident | "d" "(" ident "," ident ")" | "(" expr ")"
//! ```
//!
//! `$t1` is a time variable and is kept distinct from a plain `t1`; its atom is named `$t1`.

use super::{parse_q, ConstraintSet, LinConstraint, LinExpr, Rel, Q};
use crate::syntax::{Cursor, SyntaxError, Tok};
use num_traits::Zero;

pub fn rel_of(tok: Option<&Tok>) -> Option<Rel> {
    match tok {
        Some(Tok::Sym("=")) | Some(Tok::Sym("==")) => Some(Rel::Eq),
        Some(Tok::Sym("<")) => Some(Rel::Lt),
        Some(Tok::Sym("≤")) => Some(Rel::Le),
        Some(Tok::Sym(">")) => Some(Rel::Gt),
        Some(Tok::Sym("≥")) => Some(Rel::Ge),
        _ => None,
    }
}

pub fn parse_lin_constraint(cur: &mut Cursor) -> Result<LinConstraint, SyntaxError> {
    let lhs = parse_lin_expr(cur)?;
    let Some(rel) = rel_of(cur.peek()) else {
        return Err(cur.err(format!("expected a relation, found {}", cur.describe())));
    };
    cur.next();
    let rhs = parse_lin_expr(cur)?;
    Ok(LinConstraint::new(lhs, rel, rhs))
}

pub fn parse_lin_expr(cur: &mut Cursor) -> Result<LinExpr, SyntaxError> {
    let mut acc = term(cur)?;
    loop {
        if cur.eat_sym("+") {
            acc = acc + term(cur)?;
        } else if cur.eat_sym("-") {
            acc = acc - term(cur)?;
        } else {
            return Ok(acc);
        }
    }
}

fn term(cur: &mut Cursor) -> Result<LinExpr, SyntaxError> {
    let mut acc = unary(cur)?;
    while cur.eat_sym("⊖") || cur.eat_kw("monus") {
        let rhs = unary(cur)?;
        acc = LinExpr::monus(acc, rhs);
    }
    Ok(acc)
}

fn unary(cur: &mut Cursor) -> Result<LinExpr, SyntaxError> {
    if cur.eat_sym("-") {
        return Ok(-unary(cur)?);
    }
    product(cur)
}

fn product(cur: &mut Cursor) -> Result<LinExpr, SyntaxError> {
    let mut acc = factor(cur)?;
    loop {
        if cur.eat_sym("*") {
            let pos = cur.pos();
            let rhs = factor(cur)?;
            acc = if acc.is_constant() {
                rhs.scale(&acc.constant)
            } else if rhs.is_constant() {
                acc.scale(&rhs.constant)
            } else {
                return Err(SyntaxError::new(pos, "nonlinear product"));
            };
        } else if cur.eat_sym("/") {
            let pos = cur.pos();
            let rhs = factor(cur)?;
            if !rhs.is_constant() || rhs.constant.is_zero() {
                return Err(SyntaxError::new(pos, "division by a non-constant or zero"));
            }
            acc = acc.scale(&(Q::from_integer(1.into()) / rhs.constant));
        } else {
            return Ok(acc);
        }
    }
}

fn factor(cur: &mut Cursor) -> Result<LinExpr, SyntaxError> {
    let pos = cur.pos();
    match cur.next() {
        Some(Tok::Num(n)) => parse_q(&n).map(LinExpr::constant).ok_or_else(|| SyntaxError::new(pos, format!("bad number `{n}`"))),
        Some(Tok::Time(t)) => Ok(LinExpr::var(format!("${t}"))),
        Some(Tok::Ident(d)) if d == "d" && cur.is_sym("(") => {
            cur.expect_sym("(")?;
            let a = cur.ident()?;
            cur.expect_sym(",")?;
            let b = cur.ident()?;
            cur.expect_sym(")")?;
            Ok(LinExpr::dist(&a, &b))
        }
        Some(Tok::Ident(v)) => Ok(LinExpr::var(v)),
        Some(Tok::Sym("(")) => {
            let e = parse_lin_expr(cur)?;
            cur.expect_sym(")")?;
            Ok(e)
        }
        Some(t) => Err(SyntaxError::new(pos, format!("unexpected `{t}` in arithmetic expression"))),
        None => Err(SyntaxError::new(pos, "unexpected end of input in arithmetic expression")),
    }
}

fn finish<T>(cur: &Cursor, v: T) -> Result<T, SyntaxError> {
    if cur.is_done() {
        Ok(v)
    } else {
        Err(cur.err(format!("trailing input {}", cur.describe())))
    }
}

pub fn parse_lin_expr_str(text: &str) -> Result<LinExpr, SyntaxError> {
    let mut cur = Cursor::new(text)?;
    let e = parse_lin_expr(&mut cur)?;
    finish(&cur, e)
}

pub fn parse_constraint(text: &str) -> Result<LinConstraint, SyntaxError> {
    let mut cur = Cursor::new(text)?;
    let c = parse_lin_constraint(&mut cur)?;
    finish(&cur, c)
}

/// Parses constraints until the cursor reaches `}` or the end.
pub fn parse_constraints_until_brace(cur: &mut Cursor) -> Result<ConstraintSet, SyntaxError> {
    let mut cs = ConstraintSet::new();
    while !cur.is_done() && !cur.is_sym("}") {
        cs.push(parse_lin_constraint(cur)?);
        while cur.eat_sym(";") || cur.eat_sym(",") || cur.eat_sym("∧") || cur.eat_kw("and") {}
    }
    Ok(cs)
}

pub fn parse_constraint_set(text: &str) -> Result<ConstraintSet, SyntaxError> {
    let mut cur = Cursor::new(text)?;
    let cs = parse_constraints_until_brace(&mut cur)?;
    finish(&cur, cs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::q;

    #[test]
    fn verifier_check_parses_with_monus() {
        let c = parse_constraint("$t3 ⊖ $t2 <= 2*d").unwrap();
        assert_eq!(
            c,
            LinConstraint::le(LinExpr::monus(LinExpr::var("$t3"), LinExpr::var("$t2")), LinExpr::var("d").scale(&q(2)))
        );
        assert_eq!(parse_constraint("$t3 monus $t2 ≤ 2 * d").unwrap(), c);
        assert_ne!(parse_constraint("t3 ⊖ t2 ≤ 2*d").unwrap(), c);
        assert_eq!(parse_constraint(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn monus_binds_tighter_than_plus() {
        let c = parse_constraint("a ⊖ b + 1 = 0").unwrap();
        assert_eq!(c.lhs, LinExpr::monus(LinExpr::var("a"), LinExpr::var("b")) + LinExpr::int(1));
    }

    #[test]
    fn distances_and_sets() {
        let cs = parse_constraint_set("t1 = t0 + d(p,i) ; d(v,p) > d and d(i,i) = 0").unwrap();
        assert_eq!(cs.len(), 3);
        assert_eq!(cs.items()[2].lhs, LinExpr::zero());
    }

    #[test]
    fn display_round_trips() {
        for src in ["t1 = t0 + d(p,v)", "t3 ⊖ t2 ≤ 2*d", "-x + 1/2 < 3*y - 4", "d(i,v) + d(i,p) ≥ d(p,v)"] {
            let c = parse_constraint(src).unwrap();
            assert_eq!(parse_constraint(&c.to_string()).unwrap(), c, "{src}");
        }
    }

    #[test]
    fn nonlinear_is_rejected() {
        assert!(parse_constraint("x * y <= 1").is_err());
        assert!(parse_constraint("x <=").is_err());
    }
}
