//! Fourier–Motzkin satisfiability over exact rationals.
//!
//! Equalities are removed first by Gaussian substitution. Inequalities are then projected
//! one variable at a time; a contradictory constant row means UNSAT. On SAT a witness is
//! rebuilt by back-substitution and re-checked against the input by exact evaluation.

use super::{Assignment, Atom, ConstraintSet, LinExpr, NormRel, Q};
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatResult {
    Sat(Assignment),
    Unsat,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }

    pub fn witness(&self) -> Option<&Assignment> {
        match self {
            SatResult::Sat(w) => Some(w),
            SatResult::Unsat => None,
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SolverError {
    #[error("constraint limit exceeded: {rows} rows after projection (limit {limit})")]
    TooManyConstraints { rows: usize, limit: usize },
    #[error("monus atom left in solver input; split with eliminate_monus first")]
    MonusInInput,
    #[error("internal error: witness fails `{0}`")]
    WitnessRejected(String),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum EliminationOrder {
    /// Cheapest variable first, by the number of rows it would create.
    #[default]
    Greedy,
    /// Listed atoms first, in order; anything left over is chosen greedily.
    Given(Vec<Atom>),
}

#[derive(Clone, Debug)]
pub struct Solver {
    pub max_constraints: usize,
    pub order: EliminationOrder,
}

impl Default for Solver {
    fn default() -> Self {
        Solver { max_constraints: 20_000, order: EliminationOrder::Greedy }
    }
}

/// `Σ coeffs[v]·x_v + constant  rel  0`
#[derive(Clone, Debug, PartialEq, Eq)]
struct Row {
    coeffs: BTreeMap<usize, Q>,
    constant: Q,
    rel: NormRel,
}

impl Row {
    fn from_expr(e: &LinExpr, rel: NormRel, index: &BTreeMap<Atom, usize>) -> Row {
        let coeffs = e.terms.iter().map(|(a, c)| (index[a], c.clone())).collect();
        Row { coeffs, constant: e.constant.clone(), rel }
    }

    fn coeff(&self, v: usize) -> Q {
        self.coeffs.get(&v).cloned().unwrap_or_else(Q::zero)
    }

    /// `self + k·other`, dropping cancelled coefficients.
    fn add_scaled(&self, other: &Row, k: &Q) -> Row {
        let mut coeffs = self.coeffs.clone();
        for (v, c) in &other.coeffs {
            let e = coeffs.entry(*v).or_insert_with(Q::zero);
            *e += c * k;
            if e.is_zero() {
                coeffs.remove(v);
            }
        }
        Row { coeffs, constant: &self.constant + &other.constant * k, rel: self.rel }
    }

    fn scale(&self, k: &Q) -> Row {
        Row {
            coeffs: self.coeffs.iter().map(|(v, c)| (*v, c * k)).collect(),
            constant: &self.constant * k,
            rel: self.rel,
        }
    }

    /// Scales by a positive factor so the leading coefficient is ±1.
    fn normalize(self) -> Row {
        match self.coeffs.values().next() {
            Some(c) => {
                let k = Q::one() / c.abs();
                self.scale(&k)
            }
            None => self,
        }
    }

    /// For a row without variables: does it hold?
    fn trivially_holds(&self) -> bool {
        match self.rel {
            NormRel::Eq => self.constant.is_zero(),
            NormRel::Le => !self.constant.is_positive(),
            NormRel::Lt => self.constant.is_negative(),
        }
    }

    fn value_without(&self, v: usize, w: &BTreeMap<usize, Q>) -> Q {
        let mut acc = self.constant.clone();
        for (u, c) in &self.coeffs {
            if *u != v {
                acc += c * w.get(u).cloned().unwrap_or_else(Q::zero);
            }
        }
        acc
    }
}

/// Eliminated inequality variable with the rows that bounded it at that moment.
struct Projection {
    var: usize,
    rows: Vec<Row>,
}

/// Equality pivot: `var = -(rest)/coeff` with the row as it stood when pivoted.
struct Pivot {
    var: usize,
    row: Row,
}

impl Solver {
    pub fn new() -> Solver {
        Solver::default()
    }

    pub fn with_order(order: EliminationOrder) -> Solver {
        Solver { order, ..Solver::default() }
    }

    /// Decides a monus-free set.
    pub fn check(&self, cs: &ConstraintSet) -> Result<SatResult, SolverError> {
        if cs.has_monus() {
            return Err(SolverError::MonusInInput);
        }
        let atoms: Vec<Atom> = cs
            .iter()
            .flat_map(|c| {
                let (e, _) = c.normalized();
                e.terms.into_keys()
            })
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index: BTreeMap<Atom, usize> = atoms.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();

        let mut eqs = Vec::new();
        let mut ineqs = Vec::new();
        for c in cs.iter() {
            let (e, rel) = c.normalized();
            let row = Row::from_expr(&e, rel, &index);
            if rel == NormRel::Eq {
                eqs.push(row);
            } else {
                ineqs.push(row);
            }
        }

        let Some(pivots) = gauss(&mut eqs, &mut ineqs, &self.order, &index) else {
            return Ok(SatResult::Unsat);
        };
        let Some(projections) = self.project(ineqs, &index)? else {
            return Ok(SatResult::Unsat);
        };

        let mut w: BTreeMap<usize, Q> = BTreeMap::new();
        for p in projections.iter().rev() {
            let value = choose_value(p, &w);
            w.insert(p.var, value);
        }
        for p in pivots.iter().rev() {
            let c = p.row.coeff(p.var);
            let rest = p.row.value_without(p.var, &w);
            w.insert(p.var, -rest / c);
        }
        let witness: Assignment = atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), w.get(&i).cloned().unwrap_or_else(Q::zero)))
            .collect();
        for c in cs.iter() {
            if c.holds_in(&witness) != Some(true) {
                return Err(SolverError::WitnessRejected(c.to_string()));
            }
        }
        Ok(SatResult::Sat(witness))
    }

    fn project(&self, mut rows: Vec<Row>, index: &BTreeMap<Atom, usize>) -> Result<Option<Vec<Projection>>, SolverError> {
        let mut out = Vec::new();
        let mut given: Vec<usize> = match &self.order {
            EliminationOrder::Greedy => Vec::new(),
            EliminationOrder::Given(order) => order.iter().filter_map(|a| index.get(a).copied()).collect(),
        };
        given.reverse();
        loop {
            rows = match tidy(rows) {
                Some(r) => r,
                None => return Ok(None),
            };
            let live: BTreeSet<usize> = rows.iter().flat_map(|r| r.coeffs.keys().copied()).collect();
            if live.is_empty() {
                return Ok(Some(out));
            }
            let var = loop {
                match given.pop() {
                    Some(v) if live.contains(&v) => break v,
                    Some(_) => continue,
                    None => break pick_greedy(&rows, &live),
                }
            };
            let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
            for r in rows {
                let c = r.coeff(var);
                if c.is_positive() {
                    pos.push(r);
                } else if c.is_negative() {
                    neg.push(r);
                } else {
                    rest.push(r);
                }
            }
            for p in &pos {
                let cp = p.coeff(var);
                for n in &neg {
                    let cn = -n.coeff(var);
                    // p/cp + n/cn cancels `var`; both multipliers are positive.
                    let mut combined = p.scale(&(Q::one() / &cp)).add_scaled(n, &(Q::one() / &cn));
                    combined.coeffs.remove(&var);
                    combined.rel = if p.rel == NormRel::Lt || n.rel == NormRel::Lt { NormRel::Lt } else { NormRel::Le };
                    rest.push(combined);
                }
            }
            if rest.len() > self.max_constraints {
                return Err(SolverError::TooManyConstraints { rows: rest.len(), limit: self.max_constraints });
            }
            let mut bounds = pos;
            bounds.extend(neg);
            out.push(Projection { var, rows: bounds });
            rows = rest;
        }
    }
}

/// Gaussian elimination of equalities, substituting into the inequalities. `None` on a
/// contradictory constant equality.
fn gauss(eqs: &mut Vec<Row>, ineqs: &mut [Row], order: &EliminationOrder, index: &BTreeMap<Atom, usize>) -> Option<Vec<Pivot>> {
    let preferred: Vec<usize> = match order {
        EliminationOrder::Greedy => Vec::new(),
        EliminationOrder::Given(o) => o.iter().filter_map(|a| index.get(a).copied()).collect(),
    };
    let mut pivots = Vec::new();
    while let Some(row) = eqs.pop() {
        if row.coeffs.is_empty() {
            if !row.constant.is_zero() {
                return None;
            }
            continue;
        }
        let var = preferred
            .iter()
            .copied()
            .find(|v| row.coeffs.contains_key(v))
            .unwrap_or_else(|| *row.coeffs.keys().next().expect("nonempty"));
        let c = row.coeff(var);
        let eliminate = |r: &mut Row| {
            let k = r.coeff(var);
            if !k.is_zero() {
                let rel = r.rel;
                *r = r.add_scaled(&row, &(-k / &c));
                r.coeffs.remove(&var);
                r.rel = rel;
            }
        };
        for r in eqs.iter_mut() {
            eliminate(r);
        }
        for r in ineqs.iter_mut() {
            eliminate(r);
        }
        pivots.push(Pivot { var, row });
    }
    Some(pivots)
}

/// Drops trivially true rows, normalizes and keeps only the tightest row per direction.
/// `None` if a constant row is false.
fn tidy(rows: Vec<Row>) -> Option<Vec<Row>> {
    let mut best: BTreeMap<BTreeMap<usize, Q>, (Q, NormRel)> = BTreeMap::new();
    for r in rows {
        if r.coeffs.is_empty() {
            if !r.trivially_holds() {
                return None;
            }
            continue;
        }
        let r = r.normalize();
        match best.get_mut(&r.coeffs) {
            Some((k, rel)) => {
                // a·x + k ≤ 0: a larger constant is tighter; strict wins ties.
                if r.constant > *k || (r.constant == *k && r.rel == NormRel::Lt) {
                    *k = r.constant;
                    *rel = r.rel;
                }
            }
            None => {
                best.insert(r.coeffs, (r.constant, r.rel));
            }
        }
    }
    Some(best.into_iter().map(|(coeffs, (constant, rel))| Row { coeffs, constant, rel }).collect())
}

fn pick_greedy(rows: &[Row], live: &BTreeSet<usize>) -> usize {
    let mut best = (i64::MAX, usize::MAX);
    for &v in live {
        let (mut p, mut n) = (0i64, 0i64);
        for r in rows {
            let c = r.coeff(v);
            if c.is_positive() {
                p += 1;
            } else if c.is_negative() {
                n += 1;
            }
        }
        let score = p * n - p - n;
        if score < best.0 {
            best = (score, v);
        }
    }
    best.1
}

/// Picks a value inside the bounds the projection recorded, given later variables.
fn choose_value(p: &Projection, w: &BTreeMap<usize, Q>) -> Q {
    let mut lo: Option<(Q, bool)> = None;
    let mut hi: Option<(Q, bool)> = None;
    for r in &p.rows {
        let c = r.coeff(p.var);
        let strict = r.rel == NormRel::Lt;
        // c·x + rest rel 0  =>  x rel' -rest/c
        let bound = -r.value_without(p.var, w) / &c;
        if c.is_positive() {
            let tighter = match &hi {
                None => true,
                Some((h, s)) => bound < *h || (bound == *h && strict && !s),
            };
            if tighter {
                hi = Some((bound, strict));
            }
        } else {
            let tighter = match &lo {
                None => true,
                Some((l, s)) => bound > *l || (bound == *l && strict && !s),
            };
            if tighter {
                lo = Some((bound, strict));
            }
        }
    }
    match (lo, hi) {
        (None, None) => Q::zero(),
        (Some((l, false)), None) => l,
        (Some((l, true)), None) => l + Q::one(),
        (None, Some((h, false))) => h,
        (None, Some((h, true))) => h - Q::one(),
        (Some((l, false)), Some(_)) => l,
        (Some(_), Some((h, false))) => h,
        (Some((l, true)), Some((h, true))) => (l + h) / Q::from_integer(2.into()),
    }
}

/// Satisfiability of a set that may contain monus atoms: the disjunction over the
/// monus case split.
pub fn is_satisfiable(cs: &ConstraintSet) -> Result<SatResult, SolverError> {
    let solver = Solver::default();
    for branch in cs.eliminate_monus() {
        if let SatResult::Sat(w) = solver.check(&branch)? {
            let w = restrict(&w, cs);
            return Ok(SatResult::Sat(w));
        }
    }
    Ok(SatResult::Unsat)
}

fn restrict(w: &Assignment, cs: &ConstraintSet) -> Assignment {
    let wanted = cs.base_atoms();
    w.iter().filter(|(a, _)| wanted.contains(a)).map(|(a, q)| (a.clone(), q.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{q, LinConstraint};

    fn x() -> LinExpr {
        LinExpr::var("x")
    }

    #[test]
    fn opposite_strict_bounds_are_unsat() {
        let cs = ConstraintSet::from_vec(vec![
            LinConstraint::gt(x(), LinExpr::zero()),
            LinConstraint::lt(x(), LinExpr::zero()),
        ]);
        assert_eq!(Solver::new().check(&cs).unwrap(), SatResult::Unsat);
    }

    #[test]
    fn closed_point_is_sat_at_zero() {
        let cs = ConstraintSet::from_vec(vec![
            LinConstraint::ge(x(), LinExpr::zero()),
            LinConstraint::le(x(), LinExpr::zero()),
        ]);
        let w = Solver::new().check(&cs).unwrap();
        assert_eq!(w.witness().unwrap()[&Atom::var("x")], q(0));
    }

    #[test]
    fn equality_chain_back_substitutes() {
        let cs = ConstraintSet::from_vec(vec![
            LinConstraint::eq(LinExpr::var("t1"), LinExpr::var("t0") + LinExpr::dist("p", "v")),
            LinConstraint::eq(LinExpr::dist("p", "v"), LinExpr::int(2)),
            LinConstraint::ge(LinExpr::var("t0"), LinExpr::int(3)),
        ]);
        let w = Solver::new().check(&cs).unwrap();
        let w = w.witness().unwrap();
        assert_eq!(w[&Atom::var("t1")], &w[&Atom::var("t0")] + q(2));
    }

    #[test]
    fn strict_chain_needs_strictness_tracking() {
        // x < y < z < x
        let cs = ConstraintSet::from_vec(vec![
            LinConstraint::lt(LinExpr::var("x"), LinExpr::var("y")),
            LinConstraint::lt(LinExpr::var("y"), LinExpr::var("z")),
            LinConstraint::le(LinExpr::var("z"), LinExpr::var("x")),
        ]);
        assert_eq!(Solver::new().check(&cs).unwrap(), SatResult::Unsat);
    }

    #[test]
    fn monus_input_is_rejected_by_the_core_solver() {
        let cs = ConstraintSet::from_vec(vec![LinConstraint::le(
            LinExpr::monus(LinExpr::var("a"), LinExpr::var("b")),
            LinExpr::int(1),
        )]);
        assert_eq!(Solver::new().check(&cs), Err(SolverError::MonusInInput));
        assert!(is_satisfiable(&cs).unwrap().is_sat());
    }

    #[test]
    fn guard_trips_on_tiny_limit() {
        let mut cs = ConstraintSet::new();
        for i in 0..6 {
            cs.push(LinConstraint::le(LinExpr::var(format!("a{i}")), LinExpr::var("x")));
            cs.push(LinConstraint::ge(LinExpr::var(format!("b{i}")), LinExpr::var("x")));
        }
        let solver = Solver { max_constraints: 4, order: EliminationOrder::Given(vec![Atom::var("x")]) };
        assert!(matches!(solver.check(&cs), Err(SolverError::TooManyConstraints { .. })));
    }
}
