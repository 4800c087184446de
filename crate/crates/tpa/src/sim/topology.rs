//! Fixed topologies: named locations, pairwise distances, constant values and the
//! placement of roles.
//!
//! ```text
//! topology mafia_demo {
//!   v p i ;
//!   d(v,p) = 2.0 ; d(v,i) = 1.0 ; d(p,i) = 1.0 ;
//!   const d = 1.0 ;
//!   verifier at v ; prover at p ; intruder at i ;
//!   require d(v,p) > d ;
//! }
//! ```
//!
//! Every pair of distinct locations needs a distance. `intruder at L` places all
//! intruder capabilities at `L`. `require` lines are extra scenario constraints checked
//! on construction.

use crate::constraints::{fmt_q, parse_lin_constraint, parse_q, Assignment, Atom, LinConstraint, Q};
use crate::process::{ProtocolSpec, RoleDef, RoleKind};
use crate::syntax::{Cursor, SyntaxError, Tok};
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TopologyError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("unknown location `{0}`")]
    UnknownLocation(String),
    #[error("no distance given between `{0}` and `{1}`")]
    MissingDistance(String, String),
    #[error("distance d({0},{1}) is given twice")]
    DuplicateDistance(String, String),
    #[error("distance d({0},{1}) is negative")]
    Negative(String, String),
    #[error("triangle inequality fails: d({a},{b}) = {ab} > d({a},{c}) + d({c},{b}) = {acb}")]
    Triangle { a: String, b: String, c: String, ab: String, acb: String },
    #[error("required constraint `{0}` does not hold")]
    Requirement(String),
    #[error("required constraint `{0}` mentions an unknown atom")]
    Unevaluable(String),
    #[error("role `{0}` has no location")]
    Unplaced(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Topology {
    pub name: String,
    pub locations: Vec<String>,
    dist: BTreeMap<(String, String), Q>,
    pub consts: BTreeMap<String, Q>,
    pub placement: BTreeMap<String, String>,
    pub intruder: Option<String>,
    pub requires: Vec<LinConstraint>,
}

fn key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl Topology {
    /// Builds and validates a topology.
    pub fn new(
        name: impl Into<String>,
        locations: Vec<String>,
        dists: Vec<(String, String, Q)>,
        consts: BTreeMap<String, Q>,
        placement: BTreeMap<String, String>,
        intruder: Option<String>,
        requires: Vec<LinConstraint>,
    ) -> Result<Topology, TopologyError> {
        let mut dist = BTreeMap::new();
        for (a, b, q) in dists {
            for x in [&a, &b] {
                if !locations.contains(x) {
                    return Err(TopologyError::UnknownLocation(x.clone()));
                }
            }
            if a == b {
                if !q.is_zero() {
                    return Err(TopologyError::Invalid(format!("d({a},{a}) must be 0")));
                }
                continue;
            }
            if q.is_negative() {
                return Err(TopologyError::Negative(a, b));
            }
            if dist.insert(key(&a, &b), q).is_some() {
                return Err(TopologyError::DuplicateDistance(a, b));
            }
        }
        for l in placement.values().chain(intruder.iter()) {
            if !locations.contains(l) {
                return Err(TopologyError::UnknownLocation(l.clone()));
            }
        }
        let t = Topology { name: name.into(), locations, dist, consts, placement, intruder, requires };
        t.validate()?;
        Ok(t)
    }

    fn validate(&self) -> Result<(), TopologyError> {
        let ls = &self.locations;
        for (i, a) in ls.iter().enumerate() {
            for b in &ls[i + 1..] {
                if !self.dist.contains_key(&key(a, b)) {
                    return Err(TopologyError::MissingDistance(a.clone(), b.clone()));
                }
            }
        }
        for a in ls {
            for b in ls {
                for c in ls {
                    if a == b || b == c || a == c {
                        continue;
                    }
                    let (ab, acb) = (self.dist(a, b), self.dist(a, c) + self.dist(c, b));
                    if ab > acb {
                        return Err(TopologyError::Triangle {
                            a: a.clone(),
                            b: b.clone(),
                            c: c.clone(),
                            ab: fmt_q(&ab),
                            acb: fmt_q(&acb),
                        });
                    }
                }
            }
        }
        let w = self.assignment();
        for r in &self.requires {
            match r.holds_in(&w) {
                Some(true) => {}
                Some(false) => return Err(TopologyError::Requirement(r.to_string())),
                None => return Err(TopologyError::Unevaluable(r.to_string())),
            }
        }
        Ok(())
    }

    /// Distance between two locations; 0 for a location and itself.
    pub fn dist(&self, a: &str, b: &str) -> Q {
        if a == b {
            return Q::zero();
        }
        self.dist.get(&key(a, b)).cloned().unwrap_or_else(Q::zero)
    }

    /// Distances as atoms plus constant values, for evaluating constraints.
    pub fn assignment(&self) -> Assignment {
        let mut w = Assignment::new();
        for ((a, b), q) in &self.dist {
            if let Some(at) = Atom::dist(a, b) {
                w.insert(at, q.clone());
            }
        }
        for (c, q) in &self.consts {
            w.insert(Atom::var(c.clone()), q.clone());
        }
        w
    }

    pub fn location_of(&self, role: &RoleDef) -> Option<&str> {
        match role.kind {
            RoleKind::Honest => self.placement.get(&role.name).map(String::as_str),
            RoleKind::Intruder => self.placement.get(&role.name).or(self.intruder.as_ref()).map(String::as_str),
        }
    }

    /// Checks that every role of the specification has a location and every declared
    /// constant has a value satisfying its declaration.
    pub fn check_spec(&self, spec: &ProtocolSpec) -> Result<(), TopologyError> {
        for r in &spec.roles {
            if self.location_of(r).is_none() {
                return Err(TopologyError::Unplaced(r.name.clone()));
            }
        }
        let w = self.assignment();
        for c in &spec.consts {
            if !self.consts.contains_key(&c.name) {
                return Err(TopologyError::Invalid(format!("constant `{}` has no value in the topology", c.name)));
            }
            if let Some(k) = &c.constraint {
                if k.holds_in(&w) != Some(true) {
                    return Err(TopologyError::Requirement(k.to_string()));
                }
            }
        }
        Ok(())
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str, &Q)> {
        self.dist.iter().map(|((a, b), q)| (a.as_str(), b.as_str(), q))
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "topology {} {{", self.name)?;
        writeln!(f, "  {} ;", self.locations.join(" "))?;
        for ((a, b), q) in &self.dist {
            writeln!(f, "  d({a},{b}) = {} ;", fmt_q(q))?;
        }
        for (c, q) in &self.consts {
            writeln!(f, "  const {c} = {} ;", fmt_q(q))?;
        }
        for (r, l) in &self.placement {
            writeln!(f, "  {r} at {l} ;")?;
        }
        if let Some(i) = &self.intruder {
            writeln!(f, "  intruder at {i} ;")?;
        }
        for r in &self.requires {
            writeln!(f, "  require {r} ;")?;
        }
        writeln!(f, "}}")
    }
}

fn number(cur: &mut Cursor) -> Result<Q, SyntaxError> {
    let pos = cur.pos();
    let neg = cur.eat_sym("-");
    match cur.next() {
        Some(Tok::Num(n)) => {
            let q = parse_q(&n).ok_or_else(|| SyntaxError::new(pos, format!("bad number `{n}`")))?;
            Ok(if neg { -q } else { q })
        }
        _ => Err(SyntaxError::new(pos, "expected a number")),
    }
}

pub fn parse_topology(text: &str) -> Result<Topology, TopologyError> {
    let mut cur = Cursor::new(text)?;
    cur.expect_kw("topology")?;
    let name = if cur.is_sym("{") { "unnamed".to_string() } else { cur.ident()? };
    cur.expect_sym("{")?;
    let mut locations = Vec::new();
    while let Some(Tok::Ident(_)) = cur.peek() {
        let l = cur.ident()?;
        if locations.contains(&l) {
            return Err(TopologyError::Invalid(format!("location `{l}` is listed twice")));
        }
        locations.push(l);
    }
    if locations.is_empty() {
        return Err(cur.err("expected the list of locations").into());
    }
    let (mut dists, mut consts, mut placement, mut intruder, mut requires) =
        (Vec::new(), BTreeMap::new(), BTreeMap::new(), None, Vec::new());
    while cur.eat_sym(";") {
        if cur.is_sym("}") {
            break;
        }
        if cur.is_kw("d") && matches!(cur.peek_at(1), Some(Tok::Sym("("))) {
            cur.next();
            cur.expect_sym("(")?;
            let a = cur.ident()?;
            cur.expect_sym(",")?;
            let b = cur.ident()?;
            cur.expect_sym(")")?;
            cur.expect_sym("=")?;
            dists.push((a, b, number(&mut cur)?));
        } else if cur.eat_kw("const") {
            let c = cur.ident()?;
            cur.expect_sym("=")?;
            let q = number(&mut cur)?;
            if consts.insert(c.clone(), q).is_some() {
                return Err(TopologyError::Invalid(format!("constant `{c}` is given twice")));
            }
        } else if cur.eat_kw("require") {
            requires.push(parse_lin_constraint(&mut cur)?);
        } else if cur.eat_kw("intruder") {
            cur.expect_kw("at")?;
            intruder = Some(cur.ident()?);
        } else {
            let role = cur.ident()?;
            cur.expect_kw("at")?;
            let loc = cur.ident()?;
            if placement.insert(role.clone(), loc).is_some() {
                return Err(TopologyError::Invalid(format!("role `{role}` is placed twice")));
            }
        }
    }
    cur.expect_sym("}")?;
    if !cur.is_done() {
        return Err(cur.err(format!("trailing input {}", cur.describe())).into());
    }
    Topology::new(name, locations, dists, consts, placement, intruder, requires)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::q;

    const DEMO: &str = "topology demo { v p i ; d(v,p)=2.0 ; d(v,i)=1.0 ; d(p,i)=1.0 ; const d = 1.0 ; verifier at v ; prover at p ; intruder at i ; require d(v,p) > d }";

    #[test]
    fn demo_parses_and_is_symmetric() {
        let t = parse_topology(DEMO).unwrap();
        assert_eq!(t.dist("p", "v"), q(2));
        assert_eq!(t.dist("v", "p"), q(2));
        assert_eq!(t.dist("i", "i"), q(0));
        assert_eq!(parse_topology(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn rejects_bad_metrics() {
        let tri = "topology { a b c ; d(a,b)=1 ; d(b,c)=1 ; d(a,c)=3 }";
        assert!(matches!(parse_topology(tri), Err(TopologyError::Triangle { .. })));
        let missing = "topology { a b c ; d(a,b)=1 ; d(b,c)=1 }";
        assert!(matches!(parse_topology(missing), Err(TopologyError::MissingDistance(..))));
        let req = "topology { a b ; d(a,b)=1 ; const d = 2 ; require d(a,b) > d }";
        assert!(matches!(parse_topology(req), Err(TopologyError::Requirement(_))));
    }
}
