use num_rational::Ratio;
use tpa::constraints::{q, Atom, ConstraintSet, LinConstraint, LinExpr, Rel};

// Vertex enumeration over exact i128 rationals. Strict rows get a slack `s`: the
// system is satisfiable iff the largest `s` over the closed system with `s <= 1` is
// positive. A box of side `BOX` bounds every atom; with coefficients in -2..=2 and
// constants in -4..=4 every minimal face of the unboxed system has a point well inside.
type R = Ratio<i128>;
const BOX: i128 = 1_000_000;

#[derive(Clone, Debug)]
pub struct Row {
    pub a: Vec<i64>,
    pub rel: Rel,
    pub b: i64,
}

fn solve(m: &[Vec<R>], rhs: &[R]) -> Option<Vec<R>> {
    let n = m.len();
    let mut a: Vec<Vec<R>> = m.iter().zip(rhs).map(|(r, b)| r.iter().cloned().chain([*b]).collect()).collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| a[r][col] != R::from_integer(0))?;
        a.swap(col, piv);
        let p = a[col][col];
        for x in a[col].iter_mut() {
            *x /= p;
        }
        for r in 0..n {
            if r != col && a[r][col] != R::from_integer(0) {
                let f = a[r][col];
                for c in col..=n {
                    let v = a[col][c];
                    a[r][c] -= f * v;
                }
            }
        }
    }
    Some(a.iter().map(|r| r[n]).collect())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = combinations(n - 1, k);
    for mut c in combinations(n - 1, k - 1) {
        c.push(n - 1);
        out.push(c);
    }
    out
}

pub fn oracle_sat(n: usize, rows: &[Row]) -> bool {
    let zero = R::from_integer(0);
    let one = R::from_integer(1);
    // (coefficients over x and s, bound, must be tight)
    let mut ineq: Vec<(Vec<R>, R, bool)> = Vec::new();
    let lift = |a: &[i64], sign: i64, slack: bool| -> Vec<R> {
        a.iter().map(|&c| R::from_integer((sign * c) as i128)).chain([if slack { one } else { zero }]).collect()
    };
    for r in rows {
        let b = R::from_integer(r.b as i128);
        match r.rel {
            Rel::Le => ineq.push((lift(&r.a, 1, false), b, false)),
            Rel::Lt => ineq.push((lift(&r.a, 1, true), b, false)),
            Rel::Ge => ineq.push((lift(&r.a, -1, false), -b, false)),
            Rel::Gt => ineq.push((lift(&r.a, -1, true), -b, false)),
            Rel::Eq => ineq.push((lift(&r.a, 1, false), b, true)),
        }
    }
    let unit = |j: usize, v: i128| -> Vec<R> { (0..=n).map(|i| if i == j { R::from_integer(v) } else { zero }).collect() };
    ineq.push((unit(n, 1), one, false));
    ineq.push((unit(n, -1), one, false));
    for j in 0..n {
        ineq.push((unit(j, 1), R::from_integer(BOX), false));
        ineq.push((unit(j, -1), R::from_integer(BOX), false));
    }
    let tight: Vec<usize> = (0..ineq.len()).filter(|&i| ineq[i].2).collect();
    let free: Vec<usize> = (0..ineq.len()).filter(|&i| !ineq[i].2).collect();
    let mut best: Option<R> = None;
    let dims = n + 1;
    let holds = |x: &[R]| {
        ineq.iter().all(|(a, b, eq)| {
            let v: R = a.iter().zip(x).map(|(c, xi)| c * xi).sum();
            if *eq {
                v == *b
            } else {
                v <= *b
            }
        })
    };
    // Equalities are tight at every vertex, so the first ones are always pivots.
    let forced: Vec<usize> = tight.iter().copied().take(dims).collect();
    let mut pool: Vec<usize> = free.clone();
    pool.extend(tight.iter().copied().skip(dims));
    for extra in combinations(pool.len(), dims - forced.len()) {
        let pick: Vec<usize> = forced.iter().copied().chain(extra.iter().map(|&i| pool[i])).collect();
        let m: Vec<Vec<R>> = pick.iter().map(|&i| ineq[i].0.clone()).collect();
        let rhs: Vec<R> = pick.iter().map(|&i| ineq[i].1).collect();
        if let Some(x) = solve(&m, &rhs) {
            if holds(&x) && best.is_none_or(|b| x[n] > b) {
                best = Some(x[n]);
            }
        }
    }
    // Dependent equalities cannot all be pivots: retry with every row free.
    if best.is_none() && !tight.is_empty() {
        for pick in combinations(ineq.len(), dims) {
            let m: Vec<Vec<R>> = pick.iter().map(|&i| ineq[i].0.clone()).collect();
            let rhs: Vec<R> = pick.iter().map(|&i| ineq[i].1).collect();
            if let Some(x) = solve(&m, &rhs) {
                if holds(&x) && best.is_none_or(|b| x[n] > b) {
                    best = Some(x[n]);
                }
            }
        }
    }
    best.is_some_and(|s| s > zero)
}

pub fn to_set(n: usize, rows: &[Row]) -> ConstraintSet {
    rows.iter()
        .map(|r| {
            let mut lhs = LinExpr::zero();
            for (j, c) in r.a.iter().enumerate().take(n) {
                lhs.add_term(Atom::var(format!("x{j}")), q(*c));
            }
            LinConstraint::new(lhs, r.rel, LinExpr::int(r.b))
        })
        .collect()
}
