//! Dense two-phase simplex over exact rationals.
//!
//! Solves `maximize c·x  s.t.  A x = b, x ≥ 0` with `b ≥ 0`. Bland's rule
//! is used for both entering and leaving variables, so the method
//! terminates without cycling. Intended for the small problems produced by
//! the maximality oracle (tens of variables).

use num_traits::{Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    pub a: Vec<Vec<Rational>>,
    pub b: Vec<Rational>,
    pub c: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col].clone();
        for v in self.rows[row].iter_mut() {
            *v /= &p;
        }
        self.rhs[row] /= &p;
        let pivot_row = self.rows[row].clone();
        let pivot_rhs = self.rhs[row].clone();
        for r in 0..self.rows.len() {
            if r == row || self.rows[r][col].is_zero() {
                continue;
            }
            let f = self.rows[r][col].clone();
            for (v, pv) in self.rows[r].iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
            self.rhs[r] -= &f * &pivot_rhs;
        }
        self.basis[row] = col;
    }

    /// Maximizes `cost·x` from the current basic feasible solution using
    /// columns `< allowed`. Returns `false` if unbounded.
    fn optimize(&mut self, cost: &[Rational], allowed: usize) -> bool {
        loop {
            let entering = (0..allowed).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let mut reduced = cost[j].clone();
                for (r, &bv) in self.basis.iter().enumerate() {
                    if !self.rows[r][j].is_zero() {
                        reduced -= &cost[bv] * &self.rows[r][j];
                    }
                }
                reduced.is_positive()
            });
            let Some(col) = entering else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[r] / a;
                let better = match &best {
                    None => true,
                    Some((br, bratio)) => {
                        ratio < *bratio || (ratio == *bratio && self.basis[r] < self.basis[*br])
                    }
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            match best {
                Some((row, _)) => self.pivot(row, col),
                None => return false,
            }
        }
    }

    fn solution(&self, n: usize) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); n];
        for (r, &bv) in self.basis.iter().enumerate() {
            if bv < n {
                x[bv] = self.rhs[r].clone();
            }
        }
        x
    }
}

pub fn solve(lp: &LinearProgram) -> LpOutcome {
    let m = lp.a.len();
    let n = lp.c.len();
    assert_eq!(lp.b.len(), m, "row count mismatch");
    assert!(lp.b.iter().all(|v| !v.is_negative()), "right-hand side must be non-negative");

    // Phase 1: artificial variable per row.
    let mut rows = Vec::with_capacity(m);
    for (r, row) in lp.a.iter().enumerate() {
        assert_eq!(row.len(), n, "column count mismatch");
        let mut full = row.clone();
        full.extend((0..m).map(|k| if k == r { Rational::from_integer(1.into()) } else { Rational::zero() }));
        rows.push(full);
    }
    let mut t = Tableau {
        rows,
        rhs: lp.b.clone(),
        basis: (n..n + m).collect(),
    };
    let mut phase1 = vec![Rational::zero(); n + m];
    for v in &mut phase1[n..] {
        *v = Rational::from_integer((-1).into());
    }
    t.optimize(&phase1, n + m);
    let infeasibility: Rational = t
        .basis
        .iter()
        .zip(&t.rhs)
        .filter(|(&bv, _)| bv >= n)
        .map(|(_, v)| v.clone())
        .sum();
    if infeasibility.is_positive() {
        return LpOutcome::Infeasible;
    }

    // Drive remaining (zero-valued) artificials out; drop redundant rows.
    let mut r = 0;
    while r < t.rows.len() {
        if t.basis[r] >= n {
            match (0..n).find(|&j| !t.rows[r][j].is_zero()) {
                Some(col) => t.pivot(r, col),
                None => {
                    t.rows.remove(r);
                    t.rhs.remove(r);
                    t.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }

    let mut cost = lp.c.clone();
    cost.extend((0..m).map(|_| Rational::zero()));
    if !t.optimize(&cost, n) {
        return LpOutcome::Unbounded;
    }
    let x = t.solution(n);
    let value = x.iter().zip(&lp.c).map(|(a, b)| a * b).sum();
    LpOutcome::Optimal { x, value }
}
