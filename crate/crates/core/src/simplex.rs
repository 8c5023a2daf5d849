//! Dense two-phase simplex over exact rationals with Bland's anti-cycling rule.
//!
//! Intended for desk-scale programs (tens of variables); every pivot is exact
//! so there are no tolerances anywhere.

use num_traits::{One, Signed, Zero};

use crate::scalar::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// `maximize objective·x` subject to the constraints and `x ≥ 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<Rational>,
    constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpStatus {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            objective: vec![Rational::zero(); num_vars],
            constraints: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn set_objective(&mut self, var: usize, coeff: Rational) {
        self.objective[var] = coeff;
    }

    /// Adds a row given as sparse `(var, coeff)` pairs; repeated vars accumulate.
    pub fn add_constraint(
        &mut self,
        terms: impl IntoIterator<Item = (usize, Rational)>,
        relation: Relation,
        rhs: Rational,
    ) {
        let mut coeffs = vec![Rational::zero(); self.num_vars];
        for (var, c) in terms {
            coeffs[var] += c;
        }
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// True iff `x ≥ 0` satisfies every row exactly.
    pub fn is_feasible_point(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars
            && x.iter().all(|v| !v.is_negative())
            && self.constraints.iter().all(|c| {
                let lhs: Rational = c.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
                match c.relation {
                    Relation::Le => lhs <= c.rhs,
                    Relation::Eq => lhs == c.rhs,
                    Relation::Ge => lhs >= c.rhs,
                }
            })
    }

    pub fn maximize(&self) -> LpStatus {
        Tableau::build(self).solve(&self.objective)
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    num_vars: usize,
    num_cols: usize,
    first_artificial: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let m = lp.constraints.len();
        let n = lp.num_vars;
        // normalise to rhs ≥ 0
        let rows: Vec<(Vec<Rational>, Relation, Rational)> = lp
            .constraints
            .iter()
            .map(|c| {
                if c.rhs.is_negative() {
                    let flipped = match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (c.coeffs.iter().map(|a| -a).collect(), flipped, -&c.rhs)
                } else {
                    (c.coeffs.clone(), c.relation, c.rhs.clone())
                }
            })
            .collect();
        let num_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let num_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let first_artificial = n + num_slack;
        let num_cols = first_artificial + num_art;

        let mut t = Tableau {
            rows: Vec::with_capacity(m),
            rhs: Vec::with_capacity(m),
            basis: Vec::with_capacity(m),
            num_vars: n,
            num_cols,
            first_artificial,
        };
        let (mut slack, mut art) = (n, first_artificial);
        for (coeffs, rel, b) in rows {
            let mut row = coeffs;
            row.resize(num_cols, Rational::zero());
            match rel {
                Relation::Le => {
                    row[slack] = Rational::one();
                    t.basis.push(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -Rational::one();
                    slack += 1;
                    row[art] = Rational::one();
                    t.basis.push(art);
                    art += 1;
                }
                Relation::Eq => {
                    row[art] = Rational::one();
                    t.basis.push(art);
                    art += 1;
                }
            }
            t.rows.push(row);
            t.rhs.push(b);
        }
        t
    }

    fn pivot(&mut self, row: usize, col: usize, obj: &mut [Rational], obj_value: &mut Rational) {
        let piv = self.rows[row][col].clone();
        if !piv.is_one() {
            for a in self.rows[row].iter_mut() {
                *a /= &piv;
            }
            self.rhs[row] /= &piv;
        }
        let prow = self.rows[row].clone();
        let prhs = self.rhs[row].clone();
        for i in 0..self.rows.len() {
            if i == row || self.rows[i][col].is_zero() {
                continue;
            }
            let f = self.rows[i][col].clone();
            for (a, p) in self.rows[i].iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *a -= &f * p;
                }
            }
            self.rhs[i] -= &f * &prhs;
        }
        if !obj[col].is_zero() {
            let f = obj[col].clone();
            for (a, p) in obj.iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *a -= &f * p;
                }
            }
            // obj row tracks reduced costs; the objective value moves by f·rhs
            *obj_value += &f * &prhs;
        }
        self.basis[row] = col;
    }

    /// Runs simplex iterations on the reduced-cost row `obj` over columns `< col_limit`.
    /// Returns false if unbounded.
    fn iterate(&mut self, obj: &mut [Rational], obj_value: &mut Rational, col_limit: usize) -> bool {
        loop {
            // Bland: lowest-index improving column
            let Some(col) = (0..col_limit).find(|&j| obj[j].is_positive()) else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br || (ratio == br && self.basis[i] < self.basis[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            match best {
                None => return false,
                Some((row, _)) => self.pivot(row, col, obj, obj_value),
            }
        }
    }

    fn solve(mut self, objective: &[Rational]) -> LpStatus {
        let n_cols = self.num_cols;
        // phase 1: maximise −Σ artificials
        let mut obj = vec![Rational::zero(); n_cols];
        let mut value = Rational::zero();
        for i in 0..self.rows.len() {
            if self.basis[i] >= self.first_artificial {
                for (o, a) in obj.iter_mut().zip(&self.rows[i]) {
                    *o += a;
                }
                value -= &self.rhs[i];
            }
        }
        for o in obj.iter_mut().skip(self.first_artificial) {
            *o = Rational::zero();
        }
        // value is tracked as the negated phase-1 objective offset
        let mut phase1_value = value.clone();
        self.iterate(&mut obj, &mut phase1_value, n_cols);
        // remaining artificial mass
        let residual: Rational = (0..self.rows.len())
            .filter(|&i| self.basis[i] >= self.first_artificial)
            .map(|i| self.rhs[i].clone())
            .sum();
        if residual.is_positive() {
            return LpStatus::Infeasible;
        }
        // drive zero-level artificials out of the basis
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] >= self.first_artificial {
                match (0..self.first_artificial).find(|&j| !self.rows[i][j].is_zero()) {
                    Some(j) => {
                        let mut dummy = vec![Rational::zero(); n_cols];
                        let mut dv = Rational::zero();
                        self.pivot(i, j, &mut dummy, &mut dv);
                    }
                    None => {
                        self.rows.remove(i);
                        self.rhs.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }

        // phase 2
        let mut cost = vec![Rational::zero(); n_cols];
        cost[..self.num_vars].clone_from_slice(objective);
        let mut obj = cost.clone();
        let mut value = Rational::zero();
        for i in 0..self.rows.len() {
            let cb = &cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (o, a) in obj.iter_mut().zip(&self.rows[i]) {
                *o -= cb * a;
            }
            value += cb * &self.rhs[i];
        }
        if !self.iterate(&mut obj, &mut value, self.first_artificial) {
            return LpStatus::Unbounded;
        }
        let mut x = vec![Rational::zero(); self.num_vars];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.num_vars {
                x[b] = self.rhs[i].clone();
            }
        }
        let value = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        LpStatus::Optimal { x, value }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};

    #[test]
    fn textbook_max() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → (2, 6), 36
        let mut lp = LinearProgram::new(2);
        lp.set_objective(0, rat_int(3));
        lp.set_objective(1, rat_int(5));
        lp.add_constraint([(0, rat_int(1))], Relation::Le, rat_int(4));
        lp.add_constraint([(1, rat_int(2))], Relation::Le, rat_int(12));
        lp.add_constraint([(0, rat_int(3)), (1, rat_int(2))], Relation::Le, rat_int(18));
        assert_eq!(
            lp.maximize(),
            LpStatus::Optimal {
                x: vec![rat_int(2), rat_int(6)],
                value: rat_int(36)
            }
        );
    }

    #[test]
    fn equality_and_ge_rows() {
        // max −x − y s.t. x + y = 1, x ≥ 1/3 → x = 1/3.. any split; value −1
        let mut lp = LinearProgram::new(2);
        lp.set_objective(0, rat_int(-1));
        lp.set_objective(1, rat_int(-2));
        lp.add_constraint([(0, rat_int(1)), (1, rat_int(1))], Relation::Eq, rat_int(1));
        lp.add_constraint([(0, rat_int(1))], Relation::Ge, rat(1, 3));
        match lp.maximize() {
            LpStatus::Optimal { x, value } => {
                assert_eq!(value, rat_int(-1));
                assert_eq!(x, vec![rat_int(1), rat_int(0)]);
                assert!(lp.is_feasible_point(&x));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.add_constraint([(0, rat_int(1))], Relation::Ge, rat_int(2));
        lp.add_constraint([(0, rat_int(1))], Relation::Le, rat_int(1));
        assert_eq!(lp.maximize(), LpStatus::Infeasible);

        let mut lp = LinearProgram::new(2);
        lp.set_objective(0, rat_int(1));
        lp.add_constraint([(0, rat_int(1)), (1, rat_int(-1))], Relation::Le, rat_int(1));
        assert_eq!(lp.maximize(), LpStatus::Unbounded);
    }

    #[test]
    fn negative_rhs_and_redundant_rows() {
        // −x ≤ −1 (x ≥ 1), x + y = 2 twice (redundant), max y
        let mut lp = LinearProgram::new(2);
        lp.set_objective(1, rat_int(1));
        lp.add_constraint([(0, rat_int(-1))], Relation::Le, rat_int(-1));
        lp.add_constraint([(0, rat_int(1)), (1, rat_int(1))], Relation::Eq, rat_int(2));
        lp.add_constraint([(0, rat_int(2)), (1, rat_int(2))], Relation::Eq, rat_int(4));
        assert_eq!(
            lp.maximize(),
            LpStatus::Optimal {
                x: vec![rat_int(1), rat_int(1)],
                value: rat_int(1)
            }
        );
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example, which cycles under the textbook largest-coefficient rule
        let mut lp = LinearProgram::new(4);
        for (j, c) in [rat(3, 4), rat_int(-150), rat(1, 50), rat_int(-6)].into_iter().enumerate() {
            lp.set_objective(j, c);
        }
        lp.add_constraint(
            [(0, rat(1, 4)), (1, rat_int(-60)), (2, rat(-1, 25)), (3, rat_int(9))],
            Relation::Le,
            rat_int(0),
        );
        lp.add_constraint(
            [(0, rat(1, 2)), (1, rat_int(-90)), (2, rat(-1, 50)), (3, rat_int(3))],
            Relation::Le,
            rat_int(0),
        );
        lp.add_constraint([(2, rat_int(1))], Relation::Le, rat_int(1));
        match lp.maximize() {
            LpStatus::Optimal { value, .. } => assert_eq!(value, rat(1, 20)),
            other => panic!("{other:?}"),
        }
    }
}
