//! A small dense two-phase simplex over exact rationals.
//!
//! Only what the dominance and belief computations need: maximize a linear
//! objective over `x >= 0` subject to `<=`, `=` and `>=` rows. Pivoting uses
//! Bland's rule, so the method terminates without cycling.

use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// `maximize objective · x` subject to `constraints`, `x >= 0`.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
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

    pub fn add(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        assert_eq!(coeffs.len(), self.num_vars, "constraint width");
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).run(&self.objective)
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    num_orig: usize,
    /// Columns at or beyond this index are artificial.
    first_artificial: usize,
    width: usize,
}

enum Step {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let n = lp.num_vars;
        let mut normalized: Vec<(Vec<Rational>, Relation, Rational)> = lp
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

        let num_slack = normalized
            .iter()
            .filter(|(_, r, _)| *r != Relation::Eq)
            .count();
        let num_art = normalized
            .iter()
            .filter(|(_, r, _)| *r != Relation::Le)
            .count();
        let first_artificial = n + num_slack;
        let width = first_artificial + num_art;

        let mut rows = Vec::with_capacity(normalized.len());
        let mut rhs = Vec::with_capacity(normalized.len());
        let mut basis = Vec::with_capacity(normalized.len());
        let mut slack_col = n;
        let mut art_col = first_artificial;
        for (coeffs, relation, b) in normalized.drain(..) {
            let mut row = coeffs;
            row.resize(width, Rational::zero());
            match relation {
                Relation::Le => {
                    row[slack_col] = Rational::one();
                    basis.push(slack_col);
                    slack_col += 1;
                }
                Relation::Ge => {
                    row[slack_col] = -Rational::one();
                    slack_col += 1;
                    row[art_col] = Rational::one();
                    basis.push(art_col);
                    art_col += 1;
                }
                Relation::Eq => {
                    row[art_col] = Rational::one();
                    basis.push(art_col);
                    art_col += 1;
                }
            }
            rows.push(row);
            rhs.push(b);
        }
        Tableau {
            rows,
            rhs,
            basis,
            num_orig: n,
            first_artificial,
            width,
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        if p != Rational::one() {
            let inv = p.recip();
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v = &*v * &inv;
                }
            }
            self.rhs[r] = &self.rhs[r] * &inv;
        }
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][c].clone();
            if f.is_zero() {
                continue;
            }
            for (v, pv) in self.rows[i].iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &(&f * pv);
                }
            }
            self.rhs[i] -= &(&f * &pivot_rhs);
        }
        self.basis[r] = c;
    }

    /// Reduced costs `c_B B^-1 A - c` for a maximization objective given per column.
    fn reduced_costs(&self, cost: &[Rational]) -> Vec<Rational> {
        let mut red: Vec<Rational> = cost.iter().map(|c| -c).collect();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (j, a) in self.rows[i].iter().enumerate() {
                if !a.is_zero() {
                    red[j] += &(cb * a);
                }
            }
        }
        red
    }

    fn iterate(&mut self, cost: &[Rational], allowed: usize) -> Step {
        loop {
            let red = self.reduced_costs(cost);
            let entering = (0..allowed).find(|&j| red[j].is_negative());
            let Some(c) = entering else {
                return Step::Optimal;
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return Step::Unbounded,
            }
        }
    }

    fn run(mut self, objective: &[Rational]) -> LpOutcome {
        if self.first_artificial < self.width {
            let mut cost = vec![Rational::zero(); self.width];
            for c in cost.iter_mut().skip(self.first_artificial) {
                *c = -Rational::one();
            }
            // Phase 1 is bounded above by zero.
            let _ = self.iterate(&cost, self.width);
            let infeasibility: Rational = self
                .basis
                .iter()
                .zip(&self.rhs)
                .filter(|(b, _)| **b >= self.first_artificial)
                .map(|(_, v)| v.clone())
                .sum();
            if infeasibility.is_positive() {
                return LpOutcome::Infeasible;
            }
            // Drive zero-level artificials out of the basis, dropping redundant rows.
            let mut i = 0;
            while i < self.rows.len() {
                if self.basis[i] >= self.first_artificial {
                    match (0..self.first_artificial).find(|&j| !self.rows[i][j].is_zero()) {
                        Some(j) => {
                            self.pivot(i, j);
                            i += 1;
                        }
                        None => {
                            self.rows.remove(i);
                            self.rhs.remove(i);
                            self.basis.remove(i);
                        }
                    }
                } else {
                    i += 1;
                }
            }
        }

        let mut cost = vec![Rational::zero(); self.width];
        cost[..self.num_orig].clone_from_slice(objective);
        if let Step::Unbounded = self.iterate(&cost, self.first_artificial) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![Rational::zero(); self.num_orig];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.num_orig {
                x[b] = self.rhs[i].clone();
            }
        }
        let value = x.iter().zip(objective).map(|(a, c)| a * c).sum();
        LpOutcome::Optimal { x, value }
    }
}
