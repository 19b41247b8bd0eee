//! Exact linear programming over the rationals.
//!
//! Dense two-phase tableau simplex with Bland's rule. The tableau is kept in
//! fraction-free form: all entries are integers over one common positive
//! denominator and every pivot divides exactly (entries stay minors of the
//! initial matrix). Arithmetic runs on `i128` and restarts on `BigInt` as soon
//! as any intermediate product overflows, so results are always exact.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// `min cᵀx` subject to linear constraints and `x ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<Rational>,
    constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal {
        value: Rational,
        solution: Vec<Rational>,
    },
    /// `certificate[i]` multiplies constraint `i`: nonnegative on `≥` rows,
    /// nonpositive on `≤` rows, free on `=` rows, with `Σ yᵢaᵢ ≤ 0` and `Σ yᵢbᵢ > 0`.
    Infeasible { certificate: Vec<Rational> },
    Unbounded,
}

impl LinearProgram {
    pub fn new(objective: Vec<Rational>) -> Result<Self> {
        if objective.is_empty() {
            return Err(Error::InvalidInput("a linear program needs at least one variable".into()));
        }
        Ok(LinearProgram {
            objective,
            constraints: Vec::new(),
        })
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[Rational] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn add_constraint(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> Result<()> {
        if coeffs.len() != self.objective.len() {
            return Err(Error::DimensionMismatch {
                expected: self.objective.len(),
                found: coeffs.len(),
            });
        }
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        Ok(())
    }

    /// True when `x ≥ 0` satisfies every constraint exactly.
    pub fn is_feasible_point(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars()
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

    /// Checks a Farkas certificate as documented on [`LpOutcome::Infeasible`].
    pub fn is_infeasibility_certificate(&self, y: &[Rational]) -> bool {
        if y.len() != self.constraints.len() {
            return false;
        }
        let signs_ok = self.constraints.iter().zip(y).all(|(c, yi)| match c.relation {
            Relation::Le => !yi.is_positive(),
            Relation::Ge => !yi.is_negative(),
            Relation::Eq => true,
        });
        let combo_ok = (0..self.num_vars()).all(|j| {
            let s: Rational = self.constraints.iter().zip(y).map(|(c, yi)| &c.coeffs[j] * yi).sum();
            !s.is_positive()
        });
        let rhs: Rational = self.constraints.iter().zip(y).map(|(c, yi)| &c.rhs * yi).sum();
        signs_ok && combo_ok && rhs.is_positive()
    }
}

/// Solves `lp` exactly.
pub fn solve(lp: &LinearProgram) -> LpOutcome {
    let rows = lp
        .constraints
        .iter()
        .map(|c| {
            let mut all: Vec<Rational> = c.coeffs.clone();
            all.push(c.rhs.clone());
            let (ints, scale) = integerize(&all);
            let rhs = ints[ints.len() - 1].clone();
            let coeffs = ints[..ints.len() - 1].to_vec();
            IntRow {
                coeffs,
                relation: c.relation,
                rhs,
                scale,
            }
        })
        .collect();
    let (objective, obj_scale) = integerize(&lp.objective);
    let problem = IntProblem {
        objective,
        obj_scale,
        rows,
    };
    problem.solve()
}

/// Scales a rational row by the lcm of its denominators.
fn integerize(values: &[Rational]) -> (Vec<BigInt>, BigInt) {
    let lcm = values
        .iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let ints = values
        .iter()
        .map(|v| v.numer() * (&lcm / v.denom()))
        .collect();
    (ints, lcm)
}

/// A constraint with integer data; the original row equals `coeffs / scale`.
#[derive(Debug, Clone)]
pub(crate) struct IntRow {
    pub coeffs: Vec<BigInt>,
    pub relation: Relation,
    pub rhs: BigInt,
    pub scale: BigInt,
}

/// Integer-data LP used by the solver core; `objective / obj_scale` is the cost row.
#[derive(Debug, Clone)]
pub(crate) struct IntProblem {
    pub objective: Vec<BigInt>,
    pub obj_scale: BigInt,
    pub rows: Vec<IntRow>,
}

impl IntProblem {
    /// Builds a problem from small integer data without rational round trips.
    pub fn from_i64(objective: &[i64], rows: Vec<(Vec<i64>, Relation, i64)>) -> Self {
        IntProblem {
            objective: objective.iter().map(|&c| BigInt::from(c)).collect(),
            obj_scale: BigInt::one(),
            rows: rows
                .into_iter()
                .map(|(coeffs, relation, rhs)| IntRow {
                    coeffs: coeffs.into_iter().map(BigInt::from).collect(),
                    relation,
                    rhs: BigInt::from(rhs),
                    scale: BigInt::one(),
                })
                .collect(),
        }
    }

    pub fn solve(&self) -> LpOutcome {
        if self.objective.is_empty() {
            // no variables: feasible iff every row is satisfied by the empty sum
            return solve_empty(self);
        }
        match Tableau::<i128>::build(self).and_then(|t| t.run(self)) {
            Some(out) => out,
            None => Tableau::<BigInt>::build(self)
                .and_then(|t| t.run(self))
                .expect("BigInt arithmetic cannot overflow"),
        }
    }
}

fn solve_empty(problem: &IntProblem) -> LpOutcome {
    let violated = problem.rows.iter().position(|r| match r.relation {
        Relation::Le => r.rhs.is_negative(),
        Relation::Eq => !r.rhs.is_zero(),
        Relation::Ge => r.rhs.is_positive(),
    });
    match violated {
        None => LpOutcome::Optimal {
            value: Rational::zero(),
            solution: Vec::new(),
        },
        Some(i) => {
            let mut certificate = vec![Rational::zero(); problem.rows.len()];
            let r = &problem.rows[i];
            let sign = if r.rhs.is_positive() { 1 } else { -1 };
            certificate[i] = Rational::from_integer(BigInt::from(sign) * &r.scale);
            LpOutcome::Infeasible { certificate }
        }
    }
}

/// Integer arithmetic the tableau needs; `None` signals overflow.
trait Num: Clone + PartialEq + std::fmt::Debug {
    fn from_big(v: &BigInt) -> Option<Self>;
    fn to_big(&self) -> BigInt;
    fn int_zero() -> Self;
    fn int_one() -> Self;
    fn sub(&self, o: &Self) -> Option<Self>;
    fn mul(&self, o: &Self) -> Option<Self>;
    fn div_exact(&self, o: &Self) -> Self;
    fn neg(&self) -> Option<Self>;
    fn signum(&self) -> i32;
}

impl Num for i128 {
    fn from_big(v: &BigInt) -> Option<Self> {
        v.to_i128()
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn int_zero() -> Self {
        0
    }
    fn int_one() -> Self {
        1
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        self.checked_sub(*o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        self.checked_mul(*o)
    }
    fn div_exact(&self, o: &Self) -> Self {
        debug_assert_eq!(self % o, 0);
        self / o
    }
    fn neg(&self) -> Option<Self> {
        self.checked_neg()
    }
    fn signum(&self) -> i32 {
        i128::signum(*self) as i32
    }
}

impl Num for BigInt {
    fn from_big(v: &BigInt) -> Option<Self> {
        Some(v.clone())
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
    fn int_zero() -> Self {
        Zero::zero()
    }
    fn int_one() -> Self {
        One::one()
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn div_exact(&self, o: &Self) -> Self {
        debug_assert!((self % o).is_zero());
        self / o
    }
    fn neg(&self) -> Option<Self> {
        Some(-self)
    }
    fn signum(&self) -> i32 {
        if self.is_positive() {
            1
        } else if self.is_negative() {
            -1
        } else {
            0
        }
    }
}

/// Row 0 holds the phase-2 reduced costs, row 1 the phase-1 reduced costs,
/// rows `2..` the constraints. The last column is the right-hand side.
struct Tableau<T> {
    width: usize,
    cells: Vec<T>,
    denom: T,
    /// Basic column of each constraint row.
    basis: Vec<usize>,
    /// Column that formed the initial identity for each constraint row.
    initial: Vec<usize>,
    /// Row normalization sign (+1/-1) applied to make the rhs nonnegative.
    flip: Vec<i32>,
    n: usize,
    first_artificial: usize,
}

const COST: usize = 0;
const AUX: usize = 1;

impl<T: Num> Tableau<T> {
    fn build(problem: &IntProblem) -> Option<Self> {
        let n = problem.objective.len();
        let m = problem.rows.len();
        let mut flip = Vec::with_capacity(m);
        let mut relations = Vec::with_capacity(m);
        for r in &problem.rows {
            let f = if r.rhs.is_negative() { -1 } else { 1 };
            flip.push(f);
            relations.push(match (r.relation, f) {
                (Relation::Le, -1) => Relation::Ge,
                (Relation::Ge, -1) => Relation::Le,
                (rel, _) => rel,
            });
        }
        let n_slack = relations.iter().filter(|r| **r != Relation::Eq).count();
        let n_art = relations.iter().filter(|r| **r != Relation::Le).count();
        let first_artificial = n + n_slack;
        let width = n + n_slack + n_art + 1;
        let rhs_col = width - 1;
        let mut cells = vec![T::int_zero(); (m + 2) * width];
        let mut basis = Vec::with_capacity(m);
        let mut slack = n;
        let mut art = first_artificial;
        for (i, r) in problem.rows.iter().enumerate() {
            let row = i + 2;
            let sign = BigInt::from(flip[i]);
            for (j, a) in r.coeffs.iter().enumerate() {
                cells[row * width + j] = T::from_big(&(a * &sign))?;
            }
            cells[row * width + rhs_col] = T::from_big(&(&r.rhs * &sign))?;
            match relations[i] {
                Relation::Le => {
                    cells[row * width + slack] = T::int_one();
                    basis.push(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    cells[row * width + slack] = T::int_one().neg()?;
                    slack += 1;
                    cells[row * width + art] = T::int_one();
                    basis.push(art);
                    art += 1;
                }
                Relation::Eq => {
                    cells[row * width + art] = T::int_one();
                    basis.push(art);
                    art += 1;
                }
            }
        }
        for (j, c) in problem.objective.iter().enumerate() {
            cells[COST * width + j] = T::from_big(c)?;
        }
        // phase-1 costs are 1 on artificials; price out the basic ones
        for (i, &b) in basis.iter().enumerate() {
            if b >= first_artificial {
                let row = i + 2;
                for j in 0..width {
                    if j >= first_artificial && j < rhs_col {
                        continue;
                    }
                    let v = cells[AUX * width + j].sub(&cells[row * width + j])?;
                    cells[AUX * width + j] = v;
                }
            }
        }
        let initial = basis.clone();
        Some(Tableau {
            width,
            cells,
            denom: T::int_one(),
            basis,
            initial,
            flip,
            n,
            first_artificial,
        })
    }

    fn at(&self, row: usize, col: usize) -> &T {
        &self.cells[row * self.width + col]
    }

    fn rows(&self) -> usize {
        self.basis.len()
    }

    fn rhs_col(&self) -> usize {
        self.width - 1
    }

    fn pivot(&mut self, r: usize, c: usize) -> Option<()> {
        let w = self.width;
        let pr = r + 2;
        let mut a = self.at(pr, c).clone();
        if a.signum() < 0 {
            // only happens when driving a zero-level artificial out; rhs is 0
            for j in 0..w {
                self.cells[pr * w + j] = self.cells[pr * w + j].neg()?;
            }
            a = a.neg()?;
        }
        let total = self.rows() + 2;
        for i in 0..total {
            if i == pr {
                continue;
            }
            let f = self.cells[i * w + c].clone();
            for j in 0..w {
                let t = self.cells[i * w + j].mul(&a)?;
                let t = if f.signum() != 0 {
                    t.sub(&f.mul(&self.cells[pr * w + j])?)?
                } else {
                    t
                };
                self.cells[i * w + j] = t.div_exact(&self.denom);
            }
        }
        self.denom = a;
        self.basis[r] = c;
        Some(())
    }

    /// Bland's rule minimization on objective row `obj`; returns false if unbounded.
    fn optimize(&mut self, obj: usize, allow_artificial: bool) -> Option<bool> {
        let rhs = self.rhs_col();
        loop {
            let limit = if allow_artificial {
                rhs
            } else {
                self.first_artificial
            };
            let Some(c) = (0..limit).find(|&j| self.at(obj, j).signum() < 0) else {
                return Some(true);
            };
            let mut best: Option<usize> = None;
            for r in 0..self.rows() {
                let col = self.at(r + 2, c);
                if col.signum() <= 0 {
                    continue;
                }
                best = match best {
                    None => Some(r),
                    Some(b) => {
                        // compare rhs_r / col_r against rhs_b / col_b
                        let lhs = self.at(r + 2, rhs).mul(self.at(b + 2, c))?;
                        let rhs_v = self.at(b + 2, rhs).mul(col)?;
                        let ord = lhs.sub(&rhs_v)?.signum();
                        if ord < 0 || (ord == 0 && self.basis[r] < self.basis[b]) {
                            Some(r)
                        } else {
                            Some(b)
                        }
                    }
                };
            }
            match best {
                None => return Some(false),
                Some(r) => self.pivot(r, c)?,
            }
        }
    }

    fn run(mut self, problem: &IntProblem) -> Option<LpOutcome> {
        let has_artificial = self.first_artificial < self.rhs_col();
        if has_artificial {
            self.optimize(AUX, true)?;
            if self.at(AUX, self.rhs_col()).signum() != 0 {
                return Some(LpOutcome::Infeasible {
                    certificate: self.farkas(problem),
                });
            }
            self.drive_out_artificials()?;
        }
        if !self.optimize(COST, false)? {
            return Some(LpOutcome::Unbounded);
        }
        let mut solution = vec![Rational::zero(); self.n];
        let denom = self.denom.to_big();
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.n {
                solution[b] = Rational::new(self.at(r + 2, self.rhs_col()).to_big(), denom.clone());
            }
        }
        let value: Rational = problem
            .objective
            .iter()
            .zip(&solution)
            .map(|(c, x)| Rational::from_integer(c.clone()) * x)
            .sum::<Rational>()
            / Rational::from_integer(problem.obj_scale.clone());
        Some(LpOutcome::Optimal { value, solution })
    }

    fn drive_out_artificials(&mut self) -> Option<()> {
        for r in 0..self.rows() {
            if self.basis[r] < self.first_artificial {
                continue;
            }
            if let Some(c) = (0..self.first_artificial).find(|&j| self.at(r + 2, j).signum() != 0) {
                self.pivot(r, c)?;
            }
            // otherwise the row is redundant and the artificial stays at zero
        }
        Some(())
    }

    /// Phase-1 duals `u_i = c_col - d_col` read off the initial identity columns,
    /// mapped back to the caller's (unflipped, unscaled) rows.
    fn farkas(&self, problem: &IntProblem) -> Vec<Rational> {
        let denom = self.denom.to_big();
        self.initial
            .iter()
            .enumerate()
            .map(|(i, &col)| {
                let cost = if col >= self.first_artificial {
                    Rational::one()
                } else {
                    Rational::zero()
                };
                let reduced = Rational::new(self.at(AUX, col).to_big(), denom.clone());
                let u = cost - reduced;
                u * Rational::from_integer(BigInt::from(self.flip[i]) * &problem.rows[i].scale)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64) -> Rational {
        Rational::from_integer(BigInt::from(n))
    }

    fn lp(obj: &[i64], rows: &[(&[i64], Relation, i64)]) -> LinearProgram {
        let mut lp = LinearProgram::new(obj.iter().map(|&c| q(c)).collect()).unwrap();
        for (a, rel, b) in rows {
            lp.add_constraint(a.iter().map(|&c| q(c)).collect(), *rel, q(*b)).unwrap();
        }
        lp
    }

    #[test]
    fn single_lower_bound() {
        let p = lp(&[1], &[(&[1], Relation::Ge, 3)]);
        assert_eq!(
            solve(&p),
            LpOutcome::Optimal {
                value: q(3),
                solution: vec![q(3)]
            }
        );
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        let p = lp(&[0], &[(&[1], Relation::Le, -1)]);
        match solve(&p) {
            LpOutcome::Infeasible { certificate } => {
                assert!(p.is_infeasibility_certificate(&certificate))
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn open_ray_is_unbounded() {
        let p = lp(&[-1], &[(&[1], Relation::Ge, 0)]);
        assert_eq!(solve(&p), LpOutcome::Unbounded);
    }

    #[test]
    fn rejects_malformed_programs() {
        assert!(LinearProgram::new(Vec::new()).is_err());
        let mut p = LinearProgram::new(vec![q(1), q(1)]).unwrap();
        assert!(p.add_constraint(vec![q(1)], Relation::Le, q(1)).is_err());
    }

    #[test]
    fn fractional_data_and_optimum() {
        // min -x - y  s.t. 2x + y <= 3/2, x + 3y <= 2
        let mut p = LinearProgram::new(vec![q(-1), q(-1)]).unwrap();
        p.add_constraint(vec![q(2), q(1)], Relation::Le, Rational::new(3.into(), 2.into()))
            .unwrap();
        p.add_constraint(vec![q(1), q(3)], Relation::Le, q(2)).unwrap();
        match solve(&p) {
            LpOutcome::Optimal { value, solution } => {
                // vertex x = 1/2, y = 1/2
                assert_eq!(value, q(-1));
                assert_eq!(solution, vec![Rational::new(1.into(), 2.into()); 2]);
                assert!(p.is_feasible_point(&solution));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn redundant_equalities_are_handled() {
        // x + y = 1 stated twice; min x
        let p = lp(
            &[1, 0],
            &[(&[1, 1], Relation::Eq, 1), (&[2, 2], Relation::Eq, 2)],
        );
        assert_eq!(
            solve(&p),
            LpOutcome::Optimal {
                value: q(0),
                solution: vec![q(0), q(1)]
            }
        );
    }

    #[test]
    fn overflow_falls_back_to_bigint() {
        let big = i64::MAX;
        // min x s.t. big*x >= big*big - 1 ... forces large intermediate products
        let mut p = LinearProgram::new(vec![q(1), q(1)]).unwrap();
        p.add_constraint(vec![q(big), q(big - 1)], Relation::Ge, q(big) * q(big)).unwrap();
        p.add_constraint(vec![q(big - 2), q(big)], Relation::Ge, q(big) * q(big - 3)).unwrap();
        match solve(&p) {
            LpOutcome::Optimal { solution, .. } => assert!(p.is_feasible_point(&solution)),
            other => panic!("unexpected {other:?}"),
        }
    }

    /// Enumerates basic solutions by brute force for tiny LPs in two variables
    /// with an added box, returning the exact optimum.
    fn brute_force_2d(p: &LinearProgram) -> Option<Rational> {
        // candidate vertices: intersections of pairs of lines among constraints and axes
        let mut lines: Vec<(Rational, Rational, Rational)> = p
            .constraints()
            .iter()
            .map(|c| (c.coeffs[0].clone(), c.coeffs[1].clone(), c.rhs.clone()))
            .collect();
        lines.push((q(1), q(0), q(0)));
        lines.push((q(0), q(1), q(0)));
        let mut best: Option<Rational> = None;
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                let (a1, b1, c1) = &lines[i];
                let (a2, b2, c2) = &lines[j];
                let det = a1 * b2 - a2 * b1;
                if det.is_zero() {
                    continue;
                }
                let x = (c1 * b2 - c2 * b1) / &det;
                let y = (a1 * c2 - a2 * c1) / &det;
                let pt = vec![x, y];
                if p.is_feasible_point(&pt) {
                    let v = &p.objective()[0] * &pt[0] + &p.objective()[1] * &pt[1];
                    best = Some(match best {
                        Some(b) if b <= v => b,
                        _ => v,
                    });
                }
            }
        }
        best
    }

    proptest! {
        #[test]
        fn matches_vertex_enumeration_on_boxed_2d_programs(
            c in proptest::collection::vec(-5i64..6, 2),
            rows in proptest::collection::vec((proptest::collection::vec(-4i64..5, 2), 0u8..3, -6i64..12), 1..5),
        ) {
            let mut p = LinearProgram::new(c.iter().map(|&v| q(v)).collect()).unwrap();
            for (a, rel, b) in &rows {
                let rel = [Relation::Le, Relation::Eq, Relation::Ge][*rel as usize];
                p.add_constraint(a.iter().map(|&v| q(v)).collect(), rel, q(*b)).unwrap();
            }
            // box keeps the program bounded
            p.add_constraint(vec![q(1), q(0)], Relation::Le, q(20)).unwrap();
            p.add_constraint(vec![q(0), q(1)], Relation::Le, q(20)).unwrap();
            match (solve(&p), brute_force_2d(&p)) {
                (LpOutcome::Optimal { value, solution }, Some(best)) => {
                    prop_assert!(p.is_feasible_point(&solution));
                    prop_assert_eq!(value, best);
                }
                (LpOutcome::Infeasible { certificate }, None) => {
                    prop_assert!(p.is_infeasibility_certificate(&certificate));
                }
                (out, best) => prop_assert!(false, "solver {:?} vs brute force {:?}", out, best),
            }
        }
    }
}
