//! Exact linear solves by fraction-free (Bareiss) elimination.
//!
//! Rows are scaled to integers and kept sparse. A row whose entry in the
//! current pivot column is zero is not touched; it remembers the step it was
//! last brought up to date and is rescaled by `D_k / D_l` only when it next
//! takes part in an update. Transition matrices have a handful of nonzeros
//! per row, so most rows stay lazy for most of the elimination.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::{AdversaryPolicy, Rmc, ValueVector};
use crate::rational::Rational;

/// Dense square matrix of rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquareRationalMatrix {
    n: usize,
    data: Vec<Rational>,
}

impl SquareRationalMatrix {
    pub fn zeros(n: usize) -> Self {
        SquareRationalMatrix {
            n,
            data: vec![Rational::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = SquareRationalMatrix::zeros(n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::Dimension(format!(
                "row {bad} has {} entries in a {n}x{n} matrix",
                rows[bad].len()
            )));
        }
        Ok(SquareRationalMatrix {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Rational) {
        self.data[i * self.n + j] = value;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn mul_vec(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        if x.len() != self.n {
            return Err(Error::Dimension(format!(
                "vector of length {} against {}x{} matrix",
                x.len(),
                self.n,
                self.n
            )));
        }
        Ok((0..self.n)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .filter(|(a, _)| !a.is_zero())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }
}

/// Sparse integer row: `(column, value)` pairs sorted by column, no zeros.
type IntRow = Vec<(usize, BigInt)>;

struct WorkRow {
    entries: IntRow,
    rhs: BigInt,
    /// Number of elimination steps this row is up to date with.
    stage: usize,
}

impl WorkRow {
    fn from_rational(entries: Vec<(usize, Rational)>, rhs: Rational) -> Self {
        let mut scale = rhs.denom().clone();
        for (_, v) in &entries {
            scale = scale.lcm(v.denom());
        }
        let lift = |v: &Rational| v.numer() * (&scale / v.denom());
        let mut ints: IntRow = entries
            .iter()
            .filter(|(_, v)| !v.is_zero())
            .map(|(j, v)| (*j, lift(v)))
            .collect();
        ints.sort_by_key(|(j, _)| *j);
        WorkRow {
            rhs: lift(&rhs),
            entries: ints,
            stage: 0,
        }
    }

    fn get(&self, col: usize) -> Option<&BigInt> {
        self.entries
            .binary_search_by_key(&col, |(j, _)| *j)
            .ok()
            .map(|i| &self.entries[i].1)
    }

    /// Brings a lazy row up to `stage` by multiplying with `D[stage] / D[self.stage]`.
    fn catch_up(&mut self, stage: usize, dets: &[BigInt]) {
        if self.stage == stage {
            return;
        }
        let (num, den) = (&dets[stage], &dets[self.stage]);
        for (_, v) in self.entries.iter_mut() {
            *v = exact_div(&(&*v * num), den);
        }
        self.rhs = exact_div(&(&self.rhs * num), den);
        self.stage = stage;
    }
}

fn exact_div(a: &BigInt, b: &BigInt) -> BigInt {
    let (q, r) = a.div_rem(b);
    debug_assert!(r.is_zero(), "inexact division in fraction-free elimination");
    q
}

/// `(p * row - f * pivot_row) / d` with column `skip` dropped.
fn combine(
    row: &WorkRow,
    pivot: &WorkRow,
    p: &BigInt,
    f: &BigInt,
    d: &BigInt,
    skip: usize,
) -> WorkRow {
    let mut out = Vec::with_capacity(row.entries.len() + pivot.entries.len());
    let (a, b) = (&row.entries, &pivot.entries);
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let col_a = a.get(i).map_or(usize::MAX, |e| e.0);
        let col_b = b.get(j).map_or(usize::MAX, |e| e.0);
        let (col, value) = match col_a.cmp(&col_b) {
            std::cmp::Ordering::Less => {
                i += 1;
                (col_a, p * &a[i - 1].1)
            }
            std::cmp::Ordering::Greater => {
                j += 1;
                (col_b, -(f * &b[j - 1].1))
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
                (col_a, p * &a[i - 1].1 - f * &b[j - 1].1)
            }
        };
        if col != skip && !value.is_zero() {
            out.push((col, exact_div(&value, d)));
        }
    }
    WorkRow {
        entries: out,
        rhs: exact_div(&(p * &row.rhs - f * &pivot.rhs), d),
        stage: row.stage + 1,
    }
}

/// Solves a sparse square system given row-wise as `(column, value)` lists.
pub fn solve_sparse(
    rows: Vec<Vec<(usize, Rational)>>,
    rhs: Vec<Rational>,
) -> Result<Vec<Rational>> {
    let n = rows.len();
    if rhs.len() != n {
        return Err(Error::Dimension(format!(
            "right-hand side has {} entries for {n} rows",
            rhs.len()
        )));
    }
    if let Some(col) = rows.iter().flatten().map(|(j, _)| *j).find(|&j| j >= n) {
        return Err(Error::Dimension(format!(
            "column {col} out of range for {n} unknowns"
        )));
    }

    let (known, rows, rhs) = peel_singletons(rows, rhs)?;
    if rows.is_empty() {
        return Ok(known
            .into_iter()
            .map(|v| v.expect("every unknown peeled"))
            .collect());
    }
    // Compact numbering for the unknowns that remain.
    let free: Vec<usize> = (0..n).filter(|&j| known[j].is_none()).collect();
    let mut index = vec![usize::MAX; n];
    for (k, &j) in free.iter().enumerate() {
        index[j] = k;
    }
    let rows: Vec<Vec<(usize, Rational)>> = rows
        .into_iter()
        .map(|r| r.into_iter().map(|(j, v)| (index[j], v)).collect())
        .collect();
    let reduced = eliminate(rows, rhs)?;
    let mut x: Vec<Rational> = known
        .into_iter()
        .map(|v| v.unwrap_or_else(Rational::zero))
        .collect();
    for (k, v) in reduced.into_iter().enumerate() {
        x[free[k]] = v;
    }
    Ok(x)
}

type Peeled = (
    Vec<Option<Rational>>,
    Vec<Vec<(usize, Rational)>>,
    Vec<Rational>,
);

/// Repeatedly solves rows with a single unknown and substitutes the result
/// into the other rows. Absorbing states and anything that only feeds into
/// them drop out before elimination, so their large right-hand sides never
/// get multiplied through the fraction-free updates.
fn peel_singletons(
    mut rows: Vec<Vec<(usize, Rational)>>,
    mut rhs: Vec<Rational>,
) -> Result<Peeled> {
    let n = rows.len();
    for row in rows.iter_mut() {
        row.retain(|(_, v)| !v.is_zero());
    }
    let mut users: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, row) in rows.iter().enumerate() {
        for (j, _) in row {
            users[*j].push(i);
        }
    }
    let mut known: Vec<Option<Rational>> = vec![None; n];
    let mut done = vec![false; n];
    let mut queue: Vec<usize> = (0..n).filter(|&i| rows[i].len() == 1).collect();
    while let Some(i) = queue.pop() {
        if done[i] || rows[i].len() != 1 {
            continue;
        }
        let (j, a) = rows[i].pop().expect("singleton row");
        done[i] = true;
        if known[j].is_some() {
            return Err(Error::Singular { column: j });
        }
        let x = &rhs[i] / &a;
        for &r in &users[j] {
            if done[r] {
                continue;
            }
            if let Some(pos) = rows[r].iter().position(|(c, _)| *c == j) {
                let (_, coeff) = rows[r].remove(pos);
                rhs[r] -= coeff * &x;
                match rows[r].len() {
                    0 => return Err(Error::Singular { column: j }),
                    1 => queue.push(r),
                    _ => {}
                }
            }
        }
        known[j] = Some(x);
    }
    let (rows, rhs) = rows
        .into_iter()
        .zip(rhs)
        .zip(done)
        .filter(|(_, d)| !d)
        .map(|(rb, _)| rb)
        .unzip();
    Ok((known, rows, rhs))
}

/// Fraction-free elimination on a system with no shortcuts left.
fn eliminate(rows: Vec<Vec<(usize, Rational)>>, rhs: Vec<Rational>) -> Result<Vec<Rational>> {
    let n = rows.len();
    let mut pending: Vec<WorkRow> = rows
        .into_iter()
        .zip(rhs)
        .map(|(r, b)| WorkRow::from_rational(r, b))
        .collect();
    // dets[k] is the pivot of step k-1, dets[0] = 1.
    let mut dets: Vec<BigInt> = vec![BigInt::one()];
    let mut pivots: Vec<WorkRow> = Vec::with_capacity(n);

    for k in 0..n {
        let Some(r) = pending.iter().position(|row| row.get(k).is_some()) else {
            return Err(Error::Singular { column: k });
        };
        let mut pivot = pending.remove(r);
        pivot.catch_up(k, &dets);
        let p = pivot.get(k).cloned().expect("pivot entry present");
        for row in pending.iter_mut() {
            if row.get(k).is_none() {
                continue;
            }
            row.catch_up(k, &dets);
            let f = row.get(k).cloned().expect("entry survives rescaling");
            *row = combine(row, &pivot, &p, &f, &dets[k], k);
        }
        dets.push(p);
        pivots.push(pivot);
    }

    let mut x = vec![Rational::zero(); n];
    for (k, row) in pivots.iter().enumerate().rev() {
        let mut acc = Rational::from_integer(row.rhs.clone());
        let mut diag = None;
        for (j, v) in &row.entries {
            if *j == k {
                diag = Some(v.clone());
            } else {
                debug_assert!(*j > k, "entry left of the pivot after elimination");
                acc -= &x[*j] * Rational::from_integer(v.clone());
            }
        }
        let diag = diag.ok_or(Error::Singular { column: k })?;
        x[k] = acc / Rational::from_integer(diag);
    }
    Ok(x)
}

/// Exact solution of `A x = b`.
pub fn solve_linear_system(a: &SquareRationalMatrix, b: &[Rational]) -> Result<Vec<Rational>> {
    if b.len() != a.dim() {
        return Err(Error::Dimension(format!(
            "right-hand side has {} entries for a {}x{} matrix",
            b.len(),
            a.dim(),
            a.dim()
        )));
    }
    let rows = (0..a.dim())
        .map(|i| {
            a.row(i)
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(j, v)| (j, v.clone()))
                .collect()
        })
        .collect();
    solve_sparse(rows, b.to_vec())
}

/// `(I - gamma P) v = c` for the chain under a fixed adversary policy.
pub fn policy_value(model: &Rmc, adversary: &AdversaryPolicy) -> Result<ValueVector> {
    adversary.check_feasible(model)?;
    let gamma = &model.discount;
    let rows = model
        .transitions
        .iter()
        .zip(&adversary.rows)
        .enumerate()
        .map(|(s, (t, dist))| {
            let mut row: Vec<(usize, Rational)> = Vec::with_capacity(t.successors.len() + 1);
            row.push((s, Rational::one()));
            for (&succ, p) in t.successors.iter().zip(dist) {
                if p.is_zero() {
                    continue;
                }
                let term = -(gamma * p);
                match row.iter_mut().find(|(j, _)| *j == succ) {
                    Some((_, v)) => *v += term,
                    None => row.push((succ, term)),
                }
            }
            row
        })
        .collect();
    solve_sparse(rows, model.cost.clone()).map(ValueVector)
}
