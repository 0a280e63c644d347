//! Exact optimality certificates for a candidate basis.
//!
//! Only the basis matrix is factored, by sparse Gaussian elimination with a
//! fewest-nonzeros pivot choice, so the cost tracks the fill of that matrix
//! rather than the width of a dense tableau.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};

use super::simplex::StandardForm;
use crate::rational::Rational;

type SparseRow = BTreeMap<usize, Rational>;

pub(super) struct Solved {
    pub x: Vec<Rational>,
    /// Columns that are combinations of earlier ones; their `x` is zero.
    pub dependent: Vec<usize>,
    /// Row pivoted for each column, in column order.
    pub pivot_row: Vec<usize>,
    /// Rows that received no pivot, with their reduced right-hand sides.
    pub leftover: Vec<(usize, Rational)>,
}

/// Solves `rows * x = rhs` for `ncols` unknowns, setting the unknowns of
/// dependent columns to zero.
pub(super) fn eliminate(mut rows: Vec<SparseRow>, mut rhs: Vec<Rational>, ncols: usize) -> Solved {
    let mut col_rows = vec![BTreeSet::new(); ncols];
    for (r, row) in rows.iter().enumerate() {
        for &c in row.keys() {
            col_rows[c].insert(r);
        }
    }
    let mut row_done = vec![false; rows.len()];
    let mut col_done = vec![false; ncols];
    let mut order = Vec::with_capacity(ncols);
    let mut dependent = Vec::new();

    for _ in 0..ncols {
        let c = (0..ncols).filter(|&c| !col_done[c]).min_by_key(|&c| col_rows[c].len()).expect("columns remain");
        col_done[c] = true;
        let Some(&r) = col_rows[c].iter().min_by_key(|&&r| rows[r].len()) else {
            dependent.push(c);
            continue;
        };
        row_done[r] = true;
        let pivot_row = std::mem::take(&mut rows[r]);
        for &cc in pivot_row.keys() {
            col_rows[cc].remove(&r);
        }
        let p = pivot_row[&c].clone();
        let targets: Vec<usize> = col_rows[c].iter().copied().collect();
        for i in targets {
            let f = &rows[i][&c] / &p;
            for (&cc, v) in &pivot_row {
                let entry = rows[i].entry(cc).or_insert_with(Rational::zero);
                *entry -= &f * v;
                if entry.is_zero() {
                    rows[i].remove(&cc);
                    col_rows[cc].remove(&i);
                } else {
                    col_rows[cc].insert(i);
                }
            }
            let delta = &f * &rhs[r];
            rhs[i] -= delta;
        }
        rows[r] = pivot_row;
        order.push((r, c));
    }

    let mut x = vec![Rational::zero(); ncols];
    let mut pivot_row = vec![0; ncols];
    for &(r, c) in order.iter().rev() {
        let mut acc = rhs[r].clone();
        for (&cc, v) in &rows[r] {
            if cc != c {
                acc -= v * &x[cc];
            }
        }
        x[c] = acc / &rows[r][&c];
        pivot_row[c] = r;
    }
    let leftover = (0..rows.len()).filter(|&r| !row_done[r]).map(|r| (r, rhs[r].clone())).collect();
    Solved { x, dependent, pivot_row, leftover }
}

/// Structural values of the basic solution for `basis` when it is exactly
/// primal feasible and no non-artificial column has a negative reduced
/// cost; `None` otherwise. Artificial columns and rows the basis leaves
/// uncovered are allowed only at value zero.
pub(super) fn certify(form: &StandardForm, objective: &[(usize, Rational)], basis: &[usize]) -> Option<Vec<Rational>> {
    let real = form.structural + form.slacks;
    let mut cols: Vec<usize> = basis.iter().copied().filter(|&c| c < real).collect();
    cols.sort_unstable();
    cols.dedup();
    let local: BTreeMap<usize, usize> = cols.iter().enumerate().map(|(k, &c)| (c, k)).collect();

    let restricted: Vec<SparseRow> = form
        .rows
        .iter()
        .map(|row| row.iter().filter_map(|(c, a)| local.get(c).map(|&k| (k, a.clone()))).collect())
        .collect();
    let primal = eliminate(restricted, form.rhs.clone(), cols.len());
    if !primal.dependent.is_empty()
        || primal.x.iter().any(Signed::is_negative)
        || primal.leftover.iter().any(|(_, b)| !b.is_zero())
    {
        return None;
    }

    let mut cost = vec![Rational::zero(); real];
    for (v, c) in objective {
        cost[*v] = c.clone();
    }

    // Duals on the pivoted rows; rows left to artificials price at zero.
    let dual_index: BTreeMap<usize, usize> = primal.pivot_row.iter().enumerate().map(|(k, &r)| (r, k)).collect();
    let mut transposed = vec![SparseRow::new(); cols.len()];
    for (r, row) in form.rows.iter().enumerate() {
        let Some(&k) = dual_index.get(&r) else { continue };
        for (c, a) in row {
            if let Some(&j) = local.get(c) {
                transposed[j].insert(k, a.clone());
            }
        }
    }
    let rhs = cols.iter().map(|&c| cost[c].clone()).collect();
    let dual = eliminate(transposed, rhs, cols.len());

    let mut reduced = cost;
    for (r, row) in form.rows.iter().enumerate() {
        let Some(&k) = dual_index.get(&r) else { continue };
        let y = &dual.x[k];
        if y.is_zero() {
            continue;
        }
        for (c, a) in row {
            if *c < real {
                reduced[*c] -= a * y;
            }
        }
    }
    if (0..real).any(|c| !local.contains_key(&c) && reduced[c].is_negative()) {
        return None;
    }

    let mut values = vec![Rational::zero(); form.structural];
    for (k, &c) in cols.iter().enumerate() {
        if c < form.structural {
            values[c] = primal.x[k].clone();
        }
    }
    Some(values)
}
