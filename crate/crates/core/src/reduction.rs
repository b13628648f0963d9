//! Reduction of an invertible matrix to its clan matrix by left
//! multiplication with `K = GL_p(F) x GL_q(F)` and right multiplication with
//! the Iwahori subgroup `B`.
//!
//! Rows `0..p` form the top block and rows `p..n` the bottom block. Row
//! operations stay inside one block; column operations are the elementary
//! generators of `B`: adding an `A`-multiple of a column to a later column,
//! a `tA`-multiple to an earlier column, or scaling a column by a unit.

use std::ops::RangeInclusive;

use rand::Rng;
use thiserror::Error;

use crate::clan::AffineClan;
use crate::correspondence::{ClanMatrix, CorrespondenceError};
use crate::dvr_linalg::{is_iwahori, MatrixF};
use crate::laurent::{characteristic, BaseScalar, FieldElem, Val};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("input matrix is singular")]
    SingularInput,
    #[error("expected a {expected}x{expected} matrix, got {rows}x{cols}")]
    Shape { expected: usize, rows: usize, cols: usize },
    #[error("reduction invariant violated: {0}")]
    Internal(String),
}

/// `k` and `b` with `k * g * b` equal to the reduced matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub k: MatrixF,
    pub b: MatrixF,
}

impl Witness {
    /// Checks the block shape of `k` and Iwahori membership of `b`.
    pub fn is_valid(&self, p: usize) -> bool {
        is_block_diagonal(&self.k, p) && self.k.is_invertible() && is_iwahori(&self.b)
    }
}

/// True when the off-diagonal blocks of `k` (split at `p`) vanish.
pub fn is_block_diagonal(k: &MatrixF, p: usize) -> bool {
    let n = k.rows();
    (0..n).all(|r| (0..n).all(|c| (r < p) == (c < p) || k.get(r, c).is_zero()))
}

struct Reducer {
    p: usize,
    n: usize,
    m: MatrixF,
    k: MatrixF,
    b: MatrixF,
}

impl Reducer {
    fn col_axpy(&mut self, dst: usize, src: usize, f: &FieldElem) {
        debug_assert!(
            f.val() >= Val::Finite(if src > dst { 1 } else { 0 }),
            "column operation {src} -> {dst} outside the Iwahori subgroup"
        );
        self.m.col_axpy(dst, src, f);
        self.b.col_axpy(dst, src, f);
    }

    fn col_scale(&mut self, c: usize, u: &FieldElem) {
        debug_assert!(u.is_unit());
        self.m.col_scale(c, u);
        self.b.col_scale(c, u);
    }

    fn row_axpy(&mut self, dst: usize, src: usize, f: &FieldElem) {
        debug_assert_eq!(dst < self.p, src < self.p, "row operation mixes the blocks");
        self.m.row_axpy(dst, src, f);
        self.k.row_axpy(dst, src, f);
    }

    fn row_scale(&mut self, r: usize, f: &FieldElem) {
        self.m.row_scale(r, f);
        self.k.row_scale(r, f);
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        debug_assert_eq!(a < self.p, b < self.p);
        self.m.swap_rows(a, b);
        self.k.swap_rows(a, b);
    }

    /// Row operations on `rows` making `m[rows[i], cols[i]] = 1` and
    /// `m[rows[i], cols[j]] = 0` for `i != j`.
    fn normalize(&mut self, rows: &[usize], cols: &[usize]) -> Result<(), ReductionError> {
        for idx in 0..rows.len() {
            let c = cols[idx];
            let piv = (idx..rows.len())
                .find(|&x| !self.m.get(rows[x], c).is_zero())
                .ok_or_else(|| ReductionError::Internal(format!("no pivot in column {}", c + 1)))?;
            if piv != idx {
                self.swap_rows(rows[piv], rows[idx]);
            }
            let r = rows[idx];
            let inv = self.m.get(r, c).inv().expect("pivot is nonzero");
            self.row_scale(r, &inv);
            for &other in rows {
                if other != r && !self.m.get(other, c).is_zero() {
                    let f = -self.m.get(other, c).clone();
                    self.row_axpy(other, r, &f);
                }
            }
        }
        Ok(())
    }

    /// Leftmost column of minimal valuation in row `r` among `cols`.
    fn leftmost_min(&self, r: usize, cols: impl Iterator<Item = usize>) -> Option<usize> {
        let mut best: Option<(Val, usize)> = None;
        for c in cols {
            let v = self.m.get(r, c).val();
            if v != Val::Infinite && best.is_none_or(|(bv, _)| v < bv) {
                best = Some((v, c));
            }
        }
        best.map(|(_, c)| c)
    }

    /// Clears row `r` outside `pivot` over `targets` using column `pivot`.
    fn clear_row(&mut self, r: usize, pivot: usize, targets: &[usize]) {
        let inv = self.m.get(r, pivot).inv().expect("pivot is nonzero");
        for &c in targets {
            if c != pivot && !self.m.get(r, c).is_zero() {
                let f = -(self.m.get(r, c) * &inv);
                self.col_axpy(c, pivot, &f);
            }
        }
    }

    fn run(mut self) -> Result<(ClanMatrix, Witness), ReductionError> {
        let (p, n) = (self.p, self.n);
        let top: Vec<usize> = (0..p).collect();
        let bottom: Vec<usize> = (p..n).collect();
        let all: Vec<usize> = (0..n).collect();

        // Bottom rows become a partial identity on the columns `i_cols`.
        let mut in_i = vec![false; n];
        for &r in &bottom {
            let free: Vec<usize> = all.iter().copied().filter(|&c| !in_i[c]).collect();
            let c = self
                .leftmost_min(r, free.iter().copied())
                .ok_or_else(|| ReductionError::Internal("bottom rows are dependent".into()))?;
            self.clear_row(r, c, &free);
            in_i[c] = true;
        }
        let i_cols: Vec<usize> = all.iter().copied().filter(|&c| in_i[c]).collect();
        self.normalize(&bottom, &i_cols)?;

        // Top rows: leftmost minimal entry, clear the row, restore the bottom
        // identity, then clear the pivot column in the later top rows.
        let mut j_of_row = vec![usize::MAX; p];
        for &r in &top {
            let j = self
                .leftmost_min(r, all.iter().copied())
                .ok_or_else(|| ReductionError::Internal(format!("top row {} vanished", r + 1)))?;
            self.clear_row(r, j, &all);
            self.normalize(&bottom, &i_cols)?;
            let inv = self.m.get(r, j).inv().expect("pivot is nonzero");
            self.row_scale(r, &inv);
            for r2 in r + 1..p {
                if !self.m.get(r2, j).is_zero() {
                    let f = -self.m.get(r2, j).clone();
                    self.row_axpy(r2, r, &f);
                }
            }
            j_of_row[r] = j;
        }
        let mut order: Vec<usize> = top.clone();
        order.sort_by_key(|&r| j_of_row[r]);
        let rows: Vec<usize> = order.into_iter().chain(bottom.iter().copied()).collect();
        self.m = self.m.select_rows(&rows);
        self.k = self.k.select_rows(&rows);
        let mut j_cols: Vec<usize> = j_of_row.clone();
        j_cols.sort_unstable();
        let mut in_j = vec![false; n];
        for &j in &j_cols {
            in_j[j] = true;
        }
        let i_of = |beta: usize| i_cols[beta - p];

        // Clear bottom entries in columns of J outside I with the bottom pivots.
        for &alpha in j_cols.iter().filter(|&&a| !in_i[a]) {
            for &beta in &bottom {
                if !self.m.get(beta, alpha).is_zero() {
                    let f = -self.m.get(beta, alpha).clone();
                    self.col_axpy(alpha, i_of(beta), &f);
                }
            }
        }
        self.normalize(&top, &j_cols)?;
        let mut free_cols: Vec<usize> = all.iter().copied().filter(|&c| !in_i[c] && !in_j[c]).collect();
        for &beta in bottom.iter().filter(|&&b| !in_j[i_of(b)]) {
            for &c in &free_cols {
                if !self.m.get(beta, c).is_zero() {
                    let f = -self.m.get(beta, c).clone();
                    self.col_axpy(c, i_of(beta), &f);
                }
            }
        }

        // Match rows whose pivot column lies in I ∩ J with the free columns,
        // taking the bottom-leftmost entry of minimal valuation each time.
        let mut open_rows: Vec<usize> = bottom.iter().copied().filter(|&b| in_j[i_of(b)]).collect();
        let mut matched: Vec<(usize, usize)> = Vec::new();
        let bound = n * n + 1;
        for _ in 0..bound {
            if open_rows.is_empty() {
                break;
            }
            let mut best: Option<(Val, usize, usize)> = None;
            for &beta in &open_rows {
                for &alpha in &free_cols {
                    let v = self.m.get(beta, alpha).val();
                    if v == Val::Infinite {
                        continue;
                    }
                    let better = match best {
                        None => true,
                        Some((bv, bb, ba)) => v < bv || (v == bv && (beta > bb || (beta == bb && alpha < ba))),
                    };
                    if better {
                        best = Some((v, beta, alpha));
                    }
                }
            }
            let (_, beta, alpha) =
                best.ok_or_else(|| ReductionError::Internal("unmatched rows have no free entries".into()))?;
            let x_inv = self.m.get(beta, alpha).inv().expect("nonzero");
            for &b2 in open_rows.iter().filter(|&&b2| b2 != beta) {
                if self.m.get(b2, alpha).is_zero() {
                    continue;
                }
                let z = self.m.get(b2, alpha) * &x_inv;
                self.row_axpy(b2, beta, &-z.clone());
                self.col_axpy(i_of(beta), i_of(b2), &z);
            }
            self.normalize(&top, &j_cols)?;
            self.clear_row(beta, alpha, &free_cols);
            let x = self.m.get(beta, alpha).clone();
            let v = x.val().finite().expect("nonzero");
            let u = x.shift(-v);
            self.col_scale(alpha, &u.inv().expect("unit"));
            self.row_scale(beta, &FieldElem::t_pow(-v));
            matched.push((beta, alpha));
            open_rows.retain(|&b| b != beta);
            free_cols.retain(|&c| c != alpha);
        }
        if !open_rows.is_empty() {
            return Err(ReductionError::Internal("matching did not terminate".into()));
        }

        // Order the bottom rows by the column of their unit entry.
        let perm_col = |beta: usize| matched.iter().find(|m| m.0 == beta).map_or(i_of(beta), |m| m.1);
        let mut bottom_order = bottom.clone();
        bottom_order.sort_by_key(|&b| perm_col(b));
        let rows: Vec<usize> = top.iter().copied().chain(bottom_order).collect();
        self.m = self.m.select_rows(&rows);
        self.k = self.k.select_rows(&rows);
        let cm = ClanMatrix::recognize(p, n - p, &self.m).map_err(|e| match e {
            CorrespondenceError::NotAClanMatrix(s) => ReductionError::Internal(s),
            other => ReductionError::Internal(other.to_string()),
        })?;
        Ok((cm, Witness { k: self.k, b: self.b }))
    }
}

/// Reduces `g` to the clan matrix of its double coset.
pub fn reduce_to_clan_matrix(p: usize, q: usize, g: &MatrixF) -> Result<(ClanMatrix, Witness), ReductionError> {
    let n = p + q;
    if g.rows() != n || g.cols() != n {
        return Err(ReductionError::Shape { expected: n, rows: g.rows(), cols: g.cols() });
    }
    if !g.is_invertible() {
        return Err(ReductionError::SingularInput);
    }
    let r = Reducer { p, n, m: g.clone(), k: MatrixF::identity(n), b: MatrixF::identity(n) };
    let (cm, w) = r.run()?;
    if &w.k.mul(g).mul(&w.b) != cm.matrix() {
        return Err(ReductionError::Internal("witness does not reproduce the reduced matrix".into()));
    }
    Ok((cm, w))
}

/// The clan of the double coset `K g B`.
pub fn classify(p: usize, q: usize, g: &MatrixF) -> Result<AffineClan, ReductionError> {
    Ok(reduce_to_clan_matrix(p, q, g)?.0.to_clan())
}

fn random_poly(rng: &mut impl Rng, max_deg: u32, nonzero_constant: bool) -> FieldElem {
    let ch = characteristic() as i64;
    let terms: Vec<(i64, BaseScalar)> = (0..=max_deg as i64)
        .map(|e| {
            let lo = if e == 0 && nonzero_constant { 1 } else { 0 };
            (e, BaseScalar::new(rng.gen_range(lo..ch)))
        })
        .collect();
    FieldElem::from_laurent_terms(&terms)
}

/// Random entry: zero with probability 1/4, otherwise `t^v * u` with `u` a
/// unit polynomial of degree at most 2 and `v` drawn from `vals`.
fn random_entry(rng: &mut impl Rng, vals: &RangeInclusive<i64>) -> FieldElem {
    if rng.gen_ratio(1, 4) {
        return FieldElem::zero();
    }
    let v = rng.gen_range(vals.clone());
    random_poly(rng, 2, true).shift(v)
}

/// Random invertible `n x n` matrix with entry valuations in `vals`.
pub fn random_gl(rng: &mut impl Rng, n: usize, vals: RangeInclusive<i64>) -> MatrixF {
    loop {
        let g = MatrixF::from_fn(n, n, |_, _| random_entry(rng, &vals));
        if g.is_invertible() {
            return g;
        }
    }
}

/// Random element of `K`: block diagonal with invertible `p x p` and
/// `q x q` blocks.
pub fn random_k(rng: &mut impl Rng, p: usize, q: usize, vals: RangeInclusive<i64>) -> MatrixF {
    let a = random_gl(rng, p, vals.clone());
    let d = random_gl(rng, q, vals);
    MatrixF::from_fn(p + q, p + q, |r, c| match (r < p, c < p) {
        (true, true) => a.get(r, c).clone(),
        (false, false) => d.get(r - p, c - p).clone(),
        _ => FieldElem::zero(),
    })
}

/// Random Iwahori element `T(A) * prod U_{ij,0} * prod U_{ij,1}` with
/// polynomial entries of degree at most `val_bound`.
pub fn random_b(rng: &mut impl Rng, n: usize, val_bound: u32) -> MatrixF {
    let mut b = MatrixF::zeros(n, n);
    for i in 0..n {
        b.set(i, i, random_poly(rng, val_bound, true));
    }
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            if rng.gen_bool(0.5) {
                continue;
            }
            let a = random_poly(rng, val_bound, false);
            let a = if i > j { a.shift(1) } else { a };
            // Right multiplication by I + a e_ij adds a * column i to column j.
            b.col_axpy(j, i, &a);
        }
    }
    b
}
