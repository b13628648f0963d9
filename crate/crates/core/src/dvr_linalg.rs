//! Linear algebra over the valuation ring `A = {x in K(t) : val(x) >= 0}`.
//!
//! Lattices are `A`-spans of the columns of a full-column-rank matrix. Every
//! quotient length reduces to a difference of determinant valuations, and the
//! echelon form below supplies both bases and saturated kernels.

use std::fmt;

use thiserror::Error;

use crate::laurent::{self, FieldElem, LaurentError, Val};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("matrix is singular")]
    Singular,
    #[error("generators are not linearly independent")]
    RankDeficient,
    #[error("lattice is not contained in the larger lattice")]
    NotContained,
    #[error("lattices have different ranks ({0} and {1})")]
    RankMismatch(usize, usize),
    #[error("matrix entry ({row},{col}): {source}")]
    Entry { row: usize, col: usize, source: LaurentError },
    #[error("matrix syntax: {0}")]
    Syntax(String),
}

/// A dense matrix over `K(t)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MatrixF {
    rows: usize,
    cols: usize,
    data: Vec<FieldElem>,
}

impl MatrixF {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        MatrixF { rows, cols, data: vec![FieldElem::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = MatrixF::zeros(n, n);
        for i in 0..n {
            m.set(i, i, FieldElem::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> FieldElem) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        MatrixF { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<FieldElem>>) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(LinalgError::Shape("rows have different lengths".into()));
        }
        let n = rows.len();
        Ok(MatrixF { rows: n, cols, data: rows.into_iter().flatten().collect() })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(n: usize, columns: &[Vec<FieldElem>]) -> Self {
        MatrixF::from_fn(n, columns.len(), |r, c| columns[c][r].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &FieldElem {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: FieldElem) {
        self.data[r * self.cols + c] = v;
    }

    pub fn column(&self, c: usize) -> Vec<FieldElem> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn row(&self, r: usize) -> Vec<FieldElem> {
        self.data[r * self.cols..(r + 1) * self.cols].to_vec()
    }

    pub fn columns(&self) -> Vec<Vec<FieldElem>> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn select_columns(&self, cols: &[usize]) -> MatrixF {
        MatrixF::from_fn(self.rows, cols.len(), |r, c| self.get(r, cols[c]).clone())
    }

    pub fn select_rows(&self, rows: &[usize]) -> MatrixF {
        MatrixF::from_fn(rows.len(), self.cols, |r, c| self.get(rows[r], c).clone())
    }

    /// Horizontal concatenation.
    pub fn hconcat(&self, o: &MatrixF) -> MatrixF {
        assert_eq!(self.rows, o.rows, "hconcat row mismatch");
        MatrixF::from_fn(self.rows, self.cols + o.cols, |r, c| {
            if c < self.cols {
                self.get(r, c).clone()
            } else {
                o.get(r, c - self.cols).clone()
            }
        })
    }

    pub fn transpose(&self) -> MatrixF {
        MatrixF::from_fn(self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    pub fn mul(&self, o: &MatrixF) -> MatrixF {
        assert_eq!(self.cols, o.rows, "matrix product shape mismatch");
        let mut out = MatrixF::zeros(self.rows, o.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..o.cols {
                    let b = o.get(k, c);
                    if !b.is_zero() {
                        let v = out.get(r, c) + &(a * b);
                        out.set(r, c, v);
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[FieldElem]) -> Vec<FieldElem> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                let mut acc = FieldElem::zero();
                for (c, x) in v.iter().enumerate() {
                    if !x.is_zero() && !self.get(r, c).is_zero() {
                        acc = acc + self.get(r, c) * x;
                    }
                }
                acc
            })
            .collect()
    }

    /// Multiplies every entry by `t^e`.
    pub fn shifted(&self, e: i64) -> MatrixF {
        MatrixF { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x.shift(e)).collect() }
    }

    /// Column operation `col[dst] += f * col[src]`.
    pub fn col_axpy(&mut self, dst: usize, src: usize, f: &FieldElem) {
        if f.is_zero() {
            return;
        }
        for r in 0..self.rows {
            let s = self.get(r, src);
            if !s.is_zero() {
                let v = self.get(r, dst) + &(f * s);
                self.set(r, dst, v);
            }
        }
    }

    /// Row operation `row[dst] += f * row[src]`.
    pub fn row_axpy(&mut self, dst: usize, src: usize, f: &FieldElem) {
        if f.is_zero() {
            return;
        }
        for c in 0..self.cols {
            let s = self.get(src, c);
            if !s.is_zero() {
                let v = self.get(dst, c) + &(f * s);
                self.set(dst, c, v);
            }
        }
    }

    pub fn col_scale(&mut self, c: usize, f: &FieldElem) {
        for r in 0..self.rows {
            let v = self.get(r, c) * f;
            self.set(r, c, v);
        }
    }

    pub fn row_scale(&mut self, r: usize, f: &FieldElem) {
        for c in 0..self.cols {
            let v = self.get(r, c) * f;
            self.set(r, c, v);
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    /// Determinant by fraction-field Gaussian elimination.
    pub fn det(&self) -> Result<FieldElem, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::Shape(format!("{}x{} matrix has no determinant", self.rows, self.cols)));
        }
        let mut m = self.clone();
        let mut det = FieldElem::one();
        for c in 0..m.cols {
            let Some(piv) = (c..m.rows).filter(|&r| !m.get(r, c).is_zero()).min_by_key(|&r| weight(m.get(r, c)))
            else {
                return Ok(FieldElem::zero());
            };
            if piv != c {
                m.swap_rows(piv, c);
                det = -det;
            }
            let pv = m.get(c, c).clone();
            det = det * &pv;
            let inv = pv.inv().expect("pivot is nonzero");
            for r in c + 1..m.rows {
                if !m.get(r, c).is_zero() {
                    let f = -(m.get(r, c) * &inv);
                    m.row_axpy(r, c, &f);
                }
            }
        }
        Ok(det)
    }

    pub fn is_invertible(&self) -> bool {
        self.det().is_ok_and(|d| !d.is_zero())
    }

    pub fn inverse(&self) -> Result<MatrixF, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::Shape("inverse of a non-square matrix".into()));
        }
        solve(self, &MatrixF::identity(self.rows)).ok_or(LinalgError::Singular)
    }

    /// Rank over `F`.
    pub fn rank(&self) -> usize {
        echelon_over_a(self).pivots.len()
    }

    /// Parses the text format: rows separated by `;` (or newlines), entries by
    /// `,`; an optional enclosing pair of parentheses or brackets is ignored.
    pub fn parse(text: &str) -> Result<MatrixF, LinalgError> {
        let body = strip_enclosing(text.trim());
        let rows = split_top_level(body, |c| c == ';' || c == '\n')?;
        let mut out = Vec::new();
        for (r, row) in rows.iter().filter(|s| !s.trim().is_empty()).enumerate() {
            let entries = split_top_level(row, |c| c == ',')?;
            let mut parsed = Vec::new();
            for (c, e) in entries.iter().enumerate() {
                let v = laurent::parse(e).map_err(|source| LinalgError::Entry { row: r + 1, col: c + 1, source })?;
                parsed.push(v);
            }
            out.push(parsed);
        }
        if out.is_empty() {
            return Err(LinalgError::Syntax("empty matrix".into()));
        }
        MatrixF::from_rows(out)
    }

    /// Entry strings in row-major nesting, as used by the JSON format.
    pub fn to_string_rows(&self) -> Vec<Vec<String>> {
        (0..self.rows).map(|r| (0..self.cols).map(|c| self.get(r, c).to_string()).collect()).collect()
    }

    pub fn from_string_rows(rows: &[Vec<String>]) -> Result<MatrixF, LinalgError> {
        let mut out = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            let mut parsed = Vec::new();
            for (c, e) in row.iter().enumerate() {
                let v = laurent::parse(e).map_err(|source| LinalgError::Entry { row: r + 1, col: c + 1, source })?;
                parsed.push(v);
            }
            out.push(parsed);
        }
        MatrixF::from_rows(out)
    }
}

/// Rough size of an element, used to pick pivots that keep degrees small.
fn weight(x: &FieldElem) -> usize {
    x.num().coeffs().len() + x.den().coeffs().len()
}

fn strip_enclosing(s: &str) -> &str {
    let b = s.as_bytes();
    if b.len() >= 2 {
        let (open, close) = (b[0], b[b.len() - 1]);
        if (open == b'(' && close == b')') || (open == b'[' && close == b']') {
            let mut depth = 0i32;
            for (i, &c) in b.iter().enumerate() {
                match c {
                    b'(' | b'[' => depth += 1,
                    b')' | b']' => depth -= 1,
                    _ => {}
                }
                if depth == 0 && i < b.len() - 1 {
                    return s;
                }
            }
            return &s[1..s.len() - 1];
        }
    }
    s
}

fn split_top_level(s: &str, is_sep: impl Fn(char) -> bool) -> Result<Vec<&str>, LinalgError> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => {
                depth -= 1;
                if depth < 0 {
                    return Err(LinalgError::Syntax(format!("unbalanced ')' at position {i}")));
                }
            }
            c if depth == 0 && is_sep(c) => {
                parts.push(&s[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(LinalgError::Syntax("unbalanced '('".into()));
    }
    parts.push(&s[start..]);
    Ok(parts)
}

/// Text format `a,b;c,d`.
impl fmt::Display for MatrixF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            if r > 0 {
                write!(f, ";")?;
            }
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", self.get(r, c))?;
            }
        }
        Ok(())
    }
}

/// Solves `B X = S` over `F` for `B` of full column rank. Returns `None`
/// when some column of `S` is outside the column span of `B`.
pub fn solve(b: &MatrixF, s: &MatrixF) -> Option<MatrixF> {
    assert_eq!(b.rows(), s.rows(), "solve: row mismatch");
    let (n, r, k) = (b.rows(), b.cols(), s.cols());
    let mut m = b.hconcat(s);
    let mut pivot_rows = Vec::with_capacity(r);
    let mut row = 0;
    for c in 0..r {
        let piv = (row..n).filter(|&i| !m.get(i, c).is_zero()).min_by_key(|&i| weight(m.get(i, c)))?;
        m.swap_rows(piv, row);
        let inv = m.get(row, c).inv().expect("nonzero pivot");
        m.row_scale(row, &inv);
        for i in 0..n {
            if i != row && !m.get(i, c).is_zero() {
                let f = -m.get(i, c).clone();
                m.row_axpy(i, row, &f);
            }
        }
        pivot_rows.push(row);
        row += 1;
    }
    for i in r..n {
        if (0..k).any(|j| !m.get(i, r + j).is_zero()) {
            return None;
        }
    }
    Some(MatrixF::from_fn(r, k, |i, j| m.get(pivot_rows[i], r + j).clone()))
}

/// Output of [`echelon_over_a`]: `M * U = E` with `U` invertible over `A`.
#[derive(Clone, Debug)]
pub struct Echelon {
    pub e: MatrixF,
    pub u: MatrixF,
    /// (row, column) of each pivot, in the order rows were processed.
    pub pivots: Vec<(usize, usize)>,
    /// Columns of `E` that are identically zero.
    pub zero_cols: Vec<usize>,
}

impl Echelon {
    pub fn pivot_cols(&self) -> Vec<usize> {
        self.pivots.iter().map(|p| p.1).collect()
    }

    pub fn pivot_rows(&self) -> Vec<usize> {
        self.pivots.iter().map(|p| p.0).collect()
    }

    /// Sum of pivot valuations: `val(det)` of the pivot-row by pivot-column
    /// block, which is triangular up to ordering.
    pub fn pivot_val_sum(&self) -> i64 {
        self.pivots.iter().map(|&(r, c)| self.e.get(r, c).val().finite().expect("pivot is nonzero")).sum()
    }
}

/// Column echelon form over `A` with valuation pivots.
///
/// Rows are processed top to bottom; in each row the pivot is the entry of
/// minimal valuation among columns not yet used, leftmost on ties. Every other
/// unused column is cleared in that row by subtracting an `A`-multiple of the
/// pivot column, so the transform is unimodular over `A`.
pub fn echelon_over_a(m: &MatrixF) -> Echelon {
    let mut e = m.clone();
    let mut u = MatrixF::identity(m.cols());
    let mut used = vec![false; m.cols()];
    let mut pivots = Vec::new();
    for r in 0..m.rows() {
        let mut best: Option<(Val, usize)> = None;
        for c in (0..m.cols()).filter(|&c| !used[c]) {
            let v = e.get(r, c).val();
            if v != Val::Infinite && best.is_none_or(|(bv, _)| v < bv) {
                best = Some((v, c));
            }
        }
        let Some((_, pc)) = best else { continue };
        let pinv = e.get(r, pc).inv().expect("pivot is nonzero");
        for c in 0..m.cols() {
            if c != pc && !used[c] && !e.get(r, c).is_zero() {
                let f = -(e.get(r, c) * &pinv);
                e.col_axpy(c, pc, &f);
                u.col_axpy(c, pc, &f);
            }
        }
        used[pc] = true;
        pivots.push((r, pc));
    }
    let zero_cols = (0..m.cols()).filter(|&c| (0..m.rows()).all(|r| e.get(r, c).is_zero())).collect();
    Echelon { e, u, pivots, zero_cols }
}

/// Witnesses of `g * M * h = P` with `P` a partial identity.
#[derive(Clone, Debug)]
pub struct PartialIdentity {
    pub g: MatrixF,
    pub h: MatrixF,
    pub p: MatrixF,
    /// Columns of `P` holding the identity, increasing.
    pub pivot_cols: Vec<usize>,
}

/// Reduces a full-row-rank `m x n` matrix to a partial identity with `g`
/// invertible over `F` on the left and `h` in the Iwahori subgroup on the right.
pub fn partial_identity_reduce(m: &MatrixF) -> Result<PartialIdentity, LinalgError> {
    if m.rows() > m.cols() {
        return Err(LinalgError::Shape("more rows than columns".into()));
    }
    let mut work = m.clone();
    let mut h = MatrixF::identity(m.cols());
    let mut used = vec![false; m.cols()];
    for r in 0..m.rows() {
        let mut best: Option<(Val, usize)> = None;
        for c in (0..m.cols()).filter(|&c| !used[c]) {
            let v = work.get(r, c).val();
            if v != Val::Infinite && best.is_none_or(|(bv, _)| v < bv) {
                best = Some((v, c));
            }
        }
        let (_, pc) = best.ok_or(LinalgError::RankDeficient)?;
        let pinv = work.get(r, pc).inv().expect("pivot is nonzero");
        for c in 0..m.cols() {
            if c != pc && !used[c] && !work.get(r, c).is_zero() {
                let f = -(work.get(r, c) * &pinv);
                work.col_axpy(c, pc, &f);
                h.col_axpy(c, pc, &f);
            }
        }
        used[pc] = true;
    }
    let pivot_cols: Vec<usize> = (0..m.cols()).filter(|&c| used[c]).collect();
    let g = work.select_columns(&pivot_cols).inverse()?;
    let p = g.mul(&work);
    Ok(PartialIdentity { g, h, p, pivot_cols })
}

/// True when `b` lies in the Iwahori subgroup: entries in `A`, upper
/// triangular modulo `t`, invertible over `A`.
pub fn is_iwahori(b: &MatrixF) -> bool {
    if !b.is_square() {
        return false;
    }
    for r in 0..b.rows() {
        for c in 0..b.cols() {
            let v = b.get(r, c).val();
            let ok = match r.cmp(&c) {
                std::cmp::Ordering::Greater => v >= Val::Finite(1),
                std::cmp::Ordering::Equal => v == Val::Finite(0),
                std::cmp::Ordering::Less => v >= Val::Finite(0),
            };
            if !ok {
                return false;
            }
        }
    }
    b.det().is_ok_and(|d| d.val() == Val::Finite(0))
}

/// An `A`-lattice: the `A`-span of linearly independent columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeBasis {
    gens: MatrixF,
}

impl LatticeBasis {
    /// Wraps a full-column-rank generator matrix.
    pub fn new(gens: MatrixF) -> Result<Self, LinalgError> {
        if gens.rank() != gens.cols() {
            return Err(LinalgError::RankDeficient);
        }
        Ok(LatticeBasis { gens })
    }

    /// The lattice generated by arbitrary (possibly dependent) columns.
    pub fn from_generators(m: &MatrixF) -> Self {
        let ech = echelon_over_a(m);
        let mut cols = ech.pivot_cols();
        cols.sort_unstable();
        LatticeBasis { gens: ech.e.select_columns(&cols) }
    }

    /// The standard lattice `A^n`.
    pub fn standard(n: usize) -> Self {
        LatticeBasis { gens: MatrixF::identity(n) }
    }

    pub(crate) fn from_independent(gens: MatrixF) -> Self {
        LatticeBasis { gens }
    }

    pub fn generators(&self) -> &MatrixF {
        &self.gens
    }

    pub fn ambient_dim(&self) -> usize {
        self.gens.rows()
    }

    pub fn rank(&self) -> usize {
        self.gens.cols()
    }

    /// `t^e * L`.
    pub fn scaled(&self, e: i64) -> Self {
        LatticeBasis { gens: self.gens.shifted(e) }
    }

    /// Coordinates of `v` in the generators, if `v` lies in the `F`-span.
    pub fn coordinates(&self, v: &[FieldElem]) -> Option<Vec<FieldElem>> {
        let s = MatrixF::from_columns(v.len(), &[v.to_vec()]);
        solve(&self.gens, &s).map(|x| x.column(0))
    }
}

/// `val(det)` of a square full-rank lattice basis.
pub fn lattice_det_val(l: &LatticeBasis) -> Result<i64, LinalgError> {
    let g = l.generators();
    if !g.is_square() {
        return Err(LinalgError::Shape("determinant valuation needs a square basis".into()));
    }
    let ech = echelon_over_a(g);
    if ech.pivots.len() != g.cols() {
        return Err(LinalgError::Singular);
    }
    Ok(ech.pivot_val_sum())
}

/// `dim_K(big / small)` for equal-rank lattices with `small ⊆ big`.
pub fn quotient_length(big: &LatticeBasis, small: &LatticeBasis) -> Result<u64, LinalgError> {
    if big.ambient_dim() != small.ambient_dim() {
        return Err(LinalgError::Shape("ambient dimensions differ".into()));
    }
    if big.rank() != small.rank() {
        return Err(LinalgError::RankMismatch(big.rank(), small.rank()));
    }
    if big.rank() == 0 {
        return Ok(0);
    }
    let x = solve(big.generators(), small.generators()).ok_or(LinalgError::NotContained)?;
    for r in 0..x.rows() {
        for c in 0..x.cols() {
            if !x.get(r, c).is_integral() {
                return Err(LinalgError::NotContained);
            }
        }
    }
    let ech = echelon_over_a(&x);
    if ech.pivots.len() != x.cols() {
        return Err(LinalgError::RankDeficient);
    }
    Ok(ech.pivot_val_sum() as u64)
}

/// True when `v` is an `A`-combination of the generators of `l`.
pub fn membership(v: &[FieldElem], l: &LatticeBasis) -> bool {
    match l.coordinates(v) {
        Some(x) => x.iter().all(|c| c.is_integral()),
        None => false,
    }
}

/// `{x in L : x_i = 0 for i outside S}` for a full-rank lattice `L`, with
/// 0-based coordinate indices `S`.
pub fn intersect_coordinates(l: &LatticeBasis, s: &[usize]) -> LatticeBasis {
    let n = l.ambient_dim();
    let comp: Vec<usize> = (0..n).filter(|i| !s.contains(i)).collect();
    if comp.is_empty() {
        return l.clone();
    }
    let c = l.generators().select_rows(&comp);
    let ech = echelon_over_a(&c);
    let kernel = ech.u.select_columns(&ech.zero_cols);
    LatticeBasis::from_independent(l.generators().mul(&kernel))
}

/// Image of `L` under the projection onto the coordinates `S` (0-based),
/// kept inside the ambient space.
pub fn project_coordinates(l: &LatticeBasis, s: &[usize]) -> LatticeBasis {
    let g = l.generators();
    let proj = MatrixF::from_fn(g.rows(), g.cols(), |r, c| if s.contains(&r) { g.get(r, c).clone() } else { FieldElem::zero() });
    LatticeBasis::from_generators(&proj)
}

/// `π_+(L)`: projection onto the first `p` coordinates.
pub fn project_plus(l: &LatticeBasis, p: usize) -> LatticeBasis {
    let s: Vec<usize> = (0..p).collect();
    project_coordinates(l, &s)
}

/// The lattice generated by both generator sets.
pub fn lattice_sum(a: &LatticeBasis, b: &LatticeBasis) -> LatticeBasis {
    LatticeBasis::from_generators(&a.generators().hconcat(b.generators()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::parse;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn m(s: &str) -> MatrixF {
        MatrixF::parse(s).unwrap()
    }

    fn lat(s: &str) -> LatticeBasis {
        LatticeBasis::new(m(s)).unwrap()
    }

    fn fe(s: &str) -> FieldElem {
        parse(s).unwrap()
    }

    fn random_entry(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> FieldElem {
        if rng.gen_bool(0.25) {
            return FieldElem::zero();
        }
        let v = rng.gen_range(lo..=hi);
        let terms: Vec<_> = (0..rng.gen_range(1..=2))
            .map(|k| (v + k, laurent::BaseScalar::new(rng.gen_range(1..101))))
            .collect();
        FieldElem::from_laurent_terms(&terms)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> MatrixF {
        MatrixF::from_fn(r, c, |_, _| random_entry(rng, -2, 2))
    }

    fn random_invertible(rng: &mut ChaCha8Rng, n: usize) -> MatrixF {
        loop {
            let g = random_matrix(rng, n, n);
            if g.is_invertible() {
                return g;
            }
        }
    }

    /// A random element of `GL_n(A)`: unit diagonal times unipotent factors.
    fn random_unimodular(rng: &mut ChaCha8Rng, n: usize) -> MatrixF {
        let mut u = MatrixF::identity(n);
        for _ in 0..2 * n {
            let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if i != j {
                let f = random_entry(rng, 0, 2);
                u.col_axpy(j, i, &f);
            }
        }
        for i in 0..n {
            let unit = fe("1") + random_entry(rng, 1, 2);
            u.col_scale(i, &unit);
        }
        u
    }

    #[test]
    fn matrix_text_format() {
        let a = m("(1,0;t^-1,1)");
        assert_eq!(a.rows(), 2);
        assert_eq!(a.get(1, 0), &fe("t^-1"));
        assert_eq!(a.to_string(), "1,0;t^-1,1");
        assert_eq!(m(&a.to_string()), a);
        assert_eq!(m("[1, (1+t)/(2) ; 0, 1]").get(0, 1), &fe("(1+t)/2"));
        assert!(matches!(MatrixF::parse("1,t^^2"), Err(LinalgError::Entry { row: 1, col: 2, .. })));
        assert!(matches!(MatrixF::parse("1,2;3"), Err(LinalgError::Shape(_))));
    }

    #[test]
    fn echelon_identity() {
        let ech = echelon_over_a(&MatrixF::identity(3));
        assert_eq!(ech.e, MatrixF::identity(3));
        assert_eq!(ech.u, MatrixF::identity(3));
    }

    #[test]
    fn echelon_single_row() {
        let ech = echelon_over_a(&m("t,1"));
        assert_eq!(ech.pivots, vec![(0, 1)]);
        assert!(ech.e.get(0, 0).is_zero());
        assert!(ech.e.get(0, 1).is_unit());
        assert_eq!(ech.zero_cols, vec![0]);
    }

    #[test]
    fn echelon_random_rectangular() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let a = random_matrix(&mut rng, 3, 5);
            let ech = echelon_over_a(&a);
            assert_eq!(a.mul(&ech.u), ech.e);
            assert_eq!(ech.u.det().unwrap().val(), Val::Finite(0));
            if ech.pivots.len() == 3 {
                let sub = ech.e.select_columns(&ech.pivot_cols());
                assert!(sub.det().unwrap().val().finite().is_some());
            }
        }
    }

    #[test]
    fn partial_identity_examples() {
        let a = m("1,0,0;0,1,0");
        let pi = partial_identity_reduce(&a).unwrap();
        assert_eq!(pi.p, a);
        assert_eq!(pi.g, MatrixF::identity(2));
        assert_eq!(pi.h, MatrixF::identity(3));

        let pi = partial_identity_reduce(&m("t^2 + t^3,5*t^4")).unwrap();
        assert_eq!(pi.p, m("1,0"));
        assert!(is_iwahori(&pi.h));

        assert!(matches!(partial_identity_reduce(&m("1,t;2,2*t")), Err(LinalgError::RankDeficient)));
    }

    #[test]
    fn partial_identity_fuzz() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut done = 0;
        while done < 100 {
            let a = random_matrix(&mut rng, 2, 4);
            if a.rank() < 2 {
                continue;
            }
            let pi = partial_identity_reduce(&a).unwrap();
            assert_eq!(pi.g.mul(&a).mul(&pi.h), pi.p);
            assert!(is_iwahori(&pi.h));
            assert_eq!(pi.p.select_columns(&pi.pivot_cols), MatrixF::identity(2));
            done += 1;
        }
    }

    #[test]
    fn det_val_examples() {
        assert_eq!(lattice_det_val(&LatticeBasis::standard(3)).unwrap(), 0);
        assert_eq!(lattice_det_val(&LatticeBasis::standard(3).scaled(1)).unwrap(), 3);
        assert_eq!(lattice_det_val(&lat("1,0;t^-2,1")).unwrap(), 0);
        // span{e1 + t^-2 e2, t e2}: determinant t.
        assert_eq!(lattice_det_val(&lat("1,0;t^-2,t")).unwrap(), 1);
        assert_eq!(lattice_det_val(&lat("t^-2,0;0,1")).unwrap(), -2);
        assert!(lattice_det_val(&lat("1;0")).is_err());
    }

    #[test]
    fn quotient_length_examples() {
        let e = LatticeBasis::standard(3);
        assert_eq!(quotient_length(&e, &e).unwrap(), 0);
        assert_eq!(quotient_length(&e, &e.scaled(1)).unwrap(), 3);
        assert_eq!(quotient_length(&lat("1;0"), &lat("t^3;0")).unwrap(), 3);
        assert_eq!(quotient_length(&e.scaled(1), &e), Err(LinalgError::NotContained));
        assert!(matches!(quotient_length(&e, &lat("1;0;0")), Err(LinalgError::RankMismatch(3, 1))));
    }

    #[test]
    fn membership_examples() {
        let l = lat("1,0;t^-2,t");
        assert!(membership(&l.generators().column(0), &l));
        let v: Vec<FieldElem> = l.generators().column(0).iter().map(|x| x.shift(-1)).collect();
        assert!(!membership(&v, &l));
        // e2 = t^-1 * (t e2): not integral.
        assert!(!membership(&[fe("0"), fe("1")], &l));
        assert!(membership(&[fe("0"), fe("t")], &l));
        assert!(membership(&[fe("t^2"), fe("1")], &l));
    }

    #[test]
    fn intersection_examples() {
        let e = LatticeBasis::standard(4);
        let i = intersect_coordinates(&e, &[0, 1]);
        assert_eq!(i.rank(), 2);
        assert_eq!(quotient_length(&i, &i).unwrap(), 0);
        assert!(membership(&[fe("1"), fe("0"), fe("0"), fe("0")], &i));

        // span{e1 + t^-2 e2, e2} meets V_+ in A t^2 e1.
        let l = lat("1,0;t^-2,1");
        let i = intersect_coordinates(&l, &[0]);
        assert_eq!(i.rank(), 1);
        assert!(membership(&[fe("t^2"), fe("0")], &i));
        assert!(!membership(&[fe("t"), fe("0")], &i));
        assert!(membership(&[fe("t^2"), fe("0")], &l));
    }

    #[test]
    fn projection_and_sum() {
        let e = LatticeBasis::standard(3);
        let p = project_plus(&e, 2);
        assert_eq!(p.rank(), 2);
        assert!(membership(&[fe("1"), fe("0"), fe("0")], &p));
        assert!(membership(&[fe("0"), fe("1"), fe("0")], &p));

        // g = (0 1; 1 t^a), a = -2: Λ_1 = span{(1,t^a), e2}, Λ_2 = span{e2, t(1,t^a)}.
        let l1 = lat("1,0;t^-2,1");
        let l2 = lat("0,t;1,t^-1");
        let p1 = project_plus(&l1, 1);
        assert!(membership(&[fe("1"), fe("0")], &p1));
        assert!(!membership(&[fe("t^-1"), fe("0")], &p1));
        let p2 = project_plus(&l2, 1);
        assert!(membership(&[fe("t"), fe("0")], &p2));
        assert!(!membership(&[fe("1"), fe("0")], &p2));

        let s = lattice_sum(&lat("t;0"), &lat("1;0"));
        assert_eq!(s.rank(), 1);
        assert!(membership(&[fe("1"), fe("0")], &s));
        assert_eq!(lattice_det_val(&lattice_sum(&e, &e)).unwrap(), 0);
    }

    #[test]
    fn quotient_length_is_basis_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let g = random_invertible(&mut rng, 3);
            let big = LatticeBasis::new(g.clone()).unwrap();
            let small = LatticeBasis::new(g.mul(&random_integral_invertible(&mut rng, 3))).unwrap();
            let q1 = quotient_length(&big, &small).unwrap();
            let big2 = LatticeBasis::new(big.generators().mul(&random_unimodular(&mut rng, 3))).unwrap();
            let small2 = LatticeBasis::new(small.generators().mul(&random_unimodular(&mut rng, 3))).unwrap();
            assert_eq!(quotient_length(&big2, &small2).unwrap(), q1);
            assert_eq!(q1 as i64, lattice_det_val(&small).unwrap() - lattice_det_val(&big).unwrap());
        }
    }

    fn random_integral_invertible(rng: &mut ChaCha8Rng, n: usize) -> MatrixF {
        loop {
            let a = MatrixF::from_fn(n, n, |_, _| random_entry(rng, 0, 2));
            if a.is_invertible() {
                return a;
            }
        }
    }

    #[test]
    fn membership_agrees_with_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut hits = 0;
        for _ in 0..1000 {
            let g = random_invertible(&mut rng, 3);
            let l = LatticeBasis::new(g.clone()).unwrap();
            let v: Vec<FieldElem> = (0..3).map(|_| random_entry(&mut rng, -1, 3)).collect();
            // Oracle: Cramer's rule for the coordinates.
            let d = g.det().unwrap();
            let integral = (0..3).all(|k| {
                let mut gk = g.clone();
                for r in 0..3 {
                    gk.set(r, k, v[r].clone());
                }
                (gk.det().unwrap() / &d).is_integral()
            });
            assert_eq!(membership(&v, &l), integral);
            hits += integral as usize;
        }
        assert!(hits > 0);
    }

    #[test]
    fn intersections_are_saturated() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let l = LatticeBasis::new(random_invertible(&mut rng, 4)).unwrap();
            for s in [vec![0, 1], vec![2, 3], vec![0], vec![1, 2, 3]] {
                let i = intersect_coordinates(&l, &s);
                assert_eq!(i.rank(), s.len());
                for col in i.generators().columns() {
                    assert!(membership(&col, &l));
                    let down: Vec<FieldElem> = col.iter().map(|x| x.shift(-1)).collect();
                    assert!(!membership(&down, &l));
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn echelon_transform_identity(seed in any::<u64>(), r in 1usize..4, c in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_matrix(&mut rng, r, c);
            let ech = echelon_over_a(&a);
            prop_assert_eq!(a.mul(&ech.u), ech.e.clone());
            prop_assert_eq!(ech.u.det().unwrap().val(), Val::Finite(0));
            prop_assert_eq!(ech.pivots.len() + ech.zero_cols.len(), c);
        }
    }
}
