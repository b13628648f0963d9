//! Maps between clans, clan matrices and affine flags.
//!
//! A matrix `g` determines the flag whose basis vector `v_i` is column
//! `n+1-i` of `g`, with `Λ_i = span_A{v_i, ..., v_n, t v_1, ..., t v_{i-1}}`
//! and `Λ_{i+n} = t Λ_i`.

use thiserror::Error;

use crate::clan::{AffineClan, ClanError, ClanSymbol};
use crate::dvr_linalg::{quotient_length, LatticeBasis, LinalgError, MatrixF};
use crate::laurent::FieldElem;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorrespondenceError {
    #[error("matrix is singular")]
    Singular,
    #[error("expected a {expected}x{expected} matrix, got {rows}x{cols}")]
    Shape { expected: usize, rows: usize, cols: usize },
    #[error("not an affine clan matrix: {0}")]
    NotAClanMatrix(String),
    #[error("flag axiom violated at step {0}")]
    FlagAxiom(i64),
    #[error(transparent)]
    Clan(#[from] ClanError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// An affine flag given by an ordered `F`-basis `v_1, ..., v_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineFlag {
    p: usize,
    q: usize,
    /// Column `i-1` holds `v_i`.
    basis: MatrixF,
}

impl AffineFlag {
    /// Builds the flag of an ordered basis (columns `v_1, ..., v_n`).
    pub fn from_basis(p: usize, q: usize, basis: MatrixF) -> Result<Self, CorrespondenceError> {
        let n = p + q;
        if basis.rows() != n || basis.cols() != n {
            return Err(CorrespondenceError::Shape { expected: n, rows: basis.rows(), cols: basis.cols() });
        }
        if !basis.is_invertible() {
            return Err(CorrespondenceError::Singular);
        }
        Ok(AffineFlag { p, q, basis })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n(&self) -> usize {
        self.p + self.q
    }

    pub fn basis(&self) -> &MatrixF {
        &self.basis
    }

    /// `v_i` for `1 <= i <= n`.
    pub fn vector(&self, i: usize) -> Vec<FieldElem> {
        self.basis.column(i - 1)
    }

    /// The matrix `g = (v_n, ..., v_1)`.
    pub fn to_matrix(&self) -> MatrixF {
        let n = self.n();
        let order: Vec<usize> = (0..n).rev().collect();
        self.basis.select_columns(&order)
    }

    /// `Λ_i` for any integer `i`.
    pub fn lattice(&self, i: i64) -> LatticeBasis {
        let n = self.n() as i64;
        let i0 = (i - 1).rem_euclid(n) as usize;
        let a = (i - 1).div_euclid(n);
        let gens = MatrixF::from_fn(self.n(), self.n(), |r, c| {
            if c + i0 < self.n() {
                self.basis.get(r, c + i0).shift(a)
            } else {
                self.basis.get(r, c + i0 - self.n()).shift(a + 1)
            }
        });
        LatticeBasis::new(gens).expect("flag basis is invertible")
    }

    /// The flag `k Λ_•`.
    pub fn left_mul(&self, k: &MatrixF) -> Result<AffineFlag, CorrespondenceError> {
        AffineFlag::from_basis(self.p, self.q, k.mul(&self.basis))
    }

    /// Checks `Λ_i ⊃ Λ_{i+1}` with one-dimensional quotients for one period.
    pub fn check_axioms(&self) -> Result<(), CorrespondenceError> {
        for i in 1..=self.n() as i64 {
            match quotient_length(&self.lattice(i), &self.lattice(i + 1)) {
                Ok(1) => {}
                _ => return Err(CorrespondenceError::FlagAxiom(i)),
            }
        }
        Ok(())
    }
}

/// The flag `Λ_•(g)`.
pub fn matrix_to_flag(p: usize, q: usize, g: &MatrixF) -> Result<AffineFlag, CorrespondenceError> {
    let n = p + q;
    if g.rows() != n || g.cols() != n {
        return Err(CorrespondenceError::Shape { expected: n, rows: g.rows(), cols: g.cols() });
    }
    let order: Vec<usize> = (0..n).rev().collect();
    AffineFlag::from_basis(p, q, g.select_columns(&order))
}

fn unit_vector(n: usize, idx: usize) -> Vec<FieldElem> {
    (0..n).map(|r| if r == idx { FieldElem::one() } else { FieldElem::zero() }).collect()
}

/// The ordered basis `v_1, ..., v_n` attached to a clan.
///
/// Signs take the largest unused standard vector of `V_+` or `V_-`. For a
/// pair, one position receives `e_s + t^k e_t` where `k <= 0` is its own
/// shift (`k < 0` when it is the opening position) and the other receives
/// `e_t`; `t` is chosen at the opening position and `s` at the position that
/// receives it.
pub fn clan_to_basis(c: &AffineClan) -> Vec<Vec<FieldElem>> {
    let (p, n) = (c.p(), c.n());
    let mut free_plus: Vec<usize> = (0..p).collect();
    let mut free_minus: Vec<usize> = (p..n).collect();
    let mut pair_t = vec![usize::MAX; n + 1];
    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        let v = match c.symbol(i) {
            ClanSymbol::Plus => unit_vector(n, free_plus.pop().expect("sign balance")),
            ClanSymbol::Minus => unit_vector(n, free_minus.pop().expect("sign balance")),
            ClanSymbol::Paired { partner, shift } => {
                let opening = i < partner;
                let t = if opening { free_minus.pop().expect("pair needs a V_- index") } else { pair_t[partner] };
                pair_t[i] = t;
                let carries_plus = if opening { shift < 0 } else { shift <= 0 };
                if carries_plus {
                    let s = free_plus.pop().expect("pair needs a V_+ index");
                    let mut v = unit_vector(n, s);
                    v[t] = FieldElem::t_pow(shift);
                    v
                } else {
                    unit_vector(n, t)
                }
            }
        };
        out.push(v);
    }
    out
}

/// `g_c = (v_n, ..., v_1)`.
pub fn clan_to_matrix(c: &AffineClan) -> MatrixF {
    let mut basis = clan_to_basis(c);
    basis.reverse();
    MatrixF::from_columns(c.n(), &basis)
}

/// A matched column pair of a clan matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MatchedColumns {
    /// Column (0-based) whose permutation entry lies in the first `p` rows.
    pub upper: usize,
    /// Column (0-based) whose permutation entry lies in the last `q` rows.
    pub lower: usize,
    /// Exponent of the monomial `t^a` at (row of `lower`, column `upper`).
    pub exponent: i64,
}

/// A validated affine (p,q)-clan matrix `σ + L`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClanMatrix {
    p: usize,
    q: usize,
    /// Row `r` (0-based) has its permutation entry in column `row_to_col[r]`.
    row_to_col: Vec<usize>,
    pairs: Vec<MatchedColumns>,
    matrix: MatrixF,
}

impl ClanMatrix {
    /// Recognizes a clan matrix, reporting the first violated condition.
    pub fn recognize(p: usize, q: usize, g: &MatrixF) -> Result<Self, CorrespondenceError> {
        let n = p + q;
        let bad = |m: String| CorrespondenceError::NotAClanMatrix(m);
        if g.rows() != n || g.cols() != n {
            return Err(CorrespondenceError::Shape { expected: n, rows: g.rows(), cols: g.cols() });
        }
        let mut col_perm_row = vec![0usize; n];
        let mut l_entries = Vec::new();
        for c in 0..n {
            let nz: Vec<usize> = (0..n).filter(|&r| !g.get(r, c).is_zero()).collect();
            match nz.as_slice() {
                [r] => {
                    if !g.get(*r, c).is_one() {
                        return Err(bad(format!("entry ({},{}) of a single-entry column must be 1", r + 1, c + 1)));
                    }
                    col_perm_row[c] = *r;
                }
                [r1, r2] if *r1 < p && *r2 >= p => {
                    if !g.get(*r1, c).is_one() {
                        return Err(bad(format!("entry ({},{}) must be 1", r1 + 1, c + 1)));
                    }
                    let a = g
                        .get(*r2, c)
                        .as_t_power()
                        .ok_or_else(|| bad(format!("entry ({},{}) is not a monomial t^a", r2 + 1, c + 1)))?;
                    col_perm_row[c] = *r1;
                    l_entries.push((*r2, c, a));
                }
                _ => return Err(bad(format!("column {} has an invalid support", c + 1))),
            }
        }
        let mut row_to_col = vec![usize::MAX; n];
        for (c, &r) in col_perm_row.iter().enumerate() {
            if row_to_col[r] != usize::MAX {
                return Err(bad(format!("row {} carries two permutation entries", r + 1)));
            }
            row_to_col[r] = c;
        }
        if row_to_col[..p].windows(2).any(|w| w[0] > w[1]) || row_to_col[p..].windows(2).any(|w| w[0] > w[1]) {
            return Err(bad("permutation part violates the ordering within the two row blocks".into()));
        }
        let mut pairs = Vec::new();
        let mut row_used = vec![false; n];
        for (r, alpha, a) in l_entries {
            let beta = row_to_col[r];
            if row_used[r] {
                return Err(bad(format!("row {} has two monomial entries", r + 1)));
            }
            row_used[r] = true;
            if (0..n).filter(|&x| !g.get(x, beta).is_zero()).count() != 1 {
                return Err(bad(format!("column {} pairs with a non-unit column", alpha + 1)));
            }
            if alpha < beta && a > 0 {
                return Err(bad(format!("exponent {a} at ({},{}) must be <= 0", r + 1, alpha + 1)));
            }
            if alpha > beta && a >= 0 {
                return Err(bad(format!("exponent {a} at ({},{}) must be < 0", r + 1, alpha + 1)));
            }
            pairs.push(MatchedColumns { upper: alpha, lower: beta, exponent: a });
        }
        Ok(ClanMatrix { p, q, row_to_col, pairs, matrix: g.clone() })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn matrix(&self) -> &MatrixF {
        &self.matrix
    }

    pub fn row_to_col(&self) -> &[usize] {
        &self.row_to_col
    }

    pub fn pairs(&self) -> &[MatchedColumns] {
        &self.pairs
    }

    /// The clan read off the permutation and monomial parts.
    pub fn to_clan(&self) -> AffineClan {
        let n = self.p + self.q;
        let mut window = vec![ClanSymbol::Minus; n];
        for (r, &c) in self.row_to_col.iter().enumerate() {
            if r < self.p {
                window[n - 1 - c] = ClanSymbol::Plus;
            }
        }
        for m in &self.pairs {
            let (u, w) = (n - m.upper, n - m.lower);
            window[u - 1] = ClanSymbol::Paired { partner: w, shift: m.exponent };
            window[w - 1] = ClanSymbol::Paired { partner: u, shift: -m.exponent };
        }
        AffineClan::new(self.p, self.q, window).expect("recognized clan matrices encode valid clans")
    }
}

/// `σ_c M_c`: the clan matrix of `c`, with the last `q` rows permuted so the
/// permutation part satisfies the ordering condition.
pub fn to_clan_matrix(c: &AffineClan) -> ClanMatrix {
    let (p, n) = (c.p(), c.n());
    let m = clan_to_matrix(c);
    let mut lower: Vec<(usize, usize)> = (p..n)
        .map(|r| {
            let col = (0..n)
                .find(|&col| m.get(r, col).is_one() && (0..n).filter(|&x| !m.get(x, col).is_zero()).count() == 1)
                .expect("every lower row has a unit column");
            (col, r)
        })
        .collect();
    lower.sort_unstable();
    let order: Vec<usize> = (0..p).chain(lower.into_iter().map(|(_, r)| r)).collect();
    let sorted = m.select_rows(&order);
    ClanMatrix::recognize(p, c.q(), &sorted).expect("constructed matrix is a clan matrix")
}

/// Inverse of [`to_clan_matrix`] on recognized clan matrices.
pub fn clan_matrix_to_clan(p: usize, q: usize, g: &MatrixF) -> Result<AffineClan, CorrespondenceError> {
    Ok(ClanMatrix::recognize(p, q, g)?.to_clan())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clan::enumerate;
    use crate::laurent::parse;
    use std::collections::HashSet;

    fn m(s: &str) -> MatrixF {
        MatrixF::parse(s).unwrap()
    }

    fn fe(s: &str) -> FieldElem {
        parse(s).unwrap()
    }

    fn clan(p: usize, q: usize, s: &str) -> AffineClan {
        AffineClan::parse(p, q, s).unwrap()
    }

    fn col(v: &[&str]) -> Vec<FieldElem> {
        v.iter().map(|s| fe(s)).collect()
    }

    #[test]
    fn basis_of_sign_clan() {
        let b = clan_to_basis(&clan(2, 1, "(-,+,+)"));
        assert_eq!(b, vec![col(&["0", "0", "1"]), col(&["0", "1", "0"]), col(&["1", "0", "0"])]);
        assert_eq!(clan_to_matrix(&clan(2, 1, "(-,+,+)")), MatrixF::identity(3));
    }

    #[test]
    fn basis_of_pair_clans() {
        for a in [0, -1, -3] {
            let c = clan(2, 1, &format!("(1,{},+)", 1 + 3 * a));
            let b = clan_to_basis(&c);
            assert_eq!(b[0], col(&["0", "0", "1"]));
            assert_eq!(b[1], vec![fe("0"), fe("1"), FieldElem::t_pow(a)]);
            assert_eq!(b[2], col(&["1", "0", "0"]));
        }
        for k in 1..4 {
            let c = clan(1, 1, &format!("(1,{})", 1 + 2 * k));
            let b = clan_to_basis(&c);
            assert_eq!(b[0], vec![fe("1"), FieldElem::t_pow(-k)]);
            assert_eq!(b[1], col(&["0", "1"]));
            let mut expected = m("0,1;1,0");
            expected.set(1, 1, FieldElem::t_pow(-k));
            assert_eq!(clan_to_matrix(&c), expected);
        }
        for a in [0, -2] {
            let c = clan(1, 1, &format!("(1,{})", 1 + 2 * a));
            let mut expected = m("1,0;0,1");
            expected.set(1, 0, FieldElem::t_pow(a));
            assert_eq!(clan_to_matrix(&c), expected);
        }
    }

    #[test]
    fn two_one_representatives() {
        let a = -2;
        let c = clan(2, 1, &format!("(+,1,{})", 1 + 3 * a));
        let g = clan_to_matrix(&c);
        let mut expected = m("1,0,0;0,0,1;0,1,0");
        expected.set(1, 0, FieldElem::zero());
        expected.set(2, 0, FieldElem::t_pow(a));
        expected.set(2, 1, fe("1"));
        expected.set(1, 2, fe("1"));
        assert_eq!(g, expected);
        assert_eq!(clan_matrix_to_clan(2, 1, &g).unwrap(), c);
    }

    #[test]
    fn six_by_six_example() {
        let c = clan(3, 3, "(1,-,2,+,-4,13)");
        let basis = clan_to_basis(&c);
        let e = |i: usize| -> Vec<FieldElem> { (1..=6).map(|r| if r == i { fe("1") } else { fe("0") }).collect() };
        let mut v1 = e(3);
        v1[5] = fe("t^-2");
        let mut v5 = e(1);
        v5[3] = fe("t^-1");
        assert_eq!(basis, vec![v1, e(5), e(4), e(2), v5, e(6)]);
        let cm = to_clan_matrix(&c);
        let expected = m("0,1,0,0,0,0;0,0,1,0,0,0;0,0,0,0,0,1;1,0,0,0,0,t^-2;0,t^-1,0,1,0,0;0,0,0,0,1,0");
        assert_eq!(cm.matrix(), &expected);
        assert_eq!(cm.to_clan(), c);
    }

    #[test]
    fn recognition_examples() {
        for b in [-1, -4] {
            let mut g = m("1,0,0;0,0,1;0,1,0");
            g.set(2, 2, FieldElem::t_pow(b));
            assert_eq!(clan_matrix_to_clan(2, 1, &g).unwrap().to_string(), format!("(1,{},+)", 1 - 3 * b));
        }
        assert_eq!(clan_matrix_to_clan(2, 1, &m("0,1,0;0,0,1;1,0,0")).unwrap().to_string(), "(+,+,-)");
        let errs = [
            "1,0,0;0,1,0;0,t,1",     // a > 0 with the pair opening left
            "1,0,0;0,0,1;0,1,1",     // a = 0 with the pair opening right
            "0,1,0;1,0,0;0,0,1",     // ordering of the first block
            "1,0,0;0,1,0;0,2*t^-1,1", // coefficient not 1
            "1,0,0;0,1,0;0,1+t,1",   // not a monomial
        ];
        for s in errs {
            assert!(matches!(clan_matrix_to_clan(2, 1, &m(s)), Err(CorrespondenceError::NotAClanMatrix(_))), "{s}");
        }
    }

    #[test]
    fn matrix_to_flag_examples() {
        let f = matrix_to_flag(1, 1, &MatrixF::identity(2)).unwrap();
        assert_eq!(f.vector(1), col(&["0", "1"]));
        f.check_axioms().unwrap();
        let g = m("0,1;1,t^-3");
        let f = matrix_to_flag(1, 1, &g).unwrap();
        assert_eq!(f.vector(1), col(&["1", "t^-3"]));
        assert_eq!(f.vector(2), col(&["0", "1"]));
        assert_eq!(f.to_matrix(), g);
        assert!(matches!(matrix_to_flag(1, 1, &m("1,1;1,1")), Err(CorrespondenceError::Singular)));
        // Periodicity.
        let l1 = f.lattice(1);
        assert_eq!(f.lattice(3), l1.scaled(1));
        assert_eq!(f.lattice(-1), l1.scaled(-1));
    }

    #[test]
    fn roundtrip_on_enumerations() {
        for (p, q, d) in [(1, 1, 2), (2, 1, 2), (2, 2, 1), (3, 1, 1), (0, 2, 1), (2, 0, 1)] {
            let mut seen = HashSet::new();
            for c in enumerate(p, q, d) {
                let cm = to_clan_matrix(&c);
                assert_eq!(cm.to_clan(), c);
                assert_eq!(clan_matrix_to_clan(p, q, cm.matrix()).unwrap(), c);
                assert!(seen.insert(cm.matrix().to_string()));
                let flag = matrix_to_flag(p, q, &clan_to_matrix(&c)).unwrap();
                flag.check_axioms().unwrap();
            }
        }
    }

    #[test]
    fn sign_clans_give_permutation_matrices() {
        for c in enumerate(2, 2, 0).into_iter().filter(|c| c.pair_count() == 0) {
            let cm = to_clan_matrix(&c);
            assert!(cm.pairs().is_empty());
            let g = cm.matrix();
            for r in 0..4 {
                assert_eq!((0..4).filter(|&k| g.get(r, k).is_one()).count(), 1);
            }
        }
    }
}
