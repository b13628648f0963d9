//! Orbit invariants of affine flags and the flag-to-clan procedure.
//!
//! For a flag `Λ_•` and integers `i, j`:
//!
//! * `(i;+) = dim_K (Λ_i ∩ V_+) / (Λ_{i+1} ∩ V_+)`, likewise `(i;-)`;
//! * `(i;N) = dim_K Λ_i / ((Λ_i ∩ V_+) ⊕ (Λ_i ∩ V_-))`;
//! * `(i;j) = dim_K (π_+(Λ_j) + Λ_i) / tΛ_1` for `i <= min(j, n+1)`.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rand::Rng;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::clan::{AffineClan, ClanError, ClanSymbol};
use crate::correspondence::AffineFlag;
use crate::dvr_linalg::{
    intersect_coordinates, lattice_det_val, lattice_sum, membership, project_plus, quotient_length, LatticeBasis,
    LinalgError,
};
use crate::laurent::{BaseScalar, FieldElem};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvariantError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Clan(#[from] ClanError),
    #[error("flag to clan extraction failed: {0}")]
    Extraction(String),
}

/// True when every generator of `small` lies in `big`.
pub fn lattice_contained(small: &LatticeBasis, big: &LatticeBasis) -> bool {
    small.generators().columns().iter().all(|v| membership(v, big))
}

/// Invariant evaluation for one flag, caching lattices and projections.
pub struct FlagInvariants<'a> {
    flag: &'a AffineFlag,
    lattices: RefCell<HashMap<i64, LatticeBasis>>,
    projections: RefCell<HashMap<i64, LatticeBasis>>,
    det_t_lambda_1: i64,
}

impl<'a> FlagInvariants<'a> {
    pub fn new(flag: &'a AffineFlag) -> Self {
        let det = lattice_det_val(&flag.lattice(1)).expect("flag lattices have full rank");
        FlagInvariants {
            flag,
            lattices: RefCell::new(HashMap::new()),
            projections: RefCell::new(HashMap::new()),
            det_t_lambda_1: det + flag.n() as i64,
        }
    }

    pub fn flag(&self) -> &AffineFlag {
        self.flag
    }

    pub fn lattice(&self, i: i64) -> LatticeBasis {
        self.lattices.borrow_mut().entry(i).or_insert_with(|| self.flag.lattice(i)).clone()
    }

    /// `π_+(Λ_j)`.
    pub fn projection(&self, j: i64) -> LatticeBasis {
        if let Some(l) = self.projections.borrow().get(&j) {
            return l.clone();
        }
        let l = project_plus(&self.lattice(j), self.flag.p());
        self.projections.borrow_mut().insert(j, l.clone());
        l
    }

    fn plus_coords(&self) -> Vec<usize> {
        (0..self.flag.p()).collect()
    }

    fn minus_coords(&self) -> Vec<usize> {
        (self.flag.p()..self.flag.n()).collect()
    }

    fn step(&self, i: i64, coords: &[usize]) -> u64 {
        let big = intersect_coordinates(&self.lattice(i), coords);
        let small = intersect_coordinates(&self.lattice(i + 1), coords);
        quotient_length(&big, &small).expect("consecutive flag lattices are nested")
    }

    /// `(i;+)`.
    pub fn plus(&self, i: i64) -> u64 {
        self.step(i, &self.plus_coords())
    }

    /// `(i;-)`.
    pub fn minus(&self, i: i64) -> u64 {
        self.step(i, &self.minus_coords())
    }

    /// `(i;N)` via the two coordinate intersections.
    pub fn crossing(&self, i: i64) -> u64 {
        let l = self.lattice(i);
        let split = lattice_sum(
            &intersect_coordinates(&l, &self.plus_coords()),
            &intersect_coordinates(&l, &self.minus_coords()),
        );
        quotient_length(&l, &split).expect("split part is a full sublattice")
    }

    /// `(i;N)` via `dim_K (π_+(Λ_i) + Λ_i) / Λ_i`.
    pub fn crossing_by_projection(&self, i: i64) -> u64 {
        let l = self.lattice(i);
        let sum = lattice_sum(&self.projection(i), &l);
        quotient_length(&sum, &l).expect("Λ_i lies in the sum")
    }

    /// `(i;j)`.
    pub fn ij(&self, i: i64, j: i64) -> u64 {
        let sum = lattice_sum(&self.projection(j), &self.lattice(i));
        let d = lattice_det_val(&sum).expect("sum has full rank");
        u64::try_from(self.det_t_lambda_1 - d).expect("sum contains tΛ_1")
    }

    /// Smallest `m >= p` with `π_+(Λ_m) ⊆ tΛ_1`.
    pub fn stabilization_index(&self) -> i64 {
        let target = self.lattice(self.flag.n() as i64 + 1);
        let mut m = self.flag.p() as i64;
        while !lattice_contained(&self.projection(m), &target) {
            m += 1;
        }
        m
    }

    /// Smallest `j >= i` with `π_+(Λ_j) ⊆ Λ_i`, i.e. with `(i;j) = n+1-i`.
    pub fn row_stabilization(&self, i: i64) -> i64 {
        let target = self.lattice(i);
        let mut j = i;
        while !lattice_contained(&self.projection(j), &target) {
            j += 1;
        }
        j
    }

    /// Full table with `(i;j)` for `j <= j_max`; defaults to `m + n`.
    pub fn table(&self, j_max: Option<i64>) -> InvariantTable {
        let n = self.flag.n();
        let m = self.stabilization_index();
        let j_max = j_max.unwrap_or(m + n as i64);
        let rows = 1..=(n as i64 + 1);
        let plus: Vec<u64> = rows.clone().map(|i| self.plus(i)).collect();
        let minus: Vec<u64> = rows.clone().map(|i| self.minus(i)).collect();
        let crossing: Vec<u64> = rows.clone().map(|i| self.crossing(i)).collect();
        let mut ij = BTreeMap::new();
        for i in rows {
            for j in i..=j_max {
                ij.insert((i as usize, j as usize), self.ij(i, j));
            }
        }
        InvariantTable { p: self.flag.p(), q: self.flag.q(), j_max, plus, minus, crossing, ij, m }
    }

    fn complement_generator(&self, i: i64) -> Option<Vec<FieldElem>> {
        let cap = intersect_coordinates(&self.lattice(i), &self.plus_coords());
        let next = self.lattice(i + 1);
        cap.generators().columns().into_iter().find(|v| !membership(v, &next))
    }

    fn random_complement(&self, i: i64, rng: &mut impl Rng) -> Option<Vec<FieldElem>> {
        let cap = intersect_coordinates(&self.lattice(i), &self.plus_coords());
        let next = self.lattice(i + 1);
        let gens = cap.generators().columns();
        if gens.is_empty() {
            return None;
        }
        let n = self.flag.n();
        for _ in 0..64 {
            let mut v = vec![FieldElem::zero(); n];
            for g in &gens {
                let terms: Vec<(i64, BaseScalar)> =
                    (0..3).map(|e| (e, BaseScalar::new(rng.gen_range(0..characteristic_i64())))).collect();
                let c = FieldElem::from_laurent_terms(&terms);
                for (x, y) in v.iter_mut().zip(g) {
                    *x = &*x + &(&c * y);
                }
            }
            if !membership(&v, &next) {
                return Some(v);
            }
        }
        None
    }

    /// The unique `j > i` with `v ∈ π_+(Λ_j) + Λ_{i+1}` and
    /// `v ∉ π_+(Λ_{j+1}) + Λ_{i+1}`, bounded by `i + 1 + N n`.
    fn bracket(&self, i: i64, v: &[FieldElem]) -> Option<i64> {
        let next = self.lattice(i + 1);
        let proj = self.projection(i + 1);
        let mut big_n = 0i64;
        while !lattice_contained(&proj.scaled(big_n), &next) {
            big_n += 1;
        }
        let bound = i + 1 + big_n * self.flag.n() as i64;
        (i + 1..=bound).find(|&j| !membership(v, &lattice_sum(&self.projection(j + 1), &next)))
    }

    /// Runs the flag-to-clan procedure; `choose` supplies the complement
    /// vector `v_+` when `(i;+) = (i;-) = 1`.
    fn extract(
        &self,
        mut choose: impl FnMut(&Self, i64) -> Option<Vec<FieldElem>>,
    ) -> Result<AffineClan, InvariantError> {
        let n = self.flag.n();
        let fail = |m: String| InvariantError::Extraction(m);
        let mut window: Vec<Option<ClanSymbol>> = vec![None; n];
        for i in 1..=n {
            if window[i - 1].is_some() {
                continue;
            }
            let ii = i as i64;
            match (self.plus(ii), self.minus(ii)) {
                (1, 0) => window[i - 1] = Some(ClanSymbol::Plus),
                (0, 1) => window[i - 1] = Some(ClanSymbol::Minus),
                // Closing position of a pair; filled when its partner is reached.
                (0, 0) => {}
                (1, 1) => {
                    let v = choose(self, ii).ok_or_else(|| fail(format!("no complement vector at step {i}")))?;
                    let j = self.bracket(ii, &v).ok_or_else(|| fail(format!("bracket search failed at step {i}")))?;
                    let partner = ((j - 1).rem_euclid(n as i64) + 1) as usize;
                    let shift = (j - 1).div_euclid(n as i64);
                    if partner == i {
                        return Err(fail(format!("step {i} pairs with its own translate")));
                    }
                    if window[partner - 1].is_some() {
                        return Err(fail(format!("step {i} pairs with the determined position {partner}")));
                    }
                    window[i - 1] = Some(ClanSymbol::Paired { partner, shift });
                    window[partner - 1] = Some(ClanSymbol::Paired { partner: i, shift: -shift });
                }
                (a, b) => return Err(fail(format!("invariants ({a},{b}) at step {i} out of range"))),
            }
        }
        let window = window
            .into_iter()
            .enumerate()
            .map(|(k, s)| s.ok_or_else(|| fail(format!("position {} left undetermined", k + 1))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(AffineClan::new(self.flag.p(), self.flag.q(), window)?)
    }

    /// Flag-to-clan with the first failing generator as `v_+`.
    pub fn to_clan(&self) -> Result<AffineClan, InvariantError> {
        self.extract(|s, i| s.complement_generator(i))
    }

    /// Flag-to-clan with a random `A`-combination as `v_+`.
    pub fn to_clan_with_random_choice(&self, rng: &mut impl Rng) -> Result<AffineClan, InvariantError> {
        self.extract(|s, i| s.random_complement(i, rng))
    }
}

fn characteristic_i64() -> i64 {
    crate::laurent::characteristic() as i64
}

/// All invariants of a flag, with `(i;j)` up to `j_max`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantTable {
    pub p: usize,
    pub q: usize,
    pub j_max: i64,
    /// `(i;+)` for `i = 1..=n+1`.
    pub plus: Vec<u64>,
    pub minus: Vec<u64>,
    /// `(i;N)` for `i = 1..=n+1`.
    pub crossing: Vec<u64>,
    /// `(i;j)` keyed by `(i, j)`, `1 <= i <= min(j, n+1)`.
    pub ij: BTreeMap<(usize, usize), u64>,
    /// Stabilization index.
    pub m: i64,
}

impl InvariantTable {
    pub fn n(&self) -> usize {
        self.p + self.q
    }

    /// Checks the structural identities every table must satisfy.
    pub fn check(&self) -> Result<(), String> {
        let n = self.n();
        if self.plus.iter().chain(&self.minus).any(|&x| x > 1) {
            return Err("(i;+) or (i;-) outside {0,1}".into());
        }
        for i in 0..n {
            let lhs = self.crossing[i] as i64 - self.crossing[i + 1] as i64;
            if lhs != 1 - self.plus[i] as i64 - self.minus[i] as i64 {
                return Err(format!("crossing numbers do not telescope at i={}", i + 1));
            }
        }
        if self.plus[n] != self.plus[0] || self.minus[n] != self.minus[0] || self.crossing[n] != self.crossing[0] {
            return Err("rows are not periodic".into());
        }
        if self.plus[..n].iter().sum::<u64>() != self.p as u64 || self.minus[..n].iter().sum::<u64>() != self.q as u64 {
            return Err("block sums differ from (p,q)".into());
        }
        for (&(i, j), &v) in &self.ij {
            if i == j && v != (n + 1 - i) as u64 + self.crossing[i - 1] {
                return Err(format!("diagonal identity fails at i={i}"));
            }
            if j as i64 >= self.m && v != (n + 1 - i) as u64 {
                return Err(format!("({i};{j}) has not stabilized"));
            }
        }
        Ok(())
    }

    /// `(i;j)` restricted to `j <= j_max`, for comparing tables computed with
    /// different bounds.
    pub fn truncated(&self, j_max: i64) -> InvariantTable {
        let mut t = self.clone();
        t.ij.retain(|&(_, j), _| j as i64 <= j_max);
        t.j_max = j_max;
        t
    }

    pub fn to_json(&self) -> Value {
        let mut ij = Map::new();
        for (&(i, j), &v) in &self.ij {
            ij.insert(format!("({i},{j})"), json!(v));
        }
        json!({
            "plus": self.plus,
            "minus": self.minus,
            "N": self.crossing,
            "ij": ij,
            "m": self.m,
        })
    }

    /// Aligned text layout; `(i;j)` rows leave `.` where `j < i`.
    pub fn to_text(&self) -> String {
        let n = self.n();
        let width = self
            .ij
            .values()
            .map(|v| v.to_string().len())
            .chain([self.j_max.to_string().len(), (n + 1).to_string().len()])
            .max()
            .unwrap_or(1);
        let mut out = String::new();
        writeln!(out, "p={} q={} n={} m={} jmax={}", self.p, self.q, n, self.m, self.j_max).unwrap();
        let row = |out: &mut String, label: &str, cells: Vec<String>| {
            write!(out, "{label:<6}").unwrap();
            for c in cells {
                write!(out, " {c:>width$}").unwrap();
            }
            out.push('\n');
        };
        row(&mut out, "i", (1..=n + 1).map(|i| i.to_string()).collect());
        row(&mut out, "(i;+)", self.plus.iter().map(u64::to_string).collect());
        row(&mut out, "(i;-)", self.minus.iter().map(u64::to_string).collect());
        row(&mut out, "(i;N)", self.crossing.iter().map(u64::to_string).collect());
        out.push('\n');
        row(&mut out, "j", (1..=self.j_max).map(|j| j.to_string()).collect());
        for i in 1..=n + 1 {
            let cells = (1..=self.j_max as usize)
                .map(|j| self.ij.get(&(i, j)).map_or(".".to_string(), u64::to_string))
                .collect();
            row(&mut out, &format!("({i};j)"), cells);
        }
        out
    }
}

pub fn inv_plus(flag: &AffineFlag, i: i64) -> u64 {
    FlagInvariants::new(flag).plus(i)
}

pub fn inv_minus(flag: &AffineFlag, i: i64) -> u64 {
    FlagInvariants::new(flag).minus(i)
}

/// `(i;N)`; both formulas are evaluated and must agree.
pub fn inv_n(flag: &AffineFlag, i: i64) -> u64 {
    let f = FlagInvariants::new(flag);
    let a = f.crossing(i);
    assert_eq!(a, f.crossing_by_projection(i), "the two formulas for (i;N) disagree");
    a
}

pub fn inv_ij(flag: &AffineFlag, i: i64, j: i64) -> u64 {
    FlagInvariants::new(flag).ij(i, j)
}

pub fn stabilization_index(flag: &AffineFlag) -> i64 {
    FlagInvariants::new(flag).stabilization_index()
}

pub fn invariant_table(flag: &AffineFlag, j_max: Option<i64>) -> InvariantTable {
    FlagInvariants::new(flag).table(j_max)
}

pub fn flag_to_clan(flag: &AffineFlag) -> Result<AffineClan, InvariantError> {
    FlagInvariants::new(flag).to_clan()
}
