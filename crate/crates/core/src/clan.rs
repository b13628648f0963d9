//! Affine (p,q)-clans.
//!
//! A clan is stored through its window `c_1..c_n` (n = p+q). Each position is
//! `+`, `-`, or paired with another window position together with a shift:
//! `Paired { partner: j, shift: k }` at position `i` means `c_i = c_{j+kn}`.
//! This representation is canonical for equivalence classes, so two clans are
//! equivalent exactly when they are structurally equal. Positions are 1-based.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClanError {
    #[error("window has length {got}, expected p+q = {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("#(+) - #(-) = {got}, expected p-q = {expected}")]
    SignBalance { expected: i64, got: i64 },
    #[error("label class {label} mod n does not appear exactly twice in the window")]
    BadPairing { label: i64 },
    #[error("position {0} is paired with a translate of itself")]
    SelfPairing(usize),
    #[error("inconsistent pairing at position {0}")]
    InconsistentPairing(usize),
    #[error("clan syntax: {0}")]
    Syntax(String),
    #[error("unsupported render format `{0}`")]
    UnsupportedFormat(String),
}

/// One window entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClanSymbol {
    Plus,
    Minus,
    /// `c_i = c_{partner + shift*n}`.
    Paired { partner: usize, shift: i64 },
}

/// A window entry in raw sequence notation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RawEntry {
    Plus,
    Minus,
    Int(i64),
}

impl fmt::Display for RawEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RawEntry::Plus => write!(f, "+"),
            RawEntry::Minus => write!(f, "-"),
            RawEntry::Int(v) => write!(f, "{v}"),
        }
    }
}

/// A value of the Z-indexed sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExtendedSymbol {
    Plus,
    Minus,
    Int(i64),
}

/// A pair of the Z-indexed sequence: positions `x < y` with `c_x = c_y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arc {
    pub x: i64,
    pub y: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffineClan {
    p: usize,
    q: usize,
    window: Vec<ClanSymbol>,
}

impl AffineClan {
    /// Validates a structured window.
    pub fn new(p: usize, q: usize, window: Vec<ClanSymbol>) -> Result<Self, ClanError> {
        let n = p + q;
        if window.len() != n {
            return Err(ClanError::LengthMismatch { expected: n, got: window.len() });
        }
        for (idx, s) in window.iter().enumerate() {
            let i = idx + 1;
            if let ClanSymbol::Paired { partner, shift } = *s {
                if partner == i {
                    return Err(ClanError::SelfPairing(i));
                }
                if partner == 0 || partner > n {
                    return Err(ClanError::InconsistentPairing(i));
                }
                if window[partner - 1] != (ClanSymbol::Paired { partner: i, shift: -shift }) {
                    return Err(ClanError::InconsistentPairing(i));
                }
            }
        }
        let plus = window.iter().filter(|s| **s == ClanSymbol::Plus).count() as i64;
        let minus = window.iter().filter(|s| **s == ClanSymbol::Minus).count() as i64;
        let expected = p as i64 - q as i64;
        if plus - minus != expected {
            return Err(ClanError::SignBalance { expected, got: plus - minus });
        }
        Ok(AffineClan { p, q, window })
    }

    /// Validates a window given in raw sequence notation.
    pub fn from_raw(p: usize, q: usize, raw: &[RawEntry]) -> Result<Self, ClanError> {
        let n = p + q;
        if raw.len() != n {
            return Err(ClanError::LengthMismatch { expected: n, got: raw.len() });
        }
        let mut classes: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for (idx, e) in raw.iter().enumerate() {
            if let RawEntry::Int(v) = e {
                classes.entry(v.rem_euclid(n as i64)).or_default().push(idx);
            }
        }
        let mut window: Vec<ClanSymbol> = raw
            .iter()
            .map(|e| match e {
                RawEntry::Minus => ClanSymbol::Minus,
                _ => ClanSymbol::Plus,
            })
            .collect();
        for (_, pos) in classes {
            let label = match raw[pos[0]] {
                RawEntry::Int(v) => v,
                _ => unreachable!(),
            };
            if pos.len() != 2 {
                return Err(ClanError::BadPairing { label });
            }
            let (i, j) = (pos[0], pos[1]);
            let (ci, cj) = match (raw[i], raw[j]) {
                (RawEntry::Int(a), RawEntry::Int(b)) => (a, b),
                _ => unreachable!(),
            };
            let k = (ci - cj) / n as i64;
            window[i] = ClanSymbol::Paired { partner: j + 1, shift: k };
            window[j] = ClanSymbol::Paired { partner: i + 1, shift: -k };
        }
        AffineClan::new(p, q, window)
    }

    /// Parses `(1,-,2,+,-4,13)`. Integer entries may be written as sums such
    /// as `1+8` or `3-8`.
    pub fn parse(p: usize, q: usize, text: &str) -> Result<Self, ClanError> {
        AffineClan::from_raw(p, q, &parse_raw(text)?)
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

    pub fn window(&self) -> &[ClanSymbol] {
        &self.window
    }

    /// Symbol at window position `i` (1-based).
    pub fn symbol(&self, i: usize) -> ClanSymbol {
        self.window[i - 1]
    }

    pub fn pair_count(&self) -> usize {
        self.window.iter().filter(|s| matches!(s, ClanSymbol::Paired { .. })).count() / 2
    }

    /// Window pairs as `(i, j, k)` with `i < j` and `c_i = c_{j+kn}`.
    pub fn window_pairs(&self) -> Vec<(usize, usize, i64)> {
        let mut out = Vec::new();
        for (idx, s) in self.window.iter().enumerate() {
            if let ClanSymbol::Paired { partner, shift } = *s {
                if idx + 1 < partner {
                    out.push((idx + 1, partner, shift));
                }
            }
        }
        out
    }

    /// One representative arc `x < y` per window pair; all arcs of the
    /// Z-indexed sequence are the translates `(x + rn, y + rn)`.
    pub fn arcs(&self) -> Vec<Arc> {
        let n = self.n() as i64;
        self.window_pairs()
            .into_iter()
            .map(|(i, j, k)| {
                let (a, b) = (i as i64, j as i64 + k * n);
                Arc { x: a.min(b), y: a.max(b) }
            })
            .collect()
    }

    /// Equivalence of clans. The structured window is canonical, so this is
    /// structural equality.
    pub fn is_equivalent(&self, other: &AffineClan) -> bool {
        self == other
    }

    /// Labels in standard numbering: window positions are visited left to
    /// right, each undetermined position receives one more than the largest
    /// earlier label lying in `[1, n]`, and its partner's label follows by
    /// periodicity.
    pub fn standard_numbering(&self) -> Vec<RawEntry> {
        let n = self.n() as i64;
        let mut labels: Vec<Option<i64>> = vec![None; self.n()];
        for idx in 0..self.n() {
            let ClanSymbol::Paired { partner, shift } = self.window[idx] else { continue };
            if labels[idx].is_some() {
                continue;
            }
            let label = 1 + labels[..idx].iter().flatten().filter(|&&v| (1..=n).contains(&v)).max().copied().unwrap_or(0);
            labels[idx] = Some(label);
            // c_partner = c_{partner + shift*n} - shift*n.
            labels[partner - 1] = Some(label - shift * n);
        }
        self.window
            .iter()
            .zip(labels)
            .map(|(s, l)| match s {
                ClanSymbol::Plus => RawEntry::Plus,
                ClanSymbol::Minus => RawEntry::Minus,
                ClanSymbol::Paired { .. } => RawEntry::Int(l.expect("paired positions are labelled")),
            })
            .collect()
    }

    /// The value `c_i` of the Z-indexed sequence, in standard numbering.
    pub fn symbol_at(&self, i: i64) -> ExtendedSymbol {
        let n = self.n() as i64;
        let r = (i - 1).rem_euclid(n);
        let k = (i - 1).div_euclid(n);
        match self.standard_numbering()[r as usize] {
            RawEntry::Plus => ExtendedSymbol::Plus,
            RawEntry::Minus => ExtendedSymbol::Minus,
            RawEntry::Int(v) => ExtendedSymbol::Int(v + k * n),
        }
    }

    /// Winding diagram as plain text or Graphviz `dot`.
    pub fn render_winding(&self, format: &str) -> Result<String, ClanError> {
        match format {
            "text" => Ok(self.render_text()),
            "dot" => Ok(self.render_dot()),
            other => Err(ClanError::UnsupportedFormat(other.to_string())),
        }
    }

    /// Direction and number of turns of the curve for a window pair `i < j`
    /// with `c_i = c_{j+kn}`.
    pub fn winding(k: i64) -> (&'static str, i64) {
        if k >= 0 {
            ("clockwise", k)
        } else {
            ("anticlockwise", -k - 1)
        }
    }

    fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "winding diagram p={} q={} n={}", self.p, self.q, self.n());
        let _ = writeln!(s, "clan {self}");
        let points: Vec<String> = self
            .window
            .iter()
            .enumerate()
            .map(|(idx, sym)| match sym {
                ClanSymbol::Plus => format!("{}:+", idx + 1),
                ClanSymbol::Minus => format!("{}:-", idx + 1),
                ClanSymbol::Paired { .. } => format!("{}", idx + 1),
            })
            .collect();
        let _ = writeln!(s, "points {}", points.join(" "));
        for (i, j, k) in self.window_pairs() {
            let (dir, turns) = AffineClan::winding(k);
            let _ = writeln!(s, "curve {i}-{j} {dir} {turns}");
        }
        s
    }

    fn render_dot(&self) -> String {
        let n = self.n();
        let mut s = String::new();
        let _ = writeln!(s, "graph winding {{");
        let _ = writeln!(s, "  label=\"{self}\";");
        let _ = writeln!(s, "  node [shape=circle, fixedsize=true, width=0.4];");
        for idx in 0..n {
            // Position 1 at the top, increasing clockwise.
            let angle = PI / 2.0 - 2.0 * PI * idx as f64 / n as f64;
            let (x, y) = (2.0 * angle.cos(), 2.0 * angle.sin());
            let label = match self.window[idx] {
                ClanSymbol::Plus => format!("{}\\n+", idx + 1),
                ClanSymbol::Minus => format!("{}\\n-", idx + 1),
                ClanSymbol::Paired { .. } => format!("{}", idx + 1),
            };
            let _ = writeln!(s, "  p{} [label=\"{}\", pos=\"{:.3},{:.3}!\"];", idx + 1, label, x + 0.0, y + 0.0);
        }
        for (i, j, k) in self.window_pairs() {
            let (dir, turns) = AffineClan::winding(k);
            let _ = writeln!(s, "  p{i} -- p{j} [label=\"{dir} {turns}\"];");
        }
        let _ = writeln!(s, "}}");
        s.replace("-0.000", "0.000")
    }
}

/// Standard numbering, e.g. `(1,-,2,+,-4,13)`.
impl fmt::Display for AffineClan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.standard_numbering().iter().map(|e| e.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Parses a raw window `(a,b,...)` without validating it.
pub fn parse_raw(text: &str) -> Result<Vec<RawEntry>, ClanError> {
    let t = text.trim();
    let inner = t
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| ClanError::Syntax("expected a parenthesized window".into()))?;
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner.split(',').map(|e| parse_entry(e.trim())).collect()
}

fn parse_entry(e: &str) -> Result<RawEntry, ClanError> {
    match e {
        "+" => return Ok(RawEntry::Plus),
        "-" | "\u{2212}" => return Ok(RawEntry::Minus),
        _ => {}
    }
    let e = e.replace('\u{2212}', "-");
    let bad = || ClanError::Syntax(format!("bad entry `{e}`"));
    // Sum of signed products of integers.
    let mut total = 0i64;
    let mut term = String::new();
    let mut sign = 1i64;
    let flush = |term: &str, sign: i64| -> Result<i64, ClanError> {
        let mut prod = 1i64;
        for f in term.split('*') {
            let f = f.trim();
            let v: i64 = f.parse().map_err(|_| bad())?;
            prod = prod.checked_mul(v).ok_or_else(bad)?;
        }
        Ok(sign * prod)
    };
    let chars: Vec<char> = e.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let after_op = term.trim().is_empty() || term.trim_end().ends_with('*');
        if (c == '+' || c == '-') && !after_op {
            total += flush(&term, sign)?;
            term.clear();
            sign = if c == '-' { -1 } else { 1 };
        } else {
            term.push(c);
        }
        i += 1;
    }
    total += flush(&term, sign)?;
    Ok(RawEntry::Int(total))
}

/// All clans with `|shift| <= depth`, ordered by (number of pairs, pair
/// positions, shifts, sign placement).
pub fn enumerate(p: usize, q: usize, depth: u32) -> Vec<AffineClan> {
    let n = p + q;
    let d = depth as i64;
    let mut out = Vec::new();
    for r in 0..=p.min(q) {
        let mut matchings = Vec::new();
        disjoint_pairs(n, r, 0, &mut Vec::new(), &mut vec![false; n], &mut matchings);
        for pairs in &matchings {
            let free: Vec<usize> = (0..n).filter(|i| !pairs.iter().any(|&(a, b)| a == *i || b == *i)).collect();
            let mut shifts = vec![-d; r];
            loop {
                for plus in combinations(free.len(), p - r) {
                    let mut window = vec![ClanSymbol::Minus; n];
                    for &k in &plus {
                        window[free[k]] = ClanSymbol::Plus;
                    }
                    for (&(a, b), &k) in pairs.iter().zip(&shifts) {
                        window[a] = ClanSymbol::Paired { partner: b + 1, shift: k };
                        window[b] = ClanSymbol::Paired { partner: a + 1, shift: -k };
                    }
                    out.push(AffineClan { p, q, window });
                }
                // Next shift vector in lexicographic order.
                let mut idx = r;
                loop {
                    if idx == 0 {
                        break;
                    }
                    idx -= 1;
                    if shifts[idx] < d {
                        shifts[idx] += 1;
                        for s in shifts.iter_mut().skip(idx + 1) {
                            *s = -d;
                        }
                        idx = usize::MAX;
                        break;
                    }
                }
                if idx != usize::MAX {
                    break;
                }
            }
        }
    }
    out
}

/// Sets of `r` disjoint pairs `(a, b)`, `a < b`, with increasing first
/// elements, in lexicographic order.
fn disjoint_pairs(
    n: usize,
    r: usize,
    start: usize,
    cur: &mut Vec<(usize, usize)>,
    used: &mut Vec<bool>,
    out: &mut Vec<Vec<(usize, usize)>>,
) {
    if cur.len() == r {
        out.push(cur.clone());
        return;
    }
    for a in start..n {
        if used[a] {
            continue;
        }
        for b in a + 1..n {
            if used[b] {
                continue;
            }
            used[a] = true;
            used[b] = true;
            cur.push((a, b));
            disjoint_pairs(n, r, a + 1, cur, used, out);
            cur.pop();
            used[a] = false;
            used[b] = false;
        }
    }
}

/// `k`-subsets of `0..m` in lexicographic order.
fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(m: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            go(m, k, i + 1, cur, out);
            cur.pop();
        }
    }
    if k <= m {
        go(m, k, 0, &mut cur, &mut out);
    }
    out
}

/// Closed-form count of [`enumerate`]`(p, q, depth)`.
pub fn enumeration_count(p: usize, q: usize, depth: u32) -> u64 {
    let n = p + q;
    let binom = |a: usize, b: usize| -> u64 {
        if b > a {
            return 0;
        }
        (0..b).fold(1u64, |acc, i| acc * (a - i) as u64 / (i as u64 + 1))
    };
    let double_fact = |r: usize| -> u64 { (0..r).map(|i| 2 * i as u64 + 1).product() };
    (0..=p.min(q))
        .map(|r| binom(n, 2 * r) * double_fact(r) * binom(n - 2 * r, p - r) * (2 * depth as u64 + 1).pow(r as u32))
        .sum()
}
