//! Exact arithmetic in `K = F_p` and in the rational function field `K(t)`.
//!
//! Elements of `K(t)` are stored as reduced fractions with a monic
//! denominator, so structural equality is field equality. The t-adic
//! valuation embeds `K(t)` in the Laurent series field `K((t))`; the
//! expansion itself is available through [`truncate_series`].
//!
//! The characteristic is a process-wide setting (default 101). It must be
//! chosen before any arithmetic is performed and left alone afterwards.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::atomic::{AtomicU32, Ordering};

use thiserror::Error;

/// Characteristic used when none is configured.
pub const DEFAULT_CHARACTERISTIC: u32 = 101;

/// Largest exponent accepted by the parser.
const MAX_PARSED_EXPONENT: i64 = 100_000;

static CHARACTERISTIC: AtomicU32 = AtomicU32::new(DEFAULT_CHARACTERISTIC);

/// Errors raised by field arithmetic and by the literal parser.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LaurentError {
    #[error("characteristic {0} is not an odd prime")]
    BadCharacteristic(u32),
    #[error("division by zero")]
    DivisionByZero,
    #[error("syntax error at position {pos}: {message}")]
    Syntax { pos: usize, message: String },
}

/// Current characteristic of the base field.
pub fn characteristic() -> u32 {
    CHARACTERISTIC.load(Ordering::Relaxed)
}

/// Sets the characteristic of the base field. Must be an odd prime.
pub fn set_characteristic(p: u32) -> Result<(), LaurentError> {
    if p < 3 || !is_prime(p) {
        return Err(LaurentError::BadCharacteristic(p));
    }
    CHARACTERISTIC.store(p, Ordering::Relaxed);
    Ok(())
}

/// Trial-division primality test, adequate for 32-bit inputs.
pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    if p % 2 == 0 {
        return p == 2;
    }
    let p = p as u64;
    let mut d = 3u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// An element of the prime field `F_p`, stored as its least nonnegative residue.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
#[repr(transparent)]
pub struct BaseScalar(u32);

impl BaseScalar {
    pub const ZERO: BaseScalar = BaseScalar(0);
    pub const ONE: BaseScalar = BaseScalar(1);

    /// Reduces an arbitrary integer modulo the characteristic.
    pub fn new(v: i64) -> Self {
        let p = characteristic() as i64;
        BaseScalar(v.rem_euclid(p) as u32)
    }

    pub fn value(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn add(self, o: Self) -> Self {
        let p = characteristic() as u64;
        BaseScalar(((self.0 as u64 + o.0 as u64) % p) as u32)
    }

    pub fn sub(self, o: Self) -> Self {
        let p = characteristic() as u64;
        BaseScalar(((self.0 as u64 + p - o.0 as u64) % p) as u32)
    }

    pub fn mul(self, o: Self) -> Self {
        let p = characteristic() as u64;
        BaseScalar(((self.0 as u64 * o.0 as u64) % p) as u32)
    }

    pub fn neg(self) -> Self {
        if self.0 == 0 {
            self
        } else {
            BaseScalar(characteristic() - self.0)
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(self) -> Option<Self> {
        if self.0 == 0 {
            return None;
        }
        let p = characteristic();
        Some(self.pow(p as u64 - 2))
    }

    pub fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = BaseScalar::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            e >>= 1;
        }
        acc
    }
}

impl fmt::Display for BaseScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A polynomial over `F_p`, coefficients indexed from degree 0 with no
/// trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<BaseScalar>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly { coeffs: vec![BaseScalar::ONE] }
    }

    pub fn constant(c: BaseScalar) -> Self {
        Poly::from_coeffs(vec![c])
    }

    /// `c * t^deg`.
    pub fn monomial(c: BaseScalar, deg: usize) -> Self {
        if c.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![BaseScalar::ZERO; deg + 1];
        coeffs[deg] = c;
        Poly { coeffs }
    }

    pub fn from_coeffs(mut coeffs: Vec<BaseScalar>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn coeffs(&self) -> &[BaseScalar] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BaseScalar {
        self.coeffs.get(i).copied().unwrap_or(BaseScalar::ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> BaseScalar {
        self.coeffs.last().copied().unwrap_or(BaseScalar::ZERO)
    }

    /// Lowest degree with a nonzero coefficient; `None` for zero.
    pub fn val(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// If the polynomial is exactly `t^k`, returns `k`.
    pub fn monomial_degree(&self) -> Option<usize> {
        let d = self.degree()?;
        if self.coeffs[d] == BaseScalar::ONE && self.coeffs[..d].iter().all(|c| c.is_zero()) {
            Some(d)
        } else {
            None
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i).add(o.coeff(i))).collect();
        Poly::from_coeffs(coeffs)
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i).sub(o.coeff(i))).collect();
        Poly::from_coeffs(coeffs)
    }

    pub fn neg(&self) -> Poly {
        Poly { coeffs: self.coeffs.iter().map(|c| c.neg()).collect() }
    }

    pub fn scale(&self, c: BaseScalar) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { coeffs: self.coeffs.iter().map(|x| x.mul(c)).collect() }
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let p = characteristic() as u64;
        let mut acc = vec![0u64; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                acc[i + j] = (acc[i + j] + a.0 as u64 * b.0 as u64) % p;
            }
        }
        Poly::from_coeffs(acc.into_iter().map(|v| BaseScalar(v as u32)).collect())
    }

    /// Multiplies by `t^k`.
    pub fn shift_up(&self, k: usize) -> Poly {
        if self.is_zero() || k == 0 {
            return self.clone();
        }
        let mut coeffs = vec![BaseScalar::ZERO; k];
        coeffs.extend_from_slice(&self.coeffs);
        Poly { coeffs }
    }

    /// Divides by `t^k`, dropping the low coefficients (exact when `k <= val`).
    pub fn shift_down(&self, k: usize) -> Poly {
        if k >= self.coeffs.len() {
            return Poly::zero();
        }
        Poly { coeffs: self.coeffs[k..].to_vec() }
    }

    /// Euclidean division. Panics on a zero divisor.
    pub fn divrem(&self, d: &Poly) -> (Poly, Poly) {
        let dd = d.degree().expect("polynomial division by zero");
        let inv = d.leading().inv().expect("nonzero leading coefficient");
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut q = vec![BaseScalar::ZERO; r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = r[k + dd].mul(inv);
            if c.is_zero() {
                continue;
            }
            q[k] = c;
            for (i, dc) in d.coeffs.iter().enumerate() {
                r[k + i] = r[k + i].sub(c.mul(*dc));
            }
        }
        (Poly::from_coeffs(q), Poly::from_coeffs(r))
    }

    /// Scales to leading coefficient 1, returning the removed leading coefficient.
    pub fn monic(&self) -> (BaseScalar, Poly) {
        let lead = self.leading();
        match lead.inv() {
            Some(inv) => (lead, self.scale(inv)),
            None => (BaseScalar::ZERO, Poly::zero()),
        }
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(a: &Poly, b: &Poly) -> Poly {
        let mut a = a.clone();
        let mut b = b.clone();
        while !b.is_zero() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r;
        }
        a.monic().1
    }
}

/// The t-adic valuation: an integer, or `Infinite` for zero.
///
/// The derived order places every finite value below `Infinite`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Val {
    Finite(i64),
    Infinite,
}

impl Val {
    pub fn finite(self) -> Option<i64> {
        match self {
            Val::Finite(v) => Some(v),
            Val::Infinite => None,
        }
    }
}

impl fmt::Display for Val {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Val::Finite(v) => write!(f, "{v}"),
            Val::Infinite => write!(f, "inf"),
        }
    }
}

/// An element of `K(t)` in canonical form: `gcd(num, den) = 1`, `den` monic.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldElem {
    num: Poly,
    den: Poly,
}

impl Default for FieldElem {
    fn default() -> Self {
        FieldElem::zero()
    }
}

impl FieldElem {
    pub fn zero() -> Self {
        FieldElem { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Self {
        FieldElem { num: Poly::one(), den: Poly::one() }
    }

    pub fn from_i64(v: i64) -> Self {
        FieldElem { num: Poly::constant(BaseScalar::new(v)), den: Poly::one() }
    }

    pub fn from_scalar(c: BaseScalar) -> Self {
        FieldElem { num: Poly::constant(c), den: Poly::one() }
    }

    /// `t^e` for any integer `e`.
    pub fn t_pow(e: i64) -> Self {
        FieldElem::monomial(BaseScalar::ONE, e)
    }

    /// `c * t^e`.
    pub fn monomial(c: BaseScalar, e: i64) -> Self {
        if c.is_zero() {
            return FieldElem::zero();
        }
        if e >= 0 {
            FieldElem { num: Poly::monomial(c, e as usize), den: Poly::one() }
        } else {
            FieldElem { num: Poly::constant(c), den: Poly::monomial(BaseScalar::ONE, (-e) as usize) }
        }
    }

    /// Builds `sum c_e t^e` from (exponent, coefficient) terms.
    pub fn from_laurent_terms(terms: &[(i64, BaseScalar)]) -> Self {
        let lo = terms.iter().map(|t| t.0).min().unwrap_or(0).min(0);
        let hi = terms.iter().map(|t| t.0).max().unwrap_or(0);
        let mut coeffs = vec![BaseScalar::ZERO; (hi - lo + 1) as usize];
        for &(e, c) in terms {
            let k = (e - lo) as usize;
            coeffs[k] = coeffs[k].add(c);
        }
        let num = Poly::from_coeffs(coeffs);
        let den = Poly::monomial(BaseScalar::ONE, (-lo) as usize);
        FieldElem::from_parts(num, den).expect("monomial denominator is nonzero")
    }

    /// Canonicalizes an arbitrary fraction.
    pub fn from_parts(num: Poly, den: Poly) -> Result<Self, LaurentError> {
        if den.is_zero() {
            return Err(LaurentError::DivisionByZero);
        }
        Ok(Self::canonical(num, den))
    }

    fn canonical(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return FieldElem::zero();
        }
        // Powers of t are cancelled cheaply; the full gcd is needed only when
        // the denominator has a factor other than t.
        let k = num.val().unwrap_or(0).min(den.val().unwrap_or(0));
        let (mut num, mut den) = (num.shift_down(k), den.shift_down(k));
        if den.monomial_degree().is_none() && den.degree() != Some(0) {
            let g = Poly::gcd(&num, &den);
            if g.degree() != Some(0) {
                num = num.divrem(&g).0;
                den = den.divrem(&g).0;
            }
        }
        let (lead, den) = den.monic();
        let num = num.scale(lead.inv().expect("nonzero denominator"));
        FieldElem { num, den }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num == Poly::one() && self.den == Poly::one()
    }

    /// t-adic valuation `val(num) - val(den)`.
    pub fn val(&self) -> Val {
        match self.num.val() {
            None => Val::Infinite,
            Some(vn) => Val::Finite(vn as i64 - self.den.val().unwrap_or(0) as i64),
        }
    }

    /// True when the element lies in the valuation ring `A`.
    pub fn is_integral(&self) -> bool {
        self.val() >= Val::Finite(0)
    }

    /// True when the element is a unit of `A` (valuation exactly zero).
    pub fn is_unit(&self) -> bool {
        self.val() == Val::Finite(0)
    }

    /// If the element is a Laurent polynomial, its (exponent, coefficient)
    /// terms in increasing exponent order.
    pub fn laurent_terms(&self) -> Option<Vec<(i64, BaseScalar)>> {
        let shift = self.den.monomial_degree()? as i64;
        Some(
            self.num
                .coeffs()
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (i as i64 - shift, *c))
                .collect(),
        )
    }

    /// If the element is `t^e` exactly, returns `e`.
    pub fn as_t_power(&self) -> Option<i64> {
        let terms = self.laurent_terms()?;
        match terms.as_slice() {
            [(e, c)] if *c == BaseScalar::ONE => Some(*e),
            _ => None,
        }
    }

    pub fn inv(&self) -> Result<Self, LaurentError> {
        if self.is_zero() {
            return Err(LaurentError::DivisionByZero);
        }
        Ok(Self::canonical(self.den.clone(), self.num.clone()))
    }

    pub fn checked_div(&self, o: &FieldElem) -> Result<Self, LaurentError> {
        Ok(self * &o.inv()?)
    }

    /// Multiplies by `t^e`.
    pub fn shift(&self, e: i64) -> Self {
        if self.is_zero() || e == 0 {
            return self.clone();
        }
        if e > 0 {
            Self::canonical(self.num.shift_up(e as usize), self.den.clone())
        } else {
            Self::canonical(self.num.clone(), self.den.shift_up((-e) as usize))
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = FieldElem::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    fn add_ref(&self, o: &FieldElem) -> FieldElem {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            return Self::canonical(self.num.add(&o.num), self.den.clone());
        }
        let num = self.num.mul(&o.den).add(&o.num.mul(&self.den));
        Self::canonical(num, self.den.mul(&o.den))
    }

    fn mul_ref(&self, o: &FieldElem) -> FieldElem {
        if self.is_zero() || o.is_zero() {
            return FieldElem::zero();
        }
        Self::canonical(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    fn neg_ref(&self) -> FieldElem {
        FieldElem { num: self.num.neg(), den: self.den.clone() }
    }
}

impl Add<&FieldElem> for &FieldElem {
    type Output = FieldElem;
    fn add(self, o: &FieldElem) -> FieldElem {
        self.add_ref(o)
    }
}

impl Sub<&FieldElem> for &FieldElem {
    type Output = FieldElem;
    fn sub(self, o: &FieldElem) -> FieldElem {
        self.add_ref(&o.neg_ref())
    }
}

impl Mul<&FieldElem> for &FieldElem {
    type Output = FieldElem;
    fn mul(self, o: &FieldElem) -> FieldElem {
        self.mul_ref(o)
    }
}

/// Panics on division by zero; use [`FieldElem::checked_div`] to handle it.
impl Div<&FieldElem> for &FieldElem {
    type Output = FieldElem;
    fn div(self, o: &FieldElem) -> FieldElem {
        self.checked_div(o).expect("division by zero in K(t)")
    }
}

impl Neg for &FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        self.neg_ref()
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<FieldElem> for FieldElem {
            type Output = FieldElem;
            fn $m(self, o: FieldElem) -> FieldElem {
                (&self).$m(&o)
            }
        }
        impl $tr<&FieldElem> for FieldElem {
            type Output = FieldElem;
            fn $m(self, o: &FieldElem) -> FieldElem {
                (&self).$m(o)
            }
        }
        impl $tr<FieldElem> for &FieldElem {
            type Output = FieldElem;
            fn $m(self, o: FieldElem) -> FieldElem {
                self.$m(&o)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        self.neg_ref()
    }
}

fn write_laurent(f: &mut fmt::Formatter<'_>, terms: &[(i64, BaseScalar)]) -> fmt::Result {
    if terms.is_empty() {
        return write!(f, "0");
    }
    for (k, (e, c)) in terms.iter().enumerate() {
        if k > 0 {
            write!(f, " + ")?;
        }
        match (*e, c.value()) {
            (0, v) => write!(f, "{v}")?,
            (1, 1) => write!(f, "t")?,
            (1, v) => write!(f, "{v}*t")?,
            (e, 1) => write!(f, "t^{e}")?,
            (e, v) => write!(f, "{v}*t^{e}")?,
        }
    }
    Ok(())
}

fn poly_terms(p: &Poly) -> Vec<(i64, BaseScalar)> {
    p.coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| (i as i64, *c))
        .collect()
}

/// Laurent polynomials print as sums in increasing exponent order; other
/// elements print as `(num)/(den)`.
impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.laurent_terms() {
            Some(terms) => write_laurent(f, &terms),
            None => {
                write!(f, "(")?;
                write_laurent(f, &poly_terms(&self.num))?;
                write!(f, ")/(")?;
                write_laurent(f, &poly_terms(&self.den))?;
                write!(f, ")")
            }
        }
    }
}

impl std::str::FromStr for FieldElem {
    type Err = LaurentError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

/// Parses a literal such as `1 + 2*t^-1 + 5*t^3`.
///
/// Accepts sums and differences of terms `c`, `t`, `t^e`, `c*t^e`, plus
/// products, quotients and parentheses so that every printed value reparses.
pub fn parse(text: &str) -> Result<FieldElem, LaurentError> {
    let mut p = Parser { s: text.as_bytes(), pos: 0 };
    let v = p.sum()?;
    p.ws();
    if p.pos < p.s.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(v)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, message: &str) -> LaurentError {
        LaurentError::Syntax { pos: self.pos, message: message.to_string() }
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    fn sum(&mut self) -> Result<FieldElem, LaurentError> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -self.product()?
            }
            Some(b'+') => {
                self.pos += 1;
                self.product()?
            }
            _ => self.product()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc + self.product()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc - self.product()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn product(&mut self) -> Result<FieldElem, LaurentError> {
        let mut acc = self.atom()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc * self.atom()?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let d = self.atom()?;
                    acc = acc.checked_div(&d).map_err(|_| LaurentError::Syntax {
                        pos: at,
                        message: "division by zero".into(),
                    })?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn atom(&mut self) -> Result<FieldElem, LaurentError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.sum()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(b't') => {
                self.pos += 1;
                if self.peek() == Some(b'^') {
                    self.pos += 1;
                    let e = self.exponent()?;
                    Ok(FieldElem::t_pow(e))
                } else {
                    Ok(FieldElem::t_pow(1))
                }
            }
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.atom()?)
            }
            Some(c) if c.is_ascii_digit() => Ok(FieldElem::from_scalar(self.coefficient())),
            Some(_) => Err(self.err("expected a coefficient, 't' or '('")),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn coefficient(&mut self) -> BaseScalar {
        let p = characteristic() as u64;
        let mut v = 0u64;
        while let Some(c) = self.s.get(self.pos).filter(|c| c.is_ascii_digit()) {
            v = (v * 10 + (c - b'0') as u64) % p;
            self.pos += 1;
        }
        BaseScalar(v as u32)
    }

    fn exponent(&mut self) -> Result<i64, LaurentError> {
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let e = self.exponent()?;
            if self.peek() != Some(b')') {
                return Err(self.err("expected ')'"));
            }
            self.pos += 1;
            return Ok(e);
        }
        let neg = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                true
            }
            Some(b'+') => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        self.ws();
        let start = self.pos;
        while self.s.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected an integer exponent"));
        }
        let digits = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii digits");
        let v: i64 = digits
            .parse()
            .ok()
            .filter(|v| *v <= MAX_PARSED_EXPONENT)
            .ok_or(LaurentError::Syntax { pos: start, message: "exponent too large".into() })?;
        Ok(if neg { -v } else { v })
    }
}

/// Coefficients of the expansion of `x` in `K((t))` for exponents
/// `val(x) <= e < abs_prec`, nonzero terms only.
pub fn truncate_series(x: &FieldElem, abs_prec: i64) -> Vec<(i64, BaseScalar)> {
    let Val::Finite(v) = x.val() else {
        return Vec::new();
    };
    if abs_prec <= v {
        return Vec::new();
    }
    let count = (abs_prec - v) as usize;
    let n0 = x.num.shift_down(x.num.val().unwrap_or(0));
    let d0 = x.den.shift_down(x.den.val().unwrap_or(0));
    let d0_inv = d0.coeff(0).inv().expect("reduced denominator has a unit part");
    let mut s: Vec<BaseScalar> = Vec::with_capacity(count);
    for k in 0..count {
        let mut acc = n0.coeff(k);
        for i in 1..=k.min(d0.coeffs().len().saturating_sub(1)) {
            acc = acc.sub(d0.coeff(i).mul(s[k - i]));
        }
        s.push(acc.mul(d0_inv));
    }
    s.into_iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| (v + k as i64, c))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fe(s: &str) -> FieldElem {
        parse(s).unwrap()
    }

    #[test]
    fn monomial_valuation() {
        assert_eq!(fe("t^-2").val(), Val::Finite(-2));
        assert_eq!(fe("0").val(), Val::Infinite);
        assert!(fe("0").is_zero());
    }

    #[test]
    fn inverse_of_one_plus_t() {
        let x = fe("1 + t").inv().unwrap();
        assert_eq!(x.num(), &Poly::one());
        assert_eq!(x.den(), fe("1 + t").num());
        assert_eq!(x.val(), Val::Finite(0));
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(fe("t^-2 + t").val(), Val::Finite(-2));
        assert_eq!(fe("1/(1+t)").val(), Val::Finite(0));
        let q = fe("t^-1 + 1") / fe("t");
        assert_eq!(q.val(), Val::Finite(-2));
    }

    #[test]
    fn field_identities() {
        assert!((fe("1+t") / fe("1+t")).is_one());
        for a in -4..5 {
            assert!((FieldElem::t_pow(a) * FieldElem::t_pow(-a)).is_one());
        }
        assert_eq!(fe("1").checked_div(&fe("0")), Err(LaurentError::DivisionByZero));
    }

    #[test]
    fn printing_is_canonical() {
        assert_eq!(fe("5*t^3 + 1 + 2*t^-1").to_string(), "2*t^-1 + 1 + 5*t^3");
        assert_eq!(fe("-1").to_string(), "100");
        assert_eq!(fe("t - t").to_string(), "0");
        assert_eq!(fe("203*t").to_string(), "t");
        assert_eq!(fe("1/(1-t)").to_string(), "(100)/(100 + t)");
        assert_eq!(fe(&fe("1/(1-t)").to_string()), fe("1/(1-t)"));
    }

    #[test]
    fn syntax_errors_report_position() {
        match parse("t^^2") {
            Err(LaurentError::Syntax { pos, .. }) => assert_eq!(pos, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse("1 +").is_err());
        assert!(parse("2t").is_err());
        assert!(parse("").is_err());
        assert!(parse("1/0").is_err());
    }

    #[test]
    fn series_expansion() {
        let one = BaseScalar::ONE;
        assert_eq!(truncate_series(&fe("1/(1-t)"), 3), vec![(0, one), (1, one), (2, one)]);
        assert_eq!(truncate_series(&fe("t^-1"), 1), vec![(-1, one)]);
        assert!(truncate_series(&fe("0"), 5).is_empty());
        // 1/(t + t^2) = t^-1 - 1 + t - ...
        let m1 = BaseScalar::new(-1);
        assert_eq!(truncate_series(&fe("1/(t+t^2)"), 2), vec![(-1, one), (0, m1), (1, one)]);
    }

    #[test]
    fn characteristic_validation() {
        assert!(is_prime(101));
        assert!(!is_prime(91));
        assert_eq!(set_characteristic(2), Err(LaurentError::BadCharacteristic(2)));
        assert_eq!(set_characteristic(15), Err(LaurentError::BadCharacteristic(15)));
        assert_eq!(characteristic(), DEFAULT_CHARACTERISTIC);
    }

    #[test]
    fn canonical_form_from_unreduced_parts() {
        let g = fe("3 + t").num().clone();
        let num = fe("2 + 7*t^2").num().mul(&g);
        let den = fe("5 + t^3").num().mul(&g).shift_up(2);
        let x = FieldElem::from_parts(num, den).unwrap();
        let y = FieldElem::from_parts(x.num().clone(), x.den().clone()).unwrap();
        assert_eq!(x, y);
        assert_eq!(x.den().leading(), BaseScalar::ONE);
        assert_eq!(Poly::gcd(x.num(), x.den()), Poly::one());
    }

    fn arb_elem() -> impl Strategy<Value = FieldElem> {
        let poly = proptest::collection::vec(0u32..101, 0..4);
        (poly.clone(), poly, -3i64..4).prop_map(|(n, d, s)| {
            let num = Poly::from_coeffs(n.into_iter().map(|c| BaseScalar::new(c as i64)).collect());
            let mut d: Vec<BaseScalar> = d.into_iter().map(|c| BaseScalar::new(c as i64)).collect();
            d.push(BaseScalar::ONE);
            FieldElem::from_parts(num, Poly::from_coeffs(d)).unwrap().shift(s)
        })
    }

    fn arb_laurent() -> impl Strategy<Value = FieldElem> {
        proptest::collection::vec((-5i64..=5, 0u32..101), 0..6).prop_map(|terms| {
            let terms: Vec<_> = terms.into_iter().map(|(e, c)| (e, BaseScalar::new(c as i64))).collect();
            FieldElem::from_laurent_terms(&terms)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn valuation_is_a_homomorphism(x in arb_elem(), y in arb_elem()) {
            let vx = x.val();
            let vy = y.val();
            match (vx, vy) {
                (Val::Finite(a), Val::Finite(b)) => prop_assert_eq!((&x * &y).val(), Val::Finite(a + b)),
                _ => prop_assert_eq!((&x * &y).val(), Val::Infinite),
            }
            let s = (&x + &y).val();
            prop_assert!(s >= vx.min(vy));
            if vx != vy {
                prop_assert_eq!(s, vx.min(vy));
            }
        }

        #[test]
        fn canonical_form_is_idempotent(x in arb_elem()) {
            let y = FieldElem::from_parts(x.num().clone(), x.den().clone()).unwrap();
            prop_assert_eq!(&x, &y);
        }

        #[test]
        fn parse_print_roundtrip(x in arb_laurent()) {
            prop_assert_eq!(parse(&x.to_string()).unwrap(), x);
        }

        #[test]
        fn rational_print_roundtrip(x in arb_elem()) {
            prop_assert_eq!(parse(&x.to_string()).unwrap(), x);
        }

        #[test]
        fn field_axioms(x in arb_elem(), y in arb_elem(), z in arb_elem()) {
            prop_assert_eq!(&(&x + &y) * &z, &(&x * &z) + &(&y * &z));
            prop_assert!((&(&x - &y) + &y) == x);
            if !y.is_zero() {
                prop_assert_eq!(&(&x / &y) * &y, x);
            }
        }

        #[test]
        fn series_matches_product(
            x in arb_elem().prop_filter("nonzero", |x| !x.is_zero()),
            y in arb_elem().prop_filter("nonzero", |y| !y.is_zero()),
        ) {
            // The expansion of x*y agrees with the Cauchy product of the expansions.
            let (vx, vy) = (x.val().finite().unwrap(), y.val().finite().unwrap());
            let prec = vx + vy + 6;
            let sx = truncate_series(&x, prec - vy);
            let sy = truncate_series(&y, prec - vx);
            let mut prod = std::collections::BTreeMap::<i64, BaseScalar>::new();
            for (e1, c1) in &sx {
                for (e2, c2) in &sy {
                    if e1 + e2 < prec {
                        let entry = prod.entry(e1 + e2).or_insert(BaseScalar::ZERO);
                        *entry = entry.add(c1.mul(*c2));
                    }
                }
            }
            let expected: Vec<_> = prod.into_iter().filter(|(_, c)| !c.is_zero()).collect();
            prop_assert_eq!(truncate_series(&(&x * &y), prec), expected);
        }
    }
}
