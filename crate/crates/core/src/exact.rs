//! Exact real quadratic irrationals `(a + b√d)/c` over arbitrary-precision integers.
//!
//! Every value is kept in canonical form: `c > 0`, `gcd(a, b, c) = 1`, and `d`
//! square-free with `d > 1` whenever `b ≠ 0`. Rationals are embedded with
//! `b = 0` and `d = 0`. Canonical form makes structural equality coincide with
//! numeric equality, so `Eq`/`Hash` are derived.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_prime::nt_funcs;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{domain, Error, Result};

pub type Rational = BigRational;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadraticIrrational {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    d: BigInt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl QuadraticIrrational {
    /// Builds the canonical representative of `(a + b√d)/c`.
    pub fn new(
        a: impl Into<BigInt>,
        b: impl Into<BigInt>,
        c: impl Into<BigInt>,
        d: impl Into<BigInt>,
    ) -> Result<Self> {
        let (a, b, c, d) = (a.into(), b.into(), c.into(), d.into());
        if c.is_zero() {
            return domain("denominator c must be nonzero");
        }
        if d.is_negative() {
            return domain("negative radicand (complex values are unsupported)");
        }
        if b.is_zero() || d.is_zero() {
            if !b.is_zero() {
                return domain("b != 0 requires d > 0");
            }
            return Ok(Self::from_ratio(a, c));
        }
        let (root, core) = square_split(&d);
        let b = b * root;
        if core.is_one() {
            return Ok(Self::from_ratio(a + b, c));
        }
        Ok(Self::reduce(a, b, c, core))
    }

    /// Assumes `d` is already square-free (or zero).
    fn reduce(mut a: BigInt, mut b: BigInt, mut c: BigInt, mut d: BigInt) -> Self {
        debug_assert!(!c.is_zero());
        if b.is_zero() || d.is_zero() {
            b = BigInt::zero();
            d = BigInt::zero();
        }
        if c.is_negative() {
            a = -a;
            b = -b;
            c = -c;
        }
        let g = a.gcd(&b).gcd(&c);
        if !g.is_one() {
            a /= &g;
            b /= &g;
            c /= &g;
        }
        Self { a, b, c, d }
    }

    pub fn from_ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Self {
        let den = den.into();
        assert!(!den.is_zero(), "zero denominator");
        Self::reduce(num.into(), BigInt::zero(), den, BigInt::zero())
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Self::from_ratio(n, 1)
    }

    pub fn from_rational(r: &Rational) -> Self {
        Self::from_ratio(r.numer().clone(), r.denom().clone())
    }

    /// `√n` for a nonnegative integer `n`.
    pub fn sqrt(n: impl Into<BigInt>) -> Result<Self> {
        Self::new(0, 1, 1, n)
    }

    pub fn zero() -> Self {
        Self::from_integer(0)
    }

    pub fn one() -> Self {
        Self::from_integer(1)
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }

    pub fn b(&self) -> &BigInt {
        &self.b
    }

    pub fn c(&self) -> &BigInt {
        &self.c
    }

    /// Square-free radicand, or 0 for rational values.
    pub fn d(&self) -> &BigInt {
        &self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.is_rational() && self.c.is_one()
    }

    pub fn to_rational(&self) -> Option<Rational> {
        self.is_rational()
            .then(|| Rational::new(self.a.clone(), self.c.clone()))
    }

    pub fn to_integer(&self) -> Option<BigInt> {
        self.is_integer().then(|| self.a.clone())
    }

    /// The algebraic conjugate `(a − b√d)/c`.
    pub fn conjugate(&self) -> Self {
        Self {
            a: self.a.clone(),
            b: -&self.b,
            c: self.c.clone(),
            d: self.d.clone(),
        }
    }

    fn common_radicand(&self, other: &Self) -> Result<BigInt> {
        match (self.d.is_zero(), other.d.is_zero()) {
            (true, _) => Ok(other.d.clone()),
            (_, true) => Ok(self.d.clone()),
            _ if self.d == other.d => Ok(self.d.clone()),
            _ => domain(format!(
                "operands lie in different quadratic fields Q(sqrt({})) and Q(sqrt({}))",
                self.d, other.d
            )),
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        let d = self.common_radicand(other)?;
        Ok(Self::reduce(
            &self.a * &other.c + &other.a * &self.c,
            &self.b * &other.c + &other.b * &self.c,
            &self.c * &other.c,
            d,
        ))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&-other)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        let d = self.common_radicand(other)?;
        Ok(Self::reduce(
            &self.a * &other.a + &self.b * &other.b * &d,
            &self.a * &other.b + &self.b * &other.a,
            &self.c * &other.c,
            d,
        ))
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return domain("division by zero");
        }
        // c / (a + b√d) = c (a − b√d) / (a² − b² d)
        let norm = &self.a * &self.a - &self.b * &self.b * &self.d;
        Ok(Self::reduce(
            &self.c * &self.a,
            -(&self.c * &self.b),
            norm,
            self.d.clone(),
        ))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        self.common_radicand(other)?;
        self.checked_mul(&other.recip()?)
    }

    pub fn field(&self, other: &Self, op: FieldOp) -> Result<Self> {
        match op {
            FieldOp::Add => self.checked_add(other),
            FieldOp::Sub => self.checked_sub(other),
            FieldOp::Mul => self.checked_mul(other),
            FieldOp::Div => self.checked_div(other),
        }
    }

    pub fn signum(&self) -> Ordering {
        sign_of(&self.a, &self.b, &self.d)
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Greatest integer `≤ self`.
    pub fn floor(&self) -> BigInt {
        if self.b.is_zero() {
            return self.a.div_floor(&self.c);
        }
        // b√d lies strictly between consecutive integers since b²d is not a square.
        let s = (&self.b * &self.b * &self.d).sqrt();
        let n = if self.b.is_positive() {
            &self.a + s
        } else {
            &self.a - s - 1
        };
        n.div_floor(&self.c)
    }

    pub fn ceil(&self) -> BigInt {
        -(-self).floor()
    }

    /// `self − floor(self)`, in `[0, 1)`.
    pub fn fract(&self) -> Self {
        self - &Self::from_integer(self.floor())
    }

    /// Distance to the nearest integer, `‖x‖`.
    pub fn nearest_distance(&self) -> Self {
        let lo = self.fract();
        let hi = &Self::one() - &lo;
        if lo <= hi {
            lo
        } else {
            hi
        }
    }

    pub fn to_f64(&self) -> f64 {
        let root = self.d.to_f64().unwrap_or(f64::NAN).sqrt();
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        let c = self.c.to_f64().unwrap_or(f64::NAN);
        (a + b * root) / c
    }

    /// Decimal rendering truncated toward zero to `digits` fractional digits.
    /// Display only.
    pub fn to_decimal(&self, digits: usize) -> String {
        let scale = Self::from_integer(num_traits::pow(BigInt::from(10), digits));
        let negative = self.is_negative();
        let magnitude = &self.abs() * &scale;
        let scaled = magnitude.floor().to_string();
        let mut out = String::new();
        if negative && scaled.chars().any(|ch| ch != '0') {
            out.push('-');
        }
        if digits == 0 {
            out.push_str(&scaled);
            return out;
        }
        let padded = format!("{scaled:0>width$}", width = digits + 1);
        let (int_part, frac_part) = padded.split_at(padded.len() - digits);
        out.push_str(int_part);
        out.push('.');
        out.push_str(frac_part);
        out
    }
}

/// Sign of `a + b√d` for `d ≥ 0`.
pub(crate) fn sign_of(a: &BigInt, b: &BigInt, d: &BigInt) -> Ordering {
    let sa = sign_ord(a);
    let sb = if d.is_zero() {
        Ordering::Equal
    } else {
        sign_ord(b)
    };
    match (sa, sb) {
        (s, Ordering::Equal) => s,
        (Ordering::Equal, s) => s,
        (x, y) if x == y => x,
        _ => match (a * a).cmp(&(b * b * d)) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => Ordering::Equal,
        },
    }
}

/// Sign of `p + q√d1 + r√d2` for `d1, d2 ≥ 0`, by repeated squaring.
fn sign_of_three(p: &BigInt, q: &BigInt, d1: &BigInt, r: &BigInt, d2: &BigInt) -> Ordering {
    let q_term = sign_of(&BigInt::zero(), q, d1);
    let r_term = sign_of(&BigInt::zero(), r, d2);
    // sign of S = q√d1 + r√d2
    let s_sign = match (q_term, r_term) {
        (s, Ordering::Equal) => s,
        (Ordering::Equal, s) => s,
        (x, y) if x == y => x,
        _ => match (q * q * d1).cmp(&(r * r * d2)) {
            Ordering::Greater => q_term,
            Ordering::Less => r_term,
            Ordering::Equal => Ordering::Equal,
        },
    };
    let p_sign = sign_ord(p);
    match (p_sign, s_sign) {
        (s, Ordering::Equal) => s,
        (Ordering::Equal, s) => s,
        (x, y) if x == y => x,
        _ => {
            // compare S² = q²d1 + r²d2 + 2qr√(d1 d2) against p²
            let rational = q * q * d1 + r * r * d2 - p * p;
            let irr = BigInt::from(2) * q * r;
            match sign_of(&rational, &irr, &(d1 * d2)) {
                Ordering::Greater => s_sign,
                Ordering::Less => p_sign,
                Ordering::Equal => Ordering::Equal,
            }
        }
    }
}

fn sign_ord(x: &BigInt) -> Ordering {
    match x.sign() {
        Sign::Minus => Ordering::Less,
        Sign::NoSign => Ordering::Equal,
        Sign::Plus => Ordering::Greater,
    }
}

/// Splits `n > 0` as `root² · core` with `core` square-free.
pub(crate) fn square_split(n: &BigInt) -> (BigInt, BigInt) {
    debug_assert!(n.is_positive());
    let mut root = BigInt::one();
    let mut core = BigInt::one();
    let mut absorb = |p: BigInt, exp: usize| {
        root *= num_traits::pow(p.clone(), exp / 2);
        if exp % 2 == 1 {
            core *= p;
        }
    };
    if let Some(small) = n.to_u128() {
        for (p, exp) in nt_funcs::factorize128(small) {
            absorb(BigInt::from(p), exp);
        }
        return (root, core);
    }
    let (found, unfactored) = nt_funcs::factors(n.magnitude().clone(), None);
    for (p, exp) in found {
        absorb(BigInt::from(p), exp);
    }
    // Cofactors the factorizer gave up on are kept whole unless they are squares.
    for rest in unfactored.unwrap_or_default() {
        let rest = BigInt::from(rest);
        let s = rest.sqrt();
        if &s * &s == rest {
            root *= s;
        } else {
            core *= rest;
        }
    }
    (root, core)
}

impl Ord for QuadraticIrrational {
    fn cmp(&self, other: &Self) -> Ordering {
        // sign of (a1 + b1√d1)/c1 − (a2 + b2√d2)/c2, scaled by c1 c2 > 0
        let p = &self.a * &other.c - &other.a * &self.c;
        let q = &self.b * &other.c;
        let r = -(&other.b * &self.c);
        if self.d == other.d || self.d.is_zero() || other.d.is_zero() {
            let d = if self.d.is_zero() { &other.d } else { &self.d };
            return sign_of(&p, &(q + r), d);
        }
        sign_of_three(&p, &q, &self.d, &r, &other.d)
    }
}

impl PartialOrd for QuadraticIrrational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Neg for &QuadraticIrrational {
    type Output = QuadraticIrrational;
    fn neg(self) -> QuadraticIrrational {
        QuadraticIrrational {
            a: -&self.a,
            b: -&self.b,
            c: self.c.clone(),
            d: self.d.clone(),
        }
    }
}

impl Neg for QuadraticIrrational {
    type Output = QuadraticIrrational;
    fn neg(self) -> QuadraticIrrational {
        -&self
    }
}

// Operator forms panic on operands from different fields and on division by
// zero, like integer division does. Use the `checked_*` methods otherwise.
macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&QuadraticIrrational> for &QuadraticIrrational {
            type Output = QuadraticIrrational;
            fn $method(self, rhs: &QuadraticIrrational) -> QuadraticIrrational {
                match self.$checked(rhs) {
                    Ok(v) => v,
                    Err(e) => panic!("{e}"),
                }
            }
        }
        impl $trait<QuadraticIrrational> for QuadraticIrrational {
            type Output = QuadraticIrrational;
            fn $method(self, rhs: QuadraticIrrational) -> QuadraticIrrational {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&QuadraticIrrational> for QuadraticIrrational {
            type Output = QuadraticIrrational;
            fn $method(self, rhs: &QuadraticIrrational) -> QuadraticIrrational {
                (&self).$method(rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);
forward_binop!(Div, div, checked_div);

impl From<BigInt> for QuadraticIrrational {
    fn from(n: BigInt) -> Self {
        Self::from_integer(n)
    }
}

impl From<i64> for QuadraticIrrational {
    fn from(n: i64) -> Self {
        Self::from_integer(n)
    }
}

impl From<&Rational> for QuadraticIrrational {
    fn from(r: &Rational) -> Self {
        Self::from_rational(r)
    }
}

impl fmt::Display for QuadraticIrrational {
    /// `(a+b*sqrt(d))/c` for irrationals, `a/c` or `a` for rationals.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return if self.c.is_one() {
                write!(f, "{}", self.a)
            } else {
                write!(f, "{}/{}", self.a, self.c)
            };
        }
        let op = if self.b.is_negative() { '-' } else { '+' };
        write!(
            f,
            "({}{}{}*sqrt({}))/{}",
            self.a,
            op,
            self.b.abs(),
            self.d,
            self.c
        )
    }
}

impl FromStr for QuadraticIrrational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        QiParser::new(s).parse()
    }
}

struct QiParser<'a> {
    src: &'a str,
    chars: Vec<char>,
    pos: usize,
}

impl<'a> QiParser<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src,
            chars: src.chars().filter(|c| !c.is_whitespace()).collect(),
            pos: 0,
        }
    }

    fn err<T>(&self, what: &str) -> Result<T> {
        Err(Error::Parse(format!(
            "{what} at offset {} in quadratic irrational {:?}",
            self.pos, self.src
        )))
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        let n = w.chars().count();
        if self.chars.len() >= self.pos + n
            && self.chars[self.pos..self.pos + n]
                .iter()
                .copied()
                .eq(w.chars())
        {
            self.pos += n;
            true
        } else {
            false
        }
    }

    fn integer(&mut self) -> Result<BigInt> {
        let start = self.pos;
        let negative = self.eat('-');
        let digits_start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == digits_start {
            self.pos = start;
            return self.err("expected integer");
        }
        let text: String = self.chars[digits_start..self.pos].iter().collect();
        let value: BigInt = text.parse().expect("ascii digits");
        Ok(if negative { -value } else { value })
    }

    fn sqrt_call(&mut self) -> Result<BigInt> {
        if !self.eat_word("sqrt(") {
            return self.err("expected sqrt(");
        }
        let d = self.integer()?;
        if !self.eat(')') {
            return self.err("expected ')'");
        }
        Ok(d)
    }

    /// sum := [sign] atom ((+|-) atom)*, atom := int ['*' sqrt(int)] | sqrt(int)
    fn sum(&mut self) -> Result<(BigInt, BigInt, Option<BigInt>)> {
        let mut rational = BigInt::zero();
        let mut irr = BigInt::zero();
        let mut radicand: Option<BigInt> = None;
        let mut first = true;
        loop {
            let mut negative = false;
            if self.eat('+') {
            } else if self.eat('-') {
                negative = true;
            } else if !first {
                break;
            }
            first = false;
            let (coef, d) = if self.peek() == Some('s') {
                (BigInt::one(), Some(self.sqrt_call()?))
            } else {
                let n = self.integer()?;
                if self.eat('*') {
                    (n, Some(self.sqrt_call()?))
                } else {
                    (n, None)
                }
            };
            let coef = if negative { -coef } else { coef };
            match d {
                None => rational += coef,
                Some(d) => {
                    if let Some(prev) = &radicand {
                        if *prev != d {
                            return self.err("mixed radicands");
                        }
                    }
                    radicand = Some(d);
                    irr += coef;
                }
            }
        }
        Ok((rational, irr, radicand))
    }

    fn parse(mut self) -> Result<QuadraticIrrational> {
        if self.chars.is_empty() {
            return self.err("empty input");
        }
        let (a, b, d) = if self.eat('(') {
            let inner = self.sum()?;
            if !self.eat(')') {
                return self.err("expected ')'");
            }
            inner
        } else {
            self.sum()?
        };
        let c = if self.eat('/') {
            self.integer()?
        } else {
            BigInt::one()
        };
        if self.pos != self.chars.len() {
            return self.err("trailing input");
        }
        QuadraticIrrational::new(a, b, c, d.unwrap_or_else(BigInt::zero))
    }
}
