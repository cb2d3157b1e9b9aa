//! Simple continued fractions with an eventually periodic tail.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{domain, Error, Result};
use crate::exact::QuadraticIrrational;

/// `[a0; a1, …, (p1, …, pk)]`: head `a0, a1, …` followed by a repeating period.
///
/// Values are always canonical: finite expansions end with a quotient `≥ 2`
/// (unless they are a single integer), periods are primitive words, and the
/// head is as short as possible while still containing `a0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ContinuedFraction {
    head: Vec<BigInt>,
    period: Vec<BigInt>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Convergent {
    pub p: BigInt,
    pub q: BigInt,
    pub index: usize,
}

/// Integer Möbius map `x ↦ (a x + b)/(c x + d)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mobius {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub d: BigInt,
}

impl Mobius {
    pub fn identity() -> Self {
        Self {
            a: BigInt::one(),
            b: BigInt::zero(),
            c: BigInt::zero(),
            d: BigInt::one(),
        }
    }

    /// The map `t ↦ [q0; q1, …, qk, t]`, i.e. the convergent matrix
    /// `[[p_k, p_{k-1}], [q_k, q_{k-1}]]`.
    pub fn from_quotients<'a>(quotients: impl IntoIterator<Item = &'a BigInt>) -> Self {
        let mut m = Self::identity();
        for q in quotients {
            // right-multiply by [[q, 1], [1, 0]]
            let a = &m.a * q + &m.b;
            let c = &m.c * q + &m.d;
            m = Self {
                a,
                b: m.a,
                c,
                d: m.c,
            };
        }
        m
    }

    pub fn det(&self) -> BigInt {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn compose(&self, inner: &Self) -> Self {
        Self {
            a: &self.a * &inner.a + &self.b * &inner.c,
            b: &self.a * &inner.b + &self.b * &inner.d,
            c: &self.c * &inner.a + &self.d * &inner.c,
            d: &self.c * &inner.b + &self.d * &inner.d,
        }
    }

    /// Inverse of a unimodular map (`det = ±1`).
    pub fn unimodular_inverse(&self) -> Option<Self> {
        let det = self.det();
        if !det.abs().is_one() {
            return None;
        }
        Some(Self {
            a: &self.d * &det,
            b: -&self.b * &det,
            c: -&self.c * &det,
            d: &self.a * &det,
        })
    }

    pub fn apply(&self, x: &QuadraticIrrational) -> Result<QuadraticIrrational> {
        let num = &(x * &QuadraticIrrational::from_integer(self.a.clone()))
            + &QuadraticIrrational::from_integer(self.b.clone());
        let den = &(x * &QuadraticIrrational::from_integer(self.c.clone()))
            + &QuadraticIrrational::from_integer(self.d.clone());
        num.checked_div(&den)
    }

    /// Image of the point at infinity, `a/c`.
    pub fn apply_infinity(&self) -> Result<QuadraticIrrational> {
        if self.c.is_zero() {
            return domain("map sends infinity to infinity");
        }
        Ok(QuadraticIrrational::from_ratio(
            self.a.clone(),
            self.c.clone(),
        ))
    }
}

impl ContinuedFraction {
    pub fn new(head: Vec<BigInt>, period: Vec<BigInt>) -> Result<Self> {
        if head.is_empty() {
            return domain("continued fraction needs a leading integer a0");
        }
        if head[1..].iter().chain(&period).any(|q| !q.is_positive()) {
            return domain("partial quotients after a0 must be positive");
        }
        Ok(Self::canonical(head, period))
    }

    pub fn finite(quotients: Vec<BigInt>) -> Result<Self> {
        Self::new(quotients, Vec::new())
    }

    /// Convenience constructor from machine integers.
    pub fn from_i64(head: &[i64], period: &[i64]) -> Result<Self> {
        Self::new(
            head.iter().copied().map(BigInt::from).collect(),
            period.iter().copied().map(BigInt::from).collect(),
        )
    }

    fn canonical(mut head: Vec<BigInt>, mut period: Vec<BigInt>) -> Self {
        if period.is_empty() {
            while head.len() >= 2 && head.last().is_some_and(|q| q.is_one()) {
                head.pop();
                *head.last_mut().expect("len >= 1") += 1;
            }
            return Self { head, period };
        }
        let primitive = primitive_root_len(&period);
        period.truncate(primitive);
        while head.len() > 1 && head.last() == period.last() {
            head.pop();
            period.rotate_right(1);
        }
        Self { head, period }
    }

    pub fn head(&self) -> &[BigInt] {
        &self.head
    }

    pub fn period(&self) -> &[BigInt] {
        &self.period
    }

    pub fn is_periodic(&self) -> bool {
        !self.period.is_empty()
    }

    /// Partial quotient `a_i`, or `None` past the end of a finite expansion.
    pub fn quotient(&self, i: usize) -> Option<&BigInt> {
        if i < self.head.len() {
            return Some(&self.head[i]);
        }
        if self.period.is_empty() {
            return None;
        }
        Some(&self.period[(i - self.head.len()) % self.period.len()])
    }

    /// All partial quotients; infinite for periodic expansions.
    pub fn quotients(&self) -> impl Iterator<Item = &BigInt> + '_ {
        self.head.iter().chain(self.period.iter().cycle())
    }

    /// Expansion of an exact real quadratic irrational (or rational).
    pub fn expand(x: &QuadraticIrrational) -> Self {
        Self::expand_traced(x).0
    }

    /// As [`expand`](Self::expand), also returning the number of
    /// complete-quotient states visited before the first repeat.
    pub fn expand_traced(x: &QuadraticIrrational) -> (Self, usize) {
        if x.is_rational() {
            let quotients = euclid_quotients(x.a().clone(), x.c().clone());
            let n = quotients.len();
            return (Self::canonical(quotients, Vec::new()), n);
        }
        // x = (p + √disc)/q with q | disc − p²
        let (mut p, mut q) = if x.b().is_positive() {
            (x.a().clone(), x.c().clone())
        } else {
            (-x.a(), -x.c())
        };
        let mut disc = x.b() * x.b() * x.d();
        if !(&disc - &p * &p).is_multiple_of(&q) {
            let scale = q.abs();
            p *= &scale;
            disc *= &q * &q;
            q *= &scale;
        }
        let root = disc.sqrt();
        let mut seen: HashMap<(BigInt, BigInt), usize> = HashMap::new();
        let mut quotients: Vec<BigInt> = Vec::new();
        loop {
            if let Some(&start) = seen.get(&(p.clone(), q.clone())) {
                let steps = quotients.len();
                let (head, period) = if start == 0 {
                    let mut period = quotients[1..].to_vec();
                    period.push(quotients[0].clone());
                    (vec![quotients[0].clone()], period)
                } else {
                    let period = quotients.split_off(start);
                    (quotients, period)
                };
                return (Self::canonical(head, period), steps);
            }
            seen.insert((p.clone(), q.clone()), quotients.len());
            let a = if q.is_positive() {
                (&p + &root).div_floor(&q)
            } else {
                -(&p + &root).div_floor(&-&q) - 1
            };
            let next_p = &a * &q - &p;
            let next_q = (&disc - &next_p * &next_p) / &q;
            quotients.push(a);
            p = next_p;
            q = next_q;
        }
    }

    /// Exact value; periodic tails are resolved by solving their fixed-point quadratic.
    pub fn value(&self) -> QuadraticIrrational {
        let head_map = Mobius::from_quotients(&self.head);
        if self.period.is_empty() {
            return head_map.apply_infinity().expect("head is nonempty");
        }
        let tail = periodic_value(&self.period);
        head_map
            .apply(&tail)
            .expect("tail > 1 keeps the denominator nonzero")
    }

    /// First `n` convergents (fewer if the expansion is finite and shorter).
    pub fn convergents(&self, n: usize) -> Vec<Convergent> {
        let (mut p_prev, mut p) = (BigInt::zero(), BigInt::one());
        let (mut q_prev, mut q) = (BigInt::one(), BigInt::zero());
        // (p, q) hold (p_{k-1}, q_{k-1}); (p_prev, q_prev) hold (p_{k-2}, q_{k-2})
        self.quotients()
            .take(n)
            .enumerate()
            .map(|(index, a)| {
                let next_p = a * &p + &p_prev;
                let next_q = a * &q + &q_prev;
                p_prev = std::mem::replace(&mut p, next_p);
                q_prev = std::mem::replace(&mut q, next_q);
                Convergent {
                    p: p.clone(),
                    q: q.clone(),
                    index,
                }
            })
            .collect()
    }

    /// Whether the two expansions eventually coincide (equivalence under
    /// unimodular Möbius maps). All rationals are equivalent to each other.
    pub fn serret_equivalent(&self, other: &Self) -> bool {
        match (self.is_periodic(), other.is_periodic()) {
            (false, false) => true,
            (true, true) => least_rotation(&self.period) == least_rotation(&other.period),
            _ => false,
        }
    }

    /// A unimodular map sending `self.value()` to `other.value()`, built from
    /// the two heads, when the expansions are equivalent.
    pub fn serret_map(&self, other: &Self) -> Option<Mobius> {
        if !self.serret_equivalent(other) {
            return None;
        }
        let mut from_self: Vec<BigInt> = self.head.clone();
        if self.is_periodic() {
            let len = self.period.len();
            let shift = (0..len)
                .find(|&r| (0..len).all(|i| self.period[(i + r) % len] == other.period[i]))?;
            from_self.extend(self.period[..shift].iter().cloned());
        }
        let to_self = Mobius::from_quotients(&from_self).unimodular_inverse()?;
        Some(Mobius::from_quotients(&other.head).compose(&to_self))
    }
}

/// Value of the purely periodic `[(p1, …, pk)]`, the root `> 1` of its fixed-point quadratic.
fn periodic_value(period: &[BigInt]) -> QuadraticIrrational {
    let m = Mobius::from_quotients(period);
    // t = (a t + b)/(c t + d)  ⇒  c t² + (d − a) t − b = 0
    let g = m.c.gcd(&m.b).gcd(&(&m.d - &m.a));
    let (lead, lin, constant) = (&m.c / &g, (&m.d - &m.a) / &g, &m.b / &g);
    let disc = &lin * &lin + BigInt::from(4) * &lead * &constant;
    QuadraticIrrational::new(-lin, 1, BigInt::from(2) * lead, disc)
        .expect("periodic tails have positive discriminant")
}

fn euclid_quotients(mut num: BigInt, mut den: BigInt) -> Vec<BigInt> {
    let mut out = Vec::new();
    loop {
        let (q, r) = num.div_mod_floor(&den);
        out.push(q);
        if r.is_zero() {
            return out;
        }
        num = std::mem::replace(&mut den, r);
    }
}

pub(crate) fn primitive_root_len<T: PartialEq>(word: &[T]) -> usize {
    let n = word.len();
    (1..=n)
        .find(|&k| n.is_multiple_of(k) && (k..n).all(|i| word[i] == word[i - k]))
        .unwrap_or(n)
}

pub(crate) fn least_rotation<T: Ord + Clone>(word: &[T]) -> Vec<T> {
    (0..word.len().max(1))
        .map(|r| {
            let mut w = word.to_vec();
            w.rotate_left(r.min(word.len()));
            w
        })
        .min()
        .unwrap_or_default()
}

/// `[prefix…, tail]` for a real `tail > 0`.
pub fn eval_with_tail(
    prefix: &[BigInt],
    tail: &QuadraticIrrational,
) -> Result<QuadraticIrrational> {
    if !tail.is_positive() {
        return domain("tail must be positive");
    }
    if prefix.iter().skip(1).any(|q| !q.is_positive()) {
        return domain("partial quotients after a0 must be positive");
    }
    Mobius::from_quotients(prefix).apply(tail)
}

impl Ord for ContinuedFraction {
    /// Alternating lexicographic order: at the first differing position `i`,
    /// a smaller quotient means a smaller value for even `i` and a larger value
    /// for odd `i`. An expansion that stops first is larger when it stops at an
    /// odd length-minus-one position, smaller otherwise.
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        let bound = self.head.len().max(other.head.len())
            + self.period.len().max(1) * other.period.len().max(1)
            + 1;
        for i in 0..=bound {
            let flip = |o: Ordering| if i % 2 == 0 { o } else { o.reverse() };
            match (self.quotient(i), other.quotient(i)) {
                (None, None) => return Ordering::Equal,
                // self = [a0..a_{i-1}] stops; other continues
                (None, Some(_)) => return flip(Ordering::Greater),
                (Some(_), None) => return flip(Ordering::Less),
                (Some(x), Some(y)) if x != y => return flip(x.cmp(y)),
                _ => {}
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for ContinuedFraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ContinuedFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}", self.head[0])?;
        let rest = &self.head[1..];
        if rest.is_empty() && self.period.is_empty() {
            return write!(f, "]");
        }
        write!(f, ";")?;
        let mut first = true;
        for q in rest {
            if !first {
                write!(f, ",")?;
            }
            first = false;
            write!(f, "{q}")?;
        }
        if !self.period.is_empty() {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "(")?;
            for (i, q) in self.period.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{q}")?;
            }
            write!(f, ")")?;
        }
        write!(f, "]")
    }
}

impl FromStr for ContinuedFraction {
    type Err = Error;

    /// Parses `[a0; a1,a2,(p1,p2,…)]`; whitespace is ignored.
    fn from_str(s: &str) -> Result<Self> {
        let err = |what: &str| Error::Parse(format!("{what} in continued fraction {s:?}"));
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let body = compact
            .strip_prefix('[')
            .and_then(|b| b.strip_suffix(']'))
            .ok_or_else(|| err("expected surrounding brackets"))?;
        let (a0, rest) = match body.split_once(';') {
            Some((a0, rest)) => (a0, rest),
            None => (body, ""),
        };
        let parse_int = |t: &str| -> Result<BigInt> {
            t.parse::<BigInt>()
                .map_err(|_| err(&format!("bad integer {t:?}")))
        };
        let mut head = vec![parse_int(a0)?];
        let mut period = Vec::new();
        let (plain, group) = match rest.find('(') {
            Some(open) => {
                let group = rest[open..]
                    .strip_prefix('(')
                    .and_then(|g| g.strip_suffix(')'))
                    .ok_or_else(|| err("period must be a final parenthesized group"))?;
                (&rest[..open], Some(group))
            }
            None => (rest, None),
        };
        let plain = plain.strip_suffix(',').unwrap_or(plain);
        if !plain.is_empty() {
            for t in plain.split(',') {
                head.push(parse_int(t)?);
            }
        } else if group.is_none() && body.contains(';') {
            return Err(err("missing quotients after ';'"));
        }
        if let Some(group) = group {
            if group.is_empty() || group.contains('(') || group.contains(')') {
                return Err(err("malformed period"));
            }
            for t in group.split(',') {
                period.push(parse_int(t)?);
            }
        }
        Self::new(head, period).map_err(|e| match e {
            Error::Domain(m) => err(&m),
            other => other,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cf(head: &[i64], period: &[i64]) -> ContinuedFraction {
        ContinuedFraction::from_i64(head, period).unwrap()
    }

    fn qi(a: i64, b: i64, c: i64, d: i64) -> QuadraticIrrational {
        QuadraticIrrational::new(a, b, c, d).unwrap()
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().copied().map(BigInt::from).collect()
    }

    #[test]
    fn expand_examples() {
        assert_eq!(ContinuedFraction::expand(&qi(-1, 1, 2, 5)), cf(&[0], &[1]));
        assert_eq!(ContinuedFraction::expand(&qi(-1, 1, 1, 2)), cf(&[0], &[2]));
        assert_eq!(
            ContinuedFraction::expand(&qi(-11, 1, 10, 221)),
            cf(&[0], &[2, 1, 1, 2])
        );
        // golden ratio is purely periodic from a0; head keeps a0
        assert_eq!(ContinuedFraction::expand(&qi(1, 1, 2, 5)), cf(&[1], &[1]));
        assert_eq!(
            ContinuedFraction::expand(&qi(0, -1, 1, 2)),
            cf(&[-2, 1, 1], &[2])
        );
        assert_eq!(
            ContinuedFraction::expand(&QuadraticIrrational::from_ratio(2, 5)),
            cf(&[0, 2, 2], &[])
        );
        assert_eq!(
            ContinuedFraction::expand(&QuadraticIrrational::from_ratio(-7, 2)),
            cf(&[-4, 2], &[])
        );
    }

    #[test]
    fn value_examples() {
        assert_eq!(cf(&[0], &[1]).value(), qi(-1, 1, 2, 5));
        assert_eq!(
            cf(&[0, 2, 1, 1], &[]).value(),
            QuadraticIrrational::from_ratio(2, 5)
        );
        assert_eq!(cf(&[0], &[2, 1, 1, 2]).value(), qi(-11, 1, 10, 221));
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(cf(&[0, 2, 1, 1], &[]), cf(&[0, 2, 2], &[]));
        assert_eq!(cf(&[0, 1], &[]), cf(&[1], &[]));
        assert_eq!(cf(&[0, 2], &[2, 2]), cf(&[0], &[2]));
        assert_eq!(cf(&[0, 1, 2], &[1, 2]), cf(&[0], &[1, 2]));
        assert_eq!(cf(&[0, 2, 1], &[1, 2, 1]), cf(&[0], &[2, 1, 1]));
        assert!(ContinuedFraction::from_i64(&[], &[1]).is_err());
        assert!(ContinuedFraction::from_i64(&[0, 0], &[1]).is_err());
    }

    #[test]
    fn convergent_examples() {
        let qs: Vec<i64> = cf(&[0], &[1])
            .convergents(5)
            .iter()
            .map(|c| c.q.clone().try_into().unwrap())
            .collect();
        assert_eq!(qs, vec![1, 1, 2, 3, 5]);
        let pq: Vec<(i64, i64)> = cf(&[0], &[2, 1, 1, 2])
            .convergents(4)
            .iter()
            .map(|c| {
                (
                    c.p.clone().try_into().unwrap(),
                    c.q.clone().try_into().unwrap(),
                )
            })
            .collect();
        assert_eq!(pq, vec![(0, 1), (1, 2), (1, 3), (2, 5)]);
        let c = cf(&[3], &[]).convergents(1);
        assert_eq!(
            (c[0].p.clone(), c[0].q.clone()),
            (BigInt::from(3), BigInt::one())
        );
        assert_eq!(cf(&[0, 2, 2], &[]).convergents(10).len(), 3);
    }

    #[test]
    fn compare_examples() {
        assert_eq!(cf(&[0], &[1]).cmp(&cf(&[0], &[2])), Ordering::Greater);
        assert_eq!(cf(&[0], &[1]).cmp(&cf(&[0], &[1])), Ordering::Equal);
        assert_eq!(
            cf(&[0, 2, 1], &[3]).cmp(&cf(&[0, 2, 2], &[3])),
            Ordering::Less
        );
        // [0;2] = 1/2 vs [0;2,3,…] < 1/2
        assert_eq!(cf(&[0, 2], &[]).cmp(&cf(&[0, 2], &[3])), Ordering::Greater);
        assert_eq!(cf(&[0], &[]).cmp(&cf(&[0], &[3])), Ordering::Less);
    }

    #[test]
    fn lagrange_identity_example() {
        let x = QuadraticIrrational::from_ratio(7, 3);
        let lhs = eval_with_tail(&ints(&[0, 2]), &x).unwrap();
        let rhs = eval_with_tail(&ints(&[0, 1, 1]), &x).unwrap();
        assert_eq!(&lhs + &rhs, QuadraticIrrational::one());
        let golden = qi(1, 1, 2, 5);
        assert_eq!(
            eval_with_tail(&ints(&[2]), &golden).unwrap(),
            &QuadraticIrrational::from_integer(2) + &golden.recip().unwrap()
        );
        assert!(eval_with_tail(&ints(&[0, 2]), &QuadraticIrrational::zero()).is_err());
    }

    #[test]
    fn fixed_point_of_alpha5() {
        let alpha = cf(&[0], &[2, 1, 1, 2]).value();
        let tail = alpha.recip().unwrap();
        let again = eval_with_tail(&ints(&[0, 2, 1, 1, 2]), &tail).unwrap();
        assert_eq!(again, alpha);
    }

    #[test]
    fn serret_examples() {
        let x = cf(&[0], &[2, 1, 1, 2]);
        let y = cf(&[1, 3], &[1, 2, 2, 1]);
        assert!(x.serret_equivalent(&y));
        assert!(!cf(&[0], &[1]).serret_equivalent(&cf(&[0], &[2])));
        assert!(x.serret_equivalent(&x));
        let m = x.serret_map(&y).unwrap();
        assert!(m.det().abs().is_one());
        assert_eq!(m.apply(&x.value()).unwrap(), y.value());
    }

    #[test]
    fn text_round_trip() {
        for s in [
            "[0;(2,1,1,2)]",
            "[0;2,(2,2,1,1)]",
            "[3]",
            "[0;2,2]",
            "[-2;(1,2)]",
        ] {
            let c: ContinuedFraction = s.parse().unwrap();
            assert_eq!(c.to_string(), s);
        }
        assert_eq!(
            "[ 0 ; 2 , ( 1 , 1 , 2 , 2 ) ]"
                .parse::<ContinuedFraction>()
                .unwrap(),
            cf(&[0, 2], &[1, 1, 2, 2])
        );
        for bad in [
            "0;1",
            "[0;(1),2]",
            "[0;()]",
            "[0;x]",
            "[0;0,1]",
            "[;1]",
            "[0;]",
        ] {
            assert!(bad.parse::<ContinuedFraction>().is_err(), "{bad}");
        }
    }

    fn arb_irrational() -> impl Strategy<Value = QuadraticIrrational> {
        (
            -40i64..40,
            prop_oneof![1i64..12, -12i64..-1],
            1i64..25,
            2i64..60,
        )
            .prop_filter_map("square radicand", |(a, b, c, d)| {
                let x = QuadraticIrrational::new(a, b, c, d).ok()?;
                (!x.is_rational()).then_some(x)
            })
    }

    proptest! {
        #[test]
        fn expand_value_round_trip(x in arb_irrational()) {
            let (c, steps) = ContinuedFraction::expand_traced(&x);
            prop_assert_eq!(c.value(), x.clone());
            let disc = x.b() * x.b() * x.d() * x.c() * x.c();
            prop_assert!(BigInt::from(steps) <= BigInt::from(10) * disc);
        }

        #[test]
        fn compare_matches_values(x in arb_irrational(), y in arb_irrational()) {
            let (cx, cy) = (ContinuedFraction::expand(&x), ContinuedFraction::expand(&y));
            prop_assert_eq!(cx.cmp(&cy), x.cmp(&y));
        }

        #[test]
        fn rational_round_trip(n in -500i64..500, d in 1i64..200) {
            let x = QuadraticIrrational::from_ratio(n, d);
            let c = ContinuedFraction::expand(&x);
            prop_assert_eq!(c.value(), x);
            prop_assert_eq!(c.to_string().parse::<ContinuedFraction>().unwrap(), c);
        }
    }
}
