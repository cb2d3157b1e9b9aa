//! Markoff triples, the Markoff tree, Markoff forms and the continued
//! fraction expansions of their roots in terms of Frobenius coordinates.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::contfrac::{ContinuedFraction, Mobius};
use crate::error::{domain, Error, Result};
use crate::exact::QuadraticIrrational;

/// Largest bound accepted by [`brute_force_triples`].
pub const BRUTE_FORCE_LIMIT: u64 = 10_000;

/// A solution of `m² + m1² + m2² = 3·m·m1·m2` with `m ≥ m1 ≥ m2 ≥ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawTriple")]
pub struct MarkoffTriple {
    pub m: u64,
    pub m1: u64,
    pub m2: u64,
}

#[derive(Deserialize)]
struct RawTriple {
    m: u64,
    m1: u64,
    m2: u64,
}

impl TryFrom<RawTriple> for MarkoffTriple {
    type Error = Error;

    fn try_from(r: RawTriple) -> Result<Self> {
        MarkoffTriple::new(r.m, r.m1, r.m2)
    }
}

fn satisfies_equation(m: u64, m1: u64, m2: u64) -> bool {
    let (m, m1, m2) = (BigInt::from(m), BigInt::from(m1), BigInt::from(m2));
    &m * &m + &m1 * &m1 + &m2 * &m2 == BigInt::from(3) * &m * &m1 * &m2
}

impl MarkoffTriple {
    pub fn new(m: u64, m1: u64, m2: u64) -> Result<Self> {
        if m2 == 0 || m1 < m2 || m < m1 {
            return domain(format!("({m},{m1},{m2}) is not ordered m ≥ m1 ≥ m2 ≥ 1"));
        }
        if !satisfies_equation(m, m1, m2) {
            return domain(format!(
                "({m},{m1},{m2}) does not solve the Markoff equation"
            ));
        }
        if m.gcd(&m1) != 1 || m.gcd(&m2) != 1 || m1.gcd(&m2) != 1 {
            return domain(format!("({m},{m1},{m2}) is not pairwise coprime"));
        }
        Ok(Self { m, m1, m2 })
    }

    pub fn root() -> Self {
        Self { m: 1, m1: 1, m2: 1 }
    }

    fn sorted(mut xs: [u64; 3]) -> Self {
        xs.sort_unstable_by(|a, b| b.cmp(a));
        Self {
            m: xs[0],
            m1: xs[1],
            m2: xs[2],
        }
    }
}

impl fmt::Display for MarkoffTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.m, self.m1, self.m2)
    }
}

/// Children of `t` in the Markoff tree: the Vieta jumps that increase the
/// maximal element, sorted by `m`.
pub fn triple_children(t: &MarkoffTriple) -> Result<Vec<MarkoffTriple>> {
    let t = MarkoffTriple::new(t.m, t.m1, t.m2)?;
    let jump = |y: u64, z: u64, x: u64| -> Result<u64> {
        3u64.checked_mul(y)
            .and_then(|p| p.checked_mul(z))
            .map(|p| p - x)
            .ok_or_else(|| Error::ResourceLimit(format!("child of {t} overflows u64")))
    };
    let mut out = BTreeSet::new();
    for child in [
        [jump(t.m, t.m2, t.m1)?, t.m, t.m2],
        [jump(t.m, t.m1, t.m2)?, t.m, t.m1],
    ] {
        let c = MarkoffTriple::sorted(child);
        if c.m > t.m {
            out.insert(c);
        }
    }
    Ok(out.into_iter().collect())
}

/// All Markoff triples with `m ≤ bound`, found breadth-first from `(1,1,1)`.
pub fn enumerate_markoff(bound: u64) -> Result<Vec<MarkoffTriple>> {
    if bound == 0 {
        return domain("bound must be at least 1");
    }
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([MarkoffTriple::root()]);
    while let Some(t) = queue.pop_front() {
        if !seen.insert(t) {
            continue;
        }
        for c in triple_children(&t)? {
            if c.m <= bound {
                queue.push_back(c);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// Independent oracle: solve the Markoff equation for `m` over every pair
/// `m2 ≤ m1 ≤ bound`.
pub fn brute_force_triples(bound: u64) -> Result<Vec<MarkoffTriple>> {
    if bound == 0 {
        return domain("bound must be at least 1");
    }
    if bound > BRUTE_FORCE_LIMIT {
        return Err(Error::ResourceLimit(format!(
            "brute force is limited to bound ≤ {BRUTE_FORCE_LIMIT}"
        )));
    }
    let mut out = BTreeSet::new();
    for m1 in 1..=bound as u128 {
        for m2 in 1..=m1 {
            let s = 3 * m1 * m2;
            let rest = m1 * m1 + m2 * m2;
            let disc = s * s;
            if disc < 4 * rest {
                continue;
            }
            let disc = disc - 4 * rest;
            let r = disc.sqrt();
            if r * r != disc {
                continue;
            }
            for num in [s + r, s - r] {
                if num % 2 == 0 {
                    let m = num / 2;
                    if m >= m1 && m <= bound as u128 {
                        out.insert(MarkoffTriple {
                            m: m as u64,
                            m1: m1 as u64,
                            m2: m2 as u64,
                        });
                    }
                }
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// Distinct Markoff numbers up to `bound`, ascending.
pub fn markoff_numbers(bound: u64) -> Result<Vec<u64>> {
    let mut ms: Vec<u64> = enumerate_markoff(bound)?.iter().map(|t| t.m).collect();
    ms.dedup();
    Ok(ms)
}

/// Triples sharing a maximal element, grouped by that element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UniquenessScan {
    pub bound: u64,
    pub triples: usize,
    pub collisions: Vec<Vec<MarkoffTriple>>,
}

pub fn uniqueness_scan(bound: u64) -> Result<UniquenessScan> {
    let ts = enumerate_markoff(bound)?;
    let collisions = ts
        .chunk_by(|a, b| a.m == b.m)
        .filter(|g| g.len() > 1)
        .map(|g| g.to_vec())
        .collect();
    Ok(UniquenessScan {
        bound,
        triples: ts.len(),
        collisions,
    })
}

/// Looks up the triple with maximal element `m` among triples below `cap`.
pub fn triple_for(m: u64, cap: u64) -> Result<MarkoffTriple> {
    if m == 0 || m > cap {
        return domain(format!("{m} is not a Markoff number ≤ {cap}"));
    }
    let ts = enumerate_markoff(m)?;
    ts.into_iter()
        .rev()
        .find(|t| t.m == m)
        .ok_or_else(|| Error::Domain(format!("{m} is not a Markoff number")))
}

/// The Markoff form `m x² + (3m−2u) xy + (v−3u) y²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MarkoffForm {
    pub m: u64,
    pub u: u64,
    pub v: u64,
}

#[derive(Serialize, Deserialize)]
struct FormRecord {
    m: u64,
    u: u64,
    v: u64,
    #[serde(rename = "A", with = "crate::json")]
    a: BigInt,
    #[serde(rename = "B", with = "crate::json")]
    b: BigInt,
    #[serde(rename = "C", with = "crate::json")]
    c: BigInt,
    #[serde(with = "crate::json")]
    disc: BigInt,
}

impl Serialize for MarkoffForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (a, b, c) = self.coefficients();
        FormRecord {
            m: self.m,
            u: self.u,
            v: self.v,
            a,
            b,
            c,
            disc: self.discriminant(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MarkoffForm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = FormRecord::deserialize(d)?;
        let f = MarkoffForm {
            m: r.m,
            u: r.u,
            v: r.v,
        };
        if f.coefficients() != (r.a, r.b, r.c) || f.discriminant() != r.disc {
            return Err(serde::de::Error::custom(
                "coefficients do not match (m,u,v)",
            ));
        }
        Ok(f)
    }
}

impl MarkoffForm {
    /// `(A, B, C) = (m, 3m−2u, v−3u)`.
    pub fn coefficients(&self) -> (BigInt, BigInt, BigInt) {
        let (m, u, v) = (
            BigInt::from(self.m),
            BigInt::from(self.u),
            BigInt::from(self.v),
        );
        (m.clone(), 3 * &m - 2 * &u, v - 3 * u)
    }

    pub fn discriminant(&self) -> BigInt {
        let (a, b, c) = self.coefficients();
        &b * &b - 4 * a * c
    }

    pub fn eval(&self, x: &BigInt, y: &BigInt) -> BigInt {
        let (a, b, c) = self.coefficients();
        a * x * x + b * x * y + c * y * y
    }

    /// `f(x, 1)` at an exact point.
    pub fn eval_qi(&self, x: &QuadraticIrrational) -> Result<QuadraticIrrational> {
        let (a, b, c) = self.coefficients();
        let ax = QuadraticIrrational::from_integer(a).checked_mul(x)?;
        let inner = ax.checked_add(&QuadraticIrrational::from_integer(b))?;
        x.checked_mul(&inner)?
            .checked_add(&QuadraticIrrational::from_integer(c))
    }
}

/// Least positive `u` with `±m2·u ≡ m1 (mod m)`.
fn least_u(t: &MarkoffTriple) -> u64 {
    if t.m == 1 {
        return 1;
    }
    let m = t.m as i128;
    let inv = (t.m2 as i128).extended_gcd(&m).x.rem_euclid(m);
    let r = (t.m1 as i128 * inv).rem_euclid(m);
    let candidates = [r, (m - r) % m].map(|x| if x == 0 { m } else { x });
    candidates.into_iter().min().unwrap_or(m) as u64
}

pub fn markoff_form(t: &MarkoffTriple) -> Result<MarkoffForm> {
    let t = MarkoffTriple::new(t.m, t.m1, t.m2)?;
    let u = least_u(&t);
    let uu = u as u128 * u as u128 + 1;
    if !uu.is_multiple_of(t.m as u128) {
        return domain(format!("{} does not divide u²+1 for u={u}", t.m));
    }
    let v = u64::try_from(uu / t.m as u128)
        .map_err(|_| Error::ResourceLimit(format!("v for {t} overflows u64")))?;
    Ok(MarkoffForm { m: t.m, u, v })
}

/// Roots `α > 0 > β` of `f(x, 1) = 0`.
pub fn form_roots(f: &MarkoffForm) -> (QuadraticIrrational, QuadraticIrrational) {
    let (a, b, _) = f.coefficients();
    let disc = f.discriminant();
    let two_a: BigInt = 2 * a;
    let root = |sign: i32| {
        QuadraticIrrational::new(-b.clone(), BigInt::from(sign), two_a.clone(), disc.clone())
            .expect("Markoff discriminant is positive and non-square")
    };
    (root(1), root(-1))
}

/// Coprime pair indexing a Markoff number `m > 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawCoords")]
pub struct FrobeniusCoordinates {
    pub mu: u64,
    pub nu: u64,
}

#[derive(Deserialize)]
struct RawCoords {
    mu: u64,
    nu: u64,
}

impl TryFrom<RawCoords> for FrobeniusCoordinates {
    type Error = Error;

    fn try_from(r: RawCoords) -> Result<Self> {
        FrobeniusCoordinates::new(r.mu, r.nu)
    }
}

impl FrobeniusCoordinates {
    pub fn new(mu: u64, nu: u64) -> Result<Self> {
        if mu == 0 || nu == 0 || mu.gcd(&nu) != 1 {
            return domain(format!(
                "({mu},{nu}) is not a coprime pair of positive integers"
            ));
        }
        Ok(Self { mu, nu })
    }
}

impl fmt::Display for FrobeniusCoordinates {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.mu, self.nu)
    }
}

/// Run lengths `r(1..ν)` and the palindromic word `S(μ,ν)` of 1s and 2s.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrobeniusWord {
    pub runs: Vec<u64>,
    pub word: Vec<u64>,
}

pub fn frobenius_word(c: &FrobeniusCoordinates) -> Result<FrobeniusWord> {
    let c = FrobeniusCoordinates::new(c.mu, c.nu)?;
    let (mu, nu) = (c.mu as u128, c.nu as u128);
    let mut runs: Vec<u64> = (1..nu)
        .map(|i| ((i * mu) / nu - ((i - 1) * mu) / nu) as u64)
        .collect();
    runs.push((mu - ((nu - 1) * mu) / nu) as u64);

    let mut word = Vec::new();
    let (last, body) = runs.split_last().expect("ν ≥ 1");
    for &r in body {
        word.extend(std::iter::repeat_n(1, 2 * r as usize));
        word.extend([2, 2]);
    }
    word.extend(std::iter::repeat_n(1, 2 * *last as usize - 2));
    Ok(FrobeniusWord { runs, word })
}

fn big(xs: impl IntoIterator<Item = u64>) -> Vec<BigInt> {
    xs.into_iter().map(BigInt::from).collect()
}

/// `α_m = [0; (2, S, 1, 1, 2)]`.
pub fn alpha_expansion(c: &FrobeniusCoordinates) -> Result<ContinuedFraction> {
    let s = frobenius_word(c)?.word;
    let period = [vec![2], s, vec![1, 1, 2]].concat();
    ContinuedFraction::new(vec![BigInt::zero()], big(period))
}

/// `(−β_m − 2, β_m + 3) = ([0; (1, 1, S, 2, 2)], [0; 2, (S, 2, 2, 1, 1)])`.
pub fn beta_expansions(c: &FrobeniusCoordinates) -> Result<(ContinuedFraction, ContinuedFraction)> {
    let s = frobenius_word(c)?.word;
    let minus = [vec![1, 1], s.clone(), vec![2, 2]].concat();
    let plus = [s, vec![2, 2, 1, 1]].concat();
    Ok((
        ContinuedFraction::new(vec![BigInt::zero()], big(minus))?,
        ContinuedFraction::new(big([0, 2]), big(plus))?,
    ))
}

/// Value of a finite continued fraction `[a0, a1, …]`.
fn finite_value(quotients: &[u64]) -> Result<QuadraticIrrational> {
    Mobius::from_quotients(big(quotients.iter().copied()).iter()).apply_infinity()
}

/// The convergent identities `(v/u, u/m) = ([0,2,S], [0,2,S,2])`.
pub fn convergent_identities(
    c: &FrobeniusCoordinates,
) -> Result<(QuadraticIrrational, QuadraticIrrational)> {
    let s = frobenius_word(c)?.word;
    let vu = [vec![0, 2], s.clone()].concat();
    let um = [vec![0, 2], s, vec![2]].concat();
    Ok((finite_value(&vu)?, finite_value(&um)?))
}

fn coprime_pairs_by_sum(max_sum: u64) -> impl Iterator<Item = FrobeniusCoordinates> {
    (2..=max_sum)
        .flat_map(|s| (1..s).filter_map(move |mu| FrobeniusCoordinates::new(mu, s - mu).ok()))
}

/// Finds `(μ,ν)` with `[0,2,S(μ,ν),2] = u/m`, scanning coprime pairs by
/// increasing `μ+ν ≤ 2·log₂(m) + 16`.
pub fn coordinates_for(f: &MarkoffForm) -> Result<FrobeniusCoordinates> {
    if f.m <= 2 {
        return domain(format!("m = {} has no Frobenius coordinates", f.m));
    }
    let target = QuadraticIrrational::from_ratio(f.u, f.m);
    let budget = 2 * (64 - f.m.leading_zeros() as u64) + 16;
    for c in coprime_pairs_by_sum(budget) {
        let s = frobenius_word(&c)?.word;
        // [0,2,S,2] has denominator at least the length of S
        if s.len() as u64 > 2 * f.m {
            continue;
        }
        let um = [vec![0, 2], s, vec![2]].concat();
        if finite_value(&um)? == target {
            return Ok(c);
        }
    }
    Err(Error::Inconclusive(format!(
        "no Frobenius coordinates for m = {} with μ+ν ≤ {budget}",
        f.m
    )))
}

/// Expansion of `α_m`, including the special cases `m = 1, 2`.
pub fn alpha_expansion_for(f: &MarkoffForm) -> Result<ContinuedFraction> {
    match f.m {
        1 => ContinuedFraction::from_i64(&[0], &[1]),
        2 => ContinuedFraction::from_i64(&[0], &[2]),
        _ => alpha_expansion(&coordinates_for(f)?),
    }
}

/// Expansion of `β_m + 3`, including the special cases `m = 1, 2`.
pub fn beta_plus3_expansion_for(f: &MarkoffForm) -> Result<ContinuedFraction> {
    match f.m {
        1 | 2 => {
            let (_, beta) = form_roots(f);
            Ok(ContinuedFraction::expand(&beta.checked_add(&3.into())?))
        }
        _ => Ok(beta_expansions(&coordinates_for(f)?)?.1),
    }
}

/// Least `|f(x,y)|` over `0 < max(|x|,|y|) ≤ bound`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FormMinimum {
    #[serde(with = "crate::json")]
    pub min_abs: BigInt,
    pub witness: (i64, i64),
}

/// Exhaustive scan; `(x,y)` and `(−x,−y)` give the same value so only the
/// half-plane `y > 0` or `y = 0, x > 0` is visited. Ties go to the smaller
/// sup-norm, then smaller `|y|`, then smaller `|x|`, then positive `x`.
pub fn form_minimum_estimate(f: &MarkoffForm, bound: u64) -> Result<FormMinimum> {
    if bound == 0 {
        return domain("search bound must be at least 1");
    }
    let bound =
        i64::try_from(bound).map_err(|_| Error::ResourceLimit("search bound too large".into()))?;
    let (min_abs, _, witness) = (0..=bound)
        .flat_map(|y| (if y == 0 { 1 } else { -bound }..=bound).map(move |x| (x, y)))
        .map(|(x, y)| {
            let val = f.eval(&x.into(), &y.into()).abs();
            (val, (x.abs().max(y), y, x.abs(), x < 0), (x, y))
        })
        .min_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)))
        .expect("bound ≥ 1 visits (1,0)");
    Ok(FormMinimum { min_abs, witness })
}

/// `μ(f)/√δ(f) = m/√(9m²−4)` for a Markoff form.
pub fn normalized_minimum(f: &MarkoffForm) -> Result<QuadraticIrrational> {
    let root = QuadraticIrrational::sqrt(f.discriminant())?;
    QuadraticIrrational::from_integer(f.m).checked_div(&root)
}

pub(crate) fn is_palindrome<T: PartialEq>(w: &[T]) -> bool {
    w.iter().eq(w.iter().rev())
}

impl FrobeniusWord {
    pub fn is_palindrome(&self) -> bool {
        is_palindrome(&self.word)
    }
}
