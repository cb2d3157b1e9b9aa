//! Run-length sequences of partial quotients: balanced and Markoff balanced
//! predicates, the families M01 / M10, the `μ_n < 3` classifier, the
//! R/T decompositions, companions, and classification of quadratic
//! irrationals with `φ(θ) > 1/3`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::approx::{first_mu_at_least, mu_n, sup_mu};
use crate::contfrac::ContinuedFraction;
use crate::error::{domain, Error, Result};
use crate::exact::QuadraticIrrational as Qi;
use crate::markoff::{enumerate_markoff, form_roots, markoff_form};

/// Default largest Markoff number tried by [`classify_theta`].
pub const DEFAULT_MARKOFF_CAP: u64 = 1_000_000;

/// Eventually periodic sequence `pre ++ period ++ period ++ …` of
/// nonnegative integers, kept with a primitive period and shortest `pre`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawSeq")]
pub struct RunLengthSeq {
    pre: Vec<u64>,
    period: Vec<u64>,
}

#[derive(Deserialize)]
struct RawSeq {
    pre: Vec<u64>,
    period: Vec<u64>,
}

impl TryFrom<RawSeq> for RunLengthSeq {
    type Error = Error;

    fn try_from(r: RawSeq) -> Result<Self> {
        RunLengthSeq::new(r.pre, r.period)
    }
}

impl RunLengthSeq {
    pub fn new(mut pre: Vec<u64>, mut period: Vec<u64>) -> Result<Self> {
        if period.is_empty() {
            return domain("period must be nonempty");
        }
        let p = crate::contfrac::primitive_root_len(&period);
        period.truncate(p);
        while pre.last().is_some_and(|x| Some(x) == period.last()) {
            pre.pop();
            period.rotate_right(1);
        }
        Ok(Self { pre, period })
    }

    pub fn constant(r: u64) -> Self {
        Self {
            pre: Vec::new(),
            period: vec![r],
        }
    }

    pub fn pre(&self) -> &[u64] {
        &self.pre
    }

    pub fn period(&self) -> &[u64] {
        &self.period
    }

    /// The 1-based term `r(i)`.
    pub fn r(&self, i: usize) -> u64 {
        assert!(i >= 1, "sequences are indexed from 1");
        self.at(i - 1)
    }

    fn at(&self, k: usize) -> u64 {
        if k < self.pre.len() {
            self.pre[k]
        } else {
            self.period[(k - self.pre.len()) % self.period.len()]
        }
    }

    pub fn terms(&self, n: usize) -> Vec<u64> {
        (0..n).map(|k| self.at(k)).collect()
    }

    /// Same tail up to a shift of indices.
    pub fn is_equivalent(&self, other: &Self) -> bool {
        crate::contfrac::least_rotation(&self.period)
            == crate::contfrac::least_rotation(&other.period)
    }

    fn is_constant(&self) -> bool {
        self.period.len() == 1
    }

    /// Index bound used when checking the "for all i" conditions.
    fn horizon(&self) -> usize {
        self.pre.len() + 3 * self.period.len()
    }
}

impl fmt::Display for RunLengthSeq {
    /// `pre|period`, e.g. `0|0,1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |xs: &[u64]| xs.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        write!(f, "{}|{}", join(&self.pre), join(&self.period))
    }
}

impl FromStr for RunLengthSeq {
    type Err = Error;

    /// Accepts `pre|period`, `pre,(period)` or a bare purely periodic list.
    fn from_str(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let list = |t: &str| -> Result<Vec<u64>> {
            t.split(',')
                .filter(|x| !x.is_empty())
                .map(|x| {
                    x.parse::<u64>()
                        .map_err(|e| Error::Parse(format!("{x:?}: {e}")))
                })
                .collect()
        };
        let (pre, period) = if let Some((a, b)) = s.split_once('|') {
            (list(a)?, list(b)?)
        } else if let Some(open) = s.find('(') {
            let body = s[open + 1..]
                .strip_suffix(')')
                .ok_or_else(|| Error::Parse(format!("unclosed period in {s:?}")))?;
            (list(&s[..open])?, list(body)?)
        } else {
            (Vec::new(), list(&s)?)
        };
        if period.is_empty() {
            return Err(Error::Parse(format!("empty period in {s:?}")));
        }
        Self::new(pre, period)
    }
}

/// Every pair of equal-length windows has sums differing by at most one.
pub fn is_balanced(s: &RunLengthSeq) -> bool {
    let span = s.pre.len() + 2 * s.period.len();
    windows_balanced(s, span, span)
}

pub(crate) fn windows_balanced(s: &RunLengthSeq, max_len: usize, starts: usize) -> bool {
    let terms = s.terms(starts + max_len);
    let mut prefix = vec![0u64];
    for t in &terms {
        prefix.push(prefix.last().unwrap() + t);
    }
    (1..=max_len).all(|n| {
        let sums = (0..starts).map(|k| prefix[k + n] - prefix[k]);
        let (lo, hi) = sums.fold((u64::MAX, 0), |(lo, hi), x| (lo.min(x), hi.max(x)));
        hi - lo <= 1
    })
}

fn diff(s: &RunLengthSeq, i: usize, j: usize) -> i64 {
    s.r(i) as i64 - s.r(j) as i64
}

/// Conditions (A) and (B) for `i ≤ horizon`.
fn markoff_balanced_upto(s: &RunLengthSeq, horizon: usize) -> bool {
    (1..=horizon).all(|i| {
        let step = diff(s, i + 1, i);
        if step.abs() > 1 {
            return false;
        }
        if step == 0 {
            return true;
        }
        // first nonzero r(i+j+1) − r(i−j), 1 ≤ j < i, must have sign −step
        match (1..i).map(|j| diff(s, i + j + 1, i - j)).find(|&d| d != 0) {
            None => true,
            Some(d) => d.signum() == -step,
        }
    })
}

/// `(A)`: steps of size at most one; `(B)`: after a `∓1` step the first
/// nonzero difference `r(i+j+1) − r(i−j)` is `±`.
pub fn is_markoff_balanced(s: &RunLengthSeq) -> bool {
    markoff_balanced_upto(s, s.horizon())
}

fn m01_upto(s: &RunLengthSeq, horizon: usize) -> bool {
    markoff_balanced_upto(s, horizon)
        && s.r(1) <= s.r(2)
        && (1..=horizon)
            .all(|i| diff(s, i + 1, i) != -1 || (1..i).any(|j| s.r(i + j + 1) > s.r(i - j)))
}

fn m10_upto(s: &RunLengthSeq, horizon: usize) -> bool {
    markoff_balanced_upto(s, horizon)
        && s.r(1) >= s.r(2)
        && (1..=horizon)
            .all(|i| diff(s, i + 1, i) != 1 || (1..i).any(|j| s.r(i + j + 1) < s.r(i - j)))
}

/// Markoff balanced with `r(1) ≤ r(2)`, and every `−1` step is followed
/// by some `r(i+j+1) > r(i−j)`.
pub fn in_m01(s: &RunLengthSeq) -> bool {
    m01_upto(s, s.horizon())
}

/// Markoff balanced with `t(1) ≥ t(2)`, and every `+1` step is followed
/// by some `t(i+j+1) < t(i−j)`.
pub fn in_m10(s: &RunLengthSeq) -> bool {
    m10_upto(s, s.horizon())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    M01,
    M10,
}

impl Family {
    pub fn contains(self, s: &RunLengthSeq) -> bool {
        match self {
            Family::M01 => in_m01(s),
            Family::M10 => in_m10(s),
        }
    }

    /// Family of the gap sequence of a type R / type T member.
    pub fn derived(self) -> Self {
        Family::M10
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "M01" => Ok(Family::M01),
            "M10" => Ok(Family::M10),
            _ => Err(Error::Parse(format!(
                "unknown family {s:?} (expected M01 or M10)"
            ))),
        }
    }
}

/// Reads the blocks `1_{2r}, 2, 2` of a partial-quotient sequence starting
/// at index `start`; `None` if the tail does not have that shape.
pub fn block_runs(theta: &ContinuedFraction, start: usize) -> Option<RunLengthSeq> {
    if !theta.is_periodic() {
        return None;
    }
    let head = theta.head().len();
    let len = theta.period().len();
    let a = |i: usize| theta.quotient(i).expect("periodic");
    let one = BigInt::one();
    let two = BigInt::from(2);
    let mut runs = Vec::new();
    let mut seen = HashMap::new();
    let mut pos = start;
    loop {
        if pos >= head {
            if let Some(&k) = seen.get(&((pos - head) % len)) {
                let period = runs.split_off(k);
                return RunLengthSeq::new(runs, period).ok();
            }
            seen.insert((pos - head) % len, runs.len());
        }
        let mut ones = 0usize;
        while *a(pos) == one {
            ones += 1;
            pos += 1;
            if ones > head + len {
                return None;
            }
        }
        if ones % 2 == 1 || *a(pos) != two || *a(pos + 1) != two {
            return None;
        }
        pos += 2;
        runs.push(ones as u64 / 2);
    }
}

/// Outcome of testing `μ_n(A) < 3` for all `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MuBound {
    /// `A = 2, 1_{2r(1)}, 2, 2, 1_{2r(2)}, 2, 2, …` with `{r(i)} ∈ M01`.
    AllBelow3 { runs: RunLengthSeq },
    /// `μ_n(A) ≥ 3`.
    Violation { n: usize, mu: Qi },
    /// `A = 2, 1, 1, 1, …`, outside the characterization.
    Excluded,
}

/// Classifies `A = a_1, a_2, …` (the partial quotients of `θ` after `a_0`)
/// with `a_1 ≥ 2`. Violation witnesses are found by exact evaluation,
/// preferring the least `n ≥ 1` and falling back to `n = 0`.
pub fn mu_bound_classifier(theta: &ContinuedFraction) -> Result<MuBound> {
    if !theta.is_periodic() {
        return Err(Error::Unsupported(format!(
            "{theta} is not an infinite periodic expansion"
        )));
    }
    let mut head = theta.head().to_vec();
    head[0] = BigInt::zero();
    let theta = &ContinuedFraction::new(head, theta.period().to_vec())?;
    let a1 = theta.quotient(1).expect("periodic");
    if *a1 < BigInt::from(2) {
        return domain(format!("a_1 = {a1} must be at least 2"));
    }
    if *theta == ContinuedFraction::from_i64(&[0, 2], &[1])? {
        return Ok(MuBound::Excluded);
    }
    if *a1 == BigInt::from(2) {
        if let Some(runs) = block_runs(theta, 2) {
            if in_m01(&runs) {
                return Ok(MuBound::AllBelow3 { runs });
            }
        }
    }
    let three = Qi::from_integer(3);
    let sup = sup_mu(theta)?;
    if sup.sup < three {
        return Err(Error::Internal(format!(
            "{theta} is not of the block form but sup μ_n = {} < 3",
            sup.sup
        )));
    }
    if let Some((n, mu)) = first_mu_at_least(theta, &three, 1)? {
        return Ok(MuBound::Violation { n, mu });
    }
    let mu = mu_n(theta, 0)?;
    if mu >= three {
        return Ok(MuBound::Violation { n: 0, mu });
    }
    Err(Error::Internal(format!(
        "sup μ_n = {} ≥ 3 but no μ_n ≥ 3 for {theta}",
        sup.sup
    )))
}

/// Structure of an M01 or M10 sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decomposition {
    /// `r̄`.
    R0 { r: u64 },
    /// `r−1, r̄`.
    R01 { r: u64 },
    /// `(r−1)_{s(1)}, r, (r−1)_{s(2)}, r, …` with `{s(i)} ∈ M10`.
    R { r: u64, derived: RunLengthSeq },
    /// `t̄`.
    T0 { t: u64 },
    /// `t+1, t̄`.
    T10 { t: u64 },
    /// `(t+1)_{u(1)}, t, (t+1)_{u(2)}, t, …` with `{u(i)} ∈ M10`.
    T { t: u64, derived: RunLengthSeq },
}

/// Counts of `filler` terms before each `marker` term.
fn gaps(s: &RunLengthSeq, marker: u64, filler: u64) -> Result<RunLengthSeq> {
    let mut counts = Vec::new();
    let mut seen = HashMap::new();
    let mut pos = 0usize;
    let (head, len) = (s.pre.len(), s.period.len());
    loop {
        if pos >= head {
            if let Some(&k) = seen.get(&((pos - head) % len)) {
                let period = counts.split_off(k);
                return RunLengthSeq::new(counts, period);
            }
            seen.insert((pos - head) % len, counts.len());
        }
        let mut c = 0u64;
        loop {
            let x = s.at(pos);
            pos += 1;
            if x == marker {
                break;
            }
            if x != filler {
                return domain(format!("{s} takes values other than {filler} and {marker}"));
            }
            c += 1;
            if c as usize > head + len {
                return domain(format!("{s} has no {marker} in its period"));
            }
        }
        counts.push(c);
    }
}

/// Inverse of [`gaps`].
fn expand_gaps(derived: &RunLengthSeq, marker: u64, filler: u64) -> Result<RunLengthSeq> {
    let block = |c: u64| std::iter::repeat_n(filler, c as usize).chain([marker]);
    let pre = derived.pre.iter().flat_map(|&c| block(c)).collect();
    let period = derived.period.iter().flat_map(|&c| block(c)).collect();
    RunLengthSeq::new(pre, period)
}

pub fn decompose(s: &RunLengthSeq, family: Family) -> Result<Decomposition> {
    if !family.contains(s) {
        return domain(format!("{s} is not in {family:?}"));
    }
    let values = s.pre.iter().chain(&s.period);
    match family {
        Family::M01 => {
            let r = *values.max().expect("nonempty");
            if r == 0 {
                return domain("the zero sequence has no decomposition");
            }
            if s.is_constant() {
                return match s.pre.as_slice() {
                    [] => Ok(Decomposition::R0 { r }),
                    [x] if *x + 1 == r => Ok(Decomposition::R01 { r }),
                    _ => domain(format!("{s} is not of type R0 or R01")),
                };
            }
            Ok(Decomposition::R {
                r,
                derived: gaps(s, r, r - 1)?,
            })
        }
        Family::M10 => {
            let t = *values.min().expect("nonempty");
            if s.is_constant() {
                return match s.pre.as_slice() {
                    [] => Ok(Decomposition::T0 { t }),
                    [x] if *x == t + 1 => Ok(Decomposition::T10 { t }),
                    _ => domain(format!("{s} is not of type T0 or T10")),
                };
            }
            Ok(Decomposition::T {
                t,
                derived: gaps(s, t, t + 1)?,
            })
        }
    }
}

pub fn recompose(d: &Decomposition) -> Result<RunLengthSeq> {
    match d {
        Decomposition::R0 { r } => Ok(RunLengthSeq::constant(*r)),
        Decomposition::R01 { r } => RunLengthSeq::new(vec![r - 1], vec![*r]),
        Decomposition::R { r, derived } => expand_gaps(derived, *r, r - 1),
        Decomposition::T0 { t } => Ok(RunLengthSeq::constant(*t)),
        Decomposition::T10 { t } => RunLengthSeq::new(vec![t + 1], vec![*t]),
        Decomposition::T { t, derived } => expand_gaps(derived, *t, t + 1),
    }
}

/// The other member of `family` equivalent to `s`.
pub fn companion(s: &RunLengthSeq, family: Family) -> Result<RunLengthSeq> {
    let d = match decompose(s, family)? {
        Decomposition::R0 { r } => Decomposition::R01 { r },
        Decomposition::R01 { r } => Decomposition::R0 { r },
        Decomposition::T0 { t } => Decomposition::T10 { t },
        Decomposition::T10 { t } => Decomposition::T0 { t },
        Decomposition::R { r, derived } => Decomposition::R {
            r,
            derived: companion(&derived, family.derived())?,
        },
        Decomposition::T { t, derived } => Decomposition::T {
            t,
            derived: companion(&derived, family.derived())?,
        },
    };
    recompose(&d)
}

/// `(θ', shift, sign)` with `θ' = sign·θ + shift ∈ (0, 1/2)`.
pub fn normalize_pm(theta: &Qi) -> Result<(Qi, BigInt, i8)> {
    if theta.is_rational() {
        return domain(format!("{theta} is rational"));
    }
    let floor = theta.floor();
    let frac = theta.fract();
    if frac < Qi::from_ratio(1, 2) {
        Ok((frac, -floor, 1))
    } else {
        Ok((&Qi::one() - &frac, floor + 1, -1))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Root {
    /// The positive root `α_m`.
    Alpha,
    /// `β_m + 3` for the negative root `β_m`.
    #[serde(rename = "beta_plus_3")]
    BetaPlus3,
}

impl fmt::Display for Root {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Root::Alpha => "alpha",
            Root::BetaPlus3 => "beta_plus_3",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MarkoffAttribution {
    pub m: u64,
    pub root: Root,
    #[serde(serialize_with = "crate::json::as_string")]
    pub normalized_theta: Qi,
    #[serde(with = "crate::json")]
    pub shift: BigInt,
    pub sign: i8,
}

/// Why `θ` is not ±-equivalent to a Markoff root: `μ_n ≥ 3`, hence
/// `φ(θ) ≤ 1/μ_n ≤ 1/3`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NonMarkoffWitness {
    pub n: usize,
    #[serde(serialize_with = "crate::json::as_string")]
    pub mu_n: Qi,
    #[serde(serialize_with = "crate::json::as_string")]
    pub phi_upper_bound: Qi,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Classification {
    Markoff(MarkoffAttribution),
    NotMarkoff(NonMarkoffWitness),
}

impl Classification {
    pub fn attribution(&self) -> Option<&MarkoffAttribution> {
        match self {
            Classification::Markoff(a) => Some(a),
            Classification::NotMarkoff(_) => None,
        }
    }
}

/// Finds the Markoff number `m ≤ cap` with `θ ∈ {α_m, β_m + 3}` up to
/// `θ ↦ ±θ + k`, or a witness that `φ(θ) ≤ 1/3`.
///
/// For `m ≤ 2` the two roots are ±-equivalent and the attribution is
/// reported as `alpha`.
pub fn classify_theta(theta: &Qi, cap: u64) -> Result<Classification> {
    let (normalized, shift, sign) = normalize_pm(theta)?;
    let cf = ContinuedFraction::expand(&normalized);
    let found = |m: u64, root: Root| {
        Ok(Classification::Markoff(MarkoffAttribution {
            m,
            root,
            normalized_theta: normalized.clone(),
            shift: shift.clone(),
            sign,
        }))
    };
    let runs = match mu_bound_classifier(&cf)? {
        MuBound::Excluded => return found(1, Root::Alpha),
        MuBound::Violation { n, mu } => {
            let phi_upper_bound = mu.recip()?;
            return Ok(Classification::NotMarkoff(NonMarkoffWitness {
                n,
                mu_n: mu,
                phi_upper_bound,
            }));
        }
        MuBound::AllBelow3 { runs } => runs,
    };
    if runs == RunLengthSeq::constant(0) {
        return found(2, Root::Alpha);
    }
    for t in enumerate_markoff(cap)? {
        if t.m <= 2 {
            continue;
        }
        let (alpha, beta) = form_roots(&markoff_form(&t)?);
        if ContinuedFraction::expand(&alpha) == cf {
            return found(t.m, Root::Alpha);
        }
        if ContinuedFraction::expand(&(&beta + &Qi::from_integer(3))) == cf {
            return found(t.m, Root::BetaPlus3);
        }
    }
    Err(Error::Inconclusive(format!(
        "μ_n < 3 for all n (runs {runs}) but no Markoff number ≤ {cap} matches"
    )))
}

impl MarkoffAttribution {
    /// `sign·θ + shift` applied to an arbitrary value.
    pub fn apply(&self, theta: &Qi) -> Qi {
        let s = if self.sign < 0 { -theta } else { theta.clone() };
        &s + &Qi::from_integer(self.shift.clone())
    }
}
