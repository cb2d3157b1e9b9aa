//! Exact values of `q‖qθ‖`, the constant `φ(θ) = inf q‖qθ‖` with a
//! certificate, the Markoff value `v(θ) = lim inf q‖qθ‖`, and
//! `μ_n = [0; a_n, …, a_1] + [a_{n+1}; a_{n+2}, …]`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::contfrac::{ContinuedFraction, Convergent, Mobius};
use crate::error::{domain, Error, Result};
use crate::exact::QuadraticIrrational as Qi;
use crate::json::JsonInt;
use crate::markoff::{form_roots, markoff_form, triple_for};

/// Largest `q` covered by the exhaustive scan in [`phi_certified`].
pub const BRUTE_FORCE_Q: u64 = 10_000;

/// `q · ‖qθ‖`.
pub fn q_distance(theta: &Qi, q: impl Into<BigInt>) -> Result<Qi> {
    let q = Qi::from_integer(q.into());
    if !q.is_positive() {
        return domain("q must be positive");
    }
    Ok(&q * &(&q * theta).nearest_distance())
}

/// Expansion `[0; a_1, a_2, …]` of the fractional part of `θ`.
fn fractional_expansion(theta: &ContinuedFraction) -> Result<ContinuedFraction> {
    if !theta.is_periodic() {
        return Err(Error::Unsupported(format!(
            "{theta} is not an infinite periodic expansion"
        )));
    }
    Ok(ContinuedFraction::expand(&theta.value().fract()))
}

/// Partial quotients `a_1, a_2, …` of `[0; a_1, a_2, …]`, with the head
/// and period split used by the limit computations.
struct Tail<'a> {
    cf: &'a ContinuedFraction,
    /// Number of quotients `a_i` before the period starts.
    pre: usize,
}

impl<'a> Tail<'a> {
    fn new(cf: &'a ContinuedFraction) -> Self {
        Self {
            cf,
            pre: cf.head().len() - 1,
        }
    }

    fn len(&self) -> usize {
        self.cf.period().len()
    }

    fn a(&self, i: usize) -> &BigInt {
        self.cf.quotient(i).expect("periodic expansion is infinite")
    }

    /// `[0; a_n, …, a_1]`.
    fn back(&self, n: usize) -> Qi {
        let mut qs = vec![BigInt::zero()];
        qs.extend((1..=n).rev().map(|i| self.a(i).clone()));
        Mobius::from_quotients(&qs)
            .apply_infinity()
            .expect("finite expansion")
    }

    /// `[a_k; a_{k+1}, …]` for `k ≥ 1`.
    fn forward(&self, k: usize) -> Qi {
        let head = self.cf.head();
        if k < head.len() {
            return ContinuedFraction::new(head[k..].to_vec(), self.cf.period().to_vec())
                .expect("valid quotients")
                .value();
        }
        let mut rot = self.cf.period().to_vec();
        let shift = (k - head.len()) % rot.len();
        rot.rotate_left(shift);
        let first = rot[0].clone();
        rot.rotate_left(1);
        ContinuedFraction::new(vec![first], rot)
            .expect("valid quotients")
            .value()
    }

    /// Limit of `[0; a_n, …, a_1]` along `n + kL`: the purely periodic
    /// expansion of the period read backwards from `a_n`. Needs `n > pre`.
    fn back_limit(&self, n: usize) -> Qi {
        let len = self.len() as i64;
        let offset = (n - self.pre - 1) as i64;
        let period = self.cf.period();
        let rev: Vec<BigInt> = (0..len)
            .map(|k| period[(offset - k).rem_euclid(len) as usize].clone())
            .collect();
        ContinuedFraction::new(vec![BigInt::zero()], rev)
            .expect("valid quotients")
            .value()
    }

    fn mu(&self, n: usize) -> Qi {
        &self.back(n) + &self.forward(n + 1)
    }
}

/// `μ_n = [0; a_n, …, a_1] + [a_{n+1}; a_{n+2}, …]` for `θ = [a_0; a_1, …]`,
/// `n ≥ 0`. By Perron's formula `q_n |q_n θ − p_n| = 1/μ_n`.
pub fn mu_n(theta: &ContinuedFraction, n: usize) -> Result<Qi> {
    if !theta.is_periodic() {
        return Err(Error::Unsupported(format!(
            "{theta} is not an infinite periodic expansion"
        )));
    }
    let tail = Tail::new(theta);
    Ok(tail.mu(n))
}

/// Exact `sup_n μ_n` of an eventually periodic expansion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupMu {
    pub sup: Qi,
    /// Indices `n` with `μ_n = sup`; empty when the supremum is a limit only.
    pub attained_at: Vec<usize>,
    /// `lim sup μ_n`.
    pub limsup: Qi,
}

/// Along each residue class of `n` modulo twice the period (past the
/// pre-period) the backward part `[0; a_n, …, a_1]` is the orbit of an
/// increasing contraction of `[0, 1]`, so `μ_n` is monotone in the class.
/// A class therefore contributes either its first term (decreasing) or its
/// limit (increasing), and the supremum is a finite maximum.
pub fn sup_mu(theta: &ContinuedFraction) -> Result<SupMu> {
    if !theta.is_periodic() {
        return Err(Error::Unsupported(format!(
            "{theta} is not an infinite periodic expansion"
        )));
    }
    let tail = Tail::new(theta);
    let mut candidates: Vec<(Qi, Option<usize>)> =
        (0..=tail.pre).map(|n| (tail.mu(n), Some(n))).collect();
    let mut limsup: Option<Qi> = None;
    for n in tail.pre + 1..=tail.pre + 2 * tail.len() {
        let mu = tail.mu(n);
        let limit = &tail.back_limit(n) + &tail.forward(n + 1);
        if limsup.as_ref().is_none_or(|l| &limit > l) {
            limsup = Some(limit.clone());
        }
        candidates.push(if mu > limit {
            (mu, Some(n))
        } else {
            (limit, None)
        });
    }
    let sup = candidates
        .iter()
        .map(|(v, _)| v)
        .max()
        .expect("nonempty")
        .clone();
    let attained_at = candidates
        .iter()
        .filter(|(v, n)| v == &sup && n.is_some())
        .filter_map(|(_, n)| *n)
        .collect();
    Ok(SupMu {
        sup,
        attained_at,
        limsup: limsup.expect("period is nonempty"),
    })
}

/// Least `n ≥ start` with `μ_n ≥ bound`, decided exactly from the same
/// per-class monotonicity as [`sup_mu`].
pub fn first_mu_at_least(
    theta: &ContinuedFraction,
    bound: &Qi,
    start: usize,
) -> Result<Option<(usize, Qi)>> {
    if !theta.is_periodic() {
        return Err(Error::Unsupported(format!(
            "{theta} is not an infinite periodic expansion"
        )));
    }
    let tail = Tail::new(theta);
    let step = 2 * tail.len();
    let reach = tail.pre + step;
    for n in start..=reach {
        let mu = tail.mu(n);
        if &mu >= bound {
            return Ok(Some((n, mu)));
        }
    }
    let mut best: Option<(usize, Qi)> = None;
    for n0 in tail.pre + 1..=reach {
        let limit = &tail.back_limit(n0) + &tail.forward(n0 + 1);
        let increasing = tail.mu(n0) < limit;
        let mut n = n0;
        while n <= reach || n < start {
            n += step;
        }
        // past the first term a class is decreasing or bounded by its limit
        while best.as_ref().is_none_or(|(b, _)| n < *b) {
            let mu = tail.mu(n);
            if &mu >= bound {
                best = Some((n, mu));
                break;
            }
            if !increasing || &limit <= bound {
                break;
            }
            n += step;
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CertificateStatus {
    Certified,
    Inconclusive,
}

impl fmt::Display for CertificateStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Certified => "certified",
            Self::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiCertificate {
    pub theta: ContinuedFraction,
    pub phi: Qi,
    /// All `q` with `q‖qθ‖ = φ`, ascending; empty when the infimum is not attained.
    pub argmin_q: Vec<BigInt>,
    /// Every convergent denominator up to this bound was checked.
    pub checked_upto: u64,
    /// Every `q` up to this bound was checked.
    pub brute_force_upto: u64,
    pub status: CertificateStatus,
    pub method_notes: String,
}

impl PhiCertificate {
    pub fn argmin(&self) -> Option<&BigInt> {
        self.argmin_q.first()
    }

    pub fn is_unique(&self) -> bool {
        self.argmin_q.len() <= 1
    }

    pub fn record(&self, digits: usize) -> PhiRecord {
        PhiRecord {
            theta: self.theta.to_string(),
            phi: self.phi.to_string(),
            phi_decimal: self.phi.to_decimal(digits),
            argmin_q: self.argmin().cloned().map(JsonInt),
            unique: self.is_unique(),
            ties: if self.is_unique() {
                Vec::new()
            } else {
                self.argmin_q.iter().cloned().map(JsonInt).collect()
            },
            checked_upto: self.checked_upto,
            status: self.status,
            method_notes: self.method_notes.clone(),
        }
    }
}

/// JSON view of a [`PhiCertificate`].
#[derive(Clone, Debug, Serialize)]
pub struct PhiRecord {
    pub theta: String,
    pub phi: String,
    pub phi_decimal: String,
    pub argmin_q: Option<JsonInt>,
    pub unique: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub ties: Vec<JsonInt>,
    pub checked_upto: u64,
    pub status: CertificateStatus,
    pub method_notes: String,
}

/// Certified `φ(θ) = 1/sup_n μ_n` for an eventually periodic `θ`.
///
/// The exact supremum comes from [`sup_mu`]. It is then cross-checked
/// against `q‖qθ‖` at every convergent denominator `≤ qmax` (including the
/// Perron identity) and at every `q ≤ min(qmax, 10⁴)`; any disagreement is
/// an [`Error::Internal`]. The status is inconclusive when a minimizing `q`
/// lies beyond `qmax`.
pub fn phi_certified(theta: &ContinuedFraction, qmax: u64) -> Result<PhiCertificate> {
    if qmax == 0 {
        return domain("qmax must be positive");
    }
    let cf = fractional_expansion(theta)?;
    let x = cf.value();
    let sup = sup_mu(&cf)?;
    let phi = sup.sup.recip()?;

    let max_n = sup.attained_at.iter().copied().max().unwrap_or(0);
    let mut argmin_q: Vec<BigInt> = cf
        .convergents(max_n + 1)
        .into_iter()
        .filter(|c| sup.attained_at.contains(&c.index))
        .map(|c| c.q)
        .collect();
    argmin_q.sort();
    argmin_q.dedup();

    let bound = BigInt::from(qmax);
    let tail = Tail::new(&cf);
    let (mut p_prev, mut p) = (BigInt::one(), BigInt::zero());
    let (mut q_prev, mut q) = (BigInt::zero(), BigInt::one());
    for (n, a) in cf.quotients().enumerate() {
        if n > 0 {
            let next_p = a * &p + &p_prev;
            let next_q = a * &q + &q_prev;
            p_prev = std::mem::replace(&mut p, next_p);
            q_prev = std::mem::replace(&mut q, next_q);
        }
        if q > bound {
            break;
        }
        let c = Convergent {
            p: p.clone(),
            q: q.clone(),
            index: n,
        };
        let qi = Qi::from_integer(c.q.clone());
        let perron = &qi * &(&(&qi * &x) - &Qi::from_integer(c.p.clone())).abs();
        if perron.recip()? != tail.mu(n) {
            return Err(Error::Internal(format!(
                "Perron identity fails at q_{n} = {}",
                c.q
            )));
        }
        let d = q_distance(&x, c.q.clone())?;
        let is_min = argmin_q.contains(&c.q);
        if d < phi || (d == phi) != is_min {
            return Err(Error::Internal(format!(
                "convergent q = {} gives {d}, certified minimum {phi}",
                c.q
            )));
        }
    }

    let brute_force_upto = qmax.min(BRUTE_FORCE_Q);
    let bad: Vec<u64> = (1..=brute_force_upto)
        .into_par_iter()
        .filter(|&q| {
            let d = q_distance(&x, q).expect("q ≥ 1");
            d < phi || (d == phi && !argmin_q.contains(&BigInt::from(q)))
        })
        .collect();
    if let Some(q) = bad.first() {
        return Err(Error::Internal(format!(
            "q = {q} undercuts the certified minimum {phi}"
        )));
    }

    let beyond = argmin_q.last().is_some_and(|q| q > &bound);
    let status = if beyond {
        CertificateStatus::Inconclusive
    } else {
        CertificateStatus::Certified
    };
    let mut method_notes = format!(
        "sup of mu_n over {} residue classes; convergents checked up to {qmax}; all q checked up to {brute_force_upto}",
        2 * cf.period().len()
    );
    if argmin_q.is_empty() {
        method_notes.push_str("; infimum is a limit and is not attained");
    }
    if beyond {
        method_notes.push_str("; minimizing q exceeds qmax");
    }
    Ok(PhiCertificate {
        theta: theta.clone(),
        phi,
        argmin_q,
        checked_upto: qmax,
        brute_force_upto,
        status,
        method_notes,
    })
}

/// `v(θ) = lim inf q‖qθ‖ = 1/lim sup μ_n`.
pub fn markoff_value(theta: &ContinuedFraction) -> Result<Qi> {
    let cf = fractional_expansion(theta)?;
    sup_mu(&cf)?.limsup.recip()
}

/// One `θ` checked by [`verify_thm31`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtremalCheck {
    pub label: &'static str,
    #[serde(serialize_with = "crate::json::as_string")]
    pub theta: Qi,
    #[serde(serialize_with = "crate::json::as_string")]
    pub expansion: ContinuedFraction,
    #[serde(serialize_with = "crate::json::as_string")]
    pub value_at_m: Qi,
    pub equality_holds: bool,
    /// `q ≠ m` with `q‖qθ‖ ≤ m‖mθ‖` (at most ten are kept).
    pub counterexamples: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtremalReport {
    pub m: u64,
    pub qmax: u64,
    /// `m(3m − √(9m²−4))/2 = 2/(3 + √(9 − 4/m²))`.
    #[serde(serialize_with = "crate::json::as_string")]
    pub expected: Qi,
    pub exceeds_one_third: bool,
    pub checks: Vec<ExtremalCheck>,
    pub passed: bool,
}

/// `m(3m − √(9m²−4))/2`.
pub fn extremal_value(m: u64) -> Result<Qi> {
    let m = BigInt::from(m);
    Qi::new(3 * &m * &m, -m.clone(), 2, 9 * &m * &m - 4)
}

/// Checks, for `θ ∈ {α_m, β_m + 3}`, that `m‖mθ‖ = 2/(3 + √(9 − 4/m²))`
/// exactly and that every other `q ≤ qmax` gives a strictly larger value.
pub fn verify_thm31(m: u64, qmax: u64) -> Result<ExtremalReport> {
    if qmax < m {
        return domain(format!("qmax = {qmax} must be at least m = {m}"));
    }
    let f = markoff_form(&triple_for(m, m)?)?;
    let (alpha, beta) = form_roots(&f);
    let expected = extremal_value(m)?;
    let mut checks = Vec::new();
    for (label, theta) in [
        ("alpha", alpha),
        ("beta_plus_3", &beta + &Qi::from_integer(3)),
    ] {
        let value_at_m = q_distance(&theta, m)?;
        let mut counterexamples: Vec<u64> = (1..=qmax)
            .into_par_iter()
            .filter(|&q| q != m && q_distance(&theta, q).expect("q ≥ 1") <= value_at_m)
            .collect();
        counterexamples.truncate(10);
        checks.push(ExtremalCheck {
            label,
            expansion: ContinuedFraction::expand(&theta),
            equality_holds: value_at_m == expected,
            theta,
            value_at_m,
            counterexamples,
        });
    }
    let exceeds_one_third = expected > Qi::from_ratio(1, 3);
    let passed = exceeds_one_third
        && checks
            .iter()
            .all(|c| c.equality_holds && c.counterexamples.is_empty());
    Ok(ExtremalReport {
        m,
        qmax,
        expected,
        exceeds_one_third,
        checks,
        passed,
    })
}
