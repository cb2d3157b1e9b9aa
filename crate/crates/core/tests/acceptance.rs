use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use markoff_core::approx::{
    extremal_value, markoff_value, phi_certified, q_distance, sup_mu, verify_thm31,
    CertificateStatus,
};
use markoff_core::markoff::{
    alpha_expansion, beta_expansions, brute_force_triples, convergent_identities, coordinates_for,
    enumerate_markoff, form_minimum_estimate, form_roots, frobenius_word, markoff_form,
    normalized_minimum, uniqueness_scan, MarkoffForm, MarkoffTriple,
};
use markoff_core::seqlab::{
    classify_theta, companion, in_m01, mu_bound_classifier, normalize_pm, Classification, Family,
    MuBound, Root, RunLengthSeq,
};
use markoff_core::{eval_with_tail, ContinuedFraction, QuadraticIrrational as Qi};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = std::result::Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn first_triples(k: usize) -> Vec<MarkoffTriple> {
    let mut ts = enumerate_markoff(10_000).expect("enumeration");
    ts.dedup_by_key(|t| t.m);
    ts.truncate(k);
    assert_eq!(ts.len(), k);
    ts
}

fn first_forms(k: usize) -> Vec<MarkoffForm> {
    first_triples(k)
        .iter()
        .map(|t| markoff_form(t).expect("form"))
        .collect()
}

fn triple_enumeration() -> Outcome {
    let tree: BTreeSet<_> = enumerate_markoff(1000).map_err(e)?.into_iter().collect();
    let brute: BTreeSet<_> = brute_force_triples(1000).map_err(e)?.into_iter().collect();
    ensure!(tree == brute, "tree and brute force differ");
    let ms: Vec<u64> = tree.iter().map(|t| t.m).collect();
    let expected = [1, 2, 5, 13, 29, 34, 89, 169, 194, 233, 433, 610, 985];
    ensure!(ms == expected, "m values {ms:?}");
    Ok(format!("{} triples", tree.len()))
}

fn uniqueness() -> Outcome {
    let scan = uniqueness_scan(1_000_000).map_err(e)?;
    ensure!(
        scan.collisions.is_empty(),
        "collisions {:?}",
        scan.collisions
    );
    Ok(format!("{} triples, no repeated maximum", scan.triples))
}

fn form_identities() -> Outcome {
    for f in first_forms(20) {
        let m = BigInt::from(f.m);
        ensure!(f.discriminant() == 9 * &m * &m - 4, "disc for m = {}", f.m);
        ensure!(
            &m * BigInt::from(f.v) == BigInt::from(f.u).pow(2) + 1,
            "mv = u²+1 for m = {}",
            f.m
        );
        let (alpha, _) = form_roots(&f);
        let at_root = f.eval_qi(&alpha).map_err(e)?;
        ensure!(at_root.is_zero(), "f(α,1) = {at_root} for m = {}", f.m);
    }
    Ok("20 forms".into())
}

fn expansions() -> Outcome {
    let triples: Vec<_> = enumerate_markoff(100_000)
        .map_err(e)?
        .into_iter()
        .filter(|t| t.m > 2)
        .collect();
    let failures: Vec<String> = triples
        .par_iter()
        .filter_map(|t| {
            let check = || -> Result<(), String> {
                let f = markoff_form(t).map_err(e)?;
                let c = coordinates_for(&f).map_err(e)?;
                let s = frobenius_word(&c).map_err(e)?.word;
                let cf = |head: &[u64], period: Vec<u64>| {
                    let big = |xs: &[u64]| xs.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
                    ContinuedFraction::new(big(head), big(&period)).map_err(e)
                };
                let alpha_cf = cf(&[0], [vec![2], s.clone(), vec![1, 1, 2]].concat())?;
                let minus_cf = cf(&[0], [vec![1, 1], s.clone(), vec![2, 2]].concat())?;
                let plus_cf = cf(&[0, 2], [s.clone(), vec![2, 2, 1, 1]].concat())?;
                let (alpha, beta) = form_roots(&f);
                let minus = -&(&beta + &Qi::from_integer(2));
                let plus = &beta + &Qi::from_integer(3);
                ensure!(ContinuedFraction::expand(&alpha) == alpha_cf, "α expansion");
                ensure!(
                    ContinuedFraction::expand(&minus) == minus_cf,
                    "−β−2 expansion"
                );
                ensure!(ContinuedFraction::expand(&plus) == plus_cf, "β+3 expansion");
                ensure!(
                    alpha_expansion(&c).map_err(e)? == alpha_cf,
                    "alpha_expansion"
                );
                ensure!(
                    beta_expansions(&c).map_err(e)? == (minus_cf, plus_cf),
                    "beta_expansions"
                );
                let (vu, um) = convergent_identities(&c).map_err(e)?;
                ensure!(vu == Qi::from_ratio(f.v, f.u), "v/u");
                ensure!(um == Qi::from_ratio(f.u, f.m), "u/m");
                Ok(())
            };
            check().err().map(|msg| format!("m = {}: {msg}", t.m))
        })
        .collect();
    ensure!(failures.is_empty(), "{failures:?}");
    Ok(format!("{} Markoff numbers in (2, 10⁵]", triples.len()))
}

fn extremal_property() -> Outcome {
    for t in first_triples(12) {
        let report = verify_thm31(t.m, 10_000).map_err(e)?;
        for c in &report.checks {
            ensure!(
                c.equality_holds,
                "m = {} {}: m‖mθ‖ = {}",
                t.m,
                c.label,
                c.value_at_m
            );
            ensure!(
                c.counterexamples.is_empty(),
                "m = {} {}: q = {:?}",
                t.m,
                c.label,
                c.counterexamples
            );
        }
        ensure!(
            report.expected == extremal_value(t.m).map_err(e)?,
            "expected value"
        );
        ensure!(report.passed, "m = {}", t.m);
    }
    Ok("12 Markoff numbers, both roots, q ≤ 10⁴".into())
}

fn alpha_cf(f: &MarkoffForm) -> ContinuedFraction {
    ContinuedFraction::expand(&form_roots(f).0)
}

fn phi_vs_sup() -> Outcome {
    for f in first_forms(12) {
        let cf = alpha_cf(&f);
        let cert = phi_certified(&cf, 10_000).map_err(e)?;
        ensure!(
            cert.status == CertificateStatus::Certified,
            "m = {}: {}",
            f.m,
            cert.status
        );
        let sup = sup_mu(&cf).map_err(e)?.sup;
        ensure!(
            cert.phi.recip().map_err(e)? == sup,
            "m = {}: 1/φ ≠ sup μ_n",
            f.m
        );
    }
    Ok("12 Markoff numbers".into())
}

fn markoff_values() -> Outcome {
    for f in first_forms(12) {
        let v = markoff_value(&alpha_cf(&f)).map_err(e)?;
        let m = BigInt::from(f.m);
        let expected = Qi::from_integer(f.m)
            .checked_div(&Qi::sqrt(9 * &m * &m - 4).map_err(e)?)
            .map_err(e)?;
        ensure!(v == expected, "m = {}: v = {v}", f.m);
    }
    let v3 = markoff_value(&ContinuedFraction::from_i64(&[0], &[3]).map_err(e)?).map_err(e)?;
    let expected = Qi::new(0, 1, 13, 13).map_err(e)?;
    ensure!(v3 == expected, "v([0;(3)]) = {v3}");
    ensure!(v3 < Qi::from_ratio(1, 3), "v([0;(3)]) ≥ 1/3");
    Ok("12 Markoff numbers and [0;(3)]".into())
}

fn all_words(alphabet: &[u64], len: usize) -> Vec<Vec<u64>> {
    (0..len).fold(vec![vec![]], |acc, _| {
        acc.iter()
            .flat_map(|w| alphabet.iter().map(move |&a| [w.clone(), vec![a]].concat()))
            .collect()
    })
}

fn classifier_exhaustive() -> Outcome {
    let mut seen = BTreeSet::new();
    for pre_len in 0..=3 {
        for per_len in 1..=6 {
            for pre in all_words(&[1, 2, 3], pre_len) {
                for period in all_words(&[1, 2, 3], per_len) {
                    let a1 = pre.first().unwrap_or(&period[0]);
                    if *a1 < 2 {
                        continue;
                    }
                    let head: Vec<i64> = std::iter::once(0)
                        .chain(pre.iter().map(|&x| x as i64))
                        .collect();
                    let period: Vec<i64> = period.iter().map(|&x| x as i64).collect();
                    seen.insert(ContinuedFraction::from_i64(&head, &period).map_err(e)?);
                }
            }
        }
    }
    let excluded = ContinuedFraction::from_i64(&[0, 2], &[1]).map_err(e)?;
    let three = Qi::from_integer(3);
    let seen: Vec<_> = seen.into_iter().filter(|cf| *cf != excluded).collect();
    let below = std::sync::atomic::AtomicUsize::new(0);
    let failures: Vec<String> = seen
        .par_iter()
        .filter_map(|cf| {
            let check = || -> Result<(), String> {
                let sup = sup_mu(cf).map_err(e)?.sup;
                match mu_bound_classifier(cf).map_err(e)? {
                    MuBound::AllBelow3 { .. } => {
                        below.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                        ensure!(sup < three, "classified below 3 but sup μ_n = {sup}");
                    }
                    MuBound::Violation { n, mu } => {
                        ensure!(sup >= three, "violation reported but sup μ_n = {sup}");
                        let direct = markoff_core::approx::mu_n(cf, n).map_err(e)?;
                        ensure!(direct == mu && mu >= three, "witness μ_{n} = {mu}");
                    }
                    MuBound::Excluded => return Err("unexpected exclusion".into()),
                }
                Ok(())
            };
            check().err().map(|msg| format!("{cf}: {msg}"))
        })
        .collect();
    ensure!(
        failures.is_empty(),
        "{} mismatches, first {:?}",
        failures.len(),
        &failures[..failures.len().min(5)]
    );
    Ok(format!(
        "{} distinct expansions, {} with all μ_n < 3",
        seen.len(),
        below.load(std::sync::atomic::Ordering::Relaxed)
    ))
}

/// Canonical members of `family` whose tail is a rotation of `period`,
/// with pre-periods up to `max_pre` over values adjacent to the period's.
pub fn class_members(
    period: &[u64],
    family: Family,
    max_pre: usize,
    max_value: u64,
) -> BTreeSet<RunLengthSeq> {
    let lo = period.iter().min().unwrap().saturating_sub(1);
    let hi = (period.iter().max().unwrap() + 1).min(max_value + 1);
    let alphabet: Vec<u64> = (lo..=hi).collect();
    let mut out = BTreeSet::new();
    for shift in 0..period.len() {
        let mut rot = period.to_vec();
        rot.rotate_left(shift);
        for len in 0..=max_pre {
            for pre in all_words(&alphabet, len) {
                let s = RunLengthSeq::new(pre, rot.clone()).expect("nonempty period");
                if family.contains(&s) {
                    out.insert(s);
                }
            }
        }
    }
    out
}

fn companion_exhaustive() -> Outcome {
    let mut periods = BTreeSet::new();
    for len in 1..=6 {
        for w in all_words(&[0, 1, 2, 3], len) {
            let s = RunLengthSeq::new(vec![], w).map_err(e)?;
            if in_m01(&s) && s != RunLengthSeq::constant(0) {
                periods.insert(s.period().to_vec());
            }
        }
    }
    let classes: BTreeSet<BTreeSet<RunLengthSeq>> = periods
        .par_iter()
        .map(|p| class_members(p, Family::M01, p.len() + 2, 3))
        .collect::<Vec<_>>()
        .into_iter()
        .collect();
    for class in &classes {
        ensure!(
            class.len() == 2,
            "class of size {}: {:?}",
            class.len(),
            class.iter().map(|s| s.to_string()).collect::<Vec<_>>()
        );
        let v: Vec<_> = class.iter().collect();
        for (a, b) in [(v[0], v[1]), (v[1], v[0])] {
            let c = companion(a, Family::M01).map_err(e)?;
            ensure!(&c == b, "companion({a}) = {c}, expected {b}");
            ensure!(
                companion(&c, Family::M01).map_err(e)? == *a,
                "involution fails at {a}"
            );
        }
    }
    let zero = class_members(&[0], Family::M01, 3, 3);
    ensure!(zero.len() == 1, "0̄ has {} equivalent members", zero.len());
    Ok(format!(
        "{} classes besides 0̄, each with exactly two members",
        classes.len()
    ))
}

fn classification_round_trip() -> Outcome {
    let triples = enumerate_markoff(100_000).map_err(e)?;
    let failures: Vec<String> = triples
        .par_iter()
        .filter_map(|t| {
            let check = || -> Result<(), String> {
                let f = markoff_form(t).map_err(e)?;
                let (alpha, beta) = form_roots(&f);
                let beta3 = &beta + &Qi::from_integer(3);
                let a = classify_theta(&alpha, 100_000).map_err(e)?;
                let a = a.attribution().ok_or("α classified as non-Markoff")?;
                ensure!(
                    a.m == t.m && a.root == Root::Alpha,
                    "α gives ({}, {})",
                    a.m,
                    a.root
                );
                let b = classify_theta(&beta3, 100_000).map_err(e)?;
                let b = b.attribution().ok_or("β+3 classified as non-Markoff")?;
                ensure!(b.m == t.m, "β+3 gives m = {}", b.m);
                if t.m > 2 {
                    ensure!(b.root == Root::BetaPlus3, "β+3 gives root {}", b.root);
                } else {
                    let (normalized, _, _) = normalize_pm(&beta3).map_err(e)?;
                    ensure!(b.normalized_theta == normalized, "β+3 normalization");
                }
                Ok(())
            };
            check().err().map(|msg| format!("m = {}: {msg}", t.m))
        })
        .collect();
    ensure!(failures.is_empty(), "{failures:?}");

    let three: Qi = "(-3+sqrt(13))/2".parse().map_err(e)?;
    match classify_theta(&three, 100_000).map_err(e)? {
        Classification::NotMarkoff(w) => {
            ensure!(
                w.phi_upper_bound < Qi::from_ratio(1, 3),
                "bound {}",
                w.phi_upper_bound
            );
        }
        Classification::Markoff(a) => return Err(format!("[0;(3)] attributed to m = {}", a.m)),
    }
    let cert =
        phi_certified(&ContinuedFraction::from_i64(&[0], &[3]).map_err(e)?, 10_000).map_err(e)?;
    ensure!(cert.phi < Qi::from_ratio(1, 3), "φ([0;(3)]) = {}", cert.phi);

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0010);
    let samples: Vec<Qi> = triples
        .iter()
        .take(12)
        .flat_map(|t| {
            let (alpha, beta) = form_roots(&markoff_form(t).unwrap());
            [alpha, &beta + &Qi::from_integer(3)]
        })
        .chain([three.clone(), "sqrt(7)".parse().unwrap()])
        .collect();
    for _ in 0..100 {
        let theta = &samples[rng.gen_range(0..samples.len())];
        let k = Qi::from_integer(rng.gen_range(-1000i64..=1000));
        let moved = if rng.gen_bool(0.5) {
            &k - theta
        } else {
            &k + theta
        };
        let base = classify_theta(theta, 100_000).map_err(e)?;
        let other = classify_theta(&moved, 100_000).map_err(e)?;
        match (&base, &other) {
            (Classification::Markoff(a), Classification::Markoff(b)) => {
                ensure!(
                    a.m == b.m && a.root == b.root && a.normalized_theta == b.normalized_theta,
                    "{theta} vs {moved}"
                );
                ensure!(
                    b.apply(&moved) == b.normalized_theta,
                    "attribution map for {moved}"
                );
            }
            (Classification::NotMarkoff(a), Classification::NotMarkoff(b)) => {
                ensure!(
                    a.phi_upper_bound < Qi::from_ratio(1, 3)
                        && b.phi_upper_bound < Qi::from_ratio(1, 3),
                    "{theta} vs {moved}"
                );
            }
            _ => return Err(format!("{theta} and {moved} classified differently")),
        }
    }
    Ok(format!(
        "{} Markoff numbers ≤ 10⁵, [0;(3)], 100 random ± shifts",
        triples.len()
    ))
}

fn random_rational(rng: &mut ChaCha8Rng, min_one: bool) -> Qi {
    let den = rng.gen_range(1i64..=50);
    let lo = if min_one { den } else { 1 };
    Qi::from_ratio(rng.gen_range(lo..=lo + 500), den)
}

fn random_cf(rng: &mut ChaCha8Rng) -> ContinuedFraction {
    let a0 = rng.gen_range(-2i64..=2);
    let head: Vec<i64> = std::iter::once(a0)
        .chain((0..rng.gen_range(0..4)).map(|_| rng.gen_range(1..=3)))
        .collect();
    let period: Vec<i64> = (0..rng.gen_range(1..=3))
        .map(|_| rng.gen_range(1..=3))
        .collect();
    ContinuedFraction::from_i64(&head, &period).unwrap()
}

fn identity_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0011);
    let one = Qi::one();
    let ints = |xs: &[i64]| xs.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();

    for _ in 0..1000 {
        let x = random_rational(&mut rng, false);
        let lhs = eval_with_tail(&ints(&[0, 2]), &x).map_err(e)?;
        let rhs = eval_with_tail(&ints(&[0, 1, 1]), &x).map_err(e)?;
        ensure!(&lhs + &rhs == one, "Lagrange identity at x = {x}");
    }

    for _ in 0..1000 {
        let (x, y) = (random_cf(&mut rng), random_cf(&mut rng));
        ensure!(
            x.cmp(&y) == x.value().cmp(&y.value()),
            "comparator at {x} vs {y}"
        );
    }

    let three = Qi::from_integer(3);
    for _ in 0..500 {
        let n = 2 * rng.gen_range(1usize..=6);
        let x = random_rational(&mut rng, true);
        let y = if rng.gen_bool(0.1) {
            x.clone()
        } else {
            random_rational(&mut rng, true)
        };
        let ones = |k: usize| vec![1i64; k];
        let left = eval_with_tail(&ints(&[vec![2], ones(n)].concat()), &x).map_err(e)?;
        let right = eval_with_tail(&ints(&[vec![0, 2], ones(n - 2)].concat()), &y).map_err(e)?;
        let sum = &left + &right;
        ensure!(
            (sum <= three) == (x >= y),
            "sign law at n = {n}, x = {x}, y = {y}"
        );
        ensure!(
            (sum == three) == (x == y),
            "equality case at n = {n}, x = {x}, y = {y}"
        );
    }

    for _ in 0..1000 {
        let theta = random_cf(&mut rng).value();
        let k = Qi::from_integer(rng.gen_range(-100i64..=100));
        let moved = if rng.gen_bool(0.5) {
            &k - &theta
        } else {
            &k + &theta
        };
        let q = rng.gen_range(1u64..=500);
        ensure!(
            q_distance(&theta, q).map_err(e)? == q_distance(&moved, q).map_err(e)?,
            "‖qθ‖ invariance at θ = {theta}, q = {q}"
        );
    }
    Ok("Lagrange 1000, comparator 1000, sign law 500, ‖·‖ invariance 1000".into())
}

fn form_minima() -> Outcome {
    for f in first_forms(12) {
        let min = form_minimum_estimate(&f, 50).map_err(e)?;
        ensure!(
            min.min_abs == BigInt::from(f.m),
            "m = {}: min {}",
            f.m,
            min.min_abs
        );
        ensure!(
            min.witness == (1, 0),
            "m = {}: witness {:?}",
            f.m,
            min.witness
        );
        let normalized = normalized_minimum(&f).map_err(e)?;
        ensure!(
            normalized > Qi::from_ratio(1, 3),
            "m = {}: {normalized}",
            f.m
        );
    }
    Ok("12 forms".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        (
            "triple enumeration matches brute force",
            5,
            triple_enumeration,
        ),
        ("maximal element uniqueness up to 10⁶", 30, uniqueness),
        ("form identities", 5, form_identities),
        ("root expansions and convergent identities", 60, expansions),
        ("extremal approximation at q = m", 60, extremal_property),
        ("1/φ equals certified sup μ_n", 60, phi_vs_sup),
        ("Markoff values", 30, markoff_values),
        ("μ_n < 3 classifier, exhaustive", 300, classifier_exhaustive),
        (
            "companion uniqueness, exhaustive",
            120,
            companion_exhaustive,
        ),
        ("classification round trip", 300, classification_round_trip),
        ("identity property suites", 120, identity_suites),
        ("form minima", 30, form_minima),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = match result {
            Ok(_) if elapsed > Duration::from_secs(*limit) => Err(format!("exceeded {limit} s")),
            r => r,
        };
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "{tag} [{:>2}] {name}: {detail} ({:.2} s, limit {limit} s, tolerance exact)",
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
