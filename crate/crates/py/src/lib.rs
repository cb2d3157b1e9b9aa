#![allow(clippy::useless_conversion)] // false positives from #[pymethods] expansion

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use markoff_core::approx;
use markoff_core::markoff as mk;
use markoff_core::seqlab::{self, Family, RunLengthSeq};
use markoff_core::{ContinuedFraction, Error, QuadraticIrrational as Qi};
use num_bigint::BigInt;
use pyo3::basic::CompareOp;
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

create_exception!(
    markoff,
    InconclusiveError,
    PyRuntimeError,
    "A search or certificate did not complete within its budget."
);

fn err(e: Error) -> PyErr {
    match e {
        Error::Inconclusive(_) => InconclusiveError::new_err(e.to_string()),
        Error::Internal(_) | Error::ResourceLimit(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py_json<T: serde::Serialize>(py: Python<'_>, v: &T) -> PyResult<PyObject> {
    let s = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py
        .import_bound("json")?
        .call_method1("loads", (s,))?
        .unbind())
}

fn hash_of<T: Hash>(v: &T) -> u64 {
    let mut h = DefaultHasher::new();
    v.hash(&mut h);
    h.finish()
}

/// Exact `(a + b·√d)/c`.
#[pyclass(name = "QuadraticIrrational", module = "markoff", frozen)]
#[derive(Clone)]
struct PyQi(Qi);

#[pymethods]
impl PyQi {
    #[new]
    #[pyo3(signature = (a, b = BigInt::from(0), c = BigInt::from(1), d = BigInt::from(0)))]
    fn new(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> PyResult<Self> {
        Qi::new(a, b, c, d).map(Self).map_err(err)
    }

    /// Parses `"(a+b*sqrt(d))/c"`, `"p/q"`, `"sqrt(5)/5"` and similar.
    #[staticmethod]
    fn parse(s: &str) -> PyResult<Self> {
        s.parse().map(Self).map_err(err)
    }

    #[getter]
    fn a(&self) -> BigInt {
        self.0.a().clone()
    }

    #[getter]
    fn b(&self) -> BigInt {
        self.0.b().clone()
    }

    #[getter]
    fn c(&self) -> BigInt {
        self.0.c().clone()
    }

    #[getter]
    fn d(&self) -> BigInt {
        self.0.d().clone()
    }

    fn is_rational(&self) -> bool {
        self.0.is_rational()
    }

    fn floor(&self) -> BigInt {
        self.0.floor()
    }

    fn conjugate(&self) -> Self {
        Self(self.0.conjugate())
    }

    /// Distance to the nearest integer.
    fn nearest_distance(&self) -> Self {
        Self(self.0.nearest_distance())
    }

    #[pyo3(signature = (digits = 30))]
    fn decimal(&self, digits: usize) -> String {
        self.0.to_decimal(digits)
    }

    fn expand(&self) -> PyCf {
        PyCf(ContinuedFraction::expand(&self.0))
    }

    fn __add__(&self, other: QiArg) -> PyResult<Self> {
        self.0.checked_add(&other.into_qi()).map(Self).map_err(err)
    }

    fn __radd__(&self, other: QiArg) -> PyResult<Self> {
        self.__add__(other)
    }

    fn __sub__(&self, other: QiArg) -> PyResult<Self> {
        self.0.checked_sub(&other.into_qi()).map(Self).map_err(err)
    }

    fn __rsub__(&self, other: QiArg) -> PyResult<Self> {
        other.into_qi().checked_sub(&self.0).map(Self).map_err(err)
    }

    fn __mul__(&self, other: QiArg) -> PyResult<Self> {
        self.0.checked_mul(&other.into_qi()).map(Self).map_err(err)
    }

    fn __rmul__(&self, other: QiArg) -> PyResult<Self> {
        self.__mul__(other)
    }

    fn __truediv__(&self, other: QiArg) -> PyResult<Self> {
        self.0.checked_div(&other.into_qi()).map(Self).map_err(err)
    }

    fn __rtruediv__(&self, other: QiArg) -> PyResult<Self> {
        other.into_qi().checked_div(&self.0).map(Self).map_err(err)
    }

    fn __neg__(&self) -> Self {
        Self(-&self.0)
    }

    fn __abs__(&self) -> Self {
        Self(self.0.abs())
    }

    fn __float__(&self) -> f64 {
        self.0.to_f64()
    }

    fn __richcmp__(&self, other: QiArg, op: CompareOp) -> bool {
        op.matches(self.0.cmp(&other.into_qi()))
    }

    fn __hash__(&self) -> u64 {
        hash_of(&(self.0.a(), self.0.b(), self.0.c(), self.0.d()))
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("QuadraticIrrational('{}')", self.0)
    }
}

#[derive(FromPyObject)]
enum QiArg {
    Qi(PyQi),
    Int(BigInt),
}

impl QiArg {
    fn into_qi(self) -> Qi {
        match self {
            QiArg::Qi(q) => q.0,
            QiArg::Int(n) => Qi::from_integer(n),
        }
    }
}

/// Eventually periodic continued fraction `[a0; a1, …, (p1, …)]`.
#[pyclass(name = "ContinuedFraction", module = "markoff", frozen)]
#[derive(Clone)]
struct PyCf(ContinuedFraction);

#[pymethods]
impl PyCf {
    #[new]
    #[pyo3(signature = (head, period = Vec::new()))]
    fn new(head: Vec<BigInt>, period: Vec<BigInt>) -> PyResult<Self> {
        ContinuedFraction::new(head, period).map(Self).map_err(err)
    }

    #[staticmethod]
    fn parse(s: &str) -> PyResult<Self> {
        s.parse().map(Self).map_err(err)
    }

    #[getter]
    fn head(&self) -> Vec<BigInt> {
        self.0.head().to_vec()
    }

    #[getter]
    fn period(&self) -> Vec<BigInt> {
        self.0.period().to_vec()
    }

    fn value(&self) -> PyQi {
        PyQi(self.0.value())
    }

    /// The first `n` convergents as `(p, q)` pairs.
    fn convergents(&self, n: usize) -> Vec<(BigInt, BigInt)> {
        self.0
            .convergents(n)
            .into_iter()
            .map(|c| (c.p, c.q))
            .collect()
    }

    fn serret_equivalent(&self, other: &PyCf) -> bool {
        self.0.serret_equivalent(&other.0)
    }

    fn __richcmp__(&self, other: &PyCf, op: CompareOp) -> bool {
        op.matches(self.0.cmp(&other.0))
    }

    fn __hash__(&self) -> u64 {
        hash_of(&self.0.to_string())
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("ContinuedFraction('{}')", self.0)
    }
}

/// A real given as a `QuadraticIrrational`, a `ContinuedFraction`, an int,
/// or a string in either grammar.
#[derive(FromPyObject)]
enum Theta {
    Qi(PyQi),
    Cf(PyCf),
    Int(BigInt),
    Str(String),
}

impl Theta {
    fn cf(self) -> PyResult<ContinuedFraction> {
        Ok(match self {
            Theta::Cf(c) => c.0,
            Theta::Str(s) if s.trim_start().starts_with('[') => s.parse().map_err(err)?,
            other => ContinuedFraction::expand(&other.qi()?),
        })
    }

    fn qi(self) -> PyResult<Qi> {
        Ok(match self {
            Theta::Qi(q) => q.0,
            Theta::Cf(c) => c.0.value(),
            Theta::Int(n) => Qi::from_integer(n),
            Theta::Str(s) if s.trim_start().starts_with('[') => {
                s.parse::<ContinuedFraction>().map_err(err)?.value()
            }
            Theta::Str(s) => s.parse().map_err(err)?,
        })
    }
}

#[pyclass(name = "MarkoffTriple", module = "markoff", frozen, eq, hash)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyTriple(mk::MarkoffTriple);

#[pymethods]
impl PyTriple {
    #[new]
    fn new(m: u64, m1: u64, m2: u64) -> PyResult<Self> {
        mk::MarkoffTriple::new(m, m1, m2).map(Self).map_err(err)
    }

    #[getter]
    fn m(&self) -> u64 {
        self.0.m
    }

    #[getter]
    fn m1(&self) -> u64 {
        self.0.m1
    }

    #[getter]
    fn m2(&self) -> u64 {
        self.0.m2
    }

    fn children(&self) -> PyResult<Vec<PyTriple>> {
        Ok(mk::triple_children(&self.0)
            .map_err(err)?
            .into_iter()
            .map(PyTriple)
            .collect())
    }

    fn form(&self) -> PyResult<PyForm> {
        mk::markoff_form(&self.0).map(PyForm).map_err(err)
    }

    fn __iter__(slf: PyRef<'_, Self>) -> PyResult<PyObject> {
        let py = slf.py();
        let t: PyObject = (slf.0.m, slf.0.m1, slf.0.m2).into_py(py);
        t.call_method0(py, "__iter__")
    }

    fn __repr__(&self) -> String {
        format!("MarkoffTriple({}, {}, {})", self.0.m, self.0.m1, self.0.m2)
    }
}

/// `m x² + (3m−2u) xy + (v−3u) y²`.
#[pyclass(name = "MarkoffForm", module = "markoff", frozen, eq, hash)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyForm(mk::MarkoffForm);

#[pymethods]
impl PyForm {
    #[getter]
    fn m(&self) -> u64 {
        self.0.m
    }

    #[getter]
    fn u(&self) -> u64 {
        self.0.u
    }

    #[getter]
    fn v(&self) -> u64 {
        self.0.v
    }

    /// `(A, B, C)`.
    fn coefficients(&self) -> (BigInt, BigInt, BigInt) {
        self.0.coefficients()
    }

    fn discriminant(&self) -> BigInt {
        self.0.discriminant()
    }

    fn __call__(&self, x: BigInt, y: BigInt) -> BigInt {
        self.0.eval(&x, &y)
    }

    /// `(α, β)`, the positive and negative roots of `f(x, 1) = 0`.
    fn roots(&self) -> (PyQi, PyQi) {
        let (a, b) = mk::form_roots(&self.0);
        (PyQi(a), PyQi(b))
    }

    fn alpha_expansion(&self) -> PyResult<PyCf> {
        mk::alpha_expansion_for(&self.0).map(PyCf).map_err(err)
    }

    fn beta_plus3_expansion(&self) -> PyResult<PyCf> {
        mk::beta_plus3_expansion_for(&self.0).map(PyCf).map_err(err)
    }

    /// `(μ, ν)` for `m > 2`.
    fn coordinates(&self) -> PyResult<(u64, u64)> {
        let c = mk::coordinates_for(&self.0).map_err(err)?;
        Ok((c.mu, c.nu))
    }

    /// `(min |f|, witness)` over `0 < max(|x|,|y|) ≤ bound`.
    fn minimum(&self, bound: u64) -> PyResult<(BigInt, (i64, i64))> {
        let r = mk::form_minimum_estimate(&self.0, bound).map_err(err)?;
        Ok((r.min_abs, r.witness))
    }

    fn normalized_minimum(&self) -> PyResult<PyQi> {
        mk::normalized_minimum(&self.0).map(PyQi).map_err(err)
    }

    fn to_dict(&self, py: Python<'_>) -> PyResult<PyObject> {
        to_py_json(py, &self.0)
    }

    fn __repr__(&self) -> String {
        format!(
            "MarkoffForm(m={}, u={}, v={})",
            self.0.m, self.0.u, self.0.v
        )
    }
}

#[pyfunction]
fn enumerate_markoff(bound: u64) -> PyResult<Vec<PyTriple>> {
    Ok(mk::enumerate_markoff(bound)
        .map_err(err)?
        .into_iter()
        .map(PyTriple)
        .collect())
}

#[pyfunction]
fn markoff_numbers(bound: u64) -> PyResult<Vec<u64>> {
    mk::markoff_numbers(bound).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (m, cap = 1_000_000))]
fn markoff_form(m: u64, cap: u64) -> PyResult<PyForm> {
    let t = mk::triple_for(m, cap).map_err(err)?;
    mk::markoff_form(&t).map(PyForm).map_err(err)
}

/// `q·‖qθ‖`.
#[pyfunction]
fn q_distance(theta: Theta, q: BigInt) -> PyResult<PyQi> {
    approx::q_distance(&theta.qi()?, q).map(PyQi).map_err(err)
}

#[pyfunction]
fn mu_n(theta: Theta, n: usize) -> PyResult<PyQi> {
    approx::mu_n(&theta.cf()?, n).map(PyQi).map_err(err)
}

/// `sup_n μ_n`.
#[pyfunction]
fn sup_mu(theta: Theta) -> PyResult<PyQi> {
    Ok(PyQi(approx::sup_mu(&theta.cf()?).map_err(err)?.sup))
}

/// `lim inf q‖qθ‖`.
#[pyfunction]
fn markoff_value(theta: Theta) -> PyResult<PyQi> {
    approx::markoff_value(&theta.cf()?).map(PyQi).map_err(err)
}

/// Certified `inf q‖qθ‖` as a dict; `argmin_q` is `None` when not attained.
#[pyfunction]
#[pyo3(signature = (theta, qmax = 10_000, digits = 30))]
fn phi_certified(py: Python<'_>, theta: Theta, qmax: u64, digits: usize) -> PyResult<PyObject> {
    let cert = approx::phi_certified(&theta.cf()?, qmax).map_err(err)?;
    to_py_json(py, &cert.record(digits))
}

/// Exact value of `inf q‖qθ‖` (the certificate's `phi`).
#[pyfunction]
#[pyo3(signature = (theta, qmax = 10_000))]
fn phi(theta: Theta, qmax: u64) -> PyResult<PyQi> {
    Ok(PyQi(
        approx::phi_certified(&theta.cf()?, qmax).map_err(err)?.phi,
    ))
}

#[pyfunction]
#[pyo3(signature = (m, qmax = 10_000))]
fn verify_extremal(py: Python<'_>, m: u64, qmax: u64) -> PyResult<PyObject> {
    to_py_json(py, &approx::verify_thm31(m, qmax).map_err(err)?)
}

fn family(name: &str) -> PyResult<Family> {
    name.parse().map_err(err)
}

fn seq(s: &str) -> PyResult<RunLengthSeq> {
    s.parse().map_err(err)
}

#[pyfunction]
fn is_balanced(s: &str) -> PyResult<bool> {
    Ok(seqlab::is_balanced(&seq(s)?))
}

#[pyfunction]
fn is_markoff_balanced(s: &str) -> PyResult<bool> {
    Ok(seqlab::is_markoff_balanced(&seq(s)?))
}

#[pyfunction]
#[pyo3(name = "in_family", signature = (s, family_name = "m01"))]
fn in_family(s: &str, family_name: &str) -> PyResult<bool> {
    Ok(family(family_name)?.contains(&seq(s)?))
}

/// The other member of the family equivalent to `s`, as `"pre|period"`.
#[pyfunction]
#[pyo3(name = "companion", signature = (s, family_name = "m01"))]
fn companion(s: &str, family_name: &str) -> PyResult<String> {
    Ok(seqlab::companion(&seq(s)?, family(family_name)?)
        .map_err(err)?
        .to_string())
}

/// `(θ', shift, sign)` with `θ' = sign·θ + shift ∈ (0, 1/2)`.
#[pyfunction]
fn normalize_pm(theta: Theta) -> PyResult<(PyQi, BigInt, i8)> {
    let (q, shift, sign) = seqlab::normalize_pm(&theta.qi()?).map_err(err)?;
    Ok((PyQi(q), shift, sign))
}

/// `{"verdict": "markoff", "m", "root", …}` or `{"verdict": "none", "witness": …}`.
#[pyfunction]
#[pyo3(signature = (theta, cap = seqlab::DEFAULT_MARKOFF_CAP))]
fn classify_theta(py: Python<'_>, theta: Theta, cap: u64) -> PyResult<PyObject> {
    let out = match seqlab::classify_theta(&theta.qi()?, cap).map_err(err)? {
        seqlab::Classification::Markoff(a) => {
            let mut v =
                serde_json::to_value(&a).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
            v["verdict"] = "markoff".into();
            v
        }
        seqlab::Classification::NotMarkoff(w) => {
            serde_json::json!({ "verdict": "none", "witness": w })
        }
    };
    to_py_json(py, &out)
}

#[pymodule]
fn markoff(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add(
        "InconclusiveError",
        m.py().get_type_bound::<InconclusiveError>(),
    )?;
    m.add_class::<PyQi>()?;
    m.add_class::<PyCf>()?;
    m.add_class::<PyTriple>()?;
    m.add_class::<PyForm>()?;
    m.add_function(wrap_pyfunction!(enumerate_markoff, m)?)?;
    m.add_function(wrap_pyfunction!(markoff_numbers, m)?)?;
    m.add_function(wrap_pyfunction!(markoff_form, m)?)?;
    m.add_function(wrap_pyfunction!(q_distance, m)?)?;
    m.add_function(wrap_pyfunction!(mu_n, m)?)?;
    m.add_function(wrap_pyfunction!(sup_mu, m)?)?;
    m.add_function(wrap_pyfunction!(markoff_value, m)?)?;
    m.add_function(wrap_pyfunction!(phi_certified, m)?)?;
    m.add_function(wrap_pyfunction!(phi, m)?)?;
    m.add_function(wrap_pyfunction!(verify_extremal, m)?)?;
    m.add_function(wrap_pyfunction!(is_balanced, m)?)?;
    m.add_function(wrap_pyfunction!(is_markoff_balanced, m)?)?;
    m.add_function(wrap_pyfunction!(in_family, m)?)?;
    m.add_function(wrap_pyfunction!(companion, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_pm, m)?)?;
    m.add_function(wrap_pyfunction!(classify_theta, m)?)?;
    Ok(())
}
