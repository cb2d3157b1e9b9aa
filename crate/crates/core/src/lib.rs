//! Exact arithmetic around Markoff triples, Markoff forms and the continued
//! fractions of their roots, together with the constant
//! `φ(θ) = inf { q‖qθ‖ : q ≥ 1 }` and the balanced-sequence machinery that
//! characterizes `φ(θ) > 1/3`.

pub mod approx;
pub mod contfrac;
pub mod error;
pub mod exact;
pub mod json;
pub mod markoff;
pub mod seqlab;

pub use contfrac::{eval_with_tail, ContinuedFraction, Convergent, Mobius};
pub use error::{Error, Result};
pub use exact::{FieldOp, QuadraticIrrational, Rational};
