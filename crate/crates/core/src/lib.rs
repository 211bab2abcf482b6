//! Generalized Euler transformation and the difference operator `Δ_c`:
//! continuation of `ζ(s)`, exact `ζ(-m)`, and Wallis-type products.

pub mod constants;
pub mod diffcore;
pub mod error;
pub mod exact;
pub mod products;
pub mod sum;
pub mod transform;
pub mod zeta;

pub use diffcore::{
    apply_delta, coefficient_a, delta_power, pochhammer, tail_bound, weight_vector, Modulus, Stencil, WeightVector,
};
pub use error::{Error, Result};
pub use exact::{bernoulli_oracle, sondow_neg_int, zeta_neg_int, ExactRational};
pub use products::{verify_identity, IdentityId, ProductReport, Route, Verification};
pub use transform::{classic_transform, transform, BlockedPartialSum, Operator, Sequence, TransformedSeries};
pub use zeta::{plan_heuristic, zeta, zeta_c, EvalPlan, Regime, SeriesEvaluation};

pub use num_complex::Complex64;
