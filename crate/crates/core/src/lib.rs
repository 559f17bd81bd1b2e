//! Feasibility analysis for weak limits of two-phase nonlinear conductivity
//! mixtures with flux law `v = alpha |u|^2 u`.
//!
//! Given a volume fraction `t` and a mean field pair `(U, V)` the crate can
//!
//! * evaluate the necessary moment bound `gamma(t) |U|^4 <= U . V`
//!   ([`necessity`]) and build explicit Hankel-type moment certificates,
//! * decide whether `(t, U, V)` is reachable by lamination and synthesize
//!   the second-order laminate that reaches it ([`sufficiency`]),
//! * verify laminates with independent oracles and scan the flux plane for
//!   points that pass the bound but are not reachable ([`laminate`], [`scan`]),
//! * reproduce the classical linear case as a reference ([`linear`]).

pub mod error;
pub mod laminate;
pub mod linalg;
pub mod linear;
pub mod model;
pub mod necessity;
pub mod scan;
pub mod sufficiency;
pub mod tolerances;

pub type Vector = nalgebra::DVector<f64>;

pub use error::{Error, Result};
pub use laminate::{divcurl_check, jump_check, laminate_moments, verify_laminate, Laminate, LaminateReport};
pub use model::{gamma, lambda_map, quartic_energy, quartic_minimizer, Direction, Law, MaterialPair, Phase, PhaseAtom, Triplet};
pub use tolerances::Tolerances;
