//! Spectral Euler–Arnold flows on the Virasoro group and the Hill-operator
//! model of its coadjoint orbits.
//!
//! * [`spectral`]: periodic fields, spectral calculus, the inertia operator.
//! * [`virasoro`]: algebra, dual, coadjoint actions, Schwarzian, Bott cocycle.
//! * [`euler_flow`]: KdV, Camassa–Holm, general `H¹_{α,β}` and Hunter–Saxton flows.
//! * [`hamiltonian`]: functionals, Lie–Poisson and frozen brackets, Lenard chain.
//! * [`hill`]: monodromy, winding, orbit classification, Casimir expansion.

pub mod error;
pub mod euler_flow;
pub mod hamiltonian;
pub mod hill;
mod ode;
pub mod spectral;
pub mod virasoro;

pub use error::{Error, Result};
pub use euler_flow::{Equation, FlowState, Trajectory};
pub use hamiltonian::{DerivativeMode, FrozenPoint, Functional};
pub use hill::{Confidence, HillOperator, MonodromyResult, OrbitClass, OrbitKind};
pub use ode::Tolerance;
pub use spectral::{InertiaParams, PeriodicField};
pub use virasoro::{AlgebraElement, CircleDiffeo, DualElement};
