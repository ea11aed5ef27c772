//! Fixed inputs shared by the kernel benchmarks.

use virasoro_flows::{DualElement, FlowState, HillOperator, PeriodicField};

pub const GRID: usize = 256;

/// `cos x + 0.3 sin 2x − 0.1 cos 5x`.
pub fn smooth_field(n: usize) -> PeriodicField {
    PeriodicField::from_fn(n, |x| x.cos() + 0.3 * (2.0 * x).sin() - 0.1 * (5.0 * x).cos())
        .expect("valid grid")
}

pub fn kdv_state(n: usize) -> FlowState {
    FlowState::new(DualElement::new(smooth_field(n), 1.0), 0.0)
}

/// The elliptic Hill operator `q = 1/2 + 0.1 cos x`.
pub fn hill_operator(n: usize) -> HillOperator {
    let q = PeriodicField::from_fn(n, |x| 0.5 + 0.1 * x.cos()).expect("valid grid");
    HillOperator::from_q(q)
}
