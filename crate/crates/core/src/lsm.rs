//! Twisted Hamiltonians, column rotations, the quasi-adiabatic flow, and the
//! variational gap bound.

use serde::{Deserialize, Serialize};

/// A double twist: horizontal bonds leaving `column` are rotated by `theta`,
/// those leaving `column + L/2` by `theta_prime`. Requires even horizontal
/// length so the second column exists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwistSpec {
    /// Column index of the first twist, `0 <= column < L`.
    pub column: usize,
    /// Rotation angle at `column`, radians.
    pub theta: f64,
    /// Rotation angle at `column + L/2`, radians.
    pub theta_prime: f64,
}
