//! Steady states, bifurcation points, bifurcation directions and coexistence
//! branches of the Dirichlet prey-taxis predator-prey system
//!
//! ```text
//! u_t = (d(v) u_x − u χ(v) v_x)_x + λ u − u² + γ u F(v)
//! v_t = D v_xx + μ v − v² − u F(v)
//! ```
//!
//! on `(0, L)` with `u = v = 0` on the boundary.

pub mod bifurcation;
pub mod cli;
pub mod config;
pub mod continuation;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod model;
pub mod par;
pub mod scalar;
pub mod steady;
pub mod timestepper;

pub use error::{Error, Result};
pub use grid::{Coefficient, Field, Grid, TridiagonalOperator};
pub use model::{ModelParams, Motility, ResponseFunction, ResponseKind, Taxis};
