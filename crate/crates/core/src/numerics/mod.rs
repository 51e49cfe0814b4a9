// SPDX-License-Identifier: Apache-2.0

//! Quadrature, root finding, delay integration and minimisation used by the
//! physics modules.

pub mod dde;
pub mod optimize;
pub mod quad;
pub mod roots;

pub use dde::{integrate_dde, DdeSolution, DdeSpec};
pub use optimize::{minimize, Minimum, OptimizerSpec, Refinement};
pub use quad::{integrate_interval, integrate_line, Compactification, Integral, QuadValue, QuadratureSpec};
pub use roots::find_roots_bracketed;
