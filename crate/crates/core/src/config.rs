//! Tolerances shared by the float backend, the acceptance suite and the CLI.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Operator and algebra norms computed in floating point.
    pub norm: f64,
    /// Float-backend transforms against their exact counterparts.
    pub transform: f64,
    /// Relative tail bound demanded of the oscillatory-integral oracle.
    pub oracle_rel: f64,
    /// Gap between module and finite-dimensional deformed norms before a
    /// warning is raised.
    pub module_gap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            norm: 1e-9,
            transform: 1e-11,
            oracle_rel: 1e-6,
            module_gap: 0.05,
        }
    }
}
