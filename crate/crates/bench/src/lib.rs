//! Seeded inputs shared by the benchmarks.

use ultraweyl::bruhat::random;
use ultraweyl::{Backend, Resolution, SBFunction, Scalar};

/// A function on Q_3^n whose grid has 3^depth cells per axis, split evenly
/// between support and constancy exponents.
pub fn grid_input(n: usize, depth: i32, backend: Backend) -> SBFunction<Scalar> {
    let r = depth / 2;
    random(3, n, Resolution { r, s: depth - r }, 0xBE7C, backend)
}

/// Phase-space symbol at resolution `res` for the Weyl benchmarks.
pub fn symbol(res: Resolution, seed: u64) -> SBFunction<Scalar> {
    random(3, 2, res, seed, Backend::Exact)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_has_requested_size() {
        assert_eq!(grid_input(1, 6, Backend::Exact).ncells(), 729);
        assert_eq!(grid_input(2, 3, Backend::Float).ncells(), 729);
    }
}
