//! Shared fixtures for the benchmarks.

use conifold::analysis::{sample_region, Sample};
use conifold::linalg::{c, C};

/// Fixed points on `V_t` with `|t| = 1e-3`, between the cycle and `r = 1`.
pub fn fixture_samples(n: usize) -> Vec<Sample> {
    sample_region(c(1e-3, 0.0), 0.2, 1.0, n, 17).expect("fixture sampling")
}

/// Chart origin used by every per-point kernel.
pub const W0: [C; 3] = [C { re: 0.0, im: 0.0 }; 3];
