//! Fixtures shared by the benchmarks.

use mcg_core::catalog::full_presentation;
use mcg_core::Presentation;

/// Surfaces timed by the benchmarks, from small to the largest checked grid.
pub const SURFACES: [(u16, u16); 4] = [(2, 2), (3, 3), (4, 4), (6, 4)];

pub fn presentations() -> Vec<((u16, u16), Presentation)> {
    SURFACES
        .iter()
        .map(|&(g, n)| ((g, n), full_presentation(g, n).expect("grid surface")))
        .collect()
}
