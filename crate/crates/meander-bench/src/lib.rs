//! Fixed workloads shared by the benchmarks.

use meander_core::oracle::Budget;

/// Budget large enough for every benchmarked size.
pub fn bench_budget() -> Budget {
    Budget { max_squares: 9, max_width: 8, ..Budget::default() }
}

/// Band widths and origami sizes exercised by the oracle benchmarks.
pub const BAND_WIDTHS: [usize; 3] = [5, 6, 7];
pub const ORIGAMI_SIZES: [usize; 3] = [6, 7, 8];
