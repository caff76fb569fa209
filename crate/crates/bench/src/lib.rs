//! Benchmark fixtures.

use fairworld::rational::ratio;
use fairworld::{simplex_grid, Instance, WeightScheme};

/// Grid instance and a tiered scheme over its three labels.
pub fn grid_fixture(resolution: u32) -> (Instance, WeightScheme) {
    let instance = simplex_grid(resolution).expect("positive resolution");
    let scheme = WeightScheme::new(vec![vec![0], vec![1, 2]], vec![ratio(1, 1), ratio(3, 1), ratio(6, 1)])
        .expect("valid scheme");
    (instance, scheme)
}
