//! Fixtures shared by the benchmarks.

use qchan::zoo::{self, split_seed, RngStream};
use qchan::Channel;

/// Deterministic random channels of dimension `n` with a full environment.
pub fn channels(n: usize, count: usize) -> Vec<Channel> {
    (0..count)
        .map(|i| {
            let mut rng = RngStream::new(split_seed(n as u64, i as u64));
            zoo::random_cptp(n, n * n, &mut rng).expect("random channel")
        })
        .collect()
}
