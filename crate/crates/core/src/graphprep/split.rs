use rand::seq::index::sample;

use crate::rng::{stream, Stream};
use crate::{Error, Result};

/// Seeded uniform choice of `test_size` of the `num_nodes` ids for testing;
/// the rest train. Both lists come back sorted.
pub fn split(num_nodes: usize, test_size: usize, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if test_size > num_nodes {
        return Err(Error::invalid(format!(
            "test size {test_size} exceeds the {num_nodes} available nodes"
        )));
    }
    let mut rng = stream(seed, Stream::Split);
    let mut test = sample(&mut rng, num_nodes, test_size).into_vec();
    test.sort_unstable();
    let mut in_test = vec![false; num_nodes];
    for &i in &test {
        in_test[i] = true;
    }
    let train = (0..num_nodes).filter(|&i| !in_test[i]).collect();
    Ok((train, test))
}
