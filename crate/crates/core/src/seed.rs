//! Seed derivation for reproducible, parallelizable experiments.

/// SplitMix64 finalizer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Derives an independent stream seed from a base seed and a path of
/// indices (cell index, replication index, ...). Deterministic and
/// order-sensitive in the path.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    let mut acc = splitmix64(base ^ 0x51a2_b3c4_d5e6_f708);
    for &part in path {
        acc = splitmix64(acc ^ splitmix64(part));
    }
    base ^ acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_differ_across_paths() {
        let a = derive_seed(7, &[0, 0]);
        let b = derive_seed(7, &[0, 1]);
        let c = derive_seed(7, &[1, 0]);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_ne!(b, c);
        assert_eq!(a, derive_seed(7, &[0, 0]));
    }
}
