/// Radical inverse of `index` in base `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut out = 0.0;
    while index > 0 {
        out += (index % base) as f64 * scale;
        index /= base;
        scale *= inv;
    }
    out
}

/// The first `n` primes.
pub fn first_primes(n: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(n);
    let mut candidate = 2u64;
    while primes.len() < n {
        if primes.iter().take_while(|p| *p * *p <= candidate).all(|p| candidate % p != 0) {
            primes.push(candidate);
        }
        candidate += 1;
    }
    primes
}

/// Halton point in `[0, 1)^dims`: coordinate `k` is the radical inverse of
/// `index` in the `k`-th prime base.
///
/// # Panics
/// If `index == 0`.
pub fn halton_point(index: u64, dims: usize) -> Vec<f64> {
    assert!(index >= 1, "Halton indices start at 1");
    first_primes(dims).into_iter().map(|b| radical_inverse(index, b)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radical_inverse_examples() {
        assert_eq!(halton_point(1, 1), vec![0.5]);
        let base2: Vec<f64> = (2..=4).map(|i| radical_inverse(i, 2)).collect();
        assert_eq!(base2, vec![0.25, 0.75, 0.125]);
        assert_eq!(halton_point(1, 2), vec![0.5, 1.0 / 3.0]);
    }

    #[test]
    fn primes() {
        assert_eq!(first_primes(8), vec![2, 3, 5, 7, 11, 13, 17, 19]);
    }

    #[test]
    fn quadrants_are_balanced() {
        let mut counts = [0usize; 4];
        for i in 1..=1000 {
            let p = halton_point(i, 2);
            counts[(p[0] >= 0.5) as usize + 2 * (p[1] >= 0.5) as usize] += 1;
        }
        assert!(counts.iter().all(|c| (200..=300).contains(c)), "{counts:?}");
    }
}
