//! Deterministic reductions.
//!
//! Partial sums are formed over fixed index blocks and combined in block
//! order, so results do not depend on the thread count or scheduling.

use rayon::prelude::*;

const BLOCK: usize = 1024;

/// Sum `f(i)` for `i in 0..len` with a fixed blocking independent of threads.
pub fn ordered_sum<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let blocks = len.div_ceil(BLOCK);
    let partials: Vec<f64> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let lo = b * BLOCK;
            let hi = (lo + BLOCK).min(len);
            let mut acc = 0.0;
            for i in lo..hi {
                acc += f(i);
            }
            acc
        })
        .collect();
    partials.iter().sum()
}

/// A candidate for a sup-type reduction: the value and the position that
/// produced it. Ties break toward the smaller key so the reduction is
/// order independent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Argmax<K: Copy + Ord> {
    pub value: f64,
    pub key: K,
}

impl<K: Copy + Ord> Argmax<K> {
    pub fn better(a: Option<Self>, b: Option<Self>) -> Option<Self> {
        match (a, b) {
            (None, x) | (x, None) => x,
            (Some(a), Some(b)) => {
                if b.value > a.value || (b.value == a.value && b.key < a.key) {
                    Some(b)
                } else {
                    Some(a)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordered_sum_is_thread_count_independent() {
        let f = |i: usize| 1.0 / (1.0 + i as f64).powf(1.3);
        let a = ordered_sum(100_000, f);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| ordered_sum(100_000, f));
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn argmax_ties_prefer_smaller_key() {
        let a = Some(Argmax {
            value: 1.0,
            key: 5usize,
        });
        let b = Some(Argmax {
            value: 1.0,
            key: 3usize,
        });
        assert_eq!(Argmax::better(a, b).unwrap().key, 3);
        assert_eq!(Argmax::better(b, a).unwrap().key, 3);
    }
}
