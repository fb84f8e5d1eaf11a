//! Compensated summation and a deterministic chunked parallel reduction.

use rayon::prelude::*;

/// Rows per parallel work unit. Chunk sums are combined in chunk order, so
/// results do not depend on the number of threads.
pub(crate) const CHUNK_ROWS: usize = 4096;

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Neumaier {
    sum: f64,
    compensation: f64,
}

impl Neumaier {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

pub(crate) fn sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = Neumaier::default();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// Mean of `f(i)` over `0..n`, evaluated chunk-parallel with an ordered
/// reduction of the per-chunk compensated sums.
pub(crate) fn par_mean<F, E>(n: usize, f: F) -> Result<f64, E>
where
    F: Fn(usize) -> Result<f64, E> + Sync,
    E: Send,
{
    let chunks: Vec<Result<f64, E>> = (0..n.div_ceil(CHUNK_ROWS))
        .into_par_iter()
        .map(|c| {
            let mut acc = Neumaier::default();
            for i in c * CHUNK_ROWS..((c + 1) * CHUNK_ROWS).min(n) {
                acc.add(f(i)?);
            }
            Ok(acc.value())
        })
        .collect();
    let mut total = Neumaier::default();
    for c in chunks {
        total.add(c?);
    }
    Ok(total.value() / n as f64)
}

/// Component-wise mean of the `width`-vectors written by `f(i, out)` over
/// `0..n`, with the same ordered chunk reduction as [`par_mean`].
pub(crate) fn par_mean_vec<F, E>(n: usize, width: usize, f: F) -> Result<Vec<f64>, E>
where
    F: Fn(usize, &mut [f64]) -> Result<(), E> + Sync,
    E: Send,
{
    let chunks: Vec<Result<Vec<Neumaier>, E>> = (0..n.div_ceil(CHUNK_ROWS))
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![Neumaier::default(); width];
            let mut row = vec![0.0; width];
            for i in c * CHUNK_ROWS..((c + 1) * CHUNK_ROWS).min(n) {
                f(i, &mut row)?;
                for (a, &r) in acc.iter_mut().zip(&row) {
                    a.add(r);
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = vec![Neumaier::default(); width];
    for c in chunks {
        for (t, a) in total.iter_mut().zip(c?) {
            t.add(a.value());
        }
    }
    Ok(total.iter().map(|t| t.value() / n as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensates_cancellation() {
        assert_eq!(sum([1.0, 1e100, 1.0, -1e100]), 2.0);
    }

    #[test]
    fn par_mean_is_thread_count_independent() {
        let f = |i: usize| -> Result<f64, ()> { Ok(((i as f64) * 0.37).sin() * 1e3) };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| par_mean(20_000, f)).unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| par_mean(20_000, f)).unwrap();
        assert_eq!(one.to_bits(), four.to_bits());
    }
}
