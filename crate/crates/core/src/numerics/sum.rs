/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Fixed chunk length; reductions are grouped by it regardless of thread count so the
/// parallel and sequential paths produce identical bits.
pub const CHUNK: usize = 2048;

fn sum_chunk<const N: usize, T, F>(items: &[T], f: &F) -> [f64; N]
where
    F: Fn(&T) -> [f64; N],
{
    let mut acc = [Neumaier::new(); N];
    for it in items {
        let r = f(it);
        for k in 0..N {
            acc[k].add(r[k]);
        }
    }
    acc.map(|a| a.value())
}

fn combine<const N: usize>(parts: impl IntoIterator<Item = [f64; N]>) -> [f64; N] {
    let mut acc = [Neumaier::new(); N];
    for p in parts {
        for k in 0..N {
            acc[k].add(p[k]);
        }
    }
    acc.map(|a| a.value())
}

/// Sum `f` over `items` in slice order, `N` quantities at once.
pub fn ordered_sum<const N: usize, T, F>(items: &[T], parallel: bool, f: F) -> [f64; N]
where
    T: Sync,
    F: Fn(&T) -> [f64; N] + Sync,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        let parts: Vec<[f64; N]> = items.par_chunks(CHUNK).map(|c| sum_chunk(c, &f)).collect();
        return combine(parts);
    }
    let _ = parallel;
    combine(items.chunks(CHUNK).map(|c| sum_chunk(c, &f)))
}

/// Like [`ordered_sum`] over the index range `0..n`, one index per work item
/// (each index is typically a whole column of lattice points).
pub fn ordered_sum_range<const N: usize, F>(n: usize, parallel: bool, f: F) -> [f64; N]
where
    F: Fn(usize) -> [f64; N] + Sync,
{
    let chunk = 64;
    let run = |start: usize| {
        let mut acc = [Neumaier::new(); N];
        for i in start..(start + chunk).min(n) {
            let r = f(i);
            for k in 0..N {
                acc[k].add(r[k]);
            }
        }
        acc.map(|a| a.value())
    };
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        let starts: Vec<usize> = (0..n).step_by(chunk).collect();
        let parts: Vec<[f64; N]> = starts.par_iter().map(|&s| run(s)).collect();
        return combine(parts);
    }
    let _ = parallel;
    combine((0..n).step_by(chunk).map(run))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let mut s = Neumaier::new();
        for x in [1.0, 1e100, 1.0, -1e100] {
            s.add(x);
        }
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn parallel_and_sequential_agree_bitwise() {
        let xs: Vec<f64> = (1..20_000).map(|i| 1.0 / (i as f64).powi(2)).collect();
        let a = ordered_sum(&xs, true, |&x| [x, x * x]);
        let b = ordered_sum(&xs, false, |&x| [x, x * x]);
        assert_eq!(a, b);
        let c = ordered_sum_range(5000, true, |i| [(i as f64).sqrt()]);
        let d = ordered_sum_range(5000, false, |i| [(i as f64).sqrt()]);
        assert_eq!(c, d);
    }
}
