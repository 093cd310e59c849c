//! In-place application of a local operator to a flat tensor.

use crate::par::{self, Exec};
use crate::C64;

/// Below this many chunks the low index range is split instead.
const MIN_CHUNKS: usize = 64;
const BLOCK: usize = 4096;

fn apply_group(parts: &mut [&mut [C64]], op: &[C64], n: usize) {
    let mut tmp = vec![C64::new(0.0, 0.0); n];
    for low in 0..parts[0].len() {
        for (k, p) in parts.iter().enumerate() {
            tmp[k] = p[low];
        }
        for (o, p) in parts.iter_mut().enumerate() {
            p[low] = op[o * n..(o + 1) * n].iter().zip(&tmp).map(|(g, x)| g * x).sum();
        }
    }
}

fn apply_in_chunk(chunk: &mut [C64], op: &[C64], n: usize, low: usize) {
    let mut tmp = vec![C64::new(0.0, 0.0); n];
    for r in 0..low {
        for (k, t) in tmp.iter_mut().enumerate() {
            *t = chunk[k * low + r];
        }
        for o in 0..n {
            chunk[o * low + r] = op[o * n..(o + 1) * n].iter().zip(&tmp).map(|(g, x)| g * x).sum();
        }
    }
}

/// Applies the `n x n` row-major matrix `op` to the index digit(s) of
/// combined extent `n` and stride `low`, i.e. to
/// `data[hi * n * low + k * low + r]` over `k` for every `(hi, r)`.
pub(crate) fn apply_local(data: &mut [C64], op: &[C64], n: usize, low: usize, exec: Exec) {
    debug_assert_eq!(op.len(), n * n);
    debug_assert_eq!(data.len() % (n * low), 0);
    let chunk = n * low;
    let chunks = data.len() / chunk;
    if chunks >= MIN_CHUNKS || !exec.is_parallel() {
        par::for_each_chunk_mut(exec, data, chunk, |_, c| apply_in_chunk(c, op, n, low));
        return;
    }
    let block = low.min(BLOCK);
    let mut groups: Vec<Vec<&mut [C64]>> = Vec::new();
    for c in data.chunks_mut(chunk) {
        let mut iters: Vec<_> = c.chunks_mut(low).map(|p| p.chunks_mut(block)).collect();
        while let Some(g) = iters.iter_mut().map(|it| it.next()).collect::<Option<Vec<_>>>() {
            groups.push(g);
        }
    }
    par::map_vec(exec, groups, |mut parts| apply_group(&mut parts, op, n));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_and_chunk_paths_agree() {
        let n = 3;
        let op: Vec<C64> = (0..9).map(|k| C64::new(k as f64, 1.0 - k as f64)).collect();
        for (hi, low) in [(1usize, 9000usize), (200, 5), (2, 1)] {
            let data: Vec<C64> = (0..hi * n * low).map(|k| C64::new((k % 17) as f64, (k % 5) as f64)).collect();
            let mut a = data.clone();
            let mut b = data.clone();
            apply_local(&mut a, &op, n, low, Exec::Sequential);
            apply_local(&mut b, &op, n, low, Exec::Parallel);
            assert_eq!(a, b);
            // Spot check one output entry.
            let (h, o, r) = (hi - 1, 2, low - 1);
            let want: C64 = (0..n).map(|k| op[o * n + k] * data[h * n * low + k * low + r]).sum();
            assert!((a[h * n * low + o * low + r] - want).norm() < 1e-12);
        }
    }
}
