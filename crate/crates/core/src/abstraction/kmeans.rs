//! k-means with k-means++ seeding under L1 distance.
//!
//! Histogram features enter in cumulative form, where L1 equals the earth
//! mover's distance. Nearest-centroid search uses `|sum(x) - sum(c)|` as a
//! lower bound on the L1 distance and scans centroids outward in order of sum.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;

#[inline]
pub fn l1(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Number of distinct rows (exact bit equality).
pub fn distinct_points(points: &[f32], dim: usize) -> usize {
    let mut seen: hashbrown::HashSet<Vec<u32>, rustc_hash::FxBuildHasher> = Default::default();
    for row in points.chunks_exact(dim) {
        seen.insert(row.iter().map(|x| x.to_bits()).collect());
    }
    seen.len()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Centroids {
    pub dim: usize,
    pub data: Vec<f32>,
    sums: Vec<f32>,
    order: Vec<u32>,
}

impl Centroids {
    pub fn new(dim: usize, data: Vec<f32>) -> Centroids {
        let k = data.len() / dim;
        let sums: Vec<f32> = data.chunks_exact(dim).map(|r| r.iter().sum()).collect();
        let mut order: Vec<u32> = (0..k as u32).collect();
        order.sort_by(|&a, &b| sums[a as usize].total_cmp(&sums[b as usize]).then(a.cmp(&b)));
        Centroids { dim, data, sums, order }
    }

    pub fn len(&self) -> usize {
        self.sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sums.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Index of the nearest centroid; ties go to the lower index.
    pub fn nearest(&self, x: &[f32]) -> u32 {
        const SLACK: f32 = 1e-4;
        let s: f32 = x.iter().sum();
        let pos = self.order.partition_point(|&c| self.sums[c as usize] < s);
        let (mut best_d, mut best) = (f32::INFINITY, u32::MAX);
        let consider = |c: u32, best_d: &mut f32, best: &mut u32| {
            let d = l1(x, self.row(c as usize));
            if d < *best_d || (d == *best_d && c < *best) {
                *best_d = d;
                *best = c;
            }
        };
        let (mut lo, mut hi) = (pos, pos);
        let n = self.order.len();
        loop {
            let down = lo > 0 && s - self.sums[self.order[lo - 1] as usize] <= best_d + SLACK;
            let up = hi < n && self.sums[self.order[hi] as usize] - s <= best_d + SLACK;
            if !down && !up {
                break;
            }
            if up {
                consider(self.order[hi], &mut best_d, &mut best);
                hi += 1;
            }
            if down {
                lo -= 1;
                consider(self.order[lo], &mut best_d, &mut best);
            }
        }
        best
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KMeansConfig {
    pub max_iters: usize,
    /// Points used for seeding and Lloyd updates; the rest are only assigned.
    pub max_fit_points: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig { max_iters: 40, max_fit_points: 60_000 }
    }
}

/// Clusters `points` (row-major, `dim` columns) into `k` groups and returns
/// centroids plus each point's cluster.
pub fn kmeans(points: &[f32], dim: usize, k: usize, seed: u64, cfg: &KMeansConfig) -> Result<(Centroids, Vec<u32>), Error> {
    let n = points.len() / dim;
    if k == 0 || k > n {
        return Err(Error::InvalidClusterCount { k, points: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fit: Vec<usize> = if n > cfg.max_fit_points {
        let mut idx: Vec<usize> = (0..n).collect();
        let (s, _) = rand::seq::SliceRandom::partial_shuffle(&mut idx[..], &mut rng, cfg.max_fit_points);
        let mut s = s.to_vec();
        s.sort_unstable();
        s
    } else {
        (0..n).collect()
    };
    let fit_points: Vec<f32> = fit.iter().flat_map(|&i| points[i * dim..(i + 1) * dim].iter().copied()).collect();
    let distinct = distinct_points(&fit_points, dim);
    if k > distinct {
        return Err(Error::InvalidClusterCount { k, points: distinct });
    }
    let m = fit.len();
    let row = |i: usize| &fit_points[i * dim..(i + 1) * dim];

    // k-means++ seeding
    let mut data = Vec::with_capacity(k * dim);
    let first = rng.gen_range(0..m);
    data.extend_from_slice(row(first));
    let mut d2: Vec<f64> = (0..m).map(|i| sq(l1(row(i), row(first)))).collect();
    for _ in 1..k {
        let total: f64 = d2.iter().sum();
        let mut target = rng.gen::<f64>() * total;
        let mut pick = None;
        for (i, &w) in d2.iter().enumerate() {
            if w > 0.0 {
                pick = Some(i);
                if target < w {
                    break;
                }
                target -= w;
            }
        }
        let c = pick.expect("fewer distinct points than clusters");
        data.extend_from_slice(row(c));
        for i in 0..m {
            let d = sq(l1(row(i), row(c)));
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }

    // Lloyd iterations on the fitting sample
    let mut cents = Centroids::new(dim, data);
    let mut assign = vec![u32::MAX; m];
    for _ in 0..cfg.max_iters {
        let mut changed = false;
        for i in 0..m {
            let a = cents.nearest(row(i));
            if a != assign[i] {
                assign[i] = a;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![0.0f64; k * dim];
        let mut counts = vec![0usize; k];
        for i in 0..m {
            let a = assign[i] as usize;
            counts[a] += 1;
            for (s, &x) in sums[a * dim..(a + 1) * dim].iter_mut().zip(row(i)) {
                *s += x as f64;
            }
        }
        let mut data = cents.data.clone();
        for c in 0..k {
            if counts[c] > 0 {
                for j in 0..dim {
                    data[c * dim + j] = (sums[c * dim + j] / counts[c] as f64) as f32;
                }
            } else {
                // reseed an empty cluster at the worst-fit point
                let far = (0..m)
                    .max_by(|&a, &b| {
                        let da = l1(row(a), cents.row(assign[a] as usize));
                        let db = l1(row(b), cents.row(assign[b] as usize));
                        da.total_cmp(&db).then(b.cmp(&a))
                    })
                    .expect("non-empty");
                data[c * dim..(c + 1) * dim].copy_from_slice(row(far));
            }
        }
        cents = Centroids::new(dim, data);
    }
    let all: Vec<u32> = (0..n).map(|i| cents.nearest(&points[i * dim..(i + 1) * dim])).collect();
    Ok((cents, all))
}

#[inline]
fn sq(x: f32) -> f64 {
    (x as f64) * (x as f64)
}
