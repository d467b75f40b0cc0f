use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};

const MAX_ITERATIONS: usize = 50;

fn dist2(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Seeded k-means++ over 2-D points. `k` is clamped to the number of
/// distinct points. Returns one label in `0..k'` per point and `k'`.
pub fn kmeans(points: &[[f64; 2]], k: usize, seed: u64) -> Result<(Vec<usize>, usize)> {
    if k == 0 {
        return invalid("k must be at least 1");
    }
    if points.is_empty() {
        return Ok((Vec::new(), 0));
    }
    let mut distinct: Vec<[f64; 2]> = points.to_vec();
    distinct.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    distinct.dedup();
    let k = k.min(distinct.len());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = vec![distinct[rng.gen_range(0..distinct.len())]];
    while centers.len() < k {
        let weights: Vec<f64> = distinct
            .iter()
            .map(|p| centers.iter().map(|c| dist2(p, c)).fold(f64::INFINITY, f64::min))
            .collect();
        let total: f64 = weights.iter().sum();
        let mut pick = rng.gen_range(0.0..total);
        let mut chosen = weights.len() - 1;
        for (i, &wt) in weights.iter().enumerate() {
            if wt > 0.0 && pick < wt {
                chosen = i;
                break;
            }
            pick -= wt;
        }
        while weights[chosen] == 0.0 {
            // rounding pushed past the last positive weight
            chosen -= 1;
        }
        centers.push(distinct[chosen]);
    }

    let nearest = |p: &[f64; 2], centers: &[[f64; 2]]| {
        let mut best = 0;
        for (c, center) in centers.iter().enumerate() {
            if dist2(p, center) < dist2(p, &centers[best]) {
                best = c;
            }
        }
        best
    };
    let mut labels: Vec<usize> = points.iter().map(|p| nearest(p, &centers)).collect();
    for _ in 0..MAX_ITERATIONS {
        let mut sums = vec![[0.0, 0.0]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            sums[l][0] += p[0];
            sums[l][1] += p[1];
            counts[l] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = [sums[c][0] / counts[c] as f64, sums[c][1] / counts[c] as f64];
            }
        }
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centers)).collect();
        if next == labels {
            break;
        }
        labels = next;
    }
    Ok((labels, k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separates_blobs() {
        let mut pts = Vec::new();
        for i in 0..20 {
            let e = i as f64 * 0.01;
            pts.push([e, e]);
            pts.push([10.0 + e, 0.0]);
            pts.push([0.0, 10.0 - e]);
        }
        let (labels, k) = kmeans(&pts, 3, 4).unwrap();
        assert_eq!(k, 3);
        for i in 0..20 {
            assert_eq!(labels[3 * i], labels[0]);
            assert_eq!(labels[3 * i + 1], labels[1]);
            assert_eq!(labels[3 * i + 2], labels[2]);
        }
        assert_ne!(labels[0], labels[1]);
        assert_ne!(labels[1], labels[2]);
        assert_ne!(labels[0], labels[2]);
    }

    #[test]
    fn clamps_k_and_is_deterministic() {
        let pts = vec![[1.0, 1.0], [1.0, 1.0], [2.0, 2.0]];
        let (labels, k) = kmeans(&pts, 5, 0).unwrap();
        assert_eq!(k, 2);
        assert_eq!(labels[0], labels[1]);
        assert_ne!(labels[0], labels[2]);
        assert_eq!(kmeans(&pts, 5, 0).unwrap(), kmeans(&pts, 5, 0).unwrap());
        assert!(kmeans(&pts, 0, 0).is_err());
    }
}
