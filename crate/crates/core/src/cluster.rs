//! Weighted k-means used to extract target states from a particle cloud.

use std::cmp::Ordering;

use rand::Rng;

pub const MAX_ITERATIONS: usize = 100;
pub const RELATIVE_TOLERANCE: f64 = 1e-6;

type Point = [f64; 4];

fn dist2(a: &Point, b: &Point) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn lexicographic(a: &Point, b: &Point) -> Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
}

/// Picks an index with probability proportional to `scores`; falls back to
/// the largest score when the total is not positive.
fn pick<R: Rng + ?Sized>(scores: &[f64], rng: &mut R) -> usize {
    let total: f64 = scores.iter().sum();
    if !(total > 0.0) {
        return 0;
    }
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, s) in scores.iter().enumerate() {
        acc += s;
        if u < acc {
            return i;
        }
    }
    scores.iter().rposition(|s| *s > 0.0).unwrap_or(0)
}

/// Weighted k-means with k-means++ seeding.
///
/// Points are sorted lexicographically before seeding, so the result does not
/// depend on input order for a fixed random stream. Clustering runs on
/// per-dimension standardized coordinates; the returned centroids are the
/// weighted means of each cluster's points in the original coordinates.
/// Clusters left empty keep their previous center.
pub fn weighted_kmeans<R: Rng + ?Sized>(points: &[Point], weights: &[f64], k: usize, rng: &mut R) -> Vec<Point> {
    assert_eq!(points.len(), weights.len());
    if k == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..points.len()).filter(|&i| weights[i] > 0.0).collect();
    if order.is_empty() {
        order = (0..points.len()).collect();
    }
    if order.is_empty() {
        return Vec::new();
    }
    let uniform = order.iter().all(|&i| weights[i] <= 0.0);
    order.sort_by(|&a, &b| lexicographic(&points[a], &points[b]).then(weights[a].total_cmp(&weights[b])));
    let w: Vec<f64> = order.iter().map(|&i| if uniform { 1.0 } else { weights[i] }).collect();
    let raw: Vec<Point> = order.iter().map(|&i| points[i]).collect();

    let total: f64 = w.iter().sum();
    let mut mean = [0.0; 4];
    for (p, wi) in raw.iter().zip(&w) {
        for d in 0..4 {
            mean[d] += wi * p[d];
        }
    }
    mean.iter_mut().for_each(|m| *m /= total);
    let mut scale = [0.0; 4];
    for (p, wi) in raw.iter().zip(&w) {
        for d in 0..4 {
            scale[d] += wi * (p[d] - mean[d]).powi(2);
        }
    }
    for s in scale.iter_mut() {
        *s = (*s / total).sqrt();
        if !(*s > 0.0) {
            *s = 1.0;
        }
    }
    let pts: Vec<Point> = raw.iter().map(|p| std::array::from_fn(|d| (p[d] - mean[d]) / scale[d])).collect();

    // k-means++ seeding.
    let mut centers: Vec<Point> = Vec::with_capacity(k);
    centers.push(pts[pick(&w, rng)]);
    let mut nearest: Vec<f64> = pts.iter().map(|p| dist2(p, &centers[0])).collect();
    while centers.len() < k {
        let scores: Vec<f64> = nearest.iter().zip(&w).map(|(d, wi)| d * wi).collect();
        let next = if scores.iter().any(|s| *s > 0.0) { pts[pick(&scores, rng)] } else { pts[pick(&w, rng)] };
        for (n, p) in nearest.iter_mut().zip(&pts) {
            *n = n.min(dist2(p, &next));
        }
        centers.push(next);
    }

    let mut assignment = vec![0usize; pts.len()];
    for _ in 0..MAX_ITERATIONS {
        for (a, p) in assignment.iter_mut().zip(&pts) {
            let mut best = (f64::INFINITY, 0);
            for (j, c) in centers.iter().enumerate() {
                let d = dist2(p, c);
                if d < best.0 {
                    best = (d, j);
                }
            }
            *a = best.1;
        }
        let mut sums = vec![[0.0; 4]; k];
        let mut mass = vec![0.0; k];
        for ((p, wi), &a) in pts.iter().zip(&w).zip(&assignment) {
            mass[a] += wi;
            for d in 0..4 {
                sums[a][d] += wi * p[d];
            }
        }
        let mut converged = true;
        for j in 0..k {
            if mass[j] > 0.0 {
                let next: Point = std::array::from_fn(|d| sums[j][d] / mass[j]);
                let moved = dist2(&next, &centers[j]).sqrt();
                let size = next.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
                if moved > RELATIVE_TOLERANCE * size {
                    converged = false;
                }
                centers[j] = next;
            }
        }
        if converged {
            break;
        }
    }

    // Report in original units, as offsets from each cluster's first point
    // so that a cluster of identical points returns that point exactly.
    let mut anchor: Vec<Option<Point>> = vec![None; k];
    let mut sums = vec![[0.0; 4]; k];
    let mut mass = vec![0.0; k];
    for ((p, wi), &a) in raw.iter().zip(&w).zip(&assignment) {
        let base = *anchor[a].get_or_insert(*p);
        mass[a] += wi;
        for d in 0..4 {
            sums[a][d] += wi * (p[d] - base[d]);
        }
    }
    (0..k)
        .map(|j| {
            if let (Some(base), true) = (anchor[j], mass[j] > 0.0) {
                std::array::from_fn(|d| base[d] + sums[j][d] / mass[j])
            } else {
                std::array::from_fn(|d| centers[j][d] * scale[d] + mean[d])
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};
    use rand::seq::SliceRandom;

    fn two_clouds() -> (Vec<Point>, Vec<f64>) {
        let mut rng = stream(3, Stream::Extraction);
        let mut pts = Vec::new();
        let mut ws = Vec::new();
        for cx in [-50.0, 50.0] {
            for _ in 0..200 {
                let off: [f64; 4] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
                pts.push([cx + off[0], 1.0 + off[1], off[2], -1.0 + off[3]]);
                ws.push(rng.random_range(0.001..0.01));
            }
        }
        (pts, ws)
    }

    fn weighted_mean(pts: &[Point], ws: &[f64]) -> Point {
        let total: f64 = ws.iter().sum();
        std::array::from_fn(|d| pts.iter().zip(ws).map(|(p, w)| p[d] * w).sum::<f64>() / total)
    }

    #[test]
    fn separated_clouds_give_their_weighted_means() {
        let (pts, ws) = two_clouds();
        let left = weighted_mean(&pts[..200], &ws[..200]);
        let right = weighted_mean(&pts[200..], &ws[200..]);
        let mut got = weighted_kmeans(&pts, &ws, 2, &mut stream(1, Stream::Extraction));
        got.sort_by(|a, b| a[0].total_cmp(&b[0]));
        for d in 0..4 {
            assert!((got[0][d] - left[d]).abs() < 1e-6);
            assert!((got[1][d] - right[d]).abs() < 1e-6);
        }
    }

    #[test]
    fn identical_points_return_that_point() {
        let p = [1.25, -3.0, 7.5, 0.5];
        let got = weighted_kmeans(&[p; 30], &[0.1; 30], 1, &mut stream(1, Stream::Extraction));
        assert_eq!(got, vec![p]);
        let dup = weighted_kmeans(&[p; 3], &[0.1; 3], 2, &mut stream(1, Stream::Extraction));
        assert_eq!(dup, vec![p, p]);
    }

    #[test]
    fn order_invariant_for_fixed_stream() {
        let (pts, ws) = two_clouds();
        let a = weighted_kmeans(&pts, &ws, 3, &mut stream(8, Stream::Extraction));
        let mut idx: Vec<usize> = (0..pts.len()).collect();
        idx.shuffle(&mut stream(99, Stream::Extraction));
        let p2: Vec<Point> = idx.iter().map(|&i| pts[i]).collect();
        let w2: Vec<f64> = idx.iter().map(|&i| ws[i]).collect();
        let b = weighted_kmeans(&p2, &w2, 3, &mut stream(8, Stream::Extraction));
        assert_eq!(a, b);
    }

    #[test]
    fn zero_k_is_empty() {
        let (pts, ws) = two_clouds();
        assert!(weighted_kmeans(&pts, &ws, 0, &mut stream(1, Stream::Extraction)).is_empty());
    }
}
