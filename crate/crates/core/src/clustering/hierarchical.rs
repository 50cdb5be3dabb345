use super::Clustering;
use crate::error::{Error, Result};
use crate::matrix::LabeledMatrix;

/// Agglomerative clustering with average linkage, cut at `k` clusters.
/// The closest pair is merged first, ties broken by the lowest cluster
/// indices. Each cluster's representative is the member with the smallest
/// total distance to the other members.
pub fn hierarchical(d: &LabeledMatrix, k: usize) -> Result<Clustering> {
    let n = d.len();
    if k == 0 || k > n {
        return Err(Error::config(format!("cluster count {k} outside 1..={n}")));
    }
    let mut link: Vec<f64> = d.values().to_vec();
    let mut size = vec![1usize; n];
    let mut active: Vec<bool> = vec![true; n];
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut merges = 0;
    for _ in 0..n - k {
        let mut best = (f64::INFINITY, 0, 0);
        for i in 0..n {
            if !active[i] {
                continue;
            }
            for j in i + 1..n {
                if active[j] && link[i * n + j] < best.0 {
                    best = (link[i * n + j], i, j);
                }
            }
        }
        let (_, a, b) = best;
        // Lance–Williams update for average linkage.
        for c in 0..n {
            if active[c] && c != a && c != b {
                let v = (size[a] as f64 * link[a * n + c] + size[b] as f64 * link[b * n + c])
                    / (size[a] + size[b]) as f64;
                link[a * n + c] = v;
                link[c * n + a] = v;
            }
        }
        size[a] += size[b];
        active[b] = false;
        let moved = std::mem::take(&mut members[b]);
        members[a].extend(moved);
        merges += 1;
    }

    let clusters: Vec<Vec<usize>> = (0..n)
        .filter(|&i| active[i])
        .map(|i| {
            let mut m = members[i].clone();
            m.sort_unstable();
            m
        })
        .collect();
    let mut labels = vec![0; n];
    let mut exemplars = Vec::with_capacity(clusters.len());
    for (c, m) in clusters.iter().enumerate() {
        for &i in m {
            labels[i] = c;
        }
        let rep = m
            .iter()
            .copied()
            .min_by(|&x, &y| {
                let sx: f64 = m.iter().map(|&o| d.get(x, o)).sum();
                let sy: f64 = m.iter().map(|&o| d.get(y, o)).sum();
                sx.total_cmp(&sy).then(x.cmp(&y))
            })
            .expect("non-empty cluster");
        exemplars.push(rep);
    }
    Ok(Clustering {
        labels,
        exemplars,
        iterations: merges,
        converged: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(points: &[f64]) -> LabeledMatrix {
        LabeledMatrix::from_fn(
            (0..points.len()).map(|i| i.to_string()).collect(),
            |i, j| (points[i] - points[j]).abs(),
        )
    }

    #[test]
    fn singletons_when_k_is_n() {
        let c = hierarchical(&line(&[0.0, 1.0, 3.0]), 3).unwrap();
        assert_eq!(c.labels, vec![0, 1, 2]);
        assert_eq!(c.exemplars, vec![0, 1, 2]);
    }

    #[test]
    fn chain() {
        let c = hierarchical(&line(&[0.0, 1.0, 3.0]), 2).unwrap();
        assert_eq!(c.labels, vec![0, 0, 1]);
    }

    #[test]
    fn two_blobs_and_representatives() {
        let c = hierarchical(&line(&[0.0, 0.4, 0.5, 10.0, 10.2, 11.0]), 2).unwrap();
        assert_eq!(c.labels, vec![0, 0, 0, 1, 1, 1]);
        assert_eq!(c.exemplars, vec![1, 4]);
        assert!(hierarchical(&line(&[0.0]), 2).is_err());
    }

    #[test]
    fn average_not_single_linkage() {
        // Single linkage would chain 0-1-2-3; average linkage splits the
        // chain at the widest gap.
        let c = hierarchical(&line(&[0.0, 1.0, 2.0, 3.5, 4.5]), 2).unwrap();
        assert_eq!(c.labels, vec![0, 0, 0, 1, 1]);
    }
}
