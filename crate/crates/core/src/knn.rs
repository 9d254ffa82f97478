//! Exact nearest-neighbor queries over a static point set.
//!
//! A balanced kd-tree built once; queries never approximate. Ties on
//! distance are broken by ascending point index so results are fully
//! deterministic.

use crate::error::{Error, Result};
use crate::math::Vec3;

#[derive(Debug, Clone)]
struct Node {
    /// Index into `order` of the splitting point.
    point: u32,
    axis: u8,
    left: u32,
    right: u32,
}

const NIL: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct KnnIndex {
    points: Vec<Vec3>,
    nodes: Vec<Node>,
    root: u32,
}

fn key(points: &[Vec3], axis: u8, idx: u32) -> (f64, u32) {
    (points[idx as usize].get(axis as usize), idx)
}

impl KnnIndex {
    pub fn build(points: &[Vec3]) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::InvalidGeometry(format!(
                    "point {i} is not finite"
                )));
            }
        }
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        let mut nodes = Vec::with_capacity(points.len());
        let root = Self::build_node(points, &mut order, 0, &mut nodes);
        Ok(KnnIndex {
            points: points.to_vec(),
            nodes,
            root,
        })
    }

    fn build_node(points: &[Vec3], order: &mut [u32], depth: u32, nodes: &mut Vec<Node>) -> u32 {
        if order.is_empty() {
            return NIL;
        }
        let axis = (depth % 3) as u8;
        let mid = order.len() / 2;
        order.select_nth_unstable_by(mid, |&a, &b| {
            key(points, axis, a).partial_cmp(&key(points, axis, b)).unwrap()
        });
        let point = order[mid];
        let slot = nodes.len();
        nodes.push(Node {
            point,
            axis,
            left: NIL,
            right: NIL,
        });
        let (lo, hi) = order.split_at_mut(mid);
        let left = Self::build_node(points, lo, depth + 1, nodes);
        let right = Self::build_node(points, &mut hi[1..], depth + 1, nodes);
        nodes[slot].left = left;
        nodes[slot].right = right;
        slot as u32
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, idx: usize) -> Vec3 {
        self.points[idx]
    }

    /// The `min(k, len)` nearest points to `query`, ascending by
    /// `(distance, index)`. Includes the query point itself when it is part
    /// of the set.
    pub fn nearest(&self, query: Vec3, k: usize) -> Vec<(usize, f64)> {
        if k == 0 || self.points.is_empty() {
            return Vec::new();
        }
        let mut heap: Vec<(f64, u32)> = Vec::with_capacity(k + 1);
        self.search(self.root, query, k, &mut heap);
        heap.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        heap.into_iter()
            .map(|(d2, i)| (i as usize, d2.sqrt()))
            .collect()
    }

    fn search(&self, node: u32, query: Vec3, k: usize, heap: &mut Vec<(f64, u32)>) {
        if node == NIL {
            return;
        }
        let n = &self.nodes[node as usize];
        let p = self.points[n.point as usize];
        let d2 = (p - query).length_squared();
        Self::offer(heap, k, (d2, n.point));
        let delta = query.get(n.axis as usize) - p.get(n.axis as usize);
        let (near, far) = if delta < 0.0 {
            (n.left, n.right)
        } else {
            (n.right, n.left)
        };
        self.search(near, query, k, heap);
        // The far half-space can still hold a winner when the splitting
        // plane is closer than the current worst, or ties it with a lower
        // index still possible.
        if heap.len() < k || delta * delta <= Self::worst(heap).0 {
            self.search(far, query, k, heap);
        }
    }

    fn worst(heap: &[(f64, u32)]) -> (f64, u32) {
        *heap
            .iter()
            .max_by(|a, b| a.partial_cmp(b).unwrap())
            .unwrap()
    }

    fn offer(heap: &mut Vec<(f64, u32)>, k: usize, entry: (f64, u32)) {
        if heap.len() < k {
            heap.push(entry);
        } else if entry < Self::worst(heap) {
            let worst_at = heap
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0;
            heap[worst_at] = entry;
        }
    }

    /// All points within `radius` of `query` (inclusive), ascending by
    /// `(distance, index)`.
    pub fn within_radius(&self, query: Vec3, radius: f64) -> Vec<(usize, f64)> {
        let mut hits: Vec<(f64, u32)> = Vec::new();
        if radius >= 0.0 {
            self.collect_radius(self.root, query, radius * radius, &mut hits);
        }
        hits.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        hits.into_iter()
            .map(|(d2, i)| (i as usize, d2.sqrt()))
            .collect()
    }

    fn collect_radius(&self, node: u32, query: Vec3, r2: f64, hits: &mut Vec<(f64, u32)>) {
        if node == NIL {
            return;
        }
        let n = &self.nodes[node as usize];
        let p = self.points[n.point as usize];
        let d2 = (p - query).length_squared();
        if d2 <= r2 {
            hits.push((d2, n.point));
        }
        let delta = query.get(n.axis as usize) - p.get(n.axis as usize);
        let (near, far) = if delta < 0.0 {
            (n.left, n.right)
        } else {
            (n.right, n.left)
        };
        self.collect_radius(near, query, r2, hits);
        if delta * delta <= r2 {
            self.collect_radius(far, query, r2, hits);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_force(points: &[Vec3], query: Vec3, k: usize) -> Vec<(usize, f64)> {
        let mut all: Vec<(f64, usize)> = points
            .iter()
            .enumerate()
            .map(|(i, p)| ((*p - query).length_squared(), i))
            .collect();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        all.truncate(k);
        all.into_iter().map(|(d2, i)| (i, d2.sqrt())).collect()
    }

    fn random_points(rng: &mut impl Rng, n: usize) -> Vec<Vec3> {
        (0..n)
            .map(|_| {
                Vec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                )
            })
            .collect()
    }

    #[test]
    fn nearest_matches_brute_force_on_random_clouds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let points = random_points(&mut rng, 2000);
        let index = KnnIndex::build(&points).unwrap();
        for _ in 0..50 {
            let q = Vec3::new(
                rng.random_range(-1.2..1.2),
                rng.random_range(-1.2..1.2),
                rng.random_range(-1.2..1.2),
            );
            for k in [1usize, 5, 17] {
                let got = index.nearest(q, k);
                let want = brute_force(&points, q, k);
                assert_eq!(got.len(), want.len());
                for (g, w) in got.iter().zip(&want) {
                    assert_eq!(g.0, w.0, "query {q:?} k {k}");
                    approx::assert_relative_eq!(g.1, w.1, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn equidistant_ties_resolve_by_ascending_index() {
        // Four corners of a square, query at the center: all tied.
        let points = vec![
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(-1.0, 1.0, 0.0),
            Vec3::new(-1.0, -1.0, 0.0),
            Vec3::new(1.0, -1.0, 0.0),
        ];
        let index = KnnIndex::build(&points).unwrap();
        let got = index.nearest(Vec3::ZERO, 2);
        assert_eq!(got[0].0, 0);
        assert_eq!(got[1].0, 1);
    }

    #[test]
    fn k_larger_than_set_returns_everything_sorted() {
        let points = vec![
            Vec3::new(3.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
        ];
        let index = KnnIndex::build(&points).unwrap();
        let got = index.nearest(Vec3::ZERO, 10);
        assert_eq!(got.len(), 3);
        assert_eq!(
            got.iter().map(|g| g.0).collect::<Vec<_>>(),
            vec![1, 2, 0]
        );
        assert!(got.windows(2).all(|w| w[0].1 <= w[1].1));
    }

    #[test]
    fn within_radius_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let points = random_points(&mut rng, 500);
        let index = KnnIndex::build(&points).unwrap();
        for _ in 0..25 {
            let q = random_points(&mut rng, 1)[0];
            let r = rng.random_range(0.05..0.8);
            let got = index.within_radius(q, r);
            let mut want: Vec<(usize, f64)> = points
                .iter()
                .enumerate()
                .filter_map(|(i, p)| {
                    let d = p.distance(q);
                    (d <= r).then_some((i, d))
                })
                .collect();
            want.sort_by(|a, b| (a.1, a.0).partial_cmp(&(b.1, b.0)).unwrap());
            assert_eq!(got.len(), want.len());
            for (g, w) in got.iter().zip(&want) {
                assert_eq!(g.0, w.0);
            }
        }
    }

    #[test]
    fn non_finite_points_are_rejected() {
        let points = vec![Vec3::new(f64::NAN, 0.0, 0.0)];
        assert!(KnnIndex::build(&points).is_err());
    }
}
