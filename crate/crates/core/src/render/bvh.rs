//! Bounding volume hierarchy over primitive bounding boxes.
//!
//! Median split on the widest centroid axis; the structure only prunes,
//! all hit logic lives with the caller, so the same tree serves ray casts
//! and nearest-point queries.

use super::intersect::Aabb;
use crate::math::Vec3;

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone)]
struct Node {
    bounds: Aabb,
    /// Left child index, or first entry in `order` for leaves.
    a: u32,
    /// Right child index, or entry count for leaves.
    b: u32,
    leaf: bool,
}

#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<u32>,
}

impl Bvh {
    pub fn build(bounds: &[Aabb]) -> Bvh {
        let mut order: Vec<u32> = (0..bounds.len() as u32).collect();
        let mut nodes = Vec::new();
        if !order.is_empty() {
            build_node(bounds, &mut order, 0, &mut nodes);
        }
        Bvh { nodes, order }
    }

    /// Walks leaves whose boxes the ray enters within `(t_min, *t_max)`.
    /// `visit` sees each candidate primitive index and may shrink `*t_max`
    /// to prune the rest of the walk.
    pub fn walk_ray(
        &self,
        origin: Vec3,
        dir: Vec3,
        t_min: f64,
        t_max: &mut f64,
        visit: &mut impl FnMut(u32, &mut f64) -> bool,
    ) {
        if self.nodes.is_empty() {
            return;
        }
        let inv_dir = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut stack: Vec<u32> = vec![0];
        while let Some(idx) = stack.pop() {
            let node = &self.nodes[idx as usize];
            if node
                .bounds
                .ray_entry(origin, inv_dir, t_min, *t_max)
                .is_none()
            {
                continue;
            }
            if node.leaf {
                for i in node.a..node.a + node.b {
                    if !visit(self.order[i as usize], t_max) {
                        return;
                    }
                }
            } else {
                // Push the farther child first so the nearer pops first.
                let la = self.nodes[node.a as usize]
                    .bounds
                    .ray_entry(origin, inv_dir, t_min, *t_max);
                let lb = self.nodes[node.b as usize]
                    .bounds
                    .ray_entry(origin, inv_dir, t_min, *t_max);
                match (la, lb) {
                    (Some(ta), Some(tb)) => {
                        if ta <= tb {
                            stack.push(node.b);
                            stack.push(node.a);
                        } else {
                            stack.push(node.a);
                            stack.push(node.b);
                        }
                    }
                    (Some(_), None) => stack.push(node.a),
                    (None, Some(_)) => stack.push(node.b),
                    (None, None) => {}
                }
            }
        }
    }

    /// Walks leaves whose boxes lie within `sqrt(*best_d2)` of `query`.
    /// `visit` may shrink `*best_d2`.
    pub fn walk_nearest(
        &self,
        query: Vec3,
        best_d2: &mut f64,
        visit: &mut impl FnMut(u32, &mut f64),
    ) {
        if self.nodes.is_empty() {
            return;
        }
        let mut stack: Vec<u32> = vec![0];
        while let Some(idx) = stack.pop() {
            let node = &self.nodes[idx as usize];
            if node.bounds.dist2(query) > *best_d2 {
                continue;
            }
            if node.leaf {
                for i in node.a..node.a + node.b {
                    visit(self.order[i as usize], best_d2);
                }
            } else {
                let da = self.nodes[node.a as usize].bounds.dist2(query);
                let db = self.nodes[node.b as usize].bounds.dist2(query);
                if da <= db {
                    stack.push(node.b);
                    stack.push(node.a);
                } else {
                    stack.push(node.a);
                    stack.push(node.b);
                }
            }
        }
    }
}

fn build_node(bounds: &[Aabb], order: &mut [u32], base: u32, nodes: &mut Vec<Node>) -> u32 {
    let node_bounds = order
        .iter()
        .fold(Aabb::EMPTY, |acc, &i| acc.union(bounds[i as usize]));
    let slot = nodes.len() as u32;
    if order.len() <= LEAF_SIZE {
        nodes.push(Node {
            bounds: node_bounds,
            a: base,
            b: order.len() as u32,
            leaf: true,
        });
        return slot;
    }
    let centroid_bounds = order.iter().fold(Aabb::EMPTY, |acc, &i| {
        acc.grown(bounds[i as usize].centroid())
    });
    let extent = centroid_bounds.hi - centroid_bounds.lo;
    let axis = if extent.x >= extent.y && extent.x >= extent.z {
        0
    } else if extent.y >= extent.z {
        1
    } else {
        2
    };
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&l, &r| {
        let kl = (bounds[l as usize].centroid().get(axis), l);
        let kr = (bounds[r as usize].centroid().get(axis), r);
        kl.partial_cmp(&kr).unwrap()
    });
    nodes.push(Node {
        bounds: node_bounds,
        a: 0,
        b: 0,
        leaf: false,
    });
    let (lo, hi) = order.split_at_mut(mid);
    let a = build_node(bounds, lo, base, nodes);
    let b = build_node(bounds, hi, base + mid as u32, nodes);
    nodes[slot as usize].a = a;
    nodes[slot as usize].b = b;
    slot
}
