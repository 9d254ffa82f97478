//! Ball-pivoting surface reconstruction.
//!
//! A ball of radius rho rolls over the point set: a seed triangle is one
//! the ball can rest on without swallowing any other point, and the front
//! then grows by pivoting the ball around boundary edges. Larger radii
//! reuse the open front left by smaller ones, so multi-radius runs fill
//! regions a small ball falls through.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::knn::KnnIndex;
use crate::math::Vec3;
use crate::renderable::TriMesh;

const EMPTY_BALL_TOL: f64 = 1e-9;

/// Circumcenter and circumradius of a triangle in 3D; `None` when the
/// points are (near-)collinear.
fn circumcircle(a: Vec3, b: Vec3, c: Vec3) -> Option<(Vec3, f64)> {
    let e1 = b - a;
    let e2 = c - a;
    let n = e1.cross(e2);
    let n2 = n.length_squared();
    let scale = e1.length_squared().max(e2.length_squared());
    if n2 <= 1e-24 * scale * scale {
        return None;
    }
    let center =
        a + (e2.cross(n) * e1.length_squared() + n.cross(e1) * e2.length_squared())
            / (2.0 * n2);
    Some((center, (center - a).length()))
}

fn undirected(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

struct Bpa<'a> {
    points: &'a [Vec3],
    normals: Vec<Vec3>,
    index: KnnIndex,
    faces: Vec<[u32; 3]>,
    /// Undirected edge -> number of incident faces (at most 2).
    edge_faces: HashMap<(u32, u32), u8>,
    /// Directed edges of emitted faces, for orientation conflicts.
    directed: HashSet<(u32, u32)>,
    /// Open boundary: directed edge -> center of the ball that created
    /// its triangle.
    front: HashMap<(u32, u32), Vec3>,
    active: VecDeque<(u32, u32)>,
    used: Vec<bool>,
    front_deg: Vec<u32>,
    seed_cursor: usize,
}

impl<'a> Bpa<'a> {
    fn new(points: &'a [Vec3], normals: Vec<Vec3>) -> Result<Self> {
        Ok(Bpa {
            index: KnnIndex::build(points)?,
            points,
            normals,
            faces: Vec::new(),
            edge_faces: HashMap::new(),
            directed: HashSet::new(),
            front: HashMap::new(),
            active: VecDeque::new(),
            used: vec![false; points.len()],
            front_deg: vec![0; points.len()],
            seed_cursor: 0,
        })
    }

    /// A vertex may join a new triangle while it is unused or still on
    /// the front; interior vertices are closed off.
    fn usable(&self, v: u32) -> bool {
        !self.used[v as usize] || self.front_deg[v as usize] > 0
    }

    fn edge_count(&self, a: u32, b: u32) -> u8 {
        *self.edge_faces.get(&undirected(a, b)).unwrap_or(&0)
    }

    /// Tangent ball resting on the triangle `(a, b, c)` on the side its
    /// winding normal points to, or `None` if no such empty ball exists.
    fn ball_center(&self, a: u32, b: u32, c: u32, rho: f64) -> Option<Vec3> {
        let (pa, pb, pc) = (
            self.points[a as usize],
            self.points[b as usize],
            self.points[c as usize],
        );
        let (cc, r) = circumcircle(pa, pb, pc)?;
        if r > rho {
            return None;
        }
        let nt = (pb - pa).cross(pc - pa).normalized();
        let orient =
            nt.dot(self.normals[a as usize] + self.normals[b as usize] + self.normals[c as usize]);
        if orient <= 0.0 {
            return None;
        }
        let h = (rho * rho - r * r).max(0.0).sqrt();
        let center = cc + nt * h;
        if !self.ball_is_empty(center, rho, [a, b, c]) {
            return None;
        }
        Some(center)
    }

    fn ball_is_empty(&self, center: Vec3, rho: f64, touching: [u32; 3]) -> bool {
        let limit = rho * (1.0 - EMPTY_BALL_TOL);
        for (i, _) in self.index.within_radius(center, limit) {
            let i = i as u32;
            if !touching.contains(&i) {
                return false;
            }
        }
        true
    }

    fn add_front_edge(&mut self, from: u32, to: u32, center: Vec3) {
        // A reversed twin on the front means both sides now have faces:
        // glue the edges away instead of adding.
        if self.front.remove(&(to, from)).is_some() {
            self.front_deg[from as usize] -= 1;
            self.front_deg[to as usize] -= 1;
            return;
        }
        if self.front.insert((from, to), center).is_none() {
            self.front_deg[from as usize] += 1;
            self.front_deg[to as usize] += 1;
            self.active.push_back((from, to));
        }
    }

    fn commit(&mut self, tri: [u32; 3], center: Vec3) {
        self.faces.push(tri);
        for k in 0..3 {
            let (f, t) = (tri[k], tri[(k + 1) % 3]);
            *self.edge_faces.entry(undirected(f, t)).or_insert(0) += 1;
            self.directed.insert((f, t));
            self.used[f as usize] = true;
        }
        for k in 0..3 {
            let (f, t) = (tri[k], tri[(k + 1) % 3]);
            self.add_front_edge(f, t, center);
        }
    }

    /// Candidate filter shared by seeding and pivoting: topology must stay
    /// orientable with every edge on at most two faces.
    fn triangle_allowed(&self, tri: [u32; 3]) -> bool {
        for k in 0..3 {
            let (f, t) = (tri[k], tri[(k + 1) % 3]);
            if self.edge_count(f, t) >= 2 || self.directed.contains(&(f, t)) {
                return false;
            }
        }
        true
    }

    /// Rolls the ball around front edge `(u, v)`; returns the vertex and
    /// ball center reached first.
    fn find_pivot(&self, u: u32, v: u32, rho: f64) -> Option<(u32, Vec3)> {
        let pu = self.points[u as usize];
        let pv = self.points[v as usize];
        let mid = (pu + pv) * 0.5;
        let axis = (pv - pu).normalized();
        let prev = self.front[&(u, v)];
        let mut r1 = prev - mid;
        r1 = r1 - axis * r1.dot(axis);
        if r1.length_squared() < 1e-24 {
            return None;
        }
        let r1 = r1.normalized();

        let mut order: Vec<(f64, u32)> = Vec::new();
        let mut centers: HashMap<u32, Vec3> = HashMap::new();
        for (k, _) in self.index.within_radius(mid, 2.0 * rho) {
            let k = k as u32;
            if k == u || k == v || !self.usable(k) {
                continue;
            }
            let tri = [v, u, k];
            if !self.triangle_allowed(tri) {
                continue;
            }
            // Positive rotation around the directed edge moves the ball
            // away from the existing triangle, so the smallest angle is
            // the first point the ball touches.
            let Some(center) = self.pivot_center(u, v, k, rho) else {
                continue;
            };
            let mut r2 = center - mid;
            r2 = r2 - axis * r2.dot(axis);
            if r2.length_squared() < 1e-24 {
                continue;
            }
            let r2 = r2.normalized();
            let mut theta = axis.dot(r1.cross(r2)).atan2(r1.dot(r2));
            if theta < 1e-12 {
                theta += 2.0 * std::f64::consts::PI;
            }
            order.push((theta, k));
            centers.insert(k, center);
        }
        order.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        for (_, k) in order {
            let center = centers[&k];
            if self.ball_is_empty(center, rho, [u, v, k]) {
                return Some((k, center));
            }
        }
        None
    }

    /// Ball center for the pivot candidate, without the empty test (done
    /// lazily in rotation order by the caller).
    fn pivot_center(&self, u: u32, v: u32, k: u32, rho: f64) -> Option<Vec3> {
        let (pu, pv, pk) = (
            self.points[u as usize],
            self.points[v as usize],
            self.points[k as usize],
        );
        let (cc, r) = circumcircle(pv, pu, pk)?;
        if r > rho {
            return None;
        }
        let nt = (pu - pv).cross(pk - pv).normalized();
        let orient = nt.dot(
            self.normals[u as usize] + self.normals[v as usize] + self.normals[k as usize],
        );
        if orient <= 0.0 {
            return None;
        }
        Some(cc + nt * (rho * rho - r * r).max(0.0).sqrt())
    }

    /// Finds the lowest-index orphan vertex that can seat the ball with
    /// two usable neighbors.
    fn find_seed(&mut self, rho: f64) -> Option<([u32; 3], Vec3)> {
        while self.seed_cursor < self.points.len() {
            let a = self.seed_cursor as u32;
            if self.used[a as usize] {
                self.seed_cursor += 1;
                continue;
            }
            let mut near: Vec<(usize, f64)> = self
                .index
                .within_radius(self.points[a as usize], 2.0 * rho)
                .into_iter()
                .filter(|&(i, _)| i as u32 != a && self.usable(i as u32))
                .collect();
            near.sort_unstable_by(|x, y| {
                (x.1, x.0).partial_cmp(&(y.1, y.0)).unwrap()
            });
            for bi in 0..near.len() {
                for ci in bi + 1..near.len() {
                    let (b, c) = (near[bi].0 as u32, near[ci].0 as u32);
                    for tri in [[a, b, c], [a, c, b]] {
                        if !self.triangle_allowed(tri) {
                            continue;
                        }
                        if let Some(center) = self.ball_center(tri[0], tri[1], tri[2], rho) {
                            return Some((tri, center));
                        }
                    }
                }
            }
            self.seed_cursor += 1;
        }
        None
    }

    fn run_radius(&mut self, rho: f64) {
        // Boundary edges frozen at a smaller radius get another chance.
        self.active = self.front.keys().copied().collect::<Vec<_>>().into();
        self.active.make_contiguous().sort_unstable();
        loop {
            while let Some((u, v)) = self.active.pop_front() {
                if !self.front.contains_key(&(u, v)) {
                    continue;
                }
                if let Some((k, center)) = self.find_pivot(u, v, rho) {
                    // commit glues (v, u) against the live (u, v) entry.
                    self.commit([v, u, k], center);
                }
                // On failure the edge stays on the front as a boundary
                // for the next radius.
            }
            match self.find_seed(rho) {
                Some((tri, center)) => self.commit(tri, center),
                None => break,
            }
        }
    }
}

/// Reconstructs a triangle mesh over `points` by pivoting balls of the
/// given radii, smallest first. Output vertices are the input points in
/// their original order; `normals` must be unit and consistently oriented.
pub fn ball_pivot(points: &[Vec3], normals: &[Vec3], radii: &[f64]) -> Result<TriMesh> {
    if points.len() < 3 {
        return Err(Error::InsufficientPoints {
            needed: 3,
            got: points.len(),
        });
    }
    if normals.len() != points.len() {
        return Err(Error::InvalidGeometry(format!(
            "{} normals for {} points",
            normals.len(),
            points.len()
        )));
    }
    if radii.is_empty() {
        return Err(Error::InvalidSettings("no pivot radii given".into()));
    }
    if radii.iter().any(|r| !r.is_finite() || *r <= 0.0) {
        return Err(Error::InvalidSettings(
            "pivot radii must be positive and finite".into(),
        ));
    }
    if radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSettings(
            "pivot radii must be strictly ascending".into(),
        ));
    }
    let mut unit_normals = Vec::with_capacity(normals.len());
    for n in normals {
        let len = n.length();
        if !(len.is_finite() && len > 1e-12) {
            return Err(Error::InvalidGeometry(
                "point normals must be nonzero".into(),
            ));
        }
        unit_normals.push(*n / len);
    }

    let mut bpa = Bpa::new(points, unit_normals)?;
    for &rho in radii {
        bpa.seed_cursor = 0;
        bpa.run_radius(rho);
    }
    if bpa.faces.is_empty() {
        return Err(Error::EmptyReconstruction);
    }
    TriMesh::new(points.to_vec(), bpa.faces)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn up(n: usize) -> Vec<Vec3> {
        vec![Vec3::Z; n]
    }

    /// Recomputed resting ball for an output face, mirroring the
    /// construction so tests can brute-force the empty-ball property.
    fn face_ball(mesh: &TriMesh, face: usize, normals: &[Vec3], rho: f64) -> (Vec3, f64) {
        let [a, b, c] = mesh.faces[face];
        let (pa, pb, pc) = (
            mesh.vertices[a as usize],
            mesh.vertices[b as usize],
            mesh.vertices[c as usize],
        );
        let (cc, r) = circumcircle(pa, pb, pc).expect("output face is not degenerate");
        let mut nt = (pb - pa).cross(pc - pa).normalized();
        if nt.dot(normals[a as usize] + normals[b as usize] + normals[c as usize]) < 0.0 {
            nt = -nt;
        }
        (cc + nt * (rho * rho - r * r).max(0.0).sqrt(), r)
    }

    #[test]
    fn three_points_make_exactly_one_triangle() {
        let pts = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.2, 0.8, 0.0),
        ];
        let mesh = ball_pivot(&pts, &up(3), &[2.0]).unwrap();
        assert_eq!(mesh.faces.len(), 1);
        assert_eq!(mesh.vertices, pts);
        let mut ids = mesh.faces[0].to_vec();
        ids.sort_unstable();
        assert_eq!(ids, vec![0, 1, 2]);
        // Winding agrees with the +Z normals.
        assert!(mesh.face_normal(0).z > 0.0);
    }

    #[test]
    fn ball_smaller_than_point_spacing_reconstructs_nothing() {
        let pts: Vec<Vec3> = (0..9)
            .map(|i| Vec3::new((i % 3) as f64 * 0.05, (i / 3) as f64 * 0.05, 0.0))
            .collect();
        assert!(matches!(
            ball_pivot(&pts, &up(9), &[0.02]),
            Err(Error::EmptyReconstruction)
        ));
    }

    #[test]
    fn grid_gets_full_fans_and_every_face_ball_is_empty() {
        let n = 21;
        let spacing = 0.05;
        let rho = 0.08;
        let pts: Vec<Vec3> = (0..n * n)
            .map(|i| Vec3::new((i % n) as f64 * spacing, (i / n) as f64 * spacing, 0.0))
            .collect();
        let normals = up(pts.len());
        let mesh = ball_pivot(&pts, &normals, &[rho]).unwrap();

        // Empty-ball property, brute force over every point/face pair.
        let limit = rho * (1.0 - 2e-9);
        for f in 0..mesh.faces.len() {
            let (center, r) = face_ball(&mesh, f, &normals, rho);
            assert!(r <= rho * (1.0 + 1e-12));
            for (i, p) in pts.iter().enumerate() {
                if mesh.faces[f].contains(&(i as u32)) {
                    continue;
                }
                assert!(
                    (*p - center).length() >= limit,
                    "point {i} sits inside the ball of face {f}"
                );
            }
        }

        // Every interior vertex is fully surrounded: incident corner
        // angles sum to a whole turn.
        let mut angle = vec![0.0f64; pts.len()];
        for f in &mesh.faces {
            for k in 0..3 {
                let v = f[k] as usize;
                let a = pts[v];
                let e1 = (pts[f[(k + 1) % 3] as usize] - a).normalized();
                let e2 = (pts[f[(k + 2) % 3] as usize] - a).normalized();
                angle[v] += e1.dot(e2).clamp(-1.0, 1.0).acos();
            }
        }
        for row in 1..n - 1 {
            for col in 1..n - 1 {
                let v = row * n + col;
                assert!(
                    (angle[v] - 2.0 * std::f64::consts::PI).abs() < 1e-6,
                    "vertex {v} fan covers {} rad",
                    angle[v]
                );
            }
        }

        // No edge is used more than twice.
        let mut counts: HashMap<(u32, u32), u8> = HashMap::new();
        for f in &mesh.faces {
            for k in 0..3 {
                *counts.entry(undirected(f[k], f[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        assert!(counts.values().all(|&c| c <= 2));
    }

    #[test]
    fn second_radius_fills_holes_the_first_cannot_bridge() {
        // A coarse 3x3 patch with a sparse far column: the small ball
        // meshes the patch, only the large one reaches the outliers.
        let mut pts: Vec<Vec3> = (0..9)
            .map(|i| Vec3::new((i % 3) as f64 * 0.1, (i / 3) as f64 * 0.1, 0.0))
            .collect();
        pts.push(Vec3::new(0.5, 0.0, 0.0));
        pts.push(Vec3::new(0.5, 0.1, 0.0));
        pts.push(Vec3::new(0.5, 0.2, 0.0));
        let normals = up(pts.len());
        let small = ball_pivot(&pts, &normals, &[0.12]).unwrap();
        let touches_outlier = |mesh: &TriMesh| {
            mesh.faces
                .iter()
                .any(|f| f.iter().any(|&v| v >= 9))
        };
        assert!(!touches_outlier(&small));
        let both = ball_pivot(&pts, &normals, &[0.12, 0.45]).unwrap();
        assert!(touches_outlier(&both));
        assert!(both.faces.len() > small.faces.len());
    }

    #[test]
    fn input_validation_rejects_bad_radii_and_mismatched_normals() {
        let pts = vec![Vec3::ZERO, Vec3::X, Vec3::Y];
        assert!(ball_pivot(&pts, &up(2), &[1.0]).is_err());
        assert!(ball_pivot(&pts, &up(3), &[]).is_err());
        assert!(ball_pivot(&pts, &up(3), &[0.5, 0.5]).is_err());
        assert!(ball_pivot(&pts, &up(3), &[-1.0]).is_err());
        assert!(matches!(
            ball_pivot(&pts[..2], &up(2), &[1.0]),
            Err(Error::InsufficientPoints { needed: 3, got: 2 })
        ));
    }
}
