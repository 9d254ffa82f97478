//! Quadric edge-collapse mesh simplification.
//!
//! Every vertex carries the sum of squared-distance quadrics of its
//! incident face planes (area weighted, plus stiff planes pinning open
//! boundaries). Edges collapse cheapest-first into the position that
//! minimizes the combined quadric; collapses that would flip a surviving
//! face normal are rejected.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::linalg::solve3;
use crate::math::{Mat3, Vec3};
use crate::renderable::TriMesh;

const BOUNDARY_WEIGHT: f64 = 1e3;

/// Symmetric 4x4 quadric, upper triangle only.
#[derive(Debug, Clone, Copy, Default)]
struct Quadric {
    a: [f64; 6], // a11 a12 a13 a22 a23 a33
    b: Vec3,
    c: f64,
}

impl Quadric {
    fn plane(n: Vec3, d: f64, w: f64) -> Quadric {
        Quadric {
            a: [
                w * n.x * n.x,
                w * n.x * n.y,
                w * n.x * n.z,
                w * n.y * n.y,
                w * n.y * n.z,
                w * n.z * n.z,
            ],
            b: n * (w * d),
            c: w * d * d,
        }
    }

    fn add(&mut self, o: &Quadric) {
        for k in 0..6 {
            self.a[k] += o.a[k];
        }
        self.b += o.b;
        self.c += o.c;
    }

    fn matrix(&self) -> Mat3 {
        Mat3::from_rows(
            [self.a[0], self.a[1], self.a[2]],
            [self.a[1], self.a[3], self.a[4]],
            [self.a[2], self.a[4], self.a[5]],
        )
    }

    fn error(&self, v: Vec3) -> f64 {
        let av = self.matrix().mul_vec(v);
        v.dot(av) + 2.0 * self.b.dot(v) + self.c
    }

    /// Minimizer of the quadric, when the system is well conditioned.
    fn optimum(&self) -> Option<Vec3> {
        solve3(&self.matrix(), -self.b, 1e-12)
    }
}

#[derive(Debug, Clone, Copy)]
struct Collapse {
    cost: f64,
    a: u32,
    b: u32,
    va: u32,
    vb: u32,
    pos: Vec3,
}

impl PartialEq for Collapse {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Collapse {}
impl PartialOrd for Collapse {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Collapse {
    fn cmp(&self, o: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap, we want the cheapest edge.
        o.cost
            .total_cmp(&self.cost)
            .then(o.a.cmp(&self.a))
            .then(o.b.cmp(&self.b))
    }
}

struct Mesh {
    positions: Vec<Vec3>,
    faces: Vec<[u32; 3]>,
    alive_v: Vec<bool>,
    alive_f: Vec<bool>,
    quadrics: Vec<Quadric>,
    v_faces: Vec<Vec<u32>>,
    version: Vec<u32>,
    live_faces: usize,
}

impl Mesh {
    fn neighbors(&self, v: u32) -> Vec<u32> {
        let mut out: Vec<u32> = self.v_faces[v as usize]
            .iter()
            .filter(|&&f| self.alive_f[f as usize])
            .flat_map(|&f| self.faces[f as usize])
            .filter(|&u| u != v)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn face_normal(&self, f: u32) -> Vec3 {
        let [a, b, c] = self.faces[f as usize];
        (self.positions[b as usize] - self.positions[a as usize])
            .cross(self.positions[c as usize] - self.positions[a as usize])
    }

    /// Cheapest placement for collapsing `(a, b)`: the quadric optimum
    /// when solvable, otherwise the best of the endpoints and midpoint.
    fn plan(&self, a: u32, b: u32) -> (Vec3, f64) {
        let mut q = self.quadrics[a as usize];
        q.add(&self.quadrics[b as usize]);
        let pa = self.positions[a as usize];
        let pb = self.positions[b as usize];
        let mut best = (pa, q.error(pa));
        for cand in [pb, (pa + pb) * 0.5] {
            let e = q.error(cand);
            if e < best.1 {
                best = (cand, e);
            }
        }
        if let Some(opt) = q.optimum() {
            let e = q.error(opt);
            if opt.is_finite() && e < best.1 {
                best = (opt, e);
            }
        }
        best
    }

    /// Rejects collapses that break the local disk topology or rotate a
    /// surviving face normal by more than 90 degrees.
    fn collapse_ok(&self, a: u32, b: u32, pos: Vec3) -> bool {
        let dying: Vec<u32> = self.v_faces[a as usize]
            .iter()
            .copied()
            .filter(|&f| {
                self.alive_f[f as usize] && self.faces[f as usize].contains(&b)
            })
            .collect();
        let mut dying_opposites: HashSet<u32> = HashSet::new();
        for &f in &dying {
            for v in self.faces[f as usize] {
                if v != a && v != b {
                    dying_opposites.insert(v);
                }
            }
        }
        // Link condition: shared neighbors beyond the dying faces'
        // opposite corners would pinch the surface.
        let nb: HashSet<u32> = self.neighbors(b).into_iter().collect();
        for v in self.neighbors(a) {
            if nb.contains(&v) && !dying_opposites.contains(&v) {
                return false;
            }
        }
        for &v in &[a, b] {
            for &f in &self.v_faces[v as usize] {
                if !self.alive_f[f as usize] || dying.contains(&f) {
                    continue;
                }
                let before = self.face_normal(f);
                let [x, y, z] = self.faces[f as usize];
                let at = |i: u32| {
                    if i == a || i == b {
                        pos
                    } else {
                        self.positions[i as usize]
                    }
                };
                let after = (at(y) - at(x)).cross(at(z) - at(x));
                let scale = before.length() * after.length();
                if scale <= 1e-24 || before.dot(after) <= 0.0 {
                    return false;
                }
            }
        }
        true
    }

    fn collapse(&mut self, a: u32, b: u32, pos: Vec3) {
        self.positions[a as usize] = pos;
        let qb = self.quadrics[b as usize];
        self.quadrics[a as usize].add(&qb);
        self.alive_v[b as usize] = false;
        let b_faces = std::mem::take(&mut self.v_faces[b as usize]);
        for f in b_faces {
            if !self.alive_f[f as usize] {
                continue;
            }
            if self.faces[f as usize].contains(&a) {
                self.alive_f[f as usize] = false;
                self.live_faces -= 1;
            } else {
                for v in self.faces[f as usize].iter_mut() {
                    if *v == b {
                        *v = a;
                    }
                }
                self.v_faces[a as usize].push(f);
            }
        }
        self.v_faces[a as usize]
            .retain({
                let alive_f = &self.alive_f;
                move |&f| alive_f[f as usize]
            });
        self.v_faces[a as usize].sort_unstable();
        self.v_faces[a as usize].dedup();
        self.version[a as usize] += 1;
        self.version[b as usize] += 1;
    }
}

/// Collapses edges until at most `target_faces` faces remain. The flag is
/// false when no further collapse was possible before reaching the
/// target (the mesh returned is the best achieved).
pub fn simplify_mesh(mesh: &TriMesh, target_faces: usize) -> Result<(TriMesh, bool)> {
    if target_faces < 4 {
        return Err(Error::InvalidTarget(target_faces));
    }
    if mesh.faces.len() <= target_faces {
        return Ok((mesh.clone(), true));
    }

    let mut m = Mesh {
        positions: mesh.vertices.clone(),
        faces: mesh.faces.clone(),
        alive_v: vec![true; mesh.vertices.len()],
        alive_f: vec![true; mesh.faces.len()],
        quadrics: vec![Quadric::default(); mesh.vertices.len()],
        v_faces: vec![Vec::new(); mesh.vertices.len()],
        version: vec![0; mesh.vertices.len()],
        live_faces: mesh.faces.len(),
    };

    let mut edge_use: HashMap<(u32, u32), u8> = HashMap::new();
    for (fi, f) in mesh.faces.iter().enumerate() {
        for k in 0..3 {
            m.v_faces[f[k] as usize].push(fi as u32);
            let (x, y) = (f[k].min(f[(k + 1) % 3]), f[k].max(f[(k + 1) % 3]));
            let uses = edge_use.entry((x, y)).or_insert(0);
            *uses += 1;
            if *uses > 2 {
                return Err(Error::InvalidGeometry(format!(
                    "edge ({x}, {y}) is shared by more than two faces"
                )));
            }
        }
        let n = mesh.face_normal(fi);
        let area2 = n.length();
        if area2 <= 1e-24 {
            continue;
        }
        let nhat = n / area2;
        let q = Quadric::plane(nhat, -nhat.dot(mesh.vertices[f[0] as usize]), 0.5 * area2);
        for v in f {
            m.quadrics[*v as usize].add(&q);
        }
    }
    // Boundary edges are pinned by a perpendicular plane through the
    // edge, so open rims cannot drift inward.
    for ((x, y), uses) in &edge_use {
        if *uses != 1 {
            continue;
        }
        let face = m.v_faces[*x as usize]
            .iter()
            .find(|&&f| mesh.faces[f as usize].contains(y))
            .copied();
        let Some(face) = face else { continue };
        let px = mesh.vertices[*x as usize];
        let py = mesh.vertices[*y as usize];
        let edge = py - px;
        let n = mesh.face_normal(face as usize).cross(edge);
        let len = n.length();
        if len <= 1e-24 {
            continue;
        }
        let nhat = n / len;
        let q = Quadric::plane(nhat, -nhat.dot(px), BOUNDARY_WEIGHT * edge.length_squared());
        m.quadrics[*x as usize].add(&q);
        m.quadrics[*y as usize].add(&q);
    }

    let mut heap: BinaryHeap<Collapse> = BinaryHeap::new();
    let push = |m: &Mesh, heap: &mut BinaryHeap<Collapse>, a: u32, b: u32| {
        let (a, b) = (a.min(b), a.max(b));
        let (pos, cost) = m.plan(a, b);
        heap.push(Collapse {
            cost,
            a,
            b,
            va: m.version[a as usize],
            vb: m.version[b as usize],
            pos,
        });
    };
    for (x, y) in edge_use.keys() {
        push(&m, &mut heap, *x, *y);
    }

    while m.live_faces > target_faces {
        let Some(top) = heap.pop() else {
            break;
        };
        let (a, b) = (top.a, top.b);
        if !m.alive_v[a as usize]
            || !m.alive_v[b as usize]
            || top.va != m.version[a as usize]
            || top.vb != m.version[b as usize]
        {
            continue;
        }
        if !m.collapse_ok(a, b, top.pos) {
            continue;
        }
        m.collapse(a, b, top.pos);
        for n in m.neighbors(a) {
            push(&m, &mut heap, a, n);
        }
    }
    let reached = m.live_faces <= target_faces;

    let mut remap = vec![u32::MAX; m.positions.len()];
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (fi, f) in m.faces.iter().enumerate() {
        if !m.alive_f[fi] {
            continue;
        }
        let mut out = [0u32; 3];
        for (k, &v) in f.iter().enumerate() {
            if remap[v as usize] == u32::MAX {
                remap[v as usize] = vertices.len() as u32;
                vertices.push(m.positions[v as usize]);
            }
            out[k] = remap[v as usize];
        }
        faces.push(out);
    }
    Ok((TriMesh::new(vertices, faces)?, reached))
}
