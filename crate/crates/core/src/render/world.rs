//! Flattened, world-space view of a scene prepared for ray queries.

use super::bvh::Bvh;
use super::intersect::{ray_sphere, ray_triangle, Aabb};
use crate::appearance::{shade_color, wireframe_factor, Material};
use crate::error::Result;
use crate::light::Light;
use crate::math::Vec3;
use crate::renderable::{point_instances, PointInstance, PointShape, TriMesh};
use crate::scene::{Renderable, Scene};

/// Minimum parametric distance for secondary rays.
pub const T_MIN: f64 = 1e-7;

const CUBE_CORNERS: [[f64; 3]; 8] = [
    [-1.0, -1.0, -1.0],
    [1.0, -1.0, -1.0],
    [1.0, 1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
    [1.0, -1.0, 1.0],
    [1.0, 1.0, 1.0],
    [-1.0, 1.0, 1.0],
];

const CUBE_FACES: [[usize; 3]; 12] = [
    [0, 2, 1],
    [0, 3, 2],
    [4, 5, 6],
    [4, 6, 7],
    [0, 1, 5],
    [0, 5, 4],
    [2, 3, 7],
    [2, 7, 6],
    [0, 4, 7],
    [0, 7, 3],
    [1, 2, 6],
    [1, 6, 5],
];

#[derive(Debug, Clone, Copy)]
enum Prim {
    Tri {
        a: Vec3,
        b: Vec3,
        c: Vec3,
        src: TriSrc,
    },
    Sphere {
        center: Vec3,
        radius: f64,
        inst: u32,
    },
}

#[derive(Debug, Clone, Copy)]
enum TriSrc {
    Mesh { mesh: u32, face: u32 },
    Cube { inst: u32 },
}

struct MeshGeom<'s> {
    mesh: &'s TriMesh,
    world_vertices: Vec<Vec3>,
    world_normals: Option<Vec<Vec3>>,
}

#[derive(Debug, Clone, Copy)]
pub struct Hit {
    pub t: f64,
    pub prim: u32,
    /// Barycentric weights of the second and third triangle corners;
    /// unused for spheres.
    pub u: f64,
    pub v: f64,
}

/// Everything the integrator needs at a committed hit point.
pub struct Shading<'w> {
    pub point: Vec3,
    /// Unit geometric normal, oriented toward the incoming ray's origin.
    pub n_geom: Vec3,
    /// Unit shading normal, same orientation.
    pub n_shade: Vec3,
    pub material: &'w Material,
    /// Bound color after any wireframe override; the BSDF applies material
    /// modulation itself.
    pub base_rgb: [f64; 3],
    /// Material alpha times bound color alpha.
    pub opacity: f64,
    /// Emitted radiance.
    pub emission: [f64; 3],
    pub catcher: bool,
}

pub struct World<'s> {
    meshes: Vec<MeshGeom<'s>>,
    instances: Vec<PointInstance>,
    prims: Vec<Prim>,
    /// Per-prim shadow-catcher flag, mirroring `prims`.
    catcher: Vec<bool>,
    bvh: Bvh,
    instance_material: Material,
    /// Non-background lights, in tag order.
    pub lights: Vec<&'s Light>,
    /// Area lights reachable by scattered rays, for MIS accounting.
    pub area_mis_lights: Vec<&'s Light>,
    /// Summed background radiance.
    pub background: [f64; 3],
}

impl<'s> World<'s> {
    pub fn build(scene: &'s Scene) -> Result<World<'s>> {
        let mut meshes = Vec::new();
        let mut instances: Vec<PointInstance> = Vec::new();
        let mut prims = Vec::new();
        let mut catcher = Vec::new();

        for (_, renderable) in scene.renderables() {
            renderable.validate()?;
            match renderable {
                Renderable::Mesh(mesh) => {
                    let world_vertices: Vec<Vec3> = mesh
                        .vertices
                        .iter()
                        .map(|v| mesh.pose.transform_point(*v))
                        .collect();
                    let world_normals = mesh.normals.as_ref().map(|ns| {
                        ns.iter().map(|n| mesh.pose.rotation.rotate(*n)).collect()
                    });
                    let mesh_idx = meshes.len() as u32;
                    for (face, f) in mesh.faces.iter().enumerate() {
                        prims.push(Prim::Tri {
                            a: world_vertices[f[0] as usize],
                            b: world_vertices[f[1] as usize],
                            c: world_vertices[f[2] as usize],
                            src: TriSrc::Mesh {
                                mesh: mesh_idx,
                                face: face as u32,
                            },
                        });
                        catcher.push(mesh.shadow_catcher);
                    }
                    meshes.push(MeshGeom {
                        mesh,
                        world_vertices,
                        world_normals,
                    });
                }
                Renderable::PointCloud(pc) => {
                    for instance in point_instances(pc)? {
                        let inst = instances.len() as u32;
                        match instance.shape {
                            PointShape::Sphere => {
                                prims.push(Prim::Sphere {
                                    center: instance.center,
                                    radius: instance.radius,
                                    inst,
                                });
                                catcher.push(false);
                            }
                            PointShape::Cube => {
                                let corner = |i: usize| {
                                    instance.center
                                        + Vec3::new(
                                            CUBE_CORNERS[i][0],
                                            CUBE_CORNERS[i][1],
                                            CUBE_CORNERS[i][2],
                                        ) * instance.radius
                                };
                                for f in CUBE_FACES {
                                    prims.push(Prim::Tri {
                                        a: corner(f[0]),
                                        b: corner(f[1]),
                                        c: corner(f[2]),
                                        src: TriSrc::Cube { inst },
                                    });
                                    catcher.push(false);
                                }
                            }
                        }
                        instances.push(instance);
                    }
                }
            }
        }

        let mut lights = Vec::new();
        let mut area_mis_lights = Vec::new();
        let mut background = [0.0; 3];
        for (_, light) in scene.lights() {
            light.validate()?;
            if let Some(bg) = light.background_radiance() {
                for (acc, v) in background.iter_mut().zip(bg) {
                    *acc += v;
                }
            } else {
                lights.push(light);
                if matches!(light, Light::Area { .. }) && light.cast_shadow() {
                    area_mis_lights.push(light);
                }
            }
        }

        let bounds: Vec<Aabb> = prims
            .iter()
            .map(|p| match p {
                Prim::Tri { a, b, c, .. } => Aabb::of_points(&[*a, *b, *c]),
                Prim::Sphere { center, radius, .. } => Aabb {
                    lo: *center - Vec3::splat(*radius),
                    hi: *center + Vec3::splat(*radius),
                },
            })
            .collect();
        let bvh = Bvh::build(&bounds);

        Ok(World {
            meshes,
            instances,
            prims,
            catcher,
            bvh,
            instance_material: Material::default(),
            lights,
            area_mis_lights,
            background,
        })
    }

    pub fn has_background(&self) -> bool {
        self.background.iter().any(|v| *v > 0.0)
    }

    /// Closest hit with `t` in `(t_min, t_max)`. Shadow-catcher surfaces
    /// are only visible when `include_catcher` is set (camera rays).
    pub fn intersect(
        &self,
        origin: Vec3,
        dir: Vec3,
        t_min: f64,
        t_max: f64,
        include_catcher: bool,
    ) -> Option<Hit> {
        let mut best: Option<Hit> = None;
        let mut limit = t_max;
        self.bvh
            .walk_ray(origin, dir, t_min, &mut limit, &mut |idx, limit| {
                if !include_catcher && self.catcher[idx as usize] {
                    return true;
                }
                match &self.prims[idx as usize] {
                    Prim::Tri { a, b, c, .. } => {
                        if let Some((t, u, v)) =
                            ray_triangle(origin, dir, *a, *b, *c, t_min, *limit)
                        {
                            best = Some(Hit {
                                t,
                                prim: idx,
                                u,
                                v,
                            });
                            *limit = t;
                        }
                    }
                    Prim::Sphere { center, radius, .. } => {
                        if let Some(t) = ray_sphere(origin, dir, *center, *radius, t_min, *limit) {
                            best = Some(Hit {
                                t,
                                prim: idx,
                                u: 0.0,
                                v: 0.0,
                            });
                            *limit = t;
                        }
                    }
                }
                true
            });
        best
    }

    /// Fraction of light surviving the segment, accounting for partial
    /// opacity; shadow catchers never occlude.
    pub fn transmittance(&self, origin: Vec3, dir: Vec3, t_max: f64) -> Result<f64> {
        let mut product = 1.0;
        let mut t_cursor = T_MIN;
        for _ in 0..64 {
            let Some(hit) = self.intersect(origin, dir, t_cursor, t_max, false) else {
                return Ok(product);
            };
            let sh = self.shading(&hit, origin, dir)?;
            product *= 1.0 - sh.opacity;
            if product < 1e-6 {
                return Ok(0.0);
            }
            t_cursor = hit.t + T_MIN;
        }
        Ok(0.0)
    }

    pub fn shading(&self, hit: &Hit, origin: Vec3, dir: Vec3) -> Result<Shading<'_>> {
        match &self.prims[hit.prim as usize] {
            Prim::Tri { a, b, c, src } => {
                let bary = [1.0 - hit.u - hit.v, hit.u, hit.v];
                let point = *a * bary[0] + *b * bary[1] + *c * bary[2];
                let n_raw = (*b - *a).cross(*c - *a).normalized();
                let n_geom = orient(n_raw, dir);
                match src {
                    TriSrc::Mesh { mesh, face } => {
                        let geom = &self.meshes[*mesh as usize];
                        let m = geom.mesh;
                        let face = *face as usize;
                        let n_shade = match &geom.world_normals {
                            Some(ns) => {
                                let f = m.faces[face];
                                let n = ns[f[0] as usize] * bary[0]
                                    + ns[f[1] as usize] * bary[1]
                                    + ns[f[2] as usize] * bary[2];
                                orient(n.try_normalized().unwrap_or(n_raw), dir)
                            }
                            None => n_geom,
                        };
                        let rgba = shade_color(
                            m.vertices.len(),
                            &m.faces,
                            face,
                            bary,
                            &m.appearance.colors,
                        )?;
                        let mut base_rgb = [rgba[0], rgba[1], rgba[2]];
                        let full = m.face_material(face);
                        if let Material::WireframeOverlay {
                            thickness,
                            wire_color,
                            ..
                        } = full
                        {
                            let wire = wireframe_factor(
                                &geom.world_vertices,
                                &m.faces,
                                face,
                                bary,
                                *thickness,
                            );
                            for (v, w) in base_rgb.iter_mut().zip(wire_color) {
                                *v = *v * (1.0 - wire) + w * wire;
                            }
                        }
                        let material = full.inner();
                        let (emission, mat_alpha) = material_emission_alpha(material);
                        Ok(Shading {
                            point,
                            n_geom,
                            n_shade,
                            material,
                            base_rgb,
                            opacity: mat_alpha * rgba[3],
                            emission,
                            catcher: m.shadow_catcher,
                        })
                    }
                    TriSrc::Cube { inst } => Ok(self.instance_shading(
                        *inst, point, n_geom, n_geom,
                    )),
                }
            }
            Prim::Sphere {
                center,
                radius,
                inst,
            } => {
                let raw = origin + dir * hit.t - *center;
                let n_raw = raw.try_normalized().unwrap_or(Vec3::Z);
                let point = *center + n_raw * *radius;
                let n = orient(n_raw, dir);
                Ok(self.instance_shading(*inst, point, n, n))
            }
        }
    }

    fn instance_shading(&self, inst: u32, point: Vec3, n_geom: Vec3, n_shade: Vec3) -> Shading<'_> {
        let instance = &self.instances[inst as usize];
        let [r, g, b, a] = instance.color;
        Shading {
            point,
            n_geom,
            n_shade,
            material: &self.instance_material,
            base_rgb: [r, g, b],
            opacity: a,
            emission: [
                instance.emission * r,
                instance.emission * g,
                instance.emission * b,
            ],
            catcher: false,
        }
    }
}

fn orient(n: Vec3, ray_dir: Vec3) -> Vec3 {
    if n.dot(ray_dir) > 0.0 {
        -n
    } else {
        n
    }
}

fn material_emission_alpha(mat: &Material) -> ([f64; 3], f64) {
    match mat {
        Material::Principled {
            emission_color,
            emission_strength,
            alpha,
            ..
        } => (
            [
                emission_color[0] * emission_strength,
                emission_color[1] * emission_strength,
                emission_color[2] * emission_strength,
            ],
            *alpha,
        ),
        _ => ([0.0; 3], 1.0),
    }
}
