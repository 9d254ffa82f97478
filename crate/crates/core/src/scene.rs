//! The scene container: tagged renderables and lights, one camera, render
//! settings.

use std::collections::BTreeMap;

use crate::camera::Camera;
use crate::error::{Error, Result};
use crate::light::Light;
use crate::math::{to_quaternion, Pose, RotationSpec, Vec3};
use crate::renderable::{PointCloud, TriMesh};

/// Nonempty identifier, unique within its collection.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tag(String);

impl Tag {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::InvalidGeometry("tags must be nonempty".into()));
        }
        Ok(Tag(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for Tag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone)]
pub enum Renderable {
    Mesh(TriMesh),
    PointCloud(PointCloud),
}

impl Renderable {
    pub fn kind(&self) -> &'static str {
        match self {
            Renderable::Mesh(_) => "mesh",
            Renderable::PointCloud(_) => "pointcloud",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Renderable::Mesh(m) => m.validate(),
            Renderable::PointCloud(pc) => pc.validate(),
        }
    }

    pub fn pose(&self) -> Pose {
        match self {
            Renderable::Mesh(m) => m.pose,
            Renderable::PointCloud(pc) => pc.pose,
        }
    }

    pub fn pose_mut(&mut self) -> &mut Pose {
        match self {
            Renderable::Mesh(m) => &mut m.pose,
            Renderable::PointCloud(pc) => &mut pc.pose,
        }
    }
}

impl From<TriMesh> for Renderable {
    fn from(m: TriMesh) -> Self {
        Renderable::Mesh(m)
    }
}

impl From<PointCloud> for Renderable {
    fn from(pc: PointCloud) -> Self {
        Renderable::PointCloud(pc)
    }
}

fn light_kind(light: &Light) -> &'static str {
    match light {
        Light::Background { .. } => "background",
        Light::Point { .. } => "point",
        Light::Directional { .. } => "directional",
        Light::Spot { .. } => "spot",
        Light::Area { .. } => "area",
    }
}

/// Which output passes to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Passes {
    pub color: bool,
    pub depth: bool,
    pub albedo: bool,
}

impl Default for Passes {
    fn default() -> Self {
        Passes {
            color: true,
            depth: true,
            albedo: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderSettings {
    pub resolution: (u32, u32),
    pub samples_per_pixel: u32,
    pub max_bounces: u32,
    pub seed: u64,
    pub passes: Passes,
}

impl Default for RenderSettings {
    fn default() -> Self {
        RenderSettings {
            resolution: (512, 512),
            samples_per_pixel: 16,
            max_bounces: 4,
            seed: 0,
            passes: Passes::default(),
        }
    }
}

impl RenderSettings {
    pub fn validate(&self) -> Result<()> {
        if self.resolution.0 == 0 || self.resolution.1 == 0 {
            return Err(Error::InvalidSettings("resolution must be at least 1x1".into()));
        }
        if self.samples_per_pixel == 0 {
            return Err(Error::InvalidSettings(
                "samples_per_pixel must be at least 1".into(),
            ));
        }
        if self.max_bounces == 0 {
            return Err(Error::InvalidSettings("max_bounces must be at least 1".into()));
        }
        Ok(())
    }
}

/// Root container for a renderable world.
#[derive(Debug, Clone, Default)]
pub struct Scene {
    renderables: BTreeMap<String, Renderable>,
    lights: BTreeMap<String, Light>,
    camera: Option<Camera>,
    pub settings: RenderSettings,
    counters: BTreeMap<&'static str, u64>,
}

impl Scene {
    pub fn new() -> Self {
        Scene::default()
    }

    fn auto_tag(
        counters: &mut BTreeMap<&'static str, u64>,
        taken: &BTreeMap<String, impl Sized>,
        kind: &'static str,
    ) -> String {
        loop {
            let counter = counters.entry(kind).or_insert(0);
            let candidate = format!("{kind}_{counter}");
            *counter += 1;
            if !taken.contains_key(&candidate) {
                return candidate;
            }
        }
    }

    /// Inserts a renderable, minting a `<kind>_<counter>` tag when none is
    /// given.
    pub fn add_renderable(
        &mut self,
        object: impl Into<Renderable>,
        tag: Option<&str>,
    ) -> Result<Tag> {
        let object = object.into();
        object.validate()?;
        let name = match tag {
            Some(name) => {
                let tag = Tag::new(name)?;
                if self.renderables.contains_key(name) {
                    return Err(Error::TagCollision(name.to_string()));
                }
                tag.0
            }
            None => Self::auto_tag(&mut self.counters, &self.renderables, object.kind()),
        };
        self.renderables.insert(name.clone(), object);
        Ok(Tag(name))
    }

    /// Inserts a light, minting a `<kind>_<counter>` tag when none is given.
    pub fn add_light(&mut self, light: Light, tag: Option<&str>) -> Result<Tag> {
        light.validate()?;
        let name = match tag {
            Some(name) => {
                let tag = Tag::new(name)?;
                if self.lights.contains_key(name) {
                    return Err(Error::TagCollision(name.to_string()));
                }
                tag.0
            }
            None => Self::auto_tag(&mut self.counters, &self.lights, light_kind(&light)),
        };
        self.lights.insert(name.clone(), light);
        Ok(Tag(name))
    }

    /// Removes the tagged renderable or light.
    pub fn remove(&mut self, tag: &str) -> Result<()> {
        if self.renderables.remove(tag).is_some() || self.lights.remove(tag).is_some() {
            Ok(())
        } else {
            Err(Error::NotFound(tag.to_string()))
        }
    }

    pub fn renderable(&self, tag: &str) -> Option<&Renderable> {
        self.renderables.get(tag)
    }

    pub fn renderable_mut(&mut self, tag: &str) -> Option<&mut Renderable> {
        self.renderables.get_mut(tag)
    }

    pub fn light(&self, tag: &str) -> Option<&Light> {
        self.lights.get(tag)
    }

    pub fn light_mut(&mut self, tag: &str) -> Option<&mut Light> {
        self.lights.get_mut(tag)
    }

    /// Renderables in tag order.
    pub fn renderables(&self) -> impl Iterator<Item = (&str, &Renderable)> {
        self.renderables.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Lights in tag order.
    pub fn lights(&self) -> impl Iterator<Item = (&str, &Light)> {
        self.lights.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn n_renderables(&self) -> usize {
        self.renderables.len()
    }

    pub fn n_lights(&self) -> usize {
        self.lights.len()
    }

    pub fn set_camera(&mut self, camera: Camera) -> Result<()> {
        camera.validate()?;
        self.camera = Some(camera);
        Ok(())
    }

    pub fn clear_camera(&mut self) {
        self.camera = None;
    }

    pub fn camera(&self) -> Option<&Camera> {
        self.camera.as_ref()
    }

    pub fn require_camera(&self) -> Result<&Camera> {
        self.camera.as_ref().ok_or(Error::MissingCamera)
    }

    /// Updates position and/or rotation of a tagged object; omitted
    /// components stay unchanged.
    pub fn set_pose(
        &mut self,
        tag: &str,
        position: Option<Vec3>,
        rotation: Option<&RotationSpec>,
    ) -> Result<()> {
        let rotation = rotation.map(to_quaternion).transpose()?;
        if let Some(obj) = self.renderables.get_mut(tag) {
            let pose = obj.pose_mut();
            if let Some(p) = position {
                pose.position = p;
            }
            if let Some(r) = rotation {
                pose.rotation = r;
            }
            return Ok(());
        }
        if let Some(light) = self.lights.get_mut(tag) {
            let pose = match light {
                Light::Background { .. } => {
                    return Err(Error::InvalidLight(
                        "background lights have no pose".into(),
                    ))
                }
                Light::Point { pose, .. }
                | Light::Directional { pose, .. }
                | Light::Spot { pose, .. }
                | Light::Area { pose, .. } => pose,
            };
            if let Some(p) = position {
                pose.position = p;
            }
            if let Some(r) = rotation {
                pose.rotation = r;
            }
            return Ok(());
        }
        Err(Error::NotFound(tag.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::renderable::{tessellate, PrimitiveSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cube() -> TriMesh {
        tessellate(&PrimitiveSpec::Cube { size: 1.0 }).unwrap()
    }

    fn point_light() -> Light {
        Light::Point {
            color: [1.0, 1.0, 1.0],
            strength: 10.0,
            radius: 0.0,
            cast_shadow: true,
            pose: Pose::IDENTITY,
        }
    }

    #[test]
    fn first_untagged_mesh_becomes_mesh_0() {
        let mut scene = Scene::new();
        let tag = scene.add_renderable(cube(), None).unwrap();
        assert_eq!(tag.as_str(), "mesh_0");
        assert!(scene.renderable("mesh_0").is_some());
        let tag = scene.add_renderable(cube(), None).unwrap();
        assert_eq!(tag.as_str(), "mesh_1");
    }

    #[test]
    fn explicit_tags_are_retrievable() {
        let mut scene = Scene::new();
        scene.add_renderable(cube(), Some("bunny")).unwrap();
        assert!(scene.renderable("bunny").is_some());
    }

    #[test]
    fn tag_collision_leaves_the_scene_unchanged() {
        let mut scene = Scene::new();
        scene.add_renderable(cube(), Some("a")).unwrap();
        let err = scene.add_renderable(cube(), Some("a")).unwrap_err();
        assert!(matches!(err, Error::TagCollision(_)));
        assert_eq!(scene.n_renderables(), 1);
    }

    #[test]
    fn remove_round_trip_and_unknown_tag() {
        let mut scene = Scene::new();
        let tag = scene.add_renderable(cube(), None).unwrap();
        scene.remove(tag.as_str()).unwrap();
        assert_eq!(scene.n_renderables(), 0);
        assert!(matches!(scene.remove("x"), Err(Error::NotFound(_))));
    }

    #[test]
    fn removing_a_light_leaves_renderables_untouched() {
        let mut scene = Scene::new();
        scene.add_renderable(cube(), Some("m")).unwrap();
        let light_tag = scene.add_light(point_light(), None).unwrap();
        assert_eq!(light_tag.as_str(), "point_0");
        scene.remove("point_0").unwrap();
        assert_eq!(scene.n_renderables(), 1);
        assert_eq!(scene.n_lights(), 0);
    }

    #[test]
    fn set_pose_updates_only_provided_components() {
        let mut scene = Scene::new();
        scene.add_renderable(cube(), Some("m")).unwrap();
        let rot = RotationSpec::AxisAngle {
            axis: Vec3::Z,
            angle: 1.0,
        };
        scene.set_pose("m", None, Some(&rot)).unwrap();
        let before = scene.renderable("m").unwrap().pose();
        scene
            .set_pose("m", Some(Vec3::new(1.0, 2.0, 3.0)), None)
            .unwrap();
        let after = scene.renderable("m").unwrap().pose();
        assert_eq!(after.position, Vec3::new(1.0, 2.0, 3.0));
        assert_eq!(after.rotation, before.rotation);
    }

    #[test]
    fn set_pose_half_turn_about_z_stores_the_expected_quaternion() {
        let mut scene = Scene::new();
        scene.add_renderable(cube(), Some("m")).unwrap();
        let rot = RotationSpec::AxisAngle {
            axis: Vec3::Z,
            angle: std::f64::consts::PI,
        };
        scene.set_pose("m", None, Some(&rot)).unwrap();
        let q = scene.renderable("m").unwrap().pose().rotation;
        let [w, x, y, z] = q.components();
        assert!(w.abs() < 1e-12 && x.abs() < 1e-12 && y.abs() < 1e-12);
        approx::assert_relative_eq!(z, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn scene_without_camera_rejects_render_requests() {
        let scene = Scene::new();
        assert!(matches!(scene.require_camera(), Err(Error::MissingCamera)));
    }

    #[test]
    fn randomized_interleavings_keep_counts_and_tags_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut scene = Scene::new();
        let mut live: Vec<String> = Vec::new();
        let mut seen: std::collections::BTreeSet<String> = Default::default();
        let mut adds = 0usize;
        let mut removes = 0usize;
        for _ in 0..1000 {
            if live.is_empty() || rng.random_bool(0.6) {
                let tag = if rng.random_bool(0.5) {
                    scene.add_renderable(cube(), None).unwrap()
                } else {
                    scene.add_light(point_light(), None).unwrap()
                };
                // Auto tags are never reused, even after removal.
                assert!(
                    seen.insert(tag.as_str().to_string()),
                    "auto tag {tag} reissued"
                );
                live.push(tag.as_str().to_string());
                adds += 1;
            } else {
                let idx = rng.random_range(0..live.len());
                let tag = live.swap_remove(idx);
                scene.remove(&tag).unwrap();
                removes += 1;
            }
            assert_eq!(scene.n_renderables() + scene.n_lights(), adds - removes);
        }
    }
}
