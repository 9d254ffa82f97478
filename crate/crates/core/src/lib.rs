//! Scene composition and ray-traced rendering toolkit.
//!
//! The crate provides a scene graph (renderables, lights, one camera), a
//! deterministic path-tracing renderer with color/depth/albedo passes, and a
//! set of point-cloud utilities: normal estimation, camera-conditioned
//! colorization, trajectory interpolation, and a pointcloud-to-textured-mesh
//! pipeline (ball pivoting, quadric simplification, UV atlas, texture bake).
//!
//! Scenes can be built programmatically or loaded from `.scene.json`
//! documents; geometry and images move through PLY, OBJ, PNG and PFM files.

pub mod appearance;
pub mod bsdf;
pub mod camera;
pub mod error;
pub mod knn;
pub mod light;
pub mod linalg;
pub mod image;
pub mod io;
pub mod math;
pub mod meshify;
pub mod pc;
pub mod render;
pub mod renderable;
pub mod scene;
pub mod trajectory;

pub use appearance::{
    sample_texture, shade_color, wireframe_factor, Appearance, ColorSource, Material,
    MaterialPreset, UVMap,
};
pub use camera::{Camera, CameraKind, Ray};
pub use error::{Error, Result};
pub use image::Image;
pub use io::obj::{load_obj, save_obj};
pub use io::pfm::{read_pfm, write_pfm};
pub use io::ply::{load_ply, save_ply, PlyData, PlyFormat};
pub use io::png::{read_png, write_png};
pub use io::scene_doc::{
    load_frames, load_keypoints, load_scene, save_frames, save_keypoints, save_scene,
};
pub use light::{sample_direct, AreaShape, Light, LightSample};
pub use math::{
    look_at_rotation, slerp, to_quaternion, Mat3, Pose, RotationSpec, UnitQuat, Vec3,
};
pub use meshify::{meshify_pc, MeshifyConfig, TexturedMesh};
pub use pc::{
    approximate_colors_from_camera, estimate_normals_from_pointcloud, NormalEstimate,
};
pub use render::{render, tone_map, RenderOutput};
pub use renderable::{
    point_instances, sample_bezier, tessellate, FaceSegments, PointCloud, PointColors,
    PointInstance, PointShape, PrimitiveSpec, TriMesh,
};
pub use scene::{Passes, RenderSettings, Renderable, Scene, Tag};
pub use trajectory::{frame_schedule, refine_trajectory, Keypoint, Trajectory};
