//! Shared scene and cloud builders for the benchmark suite.

use scirender::{
    look_at_rotation, tessellate, Camera, Light, Pose, PrimitiveSpec, RenderSettings, Scene,
    Vec3,
};

/// Evenly spread unit directions (golden-angle spiral).
pub fn fibonacci_sphere(n: usize) -> Vec<Vec3> {
    let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            Vec3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

/// A lit sphere-over-plane scene at the given square resolution.
pub fn small_scene(resolution: u32, samples: u32) -> (Scene, RenderSettings) {
    let mut scene = Scene::new();
    let mut sphere =
        tessellate(&PrimitiveSpec::Sphere { radius: 1.0, subdivisions: 3 }).unwrap();
    sphere.pose = Pose::from_position(Vec3::new(0.0, 0.0, 1.0));
    scene.add_renderable(sphere, None).unwrap();
    let plane =
        tessellate(&PrimitiveSpec::Plane { size: 12.0, shadow_catcher: false }).unwrap();
    scene.add_renderable(plane, None).unwrap();
    scene
        .add_light(
            Light::Point {
                color: [1.0, 0.95, 0.9],
                strength: 50.0,
                radius: 0.2,
                cast_shadow: true,
                pose: Pose::from_position(Vec3::new(3.0, 2.0, 5.0)),
            },
            None,
        )
        .unwrap();
    scene
        .add_light(Light::Background { color: [0.2, 0.25, 0.35], strength: 0.5 }, None)
        .unwrap();
    let eye = Vec3::new(4.0, -3.0, 3.0);
    let rotation = look_at_rotation(eye, Vec3::new(0.0, 0.0, 0.8), None).unwrap();
    scene
        .set_camera(
            Camera::perspective_focal(resolution as f64, resolution, resolution, Pose::new(eye, rotation))
                .unwrap(),
        )
        .unwrap();
    let settings = RenderSettings {
        resolution: (resolution, resolution),
        samples_per_pixel: samples,
        seed: 7,
        ..RenderSettings::default()
    };
    (scene, settings)
}
