//! Batch front end for the scirender toolkit: render scene documents,
//! turn colored point clouds into textured meshes, expand camera
//! keypoints into per-frame poses and recolor clouds by camera facing.
//!
//! Exit codes: 0 success, 2 scene or usage errors, 3 io errors,
//! 4 meshify stage failures.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use scirender::io::png::{write_png_rgb8, write_png_rgba8};
use scirender::knn::KnnIndex;
use scirender::meshify::{
    bake_texture, ball_pivot, build_face_atlas, project_points_to_mesh, simplify_mesh,
};
use scirender::{
    approximate_colors_from_camera, estimate_normals_from_pointcloud, frame_schedule,
    load_keypoints, load_ply, load_scene, refine_trajectory, render, save_frames, save_obj,
    save_ply, write_pfm, write_png, Error, Passes, PlyData, PlyFormat, PointColors, Pose,
    UVMap, Vec3,
};

#[derive(Parser)]
#[command(name = "scirender", version, about = "Scene rendering and point-cloud toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Print a machine-readable JSON stats object on stdout instead of
    /// the human-readable progress lines.
    #[arg(long, global = true)]
    stats_json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Render a scene document into image files.
    Render(RenderArgs),
    /// Reconstruct a textured mesh from a colored point cloud.
    Meshify(MeshifyArgs),
    /// Expand camera keypoints into a per-frame pose document.
    Trajectory(TrajectoryArgs),
    /// Recolor a point cloud by whether each point faces a camera.
    PcColor(PcColorArgs),
}

#[derive(Args)]
struct RenderArgs {
    /// Scene document (.scene.json) to render.
    scene: PathBuf,
    /// Output prefix: writes PREFIX.png, PREFIX.depth.pfm and
    /// PREFIX.albedo.png for the requested passes.
    #[arg(long)]
    out: String,
    /// Comma-separated passes to compute and write: color,depth,albedo.
    /// Defaults to the passes enabled in the scene settings.
    #[arg(long, value_delimiter = ',')]
    passes: Option<Vec<String>>,
    /// Samples per pixel; overrides the scene settings.
    #[arg(long)]
    samples: Option<u32>,
    /// Output resolution as WxH; overrides the scene settings and resizes
    /// the camera to match.
    #[arg(long)]
    resolution: Option<String>,
    /// Random seed; overrides the scene settings.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads. Falls back to SCIRENDER_THREADS, then to all
    /// hardware cores. Output bytes do not depend on this value.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct MeshifyArgs {
    /// Input point cloud (.ply) with per-point colors.
    input: PathBuf,
    /// Output mesh path (.obj, texture coordinates included).
    #[arg(long)]
    out_mesh: PathBuf,
    /// Output texture path (.png).
    #[arg(long)]
    out_texture: PathBuf,
    /// Comma-separated ball-pivoting radii, ascending. Defaults to 1.5x,
    /// 2.5x and 4x the median nearest-neighbor distance.
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    /// Simplify the reconstructed mesh down to at most this many faces.
    #[arg(long)]
    target_faces: Option<usize>,
    /// Texture resolution in pixels (square). Default 512.
    #[arg(long)]
    tex_res: Option<u32>,
    /// Gap between atlas charts in pixels. Default 2.
    #[arg(long)]
    gap: Option<u32>,
    /// Worker threads. Falls back to SCIRENDER_THREADS, then to all
    /// hardware cores. Output bytes do not depend on this value.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct TrajectoryArgs {
    /// Keypoint document (.scene.json) with at least one keypoint.
    keypoints: PathBuf,
    /// Frames per second for the refined schedule.
    #[arg(long)]
    fps: f64,
    /// Output frames document; prints to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PcColorArgs {
    /// Input point cloud (.ply).
    input: PathBuf,
    /// Camera position as X,Y,Z.
    #[arg(long)]
    camera: String,
    /// Neighborhood size for normal estimation when the cloud carries no
    /// normals.
    #[arg(long)]
    k: Option<usize>,
    /// Color assigned to points facing away from the camera, as r,g,b in
    /// [0, 1]. Default 0,0,0.
    #[arg(long)]
    back_color: Option<String>,
    /// Alpha assigned to points facing away from the camera. Default 1.
    #[arg(long)]
    back_alpha: Option<f64>,
    /// Output point cloud (.ply) with the new colors.
    #[arg(long)]
    out: PathBuf,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

/// Errors from reading inputs or running the library: io problems exit 3,
/// stage-labeled meshify problems exit 4, everything else is a scene or
/// usage error and exits 2.
fn classify(err: Error) -> Failure {
    let code = match &err {
        Error::Io(_) | Error::Parse { .. } | Error::Sidecar(..) => 3,
        Error::Stage { .. } => 4,
        _ => 2,
    };
    Failure::new(code, err.to_string())
}

fn io_failure(err: Error) -> Failure {
    Failure::new(3, err.to_string())
}

fn stage_failure(err: Error) -> Failure {
    Failure::new(4, err.to_string())
}

fn thread_pool(flag: Option<usize>) -> Result<rayon::ThreadPool, Failure> {
    let threads = match flag {
        Some(n) => n,
        None => match std::env::var("SCIRENDER_THREADS") {
            Ok(raw) => raw.parse().map_err(|_| {
                Failure::new(2, format!("SCIRENDER_THREADS must be a thread count, got `{raw}`"))
            })?,
            Err(_) => 0,
        },
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::new(2, format!("cannot build the thread pool: {e}")))
}

fn parse_triple(raw: &str, what: &str) -> Result<[f64; 3], Failure> {
    let parts: Vec<&str> = raw.split(',').collect();
    let bad = || Failure::new(2, format!("{what} must be three comma-separated numbers, got `{raw}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let mut out = [0.0f64; 3];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part.trim().parse().map_err(|_| bad())?;
        if !slot.is_finite() {
            return Err(bad());
        }
    }
    Ok(out)
}

fn parse_resolution(raw: &str) -> Result<(u32, u32), Failure> {
    let bad = || Failure::new(2, format!("resolution must look like 640x480, got `{raw}`"));
    let (w, h) = raw.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((w.trim().parse().map_err(|_| bad())?, h.trim().parse().map_err(|_| bad())?))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let quiet = cli.stats_json;
    let result = match cli.command {
        Command::Render(args) => cmd_render(args),
        Command::Meshify(args) => cmd_meshify(args, quiet),
        Command::Trajectory(args) => cmd_trajectory(args),
        Command::PcColor(args) => cmd_pc_color(args),
    };
    match result {
        Ok(stats) => {
            if cli.stats_json {
                println!("{stats}");
            }
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn cmd_render(args: RenderArgs) -> Result<serde_json::Value, Failure> {
    let mut scene = load_scene(&args.scene).map_err(classify)?;
    let mut settings = scene.settings.clone();
    if let Some(samples) = args.samples {
        settings.samples_per_pixel = samples;
    }
    if let Some(seed) = args.seed {
        settings.seed = seed;
    }
    if let Some(raw) = &args.resolution {
        let (w, h) = parse_resolution(raw)?;
        settings.resolution = (w, h);
        let mut camera = scene.require_camera().map_err(classify)?.clone();
        camera.width = w;
        camera.height = h;
        scene.set_camera(camera).map_err(classify)?;
    }
    if let Some(names) = &args.passes {
        let mut passes = Passes { color: false, depth: false, albedo: false };
        for name in names {
            match name.trim() {
                "color" => passes.color = true,
                "depth" => passes.depth = true,
                "albedo" => passes.albedo = true,
                other => return Err(Failure::new(2, format!("unknown pass `{other}`"))),
            }
        }
        settings.passes = passes;
    }

    let pool = thread_pool(args.threads)?;
    let output = pool.install(|| render(&scene, &settings)).map_err(classify)?;

    let (w, h) = settings.resolution;
    let mut written = Vec::new();
    if settings.passes.color {
        let path = format!("{}.png", args.out);
        let bytes: Vec<u8> = output.color.iter().flatten().copied().collect();
        write_png_rgba8(&bytes, w, h, &path).map_err(io_failure)?;
        written.push(path);
    }
    if settings.passes.depth {
        let path = format!("{}.depth.pfm", args.out);
        let data: Vec<f32> = output.depth.iter().map(|d| *d as f32).collect();
        write_pfm(&data, w, h, &path).map_err(io_failure)?;
        written.push(path);
    }
    if settings.passes.albedo {
        let path = format!("{}.albedo.png", args.out);
        let bytes: Vec<u8> = output.albedo.iter().flatten().copied().collect();
        write_png_rgb8(&bytes, w, h, &path).map_err(io_failure)?;
        written.push(path);
    }
    Ok(json!({
        "command": "render",
        "resolution": [w, h],
        "samples": settings.samples_per_pixel,
        "seed": settings.seed,
        "outputs": written,
    }))
}

/// Ball radii when none are given: multiples of the median
/// nearest-neighbor distance.
fn default_radii(points: &[Vec3]) -> Result<Vec<f64>, Failure> {
    let index = KnnIndex::build(points).map_err(classify)?;
    let mut gaps: Vec<f64> = points
        .iter()
        .map(|p| {
            index
                .nearest(*p, 2)
                .into_iter()
                .map(|(_, d)| d)
                .fold(0.0, f64::max)
        })
        .collect();
    gaps.sort_by(f64::total_cmp);
    let median = gaps[gaps.len() / 2];
    if !(median > 0.0) {
        return Err(Failure::new(
            2,
            "cannot derive ball radii from coincident points; pass --radii",
        ));
    }
    Ok(vec![1.5 * median, 2.5 * median, 4.0 * median])
}

fn cmd_meshify(args: MeshifyArgs, quiet: bool) -> Result<serde_json::Value, Failure> {
    let cloud = match load_ply(&args.input).map_err(classify)? {
        PlyData::Points(cloud) => cloud,
        PlyData::Mesh(_) => {
            return Err(Failure::new(2, "meshify needs a point cloud, the input is a mesh"))
        }
    };
    let points = cloud.points.clone();
    let colors: Vec<[f64; 3]> = match &cloud.colors {
        Some(PointColors::PerPoint(c)) => c.iter().map(|c| [c[0], c[1], c[2]]).collect(),
        Some(PointColors::Uniform(c)) => vec![[c[0], c[1], c[2]]; points.len()],
        None => {
            return Err(Failure::new(4, "bake requires colors: the input cloud carries none"))
        }
    };
    let radii = match &args.radii {
        Some(r) if !r.is_empty() => r.clone(),
        _ => default_radii(&points)?,
    };
    let tex_res = args.tex_res.unwrap_or(512);
    let gap = args.gap.unwrap_or(2);

    let pool = thread_pool(args.threads)?;
    pool.install(|| -> Result<serde_json::Value, Failure> {
        let normals = match &cloud.normals {
            Some(n) => {
                if !quiet {
                    println!("normals: {} carried by the input", n.len());
                }
                n.clone()
            }
            None => {
                // Same policy as the library pipeline: canonical
                // estimation, then flipped to point away from the
                // centroid.
                let k = 16.clamp(3, points.len().saturating_sub(1).max(3));
                let estimate = estimate_normals_from_pointcloud(&points, k, None)
                    .map_err(|e| stage_failure(e.in_stage("estimate_normals")))?;
                let centroid =
                    points.iter().fold(Vec3::ZERO, |acc, p| acc + *p) / points.len() as f64;
                if !quiet {
                    println!("normals: {} estimated (k = {k})", points.len());
                }
                estimate
                    .normals
                    .iter()
                    .zip(&points)
                    .map(|(n, p)| if n.dot(*p - centroid) < 0.0 { -*n } else { *n })
                    .collect()
            }
        };

        let dense = ball_pivot(&points, &normals, &radii)
            .map_err(|e| stage_failure(e.in_stage("ball_pivot")))?;
        if !quiet {
            println!("ball_pivot: {} faces from {} points", dense.faces.len(), points.len());
        }

        let target = args.target_faces.unwrap_or(dense.faces.len());
        let (mesh, _) =
            simplify_mesh(&dense, target).map_err(|e| stage_failure(e.in_stage("simplify")))?;
        if !quiet {
            println!("simplify: {} -> {} faces (target {target})", dense.faces.len(), mesh.faces.len());
        }

        let uv = build_face_atlas(&mesh, tex_res, gap)
            .map_err(|e| stage_failure(e.in_stage("atlas")))?;
        let faces_uv = match &uv {
            UVMap::FacesUv(tris) => tris.clone(),
            UVMap::VertexUv(_) => unreachable!("the atlas is per-face"),
        };
        let occupancy: f64 = faces_uv
            .iter()
            .map(|t| {
                let (e1, e2) = (
                    [t[1][0] - t[0][0], t[1][1] - t[0][1]],
                    [t[2][0] - t[0][0], t[2][1] - t[0][1]],
                );
                (e1[0] * e2[1] - e2[0] * e1[1]).abs() / 2.0
            })
            .sum();
        if !quiet {
            println!("atlas: {tex_res} px, gap {gap} px, occupancy {:.1}%", occupancy * 100.0);
        }

        let projections = project_points_to_mesh(&points, &mesh)
            .map_err(|e| stage_failure(e.in_stage("project")))?;
        let texture = bake_texture(&mesh, &uv, &points, &colors, &projections, 4, gap, tex_res)
            .map_err(|e| stage_failure(e.in_stage("bake")))?;
        if !quiet {
            println!("bake: {} points onto {tex_res}x{tex_res}", points.len());
        }

        save_obj(&mesh, Some(&faces_uv), &args.out_mesh).map_err(io_failure)?;
        write_png(&texture, &args.out_texture).map_err(io_failure)?;
        if !quiet {
            println!(
                "wrote {} and {}",
                args.out_mesh.display(),
                args.out_texture.display()
            );
        }
        Ok(json!({
            "command": "meshify",
            "points": points.len(),
            "faces_reconstructed": dense.faces.len(),
            "faces_final": mesh.faces.len(),
            "atlas_occupancy": occupancy,
            "texture_resolution": tex_res,
            "outputs": [args.out_mesh.to_string_lossy(), args.out_texture.to_string_lossy()],
        }))
    })
}

fn cmd_trajectory(args: TrajectoryArgs) -> Result<serde_json::Value, Failure> {
    let trajectory = load_keypoints(&args.keypoints).map_err(classify)?;
    let keypoints = trajectory.keypoints();
    if keypoints.is_empty() {
        return Err(classify(Error::EmptyTrajectory));
    }
    let (start, end) = (keypoints[0].time, keypoints[keypoints.len() - 1].time);
    let times = frame_schedule(start, end, args.fps).map_err(classify)?;
    let poses = refine_trajectory(&trajectory, &times).map_err(classify)?;
    let frames: Vec<(f64, Pose)> = times.iter().copied().zip(poses).collect();

    match &args.out {
        Some(path) => save_frames(&frames, path).map_err(io_failure)?,
        None => {
            let dir = tempfile::tempdir().map_err(|e| Failure::new(3, e.to_string()))?;
            let path = dir.path().join("frames.scene.json");
            save_frames(&frames, &path).map_err(io_failure)?;
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Failure::new(3, e.to_string()))?;
            print!("{text}");
        }
    }
    Ok(json!({
        "command": "trajectory",
        "fps": args.fps,
        "frames": frames.len(),
        "span": [start, end],
    }))
}

fn cmd_pc_color(args: PcColorArgs) -> Result<serde_json::Value, Failure> {
    let mut cloud = match load_ply(&args.input).map_err(classify)? {
        PlyData::Points(cloud) => cloud,
        PlyData::Mesh(_) => {
            return Err(Failure::new(2, "pc-color needs a point cloud, the input is a mesh"))
        }
    };
    let camera = parse_triple(&args.camera, "--camera")?.into();
    let back_color = match &args.back_color {
        Some(raw) => parse_triple(raw, "--back-color")?,
        None => [0.0, 0.0, 0.0],
    };
    let back_alpha = args.back_alpha.unwrap_or(1.0);

    let normals = match &cloud.normals {
        Some(n) => n.clone(),
        None => {
            let k = match args.k {
                Some(k) => k,
                None => 16.clamp(3, cloud.points.len().saturating_sub(1).max(3)),
            };
            estimate_normals_from_pointcloud(&cloud.points, k, None)
                .map_err(classify)?
                .normals
        }
    };
    let front: Vec<[f64; 3]> = match &cloud.colors {
        Some(PointColors::PerPoint(c)) => c.iter().map(|c| [c[0], c[1], c[2]]).collect(),
        Some(PointColors::Uniform(c)) => vec![[c[0], c[1], c[2]]],
        None => vec![[0.8, 0.8, 0.8]],
    };
    let rgba =
        approximate_colors_from_camera(&cloud.points, &normals, camera, &front, back_color, back_alpha)
            .map_err(classify)?;
    let back_count = cloud
        .points
        .iter()
        .zip(&normals)
        .filter(|(p, n)| n.dot(camera - **p) < 0.0)
        .count();

    let total = cloud.points.len();
    cloud.colors = Some(PointColors::PerPoint(rgba));
    cloud.normals = Some(normals);
    save_ply(&PlyData::Points(cloud), PlyFormat::Ascii, &args.out).map_err(io_failure)?;
    Ok(json!({
        "command": "pc-color",
        "points": total,
        "back_facing": back_count,
        "output": args.out.to_string_lossy(),
    }))
}
