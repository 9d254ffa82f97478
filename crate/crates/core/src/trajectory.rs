//! Camera trajectories: timed keypoints refined into per-frame poses.
//!
//! Positions follow a centripetal Catmull-Rom spline through the
//! keypoints (no overshoot, exact interpolation); rotations take the
//! shortest arc between bracketing keypoints at the same local parameter,
//! so rotation speed is piecewise-constant rather than C1.

use crate::error::{Error, Result};
use crate::math::{slerp, Pose, UnitQuat, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypoint {
    pub time: f64,
    pub position: Vec3,
    pub rotation: UnitQuat,
}

#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    keypoints: Vec<Keypoint>,
}

impl Trajectory {
    pub fn new() -> Self {
        Trajectory::default()
    }

    /// Inserts a keypoint, keeping the list sorted by time.
    pub fn add_keypoint(&mut self, kp: Keypoint) -> Result<()> {
        if !kp.time.is_finite() {
            return Err(Error::InvalidSettings(
                "keypoint time must be finite".into(),
            ));
        }
        if !kp.position.is_finite() {
            return Err(Error::InvalidSettings(
                "keypoint position must be finite".into(),
            ));
        }
        let at = self
            .keypoints
            .partition_point(|existing| existing.time < kp.time);
        if self
            .keypoints
            .get(at)
            .is_some_and(|existing| existing.time == kp.time)
        {
            return Err(Error::DuplicateKeypoint(kp.time));
        }
        self.keypoints.insert(at, kp);
        Ok(())
    }

    pub fn keypoints(&self) -> &[Keypoint] {
        &self.keypoints
    }

    pub fn len(&self) -> usize {
        self.keypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keypoints.is_empty()
    }
}

fn lerp_guarded(a: Vec3, b: Vec3, ta: f64, tb: f64, t: f64) -> Vec3 {
    let span = tb - ta;
    if span <= 1e-12 {
        return a;
    }
    a * ((tb - t) / span) + b * ((t - ta) / span)
}

/// Barry-Goldman evaluation of one Catmull-Rom segment at knot value `t`
/// in `[knots[1], knots[2]]`.
fn catmull_rom(p: [Vec3; 4], knots: [f64; 4], t: f64) -> Vec3 {
    let a1 = lerp_guarded(p[0], p[1], knots[0], knots[1], t);
    let a2 = lerp_guarded(p[1], p[2], knots[1], knots[2], t);
    let a3 = lerp_guarded(p[2], p[3], knots[2], knots[3], t);
    let b1 = lerp_guarded(a1, a2, knots[0], knots[2], t);
    let b2 = lerp_guarded(a2, a3, knots[1], knots[3], t);
    lerp_guarded(b1, b2, knots[1], knots[2], t)
}

/// Sample the trajectory at each frame time. Times outside the keypoint
/// span clamp to the end poses; a frame time exactly equal to a keypoint
/// time reproduces that keypoint.
pub fn refine_trajectory(traj: &Trajectory, frame_times: &[f64]) -> Result<Vec<Pose>> {
    let kps = traj.keypoints();
    if kps.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let first = kps.first().unwrap();
    let last = kps.last().unwrap();
    frame_times
        .iter()
        .map(|&t| {
            if !t.is_finite() {
                return Err(Error::InvalidSettings(
                    "frame times must be finite".into(),
                ));
            }
            if t <= first.time {
                return Ok(Pose::new(first.position, first.rotation));
            }
            if t >= last.time {
                return Ok(Pose::new(last.position, last.rotation));
            }
            // Largest i with time_i <= t; t < last.time keeps i+1 valid.
            let i = kps.partition_point(|kp| kp.time <= t) - 1;
            let (k1, k2) = (&kps[i], &kps[i + 1]);
            if k1.time == t {
                return Ok(Pose::new(k1.position, k1.rotation));
            }
            let u = (t - k1.time) / (k2.time - k1.time);

            let p1 = k1.position;
            let p2 = k2.position;
            let p0 = if i > 0 { kps[i - 1].position } else { p1 };
            let p3 = if i + 2 < kps.len() {
                kps[i + 2].position
            } else {
                p2
            };
            let seg = |a: Vec3, b: Vec3| (b - a).length().sqrt();
            let k0 = 0.0;
            let ka = k0 + seg(p0, p1);
            let kb = ka + seg(p1, p2);
            let kc = kb + seg(p2, p3);
            let position = catmull_rom([p0, p1, p2, p3], [k0, ka, kb, kc], ka + u * (kb - ka));
            let rotation = slerp(&k1.rotation, &k2.rotation, u);
            Ok(Pose::new(position, rotation))
        })
        .collect()
}

/// Frame times spanning `[start, end]` at `fps`, endpoint included. The
/// final time snaps to `end` so the last frame reproduces the last
/// keypoint exactly.
pub fn frame_schedule(start: f64, end: f64, fps: f64) -> Result<Vec<f64>> {
    if !(fps > 0.0) || !fps.is_finite() {
        return Err(Error::InvalidSettings("fps must be positive".into()));
    }
    if !(start.is_finite() && end.is_finite() && end >= start) {
        return Err(Error::InvalidSettings(
            "frame span must be finite with end >= start".into(),
        ));
    }
    let n = ((end - start) * fps + 1e-9).floor() as usize;
    let mut times: Vec<f64> = (0..=n).map(|i| start + i as f64 / fps).collect();
    let last = times.last_mut().unwrap();
    if (end - *last).abs() <= 1e-9 {
        *last = end;
    } else if end - *last > 1e-9 {
        times.push(end);
    }
    Ok(times)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{to_quaternion, RotationSpec};
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn kp(time: f64, position: Vec3, rotation: UnitQuat) -> Keypoint {
        Keypoint {
            time,
            position,
            rotation,
        }
    }

    fn axis_angle(axis: Vec3, angle: f64) -> UnitQuat {
        to_quaternion(&RotationSpec::AxisAngle { axis, angle }).unwrap()
    }

    #[test]
    fn keypoints_store_sorted_and_reject_duplicates() {
        let mut traj = Trajectory::new();
        traj.add_keypoint(kp(2.0, Vec3::X, UnitQuat::IDENTITY)).unwrap();
        traj.add_keypoint(kp(1.0, Vec3::Y, UnitQuat::IDENTITY)).unwrap();
        assert_eq!(traj.keypoints()[0].time, 1.0);
        assert_eq!(traj.keypoints()[1].time, 2.0);
        assert!(matches!(
            traj.add_keypoint(kp(1.0, Vec3::ZERO, UnitQuat::IDENTITY)),
            Err(Error::DuplicateKeypoint(t)) if t == 1.0
        ));
        let mut single = Trajectory::new();
        single
            .add_keypoint(kp(0.0, Vec3::ZERO, UnitQuat::IDENTITY))
            .unwrap();
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn two_keypoint_midpoint_is_linear_with_half_turn_slerp() {
        let mut traj = Trajectory::new();
        traj.add_keypoint(kp(0.0, Vec3::ZERO, UnitQuat::IDENTITY))
            .unwrap();
        traj.add_keypoint(kp(
            1.0,
            Vec3::new(2.0, 0.0, 0.0),
            axis_angle(Vec3::Z, std::f64::consts::PI),
        ))
        .unwrap();
        let poses = refine_trajectory(&traj, &[0.5]).unwrap();
        let p = poses[0].position;
        approx::assert_abs_diff_eq!(p.x, 1.0, epsilon = 1e-12);
        approx::assert_abs_diff_eq!(p.y, 0.0, epsilon = 1e-12);
        approx::assert_abs_diff_eq!(p.z, 0.0, epsilon = 1e-12);
        let want = axis_angle(Vec3::Z, std::f64::consts::FRAC_PI_2);
        assert!(poses[0].rotation.angle_to(&want) < 1e-12);
    }

    #[test]
    fn frame_times_matching_keypoints_reproduce_them_exactly() {
        let mut traj = Trajectory::new();
        let kps = [
            kp(0.0, Vec3::new(0.3, -0.7, 1.9), axis_angle(Vec3::X, 0.4)),
            kp(1.3, Vec3::new(2.1, 0.5, -0.2), axis_angle(Vec3::Y, 1.1)),
            kp(2.9, Vec3::new(-1.0, 3.3, 0.8), axis_angle(Vec3::Z, 2.2)),
        ];
        for k in &kps {
            traj.add_keypoint(*k).unwrap();
        }
        let times: Vec<f64> = kps.iter().map(|k| k.time).collect();
        let poses = refine_trajectory(&traj, &times).unwrap();
        for (pose, k) in poses.iter().zip(&kps) {
            assert_eq!(pose.position, k.position);
            assert_eq!(pose.rotation.components(), k.rotation.components());
        }
    }

    #[test]
    fn collinear_keypoints_reproduce_the_line() {
        let a = Vec3::new(1.0, -2.0, 0.5);
        let dir = Vec3::new(0.6, 0.3, -0.2);
        let mut traj = Trajectory::new();
        for i in 0..4 {
            traj.add_keypoint(kp(
                i as f64,
                a + dir * i as f64,
                UnitQuat::IDENTITY,
            ))
            .unwrap();
        }
        let times: Vec<f64> = (0..=60).map(|i| i as f64 * 0.05).collect();
        let poses = refine_trajectory(&traj, &times).unwrap();
        let unit = dir.normalized();
        let mut prev_s = f64::NEG_INFINITY;
        for (pose, t) in poses.iter().zip(&times) {
            let rel = pose.position - a;
            let off_line = (rel - unit * rel.dot(unit)).length();
            assert!(off_line < 1e-9, "off-line by {off_line}");
            let s = rel.dot(unit);
            assert!(s >= prev_s - 1e-12, "backtracked along the line");
            prev_s = s;
            // The interior segment has full neighborhoods, so equal
            // spacing gives exact linear timing there as well.
            if (1.0..=2.0).contains(t) {
                assert!((pose.position - (a + dir * *t)).length() < 1e-9);
            }
        }
    }

    #[test]
    fn refined_rotations_stay_unit_and_motion_is_continuous() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut traj = Trajectory::new();
        let mut max_speed = 0.0f64;
        let mut prev: Option<Keypoint> = None;
        for i in 0..6 {
            let k = kp(
                i as f64,
                Vec3::new(
                    rng.random_range(-2.0..2.0),
                    rng.random_range(-2.0..2.0),
                    rng.random_range(-2.0..2.0),
                ),
                axis_angle(
                    Vec3::new(
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                        rng.random_range(1.0..2.0),
                    ),
                    rng.random_range(0.0..3.0),
                ),
            );
            if let Some(p) = prev {
                max_speed = max_speed.max((k.position - p.position).length() / (k.time - p.time));
            }
            prev = Some(k);
            traj.add_keypoint(k).unwrap();
        }
        let dt = 0.01;
        let times: Vec<f64> = (0..=500).map(|i| i as f64 * dt).collect();
        let poses = refine_trajectory(&traj, &times).unwrap();
        // Centripetal Catmull-Rom keeps speeds within a small factor of
        // the chord speed; C = 4 gives ample headroom.
        let bound = max_speed * dt * 4.0;
        for pair in poses.windows(2) {
            let gap = (pair[1].position - pair[0].position).length();
            assert!(gap <= bound, "gap {gap} exceeds bound {bound}");
            let [w, x, y, z] = pair[1].rotation.components();
            let norm = (w * w + x * x + y * y + z * z).sqrt();
            assert!((norm - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn refinement_ignores_insertion_order() {
        let kps = [
            kp(0.0, Vec3::ZERO, axis_angle(Vec3::X, 0.3)),
            kp(1.0, Vec3::X, axis_angle(Vec3::Y, 0.9)),
            kp(2.0, Vec3::Y, axis_angle(Vec3::Z, 1.4)),
            kp(3.0, Vec3::Z, axis_angle(Vec3::X, 2.0)),
        ];
        let times: Vec<f64> = (0..=30).map(|i| i as f64 * 0.1).collect();
        let mut sorted = Trajectory::new();
        for k in &kps {
            sorted.add_keypoint(*k).unwrap();
        }
        let want = refine_trajectory(&sorted, &times).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let mut order = kps;
            order.shuffle(&mut rng);
            let mut traj = Trajectory::new();
            for k in &order {
                traj.add_keypoint(*k).unwrap();
            }
            let got = refine_trajectory(&traj, &times).unwrap();
            for (a, b) in want.iter().zip(&got) {
                assert_eq!(a.position, b.position);
                assert_eq!(a.rotation.components(), b.rotation.components());
            }
        }
    }

    #[test]
    fn out_of_span_times_clamp_to_end_poses() {
        let mut traj = Trajectory::new();
        let first = kp(1.0, Vec3::X, axis_angle(Vec3::Z, 0.5));
        let last = kp(2.0, Vec3::Y, axis_angle(Vec3::Z, 1.5));
        traj.add_keypoint(first).unwrap();
        traj.add_keypoint(last).unwrap();
        let poses = refine_trajectory(&traj, &[-5.0, 0.999, 2.001, 100.0]).unwrap();
        assert_eq!(poses[0].position, first.position);
        assert_eq!(poses[1].position, first.position);
        assert_eq!(poses[2].position, last.position);
        assert_eq!(poses[3].position, last.position);
    }

    #[test]
    fn empty_trajectory_and_bad_times_error() {
        let traj = Trajectory::new();
        assert!(matches!(
            refine_trajectory(&traj, &[0.0]),
            Err(Error::EmptyTrajectory)
        ));
        let mut traj = Trajectory::new();
        traj.add_keypoint(kp(0.0, Vec3::ZERO, UnitQuat::IDENTITY))
            .unwrap();
        assert!(refine_trajectory(&traj, &[f64::NAN]).is_err());
        assert!(traj
            .add_keypoint(kp(f64::INFINITY, Vec3::ZERO, UnitQuat::IDENTITY))
            .is_err());
    }

    #[test]
    fn frame_schedule_includes_a_snapped_endpoint() {
        let t = frame_schedule(0.0, 1.0, 5.0).unwrap();
        assert_eq!(t.len(), 6);
        assert_eq!(*t.last().unwrap(), 1.0);
        approx::assert_abs_diff_eq!(t[1], 0.2, epsilon = 1e-12);

        let t = frame_schedule(0.0, 1.1, 5.0).unwrap();
        assert_eq!(t.len(), 7);
        assert_eq!(*t.last().unwrap(), 1.1);

        assert!(frame_schedule(0.0, 1.0, 0.0).is_err());
        // A single-instant span still yields one frame.
        let t = frame_schedule(2.0, 2.0, 10.0).unwrap();
        assert_eq!(t, vec![2.0]);
    }
}
