//! Plant models: single integrators under zero-order hold, and unicycles
//! driven through a look-ahead (ℓ-point) transformation.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::matrix::AgentMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlantModel {
    SingleIntegrator,
    Unicycle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantConfig {
    pub model: PlantModel,
    /// Step length (s).
    pub dt: f64,
    /// Look-ahead distance (m); unicycle only.
    pub ell: f64,
    /// Speed above which a run is flagged as saturated (m/s). Never clipped.
    pub v_max: f64,
}

impl PlantConfig {
    pub fn single_integrator(dt: f64) -> Self {
        Self {
            model: PlantModel::SingleIntegrator,
            dt,
            ell: 0.05,
            v_max: 0.2,
        }
    }

    pub fn unicycle(dt: f64, ell: f64) -> Self {
        Self {
            model: PlantModel::Unicycle,
            dt,
            ell,
            v_max: 0.2,
        }
    }
}

/// Exact integration of `ẋ = u` over one step with `u` held constant.
pub fn si_step(pos: &AgentMatrix, u_held: &AgentMatrix, dt: f64) -> AgentMatrix {
    let mut out = pos.clone();
    si_step_in_place(&mut out, u_held, dt);
    out
}

pub fn si_step_in_place(pos: &mut AgentMatrix, u_held: &AgentMatrix, dt: f64) {
    for i in 0..pos.n() {
        for (x, u) in pos.row_mut(i).iter_mut().zip(u_held.row(i)) {
            *x += dt * u;
        }
    }
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    // rem_euclid can return exactly 2π for tiny negative inputs
    if t <= -PI {
        t += 2.0 * PI;
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnicyclePose {
    pub x: f64,
    pub y: f64,
    /// Heading (rad), kept in `(−π, π]`.
    pub theta: f64,
}

impl UnicyclePose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    /// Pose whose ℓ-point lies at `point` with the given heading.
    pub fn from_ell_point(point: [f64; 2], theta: f64, ell: f64) -> Self {
        Self::new(
            point[0] - ell * theta.cos(),
            point[1] - ell * theta.sin(),
            theta,
        )
    }
}

pub fn ell_point(pose: &UnicyclePose, ell: f64) -> [f64; 2] {
    [
        pose.x + ell * pose.theta.cos(),
        pose.y + ell * pose.theta.sin(),
    ]
}

/// Maps a desired ℓ-point velocity to `(v, ω)`.
pub fn si_to_uni(si_vel: [f64; 2], pose: &UnicyclePose, ell: f64) -> (f64, f64) {
    let (s, c) = pose.theta.sin_cos();
    let v = c * si_vel[0] + s * si_vel[1];
    let omega = (-s * si_vel[0] + c * si_vel[1]) / ell;
    (v, omega)
}

/// Exact constant-`(v, ω)` arc over `dt`.
pub fn uni_step(pose: &UnicyclePose, v: f64, omega: f64, dt: f64) -> UnicyclePose {
    let th = pose.theta;
    if omega.abs() < 1e-9 {
        return UnicyclePose::new(
            pose.x + v * dt * th.cos(),
            pose.y + v * dt * th.sin(),
            th + omega * dt,
        );
    }
    let th1 = th + omega * dt;
    let r = v / omega;
    UnicyclePose::new(
        pose.x + r * (th1.sin() - th.sin()),
        pose.y + r * (th.cos() - th1.cos()),
        th1,
    )
}

/// True if any row of `u` has norm above `v_max`.
pub fn saturation_flag(u: &AgentMatrix, v_max: f64) -> bool {
    (0..u.n()).any(|i| u.row_norm(i) > v_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn si_step_examples() {
        let p = AgentMatrix::from_rows(&[[0.0, 0.0]]).unwrap();
        let u = AgentMatrix::from_rows(&[[1.0, 0.0]]).unwrap();
        assert_eq!(si_step(&p, &u, 0.5).row(0), &[0.5, 0.0]);
        assert_eq!(si_step(&p, &AgentMatrix::zeros(1, 2), 0.5), p);
        let half = si_step(&si_step(&p, &u, 0.25), &u, 0.25);
        assert_eq!(half, si_step(&p, &u, 0.5));
    }

    #[test]
    fn ell_point_examples() {
        let q = ell_point(&UnicyclePose::new(1.0, 2.0, PI / 2.0), 0.05);
        assert_relative_eq!(q[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(q[1], 2.05, epsilon = 1e-15);
        assert_eq!(
            ell_point(&UnicyclePose::new(1.0, 2.0, 0.0), 0.05),
            [1.05, 2.0]
        );
        let pose = UnicyclePose::new(-0.3, 0.7, 2.2);
        let q = ell_point(&pose, 0.05);
        assert_relative_eq!((q[0] - pose.x).hypot(q[1] - pose.y), 0.05, epsilon = 1e-15);
        let back = UnicyclePose::from_ell_point(q, 2.2, 0.05);
        assert_relative_eq!(back.x, pose.x, epsilon = 1e-15);
        assert_relative_eq!(back.y, pose.y, epsilon = 1e-15);
    }

    #[test]
    fn si_to_uni_examples() {
        let pose = UnicyclePose::new(0.0, 0.0, 0.0);
        assert_eq!(si_to_uni([0.1, 0.0], &pose, 0.05), (0.1, 0.0));
        let (v, w) = si_to_uni([0.0, 0.1], &pose, 0.05);
        assert_eq!(v, 0.0);
        assert_relative_eq!(w, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn ell_point_derivative_matches_command_analytically() {
        // d/dt [p + ℓ(cosθ, sinθ)] = v(cosθ, sinθ) + ℓω(−sinθ, cosθ)
        for &theta in &[0.0, 0.4, -1.9, 3.0] {
            let pose = UnicyclePose::new(0.2, -0.1, theta);
            let cmd = [0.07, -0.03];
            let (v, w) = si_to_uni(cmd, &pose, 0.05);
            let (s, c) = pose.theta.sin_cos();
            assert_relative_eq!(v * c - 0.05 * w * s, cmd[0], epsilon = 1e-15);
            assert_relative_eq!(v * s + 0.05 * w * c, cmd[1], epsilon = 1e-15);
        }
    }

    #[test]
    fn uni_step_examples() {
        let p = uni_step(&UnicyclePose::new(0.0, 0.0, 0.0), 1.0, 0.0, 1.0);
        assert_eq!((p.x, p.y, p.theta), (1.0, 0.0, 0.0));

        let p = uni_step(&UnicyclePose::new(0.5, 0.5, 0.1), 0.0, 0.3, 2.0);
        assert_eq!((p.x, p.y), (0.5, 0.5));
        assert_relative_eq!(p.theta, 0.7, epsilon = 1e-15);

        let start = UnicyclePose::new(0.3, -0.2, 1.0);
        let p = uni_step(&start, 1.0, 2.0 * PI, 1.0);
        assert!((p.x - start.x).abs() < 1e-9 && (p.y - start.y).abs() < 1e-9);
    }

    #[test]
    fn wrap_angle_range() {
        for k in -50..50 {
            let t = wrap_angle(k as f64 * 0.77);
            assert!(t > -PI && t <= PI);
        }
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
    }

    #[test]
    fn saturation_examples() {
        assert!(!saturation_flag(&AgentMatrix::zeros(3, 2), 0.2));
        let u = AgentMatrix::from_rows(&[[0.0, 0.0], [0.4, 0.0]]).unwrap();
        assert!(saturation_flag(&u, 0.2));
    }
}
