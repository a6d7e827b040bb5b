use nalgebra::{UnitQuaternion, Vector3};

pub type Vec3 = Vector3<f64>;
pub type Quat = UnitQuaternion<f64>;

/// Gravitational acceleration, m/s². World frame is z-up.
pub const GRAVITY: f64 = 9.81;

pub fn e3() -> Vec3 {
    Vec3::new(0.0, 0.0, 1.0)
}

pub fn gravity() -> Vec3 {
    Vec3::new(0.0, 0.0, -GRAVITY)
}

pub fn is_finite(v: &Vec3) -> bool {
    v.iter().all(|c| c.is_finite())
}

/// Inverse of the hat map for a (near) skew-symmetric matrix.
pub fn vee(m: &nalgebra::Matrix3<f64>) -> Vec3 {
    Vec3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)])
}
