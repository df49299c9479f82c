//! Symmetric traceless 3×3 tensors, symmetric moment tensors and the closure operator ℳ_Q.

mod eigen;
mod moment;
mod sym;

pub use eigen::Eigen;
pub use moment::{contract42, contract62, mq_apply, uniaxial, Sym4Moment, Sym6Moment, Traceless4};
pub(crate) use moment::{delta, exponents};
pub use sym::SymTraceless3;

pub type Mat3 = nalgebra::Matrix3<f64>;
pub type Vec3 = nalgebra::Vector3<f64>;

/// κ = D + Ωᵀ split: D = (κ+κᵀ)/2, Ω = (κᵀ−κ)/2.
pub fn split_gradient(kappa: &Mat3) -> (Mat3, Mat3) {
    let kt = kappa.transpose();
    ((kappa + kt) * 0.5, (kt - kappa) * 0.5)
}

/// Orthonormal completion (n₁, n₂) of a unit vector n with n₁ × n₂ = n.
pub fn orthonormal_completion(n: &Vec3) -> (Vec3, Vec3) {
    let a = n.abs();
    let seed = if a.x <= a.y && a.x <= a.z {
        Vec3::x()
    } else if a.y <= a.z {
        Vec3::y()
    } else {
        Vec3::z()
    };
    let n1 = (seed - n * n.dot(&seed)).normalize();
    let n2 = n.cross(&n1);
    (n1, n2)
}
