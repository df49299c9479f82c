use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use super::{eigen, Eigen, Mat3, Vec3};
use crate::error::{Error, Result};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Symmetric traceless 3×3 tensor stored as (xx, yy, xy, xz, yz); zz = −xx−yy.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SymTraceless3(pub [f64; 5]);

impl SymTraceless3 {
    pub const ZERO: Self = Self([0.0; 5]);

    pub fn new(xx: f64, yy: f64, xy: f64, xz: f64, yz: f64) -> Self {
        Self([xx, yy, xy, xz, yz])
    }

    pub fn components(&self) -> [f64; 5] {
        self.0
    }

    pub fn xx(&self) -> f64 {
        self.0[0]
    }
    pub fn yy(&self) -> f64 {
        self.0[1]
    }
    pub fn zz(&self) -> f64 {
        -self.0[0] - self.0[1]
    }
    pub fn xy(&self) -> f64 {
        self.0[2]
    }
    pub fn xz(&self) -> f64 {
        self.0[3]
    }
    pub fn yz(&self) -> f64 {
        self.0[4]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match (i.min(j), i.max(j)) {
            (0, 0) => self.0[0],
            (1, 1) => self.0[1],
            (2, 2) => self.zz(),
            (0, 1) => self.0[2],
            (0, 2) => self.0[3],
            (1, 2) => self.0[4],
            _ => panic!("index out of range"),
        }
    }

    pub fn to_mat(&self) -> Mat3 {
        let [xx, yy, xy, xz, yz] = self.0;
        Mat3::new(xx, xy, xz, xy, yy, yz, xz, yz, -xx - yy)
    }

    /// Symmetric traceless part of an arbitrary matrix.
    pub fn from_mat(m: &Mat3) -> Self {
        let tr = m.trace() / 3.0;
        Self([
            m[(0, 0)] - tr,
            m[(1, 1)] - tr,
            0.5 * (m[(0, 1)] + m[(1, 0)]),
            0.5 * (m[(0, 2)] + m[(2, 0)]),
            0.5 * (m[(1, 2)] + m[(2, 1)]),
        ])
    }

    /// s(nn − I/3).
    pub fn uniaxial(s: f64, n: &Vec3) -> Result<Self> {
        if (n.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::NonUnitVector(n.norm()));
        }
        Ok(Self::uniaxial_unchecked(s, n))
    }

    pub(crate) fn uniaxial_unchecked(s: f64, n: &Vec3) -> Self {
        let t = 1.0 / 3.0;
        Self([
            s * (n.x * n.x - t),
            s * (n.y * n.y - t),
            s * n.x * n.y,
            s * n.x * n.z,
            s * n.y * n.z,
        ])
    }

    /// Frobenius product A:B.
    pub fn dot(&self, o: &Self) -> f64 {
        let a = &self.0;
        let b = &o.0;
        a[0] * b[0] + a[1] * b[1] + self.zz() * o.zz() + 2.0 * (a[2] * b[2] + a[3] * b[3] + a[4] * b[4])
    }

    /// A:M for a general 3×3 matrix.
    pub fn dot_mat(&self, m: &Mat3) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += self.get(i, j) * m[(i, j)];
            }
        }
        s
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Largest absolute entry of the full matrix.
    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(self.zz().abs(), |m, v| m.max(v.abs()))
    }

    /// R·A·Rᵀ.
    pub fn rotate(&self, r: &Mat3) -> Self {
        Self::from_mat(&(r * self.to_mat() * r.transpose()))
    }

    pub fn eig(&self) -> Eigen {
        eigen::eig_sym_traceless(self)
    }

    /// Orthonormal basis E₁..E₅ of the traceless symmetric matrices.
    pub fn basis() -> [Self; 5] {
        let s6 = 1.0 / 6f64.sqrt();
        [
            Self([FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0, 0.0, 0.0]),
            Self([-s6, -s6, 0.0, 0.0, 0.0]),
            Self([0.0, 0.0, FRAC_1_SQRT_2, 0.0, 0.0]),
            Self([0.0, 0.0, 0.0, FRAC_1_SQRT_2, 0.0]),
            Self([0.0, 0.0, 0.0, 0.0, FRAC_1_SQRT_2]),
        ]
    }

    pub fn to_basis_coords(&self) -> [f64; 5] {
        let e = Self::basis();
        std::array::from_fn(|i| e[i].dot(self))
    }

    pub fn from_basis_coords(c: &[f64; 5]) -> Self {
        let e = Self::basis();
        let mut out = Self::ZERO;
        for i in 0..5 {
            out += e[i] * c[i];
        }
        out
    }

    pub fn commutator_norm_inf(&self, o: &Self) -> f64 {
        let a = self.to_mat();
        let b = o.to_mat();
        (a * b - b * a).amax()
    }
}

impl Add for SymTraceless3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl Sub for SymTraceless3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl Neg for SymTraceless3 {
    type Output = Self;
    fn neg(self) -> Self {
        Self(self.0.map(|v| -v))
    }
}

impl Mul<f64> for SymTraceless3 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self(self.0.map(|v| v * s))
    }
}

impl Mul<SymTraceless3> for f64 {
    type Output = SymTraceless3;
    fn mul(self, a: SymTraceless3) -> SymTraceless3 {
        a * self
    }
}

impl AddAssign for SymTraceless3 {
    fn add_assign(&mut self, o: Self) {
        for i in 0..5 {
            self.0[i] += o.0[i];
        }
    }
}

impl SubAssign for SymTraceless3 {
    fn sub_assign(&mut self, o: Self) {
        for i in 0..5 {
            self.0[i] -= o.0[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_is_orthonormal() {
        let e = SymTraceless3::basis();
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((e[i].dot(&e[j]) - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn dot_matches_full_matrix_product() {
        let a = SymTraceless3::new(0.1, -0.3, 0.2, 0.05, -0.7);
        let b = SymTraceless3::new(-0.4, 0.2, 0.9, -0.1, 0.3);
        let full = (a.to_mat().transpose() * b.to_mat()).trace();
        assert!((a.dot(&b) - full).abs() < 1e-15);
        assert!((a.dot_mat(&b.to_mat()) - full).abs() < 1e-15);
    }

    #[test]
    fn basis_coords_roundtrip() {
        let a = SymTraceless3::new(0.1, -0.3, 0.2, 0.05, -0.7);
        let back = SymTraceless3::from_basis_coords(&a.to_basis_coords());
        assert!((a - back).norm_inf() < 1e-15);
    }

    #[test]
    fn uniaxial_zero_and_rejects_non_unit() {
        let n = Vec3::new(0.0, 0.6, 0.8);
        assert_eq!(SymTraceless3::uniaxial(0.0, &n).unwrap().norm(), 0.0);
        assert!(SymTraceless3::uniaxial(0.5, &Vec3::new(1.0, 1.0, 0.0)).is_err());
        let q = SymTraceless3::uniaxial(0.6, &Vec3::z()).unwrap();
        assert!((q.zz() - 0.4).abs() < 1e-15);
        assert!((q.xx() + 0.2).abs() < 1e-15);
    }

    #[test]
    fn from_mat_projects() {
        let m = Mat3::new(1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 10.0);
        let s = SymTraceless3::from_mat(&m).to_mat();
        assert!(s.trace().abs() < 1e-14);
        assert!((s - s.transpose()).amax() == 0.0);
        assert!((s[(0, 1)] - 3.0).abs() < 1e-15);
    }
}
