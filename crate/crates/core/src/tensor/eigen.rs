use super::{Mat3, SymTraceless3, Vec3};

/// Eigenvalues in descending order with the matching orthonormal frame (columns).
#[derive(Clone, Copy, Debug)]
pub struct Eigen {
    pub values: [f64; 3],
    pub frame: Mat3,
}

impl Eigen {
    pub fn reconstruct(&self) -> Mat3 {
        self.frame * Mat3::from_diagonal(&Vec3::from(self.values)) * self.frame.transpose()
    }
}

const CLUSTER_TOL: f64 = 1e-8;

pub(crate) fn eig_sym_traceless(q: &SymTraceless3) -> Eigen {
    let a = q.to_mat();
    let p2 = q.dot(q) / 6.0;
    if p2 == 0.0 {
        return Eigen {
            values: [0.0; 3],
            frame: Mat3::identity(),
        };
    }
    let p = p2.sqrt();
    let r = (a.determinant() / (2.0 * p * p2)).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let l1 = 2.0 * p * phi.cos();
    let l3 = 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3).cos();
    let l2 = -l1 - l3;
    let scale = l1.abs().max(l3.abs());
    if (l1 - l2) < CLUSTER_TOL * scale || (l2 - l3) < CLUSTER_TOL * scale {
        return jacobi(&a);
    }
    let v1 = null_vector(&a, l1);
    let v3 = null_vector(&a, l3);
    let v3 = (v3 - v1 * v1.dot(&v3)).normalize();
    let v2 = v3.cross(&v1);
    let out = Eigen {
        values: [l1, l2, l3],
        frame: Mat3::from_columns(&[v1, v2, v3]),
    };
    if (out.reconstruct() - a).amax() > 1e-14 * (1.0 + scale) {
        return jacobi(&a);
    }
    out
}

/// Unit vector spanning the null space of A − λI (simple eigenvalue).
fn null_vector(a: &Mat3, lambda: f64) -> Vec3 {
    let m = a - Mat3::identity() * lambda;
    let r0 = m.row(0).transpose();
    let r1 = m.row(1).transpose();
    let r2 = m.row(2).transpose();
    let c = [r0.cross(&r1), r0.cross(&r2), r1.cross(&r2)];
    let best = c
        .iter()
        .max_by(|x, y| x.norm_squared().total_cmp(&y.norm_squared()))
        .unwrap();
    best.normalize()
}

/// Cyclic Jacobi on a symmetric 3×3 matrix.
fn jacobi(a0: &Mat3) -> Eigen {
    let mut a = *a0;
    let mut v = Mat3::identity();
    for _ in 0..50 {
        let off = a[(0, 1)].powi(2) + a[(0, 2)].powi(2) + a[(1, 2)].powi(2);
        if off < 1e-300 || off.sqrt() <= f64::EPSILON * 1e-3 * a.amax() {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let apq = a[(p, q)];
            if apq == 0.0 {
                continue;
            }
            let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            let mut g = Mat3::identity();
            g[(p, p)] = c;
            g[(q, q)] = c;
            g[(p, q)] = s;
            g[(q, p)] = -s;
            a = g.transpose() * a * g;
            a[(p, q)] = 0.0;
            a[(q, p)] = 0.0;
            v *= g;
        }
    }
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let cols: [Vec3; 3] = std::array::from_fn(|k| v.column(idx[k]).into_owned());
    let mut frame = Mat3::from_columns(&cols);
    if frame.determinant() < 0.0 {
        frame.set_column(2, &(-frame.column(2)));
    }
    let d = [a[(idx[0], idx[0])], a[(idx[1], idx[1])], a[(idx[2], idx[2])]];
    let mean = (d[0] + d[1] + d[2]) / 3.0;
    Eigen {
        values: d.map(|x| x - mean),
        frame,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn check(q: &SymTraceless3) {
        let e = q.eig();
        assert!((e.reconstruct() - q.to_mat()).amax() < 1e-13);
        assert!(e.values[0] >= e.values[1] && e.values[1] >= e.values[2]);
        assert!(e.values.iter().sum::<f64>().abs() < 1e-14);
        assert!((e.frame.transpose() * e.frame - Mat3::identity()).amax() < 1e-13);
        assert!((e.frame.determinant() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn zero_is_identity_frame() {
        let e = SymTraceless3::ZERO.eig();
        assert_eq!(e.values, [0.0; 3]);
        assert_eq!(e.frame, Mat3::identity());
    }

    #[test]
    fn uniaxial_values() {
        let q = SymTraceless3::uniaxial(0.6, &Vec3::z()).unwrap();
        let e = q.eig();
        assert!((e.values[0] - 0.4).abs() < 1e-15);
        assert!((e.values[1] + 0.2).abs() < 1e-15);
        assert!((e.values[2] + 0.2).abs() < 1e-15);
        assert!((e.frame.column(0).z.abs() - 1.0).abs() < 1e-15);
        check(&q);
    }

    #[test]
    fn nearly_degenerate_pairs() {
        let n = Vec3::new(0.3, -0.4, 0.5).normalize();
        for d in [0.0, 1e-14, 1e-10, 1e-8, 1e-6] {
            let q = SymTraceless3::uniaxial(0.5, &n).unwrap() + SymTraceless3::new(d, -d, 0.0, 0.0, 0.0);
            check(&q);
            check(&(-q));
        }
    }

    proptest! {
        #[test]
        fn random_reconstruction(c in prop::array::uniform5(-1.0f64..1.0)) {
            check(&SymTraceless3(c));
        }
    }
}
