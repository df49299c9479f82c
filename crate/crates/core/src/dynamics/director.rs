use super::Grid;
use crate::error::{Error, Result};
use crate::leslie::LeslieCoefficients;
use crate::tensor::{split_gradient, Mat3, SymTraceless3, Vec3};

/// Director field (or a single director for homogeneous runs) at time t.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectorState {
    pub n: Vec<Vec3>,
    pub t: f64,
}

impl DirectorState {
    pub fn new(n: Vec<Vec3>) -> Result<Self> {
        for v in &n {
            if (v.norm() - 1.0).abs() > 1e-10 {
                return Err(Error::NonUnitVector(v.norm()));
            }
        }
        Ok(Self { n, t: 0.0 })
    }
}

/// −Ω·n + (1/γ₁)(I−nn)(h − γ₂D·n), with Ω = (κᵀ−κ)/2 and D = (κ+κᵀ)/2.
pub fn el_director_rhs(n: &Vec3, kappa: &Mat3, h: &Vec3, c: &LeslieCoefficients) -> Vec3 {
    let (d, omega) = split_gradient(kappa);
    let f = (h - d * n * c.gamma2) / c.gamma1;
    let r = -omega * n + (f - n * n.dot(&f));
    r - n * n.dot(&r)
}

/// RK4 step of the homogeneous (h = 0) director equation followed by renormalization.
pub fn el_step(n: &Vec3, kappa: &Mat3, c: &LeslieCoefficients, dt: f64) -> Vec3 {
    let h = Vec3::zeros();
    let f = |m: &Vec3| el_director_rhs(m, kappa, &h, c);
    let k1 = f(n);
    let k2 = f(&(n + k1 * (0.5 * dt)));
    let k3 = f(&(n + k2 * (0.5 * dt)));
    let k4 = f(&(n + k3 * dt));
    (n + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)).normalize()
}

pub fn el_integrate(n0: &Vec3, kappa: &Mat3, c: &LeslieCoefficients, dt: f64, steps: usize) -> Vec3 {
    (0..steps).fold(*n0, |n, _| el_step(&n, kappa, c, dt))
}

/// In-plane angle of n to the x axis, in (−π/2, π/2].
pub fn in_plane_angle(n: &Vec3) -> f64 {
    let a = n.y.atan2(n.x);
    if a > std::f64::consts::FRAC_PI_2 {
        a - std::f64::consts::PI
    } else if a <= -std::f64::consts::FRAC_PI_2 {
        a + std::f64::consts::PI
    } else {
        a
    }
}

/// Steady angle of the simple-shear director ODE, located by damped fixed-point iteration
/// on θ ← θ + τ(−1 + λ cos 2θ)/2.
pub fn steady_shear_angle(lambda: f64) -> Option<f64> {
    if lambda.abs() <= 1.0 {
        return None;
    }
    let mut theta = 0.25 * std::f64::consts::FRAC_PI_2 * lambda.signum();
    let tau = 0.5 / lambda.abs();
    for _ in 0..100_000 {
        let g = 0.5 * (-1.0 + lambda * (2.0 * theta).cos());
        theta += tau * g;
        if g.abs() < 1e-15 {
            break;
        }
    }
    Some(theta)
}

/// Tumbling period 2π/(γ̇√(1−λ²)) of the in-plane director in simple shear with |λ| < 1.
pub fn tumbling_period(lambda: f64, shear_rate: f64) -> Option<f64> {
    (lambda.abs() < 1.0).then(|| 2.0 * std::f64::consts::PI / (shear_rate * (1.0 - lambda * lambda).sqrt()))
}

/// Angle between two directors, insensitive to sign.
pub fn director_angle(a: &Vec3, b: &Vec3) -> f64 {
    a.dot(b).abs().min(1.0).acos()
}

/// Principal eigenvector of Q, oriented to agree with `prev` when supplied.
pub fn extract_director(q: &SymTraceless3, prev: Option<&Vec3>) -> Vec3 {
    let e = q.eig();
    let n: Vec3 = e.frame.column(0).into_owned();
    match prev {
        Some(p) if n.dot(p) < 0.0 => -n,
        _ => n,
    }
}

/// ‖Q − S(nn − I/3)‖ with n and S from the leading eigenpair, and the biaxiality λ₂ − λ₃.
pub fn manifold_distance(q: &SymTraceless3, s2: f64) -> (f64, f64) {
    let e = q.eig();
    let n: Vec3 = e.frame.column(0).into_owned();
    let u = SymTraceless3::uniaxial_unchecked(s2, &n);
    ((*q - u).norm(), e.values[1] - e.values[2])
}

/// Spectral solver for γ₁∂ₜn = (I−nn)KΔn on a periodic grid, with v = 0.
pub struct ElSolver1D {
    pub grid: Grid,
    pub k_frank: f64,
    pub gamma1: f64,
}

impl ElSolver1D {
    pub fn new(grid: Grid, k_frank: f64, gamma1: f64) -> Self {
        Self { grid, k_frank, gamma1 }
    }

    fn rhs(&self, n: &[Vec3]) -> Vec<Vec3> {
        let g = &self.grid;
        let lap: Vec<Vec<f64>> = (0..3)
            .map(|c| {
                let f: Vec<f64> = n.iter().map(|v| v[c]).collect();
                g.inverse(&g.laplacian(&g.forward(&f)))
            })
            .collect();
        n.iter()
            .enumerate()
            .map(|(i, v)| {
                let h = Vec3::new(lap[0][i], lap[1][i], lap[2][i]) * self.k_frank;
                (h - v * v.dot(&h)) / self.gamma1
            })
            .collect()
    }

    /// Largest stable RK4 step for the diffusive stiffness K k²/γ₁.
    pub fn stable_dt(&self) -> f64 {
        let kmax = (0..self.grid.len()).map(|i| self.grid.k2(i)).fold(0.0, f64::max);
        2.5 * self.gamma1 / (self.k_frank * kmax.max(1e-300))
    }

    pub fn step(&self, st: &mut DirectorState, dt: f64) {
        let add = |a: &[Vec3], b: &[Vec3], s: f64| -> Vec<Vec3> { a.iter().zip(b).map(|(x, y)| x + y * s).collect() };
        let k1 = self.rhs(&st.n);
        let k2 = self.rhs(&add(&st.n, &k1, 0.5 * dt));
        let k3 = self.rhs(&add(&st.n, &k2, 0.5 * dt));
        let k4 = self.rhs(&add(&st.n, &k3, dt));
        for i in 0..st.n.len() {
            st.n[i] = (st.n[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0)).normalize();
        }
        st.t += dt;
    }

    pub fn run(&self, st: &mut DirectorState, t_end: f64) {
        let steps = ((t_end - st.t) / (0.5 * self.stable_dt())).ceil().max(1.0) as usize;
        let dt = (t_end - st.t) / steps as f64;
        for _ in 0..steps {
            self.step(st, dt);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::leslie::{leslie_coefficients, leslie_from_order};
    use proptest::prelude::*;

    fn shear(rate: f64) -> Mat3 {
        let mut k = Mat3::zeros();
        k[(0, 1)] = rate;
        k
    }

    #[test]
    fn rest_state_is_stationary() {
        let c = leslie_coefficients(7.0).unwrap();
        let r = el_director_rhs(&Vec3::new(0.6, 0.8, 0.0), &Mat3::zeros(), &Vec3::zeros(), &c);
        assert_eq!(r, Vec3::zeros());
    }

    proptest! {
        #[test]
        fn rhs_is_orthogonal(n in prop::array::uniform3(-1.0f64..1.0), k in prop::array::uniform9(-2.0f64..2.0), h in prop::array::uniform3(-1.0f64..1.0)) {
            let n = Vec3::from(n);
            prop_assume!(n.norm() > 0.1);
            let n = n.normalize();
            let c = leslie_from_order(8.0, 0.7, 0.4, 0.0);
            let r = el_director_rhs(&n, &Mat3::from_row_slice(&k), &Vec3::from(h), &c);
            prop_assert!(r.dot(&n).abs() < 1e-12);
        }
    }

    #[test]
    fn flow_aligning_angle() {
        let c = leslie_from_order(7.0, 0.4, 0.2, 0.0);
        assert!(c.lambda > 1.0);
        let theta = steady_shear_angle(c.lambda).unwrap();
        assert!(((2.0 * theta).cos() - 1.0 / c.lambda).abs() < 1e-8);
        let n = el_integrate(&Vec3::new(0.0, 1.0, 0.0), &shear(1.0), &c, 0.01, 5000);
        assert!((in_plane_angle(&n) - theta).abs() < 1e-8);
        assert!(((2.0 * in_plane_angle(&n)).cos() - 1.0 / c.lambda).abs() < 1e-8);
    }

    #[test]
    fn tumbling_is_periodic() {
        let c = leslie_from_order(2.0, 0.9, 0.7, 0.0);
        assert!(c.lambda.abs() < 1.0);
        assert!(steady_shear_angle(c.lambda).is_none());
        let period = tumbling_period(c.lambda, 1.0).unwrap();
        assert!(period.is_finite());
        let n0 = Vec3::x();
        let steps = 4000;
        let n = el_integrate(&n0, &shear(1.0), &c, period / steps as f64, steps);
        assert!(director_angle(&n, &n0) < 1e-8);
        let half = el_integrate(&n0, &shear(1.0), &c, period / steps as f64, steps / 4);
        assert!(director_angle(&half, &n0) > 0.1);
    }

    #[test]
    fn unit_length_is_checked() {
        assert!(DirectorState::new(vec![Vec3::x()]).is_ok());
        assert!(matches!(DirectorState::new(vec![Vec3::new(1.0, 0.1, 0.0)]), Err(Error::NonUnitVector(_))));
    }

    #[test]
    fn planar_splay_follows_heat_equation() {
        let g = Grid::new(32, 1, 2.0 * std::f64::consts::PI, 1.0);
        let (k, g1) = (0.8, 1.3);
        let amp = 0.2;
        let theta0: Vec<f64> = (0..32).map(|i| amp * g.coords(i).0.sin()).collect();
        let mut st = DirectorState::new(theta0.iter().map(|t| Vec3::new(t.cos(), t.sin(), 0.0)).collect()).unwrap();
        let s = ElSolver1D::new(g.clone(), k, g1);
        s.run(&mut st, 1.0);
        let decay = (-k / g1).exp();
        for (i, n) in st.n.iter().enumerate() {
            assert!((in_plane_angle(n) - decay * theta0[i]).abs() < 1e-9);
            assert!((n.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn extraction_follows_previous_sign() {
        let n = Vec3::new(0.3, -0.2, 0.9).normalize();
        let q = SymTraceless3::uniaxial(0.6, &n).unwrap();
        assert!((extract_director(&q, Some(&n)) - n).norm() < 1e-12);
        assert!((extract_director(&q, Some(&-n)) + n).norm() < 1e-12);
        let (d, b) = manifold_distance(&q, 0.6);
        assert!(d < 1e-14 && b.abs() < 1e-14);
    }
}
