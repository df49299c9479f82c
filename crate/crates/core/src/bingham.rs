//! Inversion of the Bingham closure relation Q = ⟨mm⟩_{f_B} − I/3 for B.

use crate::error::{Error, Result};
use crate::quadrature::{sixth_from_diag, DiagStats, MomentSet, QuadratureRule};
use crate::tensor::{Eigen, Mat3, Sym4Moment, SymTraceless3, Vec3};

pub const DEFAULT_TOL: f64 = 1e-11;
pub const DEFAULT_MAX_ITER: usize = 100;
/// Inputs closer than this to the boundary of the admissible set are rejected.
pub const MIN_MARGIN: f64 = 1e-6;
/// Cold-start guess B₀ = INITIAL_GAIN·Q.
pub const INITIAL_GAIN: f64 = 5.0;
const MAX_HALVINGS: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Admissibility {
    pub eigenvalues: [f64; 3],
    pub margin: f64,
    pub admissible: bool,
}

/// Eigenvalue test against the open interval (−1/3, 2/3).
pub fn check_admissible(q: &SymTraceless3) -> Admissibility {
    admissibility_from(q.eig().values)
}

fn admissibility_from(values: [f64; 3]) -> Admissibility {
    let margin = values
        .iter()
        .map(|l| (l + 1.0 / 3.0).min(2.0 / 3.0 - l))
        .fold(f64::INFINITY, f64::min);
    Admissibility {
        eigenvalues: values,
        margin,
        admissible: margin > 0.0,
    }
}

#[derive(Clone, Debug)]
pub struct BinghamResult {
    pub b: SymTraceless3,
    pub moments: MomentSet,
    pub iterations: usize,
    pub residual: f64,
}

/// Closure data without sixth moments, for inner loops.
#[derive(Clone, Copy, Debug)]
pub struct Closure {
    pub b: SymTraceless3,
    pub ln_z: f64,
    pub m4: Sym4Moment,
    pub iterations: usize,
    pub residual: f64,
    pub margin: f64,
}

/// Solves for B_Q from the cold start B₀ = 5Q.
pub fn solve_bq(q: &SymTraceless3, rule: &QuadratureRule, tol: f64, max_iter: usize) -> Result<BinghamResult> {
    BinghamSolver::new(rule, tol, max_iter).solve(q, None)
}

/// Newton solver on the two free eigenvalues of B in the eigenframe of Q.
#[derive(Clone, Copy, Debug)]
pub struct BinghamSolver<'a> {
    pub rule: &'a QuadratureRule,
    pub tol: f64,
    pub max_iter: usize,
}

struct FrameSolution {
    eig: Eigen,
    c: [f64; 2],
    stats: DiagStats,
    iterations: usize,
    margin: f64,
}

impl<'a> BinghamSolver<'a> {
    pub fn new(rule: &'a QuadratureRule, tol: f64, max_iter: usize) -> Self {
        assert!(tol >= 1e-12, "tolerance below 1e-12 is not supported");
        Self { rule, tol, max_iter }
    }

    pub fn with_defaults(rule: &'a QuadratureRule) -> Self {
        Self::new(rule, DEFAULT_TOL, DEFAULT_MAX_ITER)
    }

    /// Full solve with lab-frame second, fourth and sixth moments.
    pub fn solve(&self, q: &SymTraceless3, guess: Option<&SymTraceless3>) -> Result<BinghamResult> {
        let s = self.solve_frame(q, guess)?;
        let r = s.eig.frame;
        let b = frame_b(&s);
        let m2d = Mat3::from_diagonal(&Vec3::new(s.stats.x, s.stats.y, s.stats.z_mean()));
        let m6 = sixth_from_diag(&self.rule.diag_sixth(s.c[0], s.c[1]));
        let moments = MomentSet {
            z: (s.stats.ln_z + b3(&s.c)).exp(),
            ln_z: s.stats.ln_z + b3(&s.c),
            m2: r * m2d * r.transpose(),
            m4: s.stats.fourth().rotated(&r),
            m6: m6.rotated(&r),
        };
        let residual = (SymTraceless3::from_mat(&moments.m2) - *q).norm_inf();
        Ok(BinghamResult {
            b,
            moments,
            iterations: s.iterations,
            residual,
        })
    }

    /// B_Q, ln Z_Q and M⁽⁴⁾_Q in the lab frame.
    pub fn closure(&self, q: &SymTraceless3, guess: Option<&SymTraceless3>) -> Result<Closure> {
        let s = self.solve_frame(q, guess)?;
        let r = s.eig.frame;
        let m2d = Mat3::from_diagonal(&Vec3::new(s.stats.x, s.stats.y, s.stats.z_mean()));
        let residual = (SymTraceless3::from_mat(&(r * m2d * r.transpose())) - *q).norm_inf();
        Ok(Closure {
            b: frame_b(&s),
            ln_z: s.stats.ln_z + b3(&s.c),
            m4: s.stats.fourth().rotated(&r),
            iterations: s.iterations,
            residual,
            margin: s.margin,
        })
    }

    fn solve_frame(&self, q: &SymTraceless3, guess: Option<&SymTraceless3>) -> Result<FrameSolution> {
        let eig = q.eig();
        let adm = admissibility_from(eig.values);
        if adm.margin < MIN_MARGIN {
            return Err(Error::NonAdmissible { margin: adm.margin });
        }
        let l = eig.values;
        let target = [l[0] + 1.0 / 3.0, l[1] + 1.0 / 3.0];
        let mut c = match guess {
            None => [INITIAL_GAIN * (l[0] - l[2]), INITIAL_GAIN * (l[1] - l[2])],
            Some(g) => {
                let gm = g.to_mat();
                let d: [f64; 3] = std::array::from_fn(|a| {
                    let v = eig.frame.column(a);
                    v.dot(&(gm * v))
                });
                [d[0] - d[2], d[1] - d[2]]
            }
        };
        let mut stats = self.rule.diag_stats(c[0], c[1]);
        let mut res = residual(&stats, &target);
        let mut iterations = 0;
        while res > self.tol {
            if iterations >= self.max_iter {
                return Err(Error::NoConvergence { iterations, residual: res });
            }
            let j = stats.covariance();
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if !(j[0][0] > 0.0 && det > 0.0) {
                return Err(Error::NoConvergence { iterations, residual: res });
            }
            let r0 = stats.x - target[0];
            let r1 = stats.y - target[1];
            let d = [-(j[1][1] * r0 - j[0][1] * r1) / det, -(j[0][0] * r1 - j[1][0] * r0) / det];
            let mut step = 1.0;
            let mut accepted = false;
            for _ in 0..=MAX_HALVINGS {
                let trial = [c[0] + step * d[0], c[1] + step * d[1]];
                let ts = self.rule.diag_stats(trial[0], trial[1]);
                let tr = residual(&ts, &target);
                if tr < res {
                    c = trial;
                    stats = ts;
                    res = tr;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            iterations += 1;
            if !accepted {
                return Err(Error::NoConvergence { iterations, residual: res });
            }
        }
        Ok(FrameSolution {
            eig,
            c,
            stats,
            iterations,
            margin: adm.margin,
        })
    }
}

fn residual(s: &DiagStats, t: &[f64; 2]) -> f64 {
    let r0 = s.x - t[0];
    let r1 = s.y - t[1];
    r0.abs().max(r1.abs()).max((r0 + r1).abs())
}

fn b3(c: &[f64; 2]) -> f64 {
    -(c[0] + c[1]) / 3.0
}

fn frame_b(s: &FrameSolution) -> SymTraceless3 {
    let b3 = b3(&s.c);
    let d = Vec3::new(s.c[0] + b3, s.c[1] + b3, b3);
    let r = s.eig.frame;
    SymTraceless3::from_mat(&(r * Mat3::from_diagonal(&d) * r.transpose()))
}

/// Random admissible Q with every eigenvalue at least `margin` inside (−1/3, 2/3).
pub fn random_admissible<R: rand::Rng>(rng: &mut R, margin: f64) -> SymTraceless3 {
    loop {
        let l1 = rng.random_range(-1.0 / 3.0 + margin..2.0 / 3.0 - margin);
        let l2 = rng.random_range(-1.0 / 3.0 + margin..2.0 / 3.0 - margin);
        let l3 = -l1 - l2;
        if l3 > -1.0 / 3.0 + margin && l3 < 2.0 / 3.0 - margin {
            let r = random_rotation(rng);
            let d = Mat3::from_diagonal(&Vec3::new(l1, l2, l3));
            return SymTraceless3::from_mat(&(r * d * r.transpose()));
        }
    }
}

/// Uniformly distributed rotation from a random unit quaternion.
pub fn random_rotation<R: rand::Rng>(rng: &mut R) -> Mat3 {
    loop {
        let q: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n2: f64 = q.iter().map(|v| v * v).sum();
        if n2 > 1e-4 && n2 <= 1.0 {
            let uq = nalgebra::UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(q[0], q[1], q[2], q[3]));
            return *uq.to_rotation_matrix().matrix();
        }
    }
}

/// Uniformly distributed unit vector.
pub fn random_unit<R: rand::Rng>(rng: &mut R) -> Vec3 {
    random_rotation(rng).column(2).into()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{ak, order_parameters};
    use crate::quadrature::moments_of;
    use crate::tensor::mq_apply;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rule() -> QuadratureRule {
        QuadratureRule::new(32)
    }

    #[test]
    fn admissibility_examples() {
        let a = check_admissible(&SymTraceless3::ZERO);
        assert!(a.admissible && (a.margin - 1.0 / 3.0).abs() < 1e-15);
        let n = Vec3::new(0.0, 0.6, 0.8);
        assert!(!check_admissible(&SymTraceless3::uniaxial(1.0, &n).unwrap()).admissible);
        let a = check_admissible(&SymTraceless3::uniaxial(0.95, &n).unwrap());
        assert!(a.admissible);
        assert!((a.margin - (1.0 - 0.95) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_maps_to_zero() {
        let r = solve_bq(&SymTraceless3::ZERO, &rule(), DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(r.b.norm(), 0.0);
        assert!(r.iterations <= 1);
        assert!((r.moments.z - 4.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn uniaxial_recovers_eta() {
        let eta = 3.0;
        let n = Vec3::new(1.0, 2.0, -2.0) / 3.0;
        let (s2, _) = order_parameters(eta);
        let q = SymTraceless3::uniaxial(s2, &n).unwrap();
        let r = solve_bq(&q, &rule(), DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        let want = SymTraceless3::uniaxial(eta, &n).unwrap();
        assert!((r.b - want).norm_inf() < 1e-8);
        assert!(((n.transpose() * r.moments.m2 * n)[0] - ak(2, eta) / ak(0, eta)).abs() < 1e-10);
    }

    #[test]
    fn rejects_boundary_inputs() {
        let n = Vec3::z();
        let q = SymTraceless3::uniaxial(1.0 - 1e-7, &n).unwrap();
        assert!(matches!(
            solve_bq(&q, &rule(), DEFAULT_TOL, DEFAULT_MAX_ITER),
            Err(Error::NonAdmissible { .. })
        ));
    }

    #[test]
    fn reports_no_convergence() {
        let q = SymTraceless3::uniaxial(0.9, &Vec3::z()).unwrap();
        assert!(matches!(
            solve_bq(&q, &rule(), DEFAULT_TOL, 1),
            Err(Error::NoConvergence { .. })
        ));
    }

    #[test]
    fn roundtrip_and_lemma_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rule = rule();
        for _ in 0..40 {
            let q = random_admissible(&mut rng, 0.05);
            let r = solve_bq(&q, &rule, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
            assert!(r.residual <= DEFAULT_TOL);
            let fwd = moments_of(&r.b, &rule);
            assert!((fwd.q() - q).norm_inf() < 1e-10);
            let b = r.b.to_mat();
            let lhs = mq_apply(&q, &r.moments.m4, &b);
            assert!((lhs - q.to_mat() * 1.5).amax() < 1e-9);
            assert!(r.b.commutator_norm_inf(&q) < 1e-9);
        }
    }

    #[test]
    fn covariance_jacobian_is_positive_definite() {
        let rule = rule();
        for c1 in [-40.0, -5.0, 0.0, 3.0, 30.0] {
            for c2 in [-35.0, -1.0, 0.0, 7.0, 45.0] {
                let j = rule.diag_stats(c1, c2).covariance();
                let det = j[0][0] * j[1][1] - j[0][1] * j[0][1];
                assert!(j[0][0] > 0.0 && det > 0.0, "{c1} {c2}");
            }
        }
    }

    #[test]
    fn warm_start_is_cheap() {
        let rule = rule();
        let s = BinghamSolver::with_defaults(&rule);
        let q = SymTraceless3::new(0.2, -0.1, 0.05, 0.02, -0.03);
        let b = s.solve(&q, None).unwrap().b;
        let dq = SymTraceless3::new(1e-3, -2e-3, 5e-4, 0.0, 1e-3);
        let r = s.solve(&(q + dq), Some(&b)).unwrap();
        assert!(r.iterations <= 3);
        let full = s.solve(&(q + dq), None).unwrap();
        assert!((r.b - full.b).norm_inf() < 1e-8);
    }

    #[test]
    fn closure_matches_full_solve() {
        let rule = rule();
        let s = BinghamSolver::with_defaults(&rule);
        let q = SymTraceless3::new(0.3, -0.25, 0.1, -0.05, 0.12);
        let a = s.solve(&q, None).unwrap();
        let c = s.closure(&q, None).unwrap();
        assert_eq!(a.b, c.b);
        assert!((a.moments.m4 - c.m4).norm_inf() < 1e-15);
        assert!((a.moments.ln_z - c.ln_z).abs() < 1e-15);
    }

    #[test]
    fn log_partition_gradient_is_b() {
        let rule = rule();
        let s = BinghamSolver::with_defaults(&rule);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = |q: &SymTraceless3| {
            let c = s.closure(q, None).unwrap();
            -c.ln_z + q.dot(&c.b)
        };
        for _ in 0..10 {
            let q = random_admissible(&mut rng, 0.08);
            let dir = SymTraceless3::from_mat(&(random_rotation(&mut rng) * Mat3::from_diagonal(&Vec3::new(1.0, -0.4, -0.6))));
            let h = 1e-4;
            let fd = (f(&(q + dir * h)) - f(&(q - dir * h))) / (2.0 * h);
            let b = s.closure(&q, None).unwrap().b;
            assert!((fd - b.dot(&dir)).abs() < 1e-6, "{fd} {}", b.dot(&dir));
        }
    }
}
