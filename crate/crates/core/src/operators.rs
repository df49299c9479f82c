//! Linear operators 𝒬ₙ, 𝒥ₙ, 𝒦ₙ, ℒₙ on the traceless symmetric matrices at a uniaxial equilibrium.

use nalgebra::{SMatrix, SymmetricEigen};

use crate::equilibria::EquilibriumData;
use crate::quadrature::{moments_of, QuadratureRule};
use crate::tensor::{orthonormal_completion, Mat3, Sym6Moment, SymTraceless3, Vec3};

pub type Mat5 = SMatrix<f64, 5, 5>;

/// Relative threshold separating kernel eigenvalues from the spectral gap.
pub const KERNEL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    Qn,
    Jn,
    Kn,
    Ln,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 4] = [OperatorKind::Qn, OperatorKind::Jn, OperatorKind::Kn, OperatorKind::Ln];

    pub fn name(&self) -> &'static str {
        match self {
            OperatorKind::Qn => "Qn",
            OperatorKind::Jn => "Jn",
            OperatorKind::Kn => "Kn",
            OperatorKind::Ln => "Ln",
        }
    }
}

/// 𝒬ₙ(B) = M⁽⁴⁾:B − I(Q₀:B)/3 − Q₀(Q₀:B).
pub fn qn_apply(b: &SymTraceless3, eq: &EquilibriumData) -> SymTraceless3 {
    let qb = eq.q0.dot(b);
    let m = eq.m4.contract_sym(b) - Mat3::identity() * (qb / 3.0) - eq.q0.to_mat() * qb;
    SymTraceless3::from_mat(&m)
}

/// 𝒥ₙ(B) = B/3 + (B·Q₀ + Q₀·B)/2 − B:M⁽⁴⁾.
pub fn jn_apply(b: &SymTraceless3, eq: &EquilibriumData) -> SymTraceless3 {
    let bm = b.to_mat();
    let q = eq.q0.to_mat();
    SymTraceless3::from_mat(&(bm / 3.0 + (bm * q + q * bm) * 0.5 - eq.m4.contract(&bm)))
}

/// 𝒦ₙ = Id − α𝒬ₙ.
pub fn kn_apply(b: &SymTraceless3, eq: &EquilibriumData) -> SymTraceless3 {
    *b - qn_apply(b, eq) * eq.alpha
}

/// ℒₙ = −2𝒥ₙ∘𝒦ₙ.
pub fn ln_apply(b: &SymTraceless3, eq: &EquilibriumData) -> SymTraceless3 {
    jn_apply(&kn_apply(b, eq), eq) * -2.0
}

pub fn apply(kind: OperatorKind, b: &SymTraceless3, eq: &EquilibriumData) -> SymTraceless3 {
    match kind {
        OperatorKind::Qn => qn_apply(b, eq),
        OperatorKind::Jn => jn_apply(b, eq),
        OperatorKind::Kn => kn_apply(b, eq),
        OperatorKind::Ln => ln_apply(b, eq),
    }
}

/// 5×5 representation in the basis E₁..E₅.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub kind: OperatorKind,
    pub matrix: Mat5,
    pub n: Vec3,
    pub alpha: f64,
    pub eta: f64,
    pub s2: f64,
    pub s4: f64,
}

pub fn operator_matrix(kind: OperatorKind, eq: &EquilibriumData) -> OperatorMatrix {
    let e = SymTraceless3::basis();
    let mut m = Mat5::zeros();
    for j in 0..5 {
        let col = apply(kind, &e[j], eq);
        for i in 0..5 {
            m[(i, j)] = e[i].dot(&col);
        }
    }
    OperatorMatrix {
        kind,
        matrix: m,
        n: eq.n,
        alpha: eq.alpha,
        eta: eq.eta,
        s2: eq.s2,
        s4: eq.s4,
    }
}

impl OperatorMatrix {
    pub fn asymmetry(&self) -> f64 {
        (self.matrix - self.matrix.transpose()).amax()
    }

    /// Eigenvalues of the symmetric part, ascending.
    pub fn eigenvalues(&self) -> [f64; 5] {
        let sym = (self.matrix + self.matrix.transpose()) * 0.5;
        let mut v: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().cloned().collect();
        v.sort_by(f64::total_cmp);
        [v[0], v[1], v[2], v[3], v[4]]
    }

    /// Eigenpairs of the symmetric part, ascending.
    pub fn eigen(&self) -> Vec<(f64, SymTraceless3)> {
        let sym = (self.matrix + self.matrix.transpose()) * 0.5;
        let se = SymmetricEigen::new(sym);
        let mut out: Vec<(f64, SymTraceless3)> = (0..5)
            .map(|k| {
                let c: [f64; 5] = std::array::from_fn(|i| se.eigenvectors[(i, k)]);
                (se.eigenvalues[k], SymTraceless3::from_basis_coords(&c))
            })
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }

    pub fn kernel_dim(&self) -> usize {
        let scale = self.matrix.amax().max(f64::MIN_POSITIVE);
        self.eigenvalues().iter().filter(|l| l.abs() <= KERNEL_TOL * scale).count()
    }

    /// Smallest eigenvalue outside the kernel.
    pub fn spectral_gap(&self) -> f64 {
        let scale = self.matrix.amax();
        self.eigenvalues()
            .iter()
            .filter(|l| l.abs() > KERNEL_TOL * scale)
            .fold(f64::INFINITY, |m, l| m.min(l.abs()))
    }
}

/// {nn₁+n₁n, nn₂+n₂n}/√2 for an orthonormal completion of n.
pub fn kernel_basis(n: &Vec3) -> [SymTraceless3; 2] {
    let (n1, n2) = orthonormal_completion(n);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mk = |m: Vec3| SymTraceless3::from_mat(&((n * m.transpose() + m * n.transpose()) * s));
    [mk(n1), mk(n2)]
}

/// Sixth moment of the equilibrium density by sphere quadrature at B₀.
pub fn equilibrium_m6(eq: &EquilibriumData, rule: &QuadratureRule) -> Sym6Moment {
    moments_of(&eq.b0, rule).m6
}

/// Both sides of B₀:[M⁽⁶⁾:B − M⁽⁴⁾(Q₀:B)] = B₀·𝒬ₙ(B) + B·Q₀ + B/3 − B:M⁽⁴⁾ − (3/2)𝒬ₙ(B).
pub fn q6_identity_sides(b: &SymTraceless3, eq: &EquilibriumData, m6: &Sym6Moment) -> (Mat3, Mat3) {
    let bm = b.to_mat();
    let b0 = eq.b0.to_mat();
    let lhs = (m6.contract(&bm) - eq.m4 * eq.q0.dot(b)).contract(&b0);
    let qn = qn_apply(b, eq).to_mat();
    let rhs = b0 * qn + bm * eq.q0.to_mat() + bm / 3.0 - eq.m4.contract(&bm) - qn * 1.5;
    (lhs, rhs)
}

/// ∞-norm of the difference of the two sides of the sixth-moment identity.
pub fn check_q6_identity(b: &SymTraceless3, eq: &EquilibriumData, m6: &Sym6Moment) -> f64 {
    let (l, r) = q6_identity_sides(b, eq, m6);
    (l - r).amax()
}

/// ⟨𝒦ₙ(B), B⟩ from the n-frame components of B.
pub fn kn_quadratic_form_frame(b: &SymTraceless3, eq: &EquilibriumData) -> f64 {
    let (n1, n2) = orthonormal_completion(&eq.n);
    let bm = b.to_mat();
    let h = |u: &Vec3, v: &Vec3| u.dot(&(bm * v));
    let (b11, b22, b12) = (h(&n1, &n1), h(&n2, &n2), h(&n1, &n2));
    let c = (6.0 * eq.a2 - 5.0 * eq.a4 - eq.a0) / (2.0 * (eq.a2 - eq.a4));
    c * (b12 * b12 - b11 * b22) + eq.alpha * (eq.s2 * eq.s2 - eq.s4) * (b11 + b22).powi(2)
}

/// Both sides of 4α(S₂²−S₄) − c = 3(3A₂²+2A₀A₂−5A₀A₄)/((A₂−A₄)A₀).
pub fn positivity_certificate(eq: &EquilibriumData) -> (f64, f64) {
    let (a0, a2, a4) = (eq.a0, eq.a2, eq.a4);
    let c = (6.0 * a2 - 5.0 * a4 - a0) / (2.0 * (a2 - a4));
    let lhs = 4.0 * eq.alpha * (eq.s2 * eq.s2 - eq.s4) - c;
    let rhs = 3.0 / (a2 - a4) * (3.0 * a2 * a2 + 2.0 * a0 * a2 - 5.0 * a0 * a4) / a0;
    (lhs, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{equilibrium_data, Root};
    use crate::tensor::Sym4Moment;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn eq7() -> EquilibriumData {
        equilibrium_data(7.0, &Vec3::new(0.36, 0.48, 0.8)).unwrap()
    }

    fn random_b(rng: &mut ChaCha8Rng) -> SymTraceless3 {
        SymTraceless3(std::array::from_fn(|_| rng.random_range(-1.0..1.0)))
    }

    #[test]
    fn isotropic_reduction() {
        let root = Root {
            eta: 0.0,
            a0: 1.0,
            a2: 1.0 / 3.0,
            a4: 0.2,
            s2: 0.0,
            s4: 0.0,
            double: false,
        };
        let eq = crate::equilibria::equilibrium_at(4.0, &root, &Vec3::z());
        assert!((eq.m4 - Sym4Moment::isotropic()).norm_inf() < 1e-16);
        let b = SymTraceless3::new(0.3, -0.1, 0.2, 0.7, -0.4);
        assert!((qn_apply(&b, &eq) - b * (2.0 / 15.0)).norm_inf() < 1e-15);
        let k = operator_matrix(OperatorKind::Kn, &eq);
        assert!((k.matrix - Mat5::identity() * (1.0 - 8.0 / 15.0)).amax() < 1e-15);
    }

    #[test]
    fn kernel_is_annihilated() {
        let eq = eq7();
        for b in kernel_basis(&eq.n) {
            assert!(kn_apply(&b, &eq).norm() <= 1e-10);
            assert!(ln_apply(&b, &eq).norm() <= 1e-10);
            assert!(kn_apply(&b, &eq).dot(&b).abs() <= 1e-10);
        }
    }

    #[test]
    fn kernel_basis_for_z_director() {
        let k = kernel_basis(&Vec3::z());
        for b in k {
            assert!(b.xx().abs() < 1e-16 && b.yy().abs() < 1e-16 && b.xy().abs() < 1e-16);
        }
        assert!((k[0].dot(&k[0]) - 1.0).abs() < 1e-15);
        assert!(k[0].dot(&k[1]).abs() < 1e-15);
    }

    #[test]
    fn quadratic_form_is_nonnegative() {
        let eq = eq7();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let b = random_b(&mut rng);
            let kb = kn_apply(&b, &eq).dot(&b);
            assert!(kb >= -1e-12);
            assert!((kb - kn_quadratic_form_frame(&b, &eq)).abs() <= 1e-10);
        }
    }

    #[test]
    fn spectra_and_symmetry() {
        let eq = eq7();
        for kind in OperatorKind::ALL {
            let m = operator_matrix(kind, &eq);
            assert!(m.asymmetry() <= 1e-12, "{:?} {}", kind, m.asymmetry());
        }
        let k = operator_matrix(OperatorKind::Kn, &eq);
        let ev = k.eigenvalues();
        assert!(ev[0].abs() <= 1e-10 && ev[1].abs() <= 1e-10 && ev[2] > 0.0);
        assert_eq!(k.kernel_dim(), 2);
        assert!(k.spectral_gap() > 0.0);
        let l = operator_matrix(OperatorKind::Ln, &eq);
        assert_eq!(l.kernel_dim(), 2);
        let j = operator_matrix(OperatorKind::Jn, &eq);
        assert!(j.eigenvalues()[0] > 0.0);
        let prod = j.matrix * k.matrix * -2.0;
        assert!((prod - l.matrix).amax() < 1e-12);
        // kernel eigenvectors lie in the span of the analytic kernel basis
        let basis = kernel_basis(&eq.n);
        for (_, v) in k.eigen().into_iter().take(2) {
            let proj = basis[0] * basis[0].dot(&v) + basis[1] * basis[1].dot(&v);
            assert!((proj - v).norm() < 1e-8);
        }
    }

    #[test]
    fn sixth_moment_identity() {
        let eq = eq7();
        let m6 = equilibrium_m6(&eq, &QuadratureRule::new(32));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for b in kernel_basis(&eq.n) {
            assert!(check_q6_identity(&b, &eq, &m6) <= 1e-9);
        }
        for _ in 0..20 {
            let b = random_b(&mut rng);
            assert!(check_q6_identity(&b, &eq, &m6) <= 1e-9);
            let k = kn_apply(&b, &eq);
            assert!(k.commutator_norm_inf(&eq.q0) <= 1e-10);
        }
    }

    #[test]
    fn certificate_identity_and_sign() {
        for alpha in [6.9, 7.0, 10.0, 20.0] {
            let eq = equilibrium_data(alpha, &Vec3::x()).unwrap();
            let (l, r) = positivity_certificate(&eq);
            assert!((l - r).abs() <= 1e-10 * r.abs().max(1.0), "{alpha} {l} {r}");
            assert!(r > 0.0);
        }
    }

    #[test]
    fn qn_is_derivative_of_closure() {
        // 𝒬ₙ(B) = d/dt Q(B₀ + tB) at t = 0
        let eq = eq7();
        let rule = QuadratureRule::new(32);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let b = random_b(&mut rng);
        let h = 1e-5;
        let qp = moments_of(&(eq.b0 + b * h), &rule).q();
        let qm = moments_of(&(eq.b0 - b * h), &rule).q();
        let fd = (qp - qm) * (0.5 / h);
        assert!((fd - qn_apply(&b, &eq)).norm_inf() < 1e-8);
    }
}
