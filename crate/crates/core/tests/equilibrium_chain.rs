use nematic::bingham::BinghamSolver;
use nematic::dynamics::homogeneous::HomogeneousIntegrator;
use nematic::dynamics::FlowParams;
use nematic::equilibria::equilibrium_data;
use nematic::leslie::leslie_coefficients;
use nematic::operators::{kernel_basis, operator_matrix, OperatorKind};
use nematic::quadrature::QuadratureRule;
use nematic::tensor::{Mat3, Vec3};

fn director(theta: f64, phi: f64) -> Vec3 {
    Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
}

#[test]
fn closure_inverts_the_equilibrium_order_tensor() {
    let rule = QuadratureRule::new(48);
    let solver = BinghamSolver::with_defaults(&rule);
    for (alpha, n) in [(7.0, director(0.3, 1.1)), (10.0, director(1.2, -0.4)), (15.0, director(2.0, 2.5))] {
        let eq = equilibrium_data(alpha, &n).unwrap();
        assert!((eq.eta - alpha * eq.s2).abs() <= 1e-10 * eq.eta);
        let r = solver.solve(&eq.q0, None).unwrap();
        assert!((r.b - eq.b0).norm_inf() <= 1e-8 * eq.eta, "alpha={alpha}");
        let m4 = r.moments.m4.to_dense();
        let expect = eq.m4.to_dense();
        let err = m4.iter().zip(&expect).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err <= 1e-10, "alpha={alpha}: {err:e}");
    }
}

#[test]
fn equilibrium_is_a_rest_state_of_the_homogeneous_flow() {
    let rule = QuadratureRule::new(32);
    let n = director(0.7, 0.2);
    let eq = equilibrium_data(7.0, &n).unwrap();
    let p = FlowParams { alpha_ms: 7.0, ..Default::default() };
    let mut ode = HomogeneousIntegrator::new(BinghamSolver::with_defaults(&rule), p).unwrap();
    let rhs = ode.rhs(&eq.q0, &Mat3::zeros()).unwrap();
    assert!(rhs.norm_inf() <= 1e-9, "{:e}", rhs.norm_inf());
    let q = ode.run(&eq.q0, &Mat3::zeros(), 0.05, 40, |_, _| {}).unwrap();
    assert!((q - eq.q0).norm_inf() <= 1e-9);
}

#[test]
fn kernel_and_coefficients_share_the_same_branch() {
    for alpha in [7.0, 12.0] {
        let n = director(1.0, 0.5);
        let eq = equilibrium_data(alpha, &n).unwrap();
        let c = leslie_coefficients(alpha).unwrap();
        assert_eq!((c.s2, c.s4, c.eta), (eq.s2, eq.s4, eq.eta));
        let k = operator_matrix(OperatorKind::Kn, &eq);
        assert_eq!(k.kernel_dim(), 2);
        for b in kernel_basis(&n) {
            let kb = nematic::operators::kn_apply(&b, &eq);
            assert!(kb.norm_inf() <= 1e-9);
        }
    }
}
