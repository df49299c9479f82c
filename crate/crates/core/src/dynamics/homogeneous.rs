use super::FlowParams;
use crate::bingham::BinghamSolver;
use crate::error::{Error, Result};
use crate::tensor::{mq_apply, Mat3, Sym4Moment, SymTraceless3};

/// Right-hand side for a known closure M⁽⁴⁾, with P = Q + (Gε/2)ΔQ supplied by the caller.
pub fn rhs_from_closure(q: &SymTraceless3, p_field: &SymTraceless3, m4: &Sym4Moment, kappa: &Mat3, p: &FlowParams) -> SymTraceless3 {
    let mp = mq_apply(q, m4, &p_field.to_mat());
    let mk = mq_apply(q, m4, &kappa.transpose());
    let relax = (q.to_mat() * -6.0 + (mp + mp.transpose()) * (2.0 * p.alpha_ms)) / p.de;
    SymTraceless3::from_mat(&(relax + mk + mk.transpose()))
}

/// (1/De)(−6Q + 2α[ℳ_Q(Q)+ℳ_Qᵀ(Q)]) + ℳ_Q(κᵀ)+ℳ_Qᵀ(κᵀ).
pub fn rhs_homogeneous(q: &SymTraceless3, kappa: &Mat3, p: &FlowParams, solver: &BinghamSolver) -> Result<SymTraceless3> {
    let c = solver.closure(q, None)?;
    Ok(rhs_from_closure(q, q, &c.m4, kappa, p))
}

/// The same right-hand side written as −(4/De)ℳ_Q(B_Q−αQ) plus flow terms.
pub fn rhs_chemical_form(q: &SymTraceless3, kappa: &Mat3, p: &FlowParams, solver: &BinghamSolver) -> Result<SymTraceless3> {
    let c = solver.closure(q, None)?;
    let mu = (c.b - *q * p.alpha_ms).to_mat();
    let m = mq_apply(q, &c.m4, &mu);
    let mk = mq_apply(q, &c.m4, &kappa.transpose());
    Ok(SymTraceless3::from_mat(&(m * (-4.0 / p.de) + mk + mk.transpose())))
}

/// Classical RK4 on the spatially homogeneous system with a warm-started closure.
pub struct HomogeneousIntegrator<'a> {
    pub solver: BinghamSolver<'a>,
    pub params: FlowParams,
    pub t: f64,
    guess: Option<SymTraceless3>,
}

impl<'a> HomogeneousIntegrator<'a> {
    pub fn new(solver: BinghamSolver<'a>, params: FlowParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { solver, params, t: 0.0, guess: None })
    }

    pub fn rhs(&mut self, q: &SymTraceless3, kappa: &Mat3) -> Result<SymTraceless3> {
        let c = self.solver.closure(q, self.guess.as_ref()).map_err(|e| self.lost(e))?;
        self.guess = Some(c.b);
        Ok(rhs_from_closure(q, q, &c.m4, kappa, &self.params))
    }

    fn lost(&self, e: Error) -> Error {
        match e {
            Error::NonAdmissible { margin } => Error::AdmissibilityLost { cell: 0, time: self.t, margin },
            other => other,
        }
    }

    /// One RK4 step; a negative dt integrates backward.
    pub fn step(&mut self, q: &SymTraceless3, kappa: &Mat3, dt: f64) -> Result<SymTraceless3> {
        let k1 = self.rhs(q, kappa)?;
        let k2 = self.rhs(&(*q + k1 * (0.5 * dt)), kappa)?;
        let k3 = self.rhs(&(*q + k2 * (0.5 * dt)), kappa)?;
        let k4 = self.rhs(&(*q + k3 * dt), kappa)?;
        let out = *q + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        self.t += dt;
        let adm = crate::bingham::check_admissible(&out);
        if adm.margin < crate::bingham::MIN_MARGIN {
            return Err(Error::AdmissibilityLost { cell: 0, time: self.t, margin: adm.margin });
        }
        Ok(out)
    }

    /// Integrates for `steps` steps, calling `observe(t, q)` after each one.
    pub fn run(&mut self, q0: &SymTraceless3, kappa: &Mat3, dt: f64, steps: usize, mut observe: impl FnMut(f64, &SymTraceless3)) -> Result<SymTraceless3> {
        let mut q = *q0;
        for _ in 0..steps {
            q = self.step(&q, kappa, dt)?;
            observe(self.t, &q);
        }
        Ok(q)
    }

    /// Largest stable RK4 step from a finite-difference estimate of the Jacobian's spectral radius at q.
    pub fn stability_probe(&mut self, q: &SymTraceless3, kappa: &Mat3) -> Result<f64> {
        let jac = self.jacobian(q, kappa, 1e-6)?;
        let rho = jac.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
        Ok(if rho > 0.0 { 2.78 / rho } else { f64::INFINITY })
    }

    /// Central-difference Jacobian in the orthonormal basis coordinates.
    pub fn jacobian(&mut self, q: &SymTraceless3, kappa: &Mat3, h: f64) -> Result<nalgebra::SMatrix<f64, 5, 5>> {
        let basis = SymTraceless3::basis();
        let mut jac = nalgebra::SMatrix::<f64, 5, 5>::zeros();
        for (j, e) in basis.iter().enumerate() {
            let fp = self.rhs(&(*q + *e * h), kappa)?;
            let fm = self.rhs(&(*q - *e * h), kappa)?;
            let col = ((fp - fm) * (0.5 / h)).to_basis_coords();
            for i in 0..5 {
                jac[(i, j)] = col[i];
            }
        }
        Ok(jac)
    }
}
