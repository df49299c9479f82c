use super::field::{kappa_at, CoupledSolver, FieldState};
use super::noperator::{n_operator_apply, n_quadratic_density};
use crate::error::Result;
use crate::tensor::{mq_apply, Sym4Moment, Sym6Moment, SymTraceless3};

/// Energy parts and dissipation rates of a field state; integrals are over the periodic box.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnergyReport {
    pub t: f64,
    pub kinetic: f64,
    /// ∫ −ln Z_Q + Q:B_Q − (α/2)|Q|²
    pub bulk: f64,
    /// ∫ (αGε/4)|∇Q|²
    pub elastic: f64,
    /// kinetic + (1−γ)/(Re·De)·(bulk + elastic)
    pub total: f64,
    /// (γ/Re)∫ 2|D|²
    pub viscous: f64,
    /// ((1−γ)/(2Re))∫ D:M⁽⁴⁾:D
    pub closure: f64,
    /// (4(1−γ)/(Re·De²))∫ μ:ℳ_Q(μ)
    pub rotational: f64,
    /// −(ε(1−γ)/(Re·De²))∫ μ:𝒩(μ), from the gradient form
    pub translational: f64,
    /// The same channel evaluated in divergence form.
    pub translational_divergence: f64,
    /// Sum of the four channels, −dE/dt.
    pub dissipation: f64,
    /// Smallest pointwise integrand of each channel (viscous, closure, rotational, translational).
    pub min_integrand: [f64; 4],
    pub min_margin: f64,
    pub max_speed: f64,
}

impl CoupledSolver {
    /// Energy and dissipation of a state; closures are warm-started from the solver cache.
    pub fn energy_report(&mut self, st: &FieldState) -> Result<EnergyReport> {
        let p = self.params;
        let n = st.len();
        let sixth = p.has_translational();
        let cl = self.state_closures(st, sixth)?;
        let u = self.to_spec(st);
        let d = self.derive(&u);
        let g = &self.grid;
        let ge = p.g_const * p.eps;
        let mu: Vec<SymTraceless3> = (0..n).map(|i| cl[i].b - (d.q[i] + d.lap[i] * (ge / 2.0)) * p.alpha_ms).collect();
        let mut trans = vec![0.0; n];
        let mut trans_div = 0.0;
        if sixth {
            let m4: Vec<Sym4Moment> = cl.iter().map(|c| c.m4).collect();
            let m6: Vec<Sym6Moment> = cl.iter().map(|c| c.m6.unwrap_or_default()).collect();
            let comps = super::field::scatter(&mu);
            let specs: Vec<_> = comps.iter().map(|c| g.forward(c)).collect();
            let gx = super::field::gather(&specs.iter().map(|s| g.inverse(&g.diff_x(s))).collect::<Vec<_>>());
            let gy = super::field::gather(&specs.iter().map(|s| g.inverse(&g.diff_y(s))).collect::<Vec<_>>());
            for i in 0..n {
                trans[i] = n_quadratic_density(&[gx[i], gy[i]], &m4[i], &m6[i], &p);
            }
            let (nm, _) = n_operator_apply(g, &mu, &d.q, &m4, &m6, &p);
            let pair: Vec<f64> = (0..n).map(|i| -mu[i].dot(&nm[i])).collect();
            trans_div = g.integrate(&pair);
        }
        let mut cols = vec![[0.0; 7]; n];
        for i in 0..n {
            let q = d.q[i];
            let kappa = kappa_at(&d.dv, i);
            let dd = (kappa + kappa.transpose()) * 0.5;
            let m = mq_apply(&q, &cl[i].m4, &mu[i].to_mat());
            cols[i] = [
                0.5 * (d.v[0][i].powi(2) + d.v[1][i].powi(2)),
                -cl[i].ln_z + q.dot(&cl[i].b) - 0.5 * p.alpha_ms * q.dot(&q),
                d.gq[0][i].dot(&d.gq[0][i]) + d.gq[1][i].dot(&d.gq[1][i]),
                2.0 * dd.component_mul(&dd).sum(),
                cl[i].m4.double_contract(&dd, &dd),
                mu[i].dot_mat(&m),
                trans[i],
            ];
        }
        let col = |k: usize| -> Vec<f64> { cols.iter().map(|c| c[k]).collect() };
        let int = |k: usize| g.integrate(&col(k));
        let min = |k: usize| col(k).into_iter().fold(f64::INFINITY, f64::min);
        let w = p.energy_weight();
        let kinetic = int(0);
        let bulk = int(1);
        let elastic = p.alpha_ms * ge / 4.0 * int(2);
        let c_v = p.gamma_solvent / p.re;
        let c_c = (1.0 - p.gamma_solvent) / (2.0 * p.re);
        let c_r = 4.0 * (1.0 - p.gamma_solvent) / (p.re * p.de * p.de);
        let c_t = p.eps * (1.0 - p.gamma_solvent) / (p.re * p.de * p.de);
        let viscous = c_v * int(3);
        let closure = c_c * int(4);
        let rotational = c_r * int(5);
        let translational = c_t * int(6);
        Ok(EnergyReport {
            t: st.t,
            kinetic,
            bulk,
            elastic,
            total: kinetic + w * (bulk + elastic),
            viscous,
            closure,
            rotational,
            translational,
            translational_divergence: c_t * trans_div,
            dissipation: viscous + closure + rotational + translational,
            min_integrand: [min(3), min(4), min(5), min(6)],
            min_margin: st.min_margin().1,
            max_speed: st.max_speed(),
        })
    }
}

/// Richardson-extrapolated −dE/dt at the state from one-step differences over h, h/2 and h/4.
pub fn measured_dissipation(solver: &CoupledSolver, st: &FieldState, h: f64) -> Result<(f64, EnergyReport)> {
    let mut s0 = solver.clone();
    let e0 = s0.energy_report(st)?;
    let rate = |k: f64| -> Result<f64> {
        let mut s = solver.clone();
        let mut x = st.clone();
        s.step(&mut x, h / k)?;
        let e = s.energy_report(&x)?;
        Ok(-(e.total - e0.total) * k / h)
    };
    let d1 = rate(1.0)?;
    let d2 = rate(2.0)?;
    let d4 = rate(4.0)?;
    // one-sided differences carry O(h) and O(h²) errors
    let r1 = 2.0 * d2 - d1;
    let r2 = 2.0 * d4 - d2;
    Ok(((4.0 * r2 - r1) / 3.0, e0))
}

#[cfg(test)]
mod tests {
    use super::super::{FlowParams, SolverOptions};
    use super::*;
    use crate::equilibria::solve_branches;
    use std::f64::consts::TAU;

    #[test]
    fn isotropic_rest_state() {
        let st = FieldState::uniform(8, 8, 1.0, 1.0, SymTraceless3::ZERO);
        let mut s = CoupledSolver::new(st.grid(), FlowParams::default(), SolverOptions::default()).unwrap();
        let e = s.energy_report(&st).unwrap();
        assert!((e.bulk + (4.0 * std::f64::consts::PI).ln()).abs() < 1e-12);
        assert_eq!(e.elastic, 0.0);
        assert_eq!(e.kinetic, 0.0);
        assert!(e.dissipation.abs() < 1e-20);
    }

    #[test]
    fn energy_balance_short_run() {
        let s2 = solve_branches(7.0).eta1().unwrap().s2;
        let st = FieldState::perturbed_equilibrium(16, 16, TAU, TAU, s2, 0.3, 0.05, 2);
        let p = FlowParams { alpha_ms: 7.0, eps: 0.05, gamma_par: 0.5, gamma_perp: 0.2, ..Default::default() };
        let solver = CoupledSolver::new(st.grid(), p, SolverOptions::default()).unwrap();
        let (measured, e0) = measured_dissipation(&solver, &st, 0.02).unwrap();
        assert!(e0.min_integrand.iter().all(|v| *v >= -1e-10));
        assert!((e0.translational - e0.translational_divergence).abs() < 1e-8 * e0.translational.max(1e-12));
        assert!((measured - e0.dissipation).abs() < 0.02 * e0.dissipation, "{measured} vs {}", e0.dissipation);
    }
}
