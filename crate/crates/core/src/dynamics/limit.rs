use super::director::{director_angle, el_integrate, extract_director, manifold_distance, DirectorState, ElSolver1D};
use super::field::{CoupledSolver, FieldState, SolverOptions};
use super::homogeneous::HomogeneousIntegrator;
use super::{FlowParams, Grid};
use crate::bingham::{check_admissible, BinghamSolver};
use crate::error::{Error, Result};
use crate::leslie::{ericksen_coefficient, leslie_coefficients};
use crate::quadrature::QuadratureRule;
use crate::tensor::{Mat3, SymTraceless3, Vec3};

#[derive(Clone, Debug, PartialEq)]
pub enum Scenario {
    /// Spatially uniform Q under κ = γ̇ e_x ⊗ e_y, starting on the uniaxial manifold along n0.
    HomogeneousShear { shear_rate: f64, n0: Vec3 },
    /// In-plane splay θ(x) = a·sin(2πx/L) on a periodic line with v = 0 and ε = De.
    Splay1D { nx: usize, length: f64, amplitude: f64 },
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::HomogeneousShear { .. } => "homogeneous-shear",
            Scenario::Splay1D { .. } => "periodic-1d-splay",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitRow {
    pub de: f64,
    /// Max angle between the Q director and the reference director at the final time.
    pub error: f64,
    /// log(err_prev/err)/log(de_prev/de), absent for the first row.
    pub order: Option<f64>,
    /// Max ‖Q − S₂(nn − I/3)‖ over the run.
    pub manifold_distance: f64,
    /// Max λ₂ − λ₃ over the run.
    pub biaxiality: f64,
    /// Smallest distance of an eigenvalue of Q to the admissible bounds over the run.
    pub min_margin: f64,
    /// Scalar order λ₁ − (λ₂+λ₃)/2 at the final time (cell average).
    pub s2_measured: f64,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitTable {
    pub scenario: Scenario,
    pub alpha: f64,
    pub s2: f64,
    pub lambda: f64,
    pub gamma1: f64,
    pub t_end: f64,
    pub rows: Vec<LimitRow>,
    /// max over rows of manifold_distance / De.
    pub manifold_constant: f64,
}

fn scalar_order(q: &SymTraceless3) -> f64 {
    let e = q.eig().values;
    e[0] - 0.5 * (e[1] + e[2])
}

fn shear_kappa(rate: f64) -> Mat3 {
    let mut k = Mat3::zeros();
    k[(0, 1)] = rate;
    k
}

/// Integrates the Q-tensor system for each De and compares the extracted director with the
/// Ericksen–Leslie reference on the same scenario.
pub fn limit_study(de_list: &[f64], scenario: &Scenario, p: &FlowParams, t_end: f64, quadrature_level: usize) -> Result<LimitTable> {
    if de_list.is_empty() || de_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("De values must be non-empty and strictly decreasing".into()));
    }
    if !(t_end > 0.0) {
        return Err(Error::InvalidParameter("final time must be positive".into()));
    }
    let c = leslie_coefficients(p.alpha_ms)?;
    let s2 = c.s2;
    let rule = QuadratureRule::new(quadrature_level);
    let mut rows: Vec<LimitRow> = Vec::new();
    for &de in de_list {
        let pd = p.with_eps_tied(de);
        pd.validate()?;
        let row = match scenario {
            Scenario::HomogeneousShear { shear_rate, n0 } => {
                let kappa = shear_kappa(*shear_rate);
                let n0 = n0.normalize();
                let reference_steps = (t_end / 1e-3).ceil() as usize;
                let reference = el_integrate(&n0, &kappa, &c, t_end / reference_steps as f64, reference_steps);
                let steps = (t_end / (de / 20.0)).ceil() as usize;
                let dt = t_end / steps as f64;
                let mut it = HomogeneousIntegrator::new(BinghamSolver::with_defaults(&rule), pd)?;
                let mut q = SymTraceless3::uniaxial(s2, &n0)?;
                let mut n = n0;
                let (mut dist, mut biax, mut margin) = (0.0f64, 0.0f64, check_admissible(&q).margin);
                for _ in 0..steps {
                    q = it.step(&q, &kappa, dt)?;
                    n = extract_director(&q, Some(&n));
                    let (d, b) = manifold_distance(&q, s2);
                    dist = dist.max(d);
                    biax = biax.max(b);
                    margin = margin.min(check_admissible(&q).margin);
                }
                LimitRow { de, error: director_angle(&n, &reference), order: None, manifold_distance: dist, biaxiality: biax, min_margin: margin, s2_measured: scalar_order(&q), steps }
            }
            Scenario::Splay1D { nx, length, amplitude } => {
                let grid = Grid::new(*nx, 1, *length, 1.0);
                let dirs: Vec<Vec3> = (0..grid.len())
                    .map(|i| {
                        let th = amplitude * (std::f64::consts::TAU * grid.coords(i).0 / length).sin();
                        Vec3::new(th.cos(), th.sin(), 0.0)
                    })
                    .collect();
                let k = ericksen_coefficient(p.alpha_ms, p.g_const)?;
                let el = ElSolver1D::new(grid.clone(), k, c.gamma1);
                let mut reference = DirectorState::new(dirs.clone())?;
                el.run(&mut reference, t_end);
                let mut st = FieldState::uniform(*nx, 1, *length, 1.0, SymTraceless3::ZERO);
                for (q, n) in st.q.iter_mut().zip(&dirs) {
                    *q = SymTraceless3::uniaxial(s2, n)?;
                }
                let opts = SolverOptions { evolve_v: false, quadrature_level, ..Default::default() };
                let mut solver = CoupledSolver::new(grid, pd, opts)?;
                let steps = (t_end / (de / 4.0)).ceil() as usize;
                let dt = t_end / steps as f64;
                let mut ns = dirs.clone();
                let (mut dist, mut biax, mut margin) = (0.0f64, 0.0f64, st.min_margin().1);
                for _ in 0..steps {
                    margin = margin.min(solver.step(&mut st, dt)?.min_margin);
                    for (n, q) in ns.iter_mut().zip(&st.q) {
                        *n = extract_director(q, Some(n));
                        let (d, b) = manifold_distance(q, s2);
                        dist = dist.max(d);
                        biax = biax.max(b);
                    }
                }
                let error = ns.iter().zip(&reference.n).map(|(a, b)| director_angle(a, b)).fold(0.0, f64::max);
                let s_mean = st.q.iter().map(scalar_order).sum::<f64>() / st.q.len() as f64;
                LimitRow { de, error, order: None, manifold_distance: dist, biaxiality: biax, min_margin: margin, s2_measured: s_mean, steps }
            }
        };
        rows.push(row);
    }
    for i in 1..rows.len() {
        let (a, b) = (rows[i - 1], rows[i]);
        rows[i].order = Some((a.error / b.error).ln() / (a.de / b.de).ln());
    }
    let manifold_constant = rows.iter().map(|r| r.manifold_distance / r.de).fold(0.0, f64::max);
    Ok(LimitTable { scenario: scenario.clone(), alpha: p.alpha_ms, s2, lambda: c.lambda, gamma1: c.gamma1, t_end, rows, manifold_constant })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_lists() {
        let p = FlowParams::default();
        let sc = Scenario::HomogeneousShear { shear_rate: 1.0, n0: Vec3::x() };
        assert!(limit_study(&[], &sc, &p, 1.0, 32).is_err());
        assert!(limit_study(&[0.1, 0.2], &sc, &p, 1.0, 32).is_err());
        let sub = FlowParams { alpha_ms: 3.0, ..p };
        assert!(matches!(limit_study(&[0.1], &sc, &sub, 1.0, 32), Err(Error::SubCritical { .. })));
    }

    #[test]
    fn splay_relaxation_matches_director_theory() {
        let p = FlowParams { alpha_ms: 7.0, gamma_solvent: 0.5, ..Default::default() };
        let sc = Scenario::Splay1D { nx: 16, length: std::f64::consts::TAU, amplitude: 0.3 };
        let t = limit_study(&[0.04, 0.02], &sc, &p, 0.5, 32).unwrap();
        let r = t.rows[1];
        assert!(r.error < 0.3 * 0.3, "{:?}", t.rows);
        assert!(r.error < t.rows[0].error);
        assert!((r.s2_measured - t.s2).abs() < 5.0 * r.de);
        assert!(t.rows.iter().all(|r| r.min_margin > 0.1));
    }
}
