use super::etd::EtdCoefficients;
use super::{FlowParams, Grid};
use crate::bingham::{check_admissible, BinghamSolver, DEFAULT_MAX_ITER, DEFAULT_TOL, MIN_MARGIN};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;
use crate::tensor::{mq_apply, Mat3, Sym4Moment, Sym6Moment, SymTraceless3, Vec3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Q and in-plane velocity on a doubly periodic grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub q: Vec<SymTraceless3>,
    pub v: [Vec<f64>; 2],
    pub t: f64,
}

impl FieldState {
    pub fn uniform(nx: usize, ny: usize, lx: f64, ly: f64, q: SymTraceless3) -> Self {
        let n = nx * ny;
        Self { nx, ny, lx, ly, q: vec![q; n], v: [vec![0.0; n], vec![0.0; n]], t: 0.0 }
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.nx, self.ny, self.lx, self.ly)
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// Uniaxial Q = S₂(nn − I/3) with a smooth seeded director perturbation and a
    /// divergence-free velocity derived from a seeded stream function.
    #[allow(clippy::too_many_arguments)]
    pub fn perturbed_equilibrium(nx: usize, ny: usize, lx: f64, ly: f64, s2: f64, angle_amp: f64, vel_amp: f64, seed: u64) -> Self {
        let grid = Grid::new(nx, ny, lx, ly);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut modes = |amp: f64| -> Vec<(f64, f64, f64, f64)> {
            (0..4)
                .map(|_| {
                    let mx = rng.random_range(0..3) as f64;
                    let my = if ny > 1 { rng.random_range(0..3) as f64 } else { 0.0 };
                    let mx = if mx == 0.0 && my == 0.0 { 1.0 } else { mx };
                    (mx, my, amp * rng.random_range(-1.0..1.0), rng.random_range(0.0..std::f64::consts::TAU))
                })
                .collect()
        };
        let field = |m: &[(f64, f64, f64, f64)], x: f64, y: f64| -> f64 {
            m.iter()
                .map(|&(mx, my, a, ph)| a * (std::f64::consts::TAU * (mx * x / lx + my * y / ly) + ph).sin())
                .sum()
        };
        let theta = modes(angle_amp);
        let phi = modes(0.5 * angle_amp);
        let psi = modes(vel_amp);
        let mut st = Self::uniform(nx, ny, lx, ly, SymTraceless3::ZERO);
        let mut stream = vec![0.0; grid.len()];
        for i in 0..grid.len() {
            let (x, y) = grid.coords(i);
            let (th, ph) = (field(&theta, x, y), field(&phi, x, y));
            let n = Vec3::new(th.cos() * ph.cos(), th.sin() * ph.cos(), ph.sin());
            st.q[i] = SymTraceless3::uniaxial_unchecked(s2, &n);
            stream[i] = field(&psi, x, y);
        }
        let (sx, sy) = grid.grad(&stream);
        st.v = [sy, sx.iter().map(|v| -v).collect()];
        st
    }

    /// Taylor–Green vortex v = A(sin x cos y, −cos x sin y) on [0, 2π)².
    pub fn taylor_green(n: usize, amp: f64, q: SymTraceless3) -> Self {
        let l = std::f64::consts::TAU;
        let mut st = Self::uniform(n, n, l, l, q);
        let grid = st.grid();
        for i in 0..grid.len() {
            let (x, y) = grid.coords(i);
            st.v[0][i] = amp * x.sin() * y.cos();
            st.v[1][i] = -amp * x.cos() * y.sin();
        }
        st
    }

    pub fn max_speed(&self) -> f64 {
        self.v[0].iter().zip(&self.v[1]).map(|(a, b)| a.hypot(*b)).fold(0.0, f64::max)
    }

    pub fn min_margin(&self) -> (usize, f64) {
        self.q
            .iter()
            .enumerate()
            .map(|(i, q)| (i, check_admissible(q).margin))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    pub evolve_q: bool,
    pub evolve_v: bool,
    pub quadrature_level: usize,
    pub tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { evolve_q: true, evolve_v: true, quadrature_level: 32, tol: DEFAULT_TOL }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepInfo {
    pub cfl: f64,
    pub min_margin: f64,
    pub divergence: f64,
    pub newton_iterations: usize,
}

/// Per-cell closure data.
#[derive(Clone, Copy, Debug)]
pub(crate) struct CellClosure {
    pub b: SymTraceless3,
    pub ln_z: f64,
    pub m4: Sym4Moment,
    pub m6: Option<Sym6Moment>,
    pub iterations: usize,
}

/// Physical fields derived from a spectral state.
pub(crate) struct Derived {
    pub q: Vec<SymTraceless3>,
    pub lap: Vec<SymTraceless3>,
    pub gq: [Vec<SymTraceless3>; 2],
    pub v: [Vec<f64>; 2],
    /// dv[a][b] = ∂_b v_a
    pub dv: [[Vec<f64>; 2]; 2],
}

pub(crate) type Spec = Vec<Vec<Complex64>>;

pub(crate) fn gather(comps: &[Vec<f64>]) -> Vec<SymTraceless3> {
    (0..comps[0].len()).map(|i| SymTraceless3(std::array::from_fn(|c| comps[c][i]))).collect()
}

pub(crate) fn scatter(f: &[SymTraceless3]) -> Vec<Vec<f64>> {
    (0..5).map(|c| f.iter().map(|q| q.0[c]).collect()).collect()
}

pub(crate) fn kappa_at(dv: &[[Vec<f64>; 2]; 2], i: usize) -> Mat3 {
    let mut k = Mat3::zeros();
    for a in 0..2 {
        for b in 0..2 {
            k[(a, b)] = dv[a][b][i];
        }
    }
    k
}

/// ETDRK4 pseudo-spectral integrator for the coupled Q–velocity system.
#[derive(Clone)]
pub struct CoupledSolver {
    pub grid: Grid,
    pub params: FlowParams,
    pub opts: SolverOptions,
    rule: QuadratureRule,
    cache: Vec<Option<SymTraceless3>>,
    lin: [Vec<f64>; 2],
    coeffs: Option<(f64, [EtdCoefficients; 2])>,
    newton: usize,
}

impl CoupledSolver {
    pub fn new(grid: Grid, params: FlowParams, opts: SolverOptions) -> Result<Self> {
        params.validate()?;
        let rule = QuadratureRule::new(opts.quadrature_level);
        let n = grid.len();
        let p = params;
        let lin_q = (0..n)
            .map(|i| if opts.evolve_q { -6.0 / p.de - 2.0 * p.alpha_ms * p.g_const * p.eps / (5.0 * p.de) * grid.k2(i) } else { 0.0 })
            .collect();
        let lin_v = (0..n).map(|i| if opts.evolve_v { -p.gamma_solvent / p.re * grid.k2(i) } else { 0.0 }).collect();
        Ok(Self { grid, params, opts, rule, cache: vec![None; n], lin: [lin_q, lin_v], coeffs: None, newton: 0 })
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub(crate) fn bingham(&self) -> BinghamSolver<'_> {
        BinghamSolver::new(&self.rule, self.opts.tol, DEFAULT_MAX_ITER)
    }

    pub(crate) fn to_spec(&self, st: &FieldState) -> Spec {
        let mut s: Spec = scatter(&st.q).iter().map(|c| self.grid.forward(c)).collect();
        s.push(self.grid.forward(&st.v[0]));
        s.push(self.grid.forward(&st.v[1]));
        s
    }

    pub(crate) fn derive(&self, u: &Spec) -> Derived {
        let g = &self.grid;
        let comps = |f: &dyn Fn(&[Complex64]) -> Vec<Complex64>| -> Vec<SymTraceless3> {
            let c: Vec<Vec<f64>> = (0..5).map(|c| g.inverse(&f(&u[c]))).collect();
            gather(&c)
        };
        let q = comps(&|s| s.to_vec());
        let lap = comps(&|s| g.laplacian(s));
        let gq = [comps(&|s| g.diff_x(s)), comps(&|s| g.diff_y(s))];
        let v = [g.inverse(&u[5]), g.inverse(&u[6])];
        let dv = [
            [g.inverse(&g.diff_x(&u[5])), g.inverse(&g.diff_y(&u[5]))],
            [g.inverse(&g.diff_x(&u[6])), g.inverse(&g.diff_y(&u[6]))],
        ];
        Derived { q, lap, gq, v, dv }
    }

    /// Warm-started closures for every cell; the lowest-index failure is reported.
    pub(crate) fn closures(&mut self, q: &[SymTraceless3], t: f64, sixth: bool) -> Result<Vec<CellClosure>> {
        let solver = self.bingham();
        let cache = &self.cache;
        let out: Vec<Result<CellClosure>> = q
            .par_iter()
            .enumerate()
            .map(|(i, qi)| {
                let lost = |e: Error| match e {
                    Error::NonAdmissible { margin } => Error::AdmissibilityLost { cell: i, time: t, margin },
                    other => other,
                };
                if sixth {
                    let r = solver.solve(qi, cache[i].as_ref()).map_err(lost)?;
                    Ok(CellClosure { b: r.b, ln_z: r.moments.ln_z, m4: r.moments.m4, m6: Some(r.moments.m6), iterations: r.iterations })
                } else {
                    let c = solver.closure(qi, cache[i].as_ref()).map_err(lost)?;
                    Ok(CellClosure { b: c.b, ln_z: c.ln_z, m4: c.m4, m6: None, iterations: c.iterations })
                }
            })
            .collect();
        let out: Vec<CellClosure> = out.into_iter().collect::<Result<_>>()?;
        for (slot, c) in self.cache.iter_mut().zip(&out) {
            *slot = Some(c.b);
        }
        self.newton += out.iter().map(|c| c.iterations).sum::<usize>();
        Ok(out)
    }

    /// Explicit part N(u) = F(rhs) − L·u, dealiased, velocity projected.
    fn nonlinear(&mut self, u: &Spec, t: f64) -> Result<Spec> {
        let p = self.params;
        let n = self.grid.len();
        let d = self.derive(u);
        let sixth = p.has_translational() && self.opts.evolve_q;
        let cl = self.closures(&d.q, t, sixth)?;
        let ge = p.g_const * p.eps;
        let cs = (1.0 - p.gamma_solvent) / (p.de * p.re);
        let cv = (1.0 - p.gamma_solvent) / (2.0 * p.re);
        let cb = cs * p.alpha_ms * ge / 2.0;
        let coupled = self.opts.evolve_v && p.gamma_solvent < 1.0;
        let per_cell: Vec<([f64; 5], [f64; 6])> = (0..n)
            .into_par_iter()
            .map(|i| {
                let q = d.q[i];
                let m4 = &cl[i].m4;
                let kappa = kappa_at(&d.dv, i);
                let vx = d.v[0][i];
                let vy = d.v[1][i];
                let mut rq = [0.0; 5];
                if self.opts.evolve_q {
                    let pf = q + d.lap[i] * (ge / 2.0);
                    let r = super::homogeneous::rhs_from_closure(&q, &pf, m4, &kappa, &p) - (d.gq[0][i] * vx + d.gq[1][i] * vy);
                    rq = r.0;
                }
                let mut rv = [0.0; 6];
                if self.opts.evolve_v {
                    if coupled {
                        let pf = q + d.lap[i] * (ge / 2.0);
                        let mp = mq_apply(&q, m4, &pf.to_mat());
                        let s = q.to_mat() * -3.0 + mp * (2.0 * p.alpha_ms);
                        let dd = (kappa + kappa.transpose()) * 0.5;
                        let tt = m4.contract(&dd) * cv - s * cs;
                        rv[0] = tt[(0, 0)];
                        rv[1] = tt[(0, 1)];
                        rv[2] = tt[(1, 0)];
                        rv[3] = tt[(1, 1)];
                        rv[4] = -cb * d.gq[0][i].dot(&d.lap[i]);
                        rv[5] = -cb * d.gq[1][i].dot(&d.lap[i]);
                    }
                    rv[4] -= vx * d.dv[0][0][i] + vy * d.dv[0][1][i];
                    rv[5] -= vx * d.dv[1][0][i] + vy * d.dv[1][1][i];
                }
                (rq, rv)
            })
            .collect();
        let g = &self.grid;
        let mut out: Spec = Vec::with_capacity(7);
        let mut extra: Option<Vec<SymTraceless3>> = None;
        if sixth {
            let mu: Vec<SymTraceless3> = (0..n).map(|i| cl[i].b - (d.q[i] + d.lap[i] * (ge / 2.0)) * p.alpha_ms).collect();
            let m4: Vec<Sym4Moment> = cl.iter().map(|c| c.m4).collect();
            let m6: Vec<Sym6Moment> = cl.iter().map(|c| c.m6.unwrap_or_default()).collect();
            let (nf, _) = super::noperator::n_operator_apply(g, &mu, &d.q, &m4, &m6, &p);
            extra = Some(nf);
        }
        for c in 0..5 {
            let mut field: Vec<f64> = per_cell.iter().map(|r| r.0[c]).collect();
            if let Some(nf) = &extra {
                let s = p.eps / p.de;
                for (f, x) in field.iter_mut().zip(nf) {
                    *f += s * x.0[c];
                }
            }
            let mut s = g.forward(&field);
            for (i, z) in s.iter_mut().enumerate() {
                *z -= u[c][i] * self.lin[0][i];
            }
            g.dealias(&mut s);
            out.push(s);
        }
        let col = |k: usize| -> Vec<f64> { per_cell.iter().map(|r| r.1[k]).collect() };
        // (∇·T)_i = ∂_j T_ji
        let txx = g.forward(&col(0));
        let txy = g.forward(&col(1));
        let tyx = g.forward(&col(2));
        let tyy = g.forward(&col(3));
        let fx = g.forward(&col(4));
        let fy = g.forward(&col(5));
        let mut vel = [vec![Complex64::new(0.0, 0.0); n], vec![Complex64::new(0.0, 0.0); n]];
        for i in 0..n {
            let (kx, ky) = g.k(i);
            let ik = |k: f64| Complex64::new(0.0, k);
            vel[0][i] = ik(kx) * txx[i] + ik(ky) * tyx[i] + fx[i];
            vel[1][i] = ik(kx) * txy[i] + ik(ky) * tyy[i] + fy[i];
        }
        g.project(&mut vel);
        for s in vel.iter_mut() {
            g.dealias(s);
        }
        let [a, b] = vel;
        out.push(a);
        out.push(b);
        Ok(out)
    }

    fn coefficients(&mut self, dt: f64) -> [EtdCoefficients; 2] {
        match &self.coeffs {
            Some((h, c)) if *h == dt => c.clone(),
            _ => {
                let c = [EtdCoefficients::new(&self.lin[0], dt), EtdCoefficients::new(&self.lin[1], dt)];
                self.coeffs = Some((dt, c.clone()));
                c
            }
        }
    }

    pub fn cfl(&self, st: &FieldState, dt: f64) -> f64 {
        let (dx, dy) = (self.grid.dx(), self.grid.dy());
        let m = st.v[0].iter().zip(&st.v[1]).map(|(a, b)| a.abs() / dx + if self.grid.ny > 1 { b.abs() / dy } else { 0.0 }).fold(0.0, f64::max);
        m * dt
    }

    /// One ETDRK4 step; the state is updated in place.
    pub fn step(&mut self, st: &mut FieldState, dt: f64) -> Result<StepInfo> {
        assert_eq!((st.nx, st.ny), (self.grid.nx, self.grid.ny), "state does not match the solver grid");
        let cfl = self.cfl(st, dt);
        if cfl > 0.5 {
            return Err(Error::CflViolation { cfl });
        }
        let newton0 = self.newton;
        let [cq, cv] = self.coefficients(dt);
        let co = |c: usize| if c < 5 { &cq } else { &cv };
        let t = st.t;
        let u = self.to_spec(st);
        let nu = self.nonlinear(&u, t)?;
        let comb = |f: &dyn Fn(usize, usize) -> Complex64| -> Spec { (0..7).map(|c| (0..u[c].len()).map(|i| f(c, i)).collect()).collect() };
        let a = comb(&|c, i| u[c][i] * co(c).e2[i] + nu[c][i] * co(c).qc[i]);
        let na = self.nonlinear(&a, t + 0.5 * dt)?;
        let b = comb(&|c, i| u[c][i] * co(c).e2[i] + na[c][i] * co(c).qc[i]);
        let nb = self.nonlinear(&b, t + 0.5 * dt)?;
        let cst = comb(&|c, i| a[c][i] * co(c).e2[i] + (nb[c][i] * 2.0 - nu[c][i]) * co(c).qc[i]);
        let nc = self.nonlinear(&cst, t + dt)?;
        let next = comb(&|c, i| {
            let k = co(c);
            u[c][i] * k.e[i] + nu[c][i] * k.f1[i] + (na[c][i] + nb[c][i]) * (2.0 * k.f2[i]) + nc[c][i] * k.f3[i]
        });
        let comps: Vec<Vec<f64>> = (0..5).map(|c| self.grid.inverse(&next[c])).collect();
        st.q = gather(&comps);
        st.v = [self.grid.inverse(&next[5]), self.grid.inverse(&next[6])];
        st.t = t + dt;
        let (cell, margin) = st.min_margin();
        if margin < MIN_MARGIN {
            return Err(Error::AdmissibilityLost { cell, time: st.t, margin });
        }
        Ok(StepInfo {
            cfl,
            min_margin: margin,
            divergence: self.grid.divergence_max(&st.v[0], &st.v[1]),
            newton_iterations: self.newton - newton0,
        })
    }

    /// Time derivative of the state (physical space) without time stepping.
    pub fn rate(&mut self, st: &FieldState) -> Result<(Vec<SymTraceless3>, [Vec<f64>; 2])> {
        let u = self.to_spec(st);
        let nu = self.nonlinear(&u, st.t)?;
        let g = &self.grid;
        let full = |c: usize, lin: &[f64]| -> Vec<f64> {
            let s: Vec<Complex64> = (0..g.len()).map(|i| nu[c][i] + u[c][i] * lin[i]).collect();
            g.inverse(&s)
        };
        let comps: Vec<Vec<f64>> = (0..5).map(|c| full(c, &self.lin[0])).collect();
        Ok((gather(&comps), [full(5, &self.lin[1]), full(6, &self.lin[1])]))
    }

    /// Closure data at the state, warm-started from the solver cache.
    pub(crate) fn state_closures(&mut self, st: &FieldState, sixth: bool) -> Result<Vec<CellClosure>> {
        self.closures(&st.q, st.t, sixth)
    }

    pub fn newton_iterations(&self) -> usize {
        self.newton
    }
}
