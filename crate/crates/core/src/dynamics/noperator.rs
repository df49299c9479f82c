use super::field::{gather, scatter};
use super::{FlowParams, Grid, TraceVariant};
use crate::bingham::BinghamSolver;
use crate::error::Result;
use crate::tensor::{Mat3, Sym4Moment, Sym6Moment, SymTraceless3};

/// Flux Fᵢ of the translational-diffusion operator for in-plane derivatives gᵢ = ∂ᵢA.
fn flux(g: &[SymTraceless3; 2], q: &SymTraceless3, m4: &Sym4Moment, m6: &Sym6Moment, p: &FlowParams) -> [Mat3; 2] {
    let gm = [g[0].to_mat(), g[1].to_mat()];
    let m4g = [m4.contract(&gm[0]), m4.contract(&gm[1])];
    let m6g = [m6.contract(&gm[0]), m6.contract(&gm[1])];
    let t = match p.trace_variant {
        TraceVariant::Q => q.to_mat(),
        TraceVariant::M2 => q.to_mat() + Mat3::identity() / 3.0,
    };
    let dg = p.gamma_par - p.gamma_perp;
    std::array::from_fn(|i| {
        let mut f = (m4g[i] - Mat3::identity() * (t.component_mul(&gm[i]).sum() / 3.0)) * p.gamma_perp;
        if dg != 0.0 {
            for j in 0..2 {
                let s = m4g[j][(i, j)] / 3.0;
                f += Mat3::from_fn(|a, b| m6g[j].get(a, b, i, j)) * dg - Mat3::identity() * (s * dg);
            }
        }
        f
    })
}

/// 𝒩_Q(A) in divergence form with spectral derivatives, given the moment fields of Q.
/// Returns the traceless part and the largest trace of the full divergence.
pub fn n_operator_apply(
    grid: &Grid,
    a: &[SymTraceless3],
    q: &[SymTraceless3],
    m4: &[Sym4Moment],
    m6: &[Sym6Moment],
    p: &FlowParams,
) -> (Vec<SymTraceless3>, f64) {
    let n = grid.len();
    let comps = scatter(a);
    let specs: Vec<_> = comps.iter().map(|c| grid.forward(c)).collect();
    let gx = gather(&specs.iter().map(|s| grid.inverse(&grid.diff_x(s))).collect::<Vec<_>>());
    let gy = gather(&specs.iter().map(|s| grid.inverse(&grid.diff_y(s))).collect::<Vec<_>>());
    let fluxes: Vec<[Mat3; 2]> = (0..n).map(|i| flux(&[gx[i], gy[i]], &q[i], &m4[i], &m6[i], p)).collect();
    let slots = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];
    let mut full = vec![[0.0; 6]; n];
    for (s, &(r, c)) in slots.iter().enumerate() {
        let fx: Vec<f64> = fluxes.iter().map(|f| f[0][(r, c)]).collect();
        let fy: Vec<f64> = fluxes.iter().map(|f| f[1][(r, c)]).collect();
        let dx = grid.inverse(&grid.diff_x(&grid.forward(&fx)));
        let dy = grid.inverse(&grid.diff_y(&grid.forward(&fy)));
        for i in 0..n {
            full[i][s] = dx[i] + dy[i];
        }
    }
    let mut trace = 0.0f64;
    let out = full
        .iter()
        .map(|v| {
            let tr = v[0] + v[1] + v[2];
            trace = trace.max(tr.abs());
            SymTraceless3::new(v[0] - tr / 3.0, v[1] - tr / 3.0, v[3], v[4], v[5])
        })
        .collect();
    (out, trace)
}

/// 𝒩_Q(A) with the moments of Q obtained from cold Bingham solves.
pub fn n_operator_from_q(grid: &Grid, a: &[SymTraceless3], q: &[SymTraceless3], p: &FlowParams, solver: &BinghamSolver) -> Result<(Vec<SymTraceless3>, f64)> {
    let mut m4 = Vec::with_capacity(q.len());
    let mut m6 = Vec::with_capacity(q.len());
    for qi in q {
        let r = solver.solve(qi, None)?;
        m4.push(r.moments.m4);
        m6.push(r.moments.m6);
    }
    Ok(n_operator_apply(grid, a, q, &m4, &m6, p))
}

/// Pointwise ∂ᵢA:[γ⊥M⁽⁴⁾δᵢⱼ + (γ∥−γ⊥)M⁽⁶⁾]:∂ⱼA, the integrand of −∫A:𝒩(A).
pub fn n_quadratic_density(g: &[SymTraceless3; 2], m4: &Sym4Moment, m6: &Sym6Moment, p: &FlowParams) -> f64 {
    let gm = [g[0].to_mat(), g[1].to_mat()];
    let mut s = 0.0;
    for i in 0..2 {
        s += p.gamma_perp * m4.double_contract(&gm[i], &gm[i]);
    }
    let dg = p.gamma_par - p.gamma_perp;
    if dg != 0.0 {
        for j in 0..2 {
            let h = m6.contract(&gm[j]);
            for i in 0..2 {
                s += dg * (0..3).flat_map(|a| (0..3).map(move |b| (a, b))).map(|(a, b)| h.get(a, b, i, j) * gm[i][(a, b)]).sum::<f64>();
            }
        }
    }
    s
}
