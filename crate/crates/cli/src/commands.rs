use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{gnuplot, json, num, opt, section, sink, Csv, Meta};
use nematic::bingham::{check_admissible, random_admissible, BinghamSolver, DEFAULT_MAX_ITER};
use nematic::dynamics::checkpoint::{self, CheckpointFormat};
use nematic::dynamics::director::steady_shear_angle;
use nematic::dynamics::limit::{limit_study, Scenario};
use nematic::dynamics::{CoupledSolver, FieldState, SolverOptions};
use nematic::equilibria::{critical_alpha, equilibrium_data, solve_branches};
use nematic::leslie::{ericksen_coefficient, frank_constants, leslie_coefficients};
use nematic::operators::{apply, check_q6_identity, equilibrium_m6, kernel_basis, operator_matrix, OperatorKind};
use nematic::quadrature::{moments_of, QuadratureRule};
use nematic::tensor::{SymTraceless3, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

/// Tolerance of the Parodi pass/fail field.
pub const PARODI_TOL: f64 = 1e-14;

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn median(mut v: Vec<usize>) -> f64 {
    v.sort_unstable();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2]) as f64
    }
}

fn maybe_plot(cfg: &RunConfig, out: Option<&Path>, f: impl FnOnce(&Path) -> std::io::Result<std::path::PathBuf>) -> Result<(), CliError> {
    match (cfg.plot, out) {
        (true, Some(p)) => {
            let script = f(p)?;
            eprintln!("wrote {}", script.display());
            Ok(())
        }
        (true, None) => Err(CliError::Usage("--plot needs an output file".into())),
        _ => Ok(()),
    }
}

pub fn phase(cfg: &RunConfig) -> Result<(), CliError> {
    let c = &cfg.phase;
    c.validate()?;
    let crit = critical_alpha()?;
    let meta = Meta::new("phase", cfg, &[("phase", section(c)), ("critical", json!({ "alpha_star": crit.alpha_star, "eta_star": crit.eta_star }))]);
    let mut csv = Csv::new(sink(c.output.as_deref())?, &meta, &["alpha", "root_count", "eta1", "eta2", "s2", "s4", "marker"])?;
    let mut marked = false;
    for alpha in linspace(c.alpha_min, c.alpha_max, c.count) {
        let b = solve_branches(alpha);
        let marker = if !marked && alpha >= crit.alpha_star {
            marked = true;
            "alpha*"
        } else {
            ""
        };
        let top = b.eta1();
        csv.row(&[
            num(alpha),
            b.roots.len().to_string(),
            opt(top.map(|r| r.eta)),
            opt(b.eta2().map(|r| r.eta)),
            opt(top.map(|r| r.s2)),
            opt(top.map(|r| r.s4)),
            marker.to_string(),
        ])?;
    }
    csv.finish()?;
    maybe_plot(cfg, c.output.as_deref(), |p| gnuplot(p, &meta, "bifurcation diagram", (1, "alpha"), &[(3, "eta1"), (4, "eta2")], false))
}

pub fn closure_check(cfg: &RunConfig) -> Result<(), CliError> {
    let c = &cfg.closure;
    c.validate()?;
    let meta = Meta::new("closure-check", cfg, &[("closure", section(c))]);
    let rule = QuadratureRule::new(c.level);
    let solver = BinghamSolver::new(&rule, c.tol, DEFAULT_MAX_ITER);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut csv = Csv::new(
        sink(c.output.as_deref())?,
        &meta,
        &["index", "margin", "cold_iterations", "warm_iterations", "roundtrip_residual", "warm_roundtrip_residual"],
    )?;
    let start = Instant::now();
    let (mut cold_its, mut warm_its) = (Vec::new(), Vec::new());
    let mut worst = 0.0f64;
    for i in 0..c.samples {
        let q = random_admissible(&mut rng, c.margin);
        let dir = SymTraceless3::from_basis_coords(&std::array::from_fn(|_| rng.random_range(-1.0..1.0)));
        let dq = dir * (c.warm_step / dir.norm().max(1e-300));
        let cold = solver.solve(&q, None)?;
        let rt = (moments_of(&cold.b, &rule).q() - q).norm_inf();
        let q2 = q + dq;
        let warm = solver.solve(&q2, Some(&cold.b))?;
        let wrt = (moments_of(&warm.b, &rule).q() - q2).norm_inf();
        worst = worst.max(rt).max(wrt);
        cold_its.push(cold.iterations);
        warm_its.push(warm.iterations);
        csv.row(&[i.to_string(), num(check_admissible(&q).margin), cold.iterations.to_string(), warm.iterations.to_string(), num(rt), num(wrt)])?;
    }
    csv.finish()?;
    eprintln!(
        "closure-check: {} samples, max roundtrip residual {:.3e}, median iterations {} cold / {} warm, {:.2} s",
        c.samples,
        worst,
        median(cold_its),
        median(warm_its),
        start.elapsed().as_secs_f64()
    );
    if worst > c.roundtrip_tol {
        return Err(CliError::Numeric(format!("roundtrip residual {worst:.3e} exceeds {:.1e}", c.roundtrip_tol)));
    }
    Ok(())
}

pub fn operators(cfg: &RunConfig) -> Result<(), CliError> {
    let c = &cfg.operators;
    c.validate()?;
    let crit = critical_alpha()?;
    if c.alpha_min <= crit.alpha_star {
        return Err(CliError::Usage(format!("alpha_min must exceed the critical value {}", crit.alpha_star)));
    }
    let meta = Meta::new("operators", cfg, &[("operators", section(c))]);
    let rule = QuadratureRule::new(c.level);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut csv = Csv::new(
        sink(c.output.as_deref())?,
        &meta,
        &["alpha", "director", "nx", "ny", "nz", "operator", "eig1", "eig2", "eig3", "eig4", "eig5", "asymmetry", "kernel_dim", "kernel_residual", "q6_residual"],
    )?;
    for alpha in linspace(c.alpha_min, c.alpha_max, c.count) {
        for d in 0..c.directors {
            let n = nematic::bingham::random_unit(&mut rng);
            let eq = equilibrium_data(alpha, &n)?;
            let m6 = equilibrium_m6(&eq, &rule);
            let b = SymTraceless3::from_basis_coords(&std::array::from_fn(|_| rng.random_range(-1.0..1.0)));
            let q6 = check_q6_identity(&b, &eq, &m6);
            let kb = kernel_basis(&n);
            for kind in OperatorKind::ALL {
                let m = operator_matrix(kind, &eq);
                let ev = m.eigenvalues();
                let kres = kb.iter().map(|k| apply(kind, k, &eq).norm_inf()).fold(0.0, f64::max);
                csv.row(&[
                    num(alpha),
                    d.to_string(),
                    num(n.x),
                    num(n.y),
                    num(n.z),
                    kind.name().to_string(),
                    num(ev[0]),
                    num(ev[1]),
                    num(ev[2]),
                    num(ev[3]),
                    num(ev[4]),
                    num(m.asymmetry()),
                    m.kernel_dim().to_string(),
                    num(kres),
                    num(q6),
                ])?;
            }
        }
    }
    csv.finish()?;
    Ok(())
}

#[derive(Serialize)]
struct LeslieReport {
    alpha: f64,
    eta: f64,
    s2: f64,
    s4: f64,
    alpha1: f64,
    alpha2: f64,
    alpha3: f64,
    alpha4: f64,
    alpha5: f64,
    alpha6: f64,
    gamma1: f64,
    gamma2: f64,
    lambda: f64,
    parodi_residual: f64,
    parodi: &'static str,
    regime: &'static str,
    alignment_angle: Option<f64>,
    ericksen_k: f64,
    frank: Option<Frank>,
}

#[derive(Serialize)]
struct Frank {
    j: [f64; 5],
    k1: f64,
    k2: f64,
    k3: f64,
}

pub fn leslie(cfg: &RunConfig) -> Result<(), CliError> {
    let p = cfg.flow.params()?;
    let c = leslie_coefficients(p.alpha_ms)?;
    let frank = match cfg.leslie.j {
        Some(j) => {
            let f = frank_constants(j, p.alpha_ms)?;
            Some(Frank { j, k1: f.k1, k2: f.k2, k3: f.k3 })
        }
        None => None,
    };
    let report = LeslieReport {
        alpha: c.alpha,
        eta: c.eta,
        s2: c.s2,
        s4: c.s4,
        alpha1: c.alpha1,
        alpha2: c.alpha2,
        alpha3: c.alpha3,
        alpha4: c.alpha4,
        alpha5: c.alpha5,
        alpha6: c.alpha6,
        gamma1: c.gamma1,
        gamma2: c.gamma2,
        lambda: c.lambda,
        parodi_residual: c.parodi_residual(),
        parodi: if c.parodi_residual().abs() <= PARODI_TOL { "pass" } else { "fail" },
        regime: if c.lambda.abs() > 1.0 { "flow-aligning" } else { "tumbling" },
        alignment_angle: c.alignment_angle(),
        ericksen_k: ericksen_coefficient(p.alpha_ms, p.g_const)?,
        frank,
    };
    let meta = Meta::new("leslie", cfg, &[("flow", section(&cfg.flow)), ("leslie", section(&cfg.leslie))]);
    json(sink(cfg.leslie.output.as_deref())?, &meta, &report)?;
    if report.parodi == "fail" {
        return Err(CliError::Numeric(format!("Parodi residual {:.3e}", report.parodi_residual)));
    }
    Ok(())
}

pub const TIMESERIES_COLUMNS: [&str; 14] = [
    "step", "t", "total", "kinetic", "bulk", "elastic", "dissipation", "viscous", "closure", "rotational", "translational", "min_margin", "max_speed", "divergence",
];

pub fn simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let c = &cfg.simulate;
    c.validate()?;
    let p = cfg.flow.params()?;
    let s2 = solve_branches(p.alpha_ms).eta1().map(|r| r.s2);
    let st0 = match c.init.as_str() {
        "perturbed" | "equilibrium" => {
            let s2 = s2.ok_or_else(|| CliError::Usage(format!("alpha = {} has no nematic equilibrium to start from", p.alpha_ms)))?;
            if c.init == "perturbed" {
                FieldState::perturbed_equilibrium(c.nx, c.ny, c.lx, c.ly, s2, c.angle_amp, c.vel_amp, cfg.seed)
            } else {
                FieldState::uniform(c.nx, c.ny, c.lx, c.ly, SymTraceless3::uniaxial(s2, &Vec3::x())?)
            }
        }
        _ => {
            let q = match s2 {
                Some(s) => SymTraceless3::uniaxial(s, &Vec3::x())?,
                None => SymTraceless3::ZERO,
            };
            FieldState::taylor_green(c.nx, c.vel_amp, q)
        }
    };
    let mut st = st0;
    let opts = SolverOptions { quadrature_level: c.level, ..Default::default() };
    let mut solver = CoupledSolver::new(st.grid(), p, opts)?;
    let steps = ((c.t_end / c.dt).round() as usize).max(1);
    let dt = c.t_end / steps as f64;
    let meta = Meta::new("simulate", cfg, &[("flow", section(&cfg.flow)), ("simulate", section(c))]);
    std::fs::create_dir_all(&c.output_dir)?;
    let series_path = c.output_dir.join("timeseries.csv");
    let mut csv = Csv::new(sink(Some(&series_path))?, &meta, &TIMESERIES_COLUMNS)?;
    let start = Instant::now();
    let row = |csv: &mut Csv<_>, solver: &mut CoupledSolver, st: &FieldState, step: usize, div: f64| -> Result<f64, CliError> {
        let e = solver.energy_report(st)?;
        csv.row(&[
            step.to_string(),
            num(e.t),
            num(e.total),
            num(e.kinetic),
            num(e.bulk),
            num(e.elastic),
            num(e.dissipation),
            num(e.viscous),
            num(e.closure),
            num(e.rotational),
            num(e.translational),
            num(e.min_margin),
            num(e.max_speed),
            num(div),
        ])?;
        Ok(e.total)
    };
    let mut prev = row(&mut csv, &mut solver, &st, 0, 0.0)?;
    let mut increases = 0usize;
    for k in 1..=steps {
        let info = match solver.step(&mut st, dt) {
            Ok(info) => info,
            Err(e) => {
                csv.finish()?;
                return Err(e.into());
            }
        };
        if k % c.every == 0 || k == steps {
            let e = row(&mut csv, &mut solver, &st, k, info.divergence)?;
            if e > prev + 1e-9 * prev.abs() {
                increases += 1;
            }
            prev = e;
        }
    }
    csv.finish()?;
    let format = if c.checkpoint_format == "binary" { CheckpointFormat::Binary } else { CheckpointFormat::Csv };
    let ck_path = c.output_dir.join(if format == CheckpointFormat::Binary { "checkpoint.bin" } else { "checkpoint.csv" });
    let mut w = sink(Some(&ck_path))?;
    checkpoint::write(&mut w, &st, &p, format, &meta.map())?;
    w.flush()?;
    eprintln!(
        "simulate: {steps} steps of {dt:e} to t = {:.4}, min margin {:.4}, energy increases {increases}, {:.1} s",
        st.t,
        st.min_margin().1,
        start.elapsed().as_secs_f64()
    );
    maybe_plot(cfg, Some(&series_path), |path| gnuplot(path, &meta, "energy", (2, "t"), &[(3, "total"), (7, "dissipation")], false))
}

pub fn limit(cfg: &RunConfig) -> Result<(), CliError> {
    let c = &cfg.limit;
    c.validate()?;
    let p = cfg.flow.params()?;
    let scenario = if c.scenario == "shear" {
        Scenario::HomogeneousShear { shear_rate: c.shear_rate, n0: Vec3::new(c.n0_angle.cos(), c.n0_angle.sin(), 0.0) }
    } else {
        Scenario::Splay1D { nx: c.nx, length: c.length, amplitude: c.amplitude }
    };
    let start = Instant::now();
    let table = limit_study(&c.de_list, &scenario, &p, c.t_end, c.level)?;
    let steady = steady_shear_angle(table.lambda);
    let result = json!({
        "scenario": table.scenario.name(),
        "s2": table.s2,
        "lambda": table.lambda,
        "gamma1": table.gamma1,
        "manifold_constant": table.manifold_constant,
        "steady_angle": steady,
        "steady_angle_residual": steady.map(|th| (2.0 * th).cos() - 1.0 / table.lambda),
    });
    let meta = Meta::new("limit", cfg, &[("flow", section(&cfg.flow)), ("limit", section(c)), ("result", result)]);
    let mut csv = Csv::new(sink(c.output.as_deref())?, &meta, &["de", "steps", "error", "order", "manifold_distance", "biaxiality", "min_margin", "s2_measured"])?;
    eprintln!("{:>10} {:>8} {:>12} {:>8} {:>12}", "De", "steps", "error", "order", "dist/De");
    for r in &table.rows {
        csv.row(&[num(r.de), r.steps.to_string(), num(r.error), opt(r.order), num(r.manifold_distance), num(r.biaxiality), num(r.min_margin), num(r.s2_measured)])?;
        let order = r.order.map(|o| format!("{o:.3}")).unwrap_or_else(|| "-".into());
        eprintln!("{:>10} {:>8} {:>12.4e} {:>8} {:>12.4}", r.de, r.steps, r.error, order, r.manifold_distance / r.de);
    }
    csv.finish()?;
    eprintln!("limit: lambda = {:.6}, {:.1} s", table.lambda, start.elapsed().as_secs_f64());
    maybe_plot(cfg, c.output.as_deref(), |path| gnuplot(path, &meta, "director error", (1, "De"), &[(3, "error")], true))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints() {
        let v = linspace(1.0, 2.0, 5);
        assert_eq!(v.first(), Some(&1.0));
        assert_eq!(v.last(), Some(&2.0));
        assert_eq!(linspace(3.0, 3.0, 1), vec![3.0]);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(vec![3, 1, 2]), 2.0);
        assert_eq!(median(vec![4, 1, 2, 3]), 2.5);
    }
}
