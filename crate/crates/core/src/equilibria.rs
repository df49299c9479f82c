//! Critical points of the Maier-Saupe bulk energy under the Bingham closure.
//!
//! Uniaxial critical points have B = η(nn − I/3) with η a root of
//! `3e^η/A₀(η) = 3 + 2η + 4η²/α`, where `A_k(η) = ∫₀¹ x^k e^{ηx²} dx`.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::tensor::{delta, Sym4Moment, SymTraceless3, Vec3};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Adaptive Gauss-Kronrod (7/15) integral of `f` over [a, b].
pub fn integrate_gk(f: &impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    fn panel(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let fc = f(c);
        let mut k = WGK[7] * fc;
        let mut g = WG[3] * fc;
        for j in 0..7 {
            let s = f(c - h * XGK[j]) + f(c + h * XGK[j]);
            k += WGK[j] * s;
            if j % 2 == 1 {
                g += WG[j / 2] * s;
            }
        }
        (k * h, (k - g) * h)
    }
    fn rec(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol_per_len: f64, depth: usize) -> f64 {
        let (k, err) = panel(f, a, b);
        let tol = (tol_per_len * (b - a)).max(50.0 * f64::EPSILON * k.abs());
        if depth == 0 || !(err.abs() > tol) {
            return k;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, tol_per_len, depth - 1) + rec(f, m, b, tol_per_len, depth - 1)
    }
    let (coarse, _) = panel(f, a, b);
    let (left, _) = panel(f, a, 0.5 * (a + b));
    let (right, _) = panel(f, 0.5 * (a + b), b);
    let scale = coarse.abs().max((left + right).abs()).max(f64::MIN_POSITIVE);
    rec(f, a, b, rel_tol * scale / (b - a), 40)
}

/// e^{−max(η,0)}·A_k(η), bounded by 1.
pub fn ak_scaled(k: u32, eta: f64) -> f64 {
    let shift = eta.max(0.0);
    integrate_gk(&|x: f64| x.powi(k as i32) * (eta * x * x - shift).exp(), 0.0, 1.0, 1e-14)
}

/// A_k(η) = ∫₀¹ x^k e^{ηx²} dx.
pub fn ak(k: u32, eta: f64) -> f64 {
    ak_scaled(k, eta) * eta.max(0.0).exp()
}

/// Ratios A₂/A₀, A₄/A₀ and g = e^η/A₀.
#[derive(Clone, Copy, Debug)]
struct Ratios {
    r2: f64,
    r4: f64,
    g: f64,
}

fn ratios(eta: f64) -> Ratios {
    let a0 = ak_scaled(0, eta);
    let a2 = ak_scaled(2, eta);
    let a4 = ak_scaled(4, eta);
    let g = if eta >= 0.0 { 1.0 / a0 } else { eta.exp() / a0 };
    Ratios {
        r2: a2 / a0,
        r4: a4 / a0,
        g,
    }
}

/// 3e^η/A₀(η) − (3 + 2η + 4η²/α).
pub fn eta_residual(eta: f64, alpha: f64) -> f64 {
    3.0 * ratios(eta).g - 3.0 - 2.0 * eta - 4.0 * eta * eta / alpha
}

/// ∂/∂η of [`eta_residual`].
pub fn eta_residual_derivative(eta: f64, alpha: f64) -> f64 {
    let r = ratios(eta);
    3.0 * r.g * (1.0 - r.r2) - 2.0 - 8.0 * eta / alpha
}

fn eta_residual_second(eta: f64, alpha: f64) -> f64 {
    let r = ratios(eta);
    let g1 = r.g * (1.0 - r.r2);
    let g2 = g1 * (1.0 - r.r2) - r.g * (r.r4 - r.r2 * r.r2);
    3.0 * g2 - 8.0 / alpha
}

/// The coupling α at which η is a root: α(η) = 4η²A₀/(3e^η − (3+2η)A₀).
pub fn alpha_of_eta(eta: f64) -> f64 {
    let g = ratios(eta).g;
    4.0 * eta * eta / (3.0 * g - 3.0 - 2.0 * eta)
}

/// S₂ = (3A₂−A₀)/(2A₀), S₄ = (35A₄−30A₂+3A₀)/(8A₀).
pub fn order_parameters(eta: f64) -> (f64, f64) {
    let r = ratios(eta);
    ((3.0 * r.r2 - 1.0) / 2.0, (35.0 * r.r4 - 30.0 * r.r2 + 3.0) / 8.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub eta: f64,
    pub a0: f64,
    pub a2: f64,
    pub a4: f64,
    pub s2: f64,
    pub s4: f64,
    /// Tangential (double) root detected from a vanishing maximum of the residual.
    pub double: bool,
}

impl Root {
    fn at(eta: f64, double: bool) -> Self {
        let (s2, s4) = order_parameters(eta);
        Self {
            eta,
            a0: ak(0, eta),
            a2: ak(2, eta),
            a4: ak(4, eta),
            s2,
            s4,
            double,
        }
    }
}

/// Roots η of the bifurcation equation at fixed α, sorted descending.
#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumBranch {
    pub alpha: f64,
    pub roots: Vec<Root>,
}

impl EquilibriumBranch {
    /// The nematic root η₁ (largest positive root) when present.
    pub fn eta1(&self) -> Option<&Root> {
        self.roots.first().filter(|r| r.eta > 0.0)
    }

    /// The second nonzero root η₂ when three roots exist.
    pub fn eta2(&self) -> Option<&Root> {
        if self.roots.len() == 3 {
            self.roots.iter().skip(1).find(|r| r.eta != 0.0)
        } else {
            None
        }
    }
}

pub const SCAN_STEP: f64 = 1e-2;
/// Upper end of the positive scan; η₁ ≈ α − 3/2 for large α.
pub const SCAN_MAX: f64 = 120.0;
/// Lower end of the negative scan; the oblate root sits near −α/2.
pub const SCAN_MIN: f64 = -80.0;
const SCAN_START: f64 = 1e-6;
const DOUBLE_ROOT_TOL: f64 = 1e-8;

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    while (b - a).abs() > tol {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn grid(from: f64, to: f64) -> Vec<f64> {
    let n = ((to - from).abs() / SCAN_STEP).round() as usize;
    (0..=n).map(|i| from + (to - from) * i as f64 / n as f64).collect()
}

/// Finds all roots by a sign-change scan refined with bisection to 1e−12.
pub fn solve_branches(alpha: f64) -> EquilibriumBranch {
    assert!(alpha > 0.0, "alpha must be positive");
    let f = |eta: f64| eta_residual(eta, alpha);
    let mut roots = vec![Root::at(0.0, false)];
    for side in [grid(SCAN_START, SCAN_MAX), grid(-SCAN_START, SCAN_MIN)] {
        let vals: Vec<f64> = side.iter().map(|&e| f(e)).collect();
        let mut found: Vec<f64> = Vec::new();
        for i in 1..side.len() {
            if (vals[i - 1] < 0.0) != (vals[i] < 0.0) {
                found.push(bisect(f, side[i - 1], side[i], 1e-12));
            }
        }
        // a local maximum that only touches zero is a double root
        for i in 1..side.len() - 1 {
            if vals[i] >= vals[i - 1] && vals[i] >= vals[i + 1] {
                let d = |e: f64| eta_residual_derivative(e, alpha);
                let (lo, hi) = (side[i - 1].min(side[i + 1]), side[i - 1].max(side[i + 1]));
                if d(lo) * d(hi) > 0.0 {
                    continue;
                }
                let top = bisect(d, lo, hi, 1e-12);
                let near = found.iter().any(|r| (r - top).abs() < 2.0 * SCAN_STEP);
                if !near && f(top).abs() <= DOUBLE_ROOT_TOL {
                    found.push(top);
                    roots.push(Root::at(top, true));
                }
            }
        }
        roots.extend(found.iter().filter(|e| !roots.iter().any(|r| r.eta == **e)).map(|&e| Root::at(e, false)).collect::<Vec<_>>());
    }
    roots.sort_by(|a, b| b.eta.total_cmp(&a.eta));
    EquilibriumBranch { alpha, roots }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalPoint {
    pub alpha_star: f64,
    pub eta_star: f64,
    pub residual: f64,
    pub derivative_residual: f64,
}

static CRITICAL: OnceLock<Result<CriticalPoint>> = OnceLock::new();

/// The smallest α with a nonzero root, and the tangential root η* there (computed once per process).
pub fn critical_alpha() -> Result<CriticalPoint> {
    CRITICAL.get_or_init(compute_critical).clone()
}

fn compute_critical() -> Result<CriticalPoint> {
    let (mut eta, mut alpha) = grid(0.05, 20.0)
        .into_iter()
        .map(|e| (e, alpha_of_eta(e)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let mut best = f64::INFINITY;
    for _ in 0..60 {
        let f1 = eta_residual(eta, alpha);
        let f2 = eta_residual_derivative(eta, alpha);
        best = f1.abs().max(f2.abs());
        if best <= 1e-13 {
            break;
        }
        let a2 = alpha * alpha;
        let j = [
            [f2, 4.0 * eta * eta / a2],
            [eta_residual_second(eta, alpha), 8.0 * eta / a2],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        eta -= (j[1][1] * f1 - j[0][1] * f2) / det;
        alpha -= (j[0][0] * f2 - j[1][0] * f1) / det;
    }
    let residual = eta_residual(eta, alpha);
    let derivative_residual = eta_residual_derivative(eta, alpha);
    if residual.abs() > 1e-10 || derivative_residual.abs() > 1e-10 {
        return Err(Error::NoConvergence {
            iterations: 60,
            residual: best,
        });
    }
    Ok(CriticalPoint {
        alpha_star: alpha,
        eta_star: eta,
        residual,
        derivative_residual,
    })
}

/// Closed-form fourth moment of the uniaxial equilibrium density with director n.
pub fn uniaxial_m4(s2: f64, s4: f64, n: &Vec3) -> Sym4Moment {
    let c6 = (s2 - s4) / 7.0;
    let c3 = s4 / 35.0 - 2.0 * s2 / 21.0 + 1.0 / 15.0;
    Sym4Moment::from_fn(|i, j, k, l| {
        let nn = |a: usize, b: usize| n[a] * n[b];
        let six = nn(i, j) * delta(k, l)
            + nn(k, l) * delta(i, j)
            + nn(i, k) * delta(j, l)
            + nn(j, l) * delta(i, k)
            + nn(i, l) * delta(j, k)
            + nn(j, k) * delta(i, l);
        let three = delta(i, j) * delta(k, l) + delta(i, k) * delta(j, l) + delta(i, l) * delta(j, k);
        s4 * n[i] * n[j] * n[k] * n[l] + c6 * six + c3 * three
    })
}

/// Uniaxial equilibrium on the nematic branch η = η₁(α).
#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumData {
    pub alpha: f64,
    pub eta: f64,
    pub a0: f64,
    pub a2: f64,
    pub a4: f64,
    pub s2: f64,
    pub s4: f64,
    pub n: Vec3,
    pub q0: SymTraceless3,
    pub b0: SymTraceless3,
    pub m4: Sym4Moment,
}

pub fn equilibrium_data(alpha: f64, n: &Vec3) -> Result<EquilibriumData> {
    if (n.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::NonUnitVector(n.norm()));
    }
    let crit = critical_alpha()?;
    if alpha <= crit.alpha_star {
        return Err(Error::SubCritical {
            alpha,
            alpha_star: crit.alpha_star,
        });
    }
    let branch = solve_branches(alpha);
    let root = *branch.eta1().ok_or(Error::SubCritical {
        alpha,
        alpha_star: crit.alpha_star,
    })?;
    Ok(equilibrium_at(alpha, &root, n))
}

pub(crate) fn equilibrium_at(alpha: f64, root: &Root, n: &Vec3) -> EquilibriumData {
    EquilibriumData {
        alpha,
        eta: root.eta,
        a0: root.a0,
        a2: root.a2,
        a4: root.a4,
        s2: root.s2,
        s4: root.s4,
        n: *n,
        q0: SymTraceless3::uniaxial_unchecked(root.s2, n),
        b0: SymTraceless3::uniaxial_unchecked(root.eta, n),
        m4: uniaxial_m4(root.s2, root.s4, n),
    }
}

impl EquilibriumData {
    /// Same equilibrium with a different director.
    pub fn with_director(&self, n: &Vec3) -> Self {
        let root = Root {
            eta: self.eta,
            a0: self.a0,
            a2: self.a2,
            a4: self.a4,
            s2: self.s2,
            s4: self.s4,
            double: false,
        };
        equilibrium_at(self.alpha, &root, n)
    }
}
