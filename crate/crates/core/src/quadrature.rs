//! Product Gauss-Legendre × uniform-azimuth quadrature on the unit sphere and
//! Bingham-density moments.

use std::f64::consts::PI;

use crate::tensor::{exponents, Mat3, Sym4Moment, Sym6Moment, SymTraceless3, Traceless4};

/// Gauss-Legendre nodes and weights on [−1, 1], nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, z);
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// P_n(z) and P_n'(z) by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Sums `f(i)` over `0..n` with a fixed pairwise tree.
pub(crate) fn pairwise<const N: usize>(n: usize, f: &impl Fn(usize, &mut [f64; N])) -> [f64; N] {
    fn rec<const N: usize>(lo: usize, hi: usize, f: &impl Fn(usize, &mut [f64; N])) -> [f64; N] {
        if hi - lo <= 32 {
            let mut acc = [0.0; N];
            for i in lo..hi {
                f(i, &mut acc);
            }
            acc
        } else {
            let mid = lo + (hi - lo) / 2;
            let a = rec(lo, mid, f);
            let b = rec(mid, hi, f);
            std::array::from_fn(|k| a[k] + b[k])
        }
    }
    rec(0, n, f)
}

/// Nodes of the full rule restricted to one octant, stored as squared coordinates.
#[derive(Clone, Debug)]
struct OctantRule {
    xx: Vec<f64>,
    yy: Vec<f64>,
    w: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct QuadratureRule {
    level: usize,
    nodes: Vec<[f64; 3]>,
    weights: Vec<f64>,
    octant: OctantRule,
}

impl QuadratureRule {
    pub fn new(level: usize) -> Self {
        assert!(level >= 1, "quadrature level must be at least 1");
        let (gx, gw) = gauss_legendre(level);
        let naz = 2 * level;
        let dphi = PI / level as f64;
        let mut nodes = Vec::with_capacity(level * naz);
        let mut weights = Vec::with_capacity(level * naz);
        for (z, w) in gx.iter().zip(&gw) {
            let s = (1.0 - z * z).max(0.0).sqrt();
            for j in 0..naz {
                let phi = dphi * j as f64;
                nodes.push([s * phi.cos(), s * phi.sin(), *z]);
                weights.push(w * dphi);
            }
        }
        let mut octant = OctantRule {
            xx: Vec::new(),
            yy: Vec::new(),
            w: Vec::new(),
        };
        for (z, w) in gx.iter().zip(&gw) {
            if *z < 0.0 {
                continue;
            }
            let mz = if *z == 0.0 { 1.0 } else { 2.0 };
            let s2 = 1.0 - z * z;
            for j in 0..=level / 2 {
                let phi = dphi * j as f64;
                let mphi = if j == 0 || 2 * j == level { 2.0 } else { 4.0 };
                let c = phi.cos();
                let sn = phi.sin();
                octant.xx.push(s2 * c * c);
                octant.yy.push(s2 * sn * sn);
                octant.w.push(w * dphi * mz * mphi);
            }
        }
        Self {
            level,
            nodes,
            weights,
            octant,
        }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// Polynomial degree integrated exactly.
    pub fn degree(&self) -> usize {
        2 * self.level - 1
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Σ wᵢ g(mᵢ).
    pub fn integrate(&self, g: impl Fn(&[f64; 3]) -> f64) -> f64 {
        pairwise::<1>(self.len(), &|i, acc| acc[0] += self.weights[i] * g(&self.nodes[i]))[0]
    }

    /// Statistics of X = m₁², Y = m₂² under the density ∝ exp(c₁X + c₂Y).
    pub(crate) fn diag_stats(&self, c1: f64, c2: f64) -> DiagStats {
        let o = &self.octant;
        let shift = c1.max(c2).max(0.0);
        let s = pairwise::<6>(o.w.len(), &|i, acc| {
            let x = o.xx[i];
            let y = o.yy[i];
            let e = o.w[i] * (c1 * x + c2 * y - shift).exp();
            acc[0] += e;
            acc[1] += e * x;
            acc[2] += e * y;
            acc[3] += e * x * x;
            acc[4] += e * y * y;
            acc[5] += e * x * y;
        });
        let inv = 1.0 / s[0];
        DiagStats {
            ln_z: s[0].ln() + shift,
            x: s[1] * inv,
            y: s[2] * inv,
            xx: s[3] * inv,
            yy: s[4] * inv,
            xy: s[5] * inv,
        }
    }

    /// Sixth moments (X³, X²Y, …) in the eigenframe, slot order of degree-6 exponents with even entries.
    pub(crate) fn diag_sixth(&self, c1: f64, c2: f64) -> [f64; 10] {
        let o = &self.octant;
        let shift = c1.max(c2).max(0.0);
        let s = pairwise::<11>(o.w.len(), &|i, acc| {
            let x = o.xx[i];
            let y = o.yy[i];
            let z = 1.0 - x - y;
            let e = o.w[i] * (c1 * x + c2 * y - shift).exp();
            acc[0] += e;
            for (k, [a, b, c]) in EVEN6.iter().enumerate() {
                acc[k + 1] += e * x.powi(*a as i32) * y.powi(*b as i32) * z.powi(*c as i32);
            }
        });
        std::array::from_fn(|k| s[k + 1] / s[0])
    }
}

/// Exponent halves (a, b, c) with a+b+c = 3, i.e. monomials X^a Y^b Z^c.
const EVEN6: [[usize; 3]; 10] = [
    [3, 0, 0],
    [2, 1, 0],
    [1, 2, 0],
    [0, 3, 0],
    [2, 0, 1],
    [1, 1, 1],
    [0, 2, 1],
    [1, 0, 2],
    [0, 1, 2],
    [0, 0, 3],
];

#[derive(Clone, Copy, Debug)]
pub(crate) struct DiagStats {
    pub ln_z: f64,
    pub x: f64,
    pub y: f64,
    pub xx: f64,
    pub yy: f64,
    pub xy: f64,
}

impl DiagStats {
    pub fn z_mean(&self) -> f64 {
        1.0 - self.x - self.y
    }

    /// Covariance of (X, Y).
    pub fn covariance(&self) -> [[f64; 2]; 2] {
        let cxy = self.xy - self.x * self.y;
        [[self.xx - self.x * self.x, cxy], [cxy, self.yy - self.y * self.y]]
    }

    /// Fourth moments in the eigenframe as a Sym4Moment.
    pub fn fourth(&self) -> Sym4Moment {
        let xz = self.x - self.xx - self.xy;
        let yz = self.y - self.xy - self.yy;
        let zz = self.z_mean() - xz - yz;
        // slots of x⁴, x²y², y⁴, x²z², y²z², z⁴
        let mut m = Sym4Moment::default();
        m.0[0] = self.xx;
        m.0[2] = self.xy;
        m.0[4] = self.yy;
        m.0[9] = xz;
        m.0[11] = yz;
        m.0[14] = zz;
        m
    }
}

pub(crate) fn sixth_from_diag(d: &[f64; 10]) -> Sym6Moment {
    let mut m = Sym6Moment::default();
    for (s, e) in exponents(6).iter().enumerate() {
        if e.iter().all(|k| k % 2 == 0) {
            let half = [e[0] / 2, e[1] / 2, e[2] / 2];
            let k = EVEN6.iter().position(|h| *h == half).unwrap();
            m.0[s] = d[k];
        }
    }
    m
}

/// Partition function and moments of the Bingham density exp(mm:B)/Z.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSet {
    pub z: f64,
    pub ln_z: f64,
    pub m2: Mat3,
    pub m4: Sym4Moment,
    pub m6: Sym6Moment,
}

impl MomentSet {
    /// Q = M⁽²⁾ − I/3.
    pub fn q(&self) -> SymTraceless3 {
        SymTraceless3::from_mat(&self.m2)
    }

    pub fn rotated(&self, r: &Mat3) -> Self {
        Self {
            z: self.z,
            ln_z: self.ln_z,
            m2: r * self.m2 * r.transpose(),
            m4: self.m4.rotated(r),
            m6: self.m6.rotated(r),
        }
    }
}

/// Direct lab-frame evaluation over every node of the rule.
pub fn moments_of(b: &SymTraceless3, rule: &QuadratureRule) -> MomentSet {
    let bm = b.to_mat();
    let expo: Vec<f64> = rule
        .nodes
        .iter()
        .map(|m| {
            let v = nalgebra::Vector3::from(*m);
            v.dot(&(bm * v))
        })
        .collect();
    let shift = expo.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e4 = exponents(4);
    let e6 = exponents(6);
    let sums = pairwise::<50>(rule.len(), &|i, acc| {
        let w = rule.weights[i] * (expo[i] - shift).exp();
        let m = &rule.nodes[i];
        let mut pw = [[1.0; 7]; 3];
        for a in 0..3 {
            for k in 1..7 {
                pw[a][k] = pw[a][k - 1] * m[a];
            }
        }
        acc[0] += w;
        let mut k = 1;
        for (i, j) in [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)] {
            acc[k] += w * m[i] * m[j];
            k += 1;
        }
        for e in &e4 {
            acc[k] += w * pw[0][e[0]] * pw[1][e[1]] * pw[2][e[2]];
            k += 1;
        }
        for e in &e6 {
            acc[k] += w * pw[0][e[0]] * pw[1][e[1]] * pw[2][e[2]];
            k += 1;
        }
    });
    let inv = 1.0 / sums[0];
    let s = |k: usize| sums[k] * inv;
    let m2 = Mat3::new(s(1), s(4), s(5), s(4), s(2), s(6), s(5), s(6), s(3));
    let m4 = Sym4Moment(std::array::from_fn(|k| s(7 + k)));
    let m6 = Sym6Moment(std::array::from_fn(|k| s(22 + k)));
    let ln_z = sums[0].ln() + shift;
    MomentSet {
        z: ln_z.exp(),
        ln_z,
        m2,
        m4,
        m6,
    }
}

/// Fourth-order traceless tensor Q₄ of the Bingham density.
pub fn q4_of(b: &SymTraceless3, rule: &QuadratureRule) -> Traceless4 {
    let m = moments_of(b, rule);
    Traceless4::from_moments(&m.m4, &m.m2)
}
