//! Fully symmetric rank-4 and rank-6 tensors stored by monomial exponents.
//!
//! A component with `a` indices equal to x, `b` equal to y and `c` equal to z
//! lives at slot `c(2d+3−c)/2 + b` for degree `d`.

use std::ops::{Add, Mul, Sub};

use super::{Mat3, SymTraceless3, Vec3};

const fn slot(d: usize, b: usize, c: usize) -> usize {
    c * (2 * d + 3 - c) / 2 + b
}

const fn slot_of(idx: &[usize], d: usize) -> usize {
    let mut b = 0;
    let mut c = 0;
    let mut i = 0;
    while i < d {
        if idx[i] == 1 {
            b += 1;
        } else if idx[i] == 2 {
            c += 1;
        }
        i += 1;
    }
    slot(d, b, c)
}

const fn build_idx4() -> [u8; 81] {
    let mut t = [0u8; 81];
    let mut f = 0;
    while f < 81 {
        let idx = [f / 27, (f / 9) % 3, (f / 3) % 3, f % 3];
        t[f] = slot_of(&idx, 4) as u8;
        f += 1;
    }
    t
}

const fn build_idx6() -> [u8; 729] {
    let mut t = [0u8; 729];
    let mut f = 0;
    while f < 729 {
        let idx = [f / 243, (f / 81) % 3, (f / 27) % 3, (f / 9) % 3, (f / 3) % 3, f % 3];
        t[f] = slot_of(&idx, 6) as u8;
        f += 1;
    }
    t
}

/// Flat dense index (i,j,k,l) → storage slot.
pub(crate) const IDX4: [u8; 81] = build_idx4();
pub(crate) const IDX6: [u8; 729] = build_idx6();

/// Exponent triple (a, b, c) of every degree-`d` slot.
pub(crate) fn exponents(d: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for c in 0..=d {
        for b in 0..=(d - c) {
            debug_assert_eq!(slot(d, b, c), out.len());
            out.push([d - b - c, b, c]);
        }
    }
    out
}

fn rep_indices(e: [usize; 3]) -> Vec<usize> {
    let mut v = Vec::new();
    for (axis, &k) in e.iter().enumerate() {
        v.extend(std::iter::repeat(axis).take(k));
    }
    v
}

/// Applies R along every index of a dense 3^d tensor.
fn rotate_dense(dense: &mut [f64], d: usize, r: &Mat3) {
    let mut tmp = vec![0.0; dense.len()];
    for mode in 0..d {
        let stride = 3usize.pow((d - 1 - mode) as u32);
        for (f, out) in tmp.iter_mut().enumerate() {
            let i = (f / stride) % 3;
            let base = f - i * stride;
            *out = r[(i, 0)] * dense[base] + r[(i, 1)] * dense[base + stride] + r[(i, 2)] * dense[base + 2 * stride];
        }
        dense.copy_from_slice(&tmp);
    }
}

/// Fully symmetric rank-4 tensor (15 components).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sym4Moment(pub [f64; 15]);

impl Default for Sym4Moment {
    fn default() -> Self {
        Self([0.0; 15])
    }
}

impl Sym4Moment {
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.0[IDX4[27 * i + 9 * j + 3 * k + l] as usize]
    }

    /// Builds from a function evaluated at one representative index per slot.
    pub fn from_fn(f: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        let e = exponents(4);
        Self(std::array::from_fn(|s| {
            let r = rep_indices(e[s]);
            f(r[0], r[1], r[2], r[3])
        }))
    }

    /// Symmetrization of a dense 81-entry tensor.
    pub fn from_dense(d: &[f64; 81]) -> Self {
        let mut sum = [0.0; 15];
        let mut cnt = [0.0; 15];
        for (f, v) in d.iter().enumerate() {
            sum[IDX4[f] as usize] += v;
            cnt[IDX4[f] as usize] += 1.0;
        }
        Self(std::array::from_fn(|s| sum[s] / cnt[s]))
    }

    pub fn to_dense(&self) -> [f64; 81] {
        std::array::from_fn(|f| self.0[IDX4[f] as usize])
    }

    /// Moments of the uniform density: (δδ+δδ+δδ)/15.
    pub fn isotropic() -> Self {
        Self::from_fn(|i, j, k, l| (delta(i, j) * delta(k, l) + delta(i, k) * delta(j, l) + delta(i, l) * delta(j, k)) / 15.0)
    }

    /// nnnn.
    pub fn outer(n: &Vec3) -> Self {
        Self::from_fn(|i, j, k, l| n[i] * n[j] * n[k] * n[l])
    }

    /// (M:A)_{ij} = Σ_kl M_ijkl A_kl.
    pub fn contract(&self, a: &Mat3) -> Mat3 {
        let mut out = Mat3::zeros();
        for i in 0..3 {
            for j in i..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    for l in 0..3 {
                        s += self.0[IDX4[27 * i + 9 * j + 3 * k + l] as usize] * a[(k, l)];
                    }
                }
                out[(i, j)] = s;
                out[(j, i)] = s;
            }
        }
        out
    }

    /// Contraction with a symmetric traceless argument, returned as a symmetric matrix.
    pub fn contract_sym(&self, a: &SymTraceless3) -> Mat3 {
        self.contract(&a.to_mat())
    }

    /// A:M:B.
    pub fn double_contract(&self, a: &Mat3, b: &Mat3) -> f64 {
        (a.transpose() * self.contract(b)).trace()
    }

    /// M_ijkk.
    pub fn trace_pair(&self) -> Mat3 {
        self.contract(&Mat3::identity())
    }

    pub fn rotated(&self, r: &Mat3) -> Self {
        let mut d = self.to_dense();
        rotate_dense(&mut d, 4, r);
        Self::from_dense(&d)
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest deviation between any two index permutations of the dense form (zero by construction).
    pub fn asymmetry(&self) -> f64 {
        let d = self.to_dense();
        let mut worst: f64 = 0.0;
        for f in 0..81 {
            let (i, j, k, l) = (f / 27, (f / 9) % 3, (f / 3) % 3, f % 3);
            worst = worst.max((d[f] - d[27 * j + 9 * i + 3 * l + k]).abs());
            worst = worst.max((d[f] - d[27 * k + 9 * l + 3 * i + j]).abs());
        }
        worst
    }
}

impl Add for Sym4Moment {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl Sub for Sym4Moment {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl Mul<f64> for Sym4Moment {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self(self.0.map(|v| v * s))
    }
}

/// Fully symmetric rank-6 tensor (28 components).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sym6Moment(pub [f64; 28]);

impl Default for Sym6Moment {
    fn default() -> Self {
        Self([0.0; 28])
    }
}

impl Sym6Moment {
    #[inline]
    pub fn get(&self, idx: [usize; 6]) -> f64 {
        let f = idx.iter().fold(0, |acc, &i| 3 * acc + i);
        self.0[IDX6[f] as usize]
    }

    pub fn from_fn(f: impl Fn([usize; 6]) -> f64) -> Self {
        let e = exponents(6);
        Self(std::array::from_fn(|s| {
            let r = rep_indices(e[s]);
            f([r[0], r[1], r[2], r[3], r[4], r[5]])
        }))
    }

    pub fn from_dense(d: &[f64]) -> Self {
        assert_eq!(d.len(), 729);
        let mut sum = [0.0; 28];
        let mut cnt = [0.0; 28];
        for (f, v) in d.iter().enumerate() {
            sum[IDX6[f] as usize] += v;
            cnt[IDX6[f] as usize] += 1.0;
        }
        Self(std::array::from_fn(|s| sum[s] / cnt[s]))
    }

    pub fn to_dense(&self) -> Vec<f64> {
        (0..729).map(|f| self.0[IDX6[f] as usize]).collect()
    }

    /// (M:A)_{ijkl} = Σ_pq M_ijklpq A_pq.
    pub fn contract(&self, a: &Mat3) -> Sym4Moment {
        let e = exponents(4);
        Sym4Moment(std::array::from_fn(|s| {
            let r = rep_indices(e[s]);
            let base = 243 * r[0] + 81 * r[1] + 27 * r[2] + 9 * r[3];
            let mut acc = 0.0;
            for p in 0..3 {
                for q in 0..3 {
                    acc += self.0[IDX6[base + 3 * p + q] as usize] * a[(p, q)];
                }
            }
            acc
        }))
    }

    pub fn trace_pair(&self) -> Sym4Moment {
        self.contract(&Mat3::identity())
    }

    pub fn rotated(&self, r: &Mat3) -> Self {
        let mut d = self.to_dense();
        rotate_dense(&mut d, 6, r);
        Self::from_dense(&d)
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Fully symmetric rank-4 tensor whose single-pair contractions vanish.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Traceless4(pub Sym4Moment);

impl Traceless4 {
    /// M⁽⁴⁾ − (1/7)Σ₆ M⁽²⁾δ + (1/35)Σ₃ δδ for a unit-mass density with second moment `m2`.
    pub fn from_moments(m4: &Sym4Moment, m2: &Mat3) -> Self {
        Self(Sym4Moment::from_fn(|i, j, k, l| {
            let six = m2[(i, j)] * delta(k, l)
                + m2[(k, l)] * delta(i, j)
                + m2[(i, k)] * delta(j, l)
                + m2[(j, l)] * delta(i, k)
                + m2[(i, l)] * delta(j, k)
                + m2[(j, k)] * delta(i, l);
            let three = delta(i, j) * delta(k, l) + delta(i, k) * delta(j, l) + delta(i, l) * delta(j, k);
            m4.get(i, j, k, l) - six / 7.0 + three / 35.0
        }))
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.0.get(i, j, k, l)
    }

    /// Largest entry of any pair contraction.
    pub fn trace_residual(&self) -> f64 {
        self.0.trace_pair().amax()
    }
}

#[inline]
pub(crate) fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// ℳ_Q(A) = A/3 + Q·A − A:M⁽⁴⁾.
pub fn mq_apply(q: &SymTraceless3, m4: &Sym4Moment, a: &Mat3) -> Mat3 {
    a / 3.0 + q.to_mat() * a - m4.contract(a)
}

/// Σ_kl M_ijkl A_kl.
pub fn contract42(m4: &Sym4Moment, a: &Mat3) -> Mat3 {
    m4.contract(a)
}

/// Σ_pq M_ijklpq A_pq.
pub fn contract62(m6: &Sym6Moment, a: &Mat3) -> Sym4Moment {
    m6.contract(a)
}

/// s(nn − I/3) for a unit vector n.
pub fn uniaxial(s: f64, n: &Vec3) -> crate::Result<SymTraceless3> {
    SymTraceless3::uniaxial(s, n)
}
