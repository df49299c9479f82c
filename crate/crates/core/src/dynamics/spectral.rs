use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// Doubly periodic Fourier grid; cell (ix, iy) is stored at iy·nx + ix.
#[derive(Clone)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    kx: Vec<f64>,
    ky: Vec<f64>,
    kx2: Vec<f64>,
    ky2: Vec<f64>,
    keep_x: Vec<bool>,
    keep_y: Vec<bool>,
    fx: Arc<dyn Fft<f64>>,
    ix: Arc<dyn Fft<f64>>,
    fy: Arc<dyn Fft<f64>>,
    iy: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Grid({}x{}, {}x{})", self.nx, self.ny, self.lx, self.ly)
    }
}

fn wavenumbers(n: usize, l: f64) -> (Vec<f64>, Vec<f64>, Vec<bool>) {
    let mut d = vec![0.0; n];
    let mut sq = vec![0.0; n];
    let mut keep = vec![false; n];
    for m in 0..n {
        let s = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
        let k = 2.0 * PI * s / l;
        sq[m] = k * k;
        d[m] = if n % 2 == 0 && m == n / 2 { 0.0 } else { k };
        keep[m] = 3.0 * s.abs() <= n as f64 && !(n % 2 == 0 && m == n / 2 && n > 1);
    }
    (d, sq, keep)
}

impl Grid {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Self {
        assert!(nx > 0 && ny > 0 && lx > 0.0 && ly > 0.0);
        let mut planner = FftPlanner::new();
        let (kx, kx2, keep_x) = wavenumbers(nx, lx);
        let (ky, ky2, keep_y) = wavenumbers(ny, ly);
        Self {
            nx,
            ny,
            lx,
            ly,
            kx,
            ky,
            kx2,
            ky2,
            keep_x,
            keep_y,
            fx: planner.plan_fft_forward(nx),
            ix: planner.plan_fft_inverse(nx),
            fy: planner.plan_fft_forward(ny),
            iy: planner.plan_fft_inverse(ny),
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    pub fn coords(&self, idx: usize) -> (f64, f64) {
        ((idx % self.nx) as f64 * self.dx(), (idx / self.nx) as f64 * self.dy())
    }

    /// Wavevector used for first derivatives (Nyquist zeroed).
    pub fn k(&self, idx: usize) -> (f64, f64) {
        (self.kx[idx % self.nx], self.ky[idx / self.nx])
    }

    /// |k|² including the Nyquist modes.
    pub fn k2(&self, idx: usize) -> f64 {
        self.kx2[idx % self.nx] + self.ky2[idx / self.nx]
    }

    /// Two-thirds rule mask.
    pub fn keep(&self, idx: usize) -> bool {
        self.keep_x[idx % self.nx] && self.keep_y[idx / self.nx]
    }

    pub fn forward(&self, data: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut buf, &self.fx, &self.fy);
        buf
    }

    pub fn inverse(&self, spec: &[Complex64]) -> Vec<f64> {
        let mut buf = spec.to_vec();
        self.transform(&mut buf, &self.ix, &self.iy);
        let s = 1.0 / self.len() as f64;
        buf.iter().map(|z| z.re * s).collect()
    }

    fn transform(&self, buf: &mut [Complex64], fx: &Arc<dyn Fft<f64>>, fy: &Arc<dyn Fft<f64>>) {
        assert_eq!(buf.len(), self.len());
        if self.nx > 1 {
            fx.process(buf);
        }
        if self.ny > 1 {
            let mut col = vec![Complex64::new(0.0, 0.0); self.ny];
            for ix in 0..self.nx {
                for iy in 0..self.ny {
                    col[iy] = buf[iy * self.nx + ix];
                }
                fy.process(&mut col);
                for iy in 0..self.ny {
                    buf[iy * self.nx + ix] = col[iy];
                }
            }
        }
    }

    pub fn diff_x(&self, spec: &[Complex64]) -> Vec<Complex64> {
        spec.iter().enumerate().map(|(i, z)| z * Complex64::new(0.0, self.k(i).0)).collect()
    }

    pub fn diff_y(&self, spec: &[Complex64]) -> Vec<Complex64> {
        spec.iter().enumerate().map(|(i, z)| z * Complex64::new(0.0, self.k(i).1)).collect()
    }

    pub fn laplacian(&self, spec: &[Complex64]) -> Vec<Complex64> {
        spec.iter().enumerate().map(|(i, z)| z * -self.k2(i)).collect()
    }

    pub fn dealias(&self, spec: &mut [Complex64]) {
        for (i, z) in spec.iter_mut().enumerate() {
            if !self.keep(i) {
                *z = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Physical-space gradient of a real field.
    pub fn grad(&self, data: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let s = self.forward(data);
        (self.inverse(&self.diff_x(&s)), self.inverse(&self.diff_y(&s)))
    }

    /// Leray projection of a spectral vector field onto divergence-free fields.
    pub fn project(&self, u: &mut [Vec<Complex64>; 2]) {
        for i in 0..self.len() {
            let (kx, ky) = self.k(i);
            let k2 = kx * kx + ky * ky;
            if k2 == 0.0 {
                continue;
            }
            let div = u[0][i] * kx + u[1][i] * ky;
            u[0][i] -= div * (kx / k2);
            u[1][i] -= div * (ky / k2);
        }
    }

    /// Max |∂ₓu + ∂ᵧv| of a physical velocity field.
    pub fn divergence_max(&self, u: &[f64], v: &[f64]) -> f64 {
        let (ux, _) = self.grad(u);
        let (_, vy) = self.grad(v);
        ux.iter().zip(&vy).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max)
    }

    /// ∑ f · cell area.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        crate::quadrature::pairwise::<1>(f.len(), &|i, acc| acc[0] += f[i])[0] * self.cell_area()
    }
}
