/// φ₀…φ₃ with φₖ(z) = Σ zⁿ/(n+k)!.
pub fn phi(z: f64) -> [f64; 4] {
    if z.abs() < 0.5 {
        let mut out = [0.0; 4];
        for (k, o) in out.iter_mut().enumerate() {
            let mut term = 1.0 / (1..=k).map(|v| v as f64).product::<f64>();
            let mut sum = 0.0;
            for n in 0..30 {
                sum += term;
                term *= z / (n + k + 1) as f64;
            }
            *o = sum;
        }
        out
    } else {
        let p1 = z.exp_m1() / z;
        let p2 = (p1 - 1.0) / z;
        let p3 = (p2 - 0.5) / z;
        [z.exp(), p1, p2, p3]
    }
}

/// Per-mode ETDRK4 (Cox–Matthews) weights for a diagonal linear part L and step h.
#[derive(Clone, Debug)]
pub struct EtdCoefficients {
    pub e: Vec<f64>,
    pub e2: Vec<f64>,
    pub qc: Vec<f64>,
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
    pub f3: Vec<f64>,
}

impl EtdCoefficients {
    pub fn new(lin: &[f64], h: f64) -> Self {
        let n = lin.len();
        let mut c = Self { e: vec![0.0; n], e2: vec![0.0; n], qc: vec![0.0; n], f1: vec![0.0; n], f2: vec![0.0; n], f3: vec![0.0; n] };
        for (i, &l) in lin.iter().enumerate() {
            let z = h * l;
            let [e, p1, p2, p3] = phi(z);
            let [e2, q1, _, _] = phi(0.5 * z);
            c.e[i] = e;
            c.e2[i] = e2;
            c.qc[i] = 0.5 * h * q1;
            c.f1[i] = h * (p1 - 3.0 * p2 + 4.0 * p3);
            c.f2[i] = h * (p2 - 2.0 * p3);
            c.f3[i] = h * (-p2 + 4.0 * p3);
        }
        c
    }
}
