//! Leslie viscosities, Frank elastic constants and the Ericksen coefficient on the nematic branch.

use crate::equilibria::{critical_alpha, solve_branches};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LeslieCoefficients {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub alpha4: f64,
    pub alpha5: f64,
    pub alpha6: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub eta: f64,
    pub s2: f64,
    pub s4: f64,
}

/// (η₁, S₂, S₄) on the nematic branch, or SubCritical.
pub fn nematic_state(alpha: f64) -> Result<(f64, f64, f64)> {
    let crit = critical_alpha()?;
    let sub = Error::SubCritical {
        alpha,
        alpha_star: crit.alpha_star,
    };
    if alpha <= crit.alpha_star {
        return Err(sub);
    }
    let branch = solve_branches(alpha);
    let r = branch.eta1().ok_or(sub)?;
    Ok((r.eta, r.s2, r.s4))
}

pub fn leslie_coefficients(alpha: f64) -> Result<LeslieCoefficients> {
    let (eta, s2, s4) = nematic_state(alpha)?;
    Ok(leslie_from_order(alpha, s2, s4, eta))
}

/// Coefficients at user-supplied order parameters (η is carried for provenance only).
pub fn leslie_from_order(alpha: f64, s2: f64, s4: f64, eta: f64) -> LeslieCoefficients {
    let lambda = 1.0 / 3.0 + 2.0 / (3.0 * s2) - 2.0 / (s2 * alpha);
    let gamma1 = 1.0 / (1.0 / (3.0 * s2) + 2.0 / (3.0 * s2 * s2) - 2.0 / (s2 * s2 * alpha));
    LeslieCoefficients {
        alpha1: -s4 / 2.0,
        alpha2: -(s2 / 2.0) * (1.0 + 1.0 / lambda),
        alpha3: -(s2 / 2.0) * (1.0 - 1.0 / lambda),
        alpha4: 4.0 / 15.0 - 5.0 * s2 / 21.0 - s4 / 35.0,
        alpha5: s4 / 7.0 + 6.0 * s2 / 7.0,
        alpha6: s4 / 7.0 - s2 / 7.0,
        gamma1,
        gamma2: -s2,
        lambda,
        alpha,
        eta,
        s2,
        s4,
    }
}

impl LeslieCoefficients {
    /// (α₂+α₃) − (α₆−α₅).
    pub fn parodi_residual(&self) -> f64 {
        (self.alpha2 + self.alpha3) - (self.alpha6 - self.alpha5)
    }

    /// (α₅+α₆−γ₂²/γ₁, α₁+γ₂²/γ₁, 1/γ₁) of the director-theory dissipation.
    pub fn dissipation_coefficients(&self) -> [f64; 3] {
        let g = self.gamma2 * self.gamma2 / self.gamma1;
        [self.alpha5 + self.alpha6 - g, self.alpha1 + g, 1.0 / self.gamma1]
    }

    /// Steady in-plane angle to the flow in simple shear, when |λ| > 1.
    pub fn alignment_angle(&self) -> Option<f64> {
        (self.lambda.abs() > 1.0).then(|| 0.5 * (1.0 / self.lambda).acos())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrankConstants {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub j: [f64; 5],
    pub s2: f64,
    pub s4: f64,
}

pub fn frank_constants(j: [f64; 5], alpha: f64) -> Result<FrankConstants> {
    let (_, s2, s4) = nematic_state(alpha)?;
    Ok(frank_from_order(j, s2, s4))
}

pub fn frank_from_order(j: [f64; 5], s2: f64, s4: f64) -> FrankConstants {
    let [j1, j2, j3, j4, j5] = j;
    let q = s4 * s4;
    FrankConstants {
        k1: 2.0 * s2 * s2 * (j1 + j3) + q * (16.0 * j2 / 7.0 + 92.0 * j4 / 49.0) - 6.0 / 7.0 * j5 * s2 * s4,
        k2: 2.0 * s2 * s2 * j1 + q * (16.0 * j2 / 7.0 + 12.0 * j4 / 49.0) - 2.0 / 7.0 * j5 * s2 * s4,
        k3: 2.0 * s2 * s2 * (j1 + j3) + q * (16.0 * j2 / 7.0 + 120.0 * j4 / 49.0) + 8.0 / 7.0 * j5 * s2 * s4,
        j,
        s2,
        s4,
    }
}

/// αGS₂², the one-constant elastic modulus of the director energy.
pub fn ericksen_coefficient(alpha: f64, g: f64) -> Result<f64> {
    let (_, s2, _) = nematic_state(alpha)?;
    Ok(alpha * g * s2 * s2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn formula_identities() {
        let c = leslie_coefficients(7.0).unwrap();
        assert!(c.parodi_residual().abs() <= 1e-14);
        assert_eq!(c.gamma2, -c.s2);
        assert!((c.alpha2 + c.alpha3 + c.s2).abs() <= 1e-14);
        assert!((c.gamma1 - (c.alpha3 - c.alpha2)).abs() <= 1e-13);
        assert!((c.gamma1 * c.lambda - c.s2).abs() <= 1e-13);
        assert!((c.lambda + c.gamma2 / c.gamma1).abs() <= 1e-13);
        assert!(c.gamma1 > 0.0);
        let d = c.dissipation_coefficients();
        assert!(d.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn flow_aligning_then_tumbling() {
        let a = leslie_coefficients(7.0).unwrap();
        assert!(a.lambda > 1.0);
        assert!(a.alignment_angle().is_some());
        let t = leslie_coefficients(12.0).unwrap();
        assert!(t.lambda.abs() < 1.0);
        assert!(t.alignment_angle().is_none());
    }

    #[test]
    fn lambda_trend_in_s2_is_logged() {
        for alpha in [7.0, 10.0, 20.0] {
            let (_, s2, s4) = nematic_state(alpha).unwrap();
            let grid: Vec<f64> = (0..11).map(|i| s2 * (0.5 + 0.1 * i as f64)).filter(|s| *s < 1.0).collect();
            let lam: Vec<f64> = grid.iter().map(|&s| leslie_from_order(alpha, s, s4, 0.0).lambda).collect();
            let increasing = lam.windows(2).all(|w| w[1] > w[0]);
            eprintln!("alpha={alpha} s2 in [{:.3}, {:.3}]: lambda increasing in s2: {increasing}", grid[0], grid[grid.len() - 1]);
            // dλ/dS₂ = -(2/3 - 2/α)/S₂²
            let slope = -(2.0 / 3.0 - 2.0 / alpha) / (s2 * s2);
            let h = 1e-6;
            let fd = (leslie_from_order(alpha, s2 + h, s4, 0.0).lambda - leslie_from_order(alpha, s2 - h, s4, 0.0).lambda) / (2.0 * h);
            assert!((fd - slope).abs() <= 1e-6 * slope.abs());
            assert_eq!(increasing, slope > 0.0);
        }
    }

    #[test]
    fn subcritical_is_rejected() {
        assert!(matches!(leslie_coefficients(2.0), Err(Error::SubCritical { .. })));
        assert!(matches!(ericksen_coefficient(2.0, 1.0), Err(Error::SubCritical { .. })));
    }

    #[test]
    fn frank_one_constant_and_linearity() {
        let f = frank_constants([1.0, 0.0, 0.0, 0.0, 0.0], 7.0).unwrap();
        let k = 2.0 * f.s2 * f.s2;
        assert!((f.k1 - k).abs() <= 1e-14 && (f.k2 - k).abs() <= 1e-14 && (f.k3 - k).abs() <= 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let j: [f64; 5] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let all = frank_from_order(j, f.s2, f.s4);
        let mut sum = [0.0; 3];
        for i in 0..5 {
            let mut e = [0.0; 5];
            e[i] = j[i];
            let p = frank_from_order(e, f.s2, f.s4);
            sum[0] += p.k1;
            sum[1] += p.k2;
            sum[2] += p.k3;
        }
        assert!((all.k1 - sum[0]).abs() <= 1e-14);
        assert!((all.k2 - sum[1]).abs() <= 1e-14);
        assert!((all.k3 - sum[2]).abs() <= 1e-14);
        let d = all.k3 - all.k1;
        let want = 4.0 / 7.0 * f.s4 * f.s4 * j[3] + 2.0 * j[4] * f.s2 * f.s4;
        assert!((d - want).abs() <= 1e-14);
    }

    #[test]
    fn ericksen_matches_one_constant_frank() {
        assert_eq!(ericksen_coefficient(7.0, 0.0).unwrap(), 0.0);
        let e = ericksen_coefficient(7.0, 0.3).unwrap();
        let f = frank_constants([7.0 * 0.3 / 2.0, 0.0, 0.0, 0.0, 0.0], 7.0).unwrap();
        assert!((f.k1 - e).abs() < 1e-14);
    }

    #[test]
    fn molecular_field_is_energy_variation() {
        // E = (K/2)Σ|∇n|²h on a periodic grid; −δE/δn = KΔn with the matching discrete Laplacian
        let k = ericksen_coefficient(7.0, 1.0).unwrap();
        let n = 64;
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let field: Vec<[f64; 3]> = (0..n)
            .map(|i| {
                let t = 0.4 * (i as f64 * h).sin();
                [t.cos(), t.sin(), 0.0]
            })
            .collect();
        let energy = |f: &[[f64; 3]]| {
            (0..n)
                .map(|i| {
                    let a = f[(i + 1) % n];
                    let b = f[i];
                    (0..3).map(|c| ((a[c] - b[c]) / h).powi(2)).sum::<f64>() * 0.5 * k * h
                })
                .sum::<f64>()
        };
        let w: Vec<[f64; 3]> = (0..n).map(|i| [0.0, (2.0 * i as f64 * h).cos(), 0.3]).collect();
        let t = 1e-5;
        let plus: Vec<[f64; 3]> = field.iter().zip(&w).map(|(a, b)| std::array::from_fn(|c| a[c] + t * b[c])).collect();
        let minus: Vec<[f64; 3]> = field.iter().zip(&w).map(|(a, b)| std::array::from_fn(|c| a[c] - t * b[c])).collect();
        let fd = -(energy(&plus) - energy(&minus)) / (2.0 * t);
        let hw: f64 = (0..n)
            .map(|i| {
                let l: [f64; 3] = std::array::from_fn(|c| k * (field[(i + 1) % n][c] - 2.0 * field[i][c] + field[(i + n - 1) % n][c]) / (h * h));
                (0..3).map(|c| l[c] * w[i][c]).sum::<f64>() * h
            })
            .sum();
        assert!((fd - hw).abs() < 1e-6 * hw.abs().max(1.0));
    }
}
