//! Normalized energies `phi(r) = r^-alpha int_{B_r} |grad u|^2 |x|^(2-N)`
//! for closed-form and finite-element fields, and the checks that go with
//! them: monotonicity, the derivative inequality `E <= r E' / alpha`, the
//! boundary inequality on spheres, and the blow-up scaling.

mod analytic;
mod fem;
mod field;

pub use analytic::{
    boundary_inequality_analytic, energy_analytic, energy_profile_analytic, unweighted_energy,
    unweighted_energy_bound_check, EnergyBound,
};
pub use fem::{
    boundary_inequality_check, energy_profile_fem, solve_slit_disk_neumann, BoundaryCheck, FourierData,
};
pub use field::{rescale_field, AnalyticField, HarmonicPoly};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `sqrt((N-2)^2 + 4 gamma) - (N-2)`, written as `4 gamma / (sqrt(a^2 + 4
/// gamma) + a)` with `a = N - 2` to avoid cancellation. Negative `gamma` or
/// `N < 2` gives NaN.
pub fn alpha_of(n: u32, gamma: f64) -> f64 {
    if n < 2 || !(gamma >= 0.0) {
        return f64::NAN;
    }
    let a = (n - 2) as f64;
    let root = (a * a + 4.0 * gamma).sqrt();
    if a == 0.0 {
        return root;
    }
    4.0 * gamma / (root + a)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentParams {
    pub n: u32,
    pub gamma: f64,
    pub alpha: f64,
}

impl ExponentParams {
    pub fn new(n: u32, gamma: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Input(format!("dimension must be at least 2, got {n}")));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Input(format!("gamma must be positive, got {gamma}")));
        }
        let alpha = alpha_of(n, gamma);
        let a = (n - 2) as f64;
        let defect = alpha * alpha + 2.0 * a * alpha - 4.0 * gamma;
        assert!(
            defect.abs() <= 1e-12 * (4.0 * gamma).max(1.0),
            "alpha({n}, {gamma}) = {alpha} misses its defining relation by {defect:e}"
        );
        Ok(Self { n, gamma, alpha })
    }

    /// The planar case with the half-line crack: `gamma = 1/4`, `alpha = 1`.
    pub fn planar_cracktip() -> Self {
        Self::new(2, 0.25).expect("valid parameters")
    }

    /// Three dimensions with the half-plane crack: `gamma = 3/4`, `alpha = 1`.
    pub fn spatial_cracktip() -> Self {
        Self::new(3, 0.75).expect("valid parameters")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyProfile {
    pub params: ExponentParams,
    pub radii: Vec<f64>,
    pub energy: Vec<f64>,
    pub phi: Vec<f64>,
    /// Finite-difference `E'(r)`.
    pub d_energy: Vec<f64>,
    /// Allowed violation of `phi` monotonicity at each radius.
    pub slack: Vec<f64>,
    /// Allowed violation of `E - r E' / alpha <= 0` at each radius.
    pub inequality_slack: Vec<f64>,
    pub inequality_ok: Vec<bool>,
    pub monotone: bool,
}

impl EnergyProfile {
    /// Builds the profile from energies on a strictly increasing grid.
    /// `slack[i]` bounds the error in `phi[i]`, `inequality_slack[i]` the
    /// error in `E - r E' / alpha`.
    pub(crate) fn build(
        params: ExponentParams,
        radii: Vec<f64>,
        energy: Vec<f64>,
        slack: Vec<f64>,
        inequality_slack: Vec<f64>,
    ) -> Self {
        let alpha = params.alpha;
        let phi: Vec<f64> = radii.iter().zip(&energy).map(|(r, e)| e / r.powf(alpha)).collect();
        let d_energy = derivative(&radii, &energy);
        let inequality_ok = (0..radii.len())
            .map(|i| energy[i] - radii[i] * d_energy[i] / alpha <= inequality_slack[i])
            .collect();
        let monotone = (1..radii.len()).all(|i| phi[i] >= phi[i - 1] - (slack[i] + slack[i - 1]));
        Self { params, radii, energy, phi, d_energy, slack, inequality_slack, inequality_ok, monotone }
    }

    pub fn inequality_holds(&self) -> bool {
        self.inequality_ok.iter().all(|&b| b)
    }

    /// Largest `|phi - target|`.
    pub fn phi_deviation(&self, target: f64) -> f64 {
        self.phi.iter().map(|p| (p - target).abs()).fold(0.0, f64::max)
    }
}

/// Three-point derivative on a nonuniform grid: centered inside, one-sided
/// at the ends. Exact for quadratics.
pub(crate) fn derivative(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return vec![0.0; n];
    }
    if n == 2 {
        let d = (y[1] - y[0]) / (x[1] - x[0]);
        return vec![d, d];
    }
    let three = |i: usize, at: usize| -> f64 {
        // derivative at x[at] of the parabola through i, i+1, i+2
        let (x0, x1, x2) = (x[i], x[i + 1], x[i + 2]);
        let t = x[at];
        let l0 = (2.0 * t - x1 - x2) / ((x0 - x1) * (x0 - x2));
        let l1 = (2.0 * t - x0 - x2) / ((x1 - x0) * (x1 - x2));
        let l2 = (2.0 * t - x0 - x1) / ((x2 - x0) * (x2 - x1));
        l0 * y[i] + l1 * y[i + 1] + l2 * y[i + 2]
    };
    (0..n)
        .map(|k| match k {
            0 => three(0, 0),
            k if k == n - 1 => three(n - 3, n - 1),
            k => three(k - 1, k),
        })
        .collect()
}

/// `count` radii spaced evenly in `log r` on `[r_min, r_max]`.
pub fn log_radii(r_min: f64, r_max: f64, count: usize) -> Result<Vec<f64>> {
    if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) || count < 2 {
        return Err(Error::Range(format!("need 0 < r_min < r_max and two radii, got [{r_min}, {r_max}] x {count}")));
    }
    let (a, b) = (r_min.ln(), r_max.ln());
    let mut radii: Vec<f64> = (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect();
    radii[0] = r_min;
    radii[count - 1] = r_max;
    Ok(radii)
}

/// Log-spaced radii at a given density per decade, endpoints included.
pub fn log_radii_per_decade(r_min: f64, r_max: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(r_min > 0.0 && r_max > r_min) {
        return Err(Error::Range(format!("need 0 < r_min < r_max, got [{r_min}, {r_max}]")));
    }
    let count = ((r_max / r_min).log10() * per_decade as f64).ceil() as usize + 1;
    log_radii(r_min, r_max, count.max(2))
}

pub(crate) fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.len() < 3 {
        return Err(Error::Input("a profile needs at least three radii".into()));
    }
    if radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::Range("radii must be positive and finite".into()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input("radii must be strictly increasing".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_values() {
        assert_eq!(alpha_of(3, 0.75), 1.0);
        assert_eq!(alpha_of(2, 0.25), 1.0);
        assert_eq!(alpha_of(3, 2.0), 2.0);
        for n in 2..8 {
            assert_eq!(alpha_of(n, 0.0), 0.0);
        }
        assert!(alpha_of(1, 1.0).is_nan());
        assert!(alpha_of(3, -1.0).is_nan());
        assert!(ExponentParams::new(3, 0.0).is_err());
        assert!(ExponentParams::new(1, 1.0).is_err());
    }

    #[test]
    fn derivative_is_exact_on_quadratics() {
        let x = log_radii(0.1, 2.0, 9).unwrap();
        let y: Vec<f64> = x.iter().map(|t| 3.0 * t * t - t + 2.0).collect();
        for (t, d) in x.iter().zip(derivative(&x, &y)) {
            assert!((d - (6.0 * t - 1.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn radii_grid() {
        let r = log_radii(0.01, 1.0, 5).unwrap();
        assert_eq!(r[0], 0.01);
        assert_eq!(r[4], 1.0);
        assert!((r[2] - 0.1).abs() < 1e-15);
        assert_eq!(log_radii_per_decade(0.01, 1.0, 31).unwrap().len(), 63);
        assert!(log_radii(1.0, 0.5, 3).is_err());
    }

    #[test]
    fn profile_verdicts() {
        let p = ExponentParams::planar_cracktip();
        let r = vec![0.1, 0.2, 0.3, 0.4];
        let e: Vec<f64> = r.iter().map(|x| x * x).collect();
        let prof = EnergyProfile::build(p, r.clone(), e, vec![0.0; 4], vec![1e-14; 4]);
        assert!(prof.monotone && prof.inequality_holds());
        let e: Vec<f64> = r.iter().map(|x| x.sqrt()).collect();
        let prof = EnergyProfile::build(p, r, e, vec![0.0; 4], vec![0.0; 4]);
        assert!(!prof.monotone && !prof.inequality_holds());
    }
}
