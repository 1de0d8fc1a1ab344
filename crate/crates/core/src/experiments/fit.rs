//! Threshold and delay-line scaling fits, plus the Wilson interval.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Threshold fit of the quadratic crossing ansatz
/// `pbar = alpha + beta (p - mu) d^{1/nu} + gamma (p - mu)^2 d^{2/nu}`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ThresholdFit {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub mu: f64,
    pub nu: f64,
    /// Sum of squared residuals at the optimum.
    pub residual: f64,
}

/// Which abscissa the scaling law uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingForm {
    /// `ln(1/pstar) = c' sqrt(n_e) eta^{-1/2} + c''` (constant emitter count).
    Sqrt,
    /// `ln(1/pstar) = c' m^{-1} eta^{-1} + c''` (emitters scaling with distance).
    Linear,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ScalingFit {
    pub form: ScalingForm,
    /// The factor multiplying the eta power: sqrt(n_e) or 1/m.
    pub factor: f64,
    pub c_prime: f64,
    pub c_dprime: f64,
    pub residual: f64,
}

/// Wilson score interval at confidence `z` (1.96 for 95%).
pub fn wilson_interval(failures: u64, shots: u64, z: f64) -> (f64, f64) {
    assert!(shots > 0, "wilson interval needs at least one shot");
    let n = shots as f64;
    let p = failures as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Solve the 3x3 normal equations for (alpha, beta, gamma) at fixed
/// (mu, nu); returns the coefficients and the SSE.
fn linear_subproblem(data: &[(f64, f64, f64)], mu: f64, nu: f64) -> ([f64; 3], f64) {
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for &(p, d, y) in data {
        let x1 = (p - mu) * d.powf(1.0 / nu);
        let x = [1.0, x1, x1 * x1];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += x[i] * x[j];
            }
            atb[i] += x[i] * y;
        }
    }
    // Gaussian elimination with partial pivoting.
    let mut m = [[0.0f64; 4]; 3];
    for i in 0..3 {
        m[i][..3].copy_from_slice(&ata[i]);
        m[i][3] = atb[i];
    }
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())
            .unwrap();
        m.swap(col, piv);
        if m[col][col].abs() < 1e-30 {
            return ([0.0, 0.0, 0.0], f64::INFINITY);
        }
        for row in 0..3 {
            if row != col {
                let f = m[row][col] / m[col][col];
                for k in col..4 {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
    }
    let coef = [m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]];
    let mut sse = 0.0;
    for &(p, d, y) in data {
        let x1 = (p - mu) * d.powf(1.0 / nu);
        let yhat = coef[0] + coef[1] * x1 + coef[2] * x1 * x1;
        sse += (y - yhat) * (y - yhat);
    }
    (coef, sse)
}

/// Fit the crossing ansatz to `(p, d, pbar)` triples: a coarse grid over
/// (mu, nu) with the linear subproblem for the remaining coefficients, then
/// two local grid refinements. Deterministic.
pub fn fit_threshold(data: &[(f64, f64, f64)]) -> Result<ThresholdFit> {
    let mut ds: Vec<u64> = data.iter().map(|&(_, d, _)| d.to_bits()).collect();
    ds.sort_unstable();
    ds.dedup();
    if ds.len() < 3 {
        return Err(Error::Fit(format!("need >= 3 distinct d, got {}", ds.len())));
    }
    let mut ps: Vec<f64> = data.iter().map(|&(p, _, _)| p).collect();
    ps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ps.dedup();
    if ps.len() < 4 {
        return Err(Error::Fit(format!("need >= 4 p values, got {}", ps.len())));
    }
    // The crossing must be bracketed: below it larger d wins, above it
    // larger d loses.
    let (d_min, d_max) = (f64::from_bits(ds[0]), f64::from_bits(*ds.last().unwrap()));
    let at = |p: f64, d: f64| -> Option<f64> {
        data.iter()
            .find(|&&(pp, dd, _)| pp == p && dd == d)
            .map(|&(_, _, y)| y)
    };
    let (p_lo, p_hi) = (ps[0], *ps.last().unwrap());
    if let (Some(lo_small), Some(lo_big), Some(hi_small), Some(hi_big)) =
        (at(p_lo, d_min), at(p_lo, d_max), at(p_hi, d_min), at(p_hi, d_max))
    {
        if !(lo_big < lo_small && hi_big > hi_small) {
            return Err(Error::Fit(
                "p range does not bracket a crossing (sub/above-threshold ordering absent)".into(),
            ));
        }
    }
    let mut best = (f64::INFINITY, 0.0, 1.0);
    let mut mu_lo = p_lo;
    let mut mu_hi = p_hi;
    let mut nu_lo = 0.5;
    let mut nu_hi = 2.0;
    for refinement in 0..3 {
        let steps = if refinement == 0 { 60 } else { 20 };
        for i in 0..=steps {
            let mu = mu_lo + (mu_hi - mu_lo) * i as f64 / steps as f64;
            for j in 0..=steps {
                let nu = nu_lo + (nu_hi - nu_lo) * j as f64 / steps as f64;
                let (_, sse) = linear_subproblem(data, mu, nu);
                if sse < best.0 {
                    best = (sse, mu, nu);
                }
            }
        }
        let dmu = (mu_hi - mu_lo) / steps as f64;
        let dnu = (nu_hi - nu_lo) / steps as f64;
        mu_lo = (best.1 - 2.0 * dmu).max(p_lo);
        mu_hi = (best.1 + 2.0 * dmu).min(p_hi);
        nu_lo = (best.2 - 2.0 * dnu).max(0.3);
        nu_hi = (best.2 + 2.0 * dnu).min(3.0);
    }
    let (coef, sse) = linear_subproblem(data, best.1, best.2);
    Ok(ThresholdFit {
        alpha: coef[0],
        beta: coef[1],
        gamma: coef[2],
        mu: best.1,
        nu: best.2,
        residual: sse,
    })
}

/// Fit `ln(1/pstar)` linearly against the chosen power of eta.
pub fn fit_scaling(points: &[(f64, f64)], form: ScalingForm, factor: f64) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::Fit(format!("need >= 3 points, got {}", points.len())));
    }
    let xy: Vec<(f64, f64)> = points
        .iter()
        .map(|&(eta, pstar)| {
            let x = match form {
                ScalingForm::Sqrt => factor / eta.sqrt(),
                ScalingForm::Linear => factor / eta,
            };
            (x, (1.0 / pstar).ln())
        })
        .collect();
    let n = xy.len() as f64;
    let sx: f64 = xy.iter().map(|p| p.0).sum();
    let sy: f64 = xy.iter().map(|p| p.1).sum();
    let sxx: f64 = xy.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = xy.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return Err(Error::Fit("degenerate abscissa".into()));
    }
    let c_prime = (n * sxy - sx * sy) / denom;
    let c_dprime = (sy - c_prime * sx) / n;
    let residual: f64 = xy
        .iter()
        .map(|&(x, y)| {
            let r = y - (c_prime * x + c_dprime);
            r * r
        })
        .sum();
    Ok(ScalingFit { form, factor, c_prime, c_dprime, residual })
}

/// Invert a scaling fit: the delay-line rate needed for a target optimal
/// logical error rate.
pub fn requisite_eta(fit: &ScalingFit, target_pstar: f64) -> Result<f64> {
    let lhs = (1.0 / target_pstar).ln();
    if lhs <= fit.c_dprime {
        return Err(Error::Fit(format!(
            "target ln(1/pstar) = {lhs:.3} at or below the intercept c'' = {:.3}; requisite rate diverges",
            fit.c_dprime
        )));
    }
    let scaled = (lhs - fit.c_dprime) / (fit.c_prime * fit.factor);
    Ok(match fit.form {
        ScalingForm::Sqrt => scaled.powi(-2),
        ScalingForm::Linear => scaled.recip(),
    })
}
