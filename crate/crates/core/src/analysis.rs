//! Closed-form complexity and convergence-error calculators.
//!
//! Pure functions of spectral parameters; the protocol consumes them through
//! explicit injection only, so the "no prior spectral knowledge" property of
//! a run stays auditable. Angles are written a_i = εE_i + π/4 throughout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spectral inputs of the calculators.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SpectralParams {
    pub e0: f64,
    pub e1: f64,
    pub e_th: f64,
    pub epsilon: f64,
    /// Initial fidelity to |E₀⟩, in (0, 1].
    pub f0: f64,
    /// Initial fidelity to |E₁⟩, in [0, 1).
    pub f1: f64,
}

impl SpectralParams {
    pub fn validate(&self) -> Result<()> {
        if self.e0 > self.e1 {
            return Err(Error::Domain(format!("E0 = {} exceeds E1 = {}", self.e0, self.e1)));
        }
        if self.epsilon <= 0.0 {
            return Err(Error::Domain("epsilon must be positive".into()));
        }
        let bound = std::f64::consts::FRAC_PI_4 + 1e-12;
        for e in [self.e0, self.e1] {
            if (self.epsilon * e).abs() > bound {
                return Err(Error::Domain(format!(
                    "epsilon*E = {} outside [-pi/4, pi/4]",
                    self.epsilon * e
                )));
            }
        }
        if !(self.f0 > 0.0 && self.f0 <= 1.0) {
            return Err(Error::Domain(format!("F0 = {} outside (0, 1]", self.f0)));
        }
        if !(0.0..1.0).contains(&self.f1) {
            return Err(Error::Domain(format!("F1 = {} outside [0, 1)", self.f1)));
        }
        if self.f0 + self.f1 > 1.0 + 1e-12 {
            return Err(Error::Domain("F0 + F1 exceeds 1".into()));
        }
        Ok(())
    }

    fn a0(&self) -> f64 {
        self.epsilon * self.e0 + std::f64::consts::FRAC_PI_4
    }

    fn a1(&self) -> f64 {
        self.epsilon * self.e1 + std::f64::consts::FRAC_PI_4
    }
}

/// Ideal M₀-only iteration count: ln F₀ / (2 ln(1/cos(εE₀+π/4))).
pub fn k_min(p: &SpectralParams) -> Result<f64> {
    p.validate()?;
    if p.f0 == 1.0 {
        return Ok(0.0);
    }
    let c = p.a0().cos();
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::Domain(format!(
            "cos(epsilon*E0 + pi/4) = {c} outside (0, 1)"
        )));
    }
    Ok(p.f0.ln() / (2.0 * (1.0 / c).ln()))
}

/// Compensation count k′: the number of M₀ outcomes required before an M₁
/// retains ground-state dominance.
///
/// At E₁ = E₀ the printed degenerate-gap limit 1/(εE₀+π/4)² is returned. A
/// saturated lower edge (cos(εE₀−π/4) = 0) yields +∞: no finite compensation
/// exists because an M₁ erases the ground amplitude entirely.
pub fn k_prime(p: &SpectralParams) -> Result<f64> {
    p.validate()?;
    let a0 = p.a0();
    let a1 = p.a1();
    if p.e1 <= p.e0 {
        if a0 == 0.0 {
            return Err(Error::Domain("epsilon*E0 + pi/4 vanishes in the k' limit".into()));
        }
        return Ok(1.0 / (a0 * a0));
    }
    // cos(x - pi/4) with x = epsilon*E_i, as printed
    let num_hi = (p.epsilon * p.e1 - std::f64::consts::FRAC_PI_4).cos();
    let num_lo = (p.epsilon * p.e0 - std::f64::consts::FRAC_PI_4).cos();
    let den_hi = a0.cos();
    let den_lo = a1.cos();
    if num_hi < 0.0 || num_lo < 0.0 || den_hi <= 0.0 || den_lo <= 0.0 {
        return Err(Error::Domain("cosine outside its valid branch in k'".into()));
    }
    if num_lo == 0.0 {
        return Ok(f64::INFINITY);
    }
    let num = num_hi.ln() - num_lo.ln();
    let den = den_hi.ln() - den_lo.ln();
    if den <= 0.0 {
        return Err(Error::Domain("degenerate denominator in k'".into()));
    }
    Ok(num / den)
}

/// Average failure length: Σ_{k_a=1}^{⌊k′⌋} k_a · [four cosine-power terms].
pub fn t_fail(p: &SpectralParams, k_prime_val: f64) -> Result<f64> {
    p.validate()?;
    if k_prime_val.is_nan() || k_prime_val < 1.0 {
        return Err(Error::Domain(format!("t_fail needs k' >= 1, got {k_prime_val}")));
    }
    let kmax = if k_prime_val.is_finite() {
        k_prime_val.floor() as u64
    } else {
        return Err(Error::Domain("t_fail needs a finite k'".into()));
    };
    let (c0, c1) = (p.a0().cos(), p.a1().cos());
    let (c0sq, c1sq) = (c0 * c0, c1 * c1);
    let mut total = 0.0;
    let mut pow0 = 1.0; // cos^{2(k_a-1)}(a0)
    let mut pow1 = 1.0;
    for ka in 1..=kmax {
        let term = p.f0 * pow0 + p.f1 * pow1 - p.f0 * pow0 * c0sq - p.f1 * pow1 * c1sq;
        total += ka as f64 * term;
        pow0 *= c0sq;
        pow1 *= c1sq;
    }
    Ok(total)
}

/// Total measurement count for one successful cycle, with q = cos(εE₀+π/4)
/// and M = ⌊1/(εE₀+π/4)²⌋.
pub fn t_total(p: &SpectralParams) -> Result<f64> {
    p.validate()?;
    let a0 = p.a0();
    let q = a0.cos();
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!("q = cos(epsilon*E0 + pi/4) = {q} outside (0, 1)")));
    }
    let m = (1.0 / (a0 * a0)).floor();
    let prefactor = (p.f0 + p.f1) * (1.0 + q) / (1.0 - q)
        * (m * q.powf(m) - (m + 1.0) * q.powf(m - 1.0) + 1.0 / q);
    // the convergence-count term is the magnitude of k_min: measurements are
    // counted positive
    let k_term = -p.f0.ln() / (2.0 * (1.0 / q).ln());
    Ok(prefactor + k_term)
}

/// Convergence error after k iterations:
/// (F₁/F₀)·exp(2kε²(E₀−E₁)(E₀+E₁−2E_th)), raw and clamped to [0, 1].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConvergenceError {
    pub raw: f64,
    pub clamped: f64,
}

pub fn convergence_error(p: &SpectralParams, k: u64) -> Result<ConvergenceError> {
    p.validate()?;
    if p.f0 <= 0.0 {
        return Err(Error::Domain("F0 must be positive".into()));
    }
    let exponent =
        2.0 * k as f64 * p.epsilon * p.epsilon * (p.e0 - p.e1) * (p.e0 + p.e1 - 2.0 * p.e_th);
    let raw = p.f1 / p.f0 * exponent.exp();
    Ok(ConvergenceError {
        raw,
        clamped: raw.clamp(0.0, 1.0),
    })
}
