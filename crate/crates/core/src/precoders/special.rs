//! Error function, its inverse, and the chance-constraint margins.

use std::f64::consts::PI;

use crate::error::{invalid, Result};

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Inverse error function on `(-1, 1)`, Newton-polished so that
/// `|erf(erf_inv(y)) − y| ≤ 1e-12`.
pub fn erf_inv(y: f64) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    if y <= -1.0 {
        return f64::NEG_INFINITY;
    }
    if y >= 1.0 {
        return f64::INFINITY;
    }
    let mut x = statrs::function::erf::erf_inv(y);
    let slope = 2.0 / PI.sqrt();
    for _ in 0..3 {
        let residual = erf(x) - y;
        if residual == 0.0 {
            break;
        }
        let deriv = slope * (-x * x).exp();
        if deriv == 0.0 {
            break;
        }
        x -= residual / deriv;
    }
    x
}

/// `ρ(ε) = erf⁻¹(1 − 2√(1 − ε))`; negative iff `ε < 3/4`.
pub fn rho(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(format!("violation probability must lie in (0, 1), got {epsilon}")));
    }
    Ok(erf_inv(1.0 - 2.0 * (1.0 - epsilon).sqrt()))
}

/// Single-half-plane counterpart of [`rho`]: `erf⁻¹(2ε − 1)`, negative
/// iff `ε < 1/2`. Used for BPSK, whose region has one row.
pub fn rho_single_row(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(format!("violation probability must lie in (0, 1), got {epsilon}")));
    }
    Ok(erf_inv(2.0 * epsilon - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent erf: Maclaurin series for |x| ≤ 3, Lentz continued
    /// fraction for erfc beyond.
    fn erf_oracle(x: f64) -> f64 {
        let ax = x.abs();
        let v = if ax == 0.0 {
            0.0
        } else if ax <= 3.0 {
            // erf(x) = 2/√π·e^{−x²}·Σ 2ⁿx^{2n+1}/(2n+1)!!, all terms positive.
            let mut term = ax;
            let mut sum = ax;
            let mut n = 0.0;
            loop {
                n += 1.0;
                term *= 2.0 * ax * ax / (2.0 * n + 1.0);
                sum += term;
                if term <= 1e-18 * sum {
                    break;
                }
            }
            2.0 / PI.sqrt() * (-ax * ax).exp() * sum
        } else {
            // erfc(x) = exp(−x²)/√π · 1/(x + 1/2/(x + 1/(x + 3/2/(x + ...))))
            let mut f = ax;
            let tiny = 1e-300;
            let mut c = f;
            let mut d = 0.0;
            for k in 1..200 {
                let a = k as f64 / 2.0;
                d = ax + a * d;
                d = if d.abs() < tiny { tiny } else { d };
                c = ax + a / c;
                c = if c.abs() < tiny { tiny } else { c };
                d = 1.0 / d;
                let delta = c * d;
                f *= delta;
                if (delta - 1.0).abs() < 1e-16 {
                    break;
                }
            }
            1.0 - (-ax * ax).exp() / PI.sqrt() / f
        };
        v.copysign(x)
    }

    /// Bisection on the oracle erf.
    fn erf_inv_oracle(y: f64) -> f64 {
        let (mut lo, mut hi) = (-7.0, 7.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if erf_oracle(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn erf_agrees_with_series_oracle() {
        for i in 0..=1200 {
            let x = -6.0 + i as f64 * 0.01;
            assert!((erf(x) - erf_oracle(x)).abs() < 1e-15, "x = {x}: {} vs {}", erf(x), erf_oracle(x));
        }
        assert!((erf(1.0) - 0.8427007929497149).abs() < 1e-15);
    }

    #[test]
    fn round_trip_on_grid() {
        let n = 10_000;
        let lo = -1.0 + 1e-9;
        let hi = 1.0 - 1e-9;
        let mut worst: f64 = 0.0;
        for i in 0..=n {
            let y = lo + (hi - lo) * i as f64 / n as f64;
            worst = worst.max((erf(erf_inv(y)) - y).abs());
        }
        assert!(worst <= 1e-12, "worst round-trip error {worst}");
    }

    #[test]
    fn rho_values() {
        assert_eq!(rho(0.75).unwrap(), 0.0);
        let r = rho(0.01).unwrap();
        let oracle = erf_inv_oracle(1.0 - 2.0 * 0.99f64.sqrt());
        assert!((r - oracle).abs() < 1e-12, "{r} vs {oracle}");
        assert!((r + 1.820772706542).abs() < 1e-11, "rho(0.01) = {r}");
        // ε chosen so that the argument equals erf(1) gives ρ = +1.
        let e1 = erf(1.0);
        let eps = 1.0 - ((1.0 - e1) / 2.0).powi(2);
        assert!((eps - 0.99381).abs() < 1e-5);
        assert!((rho(eps).unwrap() - 1.0).abs() < 1e-12);
        // The sign flips at 3/4.
        assert!(rho(0.7).unwrap() < 0.0 && rho(0.8).unwrap() > 0.0);
    }

    #[test]
    fn rho_rejects_out_of_range() {
        for eps in [0.0, 1.0, -0.5, 1.5, f64::NAN] {
            assert!(rho(eps).is_err());
            assert!(rho_single_row(eps).is_err());
        }
    }

    #[test]
    fn single_row_margin() {
        assert_eq!(rho_single_row(0.5).unwrap(), 0.0);
        // Φ⁻¹(0.01)/√2.
        let r = rho_single_row(0.01).unwrap();
        assert!((r - erf_inv_oracle(-0.98)).abs() < 1e-12, "{r} vs {}", erf_inv_oracle(-0.98));
        assert!((r * 2f64.sqrt() + 2.3263478740).abs() < 1e-8);
    }
}
