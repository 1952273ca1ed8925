use nalgebra::{DVector, Matrix2, Vector2};
use num_complex::Complex64;
use rand::Rng;

use super::special::erf;
use crate::channel::{t_expand, unstack_real, ComplexVector, RealLift, UncertaintyModel};
use crate::dpcir::{CirDescriptor, Psi};
use crate::error::{invalid, Result};

/// Absolute slack (scaled by `1 + ‖Ψ‖`) below which a CI row counts as violated.
pub const CI_TOL: f64 = 1e-7;

/// `inf { aᵀΔu : ‖Δ‖_F ≤ δ }` over all real `2×2N` matrices, `−δ‖u‖‖a‖`.
pub fn wc_infimum_unstructured(a: &Vector2<f64>, u: &[f64], delta: f64) -> f64 {
    -delta * crate::socp::norm(u) * a.norm()
}

/// The matrix attaining [`wc_infimum_unstructured`]: `−δ·a·uᵀ/(‖a‖‖u‖)`.
pub fn unstructured_minimizer(a: &Vector2<f64>, u: &[f64], delta: f64) -> RealLift {
    let scale = a.norm() * crate::socp::norm(u);
    let mut m = RealLift::zeros(u.len());
    if scale == 0.0 {
        return m;
    }
    for (j, &uj) in u.iter().enumerate() {
        m[(0, j)] = -delta * a[0] * uj / scale;
        m[(1, j)] = -delta * a[1] * uj / scale;
    }
    m
}

/// Infimum of `aᵀT(δ)u` over complex errors with `‖T(δ)‖_F ≤ δ`, i.e.
/// `‖δ‖₂ ≤ δ/√2`. Since `T(δ)u = [Re(δu); Im(δu)]` this is `−(δ/√2)‖u‖‖a‖`.
pub fn wc_infimum_structured(a: &Vector2<f64>, u: &[f64], delta: f64) -> f64 {
    -delta * std::f64::consts::FRAC_1_SQRT_2 * crate::socp::norm(u) * a.norm()
}

/// The complex error attaining [`wc_infimum_structured`]: the product `δu`
/// has modulus `(δ/√2)‖u‖` and points against `a`.
pub fn structured_minimizer(a: &Vector2<f64>, u: &[f64], delta: f64) -> ComplexVector {
    let uc = unstack_real(&DVector::from_column_slice(u));
    let unorm2: f64 = uc.iter().map(|z| z.norm_sqr()).sum();
    if unorm2 == 0.0 || a.norm() == 0.0 {
        return ComplexVector::zeros(uc.len());
    }
    let target = Complex64::new(a[0], a[1]) / a.norm() * (-delta * std::f64::consts::FRAC_1_SQRT_2 * unorm2.sqrt());
    ComplexVector(uc.iter().map(|z| target * z.conj() / unorm2).collect())
}

/// `Σ = ξ²‖u‖²·A·Aᵀ`, the covariance of `υ = A·T(δ)·u` for Gaussian errors.
pub fn upsilon_covariance(d: &CirDescriptor, u: &[f64], xi: f64) -> Matrix2<f64> {
    let unorm2 = crate::socp::dot(u, u);
    d.gram() * (xi * xi * unorm2)
}

/// Whether `A(Ĥ + Δ)u ⪰ Ψ` fails for a given error lift.
fn violates(d: &CirDescriptor, psi: &Psi, received: &Vector2<f64>) -> bool {
    let tol = CI_TOL * (1.0 + psi.value.norm());
    let lhs = d.a * received;
    (0..d.distinct_rows()).any(|r| lhs[r] < psi.value[r] - tol)
}

/// Monte-Carlo estimate of `Pr{A(Ĥ + Δ)u ⪰̸ Ψ}` under `model`'s error law.
pub fn ci_violation_mc<R: Rng + ?Sized>(
    d: &CirDescriptor,
    psi: &Psi,
    h_hat: &RealLift,
    u: &[f64],
    model: &UncertaintyModel,
    samples: usize,
    rng: &mut R,
) -> f64 {
    let n = h_hat.ncols() / 2;
    ci_violation_mc_with(d, psi, h_hat, u, samples, rng, |rng| model.sample_error(n, rng))
}

/// [`ci_violation_mc`] with a caller-supplied error sampler.
pub fn ci_violation_mc_with<R: Rng + ?Sized>(
    d: &CirDescriptor,
    psi: &Psi,
    h_hat: &RealLift,
    u: &[f64],
    samples: usize,
    rng: &mut R,
    mut draw: impl FnMut(&mut R) -> ComplexVector,
) -> f64 {
    let u_vec = DVector::from_column_slice(u);
    let nominal: Vector2<f64> = h_hat * &u_vec;
    let mut failures = 0usize;
    for _ in 0..samples.max(1) {
        let err = draw(rng);
        let received = nominal + t_expand(&err) * &u_vec;
        if violates(d, psi, &received) {
            failures += 1;
        }
    }
    failures as f64 / samples.max(1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChanceBound {
    /// `Π_r (1/2 − 1/2·erf(ω̄_r / (√2 ξ‖u‖)))`.
    pub product: f64,
    /// The same expression evaluated at `max{ω̄₁, ω̄₂}` for both factors.
    pub lower_bound: f64,
}

/// Decorrelated success probability and its max-based lower bound, for the
/// whitened slack `ω̄ = (AAᵀ)^{-1/2}(Ψ − AĤu)`.
pub fn chance_product_bound(wbar: &Vector2<f64>, u: &[f64], xi: f64) -> Result<ChanceBound> {
    let unorm = crate::socp::norm(u);
    if !(xi > 0.0) || unorm == 0.0 {
        return Err(invalid("chance bound needs xi > 0 and u ≠ 0"));
    }
    let denom = std::f64::consts::SQRT_2 * xi * unorm;
    let factor = |w: f64| 0.5 - 0.5 * erf(w / denom);
    let product = factor(wbar[0]) * factor(wbar[1]);
    let lower_bound = factor(wbar[0].max(wbar[1])).powi(2);
    Ok(ChanceBound { product, lower_bound })
}
