//! Channel draws, the real lift `T(·)`, and CSI error sampling.

use nalgebra::{DVector, Dyn, OMatrix, U2};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{invalid, Result};

/// A complex row vector, e.g. one user's channel `h_k ∈ ℂ^{1×N}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector(pub Vec<Complex64>);

impl ComplexVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Row-vector product `x·u`.
    pub fn dot(&self, u: &[Complex64]) -> Complex64 {
        self.0.iter().zip(u).map(|(x, u)| x * u).sum()
    }

    pub fn lift(&self) -> RealLift {
        t_expand(self)
    }
}

impl std::ops::Add for &ComplexVector {
    type Output = ComplexVector;
    fn add(self, rhs: Self) -> ComplexVector {
        ComplexVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl std::ops::Sub for &ComplexVector {
    type Output = ComplexVector;
    fn sub(self, rhs: Self) -> ComplexVector {
        ComplexVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

/// `T(x) = [[Re x, -Im x], [Im x, Re x]] ∈ ℝ^{2×2N}`.
pub type RealLift = OMatrix<f64, U2, Dyn>;

pub fn t_expand(x: &ComplexVector) -> RealLift {
    let n = x.len();
    let mut m = RealLift::zeros(2 * n);
    for (j, z) in x.0.iter().enumerate() {
        m[(0, j)] = z.re;
        m[(1, j)] = z.im;
        m[(0, n + j)] = -z.im;
        m[(1, n + j)] = z.re;
    }
    m
}

/// Real stacking `ũ = [Re u; Im u]` of a complex transmit vector.
pub fn stack_real(u: &[Complex64]) -> DVector<f64> {
    let n = u.len();
    DVector::from_fn(2 * n, |i, _| if i < n { u[i].re } else { u[i - n].im })
}

pub fn unstack_real(u: &DVector<f64>) -> Vec<Complex64> {
    let n = u.len() / 2;
    (0..n).map(|i| Complex64::new(u[i], u[n + i])).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum UncertaintyModel {
    None,
    /// Real-lift Frobenius ball `‖Δ‖_F ≤ delta`.
    Spherical {
        delta: f64,
    },
    /// Real and imaginary parts of each error entry ∼ N(0, xi²).
    Stochastic {
        xi: f64,
    },
}

impl UncertaintyModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            UncertaintyModel::None => Ok(()),
            UncertaintyModel::Spherical { delta } if delta >= 0.0 && delta.is_finite() => Ok(()),
            UncertaintyModel::Stochastic { xi } if xi >= 0.0 && xi.is_finite() => Ok(()),
            other => Err(invalid(format!("invalid uncertainty model {other:?}"))),
        }
    }

    pub fn sample_error<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> ComplexVector {
        match *self {
            UncertaintyModel::None => ComplexVector::zeros(n),
            UncertaintyModel::Spherical { delta } => sample_error_spherical(n, delta, rng),
            UncertaintyModel::Stochastic { xi } => sample_error_gaussian(n, xi, rng),
        }
    }
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// `K` i.i.d. `CN(0, I_N)` channel vectors.
pub fn sample_rayleigh<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<ComplexVector> {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    (0..k)
        .map(|_| ComplexVector((0..n).map(|_| Complex64::new(normal(rng) * scale, normal(rng) * scale)).collect()))
        .collect()
}

/// Uniform draw from the complex ball of radius `delta/√2`, i.e. the
/// real-lift ball `‖T(δ)‖_F ≤ delta`.
pub fn sample_error_spherical<R: Rng + ?Sized>(n: usize, delta: f64, rng: &mut R) -> ComplexVector {
    if delta == 0.0 || n == 0 {
        return ComplexVector::zeros(n);
    }
    let dim = 2 * n;
    let direction: Vec<f64> = (0..dim).map(|_| normal(rng)).collect();
    let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    let u: f64 = rng.random();
    let radius = delta * std::f64::consts::FRAC_1_SQRT_2 * u.powf(1.0 / dim as f64);
    let scale = radius / norm;
    ComplexVector((0..n).map(|i| Complex64::new(direction[i] * scale, direction[n + i] * scale)).collect())
}

/// Error entries with independent `N(0, xi²)` real and imaginary parts.
pub fn sample_error_gaussian<R: Rng + ?Sized>(n: usize, xi: f64, rng: &mut R) -> ComplexVector {
    if xi == 0.0 {
        return ComplexVector::zeros(n);
    }
    ComplexVector((0..n).map(|_| Complex64::new(normal(rng) * xi, normal(rng) * xi)).collect())
}

/// True channels, the transmitter's estimates and the errors between them.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub true_channels: Vec<ComplexVector>,
    pub estimates: Vec<ComplexVector>,
    pub errors: Vec<ComplexVector>,
    pub true_lifts: Vec<RealLift>,
    pub estimate_lifts: Vec<RealLift>,
    pub error_lifts: Vec<RealLift>,
}

impl ChannelRealization {
    /// Builds a realization from true channels and errors, `ĥ = h - δ`.
    pub fn from_parts(true_channels: Vec<ComplexVector>, errors: Vec<ComplexVector>) -> Self {
        let estimates: Vec<_> = true_channels.iter().zip(&errors).map(|(h, e)| h - e).collect();
        let lift_all = |v: &[ComplexVector]| v.iter().map(t_expand).collect::<Vec<_>>();
        Self {
            true_lifts: lift_all(&true_channels),
            estimate_lifts: lift_all(&estimates),
            error_lifts: lift_all(&errors),
            true_channels,
            estimates,
            errors,
        }
    }

    pub fn users(&self) -> usize {
        self.true_channels.len()
    }
}

/// Draws `h_k ∼ CN(0, I)`, then an error per `model`, and sets `ĥ_k = h_k - δ_k`.
pub fn realize<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    model: &UncertaintyModel,
    rng: &mut R,
) -> Result<ChannelRealization> {
    model.validate()?;
    if n == 0 || k == 0 {
        return Err(invalid("need at least one antenna and one user"));
    }
    let truth = sample_rayleigh(n, k, rng);
    let errors = (0..k).map(|_| model.sample_error(n, rng)).collect();
    Ok(ChannelRealization::from_parts(truth, errors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn lift_examples() {
        let m = t_expand(&ComplexVector(vec![c(1.0, 2.0)]));
        assert_eq!(m.as_slice(), &[1.0, 2.0, -2.0, 1.0]);
        assert!((m.norm() - 10f64.sqrt()).abs() < 1e-14);

        let m = t_expand(&ComplexVector(vec![c(0.0, 1.0), c(1.0, 0.0)]));
        let expect = [[0.0, 1.0, -1.0, 0.0], [1.0, 0.0, 0.0, 1.0]];
        for (r, row) in expect.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert_eq!(m[(r, j)], *v);
            }
        }
    }

    #[test]
    fn rayleigh_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let draws = 250_000;
        let (n, k) = (4, 2);
        let mut power = 0.0;
        let mut cross = Complex64::new(0.0, 0.0);
        for _ in 0..draws {
            let h = sample_rayleigh(n, k, &mut rng);
            power += h[0].0.iter().chain(&h[1].0).map(|z| z.norm_sqr()).sum::<f64>();
            cross += h[0].0.iter().zip(&h[1].0).map(|(a, b)| a.conj() * b).sum::<Complex64>();
        }
        let var = power / (draws * n * k) as f64;
        assert!((var - 1.0).abs() < 0.01, "variance {var}");
        let corr = cross.norm() / (draws * n) as f64;
        assert!(corr < 0.01, "cross correlation {corr}");
    }

    #[test]
    fn rayleigh_is_deterministic_per_seed() {
        let a = sample_rayleigh(4, 4, &mut ChaCha8Rng::seed_from_u64(9));
        let b = sample_rayleigh(4, 4, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn spherical_errors_stay_in_ball() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert_eq!(sample_error_spherical(4, 0.0, &mut rng), ComplexVector::zeros(4));
        let delta = 0.37;
        let n = 4;
        let draws = 1_000_000;
        let mut moment = 0.0;
        for _ in 0..draws {
            let e = sample_error_spherical(n, delta, &mut rng);
            let f = t_expand(&e).norm();
            assert!(f <= delta + 1e-12);
            moment += f * f / (delta * delta);
        }
        // E‖x‖²/R² for the uniform ball in ℝ^{2N} is 2N/(2N+2).
        let mean = moment / draws as f64;
        assert!((mean - 0.8).abs() < 0.005, "moment {mean}");
    }

    #[test]
    fn gaussian_error_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(sample_error_gaussian(3, 0.0, &mut rng), ComplexVector::zeros(3));
        let xi = 0.1;
        let draws = 1_000_000;
        let (mut var, mut reim) = (0.0, 0.0);
        for _ in 0..draws {
            let e = sample_error_gaussian(1, xi, &mut rng).0[0];
            var += e.norm_sqr();
            reim += e.re * e.im;
        }
        let var = var / draws as f64;
        assert!((var - 0.02).abs() < 0.02 * 0.01, "variance {var}");
        // Standard error of the Re·Im mean is xi²/√draws = 1e-5.
        assert!((reim / draws as f64).abs() < 5e-5);
    }

    #[test]
    fn realize_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let r = realize(4, 3, &UncertaintyModel::None, &mut rng).unwrap();
        assert_eq!(r.true_channels, r.estimates);
        assert!(r.errors.iter().all(|e| e.norm() == 0.0));

        for _ in 0..1000 {
            let r = realize(4, 4, &UncertaintyModel::Spherical { delta: 0.2 }, &mut rng).unwrap();
            for k in 0..4 {
                let diff = &r.true_channels[k] - &r.estimates[k];
                assert!(t_expand(&diff).norm() <= 0.2 + 1e-12);
                let lifted = &r.estimate_lifts[k] + &r.error_lifts[k];
                assert!((lifted - &r.true_lifts[k]).abs().max() <= 1e-14);
            }
        }

        assert!(realize(4, 4, &UncertaintyModel::Stochastic { xi: -1.0 }, &mut rng).is_err());
        assert!(realize(0, 4, &UncertaintyModel::None, &mut rng).is_err());
    }

    fn cvec(n: usize) -> impl Strategy<Value = ComplexVector> {
        proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), n)
            .prop_map(|v| ComplexVector(v.into_iter().map(|(a, b)| c(a, b)).collect()))
    }

    proptest! {
        #[test]
        fn lift_is_linear(x in cvec(4), y in cvec(4)) {
            let lhs = t_expand(&(&x + &y));
            let rhs = t_expand(&x) + t_expand(&y);
            prop_assert!((lhs - rhs).abs().max() < 1e-12);
        }

        #[test]
        fn lift_matches_complex_product(x in cvec(3), u in cvec(3)) {
            let prod = x.dot(&u.0);
            let lifted = t_expand(&x) * stack_real(&u.0);
            prop_assert!((lifted[0] - prod.re).abs() < 1e-12);
            prop_assert!((lifted[1] - prod.im).abs() < 1e-12);
        }

        #[test]
        fn lift_frobenius_identity(x in cvec(5)) {
            prop_assert!((t_expand(&x).norm() - 2f64.sqrt() * x.norm()).abs() < 1e-12);
        }

        #[test]
        fn stacking_roundtrips(u in cvec(4)) {
            prop_assert_eq!(unstack_real(&stack_real(&u.0)), u.0);
        }
    }
}
