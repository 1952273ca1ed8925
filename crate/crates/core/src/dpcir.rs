//! Distance-preserving constructive interference regions for M-PSK.
//!
//! The region of symbol `m` is `{x ∈ ℝ² : A·x ⪰ σ√γ(b + c)}`. Row `r` of `A`
//! is the unit inward normal of one Voronoi boundary ray (at angle
//! `θ ± π/M`), `b = A·s` and `c = 0`, so the region is the decision sector
//! pushed outward until its vertex sits on the scaled constellation point.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};

use crate::constellation::{Constellation, SymbolIndex};
use crate::error::{invalid, Result, SlpError};

/// Hyperplane description `(A, b, c)` of one symbol's region.
#[derive(Debug, Clone, PartialEq)]
pub struct CirDescriptor {
    pub a: Matrix2<f64>,
    pub b: Vector2<f64>,
    pub c: Vector2<f64>,
    pub symbol: SymbolIndex,
    distinct_rows: usize,
}

/// One half-plane `aᵀx ≥ offset` of a region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CirRow {
    pub normal: Vector2<f64>,
    pub b: f64,
    pub c: f64,
}

impl CirDescriptor {
    /// Number of distinct half-planes: 2, or 1 for BPSK where both rows coincide.
    pub fn distinct_rows(&self) -> usize {
        self.distinct_rows
    }

    pub fn rows(&self) -> impl Iterator<Item = CirRow> + '_ {
        (0..self.distinct_rows).map(move |r| CirRow {
            normal: Vector2::new(self.a[(r, 0)], self.a[(r, 1)]),
            b: self.b[r],
            c: self.c[r],
        })
    }

    pub fn gram(&self) -> Matrix2<f64> {
        self.a * self.a.transpose()
    }

    /// Whether `x` lies in the region scaled by `scale = σ√γ`.
    pub fn contains(&self, x: &Vector2<f64>, scale: f64, tol: f64) -> bool {
        let lhs = self.a * x;
        let rhs = (self.b + self.c) * scale;
        (0..self.distinct_rows).all(|r| lhs[r] >= rhs[r] - tol)
    }
}

/// Region descriptor for symbol `m` of an M-PSK constellation.
pub fn dpcir_for(constellation: &Constellation, m: SymbolIndex) -> CirDescriptor {
    let half = constellation.half_angle();
    let theta = 2.0 * PI * m.value() as f64 / constellation.order() as f64;
    let upper = theta + half - PI / 2.0;
    let lower = theta - half + PI / 2.0;
    let a = Matrix2::new(upper.cos(), upper.sin(), lower.cos(), lower.sin());
    let s = Vector2::new(theta.cos(), theta.sin());
    let b = a * s;
    CirDescriptor {
        a,
        b,
        c: Vector2::zeros(),
        symbol: m,
        distinct_rows: if constellation.order() == 2 { 1 } else { 2 },
    }
}

/// Scaled threshold `Ψ = σ√γ(b + c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Psi {
    pub value: Vector2<f64>,
    pub sigma: f64,
    pub gamma: f64,
}

pub fn psi(d: &CirDescriptor, sigma: f64, gamma: f64) -> Result<Psi> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(invalid(format!("noise standard deviation must be positive, got {sigma}")));
    }
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(invalid(format!("SINR threshold must be nonnegative, got {gamma}")));
    }
    Ok(Psi { value: (d.b + d.c) * (sigma * gamma.sqrt()), sigma, gamma })
}

/// Symmetric positive-definite `X` with `X·(A·Aᵀ)·X = I`.
///
/// Uses the 2×2 closed form `G^{1/2} = (G + √det(G)·I) / √(tr G + 2√det G)`.
pub fn inv_sqrt_gram(d: &CirDescriptor) -> Result<Matrix2<f64>> {
    let g = d.gram();
    let det = g.determinant();
    if d.distinct_rows < 2 || det <= 1e-12 * g.trace().powi(2) {
        return Err(SlpError::SingularGram { det });
    }
    let s = det.sqrt();
    let t = (g.trace() + 2.0 * s).sqrt();
    let sqrt = (g + Matrix2::identity() * s) / t;
    let det_sqrt = sqrt.determinant();
    Ok(Matrix2::new(sqrt[(1, 1)], -sqrt[(0, 1)], -sqrt[(1, 0)], sqrt[(0, 0)]) / det_sqrt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn desc(order: usize, m: usize) -> (Constellation, CirDescriptor) {
        let c = Constellation::mpsk(order).unwrap();
        let d = dpcir_for(&c, c.symbol(m).unwrap());
        (c, d)
    }

    fn boundary_ray(theta: f64) -> Vector2<f64> {
        Vector2::new(theta.cos(), theta.sin())
    }

    #[test]
    fn eight_psk_symbol_zero() {
        let (_, d) = desc(8, 0);
        let expect = [[0.38268, -0.92388], [0.38268, 0.92388]];
        for (r, row) in expect.iter().enumerate() {
            for (j, &e) in row.iter().enumerate() {
                assert!((d.a[(r, j)] - e).abs() < 1e-5, "A[{r},{j}] = {}", d.a[(r, j)]);
            }
            assert!((d.b[r] - 0.38268).abs() < 1e-5);
        }
        assert_eq!(d.c, Vector2::zeros());
        // Geometry oracle: normals are orthogonal to the boundary rays at ±π/8.
        let a1 = Vector2::new(d.a[(0, 0)], d.a[(0, 1)]);
        let a2 = Vector2::new(d.a[(1, 0)], d.a[(1, 1)]);
        assert!(a1.dot(&boundary_ray(PI / 8.0)).abs() < 1e-12);
        assert!(a2.dot(&boundary_ray(-PI / 8.0)).abs() < 1e-12);
        assert!((d.b[0] - (PI / 8.0).sin()).abs() < 1e-12);
    }

    #[test]
    fn bpsk_collapses_to_one_row() {
        let (_, d) = desc(2, 0);
        assert_eq!(d.distinct_rows(), 1);
        for r in 0..2 {
            assert!((d.a[(r, 0)] - 1.0).abs() < 1e-12);
            assert!(d.a[(r, 1)].abs() < 1e-12);
            assert!((d.b[r] - 1.0).abs() < 1e-12);
        }
        assert_eq!(d.rows().count(), 1);
        assert!(matches!(inv_sqrt_gram(&d), Err(SlpError::SingularGram { .. })));
    }

    #[test]
    fn qpsk_symbol_zero() {
        let (_, d) = desc(4, 0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((d.a - Matrix2::new(h, -h, h, h)).norm() < 1e-12);
        assert!((d.b - Vector2::new(h, h)).norm() < 1e-12);
        assert!((d.gram() - Matrix2::identity()).norm() < 1e-12);
        assert!((inv_sqrt_gram(&d).unwrap() - Matrix2::identity()).norm() < 1e-12);
    }

    #[test]
    fn descriptor_invariants_hold_for_all_symbols() {
        for order in [2usize, 3, 4, 8, 16] {
            let c = Constellation::mpsk(order).unwrap();
            for m in 0..order {
                let d = dpcir_for(&c, c.symbol(m).unwrap());
                for r in 0..2 {
                    let norm = (d.a[(r, 0)].powi(2) + d.a[(r, 1)].powi(2)).sqrt();
                    assert!((norm - 1.0).abs() < 1e-12);
                }
                assert!(d.c.iter().all(|&v| v >= 0.0));
                let s = Vector2::new(c.points()[m].re, c.points()[m].im);
                let lhs = d.a * s;
                assert!((lhs - d.b).norm() < 1e-12);
                assert!(d.b.iter().all(|&v| (v - c.half_angle().sin()).abs() < 1e-12));
            }
        }
    }

    #[test]
    fn psi_examples() {
        let (_, mut d) = desc(8, 0);
        let p = psi(&d, 1.0, 10.0).unwrap();
        let expect = 10f64.sqrt() * (PI / 8.0).sin();
        assert!((p.value[0] - expect).abs() < 1e-12);
        assert!((p.value[0] - 1.21015127).abs() < 1e-8);
        assert_eq!(psi(&d, 1.0, 0.0).unwrap().value, Vector2::zeros());
        d.b = Vector2::new(1.0, 1.0);
        assert_eq!(psi(&d, 1.0, 4.0).unwrap().value, Vector2::new(2.0, 2.0));
        assert!(psi(&d, 0.0, 4.0).is_err());
        assert!(psi(&d, -1.0, 4.0).is_err());
        assert!(psi(&d, 1.0, -1.0).is_err());
    }

    #[test]
    fn inv_sqrt_gram_identity_and_eight_psk() {
        let (_, mut d) = desc(8, 0);
        let g = d.gram();
        assert!((g[(0, 1)] + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let x = inv_sqrt_gram(&d).unwrap();
        assert!((x - x.transpose()).norm() < 1e-14);
        assert!((x * g * x - Matrix2::identity()).norm() < 1e-10);
        assert!(x.symmetric_eigenvalues().iter().all(|&e| e > 0.0));

        d.a = Matrix2::identity();
        assert!((inv_sqrt_gram(&d).unwrap() - Matrix2::identity()).norm() < 1e-14);
    }

    #[test]
    fn inv_sqrt_gram_defining_equation_all_orders() {
        for order in [3usize, 4, 5, 8, 16, 32] {
            let c = Constellation::mpsk(order).unwrap();
            for m in 0..order {
                let d = dpcir_for(&c, c.symbol(m).unwrap());
                let x = inv_sqrt_gram(&d).unwrap();
                assert!((x * d.gram() * x - Matrix2::identity()).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn rotational_covariance() {
        let c = Constellation::mpsk(8).unwrap();
        let d0 = dpcir_for(&c, c.symbol(0).unwrap());
        for m in 0..8 {
            let phi = 2.0 * PI * m as f64 / 8.0;
            let rot = Matrix2::new(phi.cos(), -phi.sin(), phi.sin(), phi.cos());
            let dm = dpcir_for(&c, c.symbol(m).unwrap());
            assert!((dm.a - d0.a * rot.transpose()).norm() < 1e-12);
            assert!((dm.b - d0.b).norm() < 1e-12);
        }
    }

    #[test]
    fn scaled_vertex_sits_on_both_hyperplanes() {
        let c = Constellation::mpsk(8).unwrap();
        let scale = 1.7;
        for m in 0..8 {
            let d = dpcir_for(&c, c.symbol(m).unwrap());
            let s = Vector2::new(c.points()[m].re, c.points()[m].im) * scale;
            assert!((d.a * s - d.b * scale).norm() < 1e-12);
        }
    }

    /// Draws a point of the scaled region: vertex plus a nonnegative
    /// combination of its two edge directions.
    fn sample_region(c: &Constellation, m: usize, scale: f64, rng: &mut impl Rng) -> Vector2<f64> {
        let theta = 2.0 * PI * m as f64 / c.order() as f64;
        let vertex = Vector2::new(theta.cos(), theta.sin()) * scale;
        let p: f64 = rng.random::<f64>().powi(2) * 20.0;
        let q: f64 = rng.random::<f64>().powi(2) * 20.0;
        vertex + boundary_ray(theta + c.half_angle()) * p + boundary_ray(theta - c.half_angle()) * q
    }

    #[test]
    fn membership_implies_detection() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for order in [2usize, 4, 8] {
            let c = Constellation::mpsk(order).unwrap();
            for m in 0..order {
                let d = dpcir_for(&c, c.symbol(m).unwrap());
                let scale = 0.3;
                let mut accepted = 0;
                while accepted < 10_000 {
                    // Uniform proposals in a box, kept only when inside the region.
                    let x = Vector2::new(rng.random_range(-25.0..25.0), rng.random_range(-25.0..25.0));
                    if !d.contains(&x, scale, 0.0) {
                        continue;
                    }
                    accepted += 1;
                    let r = num_complex::Complex64::new(x[0], x[1]);
                    assert_eq!(c.detect_ml(r).value(), m, "M={order} x={x:?}");
                }
            }
        }
    }

    #[test]
    fn sampled_regions_are_members() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = Constellation::mpsk(8).unwrap();
        for m in 0..8 {
            let d = dpcir_for(&c, c.symbol(m).unwrap());
            for _ in 0..1000 {
                let x = sample_region(&c, m, 2.0, &mut rng);
                assert!(d.contains(&x, 2.0, 1e-9));
            }
        }
    }

    #[test]
    fn distance_preservation_sampled() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for order in [4usize, 8] {
            let c = Constellation::mpsk(order).unwrap();
            let scale = 1.3;
            for _ in 0..100_000 {
                let i = rng.random_range(0..order);
                let j = (i + rng.random_range(1..order)) % order;
                let x = sample_region(&c, i, scale, &mut rng);
                let y = sample_region(&c, j, scale, &mut rng);
                let original = (c.points()[i] - c.points()[j]).norm() * scale;
                assert!((x - y).norm() >= original - 1e-9, "M={order} i={i} j={j}");
            }
        }
    }
}
