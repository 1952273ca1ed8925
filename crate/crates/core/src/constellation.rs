//! M-PSK constellations and single-user ML detection.
//!
//! Points sit on the unit circle, `point_m = exp(i·2πm/M)`, so the average
//! symbol power is one. Detection is nearest-point, which for equal-radius
//! PSK reduces to quantizing the phase of the received sample.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Result};

/// Index of a constellation point, always in `[0, M)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct SymbolIndex(usize);

impl SymbolIndex {
    pub fn new(value: usize, order: usize) -> Result<Self> {
        if value >= order {
            return Err(invalid(format!("symbol index {value} out of range for M = {order}")));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: usize,
    points: Vec<Complex64>,
}

impl Constellation {
    /// Unit-radius M-PSK with point 0 on the positive real axis.
    pub fn mpsk(order: usize) -> Result<Self> {
        if order < 2 {
            return Err(invalid(format!("PSK order must be at least 2, got {order}")));
        }
        let points = (0..order).map(|m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 / order as f64)).collect();
        Ok(Self { order, points })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, m: SymbolIndex) -> Complex64 {
        self.points[m.0]
    }

    /// Half of the angular sector width, `π/M`.
    pub fn half_angle(&self) -> f64 {
        PI / self.order as f64
    }

    pub fn symbol(&self, value: usize) -> Result<SymbolIndex> {
        SymbolIndex::new(value, self.order)
    }

    pub fn average_power(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.order as f64
    }

    /// Single-user ML decision: argmin over m of `|r - point_m|`.
    ///
    /// Exact ties resolve to the lowest index; `r = 0` therefore maps to 0.
    pub fn detect_ml(&self, r: Complex64) -> SymbolIndex {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (m, p) in self.points.iter().enumerate() {
            let dist = (r - p).norm_sqr();
            if dist < best_dist {
                best = m;
                best_dist = dist;
            }
        }
        SymbolIndex(best)
    }
}
