use std::f64::consts::{FRAC_2_PI, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Equilibrium (arcsine) measure of an interval `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcsineReference {
    pub a: f64,
    pub b: f64,
}

pub fn arcsine_reference(a: f64, b: f64) -> Result<ArcsineReference> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidArgument(format!("degenerate interval [{a}, {b}]")));
    }
    Ok(ArcsineReference { a, b })
}

impl ArcsineReference {
    pub fn unit() -> Self {
        ArcsineReference { a: 0.0, b: 1.0 }
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// `1 / (pi sqrt((x - a)(b - x)))` inside the interval, zero outside.
    pub fn density(&self, x: f64) -> f64 {
        if x <= self.a || x >= self.b {
            return 0.0;
        }
        1.0 / (PI * ((x - self.a) * (self.b - x)).sqrt())
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let t = ((x - self.a) / self.length()).clamp(0.0, 1.0);
        FRAC_2_PI * t.sqrt().asin()
    }

    /// Inverse of `theta -> a + (b - a)(1 - cos theta)/2` on `[0, pi]`.
    pub fn theta(&self, x: f64) -> f64 {
        let t = ((x - self.a) / self.length()).clamp(0.0, 1.0);
        (1.0 - 2.0 * t).acos()
    }

    pub fn point_at(&self, theta: f64) -> f64 {
        self.a + self.length() * (1.0 - theta.cos()) / 2.0
    }

    /// Equilibrium energy `log 4 - log(b - a)`.
    pub fn energy(&self) -> f64 {
        4f64.ln() - self.length().ln()
    }

    /// Capacity `(b - a) / 4`.
    pub fn capacity(&self) -> f64 {
        self.length() / 4.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_constants() {
        let r = ArcsineReference::unit();
        assert!((r.energy() - 1.386_294_361_119_890_6).abs() < 1e-15);
        assert!((r.density(0.5) - std::f64::consts::FRAC_2_PI).abs() < 1e-15);
        let half = arcsine_reference(0.0, 0.5).unwrap();
        assert!((half.energy() - (4f64.ln() + 2f64.ln())).abs() < 1e-15);
        assert!(arcsine_reference(1.0, 1.0).is_err());
    }

    #[test]
    fn density_integrates_to_one() {
        // Substituting x = point_at(theta) turns the density into 1/pi.
        let r = arcsine_reference(0.2, 0.7).unwrap();
        let n = 20_000;
        let h = PI / n as f64;
        let mut total = 0.0;
        for k in 0..n {
            let th = (k as f64 + 0.5) * h;
            let dx = r.length() * th.sin() / 2.0;
            total += r.density(r.point_at(th)) * dx * h;
        }
        assert!((total - 1.0).abs() < 1e-8);
        assert!((r.cdf(r.b) - 1.0).abs() < 1e-15);
        assert!((r.cdf(0.45) - 0.5).abs() < 1e-12);
    }
}
