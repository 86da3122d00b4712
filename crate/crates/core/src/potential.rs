//! Even, zero-mean periodic potentials on the unit edge.
//!
//! Potentials are finite cosine series q(x) = Σ_k a_k cos(2πkx), k ≥ 1.
//! The basis makes the two structural requirements automatic: q(x) = q(1−x)
//! and ∫₀¹ q = 0. The empty series is the free operator q ≡ 0.

use crate::error::{Result, SpectralError};

/// A real, 1-periodic, even-symmetric, zero-mean potential on [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicPotential {
    coefficients: Vec<f64>,
}

impl PeriodicPotential {
    /// Build a potential from cosine coefficients a_1, a_2, ….
    ///
    /// An empty list gives the free operator.
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        for (index, &value) in coefficients.iter().enumerate() {
            if !value.is_finite() {
                return Err(SpectralError::NonFiniteCoefficient { index, value });
            }
        }
        Ok(Self { coefficients })
    }

    /// The free operator, q ≡ 0.
    pub fn free() -> Self {
        Self { coefficients: Vec::new() }
    }

    pub fn is_free(&self) -> bool {
        self.coefficients.iter().all(|&a| a == 0.0)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Evaluate q at x ∈ [0, 1].
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(SpectralError::OutOfDomain { x });
        }
        Ok(self.eval_unchecked(x))
    }

    /// Evaluate the cosine series without the domain check. Used by the
    /// integrator, which only ever asks for x in [0, 1].
    #[inline]
    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        let mut sum = 0.0;
        for (k, &a) in self.coefficients.iter().enumerate() {
            sum += a * (2.0 * std::f64::consts::PI * (k + 1) as f64 * x).cos();
        }
        sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_operator_is_zero() {
        let q = PeriodicPotential::new(vec![]).unwrap();
        assert_eq!(q.eval(0.5).unwrap(), 0.0);
        assert!(q.is_free());
    }

    #[test]
    fn single_cosine_values() {
        let q = PeriodicPotential::new(vec![1.0]).unwrap();
        assert!((q.eval(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((q.eval(0.5).unwrap() + 1.0).abs() < 1e-15);
        // cos(pi/2) = 0
        assert!(q.eval(0.25).unwrap().abs() < 1e-15);
    }

    #[test]
    fn evenness_forced_by_basis() {
        let q = PeriodicPotential::new(vec![2.0, -0.5]).unwrap();
        assert!((q.eval(0.3).unwrap() - q.eval(0.7).unwrap()).abs() < 1e-14);
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            let d = (q.eval(x).unwrap() - q.eval(1.0 - x).unwrap()).abs();
            assert!(d < 1e-14, "evenness violated at x = {x}: {d}");
        }
    }

    #[test]
    fn zero_mean_by_quadrature() {
        let q = PeriodicPotential::new(vec![1.5, -2.0, 0.7]).unwrap();
        let n = 10_000;
        let mut sum = 0.5 * (q.eval(0.0).unwrap() + q.eval(1.0).unwrap());
        for i in 1..n {
            sum += q.eval(i as f64 / n as f64).unwrap();
        }
        assert!((sum / n as f64).abs() < 1e-10);
    }

    #[test]
    fn rejects_non_finite_coefficient() {
        let err = PeriodicPotential::new(vec![1.0, f64::NAN]).unwrap_err();
        match err {
            SpectralError::NonFiniteCoefficient { index, .. } => assert_eq!(index, 1),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_out_of_domain() {
        let q = PeriodicPotential::free();
        assert!(q.eval(1.5).is_err());
        assert!(q.eval(-0.1).is_err());
    }
}
