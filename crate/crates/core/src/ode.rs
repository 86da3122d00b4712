//! Adaptive Dormand–Prince 5(4) integration.
//!
//! The edge problems integrated here have smooth coefficients, so an
//! explicit embedded Runge–Kutta pair with PI-free step control is the
//! right tool. The driver is generic over the (fixed) state dimension;
//! the edge solver runs it on the 16-component companion system carrying
//! all four fundamental solutions at once.

use nalgebra::SVector;

/// Integration failed: the accepted step collapsed below the resolution
/// that still advances x.
#[derive(Debug, Clone, Copy)]
pub struct StepUnderflow {
    /// Position at which the step size underflowed.
    pub x: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct DormandPrince54 {
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for DormandPrince54 {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-10 }
    }
}

// Dormand-Prince coefficients (RK5(4)7M).
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the 5th-order weights and the embedded 4th-order ones.
const E1: f64 = B1 - 5179.0 / 57600.0;
const E3: f64 = B3 - 7571.0 / 16695.0;
const E4: f64 = B4 - 393.0 / 640.0;
const E5: f64 = B5 + 92097.0 / 339200.0;
const E6: f64 = B6 - 187.0 / 2100.0;
const E7: f64 = -1.0 / 40.0;

impl DormandPrince54 {
    /// Integrate y' = f(x, y) from `x0` to `x1` (x0 < x1).
    pub fn integrate<const N: usize, F>(
        &self,
        f: F,
        x0: f64,
        x1: f64,
        y0: SVector<f64, N>,
    ) -> Result<SVector<f64, N>, StepUnderflow>
    where
        F: Fn(f64, &SVector<f64, N>) -> SVector<f64, N>,
    {
        let mut out = y0;
        self.integrate_impl(&f, x0, x1, &mut out, &mut |_, _| {})?;
        Ok(out)
    }

    /// Integrate and report the state at each checkpoint in `xs`
    /// (strictly increasing, inside [x0, x1]).
    pub fn integrate_with_checkpoints<const N: usize, F, S>(
        &self,
        f: F,
        x0: f64,
        x1: f64,
        y0: SVector<f64, N>,
        xs: &[f64],
        mut on_sample: S,
    ) -> Result<SVector<f64, N>, StepUnderflow>
    where
        F: Fn(f64, &SVector<f64, N>) -> SVector<f64, N>,
        S: FnMut(f64, &SVector<f64, N>),
    {
        let mut y = y0;
        let mut x = x0;
        for &xc in xs {
            if xc < x {
                continue;
            }
            if xc > x {
                self.integrate_impl(&f, x, xc, &mut y, &mut |_, _| {})?;
                x = xc;
            }
            on_sample(x, &y);
        }
        if x < x1 {
            self.integrate_impl(&f, x, x1, &mut y, &mut |_, _| {})?;
        }
        Ok(y)
    }

    fn integrate_impl<const N: usize, F, S>(
        &self,
        f: &F,
        x0: f64,
        x1: f64,
        y: &mut SVector<f64, N>,
        on_step: &mut S,
    ) -> Result<(), StepUnderflow>
    where
        F: Fn(f64, &SVector<f64, N>) -> SVector<f64, N>,
        S: FnMut(f64, &SVector<f64, N>),
    {
        let span = x1 - x0;
        debug_assert!(span > 0.0);
        let h_min = span * 1e-14;
        let mut h = span * 1e-2;
        let mut x = x0;
        let mut k1 = f(x, y);

        let mut steps = 0usize;
        while x < x1 {
            steps += 1;
            if steps > 1_000_000 || h < h_min {
                return Err(StepUnderflow { x });
            }
            if x + h > x1 {
                h = x1 - x;
            }

            let k2 = f(x + A21 * h, &(*y + k1 * (A21 * h)));
            let k3 = f(x + 0.3 * h, &(*y + k1 * (A31 * h) + k2 * (A32 * h)));
            let k4 = f(x + 0.8 * h, &(*y + k1 * (A41 * h) + k2 * (A42 * h) + k3 * (A43 * h)));
            let k5 = f(
                x + (8.0 / 9.0) * h,
                &(*y + k1 * (A51 * h) + k2 * (A52 * h) + k3 * (A53 * h) + k4 * (A54 * h)),
            );
            let k6 = f(
                x + h,
                &(*y
                    + k1 * (A61 * h)
                    + k2 * (A62 * h)
                    + k3 * (A63 * h)
                    + k4 * (A64 * h)
                    + k5 * (A65 * h)),
            );
            let y5 = *y + k1 * (B1 * h) + k3 * (B3 * h) + k4 * (B4 * h) + k5 * (B5 * h) + k6 * (B6 * h);
            let k7 = f(x + h, &y5);

            let err_vec =
                k1 * (E1 * h) + k3 * (E3 * h) + k4 * (E4 * h) + k5 * (E5 * h) + k6 * (E6 * h) + k7 * (E7 * h);
            let mut err = 0.0f64;
            for i in 0..N {
                let scale = self.abs_tol + self.rel_tol * y[i].abs().max(y5[i].abs());
                let e = err_vec[i] / scale;
                err += e * e;
            }
            err = (err / N as f64).sqrt();

            if err <= 1.0 {
                x += h;
                *y = y5;
                k1 = k7; // FSAL
                on_step(x, y);
            }
            let factor = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
            h *= factor.clamp(0.2, 5.0);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SVector;

    #[test]
    fn exponential_growth() {
        let dp = DormandPrince54::default();
        let y = dp
            .integrate(|_, y: &SVector<f64, 1>| *y, 0.0, 1.0, SVector::<f64, 1>::new(1.0))
            .unwrap();
        assert!((y[0] - std::f64::consts::E).abs() < 1e-10);
    }

    #[test]
    fn harmonic_oscillator_period() {
        let dp = DormandPrince54::default();
        let f = |_: f64, y: &SVector<f64, 2>| SVector::<f64, 2>::new(y[1], -y[0]);
        let y = dp
            .integrate(f, 0.0, 2.0 * std::f64::consts::PI, SVector::<f64, 2>::new(1.0, 0.0))
            .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-9);
        assert!(y[1].abs() < 1e-9);
    }

    #[test]
    fn checkpoints_are_visited_in_order() {
        let dp = DormandPrince54::default();
        let mut seen = Vec::new();
        let f = |_: f64, y: &SVector<f64, 1>| *y;
        dp.integrate_with_checkpoints(
            f,
            0.0,
            1.0,
            SVector::<f64, 1>::new(1.0),
            &[0.25, 0.5, 0.75],
            |x, y| seen.push((x, y[0])),
        )
        .unwrap();
        assert_eq!(seen.len(), 3);
        for (x, v) in seen {
            assert!((v - x.exp()).abs() < 1e-9, "at {x}");
        }
    }
}
