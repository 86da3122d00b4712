//! Shared test oracles, independent of the library's solver paths:
//! a fixed-step classical RK4 integrator and the free-operator closed
//! forms in the μ = λ^{1/4} conventions.

use hexaspec_core::potential::PeriodicPotential;
use nalgebra::Matrix4;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Fixed-step classical RK4 on the 16-component companion system.
/// Deliberately not the library integrator: this is the independent
/// route for Liouville/cross-checks.
pub fn rk4_monodromy(q: &PeriodicPotential, lambda: f64, steps: usize) -> Matrix4<f64> {
    let mut y = [0.0f64; 16];
    for col in 0..4 {
        y[4 * col + col] = 1.0;
    }
    let h = 1.0 / steps as f64;
    let rhs = |x: f64, y: &[f64; 16]| -> [f64; 16] {
        let qv = q.eval(x.clamp(0.0, 1.0)).unwrap();
        let mut out = [0.0f64; 16];
        for col in 0..4 {
            let o = 4 * col;
            out[o] = y[o + 1];
            out[o + 1] = y[o + 2];
            out[o + 2] = y[o + 3];
            out[o + 3] = (lambda - qv) * y[o];
        }
        out
    };
    let add = |a: &[f64; 16], b: &[f64; 16], s: f64| -> [f64; 16] {
        let mut out = *a;
        for i in 0..16 {
            out[i] += s * b[i];
        }
        out
    };
    for i in 0..steps {
        let x = i as f64 * h;
        let k1 = rhs(x, &y);
        let k2 = rhs(x + 0.5 * h, &add(&y, &k1, 0.5 * h));
        let k3 = rhs(x + 0.5 * h, &add(&y, &k2, 0.5 * h));
        let k4 = rhs(x + h, &add(&y, &k3, h));
        for j in 0..16 {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    Matrix4::from_column_slice(&y)
}

/// Free-operator fundamental values at x = 1:
/// g₁ = C⁺/2, g₂ = S⁺/2μ, g₃ = C⁻/2μ², g₄ = S⁻/2μ³.
pub fn free_monodromy(lambda: f64) -> Matrix4<f64> {
    assert!(lambda > 0.0, "closed form used for positive lambda only");
    let mu = lambda.powf(0.25);
    let (ch, co, sh, si) = (mu.cosh(), mu.cos(), mu.sinh(), mu.sin());
    let (cp, cm, sp, sm) = (ch + co, ch - co, sh + si, sh - si);
    #[rustfmt::skip]
    let m = Matrix4::new(
        cp / 2.0,              sp / (2.0 * mu),    cm / (2.0 * mu * mu), sm / (2.0 * mu.powi(3)),
        mu * sm / 2.0,         cp / 2.0,           sp / (2.0 * mu),      cm / (2.0 * mu * mu),
        mu * mu * cm / 2.0,    mu * sm / 2.0,      cp / 2.0,             sp / (2.0 * mu),
        mu.powi(3) * sp / 2.0, mu * mu * cm / 2.0, mu * sm / 2.0,        cp / 2.0,
    );
    m
}

/// Free Dirichlet indicator sinh(μ)sin(μ)/μ².
pub fn free_dirichlet_indicator(lambda: f64) -> f64 {
    let mu = lambda.powf(0.25);
    mu.sinh() * mu.sin() / (mu * mu)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random symmetric potential with |a_k| <= limit, 1..=3 coefficients.
pub fn random_potential(rng: &mut ChaCha8Rng, limit: f64) -> PeriodicPotential {
    let n = rng.gen_range(1..=3);
    let coeffs: Vec<f64> = (0..n).map(|_| rng.gen_range(-limit..limit)).collect();
    PeriodicPotential::new(coeffs).unwrap()
}
