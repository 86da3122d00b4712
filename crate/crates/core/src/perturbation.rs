//! Angle-perturbed lattices: exact Floquet assembly, determinant
//! expansion, perturbed Lyapunov pair, and Dirac-point persistence.
//!
//! The joint angles are δ_c = δ₀ + cε with edge parameters
//! (1, c₁, c₂), c₂ = −(1+c₁). The 4×4 assembly 𝕄_ε(λ, Θ) is kept exact
//! in ε; its determinant expands as d₀ + εd₁ + O(ε²), which gives an
//! internal oracle for every first-order claim.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

use crate::edge_solver::{
    integrate_fundamental, phi_basis, phi_basis_unchecked, FundamentalBasis, PhiBasis,
    DEFAULT_ROOT_TOL,
};
use crate::error::{Result, SpectralError};
use crate::graphene::{s0_norm, theta_star, Quasimomentum, DELTA0};
use crate::lyapunov::{g0_from_basis, lyapunov_from_g0};
use crate::potential::PeriodicPotential;
use crate::rootscan::{scan_roots, RootKind, ScanOptions};

/// One integration pass shared by all perturbation quantities at a λ.
fn basis_and_phi(q: &PeriodicPotential, lambda: f64, tol: f64) -> Result<(FundamentalBasis, PhiBasis)> {
    let basis = integrate_fundamental(q, lambda, tol)?;
    let phi = phi_basis_unchecked(&basis)?;
    Ok((basis, phi))
}

/// Largest admissible |ε|: keeps every perturbed angle inside the
/// geometric neighborhood of δ₀ = 2π/3 and away from degenerate angles.
pub const EPSILON_MAX: f64 = std::f64::consts::PI / 6.0;

/// Angle-perturbation parameters (ε, c₁); c₂ = −(1 + c₁) so that the
/// three angles keep summing to 2π.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationConfig {
    epsilon: f64,
    c1: f64,
}

impl PerturbationConfig {
    pub fn new(epsilon: f64, c1: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon.abs() >= EPSILON_MAX {
            return Err(SpectralError::EpsilonOutOfRange { epsilon });
        }
        if !(-1.0..=1.0).contains(&c1) {
            return Err(SpectralError::InvalidParameter {
                name: "c1",
                reason: format!("must lie in [-1, 1], got {c1}"),
            });
        }
        Ok(Self { epsilon, c1 })
    }

    pub fn unperturbed() -> Self {
        Self { epsilon: 0.0, c1: 0.0 }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        -(1.0 + self.c1)
    }

    /// Edge multipliers (1, c₁, c₂) of ε in the three joint angles.
    pub fn edge_factors(&self) -> [f64; 3] {
        [1.0, self.c1, self.c2()]
    }

    /// With a different ε, same c₁.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(epsilon, self.c1)
    }
}

/// S_k^ε(Θ) = sin^{−k}(δ₀)·Σ_edges sin^k(δ₀ + cε)·e^{−iθ_edge}.
pub fn s_k_eps(k: u32, theta: Quasimomentum, config: &PerturbationConfig) -> Complex64 {
    let phases = [0.0, theta.theta1, theta.theta2];
    let sin_d0 = DELTA0.sin();
    let mut total = Complex64::new(0.0, 0.0);
    for (c, phase) in config.edge_factors().into_iter().zip(phases) {
        let w = ((DELTA0 + c * config.epsilon).sin() / sin_d0).powi(k as i32);
        total += Complex64::from_polar(w, -phase);
    }
    total
}

/// s₁(Θ) = cot(δ₀)(1 + c₁e^{−iθ₁} + c₂e^{−iθ₂}): the first-order
/// ε-coefficient of S_k^ε per unit k.
pub fn s1(theta: Quasimomentum, config: &PerturbationConfig) -> Complex64 {
    let cot = DELTA0.cos() / DELTA0.sin();
    cot * (Complex64::new(1.0, 0.0)
        + config.c1() * Complex64::from_polar(1.0, -theta.theta1)
        + config.c2() * Complex64::from_polar(1.0, -theta.theta2))
}

/// Re(s₀(Θ)·conj(s₁(Θ))) = −cot(δ₀)(cos(θ₂−θ₁) + c₁cos θ₂ + c₂cos θ₁).
/// Vanishes at (0,0) and ±Θ*; bounded by 2(1+|c₁|).
pub fn re_s0_s1(theta: Quasimomentum, config: &PerturbationConfig) -> f64 {
    let cot = DELTA0.cos() / DELTA0.sin();
    -cot
        * ((theta.theta2 - theta.theta1).cos()
            + config.c1() * theta.theta2.cos()
            + config.c2() * theta.theta1.cos())
}

/// The 2×2 matrix 𝔾₁(λ) = Φ₀(1)⁻¹Φ₁(1).
#[derive(Debug, Clone, Copy)]
pub struct G1Matrix {
    pub lambda: f64,
    pub entries: Matrix2<f64>,
}

fn invert_phi0_at_one(phi: &PhiBasis) -> Result<Matrix2<f64>> {
    phi.phi0(true)
        .try_inverse()
        .ok_or(SpectralError::SingularBasis { lambda: phi.lambda })
}

/// 𝔾₁ from the φ-basis boundary data (λ ∉ Σ^D).
pub fn g1_matrix(q: &PeriodicPotential, lambda: f64, tol: f64) -> Result<G1Matrix> {
    let phi = phi_basis(q, lambda, tol)?;
    g1_from_phi(&phi)
}

pub fn g1_from_phi(phi: &PhiBasis) -> Result<G1Matrix> {
    let inv = invert_phi0_at_one(phi)?;
    Ok(G1Matrix { lambda: phi.lambda, entries: inv * phi.phi1(true) })
}

/// λ-dependent weight of the first-order determinant term at squared
/// sheet parameter c² (z² in the characteristic-polynomial picture):
///
/// −½{(c²−(𝔾₀²)₂₂)(𝔾₁)₁₁ + (c²−(𝔾₀²)₁₁)(𝔾₁)₂₂ + (𝔾₀²)₂₁(𝔾₁)₁₂ + (𝔾₀²)₁₂(𝔾₁)₂₁}
///
/// so that d₁ = −(4/9)·Re(s₀s̄₁)·weight(λ, |s₀|²/9).
pub fn det_slope_weight(q: &PeriodicPotential, lambda: f64, c_squared: f64, tol: f64) -> Result<f64> {
    let (basis, phi) = basis_and_phi(q, lambda, tol)?;
    let g1 = g1_from_phi(&phi)?.entries;
    let g0 = g0_from_basis(&basis);
    Ok(slope_weight_from(&g0, &g1, c_squared))
}

fn slope_weight_from(g0: &Matrix2<f64>, g1: &Matrix2<f64>, c_squared: f64) -> f64 {
    let g0sq = g0 * g0;
    -0.5 * ((c_squared - g0sq[(1, 1)]) * g1[(0, 0)]
        + (c_squared - g0sq[(0, 0)]) * g1[(1, 1)]
        + g0sq[(1, 0)] * g1[(0, 1)]
        + g0sq[(0, 1)] * g1[(1, 0)])
}

/// The purely λ-dependent coefficient G(λ): the slope weight at c² = 1.
pub fn capital_g(q: &PeriodicPotential, lambda: f64, tol: f64) -> Result<f64> {
    det_slope_weight(q, lambda, 1.0, tol)
}

/// Exact normalized Floquet assembly at finite ε.
#[derive(Debug, Clone)]
pub struct MEpsAssembly {
    pub lambda: f64,
    pub theta: Quasimomentum,
    pub matrix: Matrix4<Complex64>,
    pub determinant: Complex64,
}

/// Build 𝕄_ε(λ, Θ) with exact S_k^ε weights: both block rows
/// premultiplied by Φ₀(1)⁻¹ and the whole matrix divided by 3, the
/// normalization under which det 𝕄₀ = d₀. The determinant is real up to
/// round-off (conjugation symmetry of the two block rows).
pub fn assemble_m_eps(
    q: &PeriodicPotential,
    lambda: f64,
    theta: Quasimomentum,
    config: &PerturbationConfig,
    tol: f64,
) -> Result<MEpsAssembly> {
    let (_, phi) = basis_and_phi(q, lambda, tol)?;
    assemble_from_phi(&phi, theta, config)
}

/// Assembly from an existing φ-basis (single integration reused across Θ).
pub fn assemble_from_phi(
    phi: &PhiBasis,
    theta: Quasimomentum,
    config: &PerturbationConfig,
) -> Result<MEpsAssembly> {
    let inv = invert_phi0_at_one(phi)?;
    let inv_c = inv.map(|x| Complex64::new(x, 0.0));

    // S-weighted boundary blocks: rows use (S₁, S₂) and (S₀, S₁).
    let weighted = |at_one: bool, th: Quasimomentum, conjugate: bool| -> Matrix2<Complex64> {
        let s = [s_k_eps(0, th, config), s_k_eps(1, th, config), s_k_eps(2, th, config)];
        let s = if conjugate { [s[0].conj(), s[1].conj(), s[2].conj()] } else { s };
        let data = if at_one { &phi.at1 } else { &phi.at0 };
        Matrix2::new(
            s[1] * data[0].du,
            s[2] * data[1].du,
            s[0] * data[0].d3u,
            s[1] * data[1].d3u,
        )
    };

    let origin = Quasimomentum::new(0.0, 0.0);
    let diag = inv_c * weighted(false, origin, false) / Complex64::new(3.0, 0.0);
    let upper = -inv_c * weighted(true, theta, false) / Complex64::new(3.0, 0.0);
    let lower = -inv_c * weighted(true, theta, true) / Complex64::new(3.0, 0.0);

    let mut m = Matrix4::<Complex64>::zeros();
    for r in 0..2 {
        for c in 0..2 {
            m[(r, c)] = diag[(r, c)];
            m[(r + 2, c + 2)] = diag[(r, c)];
            m[(r, c + 2)] = upper[(r, c)];
            m[(r + 2, c)] = lower[(r, c)];
        }
    }
    let determinant = m.determinant();
    Ok(MEpsAssembly { lambda: phi.lambda, theta, matrix: m, determinant })
}

/// First-order determinant expansion det 𝕄_ε = d₀ + εd₁ + O(ε²):
/// d₀ = |s₀|⁴/81 − (|s₀|²/9)tr(𝔾₀²) + det(𝔾₀²) and
/// d₁ = −(4/9)·Re(s₀s̄₁)·weight(λ, |s₀|²/9).
pub fn det_expansion(
    q: &PeriodicPotential,
    lambda: f64,
    theta: Quasimomentum,
    config: &PerturbationConfig,
    tol: f64,
) -> Result<(f64, f64)> {
    let (basis, phi) = basis_and_phi(q, lambda, tol)?;
    let g0 = g0_from_basis(&basis);
    let g1 = g1_from_phi(&phi)?.entries;

    let c2 = s0_norm(theta).powi(2) / 9.0;
    let g0sq = g0 * g0;
    let d0 = c2 * c2 - c2 * g0sq.trace() + g0sq.determinant();
    let d1 = -(4.0 / 9.0) * re_s0_s1(theta, config) * slope_weight_from(&g0, &g1, c2);
    Ok((d0, d1))
}

/// First-order perturbed Lyapunov data at (λ, Θ):
/// T₁^ε = √(T₁² + ε·Re(s₀s̄₁)·G), T₂^ε = T₂ + ε·Re(s₀s̄₁)·G,
/// Δ^ε_{1,2} = T₁^ε ± √T₂^ε.
#[derive(Debug, Clone, Copy)]
pub struct PerturbedLyapunov {
    pub lambda: f64,
    pub theta: Quasimomentum,
    pub config: PerturbationConfig,
    /// None marks the undefined region (negative radicand in T₁^ε).
    pub t1_eps: Option<f64>,
    pub t2_eps: f64,
    pub delta1_eps: Option<f64>,
    pub delta2_eps: Option<f64>,
}

impl PerturbedLyapunov {
    /// Smallest distance of ±|s₀|/3 to a defined perturbed branch.
    pub fn membership_residual(&self) -> Option<f64> {
        let c = s0_norm(self.theta) / 3.0;
        let mut best: Option<f64> = None;
        for d in [self.delta1_eps, self.delta2_eps].into_iter().flatten() {
            for sign in [1.0, -1.0] {
                let r = (d - sign * c).abs();
                best = Some(best.map_or(r, |b: f64| b.min(r)));
            }
        }
        best
    }
}

pub fn perturbed_delta(
    q: &PeriodicPotential,
    lambda: f64,
    theta: Quasimomentum,
    config: &PerturbationConfig,
    tol: f64,
) -> Result<PerturbedLyapunov> {
    let (basis, phi) = basis_and_phi(q, lambda, tol)?;
    let g1 = g1_from_phi(&phi)?.entries;
    let g0 = g0_from_basis(&basis);
    let g = slope_weight_from(&g0, &g1, 1.0);
    let v = lyapunov_from_g0(&basis);
    let shift = config.epsilon() * re_s0_s1(theta, config) * g;
    let t1_sq = v.t1 * v.t1 + shift;
    let t2_eps = v.t2 + shift;
    let t1_eps = if t1_sq >= 0.0 { Some(t1_sq.sqrt()) } else { None };
    let (delta1_eps, delta2_eps) = match t1_eps {
        Some(t1e) if t2_eps >= 0.0 => {
            let s = t2_eps.sqrt();
            (Some(t1e + s), Some(t1e - s))
        }
        _ => (None, None),
    };
    Ok(PerturbedLyapunov { lambda, theta, config: *config, t1_eps, t2_eps, delta1_eps, delta2_eps })
}

/// λ-roots of the exact determinant over a fixed Θ. Every candidate is
/// re-checked against the complex modulus of the determinant: |det| must
/// fall below 1e−9 of its local scale, which also discards the apparent
/// sign changes the determinant inherits from poles at Σ^D when ε ≠ 0.
pub fn exact_perturbed_roots(
    q: &PeriodicPotential,
    theta: Quasimomentum,
    config: &PerturbationConfig,
    window: (f64, f64),
    grid: usize,
    tol: f64,
) -> Result<Vec<f64>> {
    let (lo, hi) = window;
    if !(hi > lo) {
        return Err(SpectralError::InvalidParameter {
            name: "lambda_window",
            reason: format!("empty window [{lo}, {hi}]"),
        });
    }
    let det_at = |lam: f64| -> Option<Complex64> {
        assemble_m_eps(q, lam, theta, config, tol).ok().map(|a| a.determinant)
    };
    let re_at = |lam: f64| det_at(lam).map(|d| d.re).unwrap_or(f64::NAN);

    let opts = ScanOptions { rel_tol: DEFAULT_ROOT_TOL, tangential_threshold: 1e-9, absolute_floor: 0.0 };
    let candidates = scan_roots(re_at, lo, hi, grid, opts);

    // Local modulus scale for the acceptance check.
    let n_scale = 64usize;
    let scale_grid: Vec<f64> = (0..=n_scale)
        .map(|i| lo + (hi - lo) * i as f64 / n_scale as f64)
        .map(|x| det_at(x).map(|d| d.norm()).unwrap_or(0.0))
        .collect();
    let local_scale = |x: f64| -> f64 {
        let i = (((x - lo) / (hi - lo) * n_scale as f64) as usize).min(n_scale);
        let a = i.saturating_sub(3);
        let b = (i + 3).min(n_scale);
        scale_grid[a..=b].iter().fold(f64::MIN_POSITIVE, |m, &v| m.max(v))
    };

    let mut out = Vec::new();
    for r in candidates {
        let modulus = det_at(r.x).map(|d| d.norm()).unwrap_or(f64::INFINITY);
        let accept = match r.kind {
            RootKind::Tangential => true, // already passed the relative check on Re
            RootKind::SignChange => modulus < 1e-9 * local_scale(r.x).max(f64::MIN_POSITIVE),
        };
        if accept {
            out.push(r.x);
        }
    }
    Ok(out)
}

/// Mean sheet separation statistics on one Θ-circle.
#[derive(Debug, Clone, Copy)]
pub struct CircleSeparation {
    pub rho: f64,
    /// Min over the circle of the λ-distance between the two root
    /// sheets bracketing the crossing energy.
    pub min_separation: f64,
}

/// Outcome of the Dirac persistence probe at finite ε.
#[derive(Debug, Clone)]
pub struct PersistenceReport {
    /// Exact determinant roots at Θ* near λ*.
    pub roots_at_theta_star: Vec<f64>,
    /// Splitting of the cone tips at Θ* (0 when they coincide).
    pub tip_splitting: f64,
    /// Energy of the sheet crossing: center of the Θ* root pair.
    pub crossing_lambda: f64,
    /// |crossing_lambda − λ*|; O(ε²) since the ε-term vanishes at Θ*.
    pub crossing_offset: f64,
    /// Quasimomentum of the located conical contact. The exact assembly
    /// moves the contact off Θ* by O(ε) while keeping it gapless.
    pub crossing_theta: Quasimomentum,
    /// Residual sheet gap at the located contact.
    pub contact_gap: f64,
    /// Circle statistics centered at Θ* (the first-order prediction point).
    pub theta_star_circles: Vec<CircleSeparation>,
    /// Circle statistics centered at the located contact; a conical
    /// contact makes these shrink linearly in ρ.
    pub crossing_circles: Vec<CircleSeparation>,
}

impl PersistenceReport {
    /// Ratio of min separations between the first two crossing-centered
    /// circles (≈ ρ₁/ρ₂ at a conical contact).
    pub fn crossing_separation_ratio(&self) -> Option<f64> {
        match self.crossing_circles.as_slice() {
            [a, b, ..] if b.min_separation > 0.0 => Some(a.min_separation / b.min_separation),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PersistenceOptions {
    /// Circle radii in Θ, largest first.
    pub radii: Vec<f64>,
    pub circle_samples: usize,
    /// Half-width of the λ-search window around λ*.
    pub lambda_halfwidth: f64,
    /// Grid for each λ root scan.
    pub root_grid: usize,
}

impl Default for PersistenceOptions {
    fn default() -> Self {
        Self { radii: vec![1e-2, 5e-3], circle_samples: 24, lambda_halfwidth: 0.75, root_grid: 120 }
    }
}

/// Probe whether the Dirac point at (Θ*, λ*) survives the perturbation.
///
/// Reports the exact roots at Θ* and their center (the crossing energy),
/// locates the conical contact in Θ by minimizing the sheet gap, and
/// samples sheet separations on Θ-circles around both Θ* and the contact.
pub fn dirac_persistence_check(
    q: &PeriodicPotential,
    config: &PerturbationConfig,
    lambda_star: f64,
    options: &PersistenceOptions,
    tol: f64,
) -> Result<PersistenceReport> {
    if config.epsilon().abs() > 0.05 {
        return Err(SpectralError::InvalidParameter {
            name: "epsilon",
            reason: format!("persistence probe expects |epsilon| <= 0.05, got {}", config.epsilon()),
        });
    }
    let window = (lambda_star - options.lambda_halfwidth, lambda_star + options.lambda_halfwidth);
    let roots_at = |theta: Quasimomentum| -> Result<Vec<f64>> {
        exact_perturbed_roots(q, theta, config, window, options.root_grid, tol)
    };

    let star = theta_star();
    let tips = roots_at(star)?;
    let (crossing_lambda, tip_splitting) = bracketing_center(&tips, lambda_star);

    // Sheet gap as a function of Θ: distance between the roots
    // bracketing the crossing energy (0 when they merge).
    let gap_at = |theta: Quasimomentum| -> f64 {
        match roots_at(theta) {
            Ok(rr) => match bracket_pair(&rr, crossing_lambda) {
                Some((lo, hi)) => hi - lo,
                None => {
                    if rr.is_empty() {
                        f64::INFINITY
                    } else {
                        0.0
                    }
                }
            },
            Err(_) => f64::INFINITY,
        }
    };

    let (crossing_theta, contact_gap) = if config.epsilon() == 0.0 {
        (star, gap_at(star))
    } else {
        minimize_gap(gap_at, star, 2.0 * config.epsilon().abs())
    };

    let circles = |center: Quasimomentum| -> Vec<CircleSeparation> {
        options
            .radii
            .iter()
            .map(|&rho| {
                let mut min_sep = f64::INFINITY;
                for i in 0..options.circle_samples {
                    let phi = 2.0 * std::f64::consts::PI * i as f64 / options.circle_samples as f64;
                    let theta = Quasimomentum::new(
                        center.theta1 + rho * phi.cos(),
                        center.theta2 + rho * phi.sin(),
                    );
                    let sep = gap_at(theta);
                    if sep.is_finite() {
                        min_sep = min_sep.min(sep);
                    }
                }
                CircleSeparation { rho, min_separation: min_sep }
            })
            .collect()
    };

    Ok(PersistenceReport {
        roots_at_theta_star: tips,
        tip_splitting,
        crossing_offset: (crossing_lambda - lambda_star).abs(),
        crossing_lambda,
        crossing_theta,
        contact_gap,
        theta_star_circles: circles(star),
        crossing_circles: circles(crossing_theta),
    })
}

/// Center of the root pair bracketing `target` (falls back to the
/// nearest root), plus the pair's splitting.
fn bracketing_center(roots: &[f64], target: f64) -> (f64, f64) {
    if let Some((lo, hi)) = bracket_pair(roots, target) {
        (0.5 * (lo + hi), hi - lo)
    } else if let Some(&r) = roots.iter().min_by(|a, b| (*a - target).abs().total_cmp(&(*b - target).abs())) {
        (r, 0.0)
    } else {
        (target, f64::INFINITY)
    }
}

fn bracket_pair(roots: &[f64], target: f64) -> Option<(f64, f64)> {
    let lo = roots.iter().copied().filter(|&r| r <= target).fold(f64::NEG_INFINITY, f64::max);
    let hi = roots.iter().copied().filter(|&r| r > target).fold(f64::INFINITY, f64::min);
    if lo.is_finite() && hi.is_finite() {
        Some((lo, hi))
    } else {
        None
    }
}

/// Nelder–Mead over Θ, small and local: enough to chase the sheet gap
/// minimum a few ε away from the starting point.
fn minimize_gap(
    f: impl Fn(Quasimomentum) -> f64,
    start: Quasimomentum,
    step: f64,
) -> (Quasimomentum, f64) {
    let eval = |p: [f64; 2]| f(Quasimomentum::new(p[0], p[1]));
    let mut simplex = [
        [start.theta1, start.theta2],
        [start.theta1 + step, start.theta2],
        [start.theta1, start.theta2 + step],
    ];
    let mut values = simplex.map(eval);

    for _ in 0..80 {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let (best, mid, worst) = (order[0], order[1], order[2]);
        if values[best] == 0.0 {
            break;
        }
        let spread = (simplex[best][0] - simplex[worst][0]).abs().max((simplex[best][1] - simplex[worst][1]).abs());
        if spread < 1e-7 {
            break;
        }
        let centroid = [
            0.5 * (simplex[best][0] + simplex[mid][0]),
            0.5 * (simplex[best][1] + simplex[mid][1]),
        ];
        let reflect = [2.0 * centroid[0] - simplex[worst][0], 2.0 * centroid[1] - simplex[worst][1]];
        let fr = eval(reflect);
        if fr < values[best] {
            let expand = [
                centroid[0] + 2.0 * (reflect[0] - centroid[0]),
                centroid[1] + 2.0 * (reflect[1] - centroid[1]),
            ];
            let fe = eval(expand);
            if fe < fr {
                simplex[worst] = expand;
                values[worst] = fe;
            } else {
                simplex[worst] = reflect;
                values[worst] = fr;
            }
        } else if fr < values[mid] {
            simplex[worst] = reflect;
            values[worst] = fr;
        } else {
            let contract = [
                centroid[0] + 0.5 * (simplex[worst][0] - centroid[0]),
                centroid[1] + 0.5 * (simplex[worst][1] - centroid[1]),
            ];
            let fc = eval(contract);
            if fc < values[worst] {
                simplex[worst] = contract;
                values[worst] = fc;
            } else {
                for i in 0..3 {
                    if i != best {
                        simplex[i] = [
                            0.5 * (simplex[i][0] + simplex[best][0]),
                            0.5 * (simplex[i][1] + simplex[best][1]),
                        ];
                        values[i] = eval(simplex[i]);
                    }
                }
            }
        }
    }
    let mut best = 0;
    for i in 1..3 {
        if values[i] < values[best] {
            best = i;
        }
    }
    (Quasimomentum::new(simplex[best][0], simplex[best][1]), values[best])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphene::s0;
    use crate::lyapunov::lyapunov_values_unchecked;
    use approx::assert_abs_diff_eq;

    const TOL: f64 = 1e-10;

    fn free() -> PeriodicPotential {
        PeriodicPotential::free()
    }

    #[test]
    fn config_validation() {
        assert!(PerturbationConfig::new(0.1, 0.5).is_ok());
        assert!(PerturbationConfig::new(0.6, 0.5).is_err());
        assert!(PerturbationConfig::new(0.1, 1.5).is_err());
        let c = PerturbationConfig::new(0.1, 0.25).unwrap();
        assert_abs_diff_eq!(c.c2(), -1.25, epsilon = 1e-15);
        assert_abs_diff_eq!(1.0 + c.c1() + c.c2(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn s_k_eps_reduces_to_s0() {
        let cfg0 = PerturbationConfig::new(0.0, 0.3).unwrap();
        let th = Quasimomentum::new(0.7, -1.2);
        for k in 0..3 {
            let v = s_k_eps(k, th, &cfg0);
            let expect = s0(th);
            assert!((v - expect).norm() < 1e-15);
        }
        // k = 0 ignores epsilon entirely.
        let cfg = PerturbationConfig::new(0.2, 0.3).unwrap();
        assert!((s_k_eps(0, th, &cfg) - s0(th)).norm() < 1e-15);
    }

    #[test]
    fn s_k_eps_matches_direct_sine_sum() {
        let cfg = PerturbationConfig::new(0.01, 0.5).unwrap();
        let th = Quasimomentum::new(0.0, 0.0);
        let sin_d0 = DELTA0.sin();
        let direct = ((DELTA0 + 0.01).sin() + (DELTA0 + 0.005).sin() + (DELTA0 - 0.015).sin()) / sin_d0;
        let v = s_k_eps(1, th, &cfg);
        assert_abs_diff_eq!(v.re, direct, epsilon = 1e-14);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn re_s0_s1_values_and_zeros() {
        let cfg = PerturbationConfig::new(0.01, 1.0).unwrap();
        assert_abs_diff_eq!(re_s0_s1(Quasimomentum::new(0.0, 0.0), &cfg), 0.0, epsilon = 1e-14);
        assert!(re_s0_s1(theta_star(), &cfg).abs() < 1e-14);
        assert!(re_s0_s1(theta_star().negated(), &cfg).abs() < 1e-14);
        // (pi, 0) with c1 = 1: -cot(2pi/3)(-1 + 1 + 2) = 2/sqrt(3).
        let v = re_s0_s1(Quasimomentum::new(std::f64::consts::PI, 0.0), &cfg);
        assert_abs_diff_eq!(v, 2.0 / 3f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn re_s0_s1_matches_complex_product() {
        let cfg = PerturbationConfig::new(0.01, -0.4).unwrap();
        for th in [Quasimomentum::new(0.9, -1.7), Quasimomentum::new(2.2, 0.3)] {
            let direct = (s0(th) * s1(th, &cfg).conj()).re;
            assert_abs_diff_eq!(re_s0_s1(th, &cfg), direct, epsilon = 1e-13);
        }
    }

    #[test]
    fn g1_identity_phi0_g1_equals_phi1() {
        let q = PeriodicPotential::new(vec![1.0]).unwrap();
        let phi = phi_basis(&q, 5.0, TOL).unwrap();
        let g1 = g1_from_phi(&phi).unwrap().entries;
        let lhs = phi.phi0(true) * g1;
        let rhs = phi.phi1(true);
        assert!((lhs - rhs).abs().max() < 1e-9);
    }

    #[test]
    fn g1_errors_on_dirichlet() {
        let pi4 = std::f64::consts::PI.powi(4);
        assert!(matches!(
            g1_matrix(&free(), pi4, TOL),
            Err(SpectralError::SingularBasis { .. })
        ));
    }

    #[test]
    fn assembly_at_eps0_matches_d0() {
        // The assembly runs through the φ-route, d₀ through the direct
        // monodromy entries; agreement at 1e−10 needs the tight
        // integrator setting.
        let q = PeriodicPotential::new(vec![0.7, -0.3]).unwrap();
        let cfg = PerturbationConfig::new(0.0, 0.35).unwrap();
        let th = Quasimomentum::new(0.9, -1.7);
        let a = assemble_m_eps(&q, 11.0, th, &cfg, 1e-12).unwrap();
        let (d0, _) = det_expansion(&q, 11.0, th, &cfg, 1e-12).unwrap();
        assert!((a.determinant.re - d0).abs() < 1e-10 * d0.abs().max(1.0));
        assert!(a.determinant.im.abs() < 1e-10);
    }

    #[test]
    fn determinant_is_real_at_finite_eps() {
        let cfg = PerturbationConfig::new(0.02, 0.5).unwrap();
        let a = assemble_m_eps(&free(), 7.0, Quasimomentum::new(1.1, 0.4), &cfg, TOL).unwrap();
        assert!(a.determinant.im.abs() < 1e-12 * a.determinant.re.abs().max(1.0));
    }

    #[test]
    fn d1_matches_central_difference() {
        let q = PeriodicPotential::new(vec![0.7, -0.3]).unwrap();
        let th = Quasimomentum::new(0.9, -1.7);
        let cfg = PerturbationConfig::new(0.0, 0.35).unwrap();
        let (_, d1) = det_expansion(&q, 11.0, th, &cfg, TOL).unwrap();
        let h = 1e-5;
        let det = |eps: f64| {
            let c = PerturbationConfig::new(eps, 0.35).unwrap();
            assemble_m_eps(&q, 11.0, th, &c, TOL).unwrap().determinant.re
        };
        let cd = (det(h) - det(-h)) / (2.0 * h);
        assert!((d1 - cd).abs() < 1e-5 * cd.abs().max(1e-6), "d1 {d1} vs cd {cd}");
    }

    #[test]
    fn d1_vanishes_at_special_quasimomenta() {
        let cfg = PerturbationConfig::new(0.01, 0.5).unwrap();
        for th in [Quasimomentum::new(0.0, 0.0), theta_star(), theta_star().negated()] {
            let (_, d1) = det_expansion(&free(), 3.0, th, &cfg, TOL).unwrap();
            assert!(d1.abs() < 1e-12, "d1 at {th:?}: {d1}");
        }
    }

    #[test]
    fn perturbed_delta_eps0_reduction() {
        let cfg = PerturbationConfig::new(0.0, 0.5).unwrap();
        let th = Quasimomentum::new(0.4, 0.9);
        let p = perturbed_delta(&free(), 2.0, th, &cfg, TOL).unwrap();
        let v = lyapunov_values_unchecked(&free(), 2.0, TOL).unwrap();
        assert_abs_diff_eq!(p.t1_eps.unwrap(), v.t1.abs(), epsilon = 1e-10);
        assert_abs_diff_eq!(p.t2_eps, v.t2, epsilon = 1e-10);
        assert_abs_diff_eq!(p.delta1_eps.unwrap(), v.t1.abs() + v.t2.sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn perturbed_delta_invariant_at_theta_star() {
        let cfg = PerturbationConfig::new(0.02, 0.5).unwrap();
        let p = perturbed_delta(&free(), 2.0, theta_star(), &cfg, TOL).unwrap();
        let v = lyapunov_values_unchecked(&free(), 2.0, TOL).unwrap();
        // the perturbation term carries Re(s0 s1bar) = 0 at theta*.
        assert_abs_diff_eq!(p.t2_eps, v.t2, epsilon = 1e-12);
    }

    #[test]
    fn exact_roots_eps0_match_sheets() {
        let cfg = PerturbationConfig::new(0.0, 0.5).unwrap();
        let th = Quasimomentum::new(std::f64::consts::PI, std::f64::consts::PI);
        let roots = exact_perturbed_roots(&free(), th, &cfg, (0.5, 100.0), 300, TOL).unwrap();
        let sheets = crate::graphene::solve_sheets(&free(), th, (0.5, 100.0), 300, TOL).unwrap();
        assert_eq!(roots.len(), sheets.len(), "roots {roots:?} sheets {sheets:?}");
        for (r, s) in roots.iter().zip(sheets.iter()) {
            assert!((r - s.lambda).abs() < 1e-8 * s.lambda.max(1.0));
        }
    }
}
