//! The equal-angle (graphene) lattice: dispersion relation, spectral
//! classification, Dirac points, Fermi surfaces, and flat-band loop
//! states.
//!
//! Off the Dirichlet spectrum, (Θ, λ) lies on the dispersion relation iff
//! det(𝔾₀²(λ) − (|s₀(Θ)|²/9)·I) = 0, equivalently Δ_k(λ) = ±|s₀(Θ)|/3
//! for some branch. Points of Σ^D are flat branches: eigenvalues of
//! infinite multiplicity carried by single-hexagon loop states.

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::edge_solver::{
    dirichlet_null_vector, in_dirichlet_spectrum, integrate_fundamental, StateVector,
    DEFAULT_ROOT_TOL,
};
use crate::error::{Result, SpectralError};
use crate::lyapunov::{g0_from_basis, lyapunov_values_unchecked, LyapunovValues};
use crate::potential::PeriodicPotential;
use crate::rootscan::{scan_roots, ScanOptions};

/// Interior angle of the unperturbed lattice, δ₀ = 2π/3.
pub const DELTA0: f64 = 2.0 * std::f64::consts::PI / 3.0;

/// Floquet-Bloch phase pair over the Brillouin zone [−π, π]².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quasimomentum {
    pub theta1: f64,
    pub theta2: f64,
}

impl Quasimomentum {
    pub fn new(theta1: f64, theta2: f64) -> Self {
        Self { theta1, theta2 }
    }

    pub fn negated(self) -> Self {
        Self { theta1: -self.theta1, theta2: -self.theta2 }
    }
}

/// The Dirac quasimomentum Θ* = (2π/3, −2π/3); −Θ* is the other one.
pub fn theta_star() -> Quasimomentum {
    Quasimomentum::new(DELTA0, -DELTA0)
}

/// s₀(Θ) = 1 + e^{−iθ₁} + e^{−iθ₂}.
pub fn s0(theta: Quasimomentum) -> Complex64 {
    Complex64::new(1.0, 0.0)
        + Complex64::from_polar(1.0, -theta.theta1)
        + Complex64::from_polar(1.0, -theta.theta2)
}

/// |s₀(Θ)| ∈ [0, 3]; maximal at (0,0), vanishing at ±Θ*.
pub fn s0_norm(theta: Quasimomentum) -> f64 {
    s0(theta).norm()
}

/// Dual-basis transform κ = B*·Θ with B* = (1/3)[[2, −1], [0, √3]].
pub fn brillouin_to_cartesian(theta: Quasimomentum) -> (f64, f64) {
    let k1 = (2.0 * theta.theta1 - theta.theta2) / 3.0;
    let k2 = 3f64.sqrt() / 3.0 * theta.theta2;
    (k1, k2)
}

/// The 2×2 discriminant matrix 𝔾₀(λ) = [[g₁(1), g₃(1)], [g₁″(1), g₃″(1)]].
#[derive(Debug, Clone, Copy)]
pub struct G0Matrix {
    pub lambda: f64,
    pub entries: Matrix2<f64>,
}

/// Read 𝔾₀ off the monodromy columns.
pub fn g0_matrix(q: &PeriodicPotential, lambda: f64, tol: f64) -> Result<G0Matrix> {
    let basis = integrate_fundamental(q, lambda, tol)?;
    Ok(G0Matrix { lambda, entries: g0_from_basis(&basis) })
}

/// Value of the dispersion determinant at fixed 𝔾₀ and Θ.
pub fn dispersion_residual_value(g0: &G0Matrix, theta: Quasimomentum) -> f64 {
    let c2 = s0_norm(theta).powi(2) / 9.0;
    let g0sq = g0.entries * g0.entries;
    (g0sq - Matrix2::identity() * c2).determinant()
}

/// Either a point evaluation of the dispersion determinant, or the flat
/// branch marker for λ ∈ Σ^D (always in the spectrum).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DispersionResidual {
    Value(f64),
    FlatBranch,
}

/// det(𝔾₀²(λ) − (|s₀(Θ)|²/9)I); zero iff (Θ, λ) is on the dispersion
/// relation. Σ^D membership short-circuits to the flat-branch marker.
pub fn dispersion_residual(
    q: &PeriodicPotential,
    lambda: f64,
    theta: Quasimomentum,
    tol: f64,
) -> Result<DispersionResidual> {
    if in_dirichlet_spectrum(q, lambda, tol)? {
        return Ok(DispersionResidual::FlatBranch);
    }
    let g0 = g0_matrix(q, lambda, tol)?;
    Ok(DispersionResidual::Value(dispersion_residual_value(&g0, theta)))
}

/// One solution of Δ_branch(λ) = sign·|s₀(Θ)|/3.
#[derive(Debug, Clone, Copy)]
pub struct SheetRoot {
    pub lambda: f64,
    /// Lyapunov branch index, 1 or 2.
    pub branch: u8,
    /// +1 or −1.
    pub sign: i8,
}

/// All λ in the window on the dispersion sheet over a fixed Θ.
///
/// Each (branch, sign) family is scanned separately; for |s₀| = 0 the two
/// signs coincide and only the positive family is reported.
pub fn solve_sheets(
    q: &PeriodicPotential,
    theta: Quasimomentum,
    window: (f64, f64),
    grid: usize,
    tol: f64,
) -> Result<Vec<SheetRoot>> {
    let (lo, hi) = window;
    if !(hi > lo) {
        return Err(SpectralError::InvalidParameter {
            name: "lambda_window",
            reason: format!("empty window [{lo}, {hi}]"),
        });
    }
    let c = s0_norm(theta) / 3.0;
    let branch = |lam: f64, k: u8| -> f64 {
        match lyapunov_values_unchecked(q, lam, tol) {
            Ok(v) => {
                let d = if k == 1 { v.delta1 } else { v.delta2 };
                d.unwrap_or(f64::NAN)
            }
            Err(_) => f64::NAN,
        }
    };
    let mut out = Vec::new();
    for k in [1u8, 2u8] {
        // Evaluation noise floor for tangential touches: the branch is
        // accurate to roughly tol times its own magnitude.
        let mut bmax = 0.0f64;
        for i in 0..=grid {
            let v = branch(lo + (hi - lo) * i as f64 / grid as f64, k);
            if v.is_finite() {
                bmax = bmax.max(v.abs());
            }
        }
        let opts = ScanOptions {
            rel_tol: DEFAULT_ROOT_TOL,
            tangential_threshold: 1e-8,
            absolute_floor: 100.0 * tol * (1.0 + bmax),
        };
        let signs: &[i8] = if c < 1e-14 { &[1] } else { &[1, -1] };
        for &s in signs {
            let target = s as f64 * c;
            let roots = scan_roots(|lam| branch(lam, k) - target, lo, hi, grid, opts);
            for r in roots {
                out.push(SheetRoot { lambda: r.x, branch: k, sign: s });
            }
        }
    }
    out.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    Ok(out)
}

/// Sheet solving against a precomputed branch table: brackets and
/// tangential candidates come from the table; refinement evaluates the
/// true branch. Intended for Θ-sweeps where the table is shared.
pub fn solve_sheets_with_table(
    q: &PeriodicPotential,
    theta: Quasimomentum,
    table: &crate::lyapunov::LyapunovTable,
    tol: f64,
) -> Result<Vec<SheetRoot>> {
    let c = s0_norm(theta) / 3.0;
    let n = table.lambdas.len();
    let live = |lam: f64, k: u8| -> f64 {
        match lyapunov_values_unchecked(q, lam, tol) {
            Ok(v) => (if k == 1 { v.delta1 } else { v.delta2 }).unwrap_or(f64::NAN),
            Err(_) => f64::NAN,
        }
    };
    let mut out = Vec::new();
    for k in [1u8, 2u8] {
        let mut bmax = 0.0f64;
        for i in 0..n {
            if let Some(d) = table.branch(i, k) {
                bmax = bmax.max(d.abs());
            }
        }
        let floor = 100.0 * tol * (1.0 + bmax);
        let signs: &[i8] = if c < 1e-14 { &[1] } else { &[1, -1] };
        for &s in signs {
            let target = s as f64 * c;
            let g = |i: usize| table.branch(i, k).map(|d| d - target).unwrap_or(f64::NAN);
            let mut i = 0;
            while i + 1 < n {
                let (fa, fb) = (g(i), g(i + 1));
                if fa.is_finite() && fb.is_finite() && fa != 0.0 && (fa > 0.0) != (fb > 0.0) {
                    let x = crate::rootscan::refine_bracket(
                        |lam| live(lam, k) - target,
                        table.lambdas[i],
                        table.lambdas[i + 1],
                        fa,
                        fb,
                        DEFAULT_ROOT_TOL,
                    );
                    out.push(SheetRoot { lambda: x, branch: k, sign: s });
                } else if fa == 0.0 {
                    out.push(SheetRoot { lambda: table.lambdas[i], branch: k, sign: s });
                }
                i += 1;
            }
            if g(n - 1) == 0.0 {
                out.push(SheetRoot { lambda: table.lambdas[n - 1], branch: k, sign: s });
            }
            // Tangential touches: local minima of |Δ_k − target| on the
            // table, accepted after live refinement.
            for i in 0..n {
                let v = g(i);
                if !v.is_finite() || v == 0.0 {
                    continue;
                }
                let left = if i > 0 { g(i - 1) } else { f64::INFINITY };
                let right = if i + 1 < n { g(i + 1) } else { f64::INFINITY };
                let is_min = v.abs() <= left.abs() && v.abs() <= right.abs();
                let sign_change_near = (left.is_finite() && (left > 0.0) != (v > 0.0))
                    || (right.is_finite() && (right > 0.0) != (v > 0.0));
                if !is_min || sign_change_near {
                    continue;
                }
                let a = if i > 0 { table.lambdas[i - 1] } else { table.lambdas[0] };
                let b = if i + 1 < n { table.lambdas[i + 1] } else { table.lambdas[n - 1] };
                if b <= a {
                    continue;
                }
                let mut scale = v.abs().max(1e-6);
                if left.is_finite() {
                    scale = scale.max(left.abs());
                }
                if right.is_finite() {
                    scale = scale.max(right.abs());
                }
                let (xm, fm) = crate::rootscan::minimize_abs(|lam| live(lam, k) - target, a, b, DEFAULT_ROOT_TOL);
                if fm <= (1e-8 * scale).max(floor) {
                    out.push(SheetRoot { lambda: xm, branch: k, sign: s });
                }
            }
        }
    }
    out.sort_by(|p, r| p.lambda.total_cmp(&r.lambda));
    out.dedup_by(|p, r| {
        p.branch == r.branch && p.sign == r.sign && (p.lambda - r.lambda).abs() < 1e-7 * p.lambda.abs().max(1.0)
    });
    Ok(out)
}

/// Spectral type of a single energy for the graphene Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumClassification {
    /// σ_ac: some Lyapunov branch in [−1, 1].
    AbsolutelyContinuous,
    /// σ_pp: flat branch, λ ∈ Σ^D.
    PurePoint,
    /// Neither: spectral gap. (σ_sc is empty.)
    Gap,
}

pub fn classify_lambda(q: &PeriodicPotential, lambda: f64, tol: f64) -> Result<SpectrumClassification> {
    if in_dirichlet_spectrum(q, lambda, tol)? {
        return Ok(SpectrumClassification::PurePoint);
    }
    let v = lyapunov_values_unchecked(q, lambda, tol)?;
    if v.in_spectrum() {
        Ok(SpectrumClassification::AbsolutelyContinuous)
    } else {
        Ok(SpectrumClassification::Gap)
    }
}

/// Shape of the conical singularity at a Dirac point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeType {
    /// One branch vanishes: two opposite cones with a common vertex.
    TwoCone,
    /// Both branches vanish with |T₂| < 1 nearby: four cones.
    FourCone,
}

impl ConeType {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConeType::TwoCone => "two-cone",
            ConeType::FourCone => "four-cone",
        }
    }
}

/// A conical singularity of the dispersion relation at Θ = ±Θ*.
#[derive(Debug, Clone, Copy)]
pub struct DiracPoint {
    /// Positive representative; the mirror point −Θ* carries the same cone.
    pub theta_star: Quasimomentum,
    pub lambda_star: f64,
    /// Branch whose Lyapunov function vanishes (lower index for four-cone).
    pub branch: u8,
    pub cone_type: ConeType,
}

/// Number of sample points for the T₂ ≥ 0 neighborhood verification.
const DIRAC_NEIGHBORHOOD_SAMPLES: usize = 101;

/// Half-width of the verified T₂ ≥ 0 neighborhood around a candidate λ*.
pub fn dirac_neighborhood_halfwidth(lambda_star: f64) -> f64 {
    (1e-6 * lambda_star.abs()).max(1e-4)
}

/// Locate all Dirac points with λ* in the window: zeros of some Δ_k with
/// T₂ ≥ 0 on a verified neighborhood, paired with Θ* = ±(2π/3, −2π/3).
pub fn dirac_scan(
    q: &PeriodicPotential,
    window: (f64, f64),
    grid: usize,
    tol: f64,
) -> Result<Vec<DiracPoint>> {
    let (lo, hi) = window;
    if !(hi > lo) {
        return Err(SpectralError::InvalidParameter {
            name: "lambda_window",
            reason: format!("empty window [{lo}, {hi}]"),
        });
    }
    let values = |lam: f64| -> Option<LyapunovValues> { lyapunov_values_unchecked(q, lam, tol).ok() };
    let branch_val = |lam: f64, k: u8| -> f64 {
        values(lam)
            .and_then(|v| if k == 1 { v.delta1 } else { v.delta2 })
            .unwrap_or(f64::NAN)
    };
    let opts = ScanOptions { rel_tol: DEFAULT_ROOT_TOL, tangential_threshold: 1e-8, absolute_floor: 0.0 };

    let mut candidates: Vec<(f64, u8)> = Vec::new();
    for k in [1u8, 2u8] {
        for r in scan_roots(|lam| branch_val(lam, k), lo, hi, grid, opts) {
            candidates.push((r.x, k));
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut points: Vec<DiracPoint> = Vec::new();
    let mut i = 0;
    while i < candidates.len() {
        let (lam, mut branch) = candidates[i];
        let mut both = false;
        if i + 1 < candidates.len() {
            let (lam2, b2) = candidates[i + 1];
            if (lam2 - lam).abs() <= 1e-9 * lam.abs().max(1.0) && b2 != branch {
                both = true;
                branch = branch.min(b2);
                i += 1;
            }
        }
        i += 1;

        // Verify T₂ ≥ 0 across the sampled neighborhood.
        let delta = dirac_neighborhood_halfwidth(lam);
        let mut t2_ok = true;
        let mut t2_small = true;
        for j in 0..DIRAC_NEIGHBORHOOD_SAMPLES {
            let x = lam - delta + 2.0 * delta * j as f64 / (DIRAC_NEIGHBORHOOD_SAMPLES - 1) as f64;
            match values(x) {
                Some(v) => {
                    if v.t2 < 0.0 {
                        t2_ok = false;
                        break;
                    }
                    if v.t2.abs() >= 1.0 {
                        t2_small = false;
                    }
                }
                None => {
                    t2_ok = false;
                    break;
                }
            }
        }
        if !t2_ok {
            continue;
        }
        let cone_type = if both && t2_small { ConeType::FourCone } else { ConeType::TwoCone };
        points.push(DiracPoint { theta_star: theta_star(), lambda_star: lam, branch, cone_type });
    }
    Ok(points)
}

/// Fermi-surface class at one energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FermiClass {
    /// Both branches in [−1, 1]: the Laurent relation factors.
    Reducible,
    /// Exactly one branch in [−1, 1].
    Irreducible,
    /// No branch in [−1, 1]: empty surface.
    Absent,
    /// λ ∈ Σ^D: flat branch.
    Flat,
}

impl FermiClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            FermiClass::Reducible => "reducible",
            FermiClass::Irreducible => "irreducible",
            FermiClass::Absent => "absent",
            FermiClass::Flat => "flat",
        }
    }
}

pub fn fermi_classify(q: &PeriodicPotential, lambda: f64, tol: f64) -> Result<FermiClass> {
    if in_dirichlet_spectrum(q, lambda, tol)? {
        return Ok(FermiClass::Flat);
    }
    let v = lyapunov_values_unchecked(q, lambda, tol)?;
    let inside = |d: Option<f64>| d.map(|x| (-1.0..=1.0).contains(&x)).unwrap_or(false);
    Ok(match (inside(v.delta1), inside(v.delta2)) {
        (true, true) => FermiClass::Reducible,
        (true, false) | (false, true) => FermiClass::Irreducible,
        (false, false) => FermiClass::Absent,
    })
}

/// Parity of a Dirichlet eigenfunction about the edge midpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeParity {
    Even,
    Odd,
}

/// Maximum vertex-condition residual of the hexagon loop state at
/// λ ∈ Σ^D: the Dirichlet eigenfunction is repeated around a single
/// hexagon (odd case) or alternated in sign (even case), zero elsewhere,
/// and all four vertex conditions are evaluated at the six vertices.
pub fn loop_state_residual(q: &PeriodicPotential, lambda: f64, tol: f64) -> Result<f64> {
    if !in_dirichlet_spectrum(q, lambda, tol)? {
        return Err(SpectralError::NotDirichlet { lambda });
    }
    let basis = integrate_fundamental(q, lambda, tol)?;
    let (c2, c4) = dirichlet_null_vector(&basis);
    let m = &basis.monodromy;
    let propagate = |c2: f64, c4: f64| -> (StateVector, StateVector) {
        let u0 = StateVector::new(0.0, c2, 0.0, c4);
        let u1 = StateVector::from_vector(&(m * u0.to_vector()));
        (u0, u1)
    };

    // Parity projection: the reflection x ↦ 1−x sends coefficients
    // (c2, c4) to (−u'(1), −u'''(1)).
    let (_, u1_raw) = propagate(c2, c4);
    let (r2, r4) = (-u1_raw.du, -u1_raw.d3u);
    let even = (c2 + r2, c4 + r4);
    let odd = (c2 - r2, c4 - r4);
    let norm = |p: (f64, f64)| (p.0 * p.0 + p.1 * p.1).sqrt();
    let (parity, chosen) =
        if norm(even) >= norm(odd) { (EdgeParity::Even, even) } else { (EdgeParity::Odd, odd) };
    let n = norm(chosen).max(f64::MIN_POSITIVE);
    let (u0, u1) = propagate(chosen.0 / n, chosen.1 / n);

    // Edge-frame boundary states around the hexagon. Even-indexed edges
    // run with the loop, odd-indexed ones against it; the loop state is
    // u repeated (odd parity) or sign-alternated (even parity).
    let sign = |j: usize| -> f64 {
        match parity {
            EdgeParity::Odd => 1.0,
            EdgeParity::Even => {
                if j % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    };
    let scale = |s: StateVector, a: f64| StateVector::new(a * s.u, a * s.du, a * s.d2u, a * s.d3u);
    let state_at = |j: usize, at_one: bool| -> StateVector {
        let aligned = j % 2 == 0;
        let s = match (aligned, at_one) {
            (true, false) => u0,
            (true, true) => u1,
            // Anti-aligned edges carry u(1−x).
            (false, false) => u1.reflected(),
            (false, true) => u0.reflected(),
        };
        scale(s, sign(j))
    };

    let sin_d0 = DELTA0.sin();
    let mut max_residual = 0.0f64;
    for j in 0..6 {
        // Vertex v_j joins edge j−1 and edge j; both ends sit at x = 0
        // for even j and at x = 1 for odd j. The third (external) edge
        // carries the zero function.
        let at_one = j % 2 == 1;
        let p = state_at((j + 5) % 6, at_one);
        let r = state_at(j, at_one);
        let residuals = [
            (p.u - r.u).abs(),
            p.u.abs(),
            r.u.abs(),
            sin_d0 * (p.du + r.du).abs(),
            (p.d2u - r.d2u).abs() / sin_d0,
            p.d2u.abs() / sin_d0,
            r.d2u.abs() / sin_d0,
            (p.d3u + r.d3u).abs(),
        ];
        for res in residuals {
            max_residual = max_residual.max(res);
        }
    }
    Ok(max_residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn free() -> PeriodicPotential {
        PeriodicPotential::free()
    }

    const TOL: f64 = 1e-10;

    #[test]
    fn s0_norm_special_points() {
        assert_abs_diff_eq!(s0_norm(Quasimomentum::new(0.0, 0.0)), 3.0, epsilon = 1e-14);
        assert!(s0_norm(theta_star()) < 1e-12);
        assert_abs_diff_eq!(
            s0_norm(Quasimomentum::new(std::f64::consts::PI, std::f64::consts::PI)),
            1.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn brillouin_transform_columns() {
        let pi = std::f64::consts::PI;
        let (k1, k2) = brillouin_to_cartesian(Quasimomentum::new(pi, 0.0));
        assert_abs_diff_eq!(k1, 2.0 * pi / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(k2, 0.0, epsilon = 1e-14);
        let (k1, k2) = brillouin_to_cartesian(Quasimomentum::new(0.0, pi));
        assert_abs_diff_eq!(k1, -pi / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(k2, pi * 3f64.sqrt() / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn g0_free_closed_form() {
        let g0 = g0_matrix(&free(), 1.0, TOL).unwrap().entries;
        let (ch, co) = (1f64.cosh(), 1f64.cos());
        let expected = Matrix2::new(ch + co, ch - co, ch - co, ch + co) * 0.5;
        assert!((g0 - expected).abs().max() < 1e-10);

        let g0_zero = g0_matrix(&free(), 0.0, TOL).unwrap().entries;
        let expected_zero = Matrix2::new(1.0, 0.5, 0.0, 1.0);
        assert!((g0_zero - expected_zero).abs().max() < 1e-10);
    }

    #[test]
    fn dispersion_residual_zero_cases() {
        // (0,0) at lambda = 0: the bottom of the spectrum.
        let g0 = g0_matrix(&free(), 0.0, TOL).unwrap();
        let r = dispersion_residual_value(&g0, Quasimomentum::new(0.0, 0.0));
        assert!(r.abs() < 1e-9, "residual {r}");
        // Dirac point: Delta2 = 0 and |s0| = 0.
        let lam = (std::f64::consts::PI / 2.0).powi(4);
        let g0 = g0_matrix(&free(), lam, TOL).unwrap();
        let r = dispersion_residual_value(&g0, theta_star());
        assert!(r.abs() < 1e-9, "residual {r}");
        // Generic point: nonzero.
        let g0 = g0_matrix(&free(), 1.0, TOL).unwrap();
        let r = dispersion_residual_value(&g0, Quasimomentum::new(0.0, 0.0));
        assert!(r.abs() > 1e-3);
    }

    #[test]
    fn dispersion_flat_branch_signal() {
        let pi4 = std::f64::consts::PI.powi(4);
        let r = dispersion_residual(&free(), pi4, Quasimomentum::new(0.3, 0.4), TOL).unwrap();
        assert_eq!(r, DispersionResidual::FlatBranch);
    }

    #[test]
    fn classify_free_points() {
        let pi4 = std::f64::consts::PI.powi(4);
        assert_eq!(classify_lambda(&free(), pi4, TOL).unwrap(), SpectrumClassification::PurePoint);
        assert_eq!(
            classify_lambda(&free(), 1.0, TOL).unwrap(),
            SpectrumClassification::AbsolutelyContinuous
        );
        assert_eq!(classify_lambda(&free(), -10.0, TOL).unwrap(), SpectrumClassification::Gap);
    }

    #[test]
    fn solve_sheets_free_dirac_theta() {
        let lam_star = (std::f64::consts::PI / 2.0).powi(4);
        let roots = solve_sheets(&free(), theta_star(), (0.0, 200.0), 400, TOL).unwrap();
        assert_eq!(roots.len(), 1, "roots: {roots:?}");
        assert!((roots[0].lambda - lam_star).abs() < 1e-7 * lam_star);
        assert_eq!(roots[0].branch, 2);
    }

    #[test]
    fn solve_sheets_free_generic_theta() {
        // cos(lambda^{1/4}) = ±1/3 at theta = (pi, pi).
        let theta = Quasimomentum::new(std::f64::consts::PI, std::f64::consts::PI);
        let roots = solve_sheets(&free(), theta, (0.0, 100.0), 300, TOL).unwrap();
        let expect: Vec<f64> = [(1f64 / 3.0).acos(), (-1f64 / 3.0).acos()]
            .iter()
            .map(|mu| mu.powi(4))
            .collect();
        assert_eq!(roots.len(), 2, "roots: {roots:?}");
        for (r, e) in roots.iter().zip(expect) {
            assert!((r.lambda - e).abs() < 1e-7 * e.max(1.0), "{} vs {}", r.lambda, e);
            assert_eq!(r.branch, 2);
        }
    }

    #[test]
    fn dirac_scan_free_windows() {
        let pts = dirac_scan(&free(), (0.0, 100.0), 300, TOL).unwrap();
        assert_eq!(pts.len(), 1);
        let lam_star = (std::f64::consts::PI / 2.0).powi(4);
        assert!((pts[0].lambda_star - lam_star).abs() < 1e-6 * lam_star);
        assert_eq!(pts[0].branch, 2);
        assert_eq!(pts[0].cone_type, ConeType::TwoCone);

        let empty = dirac_scan(&free(), (0.0, 5.0), 100, TOL).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn fermi_free_classes() {
        assert_eq!(fermi_classify(&free(), 0.0, TOL).unwrap(), FermiClass::Reducible);
        assert_eq!(fermi_classify(&free(), 1.0, TOL).unwrap(), FermiClass::Irreducible);
        assert_eq!(fermi_classify(&free(), -10.0, TOL).unwrap(), FermiClass::Absent);
    }

    #[test]
    fn loop_state_residual_free_flat_bands() {
        let pi = std::f64::consts::PI;
        for n in [1.0f64, 2.0] {
            let lam = (n * pi).powi(4);
            let res = loop_state_residual(&free(), lam, TOL).unwrap();
            assert!(res < 1e-8, "loop residual at n={n}: {res}");
        }
    }

    #[test]
    fn loop_state_rejects_non_dirichlet() {
        match loop_state_residual(&free(), 1.0, TOL) {
            Err(SpectralError::NotDirichlet { .. }) => {}
            other => panic!("expected NotDirichlet, got {other:?}"),
        }
    }
}
