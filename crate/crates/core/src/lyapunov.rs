//! Lyapunov branches and the real-line band structure of the periodic
//! fourth-order operator.
//!
//! T₁ and T₂ are the symmetric functions of the two multiplier pairs of
//! the monodromy matrix; the branches Δ_{1,2} = T₁ ± √T₂ classify the
//! spectrum: λ is in σ(ℋ^per) iff T₂ ≥ 0 and some Δ_k ∈ [−1, 1]. Band
//! edges are periodic/anti-periodic eigenvalues or resonances (zeros of
//! T₂), which are typically tangential zeros of their indicators.

use nalgebra::Matrix2;

use crate::edge_solver::{
    in_dirichlet_spectrum, integrate_fundamental, FundamentalBasis, DEFAULT_INTEGRATOR_TOL,
    DEFAULT_ROOT_TOL,
};
use crate::error::{Result, SpectralError};
use crate::potential::PeriodicPotential;
use crate::rootscan::{scan_roots, ScanOptions};

/// Default lower end of spectral scans; σ(ℋ) is bounded below, and for
/// the potentials handled here the bottom sits well above this.
pub const DEFAULT_LAMBDA_MIN: f64 = -50.0;

/// Round-off clamp: T₂ in (−1e−12, 0) is treated as 0 so that resonance
/// touchpoints do not fragment bands.
pub const T2_CLAMP: f64 = 1e-12;

/// Tolerance for matching a band edge to a periodic/anti-periodic or
/// resonance root: 1e−6·max(1, |λ|).
pub const EDGE_MATCH_REL_TOL: f64 = 1e-6;

/// T₁, T₂ and the Lyapunov branches at one energy.
#[derive(Debug, Clone, Copy)]
pub struct LyapunovValues {
    pub lambda: f64,
    pub t1: f64,
    pub t2: f64,
    /// Δ₁ = T₁ + √T₂, defined when T₂ ≥ 0 (after the round-off clamp).
    pub delta1: Option<f64>,
    /// Δ₂ = T₁ − √T₂.
    pub delta2: Option<f64>,
}

impl LyapunovValues {
    fn from_t(lambda: f64, t1: f64, t2_raw: f64) -> Self {
        let t2 = if t2_raw < 0.0 && t2_raw > -T2_CLAMP { 0.0 } else { t2_raw };
        let (delta1, delta2) = if t2 >= 0.0 {
            let s = t2.sqrt();
            (Some(t1 + s), Some(t1 - s))
        } else {
            (None, None)
        };
        Self { lambda, t1, t2, delta1, delta2 }
    }

    /// Some branch lies in [−1, 1]: λ belongs to σ(ℋ^per).
    pub fn in_spectrum(&self) -> bool {
        self.branch_in(|d| (-1.0..=1.0).contains(&d))
    }

    /// Both branches lie strictly inside (−1, 1): multiplicity 4.
    pub fn both_strictly_inside(&self) -> bool {
        match (self.delta1, self.delta2) {
            (Some(d1), Some(d2)) => d1.abs() < 1.0 && d2.abs() < 1.0,
            _ => false,
        }
    }

    fn branch_in(&self, pred: impl Fn(f64) -> bool) -> bool {
        self.delta1.map(&pred).unwrap_or(false) || self.delta2.map(&pred).unwrap_or(false)
    }
}

/// 𝔾₀(λ) read off the monodromy columns for g₁ and g₃.
pub fn g0_from_basis(basis: &FundamentalBasis) -> Matrix2<f64> {
    let m = &basis.monodromy;
    Matrix2::new(m[(0, 0)], m[(0, 2)], m[(2, 0)], m[(2, 2)])
}

/// T₁/T₂/Δ from the 𝔾₀ route; total in λ (no Σ^D guard).
pub fn lyapunov_values_unchecked(q: &PeriodicPotential, lambda: f64, tol: f64) -> Result<LyapunovValues> {
    let basis = integrate_fundamental(q, lambda, tol)?;
    Ok(lyapunov_from_g0(&basis))
}

/// T₁/T₂/Δ from an already integrated fundamental system.
pub fn lyapunov_from_g0(basis: &FundamentalBasis) -> LyapunovValues {
    let g0 = g0_from_basis(basis);
    let t1 = g0.trace() / 2.0;
    let t2 = g0.trace() * g0.trace() / 4.0 - g0.determinant();
    LyapunovValues::from_t(basis.lambda, t1, t2)
}

/// T₁/T₂ at λ, with the Σ^D guard of the dispersion theory: on the
/// Dirichlet spectrum the 𝔾₀ route loses its multiplier meaning, so the
/// caller is pointed at [`lyapunov_from_monodromy_traces`] instead.
pub fn lyapunov_values(q: &PeriodicPotential, lambda: f64) -> Result<LyapunovValues> {
    let tol = DEFAULT_INTEGRATOR_TOL;
    if in_dirichlet_spectrum(q, lambda, tol)? {
        return Err(SpectralError::SingularBasis { lambda });
    }
    lyapunov_values_unchecked(q, lambda, tol)
}

/// Independent route through monodromy traces: T₁ = tr(M)/4 and
/// T₂ = (2·tr(M²) + 8 − tr²(M))/16, from the multiplier pairing
/// tr M = 2(Δ₁+Δ₂), tr M² = 4(Δ₁²+Δ₂²) − 4.
pub fn lyapunov_from_monodromy_traces(basis: &FundamentalBasis) -> LyapunovValues {
    let m = &basis.monodromy;
    let tr = m.trace();
    let tr2 = (m * m).trace();
    let t1 = tr / 4.0;
    let t2 = (2.0 * tr2 + 8.0 - tr * tr) / 16.0;
    LyapunovValues::from_t(basis.lambda, t1, t2)
}

/// Periodic and anti-periodic indicator functions D_±(λ) = det(M ∓ I)/4.
pub fn periodic_indicator(basis: &FundamentalBasis) -> f64 {
    (basis.monodromy - nalgebra::Matrix4::identity()).determinant() / 4.0
}

pub fn antiperiodic_indicator(basis: &FundamentalBasis) -> f64 {
    (basis.monodromy + nalgebra::Matrix4::identity()).determinant() / 4.0
}

fn scan_indicator_roots(
    q: &PeriodicPotential,
    lo: f64,
    hi: f64,
    grid: usize,
    tol: f64,
    pick: impl Fn(&FundamentalBasis) -> f64,
) -> Vec<f64> {
    let f = |lam: f64| integrate_fundamental(q, lam, tol).map(|b| pick(&b)).unwrap_or(f64::NAN);
    let opts = ScanOptions { rel_tol: DEFAULT_ROOT_TOL, tangential_threshold: 1e-8, absolute_floor: 0.0 };
    scan_roots(f, lo, hi, grid, opts).into_iter().map(|r| r.x).collect()
}

/// Eigenvalues of the periodic and anti-periodic edge problems in
/// (DEFAULT_LAMBDA_MIN, lambda_max], as (periodic, anti-periodic).
/// Periodic eigenvalues where a band closes are double roots of D_±, so
/// the scan refines tangential minima as well as sign changes.
pub fn periodic_antiperiodic_eigenvalues(
    q: &PeriodicPotential,
    lambda_max: f64,
    grid: usize,
    tol: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    periodic_antiperiodic_in(q, DEFAULT_LAMBDA_MIN, lambda_max, grid, tol)
}

/// Same scan over an explicit window.
pub fn periodic_antiperiodic_in(
    q: &PeriodicPotential,
    lo: f64,
    hi: f64,
    grid: usize,
    tol: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(hi > lo) {
        return Err(SpectralError::InvalidParameter {
            name: "lambda_range",
            reason: format!("empty window [{lo}, {hi}]"),
        });
    }
    let per = scan_indicator_roots(q, lo, hi, grid, tol, periodic_indicator);
    let anti = scan_indicator_roots(q, lo, hi, grid, tol, antiperiodic_indicator);
    Ok((per, anti))
}

/// An interval on which T₂ < 0 between two real resonances.
#[derive(Debug, Clone, Copy)]
pub struct ResonanceGap {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone)]
pub struct ResonanceScan {
    /// Real zeros of T₂ in the window.
    pub zeros: Vec<f64>,
    /// Maximal T₂ < 0 intervals delimited by in-window zeros.
    pub gaps: Vec<ResonanceGap>,
}

/// Real resonances (zeros of T₂) and resonance gaps in the window.
pub fn resonance_scan(
    q: &PeriodicPotential,
    range: (f64, f64),
    grid: usize,
    tol: f64,
) -> Result<ResonanceScan> {
    let (lo, hi) = range;
    if !(hi > lo) {
        return Err(SpectralError::InvalidParameter {
            name: "lambda_range",
            reason: format!("empty window [{lo}, {hi}]"),
        });
    }
    let t2_at = |lam: f64| {
        lyapunov_values_unchecked(q, lam, tol).map(|v| v.t2).unwrap_or(f64::NAN)
    };
    let opts = ScanOptions { rel_tol: DEFAULT_ROOT_TOL, tangential_threshold: 1e-8, absolute_floor: 0.0 };
    let zeros: Vec<f64> = scan_roots(&t2_at, lo, hi, grid, opts).into_iter().map(|r| r.x).collect();
    let mut gaps = Vec::new();
    for pair in zeros.windows(2) {
        let mid = 0.5 * (pair[0] + pair[1]);
        if t2_at(mid) < 0.0 {
            gaps.push(ResonanceGap { lo: pair[0], hi: pair[1] });
        }
    }
    Ok(ResonanceScan { zeros, gaps })
}

/// Branch values tabulated on a uniform λ-grid. The Lyapunov branches do
/// not depend on Θ, so one table serves a whole quasimomentum sweep:
/// brackets come from the table, refinement re-evaluates live.
#[derive(Debug, Clone)]
pub struct LyapunovTable {
    pub lambdas: Vec<f64>,
    pub values: Vec<LyapunovValues>,
}

pub fn lyapunov_table(
    q: &PeriodicPotential,
    range: (f64, f64),
    grid: usize,
    tol: f64,
) -> Result<LyapunovTable> {
    let (lo, hi) = range;
    if !(hi > lo) || grid < 2 {
        return Err(SpectralError::InvalidParameter {
            name: "lambda_range",
            reason: format!("invalid window [{lo}, {hi}] with grid {grid}"),
        });
    }
    let mut lambdas = Vec::with_capacity(grid + 1);
    let mut values = Vec::with_capacity(grid + 1);
    for i in 0..=grid {
        let lam = lo + (hi - lo) * i as f64 / grid as f64;
        lambdas.push(lam);
        values.push(lyapunov_values_unchecked(q, lam, tol)?);
    }
    Ok(LyapunovTable { lambdas, values })
}

impl LyapunovTable {
    pub fn branch(&self, i: usize, branch: u8) -> Option<f64> {
        let v = &self.values[i];
        if branch == 1 {
            v.delta1
        } else {
            v.delta2
        }
    }
}

/// What a band edge coincides with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Periodic,
    Antiperiodic,
    Resonance,
    ScanBoundary,
}

impl EdgeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EdgeKind::Periodic => "periodic",
            EdgeKind::Antiperiodic => "antiperiodic",
            EdgeKind::Resonance => "resonance",
            EdgeKind::ScanBoundary => "scan-boundary",
        }
    }
}

/// A maximal interval of constant spectral multiplicity.
#[derive(Debug, Clone, Copy)]
pub struct SpectralBand {
    pub lo: f64,
    pub hi: f64,
    /// 2 or 4.
    pub multiplicity: u8,
    pub edge_lo: EdgeKind,
    pub edge_hi: EdgeKind,
}

#[derive(Debug, Clone)]
pub struct BandStructure {
    pub bands: Vec<SpectralBand>,
    /// Maximal subintervals of the window with no spectrum.
    pub gaps: Vec<(f64, f64)>,
}

fn classify_point(v: &LyapunovValues) -> Option<u8> {
    if !v.in_spectrum() {
        None
    } else if v.both_strictly_inside() {
        Some(4)
    } else {
        Some(2)
    }
}

/// Signed margin whose zero crossings are edges of the spectrum:
/// positive inside σ(ℋ^per), negative outside.
fn spectrum_margin(v: &LyapunovValues) -> f64 {
    match (v.delta1, v.delta2) {
        (Some(d1), Some(d2)) => (1.0 - d1.abs()).max(1.0 - d2.abs()),
        _ => -1.0 - (-v.t2).max(0.0),
    }
}

/// Margin for the multiplicity-4 region: positive iff both branches are
/// strictly inside (−1, 1).
fn mult4_margin(v: &LyapunovValues) -> f64 {
    match (v.delta1, v.delta2) {
        (Some(d1), Some(d2)) => (1.0 - d1.abs()).min(1.0 - d2.abs()),
        _ => -1.0 - (-v.t2).max(0.0),
    }
}

/// Classify the window into spectral bands (with multiplicity) and gaps.
pub fn real_line_band_structure(
    q: &PeriodicPotential,
    range: (f64, f64),
    grid: usize,
    tol: f64,
) -> Result<BandStructure> {
    let (lo, hi) = range;
    if !(hi > lo) {
        return Err(SpectralError::InvalidParameter {
            name: "lambda_range",
            reason: format!("empty window [{lo}, {hi}]"),
        });
    }
    if grid < 2 {
        return Err(SpectralError::InvalidParameter {
            name: "grid",
            reason: format!("need at least 2 subintervals, got {grid}"),
        });
    }

    let values = |lam: f64| lyapunov_values_unchecked(q, lam, tol);
    let h = (hi - lo) / grid as f64;
    let mut status = Vec::with_capacity(grid + 1);
    for i in 0..=grid {
        let lam = lo + i as f64 * h;
        status.push(classify_point(&values(lam)?));
    }

    // Refine a status change inside one grid cell by bisecting the margin
    // whose sign distinguishes the two sides.
    let refine = |a: f64, b: f64, margin: &dyn Fn(&LyapunovValues) -> f64| -> f64 {
        let f = |lam: f64| values(lam).map(|v| margin(&v)).unwrap_or(f64::NAN);
        crate::rootscan::bisect(f, a, b, DEFAULT_ROOT_TOL)
    };

    // Root lists used to label interior edges.
    let (per_roots, anti_roots) = periodic_antiperiodic_in(q, lo, hi, grid, tol)?;
    let res_roots = resonance_scan(q, (lo, hi), grid, tol)?.zeros;
    let label = |x: f64| -> EdgeKind {
        let tol_match = EDGE_MATCH_REL_TOL * x.abs().max(1.0);
        let nearest = |roots: &[f64]| {
            roots
                .iter()
                .map(|&r| (r - x).abs())
                .min_by(f64::total_cmp)
                .unwrap_or(f64::INFINITY)
        };
        let candidates = [
            (nearest(&per_roots), EdgeKind::Periodic),
            (nearest(&anti_roots), EdgeKind::Antiperiodic),
            (nearest(&res_roots), EdgeKind::Resonance),
        ];
        candidates
            .iter()
            .filter(|(d, _)| *d <= tol_match)
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, k)| *k)
            .unwrap_or(EdgeKind::ScanBoundary)
    };

    let boundary_tol = 1e-9 * (hi - lo);
    let mut bands: Vec<SpectralBand> = Vec::new();
    let mut i = 0usize;
    while i <= grid {
        if status[i].is_none() {
            i += 1;
            continue;
        }
        let mult = status[i].unwrap();
        let run_start = i;
        let mut j = i;
        while j + 1 <= grid && status[j + 1] == Some(mult) {
            j += 1;
        }
        // Left edge.
        let left = if run_start == 0 {
            lo
        } else {
            let a = lo + (run_start - 1) as f64 * h;
            let b = lo + run_start as f64 * h;
            match status[run_start - 1] {
                None => refine(a, b, &spectrum_margin),
                Some(_) => refine(a, b, &mult4_margin),
            }
        };
        // Right edge.
        let right = if j == grid {
            hi
        } else {
            let a = lo + j as f64 * h;
            let b = lo + (j + 1) as f64 * h;
            match status[j + 1] {
                None => refine(a, b, &spectrum_margin),
                Some(_) => refine(a, b, &mult4_margin),
            }
        };
        if right - left > boundary_tol.max(1e-12) {
            let edge_lo = if (left - lo).abs() <= boundary_tol { EdgeKind::ScanBoundary } else { label(left) };
            let edge_hi = if (right - hi).abs() <= boundary_tol { EdgeKind::ScanBoundary } else { label(right) };
            bands.push(SpectralBand { lo: left, hi: right, multiplicity: mult, edge_lo, edge_hi });
        }
        i = j + 1;
    }

    // Gaps: complement of the band cover inside the window.
    let mut gaps = Vec::new();
    let mut cursor = lo;
    for b in &bands {
        if b.lo - cursor > boundary_tol {
            gaps.push((cursor, b.lo));
        }
        cursor = cursor.max(b.hi);
    }
    if hi - cursor > boundary_tol {
        gaps.push((cursor, hi));
    }

    Ok(BandStructure { bands, gaps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn free() -> PeriodicPotential {
        PeriodicPotential::free()
    }

    #[test]
    fn free_t1_t2_closed_forms() {
        let v = lyapunov_values(&free(), 1.0).unwrap();
        let (ch, co) = (1f64.cosh(), 1f64.cos());
        assert_abs_diff_eq!(v.t1, 0.5 * (ch + co), epsilon = 1e-10);
        assert_abs_diff_eq!(v.t2, 0.25 * (ch - co) * (ch - co), epsilon = 1e-10);
        assert_abs_diff_eq!(v.delta1.unwrap(), ch, epsilon = 1e-9);
        assert_abs_diff_eq!(v.delta2.unwrap(), co, epsilon = 1e-9);
    }

    #[test]
    fn free_branches_meet_at_zero() {
        let v = lyapunov_values_unchecked(&free(), 0.0, 1e-10).unwrap();
        assert_abs_diff_eq!(v.delta1.unwrap(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(v.delta2.unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn free_delta2_zero_at_quarter_pi_energy() {
        let lam = (std::f64::consts::PI / 2.0).powi(4);
        let v = lyapunov_values(&free(), lam).unwrap();
        assert_abs_diff_eq!(v.delta2.unwrap(), 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(v.delta1.unwrap(), (std::f64::consts::PI / 2.0).cosh(), epsilon = 1e-9);
    }

    #[test]
    fn branch_sum_product_identities() {
        let q = PeriodicPotential::new(vec![2.0, -0.7]).unwrap();
        for lam in [0.5, 13.0, 222.0] {
            let v = lyapunov_values_unchecked(&q, lam, 1e-10).unwrap();
            if let (Some(d1), Some(d2)) = (v.delta1, v.delta2) {
                assert!(d1 >= d2);
                assert_abs_diff_eq!(d1 + d2, 2.0 * v.t1, epsilon = 1e-10);
                assert_abs_diff_eq!(d1 * d2, v.t1 * v.t1 - v.t2, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn trace_route_matches_g0_route() {
        let q = PeriodicPotential::new(vec![1.3, 0.2]).unwrap();
        for lam in [3.0, 80.0, -20.0] {
            let basis = integrate_fundamental(&q, lam, 1e-10).unwrap();
            let a = lyapunov_from_g0(&basis);
            let b = lyapunov_from_monodromy_traces(&basis);
            assert_abs_diff_eq!(a.t1, b.t1, epsilon = 1e-8);
            assert_abs_diff_eq!(a.t2, b.t2, epsilon = 1e-7 * a.t2.abs().max(1.0));
        }
    }

    #[test]
    fn periodic_antiperiodic_free_eigenvalues() {
        let pi = std::f64::consts::PI;
        let (per, anti) = periodic_antiperiodic_eigenvalues(&free(), 2000.0, 1200, 1e-10).unwrap();
        assert!(per.iter().any(|&x| x.abs() < 1e-6), "periodic root at 0 missing: {per:?}");
        assert!(
            per.iter().any(|&x| (x - 16.0 * pi.powi(4)).abs() < 1e-5 * 16.0 * pi.powi(4)),
            "periodic root at 16 pi^4 missing: {per:?}"
        );
        assert!(
            anti.iter().any(|&x| (x - pi.powi(4)).abs() < 1e-6 * pi.powi(4)),
            "anti-periodic root at pi^4 missing: {anti:?}"
        );
    }

    #[test]
    fn resonance_scan_free() {
        let scan = resonance_scan(&free(), (-10.0, 100.0), 400, 1e-10).unwrap();
        assert_eq!(scan.zeros.len(), 1, "zeros: {:?}", scan.zeros);
        assert!(scan.zeros[0].abs() < 1e-6);
        assert!(scan.gaps.is_empty());
        let positive = resonance_scan(&free(), (1.0, 100.0), 300, 1e-10).unwrap();
        assert!(positive.zeros.is_empty());
    }

    #[test]
    fn free_band_structure_is_single_band() {
        let bs = real_line_band_structure(&free(), (0.0, 1000.0), 400, 1e-10).unwrap();
        assert_eq!(bs.bands.len(), 1, "bands: {:?}", bs.bands);
        let band = bs.bands[0];
        assert_abs_diff_eq!(band.lo, 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(band.hi, 1000.0, epsilon = 1e-6);
        assert_eq!(band.multiplicity, 2);
        assert_eq!(band.edge_lo, EdgeKind::ScanBoundary);
        assert_eq!(band.edge_hi, EdgeKind::ScanBoundary);
        assert!(bs.gaps.is_empty());
    }
}
