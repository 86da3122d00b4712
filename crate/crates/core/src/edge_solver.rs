//! Fundamental solutions and monodromy of the edge problem
//! u'''' + q(x)u = λu on [0, 1].
//!
//! The four fundamental solutions g_k carry Kronecker initial data
//! g_k^{(j-1)}(0) = δ_{jk}; the monodromy matrix M(λ) collects their
//! boundary states at x = 1 and propagates solution data across one
//! period. Everything downstream (Lyapunov branches, dispersion,
//! perturbation) reads off M(λ) or the φ-basis built here.

use nalgebra::{Matrix2, Matrix4, SVector, Vector4};

use crate::error::{Result, SpectralError};
use crate::ode::DormandPrince54;
use crate::potential::PeriodicPotential;
use crate::rootscan::{scan_roots, ScanOptions};

/// Default local tolerance of the adaptive integrator.
pub const DEFAULT_INTEGRATOR_TOL: f64 = 1e-10;
/// Default relative tolerance for root refinement.
pub const DEFAULT_ROOT_TOL: f64 = 1e-10;
/// Dirichlet membership: |indicator| below this fraction of its local
/// scale counts as membership in Σ^D.
pub const DIRICHLET_REL_THRESHOLD: f64 = 1e-8;

/// Solution data (u, u', u'', u''') at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StateVector {
    pub u: f64,
    pub du: f64,
    pub d2u: f64,
    pub d3u: f64,
}

impl StateVector {
    pub fn new(u: f64, du: f64, d2u: f64, d3u: f64) -> Self {
        Self { u, du, d2u, d3u }
    }

    pub fn from_vector(v: &Vector4<f64>) -> Self {
        Self { u: v[0], du: v[1], d2u: v[2], d3u: v[3] }
    }

    pub fn to_vector(self) -> Vector4<f64> {
        Vector4::new(self.u, self.du, self.d2u, self.d3u)
    }

    /// State of u(1-x) at 1-x₀ given the state of u at x₀: odd
    /// derivatives flip sign.
    pub fn reflected(self) -> Self {
        Self { u: self.u, du: -self.du, d2u: self.d2u, d3u: -self.d3u }
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.du.is_finite() && self.d2u.is_finite() && self.d3u.is_finite()
    }
}

/// States of all four fundamental solutions at one x.
#[derive(Debug, Clone, Copy)]
pub struct BasisSample {
    pub x: f64,
    pub states: [StateVector; 4],
}

/// The fundamental system at one energy: monodromy matrix plus an
/// optional dense tabulation along the edge.
#[derive(Debug, Clone)]
pub struct FundamentalBasis {
    pub lambda: f64,
    /// M[(j, k)] = g_{k+1}^{(j)}(1) (zero-indexed).
    pub monodromy: Matrix4<f64>,
    pub samples: Option<Vec<BasisSample>>,
    pub integrator_tolerance: f64,
}

impl FundamentalBasis {
    /// Boundary state of g_{k+1} at x = 1 (column k of the monodromy).
    pub fn column(&self, k: usize) -> StateVector {
        let c = self.monodromy.column(k);
        StateVector::new(c[0], c[1], c[2], c[3])
    }
}

fn companion_rhs(q: &PeriodicPotential, lambda: f64) -> impl Fn(f64, &SVector<f64, 16>) -> SVector<f64, 16> + '_ {
    move |x, y| {
        let qv = q.eval_unchecked(x.clamp(0.0, 1.0));
        let mut out = SVector::<f64, 16>::zeros();
        for col in 0..4 {
            let o = 4 * col;
            out[o] = y[o + 1];
            out[o + 1] = y[o + 2];
            out[o + 2] = y[o + 3];
            out[o + 3] = (lambda - qv) * y[o];
        }
        out
    }
}

fn identity_initial_data() -> SVector<f64, 16> {
    let mut y0 = SVector::<f64, 16>::zeros();
    for col in 0..4 {
        y0[4 * col + col] = 1.0;
    }
    y0
}

/// Integrate the four fundamental solutions across the edge.
pub fn integrate_fundamental(q: &PeriodicPotential, lambda: f64, tol: f64) -> Result<FundamentalBasis> {
    integrate_fundamental_inner(q, lambda, tol, None)
}

/// Like [`integrate_fundamental`], additionally tabulating the basis on a
/// uniform grid of `sample_count` points (endpoints included).
pub fn integrate_fundamental_sampled(
    q: &PeriodicPotential,
    lambda: f64,
    tol: f64,
    sample_count: usize,
) -> Result<FundamentalBasis> {
    integrate_fundamental_inner(q, lambda, tol, Some(sample_count.max(2)))
}

fn integrate_fundamental_inner(
    q: &PeriodicPotential,
    lambda: f64,
    tol: f64,
    sample_count: Option<usize>,
) -> Result<FundamentalBasis> {
    if !(tol > 0.0) {
        return Err(SpectralError::InvalidParameter {
            name: "tol",
            reason: format!("integrator tolerance must be positive, got {tol}"),
        });
    }
    let dp = DormandPrince54 { abs_tol: tol, rel_tol: tol };
    let rhs = companion_rhs(q, lambda);
    let map_err = |e: crate::ode::StepUnderflow| SpectralError::StepSizeUnderflow { lambda, x: e.x };

    let (yfinal, samples) = match sample_count {
        None => (dp.integrate(rhs, 0.0, 1.0, identity_initial_data()).map_err(map_err)?, None),
        Some(count) => {
            let xs: Vec<f64> = (0..count).map(|i| i as f64 / (count - 1) as f64).collect();
            let mut samples = Vec::with_capacity(count);
            let y = dp
                .integrate_with_checkpoints(rhs, 0.0, 1.0, identity_initial_data(), &xs, |x, y| {
                    let mut states = [StateVector::default(); 4];
                    for (col, state) in states.iter_mut().enumerate() {
                        *state = StateVector::new(y[4 * col], y[4 * col + 1], y[4 * col + 2], y[4 * col + 3]);
                    }
                    samples.push(BasisSample { x, states });
                })
                .map_err(map_err)?;
            (y, Some(samples))
        }
    };

    let monodromy = Matrix4::from_column_slice(yfinal.as_slice());
    Ok(FundamentalBasis { lambda, monodromy, samples, integrator_tolerance: tol })
}

/// The Wronskian bilinear form 𝒲(a, b) = a‴b − a″b′ + a′b″ − ab‴.
pub fn wronskian(a: &StateVector, b: &StateVector) -> f64 {
    a.d3u * b.u - a.d2u * b.du + a.du * b.d2u - a.u * b.d3u
}

/// Constant matrix J of the Wronskian form: 𝒲(a, b) = aᵀ J b.
/// M(λ) satisfies MᵀJM = J because 𝒲 of two solutions is x-independent.
pub fn wronskian_form() -> Matrix4<f64> {
    #[rustfmt::skip]
    let j = Matrix4::new(
        0.0, 0.0, 0.0, -1.0,
        0.0, 0.0, 1.0, 0.0,
        0.0, -1.0, 0.0, 0.0,
        1.0, 0.0, 0.0, 0.0,
    );
    j
}

/// Dirichlet-type matrix [[g₂(1), g₄(1)], [g₂″(1), g₄″(1)]].
///
/// g₂ and g₄ span the solutions with u(0) = u″(0) = 0, so this matrix is
/// singular exactly when the boundary problem u(0)=u″(0)=u(1)=u″(1)=0 has
/// a nontrivial solution.
pub fn dirichlet_matrix(basis: &FundamentalBasis) -> Matrix2<f64> {
    let m = &basis.monodromy;
    Matrix2::new(m[(0, 1)], m[(0, 3)], m[(2, 1)], m[(2, 3)])
}

/// Membership indicator for the Dirichlet spectrum Σ^D: zero exactly on Σ^D.
pub fn dirichlet_indicator(q: &PeriodicPotential, lambda: f64, tol: f64) -> Result<f64> {
    let basis = integrate_fundamental(q, lambda, tol)?;
    Ok(dirichlet_matrix(&basis).determinant())
}

/// Σ^D membership at the library's numerical cutoff: |indicator| below
/// [`DIRICHLET_REL_THRESHOLD`] relative to the indicator's scale over a
/// λ-neighborhood wide enough to see its oscillation (half-width
/// max(1, 0.1·|λ|), 21 samples).
pub fn in_dirichlet_spectrum(q: &PeriodicPotential, lambda: f64, tol: f64) -> Result<bool> {
    let value = dirichlet_indicator(q, lambda, tol)?.abs();
    let half_width = (0.1 * lambda.abs()).max(1.0);
    let mut scale = value;
    for i in 0..=20 {
        let x = lambda - half_width + i as f64 * (half_width / 10.0);
        scale = scale.max(dirichlet_indicator(q, x, tol)?.abs());
    }
    Ok(value < DIRICHLET_REL_THRESHOLD * scale.max(f64::MIN_POSITIVE))
}

/// All points of Σ^D in (0, lambda_max], by sign-change bracketing plus
/// tangential-minimum refinement on `grid` subintervals.
pub fn dirichlet_spectrum_scan(
    q: &PeriodicPotential,
    lambda_max: f64,
    grid: usize,
    tol: f64,
) -> Result<Vec<f64>> {
    if !(lambda_max > 0.0) {
        return Err(SpectralError::InvalidParameter {
            name: "lambda_max",
            reason: format!("must be positive, got {lambda_max}"),
        });
    }
    if grid < 2 {
        return Err(SpectralError::InvalidParameter {
            name: "grid",
            reason: format!("need at least 2 subintervals, got {grid}"),
        });
    }
    let f = |lam: f64| dirichlet_indicator(q, lam, tol).unwrap_or(f64::NAN);
    let opts = ScanOptions { rel_tol: DEFAULT_ROOT_TOL, tangential_threshold: DIRICHLET_REL_THRESHOLD, absolute_floor: 0.0 };
    let roots = scan_roots(f, 0.0, lambda_max, grid, opts);
    Ok(roots.into_iter().map(|r| r.x).filter(|&x| x > 1e-12 * lambda_max.max(1.0)).collect())
}

/// Null direction (c₂, c₄) of the Dirichlet matrix; the eigenfunction is
/// c₂g₂ + c₄g₄, normalized to a unit coefficient vector.
pub fn dirichlet_null_vector(basis: &FundamentalBasis) -> (f64, f64) {
    let m = dirichlet_matrix(basis);
    let (a, b) = (m[(0, 0)], m[(0, 1)]);
    let (c, d) = (m[(1, 0)], m[(1, 1)]);
    let (x, y) = if a * a + b * b >= c * c + d * d { (-b, a) } else { (-d, c) };
    let n = (x * x + y * y).sqrt();
    if n == 0.0 {
        (1.0, 0.0)
    } else {
        (x / n, y / n)
    }
}

/// The boundary-value basis φ₁..φ₄ of the edge problem at λ ∉ Σ^D.
///
/// Each φ_k pins one of the four boundary values u(0), u″(0), u(1), u″(1)
/// to 1 and the rest to 0. Stored as g-basis coefficients together with
/// the full boundary states at both endpoints.
#[derive(Debug, Clone)]
pub struct PhiBasis {
    pub lambda: f64,
    /// Column k holds the g-basis coefficients of φ_{k+1}.
    pub g_coefficients: Matrix4<f64>,
    pub at0: [StateVector; 4],
    pub at1: [StateVector; 4],
}

impl PhiBasis {
    /// Matrix Φ₀(x) = [[φ₁'(x), φ₂'(x)], [φ₁'''(x), φ₂'''(x)]] for x ∈ {0, 1}.
    pub fn phi0(&self, at_one: bool) -> Matrix2<f64> {
        let s = if at_one { &self.at1 } else { &self.at0 };
        Matrix2::new(s[0].du, s[1].du, s[0].d3u, s[1].d3u)
    }

    /// Matrix Φ₁(x) = [[φ₁'(x), 2φ₂'(x)], [0, φ₂'''(x)]] for x ∈ {0, 1}.
    pub fn phi1(&self, at_one: bool) -> Matrix2<f64> {
        let s = if at_one { &self.at1 } else { &self.at0 };
        Matrix2::new(s[0].du, 2.0 * s[1].du, 0.0, s[1].d3u)
    }
}

/// Construct the φ-basis by solving the boundary-value system in the
/// g-basis. Fails with a singular-basis error on Σ^D.
pub fn phi_basis(q: &PeriodicPotential, lambda: f64, tol: f64) -> Result<PhiBasis> {
    let basis = integrate_fundamental(q, lambda, tol)?;
    phi_basis_from(&basis, q, tol)
}

/// φ-basis from an already computed fundamental system, with the full
/// Σ^D membership guard.
pub fn phi_basis_from(basis: &FundamentalBasis, q: &PeriodicPotential, tol: f64) -> Result<PhiBasis> {
    if in_dirichlet_spectrum(q, basis.lambda, tol)? {
        return Err(SpectralError::SingularBasis { lambda: basis.lambda });
    }
    phi_basis_unchecked(basis)
}

/// φ-basis without the membership scan: the boundary solve itself guards
/// against exact Σ^D hits (its determinant is the Dirichlet indicator).
/// Sweeps use this; values very close to Σ^D come out large and are
/// filtered by the callers' relative acceptance checks.
pub fn phi_basis_unchecked(basis: &FundamentalBasis) -> Result<PhiBasis> {
    let m = &basis.monodromy;
    let d = dirichlet_matrix(basis);
    let row0 = (d[(0, 0)] * d[(0, 0)] + d[(0, 1)] * d[(0, 1)]).sqrt();
    let row1 = (d[(1, 0)] * d[(1, 0)] + d[(1, 1)] * d[(1, 1)]).sqrt();
    if d.determinant().abs() <= 1e-14 * (row0 * row1).max(f64::MIN_POSITIVE) {
        return Err(SpectralError::SingularBasis { lambda: basis.lambda });
    }
    // Rows: u(0), u''(0), u(1), u''(1) applied to g-basis coefficients.
    #[rustfmt::skip]
    let boundary_map = Matrix4::new(
        1.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 1.0, 0.0,
        m[(0, 0)], m[(0, 1)], m[(0, 2)], m[(0, 3)],
        m[(2, 0)], m[(2, 1)], m[(2, 2)], m[(2, 3)],
    );
    let coeffs = boundary_map
        .lu()
        .solve(&Matrix4::identity())
        .ok_or(SpectralError::SingularBasis { lambda: basis.lambda })?;

    let mut at0 = [StateVector::default(); 4];
    let mut at1 = [StateVector::default(); 4];
    let m_coeffs = m * coeffs;
    for k in 0..4 {
        // Initial data in the g-basis is the coefficient vector itself.
        at0[k] = StateVector::from_vector(&coeffs.column(k).into_owned());
        at1[k] = StateVector::from_vector(&m_coeffs.column(k).into_owned());
    }
    Ok(PhiBasis { lambda: basis.lambda, g_coefficients: coeffs, at0, at1 })
}

/// 𝒟(f, g) = f'(0)g'''(1) − g'(1)f'''(0), given f's state at 0 and g's at 1.
pub fn phi_pairing(f_at0: &StateVector, g_at1: &StateVector) -> f64 {
    f_at0.du * g_at1.d3u - g_at1.du * f_at0.d3u
}

/// Reconstruct the coefficients of g₁..g₄ in the φ-basis from φ-boundary
/// data alone. Inverse companion to [`phi_basis`]: composing the two
/// recovers the identity on boundary data.
///
/// Note the coefficient of φ₄ in g₃ is −𝒟(φ₂, φ₁)/det Φ₀(1); the pairing
/// 𝒟 is not antisymmetric, so the order matters.
pub fn g_in_phi_basis(phi: &PhiBasis) -> Matrix4<f64> {
    let f1_0 = &phi.at0[0];
    let f1_1 = &phi.at1[0];
    let f2_0 = &phi.at0[1];
    let f2_1 = &phi.at1[1];
    let det = phi.phi0(true).determinant();

    let d11 = phi_pairing(f1_0, f1_1);
    let d12 = phi_pairing(f1_0, f2_1);
    let d21 = phi_pairing(f2_0, f1_1);
    let d22 = phi_pairing(f2_0, f2_1);

    // Columns: coefficients of g₁..g₄ in (φ₁, φ₂, φ₃, φ₄).
    #[rustfmt::skip]
    let g = Matrix4::new(
        1.0,          0.0,            0.0,          0.0,
        0.0,          0.0,            1.0,          0.0,
        d12 / det,   -f1_1.du / det,  d22 / det,    f2_1.du / det,
        -d11 / det,   f1_1.d3u / det, -d21 / det,  -f1_1.du / det,
    );
    g
}
