//! Grid scanning for real roots of smooth scalar functions.
//!
//! Spectral indicators here (periodic/anti-periodic determinants, the
//! Dirichlet indicator, T₂) routinely have *tangential* zeros — double
//! roots that never change sign — so a plain bracketing pass is not
//! enough. The scanner combines sign-change bisection with refinement of
//! local minima of |f|, accepting a tangential root when the residual is
//! small relative to the indicator's local scale.

/// How a root was located.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootKind {
    SignChange,
    Tangential,
}

#[derive(Debug, Clone, Copy)]
pub struct ScannedRoot {
    pub x: f64,
    pub kind: RootKind,
}

#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    /// Relative x-tolerance for bisection and minimum refinement.
    pub rel_tol: f64,
    /// Accept a refined |f|-minimum as a root when it is below this
    /// fraction of the local scale of |f|.
    pub tangential_threshold: f64,
    /// Also accept refined minima below this absolute level: the
    /// evaluation noise floor of f. Matters for bounded functions whose
    /// local scale near a quadratic touch is itself tiny.
    pub absolute_floor: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, tangential_threshold: 1e-8, absolute_floor: 0.0 }
    }
}

fn x_tol(x: f64, rel_tol: f64) -> f64 {
    rel_tol * x.abs().max(1.0)
}

/// Bisect a bracketing interval to relative tolerance.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, rel_tol: f64) -> f64 {
    let mut fa = f(a);
    if fa == 0.0 {
        return a;
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if (b - a).abs() <= x_tol(mid, rel_tol) {
            return mid;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fa > 0.0) != (fm > 0.0) {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Safeguarded secant refinement inside a sign-change bracket: secant
/// steps while they stay in the bracket and shrink it, bisection
/// otherwise. Cheaper than plain bisection when evaluations are costly.
pub fn refine_bracket<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    rel_tol: f64,
) -> f64 {
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if (b - a).abs() <= x_tol(mid, rel_tol) {
            return mid;
        }
        let secant = if fb != fa { b - fb * (b - a) / (fb - fa) } else { mid };
        let margin = 0.01 * (b - a).abs();
        let x = if secant > a + margin && secant < b - margin { secant } else { mid };
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if (fa > 0.0) != (fx > 0.0) {
            b = x;
            fb = fx;
        } else {
            a = x;
            fa = fx;
        }
    }
    0.5 * (a + b)
}

/// Golden-section minimization of |f| on [a, b]; returns (x_min, |f(x_min)|).
pub fn minimize_abs<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> (f64, f64) {
    refine_abs_minimum(f, a, b, rel_tol)
}

fn refine_abs_minimum<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, rel_tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c).abs();
    let mut fd = f(d).abs();
    for _ in 0..200 {
        if (b - a).abs() <= x_tol(0.5 * (a + b), rel_tol) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c).abs();
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d).abs();
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Find roots of `f` on [lo, hi] using `grid` subintervals.
///
/// Sign changes are bisected; non-sign-changing local minima of |f| are
/// refined and kept when the residual drops below
/// `tangential_threshold` times the local scale of |f| (the max of |f|
/// over a few neighboring grid cells).
pub fn scan_roots<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, grid: usize, opts: ScanOptions) -> Vec<ScannedRoot> {
    assert!(grid >= 2, "scan grid must have at least 2 subintervals");
    assert!(hi > lo, "empty scan window");
    let n = grid;
    let h = (hi - lo) / n as f64;
    let xs: Vec<f64> = (0..=n).map(|i| lo + i as f64 * h).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();

    let local_scale = |i: usize| -> f64 {
        let a = i.saturating_sub(5);
        let b = (i + 5).min(n);
        let mut s = 0.0f64;
        for v in &fs[a..=b] {
            s = s.max(v.abs());
        }
        s.max(f64::MIN_POSITIVE)
    };

    let mut roots: Vec<ScannedRoot> = Vec::new();

    // Exact (to within noise) zeros on grid nodes.
    for i in 0..=n {
        if fs[i] == 0.0 {
            roots.push(ScannedRoot { x: xs[i], kind: RootKind::SignChange });
        }
    }

    // Bracketed sign changes.
    let mut sign_change_cell = vec![false; n];
    for i in 0..n {
        if fs[i] != 0.0 && fs[i + 1] != 0.0 && (fs[i] > 0.0) != (fs[i + 1] > 0.0) {
            sign_change_cell[i] = true;
            let x = bisect(&f, xs[i], xs[i + 1], opts.rel_tol);
            roots.push(ScannedRoot { x, kind: RootKind::SignChange });
        }
    }

    // Tangential roots: refine local minima of |f| away from sign changes.
    for i in 0..=n {
        let left_ok = i == 0 || fs[i].abs() <= fs[i - 1].abs();
        let right_ok = i == n || fs[i].abs() <= fs[i + 1].abs();
        if !(left_ok && right_ok) || fs[i] == 0.0 {
            continue;
        }
        let adjacent_change = (i > 0 && sign_change_cell[i - 1]) || (i < n && sign_change_cell[i]);
        if adjacent_change {
            continue;
        }
        let a = if i == 0 { xs[0] } else { xs[i - 1] };
        let b = if i == n { xs[n] } else { xs[i + 1] };
        let (xm, fm) = refine_abs_minimum(&f, a, b, opts.rel_tol);
        if fm <= (opts.tangential_threshold * local_scale(i)).max(opts.absolute_floor) {
            roots.push(ScannedRoot { x: xm, kind: RootKind::Tangential });
        }
    }

    roots.sort_by(|p, q| p.x.total_cmp(&q.x));
    roots.dedup_by(|p, q| (p.x - q.x).abs() <= 8.0 * x_tol(q.x, opts.rel_tol).max(1e-13 * (hi - lo)));
    roots
}

/// Positions of the scanned roots.
pub fn root_positions(roots: &[ScannedRoot]) -> Vec<f64> {
    roots.iter().map(|r| r.x).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_simple_roots() {
        let roots = scan_roots(|x| x * x - 2.0, 0.0, 3.0, 50, ScanOptions::default());
        assert_eq!(roots.len(), 1);
        assert!((roots[0].x - 2.0f64.sqrt()).abs() < 1e-9);
        assert_eq!(roots[0].kind, RootKind::SignChange);
    }

    #[test]
    fn finds_tangential_double_root() {
        let roots = scan_roots(|x| (x - 1.0) * (x - 1.0), 0.0, 3.0, 64, ScanOptions::default());
        assert_eq!(roots.len(), 1);
        assert!((roots[0].x - 1.0).abs() < 1e-7);
        assert_eq!(roots[0].kind, RootKind::Tangential);
    }

    #[test]
    fn rejects_near_miss_minimum() {
        // Minimum value 0.1 against local scale ~1: not a root.
        let roots = scan_roots(|x| (x - 1.0) * (x - 1.0) + 0.1, 0.0, 2.0, 40, ScanOptions::default());
        assert!(roots.is_empty());
    }

    #[test]
    fn cosine_roots_in_window() {
        let pi = std::f64::consts::PI;
        let roots = scan_roots(|x| x.cos(), 0.0, 10.0, 100, ScanOptions::default());
        let expect = [pi / 2.0, 3.0 * pi / 2.0, 5.0 * pi / 2.0];
        assert_eq!(roots.len(), 3);
        for (r, e) in roots.iter().zip(expect) {
            assert!((r.x - e).abs() < 1e-9);
        }
    }

    #[test]
    fn boundary_tangential_root() {
        // cos(x) - 1 has a tangential root exactly at the left boundary.
        let roots = scan_roots(|x| x.cos() - 1.0, 0.0, 3.0, 60, ScanOptions::default());
        assert_eq!(roots.len(), 1);
        assert!(roots[0].x.abs() < 1e-6);
    }
}
