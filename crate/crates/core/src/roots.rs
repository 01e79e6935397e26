//! Scalar root finding and maximization used by every solver in the crate.

use crate::error::{Error, Result};

/// Default absolute bracket width for bisection.
pub const ROOT_TOL: f64 = 1e-12;

/// Bisection on `[lo, hi]`. Stops when the bracket is narrower than `tol` or
/// cannot be split further in floating point.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return Err(Error::NoBracket { lo, hi });
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
}

/// Brent's method on a sign-changing bracket.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::NoBracket { lo, hi });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Ok(b)
}

/// Uniform sign scan at `step` over `[lo, hi]`, each bracket refined by
/// bisection. Exact zeros on the grid are reported once. Roots are ascending.
pub fn scan_roots<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, step: f64, tol: f64) -> Vec<f64> {
    let n = (((hi - lo) / step).ceil() as usize).max(1);
    let mut roots = Vec::new();
    let mut x_prev = lo;
    let mut f_prev = f(lo);
    if f_prev == 0.0 {
        roots.push(lo);
    }
    for i in 1..=n {
        let x = if i == n {
            hi
        } else {
            lo + (hi - lo) * i as f64 / n as f64
        };
        let fx = f(x);
        if fx == 0.0 {
            roots.push(x);
        } else if f_prev != 0.0 && !f_prev.is_nan() && !fx.is_nan() && f_prev.signum() != fx.signum() {
            if let Ok(r) = bisect(&mut f, x_prev, x, tol) {
                roots.push(r);
            }
        }
        x_prev = x;
        f_prev = fx;
    }
    roots
}

/// Roots of `f` located from its values at the ascending points `xs`.
///
/// Sign changes between neighbours are refined by Brent's method. A sample
/// that is a local minimum of `|f|` and small against the local variation
/// is treated as a near miss: the extremum between its neighbours is found
/// by golden section, and if it reaches the other sign both crossings are
/// refined. This catches a close root pair that falls inside one cell.
pub fn sampled_roots<F: FnMut(f64) -> f64>(mut f: F, xs: &[f64], tol: f64) -> Vec<f64> {
    let vs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    sampled_roots_from(f, xs, &vs, tol)
}

/// [`sampled_roots`] with the values at `xs` already computed.
pub fn sampled_roots_from<F: FnMut(f64) -> f64>(mut f: F, xs: &[f64], vs: &[f64], tol: f64) -> Vec<f64> {
    debug_assert_eq!(xs.len(), vs.len());
    let mut roots = Vec::new();
    let refine = |f: &mut F, lo: f64, hi: f64, roots: &mut Vec<f64>| {
        if let Ok(r) = brent(&mut *f, lo, hi, tol) {
            roots.push(r);
        }
    };
    for i in 0..xs.len() {
        let v = vs[i];
        if v == 0.0 {
            roots.push(xs[i]);
            continue;
        }
        if v.is_nan() || i + 1 == xs.len() {
            continue;
        }
        let w = vs[i + 1];
        if w != 0.0 && !w.is_nan() && v.signum() != w.signum() {
            refine(&mut f, xs[i], xs[i + 1], &mut roots);
            continue;
        }
        if i == 0 || w == 0.0 || w.is_nan() {
            continue;
        }
        let u = vs[i - 1];
        if u.is_nan() || u == 0.0 || u.signum() != v.signum() || v.signum() != w.signum() {
            continue;
        }
        let sigma = v.signum();
        let (su, sv, sw) = (sigma * u, sigma * v, sigma * w);
        if !(sv < su && sv <= sw && sv <= 2.0 * ((su - sv) + (sw - sv))) {
            continue;
        }
        let (lo, hi) = (xs[i - 1], xs[i + 1]);
        let (xm, neg) = golden_max(|x| -sigma * f(x), lo, hi, (hi - lo) * 1e-9);
        if neg >= 0.0 {
            if neg == 0.0 {
                roots.push(xm);
            } else {
                refine(&mut f, lo, xm, &mut roots);
                refine(&mut f, xm, hi, &mut roots);
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= tol);
    roots
}

/// Golden-section search for the maximum of `f` on `[lo, hi]`.
/// Returns `(argmax, max)`; the endpoints are included as candidates.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for x in [lo, hi] {
        let fx = f(x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Polynomial with real coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[f64]) -> Self {
        let mut c = vec![1.0];
        for &r in roots {
            let mut next = vec![0.0; c.len() + 1];
            for (i, &ci) in c.iter().enumerate() {
                next[i + 1] += ci;
                next[i] -= r * ci;
            }
            c = next;
        }
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    /// All real roots in `[lo, hi]`, ascending.
    ///
    /// The interval is cut at the critical points (roots of the derivative,
    /// found recursively) so every piece is monotone and holds at most one
    /// root, which bisection then pins down to machine precision. Tangential
    /// roots are found when the critical value is exactly zero.
    pub fn real_roots_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        if self.degree() == 0 {
            return Vec::new();
        }
        if self.degree() == 1 {
            let r = -self.coeffs[0] / self.coeffs[1];
            return if (lo..=hi).contains(&r) { vec![r] } else { Vec::new() };
        }
        let mut knots = vec![lo];
        knots.extend(
            self.derivative()
                .real_roots_in(lo, hi)
                .into_iter()
                .filter(|&c| c > lo && c < hi),
        );
        knots.push(hi);
        let mut roots: Vec<f64> = Vec::new();
        let push = |roots: &mut Vec<f64>, r: f64| {
            if roots.last().is_none_or(|&last| r > last) {
                roots.push(r);
            }
        };
        for w in knots.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (fa, fb) = (self.eval(a), self.eval(b));
            if fa == 0.0 {
                push(&mut roots, a);
            }
            if fa != 0.0 && fb != 0.0 && fa.signum() != fb.signum() {
                if let Ok(r) = bisect(|x| self.eval(x), a, b, 0.0) {
                    push(&mut roots, r);
                }
            }
            if fb == 0.0 {
                push(&mut roots, b);
            }
        }
        roots
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn brent_matches_bisect() {
        let f = |x: f64| x.cos() - x;
        let a = brent(f, 0.0, 1.0, 1e-14).unwrap();
        let b = bisect(f, 0.0, 1.0, 1e-14).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn scan_finds_all_cubic_roots() {
        let f = |x: f64| (x - 0.1) * (x - 0.5) * (x - 0.9);
        let r = scan_roots(f, 0.0, 1.0, 1e-3, 1e-13);
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([0.1, 0.5, 0.9]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn sampled_roots_catch_close_pair() {
        // Two roots 0.001 apart inside a single 1/64 cell.
        let f = |x: f64| (x - 0.3004) * (x - 0.3014) * (x - 0.9);
        let xs: Vec<f64> = (0..=64).map(|i| i as f64 / 64.0).collect();
        let r = sampled_roots(f, &xs, 1e-14);
        assert_eq!(r.len(), 3, "{r:?}");
        assert!((r[0] - 0.3004).abs() < 1e-12);
        assert!((r[1] - 0.3014).abs() < 1e-12);
        assert!((r[2] - 0.9).abs() < 1e-12);
    }

    #[test]
    fn sampled_roots_ignore_distant_minimum() {
        let f = |x: f64| (x - 0.5) * (x - 0.5) + 0.1;
        let xs: Vec<f64> = (0..=64).map(|i| i as f64 / 64.0).collect();
        assert!(sampled_roots(f, &xs, 1e-14).is_empty());
    }

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, fx) = golden_max(|x| -(x - 0.3) * (x - 0.3) + 2.0, 0.0, 1.0, 1e-10);
        // Golden section resolves the argmax only to about √ε.
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 2.0).abs() < 1e-12);
    }

    #[test]
    fn golden_prefers_endpoint() {
        let (x, _) = golden_max(|x| x, 0.0, 1.0, 1e-9);
        assert_eq!(x, 1.0);
    }

    #[test]
    fn polynomial_isolation_separates_close_roots() {
        let p = Polynomial::from_roots(&[0.5, 0.5001, 0.8]);
        let r = p.real_roots_in(0.0, 1.0);
        assert_eq!(r.len(), 3, "{r:?}");
        assert!((r[0] - 0.5).abs() < 1e-9);
        assert!((r[1] - 0.5001).abs() < 1e-9);
        assert!((r[2] - 0.8).abs() < 1e-9);
    }

    #[test]
    fn polynomial_degree_and_derivative() {
        let p = Polynomial::new(vec![1.0, -2.0, 0.0, 4.0, 0.0]);
        assert_eq!(p.degree(), 3);
        assert_eq!(p.derivative().coeffs(), &[-2.0, 0.0, 12.0]);
        assert_eq!(p.eval(2.0), 1.0 - 4.0 + 32.0);
    }

    proptest::proptest! {
        #[test]
        fn isolation_agrees_with_fine_scan(r1 in 0.01..0.99f64, r2 in 0.01..0.99f64, r3 in -1.0..2.0f64) {
            let p = Polynomial::from_roots(&[r1, r2, r3]);
            let fast = p.real_roots_in(0.0, 1.0);
            let slow = scan_roots(|x| p.eval(x), 0.0, 1.0, 1e-5, 1e-14);
            if (r1 - r2).abs() > 1e-4 && (r1 - r3).abs() > 1e-4 && (r2 - r3).abs() > 1e-4 {
                proptest::prop_assert_eq!(fast.len(), slow.len());
                for (a, b) in fast.iter().zip(&slow) {
                    proptest::prop_assert!((a - b).abs() < 1e-9);
                }
            }
        }
    }
}
