use crate::{MathError, Result, Scalar};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const MAX_ITER: usize = 200;

/// Brent's method on a sign-changing bracket.
///
/// Stops when `|f(x)| <= tol` or the bracket is narrower than
/// `tol * max(1, |x|)` (plus a few ulps).
pub fn find_root<T: Scalar, F: FnMut(T) -> T>(mut f: F, lo: T, hi: T, tol: T) -> Result<T> {
    let mut a = lo;
    let mut b = hi;
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(MathError::NoBracket {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
            f_lo: fa.as_f64(),
            f_hi: fb.as_f64(),
        });
    }
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let three = T::lit(3.0);
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ITER {
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
        let tol1 = two * T::epsilon() * b.abs() + half * tol * T::one().max(b.abs());
        let xm = half * (c - b);
        if fb.abs() <= tol || xm.abs() <= tol1 || fb == T::zero() {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * xm * s;
                q = T::one() - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (two * xm * qq * (qq - r) - (b - a) * (r - T::one()));
                q = (qq - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            }
            p = p.abs();
            let min1 = three * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if two * p < min1.min(min2) {
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
        if d.abs() > tol1 {
            b = b + d;
        } else {
            b = b + if xm > T::zero() { tol1 } else { -tol1 };
        }
        fb = f(b);
    }
    Err(MathError::MaxIterations(MAX_ITER))
}

pub fn find_root_default<T: Scalar, F: FnMut(T) -> T>(f: F, lo: T, hi: T) -> Result<T> {
    find_root(f, lo, hi, T::lit(DEFAULT_TOL))
}

/// Widens `[lo, hi]` geometrically around its midpoint until `f` changes sign.
pub fn expand_bracket<T: Scalar, F: FnMut(T) -> T>(mut f: F, lo: T, hi: T, max_steps: usize) -> Result<(T, T)> {
    let mut lo = lo;
    let mut hi = hi;
    let mut flo = f(lo);
    let mut fhi = f(hi);
    for _ in 0..max_steps {
        if flo.signum() != fhi.signum() {
            return Ok((lo, hi));
        }
        let w = hi - lo;
        if flo.abs() < fhi.abs() {
            lo = lo - w;
            flo = f(lo);
        } else {
            hi = hi + w;
            fhi = f(hi);
        }
    }
    Err(MathError::NoBracket {
        lo: lo.as_f64(),
        hi: hi.as_f64(),
        f_lo: flo.as_f64(),
        f_hi: fhi.as_f64(),
    })
}
