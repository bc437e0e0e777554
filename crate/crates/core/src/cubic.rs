//! Closed-form real roots of low-order polynomials and a bracketing 1-D
//! root finder.

use core::f64::consts::PI;


#[allow(unused_imports)] // inherent f64 math is only present with std
use num_traits::Float;
use crate::error::{Error, Result};

/// Up to three real roots, ascending.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealRoots {
    roots: [f64; 3],
    len: usize,
}

impl RealRoots {
    fn new() -> Self {
        Self { roots: [0.0; 3], len: 0 }
    }

    fn push(&mut self, r: f64) {
        self.roots[self.len] = r;
        self.len += 1;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.roots[..self.len]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn sort(&mut self) {
        let s = &mut self.roots[..self.len];
        s.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    }
}

/// Real roots of c2·x² + c1·x + c0.
pub fn quadratic_roots(c2: f64, c1: f64, c0: f64) -> RealRoots {
    let mut out = RealRoots::new();
    if c2 == 0.0 {
        if c1 != 0.0 {
            out.push(-c0 / c1);
        }
        return out;
    }
    let disc = c1 * c1 - 4.0 * c2 * c0;
    if disc < 0.0 {
        return out;
    }
    // Numerically stable form avoiding cancellation.
    let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
    if q == 0.0 {
        out.push(0.0);
        return out;
    }
    out.push(q / c2);
    let other = c0 / q;
    if disc > 0.0 {
        out.push(other);
    }
    out.sort();
    out
}

/// Real roots of c3·x³ + c2·x² + c1·x + c0, each refined by Newton steps.
///
/// Three-real-root cases use the trigonometric form, single-root cases the
/// Cardano form. A double root is reported once.
pub fn cubic_roots(c3: f64, c2: f64, c1: f64, c0: f64) -> RealRoots {
    if c3 == 0.0 {
        return quadratic_roots(c2, c1, c0);
    }
    let a = c2 / c3;
    let b = c1 / c3;
    let c = c0 / c3;
    // Depressed cubic t³ + p t + q with x = t − a/3.
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let mut raw = RealRoots::new();
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    let scale = (a.abs() + b.abs().sqrt() + c.abs().cbrt()).max(1e-300);
    if p == 0.0 && q == 0.0 {
        raw.push(-shift);
    } else if disc > 0.0 {
        let sq = disc.sqrt();
        let u = (-q / 2.0 + sq).cbrt();
        let v = (-q / 2.0 - sq).cbrt();
        raw.push(u + v - shift);
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        for k in 0..3 {
            raw.push(m * (theta - 2.0 * PI * k as f64 / 3.0).cos() - shift);
        }
    }
    let poly = |x: f64| ((x + a) * x + b) * x + c;
    let dpoly = |x: f64| (3.0 * x + 2.0 * a) * x + b;
    let mut out = RealRoots::new();
    for &r0 in raw.as_slice() {
        let mut r = r0;
        for _ in 0..4 {
            let d = dpoly(r);
            if d == 0.0 {
                break;
            }
            let step = poly(r) / d;
            let next = r - step;
            if !next.is_finite() || poly(next).abs() > poly(r).abs() {
                break;
            }
            r = next;
        }
        out.push(r);
    }
    out.sort();
    // Collapse duplicates produced by a (near-)double root.
    let mut dedup = RealRoots::new();
    for &r in out.as_slice() {
        match dedup.as_slice().last() {
            Some(&last) if (r - last).abs() <= 1e-9 * scale.max(r.abs()) => {}
            _ => dedup.push(r),
        }
    }
    dedup
}

/// Brent's method on a bracketing interval.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, rel_tol: f64) -> Result<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::RootNotBracketed { lo: a, hi: b });
    }
    if fa.abs() < fb.abs() {
        core::mem::swap(&mut a, &mut b);
        core::mem::swap(&mut fa, &mut fb);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut mflag = true;
    for _ in 0..500 {
        let tol = rel_tol * b.abs().max(f64::MIN_POSITIVE) + f64::MIN_POSITIVE;
        if fb == 0.0 || (b - a).abs() <= tol {
            return Ok(b);
        }
        let mut s = if fa != fc && fb != fc {
            a * fb * fc / ((fa - fb) * (fa - fc)) + b * fa * fc / ((fb - fa) * (fb - fc)) + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let lo = (3.0 * a + b) / 4.0;
        let outside = if lo < b { s < lo || s > b } else { s > lo || s < b };
        if outside
            || (mflag && (s - b).abs() >= (b - c).abs() / 2.0)
            || (!mflag && (s - b).abs() >= (c - d).abs() / 2.0)
            || (mflag && (b - c).abs() < tol)
            || (!mflag && (c - d).abs() < tol)
        {
            s = 0.5 * (a + b);
            mflag = true;
        } else {
            mflag = false;
        }
        let fs = f(s);
        d = c;
        c = b;
        fc = fb;
        if fa.signum() != fs.signum() {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            core::mem::swap(&mut a, &mut b);
            core::mem::swap(&mut fa, &mut fb);
        }
    }
    Ok(b)
}
