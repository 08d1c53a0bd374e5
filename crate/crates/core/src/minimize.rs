//! Derivative-free minimization of unimodal scalar functions.
//!
//! Everything here treats non-finite objective values (NaN included) as
//! `+∞`, so callers can hand over extended-real objectives directly.

use alloc::vec;
use alloc::vec::Vec;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Result of a one-dimensional search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
    /// Largest objective value left on the final bracket minus `value`.
    pub spread: f64,
}

#[inline]
fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Golden-section search for a unimodal `f` on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `tol`. Both endpoints are
/// evaluated as candidates, so a monotone objective returns its endpoint
/// exactly.
pub fn golden_section<F>(mut f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> Minimum
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let f_lo = sanitize(f(a));
    let f_hi = sanitize(f(b));

    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = sanitize(f(c));
    let mut fd = sanitize(f(d));
    let mut iterations = 0;
    while (b - a) > tol && iterations < max_iter {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = sanitize(f(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = sanitize(f(d));
        }
        iterations += 1;
    }

    let (mut x, mut value) = if fc <= fd { (c, fc) } else { (d, fd) };
    let spread = fc.max(fd) - value;
    if f_lo <= value {
        x = lo.min(hi);
        value = f_lo;
    }
    if f_hi < value {
        x = lo.max(hi);
        value = f_hi;
    }
    Minimum { x, value, iterations, spread }
}

/// Brackets the minimum of a unimodal `f` by geometric expansion from `x0`.
///
/// Returns `(a, b)` with `limits.0 <= a < b <= limits.1` containing a
/// minimizer. The step doubles on every move downhill.
pub fn bracket_minimum<F>(mut f: F, x0: f64, step: f64, limits: (f64, f64)) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let (lo, hi) = limits;
    let clamp = |x: f64| x.clamp(lo, hi);
    let x0 = clamp(x0);
    let f0 = sanitize(f(x0));
    let right = clamp(x0 + step);
    let left = clamp(x0 - step);
    let f_right = sanitize(f(right));
    let f_left = sanitize(f(left));

    let mut h = if f_right < f0 {
        step
    } else if f_left < f0 {
        -step
    } else {
        return (left, right);
    };

    let (mut prev, mut cur) = (x0, x0 + h);
    let mut f_cur = if h > 0.0 { f_right } else { f_left };
    loop {
        h *= 2.0;
        let next = clamp(cur + h);
        if next == cur {
            return ordered(prev, cur);
        }
        let f_next = sanitize(f(next));
        if f_next >= f_cur {
            return ordered(prev, next);
        }
        prev = cur;
        cur = next;
        f_cur = f_next;
    }
}

fn ordered(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Minimizes a convex `f` over the probability simplex in `n` coordinates.
///
/// Starts from the best point of a uniform lattice (`resolution` steps per
/// coordinate), then runs pairwise exchange sweeps: each move shifts mass
/// between two coordinates, found by golden-section search.
pub fn minimize_on_simplex<F>(mut f: F, n: usize, resolution: usize) -> (Vec<f64>, f64)
where
    F: FnMut(&[f64]) -> f64,
{
    assert!(n >= 1, "simplex needs at least one coordinate");
    let mut best = vec![0.0; n];
    best[0] = 1.0;
    let mut best_val = sanitize(f(&best));

    let resolution = resolution.max(1);
    let mut counts = vec![0usize; n];
    let mut point = vec![0.0; n];
    for_each_composition(resolution, &mut counts, 0, &mut |counts| {
        for (p, &k) in point.iter_mut().zip(counts) {
            *p = k as f64 / resolution as f64;
        }
        let v = sanitize(f(&point));
        if v < best_val {
            best_val = v;
            best.copy_from_slice(&point);
        }
    });

    let mut trial = best.clone();
    for _sweep in 0..200 {
        let before = best_val;
        for i in 0..n {
            for j in (i + 1)..n {
                let mass = best[i] + best[j];
                if mass <= 0.0 {
                    continue;
                }
                let m = golden_section(
                    |s| {
                        trial.copy_from_slice(&best);
                        trial[i] = s * mass;
                        trial[j] = (1.0 - s) * mass;
                        f(&trial)
                    },
                    0.0,
                    1.0,
                    1e-14,
                    200,
                );
                if m.value < best_val {
                    best[i] = m.x * mass;
                    best[j] = (1.0 - m.x) * mass;
                    best_val = m.value;
                }
            }
        }
        if before - best_val <= 1e-15 * (1.0 + best_val.abs()) {
            break;
        }
    }
    (best, best_val)
}

fn for_each_composition<G>(remaining: usize, counts: &mut [usize], idx: usize, visit: &mut G)
where
    G: FnMut(&[usize]),
{
    let n = counts.len();
    if idx == n - 1 {
        counts[idx] = remaining;
        visit(counts);
        return;
    }
    for k in 0..=remaining {
        counts[idx] = k;
        for_each_composition(remaining - k, counts, idx + 1, visit);
    }
}

/// Lattice resolution keeping the simplex grid around a few thousand points.
pub fn simplex_resolution(n: usize) -> usize {
    match n {
        0..=2 => 256,
        3 => 48,
        4 => 20,
        5 => 12,
        _ => 6,
    }
}
