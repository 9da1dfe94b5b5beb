//! Composite Simpson quadrature with step halving, aligned to caller-supplied
//! breakpoints, and a fixed 5-point Gauss–Legendre rule.

use crate::{Error, Real, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature<T> {
    pub value: T,
    /// |S_{2n} - S_n| summed over the pieces at the final refinement.
    pub error_estimate: T,
    pub evaluations: usize,
}

/// Initial number of Simpson intervals per piece.
const START_INTERVALS: usize = 32;
/// Refinement stops with an error past this many intervals per piece.
const MAX_INTERVALS: usize = 1 << 22;

/// Composite Simpson rule with `intervals` (even) subintervals.
pub fn simpson<T: Real>(f: impl Fn(T) -> T, a: T, b: T, intervals: usize) -> T {
    let n = intervals.max(2) + intervals % 2;
    let h = (b - a) / T::from_usize(n).unwrap();
    let mut odd = T::zero();
    let mut even = T::zero();
    for i in 1..n {
        let x = a + h * T::from_usize(i).unwrap();
        if i % 2 == 1 {
            odd = odd + f(x);
        } else {
            even = even + f(x);
        }
    }
    h / T::lit(3.0) * (f(a) + f(b) + T::lit(4.0) * odd + T::lit(2.0) * even)
}

/// Simpson with halving on one smooth piece until successive estimates agree
/// to `tol · max(1, |S|)`; returns the Richardson-corrected value.
fn simpson_adaptive<T: Real>(f: &impl Fn(T) -> T, a: T, b: T, tol: T) -> Result<(T, T, usize)> {
    if a == b {
        return Ok((T::zero(), T::zero(), 0));
    }
    let mut n = START_INTERVALS;
    let width = b - a;
    let mut h = width / T::from_usize(n).unwrap();
    // one-sided limits at the piece ends, so jumps on breakpoints are harmless
    let nudge = width * T::lit(64.0) * T::epsilon();
    let ends = f(a + nudge) + f(b - nudge);
    let mut evals = 2;
    let mut odd = T::zero();
    let mut even = T::zero();
    for i in 1..n {
        let v = f(a + h * T::from_usize(i).unwrap());
        if i % 2 == 1 {
            odd = odd + v;
        } else {
            even = even + v;
        }
    }
    evals += n - 1;
    let third = T::lit(3.0).recip();
    let four = T::lit(4.0);
    let two = T::lit(2.0);
    let mut prev = h * third * (ends + four * odd + two * even);
    loop {
        if n >= MAX_INTERVALS {
            return Err(Error::NotConverged { iterations: n, residual: f64::NAN });
        }
        // the old nodes all become even nodes; the new odd nodes are midpoints
        even = even + odd;
        n *= 2;
        h = width / T::from_usize(n).unwrap();
        odd = T::zero();
        for i in (1..n).step_by(2) {
            odd = odd + f(a + h * T::from_usize(i).unwrap());
        }
        evals += n / 2;
        let cur = h * third * (ends + four * odd + two * even);
        let diff = (cur - prev).abs();
        if !cur.is_finite() {
            return Err(Error::input("integrand is not finite on the quadrature grid"));
        }
        if diff <= tol * cur.abs().max(T::one()) {
            return Ok((cur + (cur - prev) / T::lit(15.0), diff, evals));
        }
        prev = cur;
    }
}

/// ∫ f over `[breakpoints[0], breakpoints[last]]`, refining each piece between
/// consecutive breakpoints separately so that kinks sit on panel edges.
pub fn integrate<T: Real>(f: impl Fn(T) -> T, breakpoints: &[T], tol: T) -> Result<Quadrature<T>> {
    if breakpoints.len() < 2 {
        return Err(Error::input("quadrature needs at least two breakpoints"));
    }
    if breakpoints.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::input("quadrature breakpoints must be sorted"));
    }
    let mut total = Quadrature { value: T::zero(), error_estimate: T::zero(), evaluations: 0 };
    for w in breakpoints.windows(2) {
        let (v, e, n) = simpson_adaptive(&f, w[0], w[1], tol)?;
        total.value = total.value + v;
        total.error_estimate = total.error_estimate + e;
        total.evaluations += n;
    }
    Ok(total)
}

const GL5_NODES: [f64; 5] = [
    0.0,
    -0.5384693101056831,
    0.5384693101056831,
    -0.906179845938664,
    0.906179845938664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.5688888888888889,
    0.47862867049936647,
    0.47862867049936647,
    0.23692688505618908,
    0.23692688505618908,
];

/// 5-point Gauss–Legendre rule on `[a, b]`, exact for polynomials of degree 9.
pub fn gauss_legendre<T: Real>(f: impl Fn(T) -> T, a: T, b: T) -> T {
    let half = T::lit(0.5) * (b - a);
    let mid = T::lit(0.5) * (a + b);
    GL5_NODES
        .iter()
        .zip(GL5_WEIGHTS)
        .map(|(&x, w)| T::lit(w) * f(mid + half * T::lit(x)))
        .sum::<T>()
        * half
}
