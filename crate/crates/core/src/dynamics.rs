//! Transfer recursion for `ψ(n+1) + ψ(n-1) + V(n)ψ(n) = Eψ(n)` on the
//! half-line and growth diagnostics for the envelope `R(n) = ψ(n)² + ψ(n+1)²`.

use rayon::prelude::*;

use crate::fit::line_fit;
use crate::lattice::{Lattice, Potential};
use crate::{Error, Real, Result};

/// Longest supported trajectory.
pub const MAX_STEPS: usize = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct TransferTrajectory<T> {
    pub energy: T,
    pub theta: T,
    /// log R(n) for n = 0, …, n_max.
    pub log_envelope: Vec<T>,
    /// Sites at which the state was renormalised, with the log factor removed.
    pub rescales: Vec<(usize, T)>,
}

impl<T: Real> TransferTrajectory<T> {
    pub fn len(&self) -> usize {
        self.log_envelope.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_envelope.is_empty()
    }

    /// R(n), which overflows to infinity when the trajectory was rescaled past
    /// the floating-point range.
    pub fn envelope(&self, n: usize) -> T {
        self.log_envelope[n].exp()
    }

    /// `max_n R(n) / n^p` over `1 ≤ n ≤ n_max`, computed in log space.
    pub fn power_constant(&self, p: T) -> T {
        self.log_envelope
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, &lr)| lr - p * T::from_usize(n).unwrap().ln())
            .fold(T::neg_infinity(), T::max)
            .exp()
    }
}

fn rescale_threshold<T: Real>() -> T {
    if T::max_value().as_f64() > 1e300 {
        T::lit(1e200)
    } else {
        T::max_value().sqrt().sqrt()
    }
}

fn check_inputs<T: Real>(potential: &Potential<T>, energy: T, theta: T, n_max: usize) -> Result<()> {
    if potential.lattice() != Lattice::HalfLine {
        return Err(Error::input("the transfer recursion runs on the half-line"));
    }
    if n_max > MAX_STEPS {
        return Err(Error::TooLarge { size: n_max, limit: MAX_STEPS });
    }
    if !energy.is_finite() || !theta.is_finite() {
        return Err(Error::input("energy and theta must be finite"));
    }
    Ok(())
}

/// A value carried as an unevaluated sum `hi + lo`, so that the recursion
/// does not accumulate rounding over millions of steps.
#[derive(Clone, Copy, Debug)]
struct Compensated<T> {
    hi: T,
    lo: T,
}

impl<T: Real> Compensated<T> {
    fn new(x: T) -> Self {
        Compensated { hi: x, lo: T::zero() }
    }

    /// `c·cur - prev` with the product and difference errors kept in `lo`.
    fn step(c: T, cur: Self, prev: Self) -> Self {
        let p = c * cur.hi;
        let p_err = c.mul_add(cur.hi, -p);
        let s = p - prev.hi;
        let bb = s - p;
        let s_err = (p - (s - bb)) + (-prev.hi - bb);
        let lo = s_err + p_err + c * cur.lo - prev.lo;
        let hi = s + lo;
        Compensated { hi, lo: lo - (hi - s) }
    }

    fn value(self) -> T {
        self.hi + self.lo
    }

    fn scale(self, f: T) -> Self {
        Compensated { hi: self.hi * f, lo: self.lo * f }
    }
}

/// Runs the recursion from ψ(-1) = sin θ, ψ(0) = cos θ through site `n_max + 1`.
///
/// When R leaves `[1e-200, 1e200]` the state is multiplied by a power of two
/// and the removed factor is added back to the stored log-envelope.
pub fn transfer_solve<T: Real>(potential: &Potential<T>, energy: T, theta: T, n_max: usize) -> Result<TransferTrajectory<T>> {
    check_inputs(potential, energy, theta, n_max)?;
    let big = rescale_threshold::<T>();
    let small = big.recip();
    let two = T::lit(2.0);
    let mut prev = Compensated::new(theta.sin());
    let mut cur = Compensated::new(theta.cos());
    let mut log_scale = T::zero();
    let mut log_envelope = Vec::with_capacity(n_max + 1);
    let mut rescales = Vec::new();
    for n in 0..=n_max {
        let v = potential.value_at(n as i64).expect("half-line site");
        let next = Compensated::step(energy - v, cur, prev);
        let (c, x) = (cur.value(), next.value());
        let r = c * c + x * x;
        log_envelope.push(r.ln() + log_scale);
        prev = cur;
        cur = next;
        if r > big || r < small {
            let k = (r.log2() / two).round();
            let f = two.powf(-k);
            prev = prev.scale(f);
            cur = cur.scale(f);
            let removed = two * k * T::LN_2();
            log_scale = log_scale + removed;
            rescales.push((n, removed));
        }
    }
    Ok(TransferTrajectory { energy, theta, log_envelope, rescales })
}

/// Maximal relative deviation of the Wronskian
/// `ψ_θ(n+1)ψ_θ'(n) - ψ_θ(n)ψ_θ'(n+1)`, θ' = θ + π/2, from its initial value.
///
/// Both solutions are propagated unscaled; the check is meant for energies
/// where they stay bounded and fails with an input error on overflow.
pub fn wronskian_drift<T: Real>(potential: &Potential<T>, energy: T, theta: T, n_max: usize) -> Result<T> {
    check_inputs(potential, energy, theta, n_max)?;
    let theta2 = theta + T::FRAC_PI_2();
    let (mut a_prev, mut a) = (Compensated::new(theta.sin()), Compensated::new(theta.cos()));
    let (mut b_prev, mut b) = (Compensated::new(theta2.sin()), Compensated::new(theta2.cos()));
    let w0 = a.value() * b_prev.value() - a_prev.value() * b.value();
    let mut drift = T::zero();
    for n in 0..=n_max {
        let c = energy - potential.value_at(n as i64).expect("half-line site");
        let a_next = Compensated::step(c, a, a_prev);
        let b_next = Compensated::step(c, b, b_prev);
        let w = a_next.value() * b.value() - a.value() * b_next.value();
        if !w.is_finite() {
            return Err(Error::input(format!("solutions overflow at site {n}")));
        }
        drift = drift.max((w - w0).abs() / w0.abs());
        a_prev = a;
        a = a_next;
        b_prev = b;
        b = b_next;
    }
    Ok(drift)
}

/// Power-law exponents of the upper and lower envelope of R.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeFit<T> {
    pub lower_slope: T,
    pub upper_slope: T,
    pub lower_intercept: T,
    pub upper_intercept: T,
    /// Number of log-spaced blocks that entered each fit.
    pub blocks: usize,
}

/// Minimal block length, a few oscillation periods of R away from the band edges.
const MIN_BLOCK: usize = 16;
const BLOCK_RATIO: f64 = 1.2;

/// Splits `[lo, hi]` into blocks growing by [`BLOCK_RATIO`] (at least
/// [`MIN_BLOCK`] sites) and regresses log R at each block's arg-max and arg-min
/// against the log of that site.
pub fn envelope_exponent<T: Real>(trajectory: &TransferTrajectory<T>, window: (usize, usize)) -> Result<EnvelopeFit<T>> {
    let (lo, hi) = window;
    if lo < 10 {
        return Err(Error::input(format!("envelope window must start at site 10 or later, got {lo}")));
    }
    if hi >= trajectory.len() || lo >= hi {
        return Err(Error::input(format!(
            "envelope window [{lo}, {hi}] is not inside the computed range [0, {}]",
            trajectory.len().saturating_sub(1)
        )));
    }
    let lr = &trajectory.log_envelope;
    let (mut up_x, mut up_y, mut dn_x, mut dn_y) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut start = lo;
    while start <= hi {
        let grown = (start as f64 * BLOCK_RATIO).ceil() as usize;
        let end = grown.max(start + MIN_BLOCK).min(hi + 1);
        let (mut imax, mut imin) = (start, start);
        for n in start..end {
            if lr[n] > lr[imax] {
                imax = n;
            }
            if lr[n] < lr[imin] {
                imin = n;
            }
        }
        up_x.push(T::from_usize(imax).unwrap().ln());
        up_y.push(lr[imax]);
        dn_x.push(T::from_usize(imin).unwrap().ln());
        dn_y.push(lr[imin]);
        start = end;
    }
    let up = line_fit(&up_x, &up_y)?;
    let dn = line_fit(&dn_x, &dn_y)?;
    Ok(EnvelopeFit {
        lower_slope: dn.slope,
        upper_slope: up.slope,
        lower_intercept: dn.intercept,
        upper_intercept: up.intercept,
        blocks: up_x.len(),
    })
}

/// Envelope fits over a θ grid; results follow the order of `thetas`.
pub fn envelope_sweep<T: Real>(
    potential: &Potential<T>,
    energy: T,
    thetas: &[T],
    n_max: usize,
    window: (usize, usize),
) -> Result<Vec<(T, EnvelopeFit<T>)>> {
    thetas
        .par_iter()
        .map(|&theta| {
            let traj = transfer_solve(potential, energy, theta, n_max)?;
            Ok((theta, envelope_exponent(&traj, window)?))
        })
        .collect()
}
