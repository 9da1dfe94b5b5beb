//! Eigenvalue machinery for symmetric tridiagonal truncations.
//!
//! Sturm counting (negative pivots of the LDLᵀ factorisation of `T - E`)
//! drives bisection for the eigenvalues outside the band. Eigenvectors come
//! from inverse iteration; a Lanczos estimate handles large sparse 2D
//! windows. [`dense_oracle`] is an independent check used by tests.

use std::cmp::Ordering;
use std::ops::RangeInclusive;

use rayon::prelude::*;

use crate::fit::line_fit;
use crate::lattice::{LatticeOperator, TridiagonalSystem};
use crate::{Error, Real, Result};

/// Pushes a pivot away from zero, scaled with the coupling that divides it.
/// An exact zero moves up, which keeps an eigenvalue sitting exactly at `e`
/// out of the count.
#[inline]
fn guard_pivot<T: Real>(q: T, coupling_sq: T) -> T {
    let floor = T::min_positive_value() * coupling_sq.max(T::one());
    if q.abs() >= floor {
        q
    } else if q < T::zero() {
        -floor
    } else {
        floor
    }
}

/// Number of eigenvalues strictly below `e`.
pub fn sturm_count<T: Real>(system: &TridiagonalSystem<T>, e: T) -> usize {
    let d = system.diagonal();
    let b = system.offdiagonal();
    let mut q = d[0] - e;
    let mut count = 0;
    for i in 1..d.len() {
        let b2 = b[i - 1] * b[i - 1];
        q = guard_pivot(q, b2);
        if q < T::zero() {
            count += 1;
        }
        q = (d[i] - e) - b2 / q;
    }
    if q < T::zero() {
        count += 1;
    }
    count
}

/// `k`-th smallest eigenvalue (0-based) by bisection of `[lo, hi]`, which must
/// satisfy `count(lo) <= k < count(hi)`.
fn bisect_index<T: Real>(system: &TridiagonalSystem<T>, k: usize, mut lo: T, mut hi: T, tol: T) -> T {
    let half = T::lit(0.5);
    for _ in 0..256 {
        if hi - lo <= tol {
            break;
        }
        let mid = half * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(system, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    half * (lo + hi)
}

/// Gershgorin hull widened so that the Sturm counts at its ends are exactly
/// `0` and `size`.
fn search_hull<T: Real>(system: &TridiagonalSystem<T>) -> (T, T) {
    let (lo, hi) = system.gershgorin();
    let pad = T::lit(1e-6) * (T::one() + lo.abs().max(hi.abs()));
    (lo - pad, hi + pad)
}

/// Number of eigenvalues strictly above `e` (up to eigenvalues equal to `e`).
pub fn count_above<T: Real>(system: &TridiagonalSystem<T>, e: T) -> usize {
    system.size() - sturm_count(system, e)
}

/// The `k`-th smallest eigenvalue (0-based), bisected to `tol`.
pub fn kth_eigenvalue<T: Real>(system: &TridiagonalSystem<T>, k: usize, tol: T) -> Result<T> {
    if k >= system.size() {
        return Err(Error::input(format!("eigenvalue index {k} out of range for size {}", system.size())));
    }
    let (lo, hi) = search_hull(system);
    Ok(bisect_index(system, k, lo, hi, tol))
}

/// All eigenvalues in ascending order, each bisected to `tol`.
pub fn all_eigenvalues<T: Real>(system: &TridiagonalSystem<T>, tol: T) -> Vec<T> {
    let (lo, hi) = search_hull(system);
    (0..system.size())
        .into_par_iter()
        .map(|k| bisect_index(system, k, lo, hi, tol))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    AboveBand,
    BelowBand,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::AboveBand => "above_band",
            Side::BelowBand => "below_band",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundState<T> {
    /// Position `n` in the ordering |E₁| ≥ |E₂| ≥ …, starting at 1.
    pub index: usize,
    pub energy: T,
    pub side: Side,
}

/// Eigenvalues outside the band, ordered by decreasing modulus with ties
/// resolved above the band first.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundStateList<T> {
    pub entries: Vec<BoundState<T>>,
    /// Set when `max_count` cut the list short; the kept entries are the
    /// ones of largest modulus.
    pub truncated: bool,
}

impl<T: Real> BoundStateList<T> {
    /// Builds an ordered list from unordered `(energy, side)` pairs.
    pub fn from_unordered(mut raw: Vec<(T, Side)>, truncated: bool) -> Self {
        raw.sort_by(|a, b| {
            b.0.abs()
                .partial_cmp(&a.0.abs())
                .unwrap_or(Ordering::Equal)
                .then(a.1.cmp(&b.1))
        });
        let entries = raw
            .into_iter()
            .enumerate()
            .map(|(i, (energy, side))| BoundState { index: i + 1, energy, side })
            .collect();
        BoundStateList { entries, truncated }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of entries with |E| ≥ level.
    pub fn count_at_least(&self, level: T) -> usize {
        self.entries.iter().filter(|e| e.energy.abs() >= level).count()
    }

    pub fn side(&self, side: Side) -> impl Iterator<Item = &BoundState<T>> {
        self.entries.iter().filter(move |e| e.side == side)
    }
}

#[derive(Clone, Debug)]
pub struct EigenRequest<'a, T> {
    pub system: &'a TridiagonalSystem<T>,
    /// Closed interval whose complement is searched.
    pub band: (T, T),
    /// Absolute bisection tolerance.
    pub tolerance: T,
    pub max_count: Option<usize>,
}

impl<'a, T: Real> EigenRequest<'a, T> {
    /// Band `[-2, 2]`, tolerance `1e-10`, no cap.
    pub fn new(system: &'a TridiagonalSystem<T>) -> Self {
        EigenRequest { system, band: (T::lit(-2.0), T::lit(2.0)), tolerance: T::lit(1e-10), max_count: None }
    }

    pub fn tolerance(mut self, tol: T) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn band(mut self, lo: T, hi: T) -> Self {
        self.band = (lo, hi);
        self
    }

    pub fn max_count(mut self, cap: usize) -> Self {
        self.max_count = Some(cap);
        self
    }

    fn validate(&self) -> Result<()> {
        let (glo, ghi) = self.system.gershgorin();
        let scale = T::one().max(glo.abs()).max(ghi.abs());
        if !(self.tolerance >= T::lit(1e-14) * scale) {
            return Err(Error::input(format!(
                "tolerance {} is below 1e-14 times the spectral scale {}",
                self.tolerance, scale
            )));
        }
        if !(self.band.0 <= self.band.1) {
            return Err(Error::input("band lower end exceeds upper end"));
        }
        Ok(())
    }
}

/// Every eigenvalue of the truncation outside `request.band`.
pub fn eigenvalues_outside_band<T: Real>(request: &EigenRequest<'_, T>) -> Result<BoundStateList<T>> {
    request.validate()?;
    let sys = request.system;
    let n = sys.size();
    let (lo, hi) = search_hull(sys);
    let (band_lo, band_hi) = request.band;
    let n_below = if band_lo > lo { sturm_count(sys, band_lo) } else { 0 };
    let n_above = if band_hi < hi { n - sturm_count(sys, band_hi) } else { 0 };
    let tol = request.tolerance;

    let below = |k: usize| bisect_index(sys, k, lo, band_lo.min(hi), tol);
    let above = |k: usize| bisect_index(sys, k, band_hi.max(lo), hi, tol);

    match request.max_count {
        Some(cap) if n_below + n_above > cap => {
            // Walk inwards from both spectral ends, always taking the larger modulus.
            let mut raw = Vec::with_capacity(cap);
            let (mut next_below, mut next_above) = (0usize, 0usize);
            let mut cand_below = (n_below > 0).then(|| below(0));
            let mut cand_above = (n_above > 0).then(|| above(n - 1));
            while raw.len() < cap {
                let take_above = match (cand_below, cand_above) {
                    (Some(b), Some(a)) => a.abs() >= b.abs(),
                    (None, Some(_)) => true,
                    (Some(_), None) => false,
                    (None, None) => break,
                };
                if take_above {
                    raw.push((cand_above.unwrap(), Side::AboveBand));
                    next_above += 1;
                    cand_above = (next_above < n_above).then(|| above(n - 1 - next_above));
                } else {
                    raw.push((cand_below.unwrap(), Side::BelowBand));
                    next_below += 1;
                    cand_below = (next_below < n_below).then(|| below(next_below));
                }
            }
            Ok(BoundStateList::from_unordered(raw, true))
        }
        _ => {
            let jobs: Vec<(usize, Side)> = (0..n_below)
                .map(|k| (k, Side::BelowBand))
                .chain((n - n_above..n).map(|k| (k, Side::AboveBand)))
                .collect();
            let raw = jobs
                .par_iter()
                .map(|&(k, side)| match side {
                    Side::BelowBand => (below(k), side),
                    Side::AboveBand => (above(k), side),
                })
                .collect();
            Ok(BoundStateList::from_unordered(raw, false))
        }
    }
}

/// Size limit of [`dense_oracle`].
pub const DENSE_ORACLE_LIMIT: usize = 2000;

/// Full spectrum, ascending, from a dense symmetric eigendecomposition.
///
/// Works in `f64` regardless of `T`; it exists to cross-check the Sturm path.
pub fn dense_oracle<T: Real>(system: &TridiagonalSystem<T>) -> Result<Vec<T>> {
    let n = system.size();
    if n > DENSE_ORACLE_LIMIT {
        return Err(Error::TooLarge { size: n, limit: DENSE_ORACLE_LIMIT });
    }
    let mut m = nalgebra::DMatrix::<f64>::zeros(n, n);
    for (i, d) in system.diagonal().iter().enumerate() {
        m[(i, i)] = d.as_f64();
    }
    for (i, b) in system.offdiagonal().iter().enumerate() {
        m[(i, i + 1)] = b.as_f64();
        m[(i + 1, i)] = b.as_f64();
    }
    let mut values: Vec<f64> = nalgebra::SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    Ok(values.into_iter().map(T::lit).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Eigenpair<T> {
    pub value: T,
    /// Unit vector, sign fixed so that its largest-modulus entry is positive.
    pub vector: Vec<T>,
    pub residual: T,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct InverseIterationOptions<T> {
    /// Exactly one eigenvalue must lie within this distance of the shift.
    pub isolation_radius: T,
    pub max_iterations: usize,
    /// Target for ‖(h - E)φ‖ with ‖φ‖ = 1.
    pub residual_tolerance: T,
}

impl<T: Real> InverseIterationOptions<T> {
    pub fn for_shift(system: &TridiagonalSystem<T>, shift: T) -> Self {
        let (lo, hi) = system.gershgorin();
        let scale = T::one().max(lo.abs()).max(hi.abs());
        InverseIterationOptions {
            isolation_radius: T::lit(0.1) * T::one().max(shift.abs()),
            max_iterations: 100,
            residual_tolerance: T::lit(1e-10).max(T::lit(64.0) * T::epsilon() * scale),
        }
    }
}

/// Eigenpair of the eigenvalue nearest `shift`, which must be isolated.
pub fn inverse_iteration<T: Real>(system: &TridiagonalSystem<T>, shift: T) -> Result<Eigenpair<T>> {
    inverse_iteration_with(system, shift, &InverseIterationOptions::for_shift(system, shift))
}

pub fn inverse_iteration_with<T: Real>(
    system: &TridiagonalSystem<T>,
    shift: T,
    options: &InverseIterationOptions<T>,
) -> Result<Eigenpair<T>> {
    let r = options.isolation_radius;
    let count = sturm_count(system, shift + r) - sturm_count(system, shift - r);
    if count != 1 {
        return Err(Error::NotIsolated { count, radius: r.as_f64() });
    }
    iterate_inverse(system, shift, options.max_iterations, options.residual_tolerance)
}

fn iterate_inverse<T: Real>(
    system: &TridiagonalSystem<T>,
    shift: T,
    max_iterations: usize,
    tol: T,
) -> Result<Eigenpair<T>> {
    let n = system.size();
    let lu = ShiftedLu::factor(system, shift);
    let mut x: Vec<T> = (0..n)
        .map(|i| T::one() + T::lit(0.5) * (T::lit(1.7) * T::from_usize(i).unwrap()).sin())
        .collect();
    normalize(&mut x);
    let mut residual = T::infinity();
    for it in 1..=max_iterations {
        lu.solve(&mut x);
        normalize(&mut x);
        let hx = system.apply(&x)?;
        let value: T = x.iter().zip(&hx).map(|(&a, &b)| a * b).sum();
        residual = hx
            .iter()
            .zip(&x)
            .map(|(&h, &v)| (h - value * v) * (h - value * v))
            .sum::<T>()
            .sqrt();
        if residual <= tol {
            fix_sign(&mut x);
            return Ok(Eigenpair { value, vector: x, residual, iterations: it });
        }
    }
    Err(Error::NotConverged { iterations: max_iterations, residual: residual.as_f64() })
}

fn normalize<T: Real>(x: &mut [T]) {
    let norm = x.iter().map(|&v| v * v).sum::<T>().sqrt();
    if norm > T::zero() {
        x.iter_mut().for_each(|v| *v = *v / norm);
    }
}

fn fix_sign<T: Real>(x: &mut [T]) {
    let pivot = x
        .iter()
        .copied()
        .fold(T::zero(), |best, v| if v.abs() > best.abs() { v } else { best });
    if pivot < T::zero() {
        x.iter_mut().for_each(|v| *v = -*v);
    }
}

/// LU factorisation of `T - σI` with partial pivoting (the `gttrf` scheme).
struct ShiftedLu<T> {
    dl: Vec<T>,
    d: Vec<T>,
    du: Vec<T>,
    du2: Vec<T>,
    swapped: Vec<bool>,
}

impl<T: Real> ShiftedLu<T> {
    fn factor(system: &TridiagonalSystem<T>, shift: T) -> Self {
        let n = system.size();
        let mut d: Vec<T> = system.diagonal().iter().map(|&x| x - shift).collect();
        let mut dl = system.offdiagonal().to_vec();
        let mut du = system.offdiagonal().to_vec();
        let mut du2 = vec![T::zero(); n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != T::zero() {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] = d[i + 1] - fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        let (lo, hi) = system.gershgorin();
        let tiny = T::epsilon() * T::one().max(lo.abs()).max(hi.abs());
        for p in d.iter_mut() {
            if p.abs() < tiny {
                *p = if *p < T::zero() { -tiny } else { tiny };
            }
        }
        ShiftedLu { dl, d, du, du2, swapped }
    }

    fn solve(&self, b: &mut [T]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] = b[i + 1] - self.dl[i] * b[i];
            }
        }
        b[n - 1] = b[n - 1] / self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

/// Least-squares fit of `log(|E_n| - 2)` against `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthFit<T> {
    pub pairs: Vec<(usize, T)>,
    pub slope: T,
    pub intercept: T,
    /// RMS residual of the log-linear fit.
    pub residual: T,
    /// RMS residual of the competing power-law fit `log(|E_n| - 2)` vs `log n`.
    pub power_law_residual: T,
}

impl<T: Real> GrowthFit<T> {
    /// `exp(slope)`: the fitted geometric rate of `|E_n| - 2`.
    pub fn rate(&self) -> T {
        self.slope.exp()
    }

    /// Geometric decay: negative slope, and the log-linear model fits at least
    /// as well as a power law.
    pub fn is_geometric(&self) -> bool {
        self.slope < T::zero() && self.residual <= self.power_law_residual
    }
}

/// Fits the entries of `list` whose index lies in `range`.
pub fn decay_fit<T: Real>(list: &BoundStateList<T>, range: RangeInclusive<usize>) -> Result<GrowthFit<T>> {
    let points: Vec<(usize, T)> = list
        .entries
        .iter()
        .filter(|e| range.contains(&e.index))
        .map(|e| (e.index, e.energy))
        .collect();
    decay_fit_points(&points)
}

/// Fits explicit `(n, E_n)` pairs.
pub fn decay_fit_points<T: Real>(points: &[(usize, T)]) -> Result<GrowthFit<T>> {
    let two = T::lit(2.0);
    if let Some((n, e)) = points.iter().find(|(_, e)| !(e.abs() > two)) {
        return Err(Error::input(format!("entry {n} has |E| = {} inside the band", e.abs())));
    }
    let pairs: Vec<(usize, T)> = points.iter().map(|&(n, e)| (n, (e.abs() - two).ln())).collect();
    let xs: Vec<T> = pairs.iter().map(|&(n, _)| T::from_usize(n).unwrap()).collect();
    let ys: Vec<T> = pairs.iter().map(|&(_, y)| y).collect();
    let lin = line_fit(&xs, &ys)?;
    let log_xs: Vec<T> = xs.iter().map(|x| x.ln()).collect();
    let pow = line_fit(&log_xs, &ys)?;
    Ok(GrowthFit {
        pairs,
        slope: lin.slope,
        intercept: lin.intercept,
        residual: lin.rms,
        power_law_residual: pow.rms,
    })
}

/// Top-eigenvalue estimate of a large sparse operator by plain Lanczos.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LanczosEstimate<T> {
    /// Largest eigenvalue of the Lanczos tridiagonal.
    pub ritz_value: T,
    /// Rayleigh quotient of the explicitly rebuilt Ritz vector: a lower bound
    /// for the top eigenvalue up to rounding.
    pub rayleigh_quotient: T,
    pub steps: usize,
}

/// Runs `steps` Lanczos iterations from the constant vector.
///
/// No reorthogonalisation: the top Ritz value is unaffected by ghost copies,
/// and the second pass rebuilds the Ritz vector from the same recurrence.
pub fn lanczos_top<T: Real, Op: LatticeOperator<T>>(op: &Op, steps: usize) -> Result<LanczosEstimate<T>> {
    let n = op.dim();
    if n == 0 || steps == 0 {
        return Err(Error::input("Lanczos needs a non-empty operator and at least one step"));
    }
    let start = {
        let v = T::one() / T::from_usize(n).unwrap().sqrt();
        vec![v; n]
    };
    let (alphas, betas) = lanczos_recurrence(op, &start, steps, None)?;
    let k = alphas.len();
    let t = TridiagonalSystem::new(alphas.clone(), betas[..k - 1].to_vec())?;
    let (lo, hi) = search_hull(&t);
    let ritz_value = bisect_index(&t, k - 1, lo, hi, T::epsilon() * (T::one() + hi.abs()));
    let y = if k == 1 {
        vec![T::one()]
    } else {
        let shift = ritz_value + T::lit(1e3) * T::epsilon() * (T::one() + hi.abs());
        iterate_inverse(&t, shift, 50, T::lit(1e-9))
            .or_else(|_| iterate_inverse(&t, shift, 200, T::lit(1e-6)))?
            .vector
    };
    let mut ritz_vector = vec![T::zero(); n];
    lanczos_recurrence(op, &start, k, Some((&y, &mut ritz_vector)))?;
    let norm2: T = ritz_vector.iter().map(|&v| v * v).sum();
    let rayleigh_quotient = op.quadratic_form(&ritz_vector)? / norm2;
    Ok(LanczosEstimate { ritz_value, rayleigh_quotient, steps: k })
}

type Accumulator<'a, T> = Option<(&'a [T], &'a mut Vec<T>)>;

fn lanczos_recurrence<T: Real, Op: LatticeOperator<T>>(
    op: &Op,
    start: &[T],
    steps: usize,
    mut accumulate: Accumulator<'_, T>,
) -> Result<(Vec<T>, Vec<T>)> {
    let mut alphas = Vec::with_capacity(steps);
    let mut betas = Vec::with_capacity(steps);
    let mut prev = vec![T::zero(); start.len()];
    let mut cur = start.to_vec();
    let mut beta = T::zero();
    for j in 0..steps {
        if let Some((y, acc)) = accumulate.as_mut() {
            for (a, &c) in acc.iter_mut().zip(&cur) {
                *a = *a + y[j] * c;
            }
        }
        let mut w = op.apply(&cur)?;
        for (wi, &p) in w.iter_mut().zip(&prev) {
            *wi = *wi - beta * p;
        }
        let alpha: T = w.iter().zip(&cur).map(|(&a, &b)| a * b).sum();
        for (wi, &c) in w.iter_mut().zip(&cur) {
            *wi = *wi - alpha * c;
        }
        alphas.push(alpha);
        beta = w.iter().map(|&v| v * v).sum::<T>().sqrt();
        betas.push(beta);
        if beta <= T::epsilon() * (T::one() + alpha.abs()) {
            break;
        }
        for wi in w.iter_mut() {
            *wi = *wi / beta;
        }
        prev = std::mem::replace(&mut cur, w);
    }
    Ok((alphas, betas))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Lattice, Potential};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn single_site(g: f64, half_width: i64) -> TridiagonalSystem<f64> {
        Potential::single_site(Lattice::WholeLine, 0, g).unwrap().truncate(-half_width, half_width).unwrap()
    }

    /// Bound state of a rank-one perturbation g·δ₀ of h₀ on ℤ: ψ(n) = z^|n|
    /// solves the eigen-equation with E = z + 1/z and g = 1/z - z.
    fn rank_one_energy(g: f64) -> f64 {
        g.signum() * (g * g + 4.0).sqrt()
    }

    #[test]
    fn sturm_count_free_three_sites() {
        let sys = TridiagonalSystem::<f64>::free(3).unwrap();
        assert_eq!(sturm_count(&sys, 0.0), 1);
        assert_eq!(sturm_count(&sys, 1.0), 2);
        let (lo, hi) = sys.gershgorin();
        assert_eq!(sturm_count(&sys, lo - 1e-9), 0);
        assert_eq!(sturm_count(&sys, hi + 1e-9), 3);
    }

    #[test]
    fn sturm_count_survives_exact_zero_pivots() {
        // diag 0 with E = 0 makes the first pivot vanish exactly
        let sys = TridiagonalSystem::new(vec![0.0, 0.0], vec![1.0]).unwrap();
        assert_eq!(sturm_count(&sys, 0.0), 1);
        assert_eq!(sturm_count(&sys, 1.0), 1);
        assert_eq!(sturm_count(&sys, 1.0 + 1e-12), 2);
    }

    #[test]
    fn single_site_bound_states() {
        let above = single_site(1.0, 100);
        let list = eigenvalues_outside_band(&EigenRequest::new(&above)).unwrap();
        assert_eq!(list.len(), 1);
        assert_eq!(list.entries[0].side, Side::AboveBand);
        assert!((list.entries[0].energy - 5f64.sqrt()).abs() < 1e-6);
        assert!((list.entries[0].energy - rank_one_energy(1.0)).abs() < 1e-9);

        let below = single_site(-1.0, 100);
        let list = eigenvalues_outside_band(&EigenRequest::new(&below)).unwrap();
        assert_eq!(list.entries[0].side, Side::BelowBand);
        assert!((list.entries[0].energy + 5f64.sqrt()).abs() < 1e-6);

        let free = TridiagonalSystem::<f64>::free(201).unwrap();
        assert!(eigenvalues_outside_band(&EigenRequest::new(&free)).unwrap().is_empty());
    }

    #[test]
    fn ordering_breaks_ties_above_first() {
        let list = BoundStateList::from_unordered(
            vec![(-3.0, Side::BelowBand), (3.0, Side::AboveBand), (2.5, Side::AboveBand), (-4.0, Side::BelowBand)],
            false,
        );
        let got: Vec<(usize, f64)> = list.entries.iter().map(|e| (e.index, e.energy)).collect();
        assert_eq!(got, vec![(1, -4.0), (2, 3.0), (3, -3.0), (4, 2.5)]);
    }

    #[test]
    fn max_count_keeps_largest_moduli() {
        let diag = vec![5.0, 0.0, 0.0, -7.0, 0.0, 0.0, 3.5, 0.0, 0.0];
        let sys = TridiagonalSystem::new(diag, vec![0.0; 8]).unwrap();
        let list = eigenvalues_outside_band(&EigenRequest::new(&sys).max_count(2)).unwrap();
        assert!(list.truncated);
        let e: Vec<f64> = list.entries.iter().map(|x| x.energy).collect();
        assert!((e[0] + 7.0).abs() < 1e-9 && (e[1] - 5.0).abs() < 1e-9);
    }

    #[test]
    fn tolerance_floor_is_enforced() {
        let sys = TridiagonalSystem::<f64>::free(4).unwrap();
        assert!(eigenvalues_outside_band(&EigenRequest::new(&sys).tolerance(1e-16)).is_err());
    }

    #[test]
    fn dense_oracle_examples() {
        let two = dense_oracle(&TridiagonalSystem::<f64>::free(2).unwrap()).unwrap();
        assert!((two[0] + 1.0).abs() < 1e-14 && (two[1] - 1.0).abs() < 1e-14);
        let one = dense_oracle(&TridiagonalSystem::new(vec![5.0], vec![]).unwrap()).unwrap();
        assert_eq!(one, vec![5.0]);
        let n = 40;
        let free = dense_oracle(&TridiagonalSystem::<f64>::free(n).unwrap()).unwrap();
        let mut exact: Vec<f64> = (1..=n).map(|k| 2.0 * (k as f64 * PI / (n as f64 + 1.0)).cos()).collect();
        exact.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in free.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(matches!(
            dense_oracle(&TridiagonalSystem::<f64>::free(2001).unwrap()),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn bisection_matches_closed_form_free_spectrum() {
        let n = 300;
        let sys = TridiagonalSystem::<f64>::free(n).unwrap();
        let all = all_eigenvalues(&sys, 1e-12);
        for (k, e) in all.iter().enumerate() {
            let exact = 2.0 * ((n - k) as f64 * PI / (n as f64 + 1.0)).cos();
            assert!((e - exact).abs() < 1e-11, "k={k}");
        }
    }

    #[test]
    fn sturm_agrees_with_dense_counts_on_random_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..200 {
            let n = rng.gen_range(1..=50);
            let diag: Vec<f64> = (0..n).map(|_| rng.gen_range(-4.0..4.0)).collect();
            let off: Vec<f64> = (1..n).map(|_| rng.gen_range(0.05..2.0)).collect();
            let sys = TridiagonalSystem::new(diag, off).unwrap();
            let spectrum = dense_oracle(&sys).unwrap();
            for _ in 0..5 {
                let e: f64 = rng.gen_range(-7.0..7.0);
                if spectrum.iter().any(|x| (x - e).abs() < 1e-9) {
                    continue;
                }
                assert_eq!(sturm_count(&sys, e), spectrum.iter().filter(|&&x| x < e).count());
            }
        }
    }

    #[test]
    fn inverse_iteration_rank_one_vector() {
        let sys = single_site(1.0, 100);
        let pair = inverse_iteration(&sys, 2.236).unwrap();
        assert!((pair.value - 5f64.sqrt()).abs() < 1e-10);
        assert!(pair.residual <= 1e-10);
        let z = (5f64.sqrt() - 1.0) / 2.0;
        let center = pair.vector[100];
        for k in 1..20 {
            assert!((pair.vector[100 + k] / center - z.powi(k as i32)).abs() < 1e-8);
            assert!((pair.vector[100 - k] / center - z.powi(k as i32)).abs() < 1e-8);
        }
    }

    #[test]
    fn inverse_iteration_trivial_and_failing_cases() {
        let one = TridiagonalSystem::new(vec![5.0f64], vec![]).unwrap();
        let pair = inverse_iteration(&one, 4.9).unwrap();
        assert_eq!(pair.vector, vec![1.0]);
        assert!((pair.value - 5.0).abs() < 1e-14);

        let free = TridiagonalSystem::<f64>::free(1001).unwrap();
        assert!(matches!(inverse_iteration(&free, 2.0), Err(Error::NotIsolated { .. })));

        let opts = InverseIterationOptions { isolation_radius: 0.2, max_iterations: 2, residual_tolerance: 1e-300 };
        assert!(matches!(
            inverse_iteration_with(&single_site(1.0, 50), 2.3, &opts),
            Err(Error::NotConverged { .. })
        ));
    }

    #[test]
    fn decay_fit_examples() {
        let geometric: Vec<(usize, f64)> = (1..=12).map(|n| (n, 2.0 + 4f64.powi(-(n as i32)))).collect();
        let fit = decay_fit_points(&geometric).unwrap();
        assert!((fit.slope + 4f64.ln()).abs() < 1e-12);
        assert!(fit.is_geometric());

        let harmonic: Vec<(usize, f64)> = (1..=200).map(|n| (n, 2.0 + 1.0 / n as f64)).collect();
        let fit = decay_fit_points(&harmonic).unwrap();
        assert!(!fit.is_geometric());
        let short = decay_fit_points(&harmonic[..20]).unwrap();
        assert!(fit.slope.abs() < short.slope.abs());

        assert!(decay_fit_points(&geometric[..2]).is_err());
        assert!(decay_fit_points(&[(1, 2.5), (2, 1.0), (3, 2.1)]).is_err());
    }

    #[test]
    fn lanczos_recovers_rank_one_eigenvalue() {
        let sys = single_site(1.0, 150);
        let est = lanczos_top(&sys, 120).unwrap();
        assert!((est.ritz_value - 5f64.sqrt()).abs() < 1e-8);
        assert!((est.rayleigh_quotient - 5f64.sqrt()).abs() < 1e-6);
        assert!(est.rayleigh_quotient <= 5f64.sqrt() + 1e-12);
    }
}
