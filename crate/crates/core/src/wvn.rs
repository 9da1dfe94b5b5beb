//! The Wigner–von Neumann type example on the half-line.
//!
//! ψ(n) = σ(n)(n+1)^{-α} with the sign pattern `+ + - -` is an ℓ² solution
//! of `h_V ψ = 0` for the potential read off from the eigen-equation. The
//! rest of the module builds the sign-definite comparison potentials, the
//! Bargmann sum that bounds their bound-state counts, and the trial functions
//! behind the lower bound on `|E_n| - 2`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::eigen::{
    count_above, eigenvalues_outside_band, inverse_iteration_with, kth_eigenvalue, sturm_count, BoundStateList,
    EigenRequest, InverseIterationOptions,
};
use crate::lattice::{Lattice, LatticeOperator, Potential, Tail, TridiagonalSystem};
use crate::{Error, Real, Result};

/// √7, the smallest exponent for which the lower-bound construction is
/// guaranteed.
pub const GUARANTEED_ALPHA: f64 = 2.6457513110645907;

#[inline]
fn sigma(n: i64) -> i64 {
    if n.rem_euclid(4) < 2 {
        1
    } else {
        -1
    }
}

/// ψ(n) = σ(n)(n+1)^{-α}.
pub fn psi_value<T: Real>(alpha: T, n: i64) -> T {
    let magnitude = T::from_index(n + 1).powf(-alpha);
    if sigma(n) > 0 {
        magnitude
    } else {
        -magnitude
    }
}

/// V(n) for the closed-form tail: `V(0) = -2^{-α}` and, for `n ≥ 1`,
/// `V(n) = (-1)^n [ (1 + 1/n)^α - ((n+1)/(n+2))^α ]`.
pub fn potential_value<T: Real>(alpha: T, n: i64) -> T {
    if n <= 0 {
        return -T::lit(2.0).powf(-alpha);
    }
    let nf = T::from_index(n);
    let up = (alpha * (T::one() / nf).ln_1p()).exp_m1();
    let down = (alpha * (-T::one() / (nf + T::lit(2.0))).ln_1p()).exp_m1();
    let w = up - down;
    if n % 2 == 0 {
        w
    } else {
        -w
    }
}

/// ψ and V on the window `[0, n_max]`.
#[derive(Clone, Debug, PartialEq)]
pub struct WvnPair<T> {
    alpha: T,
    psi: Vec<T>,
    potential: Potential<T>,
}

/// Builds ψ and V on `[0, n_max]`; the potential keeps the closed-form tail.
pub fn build_wvn<T: Real>(alpha: T, n_max: usize) -> Result<WvnPair<T>> {
    if !(alpha > T::lit(0.5)) || !alpha.is_finite() {
        return Err(Error::input(format!("alpha must exceed 1/2 for a square-summable psi, got {alpha}")));
    }
    let n_max = n_max as i64;
    let psi = (0..=n_max).into_par_iter().map(|n| psi_value(alpha, n)).collect();
    let values = (0..=n_max).into_par_iter().map(|n| potential_value(alpha, n)).collect();
    let potential = Potential::new(Lattice::HalfLine, 0, values, Tail::Wvn { alpha })?;
    Ok(WvnPair { alpha, psi, potential })
}

impl<T: Real> WvnPair<T> {
    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn psi(&self) -> &[T] {
        &self.psi
    }

    pub fn potential(&self) -> &Potential<T> {
        &self.potential
    }

    pub fn window_end(&self) -> i64 {
        self.potential.window_end()
    }

    /// Whether α is in the range covered by the lower-bound construction.
    pub fn guaranteed(&self) -> bool {
        self.alpha >= T::lit(GUARANTEED_ALPHA) * (T::one() - T::epsilon())
    }

    /// `max |(h_V ψ)(n)| / (n+1)^{-α}` over `0 ≤ n < n_max`; the last site
    /// feels the truncation and is skipped.
    pub fn eigen_residual(&self) -> Result<T> {
        let n_max = self.window_end();
        let sys = self.potential.truncate(0, n_max)?;
        let r = sys.apply(&self.psi)?;
        Ok(r[..r.len().saturating_sub(1)]
            .iter()
            .zip(&self.psi)
            .map(|(&ri, &p)| ri.abs() / p.abs())
            .fold(T::zero(), T::max))
    }
}

/// F(n) = -Σ_{j≥n} V(j) with an estimate of the summation error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailSum<T> {
    pub value: T,
    pub remainder_bound: T,
}

const EULER_LEVELS: usize = 12;
const EULER_START: i64 = 1000;

/// Σ_{j≥j0} V(j) for the closed-form tail, `j0 ≥ 1`, by repeated averaging of
/// partial sums. Returns the sum and the spread of the last averaging level.
fn alternating_tail<T: Real>(alpha: T, j0: i64) -> (T, T) {
    let mut acc = T::zero();
    let mut partial: Vec<T> = (0..=EULER_LEVELS as i64)
        .map(|k| {
            acc = acc + potential_value(alpha, j0 + k);
            acc
        })
        .collect();
    let half = T::lit(0.5);
    while partial.len() > 2 {
        partial = partial.windows(2).map(|w| half * (w[0] + w[1])).collect();
    }
    (half * (partial[0] + partial[1]), (partial[0] - partial[1]).abs())
}

/// Σ_{j=from}^{to-1} V(j), summed in (j, j+1) pairs from the far end.
fn paired_sum<T: Real>(potential: &Potential<T>, from: i64, to: i64) -> T {
    let v = |j: i64| potential.value_at(j).expect("site on lattice");
    let mut total = T::zero();
    let mut j = to;
    if (to - from) % 2 == 1 {
        j -= 1;
        total = v(j);
    }
    while j > from {
        j -= 2;
        total = total + (v(j) + v(j + 1));
    }
    total
}

/// F(n) = -Σ_{j≥n} V(j).
pub fn tail_sum<T: Real>(potential: &Potential<T>, n: i64) -> Result<TailSum<T>> {
    if potential.value_at(n).is_none() {
        return Err(Error::input(format!("site {n} is not on the lattice")));
    }
    let end = potential.window_end() + 1;
    match potential.tail() {
        Tail::Zero => {
            let from = n.max(potential.window_start().min(end));
            let head = if from < end { paired_sum(potential, from, end) } else { T::zero() };
            Ok(TailSum { value: -head, remainder_bound: T::zero() })
        }
        Tail::Wvn { alpha } => {
            let j0 = n.max(end).max(EULER_START);
            let head = paired_sum(potential, n, j0);
            let (tail, spread) = alternating_tail(alpha, j0);
            Ok(TailSum { value: -(head + tail), remainder_bound: spread })
        }
    }
}

/// F(0), …, F(n_max + 1), seeded by two tail sums and filled in by
/// `F(n) = F(n+2) - (V(n) + V(n+1))`.
pub fn tail_sums<T: Real>(potential: &Potential<T>, n_max: i64) -> Result<Vec<T>> {
    let start = match potential.lattice() {
        Lattice::HalfLine => 0,
        _ => potential.window_start(),
    };
    if n_max < start {
        return Err(Error::input("tail-sum window is empty"));
    }
    let len = (n_max + 2 - start) as usize;
    let mut f = vec![T::zero(); len + 1];
    f[len] = tail_sum(potential, n_max + 2)?.value;
    f[len - 1] = tail_sum(potential, n_max + 1)?.value;
    let v = |j: i64| potential.value_at(j).expect("site on lattice");
    for k in (0..len - 1).rev() {
        let n = start + k as i64;
        f[k] = f[k + 2] - (v(n) + v(n + 1));
    }
    f.truncate(len);
    Ok(f)
}

/// F with the comparison potentials V^± = ±2[F(n)² + F(n+1)²] and
/// Ṽ = V²/4, all on the pair's window.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonSet<T> {
    /// F(0), …, F(n_max + 1).
    pub f: Vec<T>,
    pub v_plus: Potential<T>,
    pub v_minus: Potential<T>,
    pub vtilde: Potential<T>,
}

pub fn comparison_potentials<T: Real>(pair: &WvnPair<T>) -> Result<ComparisonSet<T>> {
    let n_max = pair.window_end();
    let f = tail_sums(&pair.potential, n_max)?;
    let two = T::lit(2.0);
    let plus: Vec<T> = f.windows(2).map(|w| two * (w[0] * w[0] + w[1] * w[1])).collect();
    let minus: Vec<T> = plus.iter().map(|&x| -x).collect();
    let quarter = T::lit(0.25);
    let vtilde = pair.potential.map_window(n_max, |_, v| quarter * v * v)?;
    Ok(ComparisonSet {
        v_plus: Potential::new(Lattice::HalfLine, 0, plus, Tail::Zero)?,
        v_minus: Potential::new(Lattice::HalfLine, 0, minus, Tail::Zero)?,
        vtilde,
        f,
    })
}

/// `(2 - h_V) - ½(2 - h_{V⁺})` and `(2 + h_V) - ½(2 + h_{V⁻})` on `[0, n_max]`.
pub fn difference_systems<T: Real>(
    pair: &WvnPair<T>,
    set: &ComparisonSet<T>,
    n_max: i64,
) -> Result<(TridiagonalSystem<T>, TridiagonalSystem<T>)> {
    let h = pair.potential.truncate(0, n_max)?;
    let plus = set.v_plus.truncate(0, n_max)?;
    let minus = set.v_minus.truncate(0, n_max)?;
    let half = T::lit(0.5);
    let one = T::one();
    // 1 - h_V + ½h_{V⁺}
    let d_plus = h.combine(-one, &plus, half)?.affine(one, one);
    // 1 + h_V - ½h_{V⁻}
    let d_minus = h.combine(one, &minus, -half)?.affine(one, one);
    Ok((d_plus, d_minus))
}

#[derive(Clone, Debug, PartialEq)]
pub struct InequalityReport<T> {
    pub window_end: i64,
    /// Bottom eigenvalue of the plus difference operator.
    pub plus_bottom: T,
    pub minus_bottom: T,
    /// Minimum Rayleigh quotient over the probe vectors.
    pub plus_probe_min: T,
    pub minus_probe_min: T,
    pub probes: usize,
}

impl<T: Real> InequalityReport<T> {
    /// Both differences are nonnegative up to `-tol`.
    pub fn holds(&self, tol: T) -> bool {
        [self.plus_bottom, self.minus_bottom, self.plus_probe_min, self.minus_probe_min]
            .iter()
            .all(|&x| x >= -tol)
    }
}

/// Checks both operator inequalities on `[0, n_max]` through the bottom
/// eigenvalue of each difference and through the given probe vectors.
pub fn operator_inequality_check<T: Real>(
    pair: &WvnPair<T>,
    set: &ComparisonSet<T>,
    n_max: i64,
    probes: &[Vec<T>],
) -> Result<InequalityReport<T>> {
    let (d_plus, d_minus) = difference_systems(pair, set, n_max)?;
    let tol = T::lit(1e-12).max(T::lit(16.0) * T::epsilon());
    let rayleigh = |sys: &TridiagonalSystem<T>| -> Result<T> {
        let mut best = T::infinity();
        for p in probes {
            let norm: T = p.iter().map(|&x| x * x).sum();
            if norm > T::zero() {
                best = best.min(sys.quadratic_form(p)? / norm);
            }
        }
        Ok(best)
    };
    Ok(InequalityReport {
        window_end: n_max,
        plus_bottom: kth_eigenvalue(&d_plus, 0, tol)?,
        minus_bottom: kth_eigenvalue(&d_minus, 0, tol)?,
        plus_probe_min: rayleigh(&d_plus)?,
        minus_probe_min: rayleigh(&d_minus)?,
        probes: probes.len(),
    })
}

/// Every unit vector δ_k plus `random` seeded probes with uniform entries in (-1, 1).
pub fn standard_probes<T: Real>(size: usize, random: usize, seed: u64) -> Vec<Vec<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probes: Vec<Vec<T>> = (0..size)
        .map(|k| {
            let mut e = vec![T::zero(); size];
            e[k] = T::one();
            e
        })
        .collect();
    for _ in 0..random {
        probes.push((0..size).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect());
    }
    probes
}

/// Sites beyond which the Bargmann sum is not followed.
pub const BARGMANN_CUTOFF_LIMIT: i64 = 100_000_000;

/// Σ_n (n+1)·| |W(n)| - λ |₊ over the half-line.
///
/// A closed-form tail is followed until its envelope `(3α + 1)/n` drops below
/// λ; the sum is rejected when that happens beyond [`BARGMANN_CUTOFF_LIMIT`].
pub fn bargmann_functional<T: Real>(w: &Potential<T>, lambda: T) -> Result<T> {
    if !(lambda > T::zero()) {
        return Err(Error::input(format!("lambda must be positive, got {lambda}")));
    }
    if w.lattice() != Lattice::HalfLine {
        return Err(Error::input("the Bargmann sum is defined for half-line potentials"));
    }
    let last = match w.tail() {
        Tail::Zero => w.window_end(),
        Tail::Wvn { alpha } => {
            let envelope = T::lit(3.0) * alpha + T::one();
            let cut = (envelope / lambda).ceil().max((T::lit(4.0) * alpha).ceil());
            if cut > T::from_index(BARGMANN_CUTOFF_LIMIT) {
                return Err(Error::input(format!(
                    "Bargmann sum does not settle before site {BARGMANN_CUTOFF_LIMIT} at lambda = {lambda}"
                )));
            }
            w.window_end().max(cut.to_i64().unwrap())
        }
    };
    let total = (0..=last.max(-1))
        .into_par_iter()
        .map(|n| {
            let excess = w.value_at(n).unwrap().abs() - lambda;
            if excess > T::zero() {
                T::from_index(n + 1) * excess
            } else {
                T::zero()
            }
        })
        .sum::<T>();
    Ok(total)
}

/// One row of a Bargmann sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BargmannRow<T> {
    pub lambda: T,
    /// #{n : |E_n(V)| ≥ 2 + λ} on the truncation.
    pub count: usize,
    /// Bargmann sum of V⁺ at λ.
    pub bargmann_value: T,
}

/// Counts bound states of `h_V` beyond `2 + λ` on `[0, n_max]` together with
/// the Bargmann sum of V⁺, for each λ.
pub fn bargmann_sweep<T: Real>(
    pair: &WvnPair<T>,
    set: &ComparisonSet<T>,
    n_max: i64,
    lambdas: &[T],
) -> Result<Vec<BargmannRow<T>>> {
    let sys = pair.potential.truncate(0, n_max)?;
    lambdas
        .par_iter()
        .map(|&lambda| {
            let level = T::lit(2.0) + lambda;
            let count = count_above(&sys, level) + sturm_count(&sys, -level);
            Ok(BargmannRow { lambda, count, bargmann_value: bargmann_functional(&set.v_plus, lambda)? })
        })
        .collect()
}

/// Portion of the window treated as the truncation boundary.
pub const BOUNDARY_FRACTION: f64 = 0.1;
/// Eigenvector mass near the truncation boundary above which a bound state is
/// considered unresolved.
pub const LEAKAGE_LIMIT: f64 = 1e-4;

/// Bound states of `h_V` on `[0, n_max]` with a resolution diagnostic.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedSpectrum<T> {
    pub n_max: i64,
    pub list: BoundStateList<T>,
    /// Squared eigenvector mass in the last tenth of the window, per entry.
    pub leakage: Vec<T>,
}

impl<T: Real> ResolvedSpectrum<T> {
    pub fn is_resolved(&self, k: usize) -> bool {
        self.leakage[k] < T::lit(LEAKAGE_LIMIT)
    }

    /// Number of leading entries (in |E| order) that are resolved.
    pub fn resolved_count(&self) -> usize {
        (0..self.list.len()).take_while(|&k| self.is_resolved(k)).count()
    }
}

/// Computes the bound states of the truncation and, by inverse iteration, how
/// much of each eigenvector reaches the far end of the window.
pub fn resolved_spectrum<T: Real>(pair: &WvnPair<T>, n_max: i64, tol: T) -> Result<ResolvedSpectrum<T>> {
    let sys = pair.potential.truncate(0, n_max)?;
    let list = eigenvalues_outside_band(&EigenRequest::new(&sys).tolerance(tol))?;
    let edge = ((1.0 - BOUNDARY_FRACTION) * (n_max + 1) as f64) as usize;
    let two = T::lit(2.0);
    let leakage = list
        .entries
        .par_iter()
        .map(|e| {
            let depth = e.energy.abs() - two;
            let mut opts = InverseIterationOptions::for_shift(&sys, e.energy);
            opts.isolation_radius = opts.isolation_radius.min(T::lit(0.25) * depth);
            let pair = inverse_iteration_with(&sys, e.energy, &opts)?;
            Ok(pair.vector[edge..].iter().map(|&x| x * x).sum())
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(ResolvedSpectrum { n_max, list, leakage })
}

/// Piecewise-linear trial function: 1 at m = 8^n, zero at m/4 - 1 and at
/// 3m/2 + 1, linear in between.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialFunction<T> {
    pub n: u32,
    pub m: i64,
    pub start: i64,
    pub end: i64,
    /// Values on `[start, end]`.
    pub values: Vec<T>,
}

/// Largest supported trial index (support of about 2.6·10⁶ sites).
pub const MAX_TRIAL_INDEX: u32 = 7;

pub fn trial_function<T: Real>(n: u32) -> Result<TrialFunction<T>> {
    if n == 0 || n > MAX_TRIAL_INDEX {
        return Err(Error::input(format!("trial index must be in 1..={MAX_TRIAL_INDEX}, got {n}")));
    }
    let m = 8i64.pow(n);
    let start = m / 4 - 1;
    let end = 3 * m / 2 + 1;
    let values = (start..=end)
        .map(|k| {
            if k <= m {
                T::from_index(k - start) / T::from_index(m - start)
            } else {
                T::from_index(end - k) / T::from_index(end - m)
            }
        })
        .collect();
    Ok(TrialFunction { n, m, start, end, values })
}

impl<T: Real> TrialFunction<T> {
    pub fn value_at(&self, k: i64) -> T {
        if k < self.start || k > self.end {
            T::zero()
        } else {
            self.values[(k - self.start) as usize]
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LowerBound<T> {
    pub n: u32,
    pub m: i64,
    /// ⟨φ_n|h_Ṽ - 2|φ_n⟩.
    pub form: T,
    /// 1/m.
    pub target: T,
}

impl<T: Real> LowerBound<T> {
    pub fn holds(&self) -> bool {
        self.form >= self.target
    }

    /// m·form; the bound holds iff this is at least 1.
    pub fn scaled(&self) -> T {
        self.form * T::from_index(self.m)
    }
}

/// Evaluates ⟨φ_n|h_Ṽ - 2|φ_n⟩ with Ṽ = V²/4 taken from the closed form.
pub fn lower_bound_check<T: Real>(pair: &WvnPair<T>, n: u32) -> Result<LowerBound<T>> {
    let phi = trial_function::<T>(n)?;
    let quarter = T::lit(0.25);
    let diagonal: Vec<T> = (phi.start..=phi.end)
        .map(|k| {
            let v = pair.potential.value_at(k).expect("half-line site");
            quarter * v * v - T::lit(2.0)
        })
        .collect();
    let size = diagonal.len();
    let sys = TridiagonalSystem::new(diagonal, vec![T::one(); size - 1])?;
    Ok(LowerBound {
        n,
        m: phi.m,
        form: sys.quadratic_form(&phi.values)?,
        target: T::one() / T::from_index(phi.m),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::{dense_oracle, eigenvalues_outside_band, EigenRequest};

    #[test]
    fn psi_examples() {
        let pair = build_wvn(1.0f64, 10).unwrap();
        let expected = [1.0, 0.5, -1.0 / 3.0, -0.25, 0.2];
        for (a, b) in pair.psi()[..5].iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        for (n, p) in pair.psi().iter().enumerate() {
            assert!((p.abs() - 1.0 / (n as f64 + 1.0)).abs() < 1e-16);
        }
    }

    #[test]
    fn potential_examples() {
        assert!((potential_value(1.0f64, 0) + 0.5).abs() < 1e-16);
        assert!((potential_value(1.0f64, 2) - 0.75).abs() < 1e-15);
        assert!((potential_value(1.0f64, 1) + 4.0 / 3.0).abs() < 1e-15);
        assert!(build_wvn(0.5, 10).is_err());
        assert!(build_wvn(0.3f32, 10).is_err());
    }

    #[test]
    fn closed_form_matches_ratio_formula() {
        for &alpha in &[0.75, 1.0, GUARANTEED_ALPHA, 4.0] {
            for n in 1..200i64 {
                let ratio = -(psi_value(alpha, n + 1) + psi_value(alpha, n - 1)) / psi_value(alpha, n);
                let closed = potential_value(alpha, n);
                assert!((ratio - closed).abs() <= 1e-12 * (1.0 + ratio.abs()), "alpha={alpha}, n={n}");
            }
            let v0 = -psi_value(alpha, 1) / psi_value(alpha, 0);
            assert!((potential_value(alpha, 0) - v0).abs() < 1e-15);
        }
    }

    #[test]
    fn potential_asymptotics() {
        let alpha = 1.0;
        let mut c = 0.0f64;
        for n in 10..=10_000i64 {
            let v = potential_value(alpha, n);
            let lead = 2.0 * alpha / n as f64;
            assert_eq!(v.signum(), if n % 2 == 0 { 1.0 } else { -1.0 });
            c = c.max((v.abs() - lead).abs() * (n * n) as f64);
        }
        assert!(c < 4.0, "C = {c}");
    }

    #[test]
    fn zero_energy_residual() {
        for alpha in [1.0, GUARANTEED_ALPHA] {
            let pair = build_wvn(alpha, 100_000).unwrap();
            assert!(pair.eigen_residual().unwrap() <= 1e-12);
        }
        let single = build_wvn(2.0f32, 1000).unwrap();
        assert!(single.eigen_residual().unwrap() <= 1e-5);
    }

    #[test]
    fn tail_sum_finite_support() {
        let v = Potential::single_site(Lattice::HalfLine, 0, 1.0).unwrap();
        assert_eq!(tail_sum(&v, 0).unwrap().value, -1.0);
        assert_eq!(tail_sum(&v, 1).unwrap().value, 0.0);
        let f = tail_sums(&v, 3).unwrap();
        assert_eq!(f, vec![-1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    /// Direct summation up to 10⁷ with compensated addition and Boole's
    /// half-term correction for the alternating remainder.
    fn direct_tail(alpha: f64, n: i64) -> f64 {
        let cutoff = 10_000_000i64;
        let (mut s, mut c) = (0.0f64, 0.0f64);
        for j in n..cutoff {
            let y = potential_value(alpha, j) - c;
            let t = s + y;
            c = (t - s) - y;
            s = t;
        }
        -(s + 0.5 * potential_value(alpha, cutoff))
    }

    #[test]
    fn tail_sum_matches_direct_summation() {
        let alpha = GUARANTEED_ALPHA;
        let pair = build_wvn(alpha, 10).unwrap();
        let ts = tail_sum(pair.potential(), 5).unwrap();
        assert!(ts.remainder_bound <= 1e-12);
        assert!((ts.value - direct_tail(alpha, 5)).abs() < 1e-10);
    }

    #[test]
    fn tail_sums_recurrence_agrees_with_independent_sums() {
        let pair = build_wvn(GUARANTEED_ALPHA, 3000).unwrap();
        let f = tail_sums(pair.potential(), 3000).unwrap();
        for n in [0i64, 1, 2, 17, 999, 1000, 1001, 2500, 3001] {
            let direct = tail_sum(pair.potential(), n).unwrap();
            assert!((f[n as usize] - direct.value).abs() < 1e-13, "n={n}");
        }
        for n in 0..3000usize {
            assert!((f[n] - f[n + 1] + pair.potential().value_at(n as i64).unwrap()).abs() < 1e-13);
        }
    }

    #[test]
    fn tail_sum_decays_like_one_over_n() {
        let pair = build_wvn(GUARANTEED_ALPHA, 10_000).unwrap();
        let f = tail_sums(pair.potential(), 10_000).unwrap();
        let c = (10..=10_000).map(|n| f[n].abs() * n as f64).fold(0.0, f64::max);
        assert!(c < 2.0 * GUARANTEED_ALPHA, "C = {c}");
    }

    #[test]
    fn comparison_set_invariants() {
        let pair = build_wvn(GUARANTEED_ALPHA, 10_000).unwrap();
        let set = comparison_potentials(&pair).unwrap();
        let lead = 4.0 * GUARANTEED_ALPHA.powi(2);
        let mut c = 0.0f64;
        for (n, (p, m)) in set.v_plus.values().iter().zip(set.v_minus.values()).enumerate() {
            assert!(*p >= 0.0 && *m <= 0.0 && *p == -*m);
            let v = pair.potential().value_at(n as i64).unwrap();
            assert_eq!(set.vtilde.values()[n], 0.25 * v * v);
            let scaled = p * ((n + 1) * (n + 1)) as f64;
            c = c.max(scaled);
            if n >= 100 {
                assert!((scaled - lead).abs() < 0.1 * lead, "n={n}: {scaled}");
            }
        }
        assert!(c < 10.0 * lead, "(n+1)^2 V+ bounded by {c}");
    }

    #[test]
    fn operator_inequalities_hold_on_small_window() {
        let pair = build_wvn(GUARANTEED_ALPHA, 400).unwrap();
        let set = comparison_potentials(&pair).unwrap();
        let probes = standard_probes(401, 20, 11);
        let report = operator_inequality_check(&pair, &set, 400, &probes).unwrap();
        assert!(report.holds(1e-8), "{report:?}");
        let (d_plus, _) = difference_systems(&pair, &set, 400).unwrap();
        let spectrum = dense_oracle(&d_plus).unwrap();
        assert!((spectrum[0] - report.plus_bottom).abs() < 1e-10);
    }

    #[test]
    fn delta_probe_reduces_to_diagonal() {
        let pair = build_wvn(GUARANTEED_ALPHA, 50).unwrap();
        let set = comparison_potentials(&pair).unwrap();
        let (d_plus, d_minus) = difference_systems(&pair, &set, 50).unwrap();
        for k in 0..=50i64 {
            let v = pair.potential().value_at(k).unwrap();
            let p = set.v_plus.value_at(k).unwrap();
            assert!((d_plus.diagonal()[k as usize] - (1.0 - v + 0.5 * p)).abs() < 1e-14);
            assert!((d_minus.diagonal()[k as usize] - (1.0 + v + 0.5 * p)).abs() < 1e-14);
            let mut e = vec![0.0; 51];
            e[k as usize] = 1.0;
            assert_eq!(d_plus.quadratic_form(&e).unwrap(), d_plus.diagonal()[k as usize]);
        }
    }

    #[test]
    fn eigenvalue_count_sandwich() {
        let n_max = 20_000;
        let pair = build_wvn(GUARANTEED_ALPHA, n_max).unwrap();
        let set = comparison_potentials(&pair).unwrap();
        let h = pair.potential().truncate(0, n_max as i64).unwrap();
        let hp = set.v_plus.truncate(0, n_max as i64).unwrap();
        let hm = set.v_minus.truncate(0, n_max as i64).unwrap();
        for k in 1..=16 {
            let lambda = 2f64.powi(-k);
            let above = count_above(&h, 2.0 + lambda);
            assert!(above <= count_above(&hp, 2.0 + 2.0 * lambda));
            assert!(above <= count_above(&hp, 2.0 + 0.5 * lambda));
            let below = sturm_count(&h, -2.0 - lambda);
            assert!(below <= sturm_count(&hm, -2.0 - 2.0 * lambda));
        }
    }

    #[test]
    fn bargmann_examples() {
        let zero = Potential::<f64>::zero(Lattice::HalfLine);
        assert_eq!(bargmann_functional(&zero, 0.3).unwrap(), 0.0);
        let delta = Potential::single_site(Lattice::HalfLine, 0, 1.0).unwrap();
        assert_eq!(bargmann_functional(&delta, 0.5).unwrap(), 0.5);
        assert!(bargmann_functional(&delta, 0.0).is_err());
        let whole = Potential::single_site(Lattice::WholeLine, 0, 1.0).unwrap();
        assert!(bargmann_functional(&whole, 0.5).is_err());
        let pair = build_wvn(1.0, 10).unwrap();
        assert!(bargmann_functional(pair.potential(), 1e-9).is_err());
        // |V(n)| ≈ 2/n for α = 1, so sites up to ~2/λ contribute
        assert!(bargmann_functional(pair.potential(), 1e-3).unwrap() > 0.0);
    }

    #[test]
    fn bargmann_grows_logarithmically() {
        let pair = build_wvn(GUARANTEED_ALPHA, 100_000).unwrap();
        let set = comparison_potentials(&pair).unwrap();
        let values: Vec<f64> =
            (1..=16).map(|k| bargmann_functional(&set.v_plus, 2f64.powi(-k)).unwrap()).collect();
        // V⁺(n) ≈ 4α²/n², so halving λ adds about 2α² log 2
        let last = values[15] - values[14];
        let prev = values[11] - values[10];
        assert!((last - prev).abs() < 0.05 * last, "{values:?}");
        let c = 2.0 * GUARANTEED_ALPHA.powi(2) * 2f64.ln();
        assert!((last - c).abs() < 0.1 * c, "increment {last} vs {c}");
    }

    #[test]
    fn trial_function_geometry() {
        let t = trial_function::<f64>(1).unwrap();
        assert_eq!((t.m, t.start, t.end), (8, 1, 13));
        assert_eq!(t.value_at(8), 1.0);
        assert_eq!(t.value_at(1), 0.0);
        assert_eq!(t.value_at(13), 0.0);
        assert!((t.value_at(2) - 1.0 / 7.0).abs() < 1e-15);
        assert!((t.value_at(9) - 0.8).abs() < 1e-15);
        let t2 = trial_function::<f64>(2).unwrap();
        assert_eq!((t2.start, t2.end), (15, 97));
        for n in 1..MAX_TRIAL_INDEX {
            let (a, b) = (trial_function::<f64>(n).unwrap(), trial_function::<f64>(n + 1).unwrap());
            assert!(a.end < b.start);
        }
        assert!(trial_function::<f64>(0).is_err());
    }

    #[test]
    fn trial_form_scales_like_one_over_m() {
        let pair = build_wvn(GUARANTEED_ALPHA, 10).unwrap();
        let scaled: Vec<f64> = (1..=5).map(|n| lower_bound_check(&pair, n).unwrap().scaled()).collect();
        assert!(lower_bound_check(&pair, 1).unwrap().holds());
        // the scaled form settles to a positive constant, i.e. the form is ≳ 8^{-n}
        for s in &scaled {
            assert!(*s > 0.6);
        }
        assert!((scaled[4] - scaled[3]).abs() < 0.01);
    }

    #[test]
    fn deepest_states_are_flagged_unresolved() {
        let pair = build_wvn(GUARANTEED_ALPHA, 5000).unwrap();
        let spec = resolved_spectrum(&pair, 5000, 1e-13).unwrap();
        let k = spec.resolved_count();
        assert!(k >= 5 && k < spec.list.len(), "{k} of {}", spec.list.len());
        assert!(spec.is_resolved(0));
        assert!(!spec.is_resolved(spec.list.len() - 1));
    }

    #[test]
    fn bound_states_decay_geometrically() {
        let n_max = 20_000;
        let pair = build_wvn(GUARANTEED_ALPHA, n_max).unwrap();
        let sys = pair.potential().truncate(0, n_max as i64).unwrap();
        let list = eigenvalues_outside_band(&EigenRequest::new(&sys)).unwrap();
        assert!(list.len() >= 6, "{list:?}");
        let fit = crate::eigen::decay_fit(&list, 1..=list.len()).unwrap();
        assert!(fit.slope < 0.0);
    }
}
