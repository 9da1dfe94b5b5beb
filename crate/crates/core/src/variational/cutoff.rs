use std::fmt;

use super::model::{Domain, GroundStateModel, ScalarFn};
use crate::quadrature::gauss_legendre;
use crate::{Error, Real, Result};

/// A compactly supported function a on ℝ, ℤ or ℤ² (radial use in 2D).
pub trait Profile<T: Real>: Sync {
    /// a(x) on the line; lattice sites use integer x.
    fn value(&self, x: T) -> T;

    fn value_2d(&self, p: [T; 2]) -> T {
        self.value(p[0].hypot(p[1]))
    }

    /// a′(x) on the line.
    fn derivative(&self, x: T) -> T;

    /// Sorted points where a′ may jump; the first and last bound the support.
    fn breakpoints(&self) -> Vec<T>;

    /// a vanishes wherever |x| ≥ reach.
    fn reach(&self) -> T;
}

/// cos² bump of height `height` and radius `radius` around `center`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bump<T> {
    pub center: [T; 2],
    pub radius: T,
    pub height: T,
}

impl<T: Real> Bump<T> {
    pub fn new(center: [T; 2], radius: T, height: T) -> Result<Self> {
        if !(radius > T::zero()) {
            return Err(Error::input("bump radius must be positive"));
        }
        Ok(Bump { center, radius, height })
    }

    fn shape(&self, d: T) -> T {
        if d >= self.radius {
            return T::zero();
        }
        let c = (T::FRAC_PI_2() * d / self.radius).cos();
        self.height * c * c
    }
}

impl<T: Real> Profile<T> for Bump<T> {
    fn value(&self, x: T) -> T {
        self.shape((x - self.center[0]).abs())
    }

    fn value_2d(&self, p: [T; 2]) -> T {
        self.shape((p[0] - self.center[0]).hypot(p[1] - self.center[1]))
    }

    fn derivative(&self, x: T) -> T {
        let d = x - self.center[0];
        if d.abs() >= self.radius {
            return T::zero();
        }
        -self.height * T::FRAC_PI_2() / self.radius * (T::PI() * d / self.radius).sin()
    }

    fn breakpoints(&self) -> Vec<T> {
        let c = self.center[0];
        vec![c - self.radius, c, c + self.radius]
    }

    fn reach(&self) -> T {
        self.center[0].hypot(self.center[1]) + self.radius
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CutoffKind {
    Linear1d,
    Log2d,
    Adapted1d,
}

impl CutoffKind {
    pub fn name(self) -> &'static str {
        match self {
            CutoffKind::Linear1d => "linear_1d",
            CutoffKind::Log2d => "log_2d",
            CutoffKind::Adapted1d => "adapted_1d",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "linear_1d" | "linear" => Some(CutoffKind::Linear1d),
            "log_2d" | "log" => Some(CutoffKind::Log2d),
            "adapted_1d" | "adapted" => Some(CutoffKind::Adapted1d),
            _ => None,
        }
    }
}

/// Intervals in the cumulative ∫ψ⁻² table of a continuum adapted cutoff.
const ADAPTED_TABLE_INTERVALS: usize = 2048;

/// Cumulative ∫_M^t w on a geometric grid of [M, N]; w(t) = ψ(±t)⁻².
#[derive(Clone)]
struct AdaptedTable<T> {
    m: T,
    /// log of the ratio of consecutive nodes.
    step: T,
    cumulative: Vec<T>,
    weight: ScalarFn<T>,
}

impl<T: Real> AdaptedTable<T> {
    fn new(weight: ScalarFn<T>, m: T, n: T) -> Result<Self> {
        let step = (n / m).ln() / T::from_usize(ADAPTED_TABLE_INTERVALS).unwrap();
        let mut cumulative = Vec::with_capacity(ADAPTED_TABLE_INTERVALS + 1);
        let mut acc = T::zero();
        cumulative.push(acc);
        for k in 0..ADAPTED_TABLE_INTERVALS {
            let a = m * (step * T::from_usize(k).unwrap()).exp();
            let b = if k + 1 == ADAPTED_TABLE_INTERVALS { n } else { m * (step * T::from_usize(k + 1).unwrap()).exp() };
            acc = acc + gauss_legendre(|t| weight(t), a, b);
            cumulative.push(acc);
        }
        if !(acc.is_finite() && acc > T::zero()) {
            return Err(Error::input("psi^-2 is not integrable on the cutoff ramp"));
        }
        Ok(AdaptedTable { m, step, cumulative, weight })
    }

    fn total(&self) -> T {
        self.cumulative[ADAPTED_TABLE_INTERVALS]
    }

    /// ∫_M^t w.
    fn partial(&self, t: T) -> T {
        let k = ((t / self.m).ln() / self.step).floor().to_usize().unwrap_or(0).min(ADAPTED_TABLE_INTERVALS - 1);
        let node = self.m * (self.step * T::from_usize(k).unwrap()).exp();
        let w = &self.weight;
        self.cumulative[k] + gauss_legendre(|s| w(s), node, t)
    }
}

#[derive(Clone)]
enum Adapted<T> {
    None,
    /// a at M, M+1, …, N on each side.
    Discrete { right: Vec<T>, left: Vec<T> },
    Continuum { right: AdaptedTable<T>, left: AdaptedTable<T> },
}

/// The three radial cutoffs: a = 1 on |x| ≤ M, a = 0 on |x| ≥ N.
#[derive(Clone)]
pub struct CutoffProfile<T> {
    kind: CutoffKind,
    m: T,
    n: T,
    adapted: Adapted<T>,
}

impl<T: fmt::Debug> fmt::Debug for CutoffProfile<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CutoffProfile").field("kind", &self.kind).field("m", &self.m).field("n", &self.n).finish()
    }
}

fn check_radii<T: Real>(m: T, n: T) -> Result<()> {
    if !(m > T::zero() && m < n && n.is_finite()) {
        return Err(Error::input(format!("cutoff radii need 0 < M < N, got M = {m}, N = {n}")));
    }
    Ok(())
}

impl<T: Real> CutoffProfile<T> {
    pub fn linear(m: T, n: T) -> Result<Self> {
        check_radii(m, n)?;
        Ok(CutoffProfile { kind: CutoffKind::Linear1d, m, n, adapted: Adapted::None })
    }

    pub fn log_2d(m: T, n: T) -> Result<Self> {
        check_radii(m, n)?;
        Ok(CutoffProfile { kind: CutoffKind::Log2d, m, n, adapted: Adapted::None })
    }

    /// a(x) = 1 - ∫_M^|x| ψ⁻² / ∫_M^N ψ⁻², each side separately.
    ///
    /// On ℤ the increments a(t) - a(t+1) are proportional to 1/(ψ(t)ψ(t+1)),
    /// which makes each side's edge sum exactly (Σ 1/(ψψ))⁻¹.
    pub fn adapted(model: &GroundStateModel<T>, m: T, n: T) -> Result<Self> {
        check_radii(m, n)?;
        let adapted = match model.domain() {
            Domain::Lattice1d => {
                if m.fract() != T::zero() || n.fract() != T::zero() {
                    return Err(Error::input("lattice adapted cutoffs need integer M and N"));
                }
                let (mi, ni) = (m.to_i64().unwrap(), n.to_i64().unwrap());
                let side = |s: i64| -> Result<Vec<T>> {
                    let w: Vec<T> = (mi..ni)
                        .map(|t| Ok(T::one() / (model.psi_1d(s * t)? * model.psi_1d(s * (t + 1))?)))
                        .collect::<Result<_>>()?;
                    let total: T = w.iter().copied().sum();
                    let mut a = Vec::with_capacity(w.len() + 1);
                    let mut acc = T::zero();
                    a.push(T::one());
                    for (k, wk) in w.iter().enumerate() {
                        acc = acc + *wk;
                        a.push(if k + 1 == w.len() { T::zero() } else { T::one() - acc / total });
                    }
                    Ok(a)
                };
                Adapted::Discrete { right: side(1)?, left: side(-1)? }
            }
            Domain::Continuum1d => {
                let state = model.continuum_state().expect("continuum model");
                let (p1, p2) = (state.psi.clone(), state.psi.clone());
                let right = AdaptedTable::new(
                    std::sync::Arc::new(move |t: T| {
                        let v = p1(t);
                        T::one() / (v * v)
                    }),
                    m,
                    n,
                )?;
                let left = AdaptedTable::new(
                    std::sync::Arc::new(move |t: T| {
                        let v = p2(-t);
                        T::one() / (v * v)
                    }),
                    m,
                    n,
                )?;
                Adapted::Continuum { right, left }
            }
            Domain::Lattice2d => return Err(Error::input("the adapted cutoff is one-dimensional")),
        };
        Ok(CutoffProfile { kind: CutoffKind::Adapted1d, m, n, adapted })
    }

    pub fn kind(&self) -> CutoffKind {
        self.kind
    }

    pub fn m(&self) -> T {
        self.m
    }

    pub fn n(&self) -> T {
        self.n
    }
}

impl<T: Real> Profile<T> for CutoffProfile<T> {
    fn value(&self, x: T) -> T {
        let t = x.abs();
        if t <= self.m {
            return T::one();
        }
        if t >= self.n {
            return T::zero();
        }
        match (&self.adapted, self.kind) {
            (Adapted::None, CutoffKind::Log2d) => (self.n.ln() - t.ln()) / (self.n.ln() - self.m.ln()),
            (Adapted::None, _) => T::one() - (t - self.m) / (self.n - self.m),
            (Adapted::Discrete { right, left }, _) => {
                let side = if x < T::zero() { left } else { right };
                let k = (t - self.m).round().to_usize().unwrap_or(0).min(side.len() - 1);
                side[k]
            }
            (Adapted::Continuum { right, left }, _) => {
                let side = if x < T::zero() { left } else { right };
                T::one() - side.partial(t) / side.total()
            }
        }
    }

    fn derivative(&self, x: T) -> T {
        let t = x.abs();
        if t <= self.m || t >= self.n {
            return T::zero();
        }
        let s = if x < T::zero() { -T::one() } else { T::one() };
        match (&self.adapted, self.kind) {
            (Adapted::None, CutoffKind::Log2d) => -s / (t * (self.n.ln() - self.m.ln())),
            (Adapted::None, _) => -s / (self.n - self.m),
            (Adapted::Discrete { .. }, _) => {
                let lo = t.floor();
                self.value(s * (lo + T::one())) - self.value(s * lo)
            }
            (Adapted::Continuum { right, left }, _) => {
                let side = if x < T::zero() { left } else { right };
                -s * (side.weight)(t) / side.total()
            }
        }
    }

    fn breakpoints(&self) -> Vec<T> {
        vec![-self.n, -self.m, self.m, self.n]
    }

    fn reach(&self) -> T {
        self.n
    }
}

/// Σ over the edges of ℤ² of (a(x) - a(y))² for a radial profile centred at
/// the origin, streamed row by row over one quadrant.
///
/// By the two reflections and the x ↔ y swap the total is
/// 4·(row(0) + 2 Σ_{y≥1} row(y)), where row(y) sums the horizontal edges
/// (x, y)–(x+1, y) with x ≥ 0. Inside the log ramp the increment is
/// atanh(u)/log(N/M) with u = (r₂² - r₁²)/(r₂² + r₁²), which avoids two logs
/// per edge.
pub fn radial_edge_sum_2d<T: Real>(profile: &CutoffProfile<T>) -> T {
    let (m, n) = (profile.m.as_f64(), profile.n.as_f64());
    let (m2, n2) = (m * m, n * n);
    let inv_log = 1.0 / (n / m).ln();
    let is_log = profile.kind == CutoffKind::Log2d;
    let y_max = n.ceil() as i64 + 1;
    let generic = |x: i64, y: i64| -> f64 {
        let (xt, yt) = (T::from_index(x), T::from_index(y));
        let d = (profile.value_2d([xt, yt]) - profile.value_2d([xt + T::one(), yt])).as_f64();
        d * d
    };
    let row = |y: i64| -> f64 {
        let yy = (y * y) as f64;
        let x_lo = if yy >= m2 { 0 } else { ((m2 - yy).sqrt().floor() as i64 - 1).max(0) };
        let x_hi = if yy >= n2 { 0 } else { (n2 - yy).sqrt().ceil() as i64 + 1 };
        if !is_log {
            return (x_lo..=x_hi).map(|x| generic(x, y)).sum();
        }
        // [xa, xb]: both endpoints inside the closed ramp
        let mut xa = x_lo;
        while ((xa * xa) as f64 + yy) < m2 {
            xa += 1;
        }
        let mut xb = x_hi;
        while xb >= xa && (((xb + 1) * (xb + 1)) as f64 + yy) > n2 {
            xb -= 1;
        }
        let mut acc: f64 = (x_lo..xa.min(x_hi + 1)).map(|x| generic(x, y)).sum();
        acc += ((xb + 1).max(xa)..=x_hi).map(|x| generic(x, y)).sum::<f64>();
        if xb >= xa {
            acc += log_ramp_row(yy, xa, xb, m2 >= 400.0) * inv_log * inv_log;
        }
        acc
    };
    let mut total = row(0);
    let mut comp = 0.0;
    for y in 1..=y_max {
        // Kahan summation over rows
        let term = 2.0 * row(y) - comp;
        let next = total + term;
        comp = (next - total) - term;
        total = next;
    }
    T::lit(4.0 * total)
}

/// Σ_{x=xa}^{xb} atanh(u)², u = (2x+1)/(2(x² + y²) + 2x + 1).
///
/// With `small` every u is below 0.05 and a degree-9 series replaces atanh;
/// four independent lanes let the loop vectorise.
fn log_ramp_row(yy: f64, xa: i64, xb: i64, small: bool) -> f64 {
    let term = |x: f64| {
        let k = 2.0 * x + 1.0;
        let u = k / (2.0 * (x * x + yy) + k);
        let t = if small {
            let u2 = u * u;
            u * (1.0 + u2 * (1.0 / 3.0 + u2 * (0.2 + u2 * (1.0 / 7.0 + u2 * (1.0 / 9.0)))))
        } else {
            u.atanh()
        };
        t * t
    };
    let len = (xb - xa + 1) as usize;
    let mut lanes = [0.0f64; 4];
    let base = xa as f64;
    for c in 0..len / 4 {
        let x0 = base + (4 * c) as f64;
        for (j, lane) in lanes.iter_mut().enumerate() {
            *lane += term(x0 + j as f64);
        }
    }
    let mut acc = lanes.iter().sum::<f64>();
    for i in (len / 4) * 4..len {
        acc += term(base + i as f64);
    }
    acc
}

/// Σ_n (a(n) - a(n+1))² over ℤ.
pub fn edge_sum_1d<T: Real>(profile: &dyn Profile<T>) -> T {
    let bp = profile.breakpoints();
    let lo = bp[0].floor().to_i64().unwrap() - 1;
    let hi = bp[bp.len() - 1].ceil().to_i64().unwrap() + 1;
    (lo..hi)
        .map(|k| {
            let d = profile.value(T::from_index(k)) - profile.value(T::from_index(k + 1));
            d * d
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice2DWindow;

    #[test]
    fn profile_shapes() {
        let lin = CutoffProfile::linear(1.0, 11.0).unwrap();
        assert_eq!(lin.value(0.5), 1.0);
        assert_eq!(lin.value(-6.0), 0.5);
        assert_eq!(lin.value(12.0), 0.0);
        assert_eq!(lin.derivative(3.0), -0.1);
        assert_eq!(lin.derivative(-3.0), 0.1);
        let log = CutoffProfile::log_2d(1.0, std::f64::consts::E).unwrap();
        assert!((log.value(1.5) - (1.0 - 1.5f64.ln())).abs() < 1e-15);
        assert!(CutoffProfile::linear(2.0, 1.0).is_err());
        assert!(CutoffProfile::log_2d(0.0, 1.0).is_err());
    }

    #[test]
    fn adapted_with_constant_psi_is_linear() {
        let model = GroundStateModel::<f64>::continuum_constant();
        let ad = CutoffProfile::adapted(&model, 1.0, 11.0).unwrap();
        let lin = CutoffProfile::linear(1.0, 11.0).unwrap();
        for x in [-10.5, -3.3, 0.0, 2.0, 7.77, 10.99] {
            assert!((ad.value(x) - lin.value(x)).abs() < 1e-13, "{x}");
            assert!((ad.derivative(x) - lin.derivative(x)).abs() < 1e-13, "{x}");
        }
        let free = GroundStateModel::<f64>::free_1d();
        let ad = CutoffProfile::adapted(&free, 2.0, 7.0).unwrap();
        let lin = CutoffProfile::linear(2.0, 7.0).unwrap();
        for k in -9..=9 {
            assert!((ad.value(k as f64) - lin.value(k as f64)).abs() < 1e-15);
        }
    }

    #[test]
    fn adapted_is_monotone_between_one_and_zero() {
        let model = GroundStateModel::<f64>::gaussian();
        let ad = CutoffProfile::adapted(&model, 0.5, 3.0).unwrap();
        let mut prev = 1.0;
        for i in 0..=300 {
            let v = ad.value(0.5 + 2.5 * i as f64 / 300.0);
            assert!(v <= prev + 1e-15 && (0.0..=1.0).contains(&v));
            prev = v;
        }
        assert!(ad.value(3.0).abs() < 1e-15 && (ad.value(2.999999) - 0.0).abs() < 1e-5);
    }

    #[test]
    fn streamed_2d_sum_matches_window() {
        for profile in [CutoffProfile::log_2d(3.0, 40.0).unwrap(), CutoffProfile::linear(2.5, 17.3).unwrap()] {
            let win = Lattice2DWindow::new(45).unwrap();
            let direct: f64 = win
                .edges()
                .iter()
                .map(|&(i, j)| {
                    let [a, b] = win.sites()[i];
                    let [c, d] = win.sites()[j];
                    let da = profile.value_2d([a as f64, b as f64]) - profile.value_2d([c as f64, d as f64]);
                    da * da
                })
                .sum();
            let fast = radial_edge_sum_2d(&profile);
            assert!((fast - direct).abs() < 1e-12 * direct, "{fast} vs {direct}");
        }
    }

    #[test]
    fn discrete_linear_edge_sum() {
        let p = CutoffProfile::<f64>::linear(3.0, 13.0).unwrap();
        assert!((edge_sum_1d(&p) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn bump_derivative_matches_difference_quotient() {
        let b = Bump::<f64>::new([0.3, 0.0], 1.7, 0.8).unwrap();
        for x in [-1.0, 0.0, 0.5, 1.9] {
            let fd = (b.value(x + 1e-6) - b.value(x - 1e-6)) / 2e-6;
            assert!((fd - b.derivative(x)).abs() < 1e-8);
        }
        assert_eq!(b.value(2.0), 0.0);
    }
}
