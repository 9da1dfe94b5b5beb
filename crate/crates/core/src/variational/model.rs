use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lattice::Lattice2DWindow;
use crate::{Error, Real, Result};

pub type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    Lattice1d,
    Lattice2d,
    Continuum1d,
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::Lattice1d => "lattice_1d",
            Domain::Lattice2d => "lattice_2d",
            Domain::Continuum1d => "continuum_1d",
        }
    }

    pub fn is_discrete(self) -> bool {
        self != Domain::Continuum1d
    }
}

/// Closed-form ψ, ψ′ and (when known) Q of a continuum model.
#[derive(Clone)]
pub struct ContinuumState<T> {
    pub psi: ScalarFn<T>,
    pub dpsi: ScalarFn<T>,
    pub q: Option<ScalarFn<T>>,
    /// Points where ψ′ or Q may jump.
    pub kinks: Vec<T>,
}

#[derive(Clone)]
enum Background<T> {
    /// ψ ≡ 1, Q ≡ 0 on all of ℤ^dim.
    Free { dim: usize },
    Sampled1d { start: i64, psi: Vec<T>, q: Vec<T> },
    Sampled2d { window: Lattice2DWindow, psi: Vec<T>, q: Vec<T> },
    Continuum(ContinuumState<T>),
}

/// Positive ψ with `h_Q ψ = E0 ψ` (lattice) or `(-Δ + Q)ψ = E0 ψ` (continuum).
///
/// Sampled lattice models derive Q from ψ, so the eigen-equation holds on
/// every window site with zero Dirichlet data outside.
#[derive(Clone)]
pub struct GroundStateModel<T> {
    background: Background<T>,
    energy: T,
}

impl<T: Real> fmt::Debug for GroundStateModel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let desc = match &self.background {
            Background::Free { dim } => format!("Free{{dim: {dim}}}"),
            Background::Sampled1d { start, psi, .. } => format!("Sampled1d{{start: {start}, len: {}}}", psi.len()),
            Background::Sampled2d { window, .. } => format!("Sampled2d{{radius: {}}}", window.radius()),
            Background::Continuum(c) => format!("Continuum{{kinks: {:?}}}", c.kinks),
        };
        write!(f, "GroundStateModel {{ {desc}, energy: {:?} }}", self.energy)
    }
}

fn check_positive<T: Real>(psi: &[T]) -> Result<()> {
    if let Some(i) = psi.iter().position(|&p| !(p > T::zero() && p.is_finite())) {
        return Err(Error::input(format!("psi must be positive and finite, entry {i} is {}", psi[i])));
    }
    Ok(())
}

impl<T: Real> GroundStateModel<T> {
    /// ψ ≡ 1 on ℤ, Q ≡ 0, E0 = 2.
    pub fn free_1d() -> Self {
        GroundStateModel { background: Background::Free { dim: 1 }, energy: T::lit(2.0) }
    }

    /// ψ ≡ 1 on ℤ², Q ≡ 0, E0 = 4.
    pub fn free_2d() -> Self {
        GroundStateModel { background: Background::Free { dim: 2 }, energy: T::lit(4.0) }
    }

    /// ψ sampled on `start..start+len`; Q(n) = E0 - (ψ(n-1) + ψ(n+1))/ψ(n).
    pub fn lattice_1d(start: i64, psi: Vec<T>, energy: T) -> Result<Self> {
        if psi.len() < 3 {
            return Err(Error::input("a sampled 1D model needs at least three sites"));
        }
        check_positive(&psi)?;
        let n = psi.len();
        let q = (0..n)
            .map(|i| {
                let left = if i > 0 { psi[i - 1] } else { T::zero() };
                let right = if i + 1 < n { psi[i + 1] } else { T::zero() };
                energy - (left + right) / psi[i]
            })
            .collect();
        Ok(GroundStateModel { background: Background::Sampled1d { start, psi, q }, energy })
    }

    /// ψ sampled on the ball window of `radius`, in window order.
    pub fn lattice_2d(radius: i64, psi: Vec<T>, energy: T) -> Result<Self> {
        let window = Lattice2DWindow::new(radius)?;
        if psi.len() != window.len() {
            return Err(Error::input(format!(
                "psi has {} entries, the window has {} sites",
                psi.len(),
                window.len()
            )));
        }
        check_positive(&psi)?;
        let q = (0..window.len())
            .map(|i| {
                let nb: T = window.neighbors(i).map(|j| psi[j]).sum();
                energy - nb / psi[i]
            })
            .collect();
        Ok(GroundStateModel { background: Background::Sampled2d { window, psi, q }, energy })
    }

    pub fn continuum(state: ContinuumState<T>, energy: T) -> Self {
        GroundStateModel { background: Background::Continuum(state), energy }
    }

    /// ψ = exp(-x²/2), Q = x² - 1, E0 = 0.
    pub fn gaussian() -> Self {
        let state = ContinuumState {
            psi: Arc::new(|x: T| (-x * x * T::lit(0.5)).exp()),
            dpsi: Arc::new(|x: T| -x * (-x * x * T::lit(0.5)).exp()),
            q: Some(Arc::new(|x: T| x * x - T::one())),
            kinks: vec![],
        };
        Self::continuum(state, T::zero())
    }

    /// ψ ≡ 1, Q ≡ 0, E0 = 0 on ℝ.
    pub fn continuum_constant() -> Self {
        let state = ContinuumState {
            psi: Arc::new(|_| T::one()),
            dpsi: Arc::new(|_| T::zero()),
            q: Some(Arc::new(|_| T::zero())),
            kinks: vec![],
        };
        Self::continuum(state, T::zero())
    }

    /// ψ = 1 + |x|. Q is a point mass at 0 and is left unspecified.
    pub fn continuum_linear_growth() -> Self {
        let state = ContinuumState {
            psi: Arc::new(|x: T| T::one() + x.abs()),
            dpsi: Arc::new(|x: T| if x < T::zero() { -T::one() } else { T::one() }),
            q: None,
            kinks: vec![T::zero()],
        };
        Self::continuum(state, T::zero())
    }

    /// ψ(n) = exp(u_n), u_n uniform in [-1/2, 1/2], on `-half_width..=half_width`.
    pub fn random_lattice_1d(half_width: i64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = (0..2 * half_width + 1).map(|_| T::lit(rng.gen_range(-0.5..0.5f64).exp())).collect();
        Self::lattice_1d(-half_width, psi, T::lit(2.0))
    }

    pub fn random_lattice_2d(radius: i64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = Lattice2DWindow::new(radius)?.len();
        let psi = (0..len).map(|_| T::lit(rng.gen_range(-0.5..0.5f64).exp())).collect();
        Self::lattice_2d(radius, psi, T::lit(4.0))
    }

    pub fn domain(&self) -> Domain {
        match &self.background {
            Background::Free { dim: 1 } | Background::Sampled1d { .. } => Domain::Lattice1d,
            Background::Free { .. } | Background::Sampled2d { .. } => Domain::Lattice2d,
            Background::Continuum(_) => Domain::Continuum1d,
        }
    }

    pub fn energy(&self) -> T {
        self.energy
    }

    /// True for the translation-invariant backgrounds ψ ≡ 1, Q ≡ 0.
    pub fn is_free(&self) -> bool {
        matches!(self.background, Background::Free { .. })
    }

    /// Sampled window `(first, last)` of a 1D model; `None` for ℤ.
    pub fn window_1d(&self) -> Option<(i64, i64)> {
        match &self.background {
            Background::Sampled1d { start, psi, .. } => Some((*start, *start + psi.len() as i64 - 1)),
            _ => None,
        }
    }

    /// Radius of the sampled ball of a 2D model; `None` for ℤ².
    pub fn window_2d(&self) -> Option<&Lattice2DWindow> {
        match &self.background {
            Background::Sampled2d { window, .. } => Some(window),
            _ => None,
        }
    }

    pub fn continuum_state(&self) -> Option<&ContinuumState<T>> {
        match &self.background {
            Background::Continuum(c) => Some(c),
            _ => None,
        }
    }

    fn sampled_1d(&self, n: i64) -> Result<(T, T)> {
        match &self.background {
            Background::Free { dim: 1 } => Ok((T::one(), T::zero())),
            Background::Sampled1d { start, psi, q } => {
                let i = n - start;
                if i < 0 || i >= psi.len() as i64 {
                    return Err(Error::Coverage { start: n, end: n });
                }
                Ok((psi[i as usize], q[i as usize]))
            }
            _ => Err(Error::input(format!("{} model has no 1D sites", self.domain().name()))),
        }
    }

    fn sampled_2d(&self, s: [i64; 2]) -> Result<(T, T)> {
        match &self.background {
            Background::Free { dim: 2 } => Ok((T::one(), T::zero())),
            Background::Sampled2d { window, psi, q } => match window.index_of(s) {
                Some(i) => Ok((psi[i], q[i])),
                None => Err(Error::input(format!("site {s:?} lies outside the model window"))),
            },
            _ => Err(Error::input(format!("{} model has no 2D sites", self.domain().name()))),
        }
    }

    pub fn psi_1d(&self, n: i64) -> Result<T> {
        self.sampled_1d(n).map(|p| p.0)
    }

    pub fn q_1d(&self, n: i64) -> Result<T> {
        self.sampled_1d(n).map(|p| p.1)
    }

    pub fn psi_2d(&self, s: [i64; 2]) -> Result<T> {
        self.sampled_2d(s).map(|p| p.0)
    }

    pub fn q_2d(&self, s: [i64; 2]) -> Result<T> {
        self.sampled_2d(s).map(|p| p.1)
    }

    /// Site and both neighbours lie in the model's domain.
    pub fn interior_1d(&self, n: i64) -> bool {
        match self.window_1d() {
            None => self.domain() == Domain::Lattice1d,
            Some((lo, hi)) => lo < n && n < hi,
        }
    }

    pub fn interior_2d(&self, s: [i64; 2]) -> bool {
        match &self.background {
            Background::Free { dim: 2 } => true,
            Background::Sampled2d { window, .. } => window.index_of(s).is_some_and(|i| window.is_interior(i)),
            _ => false,
        }
    }

    /// Largest relative eigen-equation residual |(h_Q ψ)(x) - E0 ψ(x)| / ψ(x)
    /// over the sampled sites; zero for free models, `None` for the continuum.
    pub fn eigen_residual(&self) -> Option<T> {
        match &self.background {
            Background::Free { .. } => Some(T::zero()),
            Background::Sampled1d { psi, q, .. } => {
                let n = psi.len();
                Some((0..n).fold(T::zero(), |acc, i| {
                    let left = if i > 0 { psi[i - 1] } else { T::zero() };
                    let right = if i + 1 < n { psi[i + 1] } else { T::zero() };
                    acc.max(((left + right + q[i] * psi[i]) - self.energy * psi[i]).abs() / psi[i])
                }))
            }
            Background::Sampled2d { window, psi, q } => Some((0..psi.len()).fold(T::zero(), |acc, i| {
                let nb: T = window.neighbors(i).map(|j| psi[j]).sum();
                acc.max(((nb + q[i] * psi[i]) - self.energy * psi[i]).abs() / psi[i])
            })),
            Background::Continuum(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampled_models_solve_their_eigen_equation() {
        let m = GroundStateModel::<f64>::random_lattice_1d(50, 3).unwrap();
        assert!(m.eigen_residual().unwrap() <= 1e-10);
        assert_eq!(m.window_1d(), Some((-50, 50)));
        assert!(m.interior_1d(49) && !m.interior_1d(50));
        let m = GroundStateModel::<f64>::random_lattice_2d(12, 3).unwrap();
        assert!(m.eigen_residual().unwrap() <= 1e-10);
        assert!(m.interior_2d([11, 0]) && !m.interior_2d([12, 0]));
    }

    #[test]
    fn rejects_nonpositive_psi() {
        assert!(GroundStateModel::lattice_1d(0, vec![1.0, 0.0, 1.0], 2.0).is_err());
        assert!(GroundStateModel::lattice_1d(0, vec![1.0, f64::NAN, 1.0], 2.0).is_err());
        assert!(GroundStateModel::lattice_2d(1, vec![1.0; 4], 4.0).is_err());
    }

    #[test]
    fn free_models() {
        let m = GroundStateModel::<f64>::free_2d();
        assert_eq!(m.domain(), Domain::Lattice2d);
        assert_eq!(m.energy(), 4.0);
        assert_eq!(m.psi_2d([1000, -7]).unwrap(), 1.0);
        assert!(m.psi_1d(0).is_err());
    }
}
