use super::cutoff::{edge_sum_1d, radial_edge_sum_2d, CutoffKind, CutoffProfile, Profile};
use super::model::{Domain, GroundStateModel};
use crate::lattice::{Lattice2DWindow, LatticeOperator, TridiagonalSystem};
use crate::quadrature::integrate;
use crate::{Error, Real, Result};

/// Self-agreement target of the continuum quadratures.
pub const QUADRATURE_TOLERANCE: f64 = 1e-11;

/// Largest 2D window materialised for a direct form evaluation.
pub const WINDOW_RADIUS_LIMIT: i64 = 1500;

/// [m, 2m, 4m, …, n] so that uniform Simpson pieces follow a long ramp.
fn ramp_points<T: Real>(m: T, n: T) -> Vec<T> {
    let mut pts = vec![m];
    let mut x = m * T::lit(2.0);
    while x < n {
        pts.push(x);
        x = x * T::lit(2.0);
    }
    pts.push(n);
    pts
}

fn with_kinks<T: Real>(mut pts: Vec<T>, kinks: &[T]) -> Vec<T> {
    let (lo, hi) = (pts[0], pts[pts.len() - 1]);
    pts.extend(kinks.iter().copied().filter(|&k| k > lo && k < hi));
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup();
    pts
}

fn mirrored<T: Real>(pts: &[T]) -> Vec<T> {
    pts.iter().rev().map(|&x| -x).collect()
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Both sides of the polarization identity for a symmetric form H and V:
///
/// lhs = ⟨f+εg|H+V|f+εg⟩ + ⟨f-εg|H-V|f-εg⟩,
/// rhs = 2⟨f|H|f⟩ + 4ε⟨f|V|g⟩ + 2ε²⟨g|H|g⟩.
pub fn polarization_identity<T: Real, H: LatticeOperator<T>, V: LatticeOperator<T>>(
    h: &H,
    v: &V,
    f: &[T],
    g: &[T],
    epsilon: T,
) -> Result<(T, T)> {
    if h.dim() != v.dim() || f.len() != h.dim() || g.len() != h.dim() {
        return Err(Error::input(format!(
            "domain mismatch: H {}, V {}, f {}, g {}",
            h.dim(),
            v.dim(),
            f.len(),
            g.len()
        )));
    }
    let plus: Vec<T> = f.iter().zip(g).map(|(&a, &b)| a + epsilon * b).collect();
    let minus: Vec<T> = f.iter().zip(g).map(|(&a, &b)| a - epsilon * b).collect();
    let lhs = h.quadratic_form(&plus)? + v.quadratic_form(&plus)? + h.quadratic_form(&minus)?
        - v.quadratic_form(&minus)?;
    let two = T::lit(2.0);
    let rhs = two * h.quadratic_form(f)?
        + T::lit(4.0) * epsilon * dot(f, &v.apply(g)?)
        + two * epsilon * epsilon * h.quadratic_form(g)?;
    Ok((lhs, rhs))
}

fn support_1d<T: Real>(a: &dyn Profile<T>) -> (i64, i64) {
    let bp = a.breakpoints();
    (bp[0].floor().to_i64().unwrap(), bp[bp.len() - 1].ceil().to_i64().unwrap())
}

fn identity_1d<T: Real>(model: &GroundStateModel<T>, a: &dyn Profile<T>) -> Result<(T, T)> {
    let (lo, hi) = support_1d(a);
    let sites: Vec<i64> = (lo - 1..=hi + 1).collect();
    let av: Vec<T> = sites.iter().map(|&n| a.value(T::from_index(n))).collect();
    let mut f = Vec::with_capacity(sites.len());
    let mut diag = Vec::with_capacity(sites.len());
    let mut psi = Vec::with_capacity(sites.len());
    for (&n, &an) in sites.iter().zip(&av) {
        if an != T::zero() {
            if !model.interior_1d(n) {
                return Err(Error::input(format!("profile support reaches site {n} at the window boundary")));
            }
            let p = model.psi_1d(n)?;
            psi.push(p);
            f.push(an * p);
            diag.push(model.q_1d(n)?);
        } else {
            psi.push(model.psi_1d(n).unwrap_or(T::zero()));
            f.push(T::zero());
            diag.push(T::zero());
        }
    }
    let h = TridiagonalSystem::new(diag, vec![T::one(); sites.len() - 1])?;
    let form = model.energy() * dot(&f, &f) - h.quadratic_form(&f)?;
    let edges = (0..sites.len() - 1)
        .map(|i| {
            let d = av[i] - av[i + 1];
            if d == T::zero() {
                T::zero()
            } else {
                psi[i] * psi[i + 1] * d * d
            }
        })
        .sum();
    Ok((form, edges))
}

fn identity_2d<T: Real>(model: &GroundStateModel<T>, a: &dyn Profile<T>) -> Result<(T, T)> {
    let reach = a.reach().ceil().to_i64().unwrap_or(i64::MAX);
    let window = match model.window_2d() {
        Some(w) => w.clone(),
        None => {
            if reach + 1 > WINDOW_RADIUS_LIMIT {
                return Err(Error::TooLarge { size: reach as usize, limit: WINDOW_RADIUS_LIMIT as usize });
            }
            Lattice2DWindow::new(reach + 1)?
        }
    };
    let sites = window.sites();
    let av: Vec<T> = sites.iter().map(|s| a.value_2d([T::from_index(s[0]), T::from_index(s[1])])).collect();
    let mut psi = Vec::with_capacity(sites.len());
    let mut diag = Vec::with_capacity(sites.len());
    for (i, (&s, &ai)) in sites.iter().zip(&av).enumerate() {
        if ai != T::zero() && !window.is_interior(i) {
            return Err(Error::input(format!("profile support reaches site {s:?} at the window boundary")));
        }
        psi.push(model.psi_2d(s)?);
        diag.push(model.q_2d(s)?);
    }
    if a.reach() > T::from_index(window.radius()) {
        return Err(Error::input("profile support extends past the model window"));
    }
    let f: Vec<T> = av.iter().zip(&psi).map(|(&x, &p)| x * p).collect();
    let h = window.operator_with_diagonal(diag)?;
    let form = model.energy() * dot(&f, &f) - h.quadratic_form(&f)?;
    let edges = window
        .edges()
        .iter()
        .map(|&(i, j)| {
            let d = av[i] - av[j];
            psi[i] * psi[j] * d * d
        })
        .sum();
    Ok((form, edges))
}

fn quadrature_points<T: Real>(model: &GroundStateModel<T>, a: &dyn Profile<T>) -> Vec<T> {
    let mut bp = a.breakpoints();
    let (lo, hi) = (bp[0], bp[bp.len() - 1]);
    if let Some(state) = model.continuum_state() {
        bp.extend(state.kinks.iter().copied().filter(|&k| k > lo && k < hi));
    }
    bp.sort_by(|x, y| x.partial_cmp(y).unwrap());
    bp.dedup();
    bp
}

fn identity_continuum<T: Real>(model: &GroundStateModel<T>, a: &dyn Profile<T>) -> Result<(T, T)> {
    let state = model.continuum_state().expect("continuum model");
    let q = state
        .q
        .as_ref()
        .ok_or_else(|| Error::input("the ground-state identity needs Q; this model leaves it unspecified"))?;
    let e0 = model.energy();
    let bp = quadrature_points(model, a);
    let tol = T::lit(QUADRATURE_TOLERANCE);
    let form = integrate(
        |x| {
            let (p, dp) = ((state.psi)(x), (state.dpsi)(x));
            let (av, da) = (a.value(x), a.derivative(x));
            let df = da * p + av * dp;
            let f = av * p;
            df * df + (q(x) - e0) * f * f
        },
        &bp,
        tol,
    )?;
    let edges = integrate(
        |x| {
            let p = (state.psi)(x);
            let da = a.derivative(x);
            da * da * p * p
        },
        &bp,
        tol,
    )?;
    Ok((form.value, edges.value))
}

/// `(form_value, edge_sum)` for f = aψ: the deficit form of f (⟨f|E0 - h_Q|f⟩
/// on a lattice, ⟨f|H_Q - E0|f⟩ on the line) and Σ ψψ(Δa)² resp. ∫ (a′)²ψ².
pub fn ground_state_identity<T: Real>(model: &GroundStateModel<T>, a: &dyn Profile<T>) -> Result<(T, T)> {
    match model.domain() {
        Domain::Lattice1d => identity_1d(model, a),
        Domain::Lattice2d => identity_2d(model, a),
        Domain::Continuum1d => identity_continuum(model, a),
    }
}

/// The edge sum / ∫(a′)²ψ² of a cutoff, i.e. the deficit form of f = aψ.
///
/// Free lattices are summed without materialising a window; on the line a
/// `log_2d` profile is read radially, 2π ∫ a′(r)² ψ(r)² r dr.
pub fn cutoff_energy<T: Real>(model: &GroundStateModel<T>, profile: &CutoffProfile<T>) -> Result<T> {
    match model.domain() {
        Domain::Lattice1d if model.is_free() => Ok(edge_sum_1d(profile)),
        Domain::Lattice2d if model.is_free() => Ok(radial_edge_sum_2d(profile)),
        Domain::Lattice1d | Domain::Lattice2d => ground_state_identity(model, profile).map(|p| p.1),
        Domain::Continuum1d => {
            let state = model.continuum_state().expect("continuum model");
            let tol = T::lit(QUADRATURE_TOLERANCE);
            let (m, n) = (profile.m(), profile.n());
            if profile.kind() == CutoffKind::Log2d {
                let v = integrate(
                    |r| {
                        let (da, p) = (profile.derivative(r), (state.psi)(r));
                        da * da * p * p * r
                    },
                    &ramp_points(m, n),
                    tol,
                )?;
                return Ok(T::TAU() * v.value);
            }
            let integrand = |x: T| {
                let (da, p) = (profile.derivative(x), (state.psi)(x));
                da * da * p * p
            };
            let ramp = ramp_points(m, n);
            let right = with_kinks(ramp.clone(), &state.kinks);
            let left = with_kinks(mirrored(&ramp), &state.kinks);
            Ok(integrate(integrand, &left, tol)?.value + integrate(integrand, &right, tol)?.value)
        }
    }
}

/// {∫_M^N ψ⁻²}⁻¹ + {∫_{-N}^{-M} ψ⁻²}⁻¹, or on ℤ the sums of 1/(ψ(t)ψ(t+1)).
pub fn adapted_energy_formula<T: Real>(model: &GroundStateModel<T>, m: T, n: T) -> Result<T> {
    if !(m > T::zero() && m < n) {
        return Err(Error::input(format!("need 0 < M < N, got M = {m}, N = {n}")));
    }
    match model.domain() {
        Domain::Lattice1d => {
            if m.fract() != T::zero() || n.fract() != T::zero() {
                return Err(Error::input("lattice adapted cutoffs need integer M and N"));
            }
            let (mi, ni) = (m.to_i64().unwrap(), n.to_i64().unwrap());
            let side = |s: i64| -> Result<T> {
                let mut acc = T::zero();
                for t in mi..ni {
                    acc = acc + T::one() / (model.psi_1d(s * t)? * model.psi_1d(s * (t + 1))?);
                }
                Ok(acc.recip())
            };
            Ok(side(1)? + side(-1)?)
        }
        Domain::Continuum1d => {
            let state = model.continuum_state().expect("continuum model");
            let tol = T::lit(QUADRATURE_TOLERANCE);
            let w = |x: T| {
                let p = (state.psi)(x);
                T::one() / (p * p)
            };
            let ramp = ramp_points(m, n);
            let right = integrate(w, &with_kinks(ramp.clone(), &state.kinks), tol)?.value;
            let left = integrate(w, &with_kinks(mirrored(&ramp), &state.kinks), tol)?.value;
            Ok(right.recip() + left.recip())
        }
        Domain::Lattice2d => Err(Error::input("the adapted cutoff is one-dimensional")),
    }
}
