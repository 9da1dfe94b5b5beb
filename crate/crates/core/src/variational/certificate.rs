use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::Serialize;
use serde_json::json;

use super::cutoff::{Bump, CutoffKind, CutoffProfile, Profile};
use super::identity::{cutoff_energy, QUADRATURE_TOLERANCE};
use super::model::{Domain, GroundStateModel, ScalarFn};
use crate::eigen::{dense_oracle, kth_eigenvalue, lanczos_top, DENSE_ORACLE_LIMIT};
use crate::lattice::{Lattice, Lattice2DWindow, Potential, Potential2d, Tail, TridiagonalSystem};
use crate::quadrature::integrate;
use crate::{Error, Real, Result};

/// Largest 2D oracle window radius; beyond it Lanczos cost grows past the
/// acceptance budget.
pub const ORACLE_RADIUS_2D: i64 = 256;
pub const ORACLE_LANCZOS_STEPS: usize = 1500;
/// Radii of the logarithmic sign vectors tried on ℤ².
pub const LOG_BUMP_RADII: [i64; 5] = [8, 16, 32, 64, 128];
/// γ + (3/2) log 2: the constant in the ℤ² potential kernel
/// (log|x| + γ + (3/2) log 2)/2π.
const LATTICE_LOG_OFFSET: f64 = 1.6169364357012292;

/// A compactly supported perturbation V.
#[derive(Clone)]
pub enum Perturbation<T> {
    Lattice1d(Vec<(i64, T)>),
    Lattice2d(Vec<([i64; 2], T)>),
    Continuum { f: ScalarFn<T>, support: (T, T) },
}

impl<T: Real> Perturbation<T> {
    /// Whole-line potential with a zero tail.
    pub fn from_potential(v: &Potential<T>) -> Result<Self> {
        if v.lattice() != Lattice::WholeLine || v.tail() != Tail::Zero {
            return Err(Error::input("certificate perturbations are whole-line potentials with a zero tail"));
        }
        let start = v.window_start();
        Ok(Perturbation::Lattice1d(
            v.values()
                .iter()
                .enumerate()
                .filter(|(_, &x)| x != T::zero())
                .map(|(i, &x)| (start + i as i64, x))
                .collect(),
        ))
    }

    pub fn from_potential_2d(v: &Potential2d<T>) -> Self {
        Perturbation::Lattice2d(v.sites().filter(|(_, &x)| x != T::zero()).map(|(&s, &x)| (s, x)).collect())
    }

    pub fn continuum(f: impl Fn(T) -> T + Send + Sync + 'static, lo: T, hi: T) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::input("perturbation support needs lo < hi"));
        }
        Ok(Perturbation::Continuum { f: Arc::new(f), support: (lo, hi) })
    }

    fn domain(&self) -> Domain {
        match self {
            Perturbation::Lattice1d(_) => Domain::Lattice1d,
            Perturbation::Lattice2d(_) => Domain::Lattice2d,
            Perturbation::Continuum { .. } => Domain::Continuum1d,
        }
    }
}

/// Which of h_{Q±V} (resp. H_{Q±V}) has spectrum past E0.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flagged {
    QPlusV,
    QMinusV,
}

impl Flagged {
    pub fn name(self) -> &'static str {
        match self {
            Flagged::QPlusV => "Q+V",
            Flagged::QMinusV => "Q-V",
        }
    }

    fn sign<T: Real>(self) -> T {
        match self {
            Flagged::QPlusV => T::one(),
            Flagged::QMinusV => -T::one(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SignVector<T> {
    Sites1d(Vec<(i64, T)>),
    Sites2d(Vec<([i64; 2], T)>),
    /// Continuum cos² bump.
    Tent(Bump<T>),
}

/// A compactly supported g with ⟨ψ|V|g⟩ < 0.
#[derive(Clone, Debug, PartialEq)]
pub struct SignCandidate<T> {
    pub g: SignVector<T>,
    pub pairing: T,
    /// g vanishes outside |x| ≤ radius.
    pub radius: T,
    pub label: String,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchParams<T> {
    /// x₀ is searched in |x| ≤ support_radius.
    pub support_radius: T,
    pub n_cap: T,
    /// Defaults to `log_2d` on ℤ² and `linear_1d` otherwise.
    pub cutoff: Option<CutoffKind>,
    pub oracle: bool,
}

impl<T: Real> Default for SearchParams<T> {
    fn default() -> Self {
        SearchParams { support_radius: T::lit(64.0), n_cap: T::lit(131072.0), cutoff: None, oracle: true }
    }
}

#[derive(Clone, Debug)]
pub struct Certificate<T> {
    pub sign: Flagged,
    pub epsilon: T,
    pub m: T,
    pub n: T,
    /// ⟨ψ|V|g⟩.
    pub pairing: T,
    /// Sum of the two shifted forms; negative.
    pub form_total: T,
    /// The two summands ⟨f+εg|·|f+εg⟩ and ⟨f-εg|·|f-εg⟩.
    pub summands: [T; 2],
    /// Deficit form of f = aψ.
    pub cutoff_energy: T,
    pub g: SignCandidate<T>,
    pub cutoff: CutoffProfile<T>,
    /// Top (lattice) or bottom (line) eigenvalue of the flagged truncation.
    pub oracle_eigenvalue: Option<T>,
}

#[derive(Serialize)]
struct CertificateJson<'a> {
    sign: &'a str,
    epsilon: f64,
    #[serde(rename = "M")]
    m: f64,
    #[serde(rename = "N")]
    n: f64,
    pairing: f64,
    form_total: f64,
    oracle_eigenvalue: Option<f64>,
    g: Vec<serde_json::Value>,
    cutoff_kind: &'a str,
}

impl<T: Real> Certificate<T> {
    pub fn to_json(&self) -> String {
        let g = match &self.g.g {
            SignVector::Sites1d(v) => v.iter().map(|(s, x)| json!({"site": s, "value": x.as_f64()})).collect(),
            SignVector::Sites2d(v) => v.iter().map(|(s, x)| json!({"site": s, "value": x.as_f64()})).collect(),
            SignVector::Tent(b) => vec![json!({
                "center": b.center[0].as_f64(),
                "half_width": b.radius.as_f64(),
                "value": b.height.as_f64(),
            })],
        };
        let doc = CertificateJson {
            sign: self.sign.name(),
            epsilon: self.epsilon.as_f64(),
            m: self.m.as_f64(),
            n: self.n.as_f64(),
            pairing: self.pairing.as_f64(),
            form_total: self.form_total.as_f64(),
            oracle_eigenvalue: self.oracle_eigenvalue.map(Real::as_f64),
            g,
            cutoff_kind: self.cutoff.kind().name(),
        };
        serde_json::to_string_pretty(&doc).expect("certificate serializes")
    }

    /// The oracle eigenvalue lies strictly past E0 in the flagged direction.
    pub fn oracle_confirms(&self, model: &GroundStateModel<T>) -> Option<bool> {
        self.oracle_eigenvalue.map(|e| match model.domain() {
            Domain::Continuum1d => e < model.energy(),
            _ => e > model.energy(),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NotFound<T> {
    pub reason: String,
    /// Largest N at which the forms were evaluated.
    pub last_n: Option<T>,
    pub cutoff_energy: Option<T>,
}

#[derive(Clone, Debug)]
pub enum Outcome<T> {
    Found(Box<Certificate<T>>),
    NotFound(NotFound<T>),
}

impl<T: Real> Outcome<T> {
    pub fn certificate(&self) -> Option<&Certificate<T>> {
        match self {
            Outcome::Found(c) => Some(c),
            Outcome::NotFound(_) => None,
        }
    }
}

fn check_domains<T: Real>(model: &GroundStateModel<T>, v: &Perturbation<T>) -> Result<()> {
    if model.domain() != v.domain() {
        return Err(Error::input(format!(
            "perturbation lives on {}, the model on {}",
            v.domain().name(),
            model.domain().name()
        )));
    }
    Ok(())
}

fn norm2d<T: Real>(s: [i64; 2]) -> T {
    T::from_index(s[0]).hypot(T::from_index(s[1]))
}

/// Site of the largest |ψV| within the radius, ties to the earliest entry.
fn peak_site<S: Copy, T: Real>(entries: impl Iterator<Item = Result<(S, T, T)>>) -> Result<Option<(S, T)>> {
    let mut best: Option<(S, T, T)> = None;
    for e in entries {
        let (s, v, weight) = e?;
        if weight > T::zero() && best.as_ref().is_none_or(|b| weight > b.2) {
            best = Some((s, v, weight));
        }
    }
    Ok(best.map(|b| (b.0, b.1)))
}

fn candidates_1d<T: Real>(model: &GroundStateModel<T>, v: &[(i64, T)], radius: T) -> Result<Vec<SignCandidate<T>>> {
    let inside = v.iter().filter(|(n, x)| T::from_index(*n).abs() <= radius && *x != T::zero());
    let Some((x0, v0)) = peak_site(inside.map(|&(n, x)| Ok((n, x, (model.psi_1d(n)? * x).abs()))))? else {
        return Ok(vec![]);
    };
    let s = -v0.signum();
    let mut out = Vec::new();
    for k in 0..4i64 {
        let g: Vec<(i64, T)> = (-k..=k)
            .map(|j| (x0 + j, s * (T::one() - T::from_index(j.abs()) / T::from_index(k + 1))))
            .collect();
        if g.iter().any(|(n, _)| !model.interior_1d(*n)) {
            continue;
        }
        let gm: BTreeMap<i64, T> = g.iter().copied().collect();
        let mut pairing = T::zero();
        for &(n, x) in v {
            if let Some(&gv) = gm.get(&n) {
                pairing = pairing + model.psi_1d(n)? * x * gv;
            }
        }
        if pairing < T::zero() {
            let r = g.iter().map(|(n, _)| T::from_index(n.abs())).fold(T::zero(), T::max);
            out.push(SignCandidate { g: SignVector::Sites1d(g), pairing, radius: r, label: format!("tent{}", 2 * k + 1) });
        }
    }
    Ok(out)
}

fn candidate_2d<T: Real>(
    model: &GroundStateModel<T>,
    v: &[([i64; 2], T)],
    x0: [i64; 2],
    reach: i64,
    shape: impl Fn(T) -> T,
    label: String,
) -> Result<Option<SignCandidate<T>>> {
    let mut g = Vec::new();
    for dy in -reach..=reach {
        for dx in -reach..=reach {
            let d = T::from_index(dx).hypot(T::from_index(dy));
            let val = shape(d);
            if val != T::zero() {
                g.push(([x0[0] + dx, x0[1] + dy], val));
            }
        }
    }
    if g.iter().any(|(s, _)| !model.interior_2d(*s)) {
        return Ok(None);
    }
    let gm: HashMap<[i64; 2], T> = g.iter().copied().collect();
    let mut pairing = T::zero();
    for &(s, x) in v {
        if let Some(&gv) = gm.get(&s) {
            pairing = pairing + model.psi_2d(s)? * x * gv;
        }
    }
    if !(pairing < T::zero()) {
        return Ok(None);
    }
    let radius = g.iter().map(|(s, _)| norm2d::<T>(*s)).fold(T::zero(), T::max);
    Ok(Some(SignCandidate { g: SignVector::Sites2d(g), pairing, radius, label }))
}

fn candidates_2d<T: Real>(
    model: &GroundStateModel<T>,
    v: &[([i64; 2], T)],
    radius: T,
    with_log: bool,
) -> Result<Vec<SignCandidate<T>>> {
    let inside = v.iter().filter(|(s, x)| norm2d::<T>(*s) <= radius && *x != T::zero());
    let Some((x0, v0)) = peak_site(inside.map(|&(s, x)| Ok((s, x, (model.psi_2d(s)? * x).abs()))))? else {
        return Ok(vec![]);
    };
    let s = -v0.signum();
    let mut out = Vec::new();
    for k in 0..4i64 {
        let width = T::from_index(k + 1);
        let shape = |d: T| if d < width { s * (T::one() - d / width) } else { T::zero() };
        out.extend(candidate_2d(model, v, x0, k, shape, format!("tent{}", 2 * k + 1))?);
    }
    if with_log {
        for r in LOG_BUMP_RADII {
            let rt = T::from_index(r);
            let shape = |d: T| {
                if d < T::one() {
                    s
                } else if d < rt {
                    s * (rt.ln() - d.ln()) / (rt.ln() + T::lit(LATTICE_LOG_OFFSET))
                } else {
                    T::zero()
                }
            };
            out.extend(candidate_2d(model, v, x0, r, shape, format!("log{r}"))?);
        }
    }
    Ok(out)
}

fn continuum_pairing<T: Real>(model: &GroundStateModel<T>, f: &ScalarFn<T>, support: (T, T), b: &Bump<T>) -> Result<T> {
    let psi = &model.continuum_state().expect("continuum model").psi;
    let lo = support.0.max(b.center[0] - b.radius);
    let hi = support.1.min(b.center[0] + b.radius);
    if lo >= hi {
        return Ok(T::zero());
    }
    let mut bp = vec![lo, hi];
    if b.center[0] > lo && b.center[0] < hi {
        bp.insert(1, b.center[0]);
    }
    Ok(integrate(|x| psi(x) * f(x) * b.value(x), &bp, T::lit(QUADRATURE_TOLERANCE))?.value)
}

fn candidates_continuum<T: Real>(
    model: &GroundStateModel<T>,
    f: &ScalarFn<T>,
    support: (T, T),
    radius: T,
) -> Result<Vec<SignCandidate<T>>> {
    let psi = &model.continuum_state().expect("continuum model").psi;
    let lo = support.0.max(-radius);
    let hi = support.1.min(radius);
    if lo >= hi {
        return Ok(vec![]);
    }
    let samples = 4000;
    let step = (hi - lo) / T::from_usize(samples).unwrap();
    let points = (0..=samples).map(|i| {
        let x = lo + step * T::from_usize(i).unwrap();
        let v = f(x);
        Ok((x, v, (psi(x) * v).abs()))
    });
    let Some((x0, v0)) = peak_site(points)? else {
        return Ok(vec![]);
    };
    let s = -v0.signum();
    let mut out = Vec::new();
    for w in [0.25, 0.5, 1.0, 2.0] {
        let b = Bump::new([x0, T::zero()], T::lit(w), s)?;
        let pairing = continuum_pairing(model, f, support, &b)?;
        if pairing < T::zero() {
            out.push(SignCandidate {
                g: SignVector::Tent(b),
                pairing,
                radius: x0.abs() + b.radius,
                label: format!("bump{w}"),
            });
        }
    }
    Ok(out)
}

/// Smallest g = -sign(V(x₀))·(site, tent or bump) at the peak x₀ of |ψV|
/// with ⟨ψ|V|g⟩ < 0; `None` when V vanishes on the searched region.
pub fn find_sign_vector<T: Real>(
    model: &GroundStateModel<T>,
    v: &Perturbation<T>,
    support_radius: T,
) -> Result<Option<SignCandidate<T>>> {
    check_domains(model, v)?;
    let all = match v {
        Perturbation::Lattice1d(v) => candidates_1d(model, v, support_radius)?,
        Perturbation::Lattice2d(v) => candidates_2d(model, v, support_radius, false)?,
        Perturbation::Continuum { f, support } => candidates_continuum(model, f, *support, support_radius)?,
    };
    Ok(all.into_iter().next())
}

/// The N-independent pieces of the two summands.
#[derive(Clone, Copy, Debug)]
struct LocalTerms<T> {
    /// Deficit form of g.
    d_g: T,
    /// Deficit bilinear form ⟨f|·|g⟩, zero when a ≡ 1 around supp g.
    cross: T,
}

fn sparse_form_1d<T: Real>(model: &GroundStateModel<T>, g: &BTreeMap<i64, T>) -> Result<T> {
    let e0 = model.energy();
    let mut acc = T::zero();
    for (&n, &x) in g {
        acc = acc + (e0 - model.q_1d(n)?) * x * x;
        if let Some(&y) = g.get(&(n + 1)) {
            acc = acc - T::lit(2.0) * x * y;
        }
    }
    Ok(acc)
}

fn sparse_form_2d<T: Real>(model: &GroundStateModel<T>, g: &HashMap<[i64; 2], T>) -> Result<T> {
    let e0 = model.energy();
    let mut acc = T::zero();
    for (&[x, y], &val) in g {
        acc = acc + (e0 - model.q_2d([x, y])?) * val * val;
        for nb in [[x + 1, y], [x, y + 1]] {
            if let Some(&w) = g.get(&nb) {
                acc = acc - T::lit(2.0) * val * w;
            }
        }
    }
    Ok(acc)
}

/// Evaluates the deficit form locally; `f(site)` must be available at every
/// site of supp g and its neighbours.
fn local_terms<T: Real>(model: &GroundStateModel<T>, g: &SignCandidate<T>, a: &CutoffProfile<T>) -> Result<LocalTerms<T>> {
    let e0 = model.energy();
    match &g.g {
        SignVector::Sites1d(v) => {
            let gm: BTreeMap<i64, T> = v.iter().copied().collect();
            let f = |n: i64| -> Result<T> { Ok(a.value(T::from_index(n)) * model.psi_1d(n)?) };
            let mut cross = T::zero();
            for (&n, &x) in &gm {
                let hf = (e0 - model.q_1d(n)?) * f(n)? - f(n - 1)? - f(n + 1)?;
                cross = cross + x * hf;
            }
            Ok(LocalTerms { d_g: sparse_form_1d(model, &gm)?, cross })
        }
        SignVector::Sites2d(v) => {
            let gm: HashMap<[i64; 2], T> = v.iter().copied().collect();
            let f = |s: [i64; 2]| -> Result<T> {
                Ok(a.value_2d([T::from_index(s[0]), T::from_index(s[1])]) * model.psi_2d(s)?)
            };
            let mut cross = T::zero();
            for (&[x, y], &val) in &gm {
                let nb = f([x + 1, y])? + f([x - 1, y])? + f([x, y + 1])? + f([x, y - 1])?;
                cross = cross + val * ((e0 - model.q_2d([x, y])?) * f([x, y])? - nb);
            }
            Ok(LocalTerms { d_g: sparse_form_2d(model, &gm)?, cross })
        }
        SignVector::Tent(b) => {
            let state = model.continuum_state().expect("continuum model");
            let q = state.q.as_ref().ok_or_else(|| Error::input("the certificate search needs Q on the line"))?;
            let bp = vec![b.center[0] - b.radius, b.center[0], b.center[0] + b.radius];
            let tol = T::lit(QUADRATURE_TOLERANCE);
            let d_g = integrate(
                |x| {
                    let (gv, dg) = (b.value(x), b.derivative(x));
                    dg * dg + (q(x) - e0) * gv * gv
                },
                &bp,
                tol,
            )?
            .value;
            let cross = integrate(
                |x| {
                    let (p, dp) = ((state.psi)(x), (state.dpsi)(x));
                    let fv = a.value(x) * p;
                    let df = a.derivative(x) * p + a.value(x) * dp;
                    df * b.derivative(x) + (q(x) - e0) * fv * b.value(x)
                },
                &bp,
                tol,
            )?
            .value;
            Ok(LocalTerms { d_g, cross })
        }
    }
}

/// Σ V (aψ + σεg)² (lattice) or ∫ V (aψ + σεg)² (line).
fn potential_term<T: Real>(
    model: &GroundStateModel<T>,
    v: &Perturbation<T>,
    g: &SignCandidate<T>,
    a: &CutoffProfile<T>,
    shift: T,
) -> Result<T> {
    match (v, &g.g) {
        (Perturbation::Lattice1d(v), SignVector::Sites1d(gv)) => {
            let gm: BTreeMap<i64, T> = gv.iter().copied().collect();
            let mut acc = T::zero();
            for &(n, x) in v {
                let u = a.value(T::from_index(n)) * model.psi_1d(n)? + shift * gm.get(&n).copied().unwrap_or(T::zero());
                acc = acc + x * u * u;
            }
            Ok(acc)
        }
        (Perturbation::Lattice2d(v), SignVector::Sites2d(gv)) => {
            let gm: HashMap<[i64; 2], T> = gv.iter().copied().collect();
            let mut acc = T::zero();
            for &(s, x) in v {
                let av = a.value_2d([T::from_index(s[0]), T::from_index(s[1])]);
                let u = av * model.psi_2d(s)? + shift * gm.get(&s).copied().unwrap_or(T::zero());
                acc = acc + x * u * u;
            }
            Ok(acc)
        }
        (Perturbation::Continuum { f, support }, SignVector::Tent(b)) => {
            let psi = &model.continuum_state().expect("continuum model").psi;
            let mut bp = vec![support.0, support.1];
            for p in [b.center[0] - b.radius, b.center[0], b.center[0] + b.radius, -a.n(), -a.m(), a.m(), a.n()] {
                if p > support.0 && p < support.1 {
                    bp.push(p);
                }
            }
            bp.sort_by(|x, y| x.partial_cmp(y).unwrap());
            bp.dedup();
            let u = |x: T| a.value(x) * psi(x) + shift * b.value(x);
            Ok(integrate(|x| f(x) * u(x) * u(x), &bp, T::lit(QUADRATURE_TOLERANCE))?.value)
        }
        _ => Err(Error::input("sign vector and perturbation live on different domains")),
    }
}

/// Oracle: top eigenvalue of h_{Q±V} on ℤ, ℤ² truncations; `None` on the line.
fn oracle<T: Real>(model: &GroundStateModel<T>, v: &Perturbation<T>, sign: Flagged, n: T) -> Result<Option<T>> {
    let s: T = sign.sign();
    match v {
        Perturbation::Lattice1d(v) => {
            let half = (T::lit(2.0) * n).ceil().to_i64().unwrap().max(200);
            let (lo, hi) = model.window_1d().unwrap_or((-half, half));
            let (lo, hi) = (lo.max(-half), hi.min(half));
            let vm: BTreeMap<i64, T> = v.iter().copied().collect();
            let diag = (lo..=hi)
                .map(|k| Ok(model.q_1d(k)? + s * vm.get(&k).copied().unwrap_or(T::zero())))
                .collect::<Result<Vec<T>>>()?;
            let size = diag.len();
            let sys = TridiagonalSystem::new(diag, vec![T::one(); size - 1])?;
            let top = if size <= DENSE_ORACLE_LIMIT {
                *dense_oracle(&sys)?.last().unwrap()
            } else {
                let (glo, ghi) = sys.gershgorin();
                kth_eigenvalue(&sys, size - 1, T::lit(1e-13) * (T::one() + glo.abs().max(ghi.abs())))?
            };
            Ok(Some(top))
        }
        Perturbation::Lattice2d(v) => {
            let window = match model.window_2d() {
                Some(w) => w.clone(),
                None => Lattice2DWindow::new((T::lit(2.0) * n).ceil().to_i64().unwrap().min(ORACLE_RADIUS_2D))?,
            };
            let vm: HashMap<[i64; 2], T> = v.iter().copied().collect();
            let diag = window
                .sites()
                .iter()
                .map(|&site| Ok(model.q_2d(site)? + s * vm.get(&site).copied().unwrap_or(T::zero())))
                .collect::<Result<Vec<T>>>()?;
            let op = window.operator_with_diagonal(diag)?;
            Ok(Some(lanczos_top(&op, ORACLE_LANCZOS_STEPS)?.rayleigh_quotient))
        }
        Perturbation::Continuum { .. } => Ok(None),
    }
}

/// Estimated deficit form of aψ on a free lattice.
fn free_energy_estimate<T: Real>(kind: CutoffKind, m: T, n: T) -> T {
    match kind {
        CutoffKind::Log2d => T::TAU() / (n / m).ln(),
        _ => T::lit(2.0) / (n - m),
    }
}

struct Attempt<T> {
    certificate: Option<Certificate<T>>,
    last_n: Option<T>,
    last_energy: Option<T>,
}

fn attempt<T: Real>(
    model: &GroundStateModel<T>,
    v: &Perturbation<T>,
    g: &SignCandidate<T>,
    kind: CutoffKind,
    params: &SearchParams<T>,
) -> Result<Attempt<T>> {
    let discrete = model.domain().is_discrete();
    let m = if discrete { g.radius.ceil() + T::one() } else { g.radius + T::one() };
    let mut out = Attempt { certificate: None, last_n: None, last_energy: None };
    // a ≡ 1 on supp g and its neighbours, so the local terms do not depend on N
    let probe = match kind {
        CutoffKind::Log2d => CutoffProfile::log_2d(m, T::lit(2.0) * m)?,
        _ => CutoffProfile::linear(m, T::lit(2.0) * m)?,
    };
    let local = local_terms(model, g, &probe)?;
    let vertex = if local.d_g > T::zero() { g.pairing.abs() / local.d_g } else { T::one() };
    let budget = -T::lit(2.0) * vertex * g.pairing - vertex * vertex * local.d_g;
    let skip_by_estimate = model.is_free() && model.domain() == Domain::Lattice2d;
    let mut n = T::lit(2.0) * m;
    while n <= params.n_cap {
        if skip_by_estimate && free_energy_estimate(kind, m, n) > budget {
            n = n * T::lit(2.0);
            continue;
        }
        let cutoff = match kind {
            CutoffKind::Linear1d => CutoffProfile::linear(m, n),
            CutoffKind::Log2d => CutoffProfile::log_2d(m, n),
            CutoffKind::Adapted1d => CutoffProfile::adapted(model, m, n),
        };
        let evaluated = cutoff.and_then(|c| cutoff_energy(model, &c).map(|e| (c, e)));
        let (cutoff, energy) = match evaluated {
            Ok(pair) => pair,
            // the ramp left the sampled window
            Err(e) if e.is_input_error() && !model.is_free() => break,
            Err(e) => return Err(e),
        };
        out.last_n = Some(n);
        out.last_energy = Some(energy);
        let mut eps = vertex;
        for _ in 0..3 {
            let quad = eps * eps * local.d_g;
            let two_cross = T::lit(2.0) * eps * local.cross;
            let plus = energy + two_cross + quad + potential_term(model, v, g, &cutoff, eps)?;
            let minus = energy - two_cross + quad - potential_term(model, v, g, &cutoff, -eps)?;
            let total = plus + minus;
            if total < T::zero() {
                // deficit shift E0 - h on a lattice turns H + V into E0 - h_{Q-V}
                let first = if discrete { Flagged::QMinusV } else { Flagged::QPlusV };
                let second = if discrete { Flagged::QPlusV } else { Flagged::QMinusV };
                let sign = if plus <= minus { first } else { second };
                let oracle_eigenvalue = if params.oracle { oracle(model, v, sign, n)? } else { None };
                out.certificate = Some(Certificate {
                    sign,
                    epsilon: eps,
                    m,
                    n,
                    pairing: g.pairing,
                    form_total: total,
                    summands: [plus, minus],
                    cutoff_energy: energy,
                    g: g.clone(),
                    cutoff,
                    oracle_eigenvalue,
                });
                return Ok(out);
            }
            eps = eps * T::lit(0.5);
        }
        n = n * T::lit(2.0);
    }
    Ok(out)
}

/// Searches g, ε and N with ⟨f+εg|H+V|f+εg⟩ + ⟨f-εg|H-V|f-εg⟩ < 0, f = aψ.
///
/// Candidates for g are tried smallest first. On free ℤ² they are ranked by the
/// N they are expected to need, and the form is only evaluated at N where the
/// asymptotic cutoff energy already fits under the negative part.
pub fn criticality_certificate<T: Real>(
    model: &GroundStateModel<T>,
    v: &Perturbation<T>,
    params: &SearchParams<T>,
) -> Result<Outcome<T>> {
    check_domains(model, v)?;
    let kind = params.cutoff.unwrap_or(match model.domain() {
        Domain::Lattice2d => CutoffKind::Log2d,
        _ => CutoffKind::Linear1d,
    });
    if kind == CutoffKind::Adapted1d && model.domain() == Domain::Lattice2d {
        return Err(Error::input("the adapted cutoff is one-dimensional"));
    }
    let mut candidates = match v {
        Perturbation::Lattice1d(v) => candidates_1d(model, v, params.support_radius)?,
        Perturbation::Lattice2d(v) => candidates_2d(model, v, params.support_radius, true)?,
        Perturbation::Continuum { f, support } => candidates_continuum(model, f, *support, params.support_radius)?,
    };
    if candidates.is_empty() {
        return Ok(Outcome::NotFound(NotFound {
            reason: "V vanishes on the searched region; no g with negative pairing".into(),
            last_n: None,
            cutoff_energy: None,
        }));
    }
    if model.is_free() && model.domain() == Domain::Lattice2d {
        let mut keyed = Vec::with_capacity(candidates.len());
        for g in candidates {
            let m = g.radius.ceil() + T::one();
            let probe = CutoffProfile::linear(m, T::lit(2.0) * m)?;
            let local = local_terms(model, &g, &probe)?;
            let budget = if local.d_g > T::zero() { g.pairing * g.pairing / local.d_g } else { T::infinity() };
            // smallest N with the asymptotic cutoff energy under the budget
            let log_n = match kind {
                CutoffKind::Log2d => m.ln() + T::TAU() / budget,
                _ => (m + T::lit(2.0) / budget).ln(),
            };
            keyed.push((log_n, g));
        }
        keyed.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        candidates = keyed.into_iter().map(|k| k.1).collect();
    }
    let mut last = NotFound { reason: String::new(), last_n: None, cutoff_energy: None };
    for g in &candidates {
        let a = attempt(model, v, g, kind, params)?;
        if let Some(c) = a.certificate {
            return Ok(Outcome::Found(Box::new(c)));
        }
        if a.last_n.is_some() {
            last.last_n = a.last_n;
            last.cutoff_energy = a.last_energy;
        }
    }
    last.reason = format!("no negative total form up to N = {} for {} sign vectors", params.n_cap, candidates.len());
    Ok(Outcome::NotFound(last))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free_delta_1d() -> Perturbation<f64> {
        Perturbation::Lattice1d(vec![(0, 1.0)])
    }

    #[test]
    fn sign_vector_examples() {
        let model = GroundStateModel::<f64>::free_1d();
        let g = find_sign_vector(&model, &free_delta_1d(), 10.0).unwrap().unwrap();
        assert_eq!(g.g, SignVector::Sites1d(vec![(0, -1.0)]));
        assert_eq!(g.pairing, -1.0);
        let zero = Perturbation::Lattice1d(vec![]);
        assert!(find_sign_vector(&model, &zero, 10.0).unwrap().is_none());

        let sampled = GroundStateModel::<f64>::random_lattice_1d(20, 4).unwrap();
        let v = Perturbation::Lattice1d(vec![(3, -2.0), (5, 0.1)]);
        let g = find_sign_vector(&sampled, &v, 10.0).unwrap().unwrap();
        assert_eq!(g.g, SignVector::Sites1d(vec![(3, 1.0)]));
        assert!((g.pairing + 2.0 * sampled.psi_1d(3).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn free_line_certificate() {
        let model = GroundStateModel::<f64>::free_1d();
        let out = criticality_certificate(&model, &free_delta_1d(), &SearchParams::default()).unwrap();
        let c = out.certificate().expect("certificate");
        assert_eq!(c.sign, Flagged::QPlusV);
        assert!(c.form_total < 0.0 && c.pairing < 0.0);
        assert_eq!(c.epsilon, 0.5);
        assert!((c.oracle_eigenvalue.unwrap() - 5f64.sqrt()).abs() < 1e-6);
        assert_eq!(c.oracle_confirms(&model), Some(true));
        let json = c.to_json();
        let keys: Vec<usize> = ["\"sign\"", "\"epsilon\"", "\"M\"", "\"N\"", "\"pairing\"", "\"form_total\"", "\"oracle_eigenvalue\"", "\"g\"", "\"cutoff_kind\""]
            .iter()
            .map(|k| json.find(k).unwrap())
            .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]), "{json}");
    }

    #[test]
    fn negative_site_flags_the_other_operator() {
        let model = GroundStateModel::<f64>::free_1d();
        let v = Perturbation::Lattice1d(vec![(2, -0.5)]);
        let c = criticality_certificate(&model, &v, &SearchParams::default()).unwrap();
        let c = c.certificate().unwrap();
        assert_eq!(c.sign, Flagged::QMinusV);
        assert!((c.oracle_eigenvalue.unwrap() - 4.25f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn zero_perturbation_is_not_found() {
        let model = GroundStateModel::<f64>::free_1d();
        let out = criticality_certificate(&model, &Perturbation::Lattice1d(vec![]), &SearchParams::default()).unwrap();
        assert!(matches!(out, Outcome::NotFound(_)));
    }

    #[test]
    fn sampled_line_certificate_is_confirmed() {
        let model = GroundStateModel::<f64>::random_lattice_1d(400, 11).unwrap();
        let v = Perturbation::Lattice1d(vec![(0, 0.3), (1, -0.2)]);
        for cutoff in [CutoffKind::Linear1d, CutoffKind::Adapted1d] {
            let params = SearchParams { cutoff: Some(cutoff), ..SearchParams::default() };
            let out = criticality_certificate(&model, &v, &params).unwrap();
            let c = out.certificate().expect("certificate");
            assert_eq!(c.oracle_confirms(&model), Some(true), "{cutoff:?}");
        }
    }

    #[test]
    fn gaussian_line_certificate() {
        let model = GroundStateModel::<f64>::gaussian();
        let v = Perturbation::continuum(|x: f64| 0.3 * (1.0 - x * x).max(0.0), -1.0, 1.0).unwrap();
        let params = SearchParams { support_radius: 4.0, n_cap: 64.0, ..SearchParams::default() };
        let out = criticality_certificate(&model, &v, &params).unwrap();
        let c = out.certificate().expect("certificate");
        assert!(c.form_total < 0.0);
        assert!(c.oracle_eigenvalue.is_none());
    }

    #[test]
    fn domain_mismatch_is_an_input_error() {
        let model = GroundStateModel::<f64>::free_2d();
        assert!(criticality_certificate(&model, &free_delta_1d(), &SearchParams::default())
            .unwrap_err()
            .is_input_error());
    }
}
