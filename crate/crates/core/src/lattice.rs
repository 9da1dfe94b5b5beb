//! Potentials, finite sections and quadratic forms on ℤ, ℤ⁺ and ℤ².
//!
//! The discrete Schrödinger operator is `(hφ)(n) = φ(n+1) + φ(n-1) + V(n)φ(n)`.
//! Finite sections use Dirichlet ends: sites outside the window carry zero.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::{wvn, Error, Real, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Lattice {
    WholeLine,
    /// ℤ⁺ with the Dirichlet condition φ(-1) = 0.
    HalfLine,
    Square2d,
}

impl Lattice {
    pub fn name(self) -> &'static str {
        match self {
            Lattice::WholeLine => "whole_line",
            Lattice::HalfLine => "half_line",
            Lattice::Square2d => "square_lattice_2d",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "whole_line" => Some(Lattice::WholeLine),
            "half_line" => Some(Lattice::HalfLine),
            "square_lattice_2d" => Some(Lattice::Square2d),
            _ => None,
        }
    }
}

/// Model for the sites beyond the stored window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tail<T> {
    Zero,
    /// Closed-form Wigner–von Neumann tail, see [`wvn::potential_value`].
    Wvn { alpha: T },
}

/// A real potential on ℤ or ℤ⁺: a contiguous window of stored values plus a
/// tail model for every other site.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential<T> {
    lattice: Lattice,
    window_start: i64,
    values: Vec<T>,
    tail: Tail<T>,
}

impl<T: Real> Potential<T> {
    pub fn new(lattice: Lattice, window_start: i64, values: Vec<T>, tail: Tail<T>) -> Result<Self> {
        match lattice {
            Lattice::Square2d => {
                return Err(Error::input("two-dimensional potentials are represented by Potential2d"))
            }
            Lattice::HalfLine if !values.is_empty() && window_start != 0 => {
                return Err(Error::input(format!(
                    "half-line windows start at site 0, got {window_start}"
                )))
            }
            _ => {}
        }
        if let Tail::Wvn { alpha } = tail {
            if lattice != Lattice::HalfLine {
                return Err(Error::input("the wvn tail is defined on the half-line only"));
            }
            if !(alpha > T::lit(0.5)) {
                return Err(Error::input(format!("wvn tail needs alpha > 1/2, got {alpha}")));
            }
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!("non-finite value at site {}", window_start + bad as i64)));
        }
        let window_start = if values.is_empty() { 0 } else { window_start };
        Ok(Potential { lattice, window_start, values, tail })
    }

    pub fn zero(lattice: Lattice) -> Self {
        Potential { lattice, window_start: 0, values: Vec::new(), tail: Tail::Zero }
    }

    /// Potential equal to `value` at `site` and zero elsewhere.
    pub fn single_site(lattice: Lattice, site: i64, value: T) -> Result<Self> {
        Self::new(lattice, site, vec![value], Tail::Zero)
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn window_start(&self) -> i64 {
        self.window_start
    }

    /// Last stored site (inclusive); `window_start - 1` for an empty window.
    pub fn window_end(&self) -> i64 {
        self.window_start + self.values.len() as i64 - 1
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn tail(&self) -> Tail<T> {
        self.tail
    }

    /// V(n), or `None` when the site does not belong to the lattice.
    pub fn value_at(&self, n: i64) -> Option<T> {
        if self.lattice == Lattice::HalfLine && n < 0 {
            return None;
        }
        if n >= self.window_start && n <= self.window_end() {
            return Some(self.values[(n - self.window_start) as usize]);
        }
        match self.tail {
            Tail::Zero => Some(T::zero()),
            Tail::Wvn { alpha } => Some(wvn::potential_value(alpha, n)),
        }
    }

    /// Finite section on `[n_min, n_max]` with Dirichlet ends.
    pub fn truncate(&self, n_min: i64, n_max: i64) -> Result<TridiagonalSystem<T>> {
        if n_min > n_max {
            return Err(Error::input(format!("empty truncation window [{n_min}, {n_max}]")));
        }
        if self.lattice == Lattice::HalfLine && n_min < 0 {
            return Err(Error::Coverage { start: n_min, end: n_max.min(-1) });
        }
        let diagonal: Vec<T> = (n_min..=n_max)
            .map(|n| self.value_at(n).expect("coverage checked above"))
            .collect();
        let size = diagonal.len();
        TridiagonalSystem::new(diagonal, vec![T::one(); size - 1])
    }

    /// Pointwise map over the stored window; the tail becomes zero.
    pub fn map_window(&self, n_max: i64, f: impl Fn(i64, T) -> T) -> Result<Self> {
        let start = match self.lattice {
            Lattice::HalfLine => 0,
            _ => self.window_start,
        };
        if n_max < start {
            return Err(Error::input("window end precedes window start"));
        }
        let values = (start..=n_max)
            .map(|n| f(n, self.value_at(n).expect("site on lattice")))
            .collect();
        Potential::new(self.lattice, start, values, Tail::Zero)
    }

    /// Serialises to the `index value` text format with `# lattice=` and
    /// `# tail=` header lines. Floats use the shortest round-trip decimal.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# lattice={}", self.lattice.name()).unwrap();
        match self.tail {
            Tail::Zero => writeln!(out, "# tail=zero").unwrap(),
            Tail::Wvn { alpha } => writeln!(out, "# tail=wvn({alpha})").unwrap(),
        }
        for (k, v) in self.values.iter().enumerate() {
            writeln!(out, "{} {}", self.window_start + k as i64, v).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let header = parse_header::<T>(text)?;
        if header.lattice == Lattice::Square2d {
            return Err(Error::Parse { line: 1, message: "use Potential2d for square_lattice_2d".into() });
        }
        let mut start = None;
        let mut values = Vec::new();
        for (line_no, line) in data_lines(text) {
            let mut fields = line.split_whitespace();
            let (Some(idx), Some(val), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(Error::Parse { line: line_no, message: "expected `index value`".into() });
            };
            let idx: i64 = idx
                .parse()
                .map_err(|_| Error::Parse { line: line_no, message: format!("bad index `{idx}`") })?;
            let val = parse_value::<T>(val, line_no)?;
            let expected = start.map(|s: i64| s + values.len() as i64);
            match expected {
                None => start = Some(idx),
                Some(e) if e != idx => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("window must be contiguous: expected site {e}, found {idx}"),
                    })
                }
                _ => {}
            }
            values.push(val);
        }
        Potential::new(header.lattice, start.unwrap_or(0), values, header.tail)
    }
}

/// Finitely supported potential on ℤ².
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Potential2d<T> {
    values: BTreeMap<[i64; 2], T>,
}

impl<T: Real> Potential2d<T> {
    pub fn new(values: impl IntoIterator<Item = ([i64; 2], T)>) -> Self {
        Potential2d { values: values.into_iter().collect() }
    }

    pub fn value_at(&self, site: [i64; 2]) -> T {
        self.values.get(&site).copied().unwrap_or_else(T::zero)
    }

    pub fn sites(&self) -> impl Iterator<Item = (&[i64; 2], &T)> {
        self.values.iter()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# lattice={}\n# tail=zero\n", Lattice::Square2d.name());
        for ([x, y], v) in &self.values {
            writeln!(out, "{x} {y} {v}").unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let header = parse_header::<T>(text)?;
        if header.lattice != Lattice::Square2d || header.tail != Tail::Zero {
            return Err(Error::Parse { line: 1, message: "expected lattice=square_lattice_2d, tail=zero".into() });
        }
        let mut values = BTreeMap::new();
        for (line_no, line) in data_lines(text) {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [x, y, v] = fields[..] else {
                return Err(Error::Parse { line: line_no, message: "expected `x y value`".into() });
            };
            let parse_i = |s: &str| {
                s.parse::<i64>()
                    .map_err(|_| Error::Parse { line: line_no, message: format!("bad coordinate `{s}`") })
            };
            values.insert([parse_i(x)?, parse_i(y)?], parse_value::<T>(v, line_no)?);
        }
        Ok(Potential2d { values })
    }
}

struct Header<T> {
    lattice: Lattice,
    tail: Tail<T>,
}

fn parse_header<T: Real>(text: &str) -> Result<Header<T>> {
    let mut lattice = None;
    let mut tail = None;
    for (k, line) in text.lines().enumerate() {
        let Some(rest) = line.trim().strip_prefix('#') else { continue };
        let rest = rest.trim();
        if let Some(name) = rest.strip_prefix("lattice=") {
            lattice = Some(Lattice::from_name(name.trim()).ok_or_else(|| Error::Parse {
                line: k + 1,
                message: format!("unknown lattice `{name}`"),
            })?);
        } else if let Some(t) = rest.strip_prefix("tail=") {
            let t = t.trim();
            tail = Some(if t == "zero" {
                Tail::Zero
            } else if let Some(a) = t.strip_prefix("wvn(").and_then(|s| s.strip_suffix(')')) {
                Tail::Wvn { alpha: parse_value::<T>(a, k + 1)? }
            } else {
                return Err(Error::Parse { line: k + 1, message: format!("unknown tail `{t}`") });
            });
        }
    }
    Ok(Header {
        lattice: lattice.ok_or(Error::Parse { line: 1, message: "missing `# lattice=` header".into() })?,
        tail: tail.unwrap_or(Tail::Zero),
    })
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_value<T: Real>(s: &str, line: usize) -> Result<T> {
    s.parse::<T>()
        .map_err(|_| Error::Parse { line, message: format!("bad number `{s}`") })
}

/// Common surface of the finite operators: matrix-vector product and the
/// quadratic form ⟨φ|h|φ⟩, both with zero Dirichlet data outside the window.
pub trait LatticeOperator<T: Real>: Sync {
    fn dim(&self) -> usize;

    fn apply(&self, phi: &[T]) -> Result<Vec<T>>;

    fn quadratic_form(&self, phi: &[T]) -> Result<T>;

    fn check_len(&self, phi: &[T]) -> Result<()> {
        if phi.len() != self.dim() {
            return Err(Error::input(format!(
                "vector length {} does not match operator dimension {}",
                phi.len(),
                self.dim()
            )));
        }
        Ok(())
    }
}

/// Symmetric tridiagonal matrix: `diagonal` of length `size`, `offdiagonal`
/// of length `size - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct TridiagonalSystem<T> {
    diagonal: Vec<T>,
    offdiagonal: Vec<T>,
}

impl<T: Real> TridiagonalSystem<T> {
    pub fn new(diagonal: Vec<T>, offdiagonal: Vec<T>) -> Result<Self> {
        if diagonal.is_empty() {
            return Err(Error::input("tridiagonal system needs at least one site"));
        }
        if offdiagonal.len() + 1 != diagonal.len() {
            return Err(Error::input(format!(
                "offdiagonal length {} must be size - 1 = {}",
                offdiagonal.len(),
                diagonal.len() - 1
            )));
        }
        if diagonal.iter().chain(&offdiagonal).any(|x| !x.is_finite()) {
            return Err(Error::input("tridiagonal entries must be finite"));
        }
        Ok(TridiagonalSystem { diagonal, offdiagonal })
    }

    /// Free operator h₀ on `size` sites.
    pub fn free(size: usize) -> Result<Self> {
        Self::new(vec![T::zero(); size], vec![T::one(); size.saturating_sub(1)])
    }

    pub fn size(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[T] {
        &self.diagonal
    }

    pub fn offdiagonal(&self) -> &[T] {
        &self.offdiagonal
    }

    /// Gershgorin enclosure `(lower, upper)` of the spectrum.
    pub fn gershgorin(&self) -> (T, T) {
        let n = self.size();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..n {
            let left = if i > 0 { self.offdiagonal[i - 1].abs() } else { T::zero() };
            let right = if i + 1 < n { self.offdiagonal[i].abs() } else { T::zero() };
            lo = lo.min(self.diagonal[i] - left - right);
            hi = hi.max(self.diagonal[i] + left + right);
        }
        (lo, hi)
    }

    /// `a·self + b·I`, entrywise on the diagonal and `a·offdiagonal` off it.
    pub fn affine(&self, a: T, b: T) -> Self {
        TridiagonalSystem {
            diagonal: self.diagonal.iter().map(|&d| a * d + b).collect(),
            offdiagonal: self.offdiagonal.iter().map(|&e| a * e).collect(),
        }
    }

    /// Entrywise linear combination of two systems of equal size.
    pub fn combine(&self, a: T, other: &Self, b: T) -> Result<Self> {
        if other.size() != self.size() {
            return Err(Error::input("systems of different sizes"));
        }
        Ok(TridiagonalSystem {
            diagonal: self.diagonal.iter().zip(&other.diagonal).map(|(&x, &y)| a * x + b * y).collect(),
            offdiagonal: self.offdiagonal.iter().zip(&other.offdiagonal).map(|(&x, &y)| a * x + b * y).collect(),
        })
    }
}

impl<T: Real> LatticeOperator<T> for TridiagonalSystem<T> {
    fn dim(&self) -> usize {
        self.size()
    }

    fn apply(&self, phi: &[T]) -> Result<Vec<T>> {
        self.check_len(phi)?;
        let n = self.size();
        let mut out: Vec<T> = self.diagonal.iter().zip(phi).map(|(&d, &p)| d * p).collect();
        for k in 0..n - 1 {
            let b = self.offdiagonal[k];
            out[k] = out[k] + b * phi[k + 1];
            out[k + 1] = out[k + 1] + b * phi[k];
        }
        Ok(out)
    }

    fn quadratic_form(&self, phi: &[T]) -> Result<T> {
        self.check_len(phi)?;
        let two = T::lit(2.0);
        let diag: T = self.diagonal.iter().zip(phi).map(|(&d, &p)| d * p * p).sum();
        let off: T = self
            .offdiagonal
            .iter()
            .zip(phi.windows(2))
            .map(|(&b, w)| two * b * w[0] * w[1])
            .sum();
        Ok(diag + off)
    }
}

/// Sites of ℤ² in the Euclidean ball |x| ≤ radius, with the nearest-neighbour
/// edges inside the ball. Sites are ordered by `(y, x)`.
#[derive(Clone, Debug)]
pub struct Lattice2DWindow {
    radius: i64,
    sites: Vec<[i64; 2]>,
    index: HashMap<[i64; 2], usize>,
    edges: Vec<(usize, usize)>,
}

impl Lattice2DWindow {
    pub fn new(radius: i64) -> Result<Self> {
        if radius < 1 {
            return Err(Error::input(format!("2D window radius must be positive, got {radius}")));
        }
        let r2 = radius * radius;
        let mut sites = Vec::new();
        for y in -radius..=radius {
            for x in -radius..=radius {
                if x * x + y * y <= r2 {
                    sites.push([x, y]);
                }
            }
        }
        let index: HashMap<[i64; 2], usize> = sites.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let mut edges = Vec::new();
        for (i, &[x, y]) in sites.iter().enumerate() {
            for nb in [[x + 1, y], [x, y + 1]] {
                if let Some(&j) = index.get(&nb) {
                    edges.push((i, j));
                }
            }
        }
        Ok(Lattice2DWindow { radius, sites, index, edges })
    }

    pub fn radius(&self) -> i64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[[i64; 2]] {
        &self.sites
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn index_of(&self, site: [i64; 2]) -> Option<usize> {
        self.index.get(&site).copied()
    }

    /// Window indices of the in-window neighbours of site `i`.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let [x, y] = self.sites[i];
        [[x + 1, y], [x - 1, y], [x, y + 1], [x, y - 1]]
            .into_iter()
            .filter_map(|s| self.index_of(s))
    }

    /// True when all four neighbours of site `i` lie in the window.
    pub fn is_interior(&self, i: usize) -> bool {
        self.neighbors(i).count() == 4
    }

    pub fn operator<T: Real>(&self, potential: &Potential2d<T>) -> Operator2d<T> {
        let diagonal = self.sites.iter().map(|&s| potential.value_at(s)).collect();
        Operator2d { window: self.clone(), diagonal }
    }

    pub fn operator_with_diagonal<T: Real>(&self, diagonal: Vec<T>) -> Result<Operator2d<T>> {
        if diagonal.len() != self.len() {
            return Err(Error::input("diagonal length does not match window size"));
        }
        Ok(Operator2d { window: self.clone(), diagonal })
    }
}

/// `h_V` restricted to a [`Lattice2DWindow`].
#[derive(Clone, Debug)]
pub struct Operator2d<T> {
    window: Lattice2DWindow,
    diagonal: Vec<T>,
}

impl<T: Real> Operator2d<T> {
    pub fn window(&self) -> &Lattice2DWindow {
        &self.window
    }

    pub fn diagonal(&self) -> &[T] {
        &self.diagonal
    }
}

impl<T: Real> LatticeOperator<T> for Operator2d<T> {
    fn dim(&self) -> usize {
        self.window.len()
    }

    fn apply(&self, phi: &[T]) -> Result<Vec<T>> {
        self.check_len(phi)?;
        let mut out: Vec<T> = self.diagonal.iter().zip(phi).map(|(&d, &p)| d * p).collect();
        for &(i, j) in &self.window.edges {
            out[i] = out[i] + phi[j];
            out[j] = out[j] + phi[i];
        }
        Ok(out)
    }

    fn quadratic_form(&self, phi: &[T]) -> Result<T> {
        self.check_len(phi)?;
        let two = T::lit(2.0);
        let diag: T = self.diagonal.iter().zip(phi).map(|(&d, &p)| d * p * p).sum();
        let edges: T = self.window.edges.iter().map(|&(i, j)| two * phi[i] * phi[j]).sum();
        Ok(diag + edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn zero_potential_truncation_is_free() {
        let sys = Potential::<f64>::zero(Lattice::WholeLine).truncate(0, 2).unwrap();
        assert_eq!(sys.diagonal(), &[0.0, 0.0, 0.0]);
        assert_eq!(sys.offdiagonal(), &[1.0, 1.0]);
    }

    #[test]
    fn wvn_tail_entry_at_site_two() {
        let v = Potential::new(Lattice::HalfLine, 0, vec![], Tail::Wvn { alpha: 1.0f64 }).unwrap();
        let sys = v.truncate(0, 3).unwrap();
        assert!((sys.diagonal()[2] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn reversed_window_is_rejected() {
        let v = Potential::<f64>::zero(Lattice::WholeLine);
        assert!(matches!(v.truncate(3, 1), Err(Error::Input(_))));
    }

    #[test]
    fn half_line_coverage_error_names_missing_sites() {
        let v = Potential::<f64>::zero(Lattice::HalfLine);
        match v.truncate(-3, 4) {
            Err(Error::Coverage { start, end }) => assert_eq!((start, end), (-3, -1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn half_line_window_must_start_at_zero() {
        assert!(Potential::new(Lattice::HalfLine, 2, vec![1.0], Tail::Zero).is_err());
    }

    #[test]
    fn quadratic_form_examples() {
        let free = TridiagonalSystem::<f64>::free(1).unwrap();
        assert_eq!(free.quadratic_form(&[1.0]).unwrap(), 0.0);
        let free2 = TridiagonalSystem::<f64>::free(2).unwrap();
        assert_eq!(free2.quadratic_form(&[1.0, 1.0]).unwrap(), 2.0);
        let v = Potential::single_site(Lattice::WholeLine, 0, 1.0).unwrap();
        let sys = v.truncate(-2, 2).unwrap();
        assert_eq!(sys.quadratic_form(&[0.0, 0.0, 1.0, 0.0, 0.0]).unwrap(), 1.0);
        assert!(sys.quadratic_form(&[1.0]).is_err());
    }

    #[test]
    fn apply_examples() {
        let sys = Potential::<f64>::zero(Lattice::WholeLine).truncate(-2, 2).unwrap();
        let out = sys.apply(&[0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(out, vec![0.0, 1.0, 0.0, 1.0, 0.0]);
        let half = Potential::<f64>::zero(Lattice::HalfLine).truncate(0, 3).unwrap();
        assert_eq!(half.apply(&[1.0, 0.0, 0.0, 0.0]).unwrap(), vec![0.0, 1.0, 0.0, 0.0]);
        assert!(half.apply(&[1.0]).is_err());
    }

    #[test]
    fn text_format_example() {
        let v = Potential::new(Lattice::HalfLine, 0, vec![-0.5, 0.75], Tail::Wvn { alpha: 1.0 }).unwrap();
        let text = v.to_text();
        assert_eq!(text, "# lattice=half_line\n# tail=wvn(1)\n0 -0.5\n1 0.75\n");
        assert_eq!(Potential::<f64>::from_text(&text).unwrap(), v);
        assert!(Potential::<f64>::from_text("# lattice=whole_line\n0 1\n2 1\n").is_err());
        assert!(Potential::<f64>::from_text("0 1\n").is_err());
    }

    #[test]
    fn potential2d_text_round_trip() {
        let v = Potential2d::new([([0, 0], 1.0), ([-3, 2], 0.1 + 0.2)]);
        assert_eq!(Potential2d::<f64>::from_text(&v.to_text()).unwrap(), v);
    }

    #[test]
    fn window_2d_geometry() {
        let w = Lattice2DWindow::new(3).unwrap();
        assert!(w.sites().iter().all(|[x, y]| x * x + y * y <= 9));
        assert_eq!(w.len(), 29);
        let mut seen = std::collections::HashSet::new();
        for &(i, j) in w.edges() {
            let [a, b] = [w.sites()[i], w.sites()[j]];
            assert_eq!((a[0] - b[0]).abs() + (a[1] - b[1]).abs(), 1);
            assert!(seen.insert((i.min(j), i.max(j))));
        }
        let origin = w.index_of([0, 0]).unwrap();
        assert!(w.is_interior(origin));
        assert!(!w.is_interior(w.index_of([3, 0]).unwrap()));
        // every interior site contributes four edge endpoints
        let degree_sum: usize = (0..w.len()).map(|i| w.neighbors(i).count()).sum();
        assert_eq!(degree_sum, 2 * w.edges().len());
    }

    #[test]
    fn form_matches_inner_product_with_apply() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for size in [1usize, 2, 17, 1000] {
            let diag: Vec<f64> = (0..size).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let off: Vec<f64> = (1..size).map(|_| rng.gen_range(0.1..2.0)).collect();
            let sys = TridiagonalSystem::new(diag, off).unwrap();
            let phi: Vec<f64> = (0..size).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let q = sys.quadratic_form(&phi).unwrap();
            let ip = dot(&phi, &sys.apply(&phi).unwrap());
            assert!((q - ip).abs() <= 1e-12 * q.abs().max(1.0));
        }
        let w = Lattice2DWindow::new(12).unwrap();
        let pot = Potential2d::new(w.sites().iter().map(|&s| (s, rng.gen_range(-1.0..1.0))));
        let op = w.operator(&pot);
        let phi: Vec<f64> = (0..w.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let q = op.quadratic_form(&phi).unwrap();
        assert!((q - dot(&phi, &op.apply(&phi).unwrap())).abs() <= 1e-12 * q.abs().max(1.0));
    }

    #[test]
    fn generic_over_f32() {
        let sys = Potential::<f32>::single_site(Lattice::WholeLine, 0, 1.0).unwrap().truncate(-1, 1).unwrap();
        assert_eq!(sys.quadratic_form(&[1.0, 1.0, 1.0]).unwrap(), 5.0);
    }

    proptest! {
        #[test]
        fn potential_text_round_trip_is_bit_exact(
            start in -50i64..50,
            values in proptest::collection::vec(proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO, 0..40),
        ) {
            let v = Potential::new(Lattice::WholeLine, start, values, Tail::Zero).unwrap();
            let back = Potential::<f64>::from_text(&v.to_text()).unwrap();
            prop_assert_eq!(back.window_start(), v.window_start());
            let bits = |p: &Potential<f64>| p.values().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(&back), bits(&v));
        }

        #[test]
        fn quadratic_form_polarizes(
            seed in 0u64..1000,
            size in 2usize..200,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let diag: Vec<f64> = (0..size).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let sys = TridiagonalSystem::new(diag, vec![1.0; size - 1]).unwrap();
            let phi: Vec<f64> = (0..size).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let chi: Vec<f64> = (0..size).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let plus: Vec<f64> = phi.iter().zip(&chi).map(|(a, b)| a + b).collect();
            let minus: Vec<f64> = phi.iter().zip(&chi).map(|(a, b)| a - b).collect();
            let polar = (sys.quadratic_form(&plus).unwrap() - sys.quadratic_form(&minus).unwrap()) / 4.0;
            let bilinear = dot(&phi, &sys.apply(&chi).unwrap());
            let scale = sys.quadratic_form(&plus).unwrap().abs() + sys.quadratic_form(&minus).unwrap().abs() + 1.0;
            prop_assert!((polar - bilinear).abs() <= 1e-12 * scale);
        }
    }
}
