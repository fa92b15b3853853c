//! Real trigonometric polynomials on the torus whose Fourier coefficients are
//! exponential polynomials in time.
//!
//! A field stores every mode `n` together with its mirror `-n`, with the
//! coefficient at `-n` the complex conjugate of the one at `n`. The physical
//! frequency of mode `n` is `ξ = scale · n` for a rational `scale` shared by
//! the whole field; the period cell is `[0, 2π/scale)^d`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use smallvec::SmallVec;

use crate::expo::{consolidate, ExpPolynomial, ExpTerm};
use crate::rate::{sum_of_squares, Rate};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FieldError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("frequency scale mismatch: {} vs {}", .0.0, .0.1)]
    ScaleMismatch(Box<(Rate, Rate)>),
    #[error("invalid axis {axis} for a {dim}-dimensional field")]
    InvalidAxis { axis: usize, dim: usize },
    #[error("field has time-dependent coefficients; evaluate it first")]
    NotStatic,
    #[error("lattice frequency overflowed 64-bit components")]
    Overflow,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// An integer lattice point `n ∈ ℤ^d`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Frequency(SmallVec<[i64; 3]>);

impl Frequency {
    pub fn new(components: &[i64]) -> Self {
        Frequency(SmallVec::from_slice(components))
    }

    pub fn zero(dim: usize) -> Self {
        Frequency(SmallVec::from_elem(0, dim))
    }

    /// `m · e_axis` in `d` dimensions.
    pub fn axis(dim: usize, axis: usize, m: i64) -> Self {
        let mut f = Self::zero(dim);
        f.0[axis] = m;
        f
    }

    pub fn components(&self) -> &[i64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Canonical half-lattice: the first nonzero component is positive.
    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().find(|&&c| c != 0).map_or(true, |&c| c > 0)
    }

    pub fn neg(&self) -> Option<Frequency> {
        self.0
            .iter()
            .map(|c| c.checked_neg())
            .collect::<Option<SmallVec<_>>>()
            .map(Frequency)
    }

    pub fn checked_add(&self, other: &Frequency) -> Option<Frequency> {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.checked_add(*b))
            .collect::<Option<SmallVec<_>>>()
            .map(Frequency)
    }

    /// `Σ n_i²` exactly.
    pub fn norm_squared(&self) -> Rate {
        sum_of_squares(&self.0)
    }

    pub fn max_abs(&self) -> u64 {
        self.0.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }
}

/// Per-mode decay rate `μ(ξ)` of the linear part `∂_t u + μ(D) u`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinearMultiplier {
    /// `μ ≡ 0`.
    Zero,
    /// `μ = |ξ|²` (heat semigroup `e^{tΔ}`).
    Heat,
    /// `μ = |ξ|² - 1` (linear part of Allen–Cahn, `e^{t(1+Δ)}`).
    ShiftedHeat,
    /// `μ = |ξ|⁴` (`e^{-tΔ²}`).
    Bilaplacian,
}

impl LinearMultiplier {
    /// `μ` at a frequency with squared magnitude `xi_sq`.
    pub fn rate(&self, xi_sq: &Rate) -> Rate {
        match self {
            LinearMultiplier::Zero => Rate::ZERO,
            LinearMultiplier::Heat => xi_sq.clone(),
            LinearMultiplier::ShiftedHeat => xi_sq.sub(&Rate::ONE),
            LinearMultiplier::Bilaplacian => xi_sq.square(),
        }
    }

    /// Parabolic order: 2 for second-order, 4 for the bilaplacian.
    pub fn order(&self) -> u32 {
        match self {
            LinearMultiplier::Bilaplacian => 4,
            _ => 2,
        }
    }
}

/// Constant-coefficient differential operators acting on a single factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FieldOperator {
    Identity,
    Laplacian,
    Bilaplacian,
    /// `∂_k`, zero-based axis.
    Partial(usize),
}

/// A real trigonometric polynomial with exponential-polynomial coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolynomial {
    dim: usize,
    scale: Rate,
    modes: BTreeMap<Frequency, ExpPolynomial>,
}

impl TrigPolynomial {
    pub fn zero(dim: usize, scale: Rate) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        assert!(scale.is_positive(), "scale must be positive");
        TrigPolynomial { dim, scale, modes: BTreeMap::new() }
    }

    /// Zero field on the standard torus `ℝ^d / (2πℤ)^d`.
    pub fn zero_standard(dim: usize) -> Self {
        Self::zero(dim, Rate::ONE)
    }

    pub fn constant(dim: usize, scale: Rate, c: f64) -> Self {
        let mut f = Self::zero(dim, scale);
        f.insert_mode(Frequency::zero(dim), ExpPolynomial::constant(Complex64::new(c, 0.0)));
        f
    }

    /// `amplitude · cos(ξ(n)·x)`, stored as `amplitude/2` at `±n`.
    pub fn cosine(dim: usize, scale: Rate, n: &[i64], amplitude: f64) -> Self {
        let n = Frequency::new(n);
        assert_eq!(n.dim(), dim);
        let mut f = Self::zero(dim, scale);
        if n.is_zero() {
            f.insert_mode(n, ExpPolynomial::constant(Complex64::new(amplitude, 0.0)));
        } else {
            let half = ExpPolynomial::constant(Complex64::new(amplitude / 2.0, 0.0));
            f.insert_pair(n, half);
        }
        f
    }

    /// `amplitude · sin(ξ(n)·x)`: `-i·amplitude/2` at `n`, conjugate at `-n`.
    pub fn sine(dim: usize, scale: Rate, n: &[i64], amplitude: f64) -> Self {
        let n = Frequency::new(n);
        let mut f = Self::zero(dim, scale);
        if !n.is_zero() {
            f.insert_pair(n, ExpPolynomial::constant(Complex64::new(0.0, -amplitude / 2.0)));
        }
        f
    }

    /// Builds a field from modes in the canonical half-lattice; mirrors are
    /// filled in by conjugation. A zero mode must carry a real coefficient.
    pub fn from_half_modes(
        dim: usize,
        scale: Rate,
        modes: impl IntoIterator<Item = (Frequency, ExpPolynomial)>,
    ) -> Self {
        let mut f = Self::zero(dim, scale);
        for (n, p) in modes {
            assert_eq!(n.dim(), dim);
            let (n, p) = if n.is_nonnegative() {
                (n, p)
            } else {
                (n.neg().expect("negatable"), p.conj())
            };
            let existing = f.modes.remove(&n).unwrap_or_default();
            let p = existing.add(&p);
            if n.is_zero() {
                f.insert_mode(n, p);
            } else {
                f.insert_pair(n, p);
            }
        }
        f
    }

    fn insert_mode(&mut self, n: Frequency, p: ExpPolynomial) {
        if p.is_zero() {
            self.modes.remove(&n);
        } else {
            self.modes.insert(n, p);
        }
    }

    /// Stores `p` at `n` (nonzero) and `conj(p)` at `-n`.
    fn insert_pair(&mut self, n: Frequency, p: ExpPolynomial) {
        let m = n.neg().expect("negatable frequency");
        let (pos, neg) = if n.is_nonnegative() { (n, m) } else { (m, n) };
        if p.is_zero() {
            self.modes.remove(&pos);
            self.modes.remove(&neg);
        } else {
            self.modes.insert(neg, p.conj());
            self.modes.insert(pos, p);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scale(&self) -> &Rate {
        &self.scale
    }

    /// Number of stored modes (both halves).
    pub fn support_len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Total number of exponential-polynomial terms.
    pub fn term_count(&self) -> usize {
        self.modes.values().map(ExpPolynomial::len).sum()
    }

    pub fn modes(&self) -> impl Iterator<Item = (&Frequency, &ExpPolynomial)> {
        self.modes.iter()
    }

    pub fn coefficient(&self, n: &Frequency) -> Option<&ExpPolynomial> {
        self.modes.get(n)
    }

    pub fn is_static(&self) -> bool {
        self.modes.values().all(ExpPolynomial::is_constant)
    }

    /// Squared physical frequency `|ξ(n)|² = scale² Σ n_i²`.
    pub fn xi_squared(&self, n: &Frequency) -> Rate {
        self.scale.square().mul(&n.norm_squared())
    }

    /// Largest `|n|_∞` in the support.
    pub fn max_harmonic(&self) -> u64 {
        self.modes.keys().map(Frequency::max_abs).max().unwrap_or(0)
    }

    fn check_compatible(&self, other: &TrigPolynomial) -> Result<(), FieldError> {
        if self.dim != other.dim {
            return Err(FieldError::DimensionMismatch(self.dim, other.dim));
        }
        if self.scale != other.scale {
            return Err(FieldError::ScaleMismatch(Box::new((self.scale.clone(), other.scale.clone()))));
        }
        Ok(())
    }

    /// Applies `f` to the canonical half of the modes and mirrors the result.
    fn map_half(&self, mut f: impl FnMut(&Frequency, &ExpPolynomial) -> ExpPolynomial) -> Self {
        let mut out = Self::zero(self.dim, self.scale.clone());
        for (n, p) in self.modes.iter().filter(|(n, _)| n.is_nonnegative()) {
            let q = f(n, p);
            if n.is_zero() {
                out.insert_mode(n.clone(), q);
            } else {
                out.insert_pair(n.clone(), q);
            }
        }
        out
    }

    pub fn add(&self, other: &TrigPolynomial) -> Result<TrigPolynomial, FieldError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (n, p) in other.modes.iter().filter(|(n, _)| n.is_nonnegative()) {
            let sum = match out.modes.get(n) {
                Some(q) => q.add(p),
                None => p.clone(),
            };
            if n.is_zero() {
                out.insert_mode(n.clone(), sum);
            } else {
                out.insert_pair(n.clone(), sum);
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &TrigPolynomial) -> Result<TrigPolynomial, FieldError> {
        self.add(&other.scale_by(-1.0))
    }

    /// Multiplies every coefficient by a real factor.
    pub fn scale_by(&self, factor: f64) -> TrigPolynomial {
        self.map_half(|_, p| p.scale(Complex64::new(factor, 0.0)))
    }

    /// Exact product: convolution of supports with termwise products of the
    /// exponential-polynomial coefficients.
    pub fn multiply(&self, other: &TrigPolynomial) -> Result<TrigPolynomial, FieldError> {
        self.check_compatible(other)?;
        let mut acc: BTreeMap<Frequency, Vec<ExpTerm>> = BTreeMap::new();
        for (na, pa) in &self.modes {
            for (nb, pb) in &other.modes {
                let n = na.checked_add(nb).ok_or(FieldError::Overflow)?;
                if !n.is_nonnegative() {
                    continue;
                }
                let bucket = acc.entry(n).or_default();
                pa.mul_into(pb, bucket);
                if bucket.len() > 1 << 16 {
                    consolidate(bucket);
                }
            }
        }
        let mut out = Self::zero(self.dim, self.scale.clone());
        for (n, terms) in acc {
            let p = ExpPolynomial::from_terms(terms);
            if n.is_zero() {
                // Imaginary part of the zero mode is pure rounding.
                let real = ExpPolynomial::from_terms(
                    p.into_terms()
                        .into_iter()
                        .map(|t| ExpTerm::new(Complex64::new(t.coeff.re, 0.0), t.power, t.rate))
                        .collect(),
                );
                out.insert_mode(n, real);
            } else {
                out.insert_pair(n, p);
            }
        }
        Ok(out)
    }

    /// Per-mode symbol of a differential operator.
    pub fn operator_symbol(&self, op: FieldOperator, n: &Frequency) -> Complex64 {
        match op {
            FieldOperator::Identity => Complex64::new(1.0, 0.0),
            FieldOperator::Laplacian => Complex64::new(-self.xi_squared(n).to_f64(), 0.0),
            FieldOperator::Bilaplacian => Complex64::new(self.xi_squared(n).square().to_f64(), 0.0),
            FieldOperator::Partial(k) => {
                let xi_k = self.scale.mul(&Rate::integer(n.components()[k] as i128)).to_f64();
                Complex64::new(0.0, xi_k)
            }
        }
    }

    pub fn apply_operator(&self, op: FieldOperator) -> Result<TrigPolynomial, FieldError> {
        if let FieldOperator::Partial(axis) = op {
            if axis >= self.dim {
                return Err(FieldError::InvalidAxis { axis, dim: self.dim });
            }
        }
        if op == FieldOperator::Identity {
            return Ok(self.clone());
        }
        Ok(self.map_half(|n, p| p.scale(self.operator_symbol(op, n))))
    }

    /// Multiplies each mode by `e^{-μ(ξ) t}`.
    pub fn apply_semigroup(&self, mult: LinearMultiplier) -> TrigPolynomial {
        self.map_half(|n, p| p.shift_rate(&mult.rate(&self.xi_squared(n))))
    }

    /// `sign · ∫_0^t e^{-(t-s) μ(D)} f(s) ds`, exactly.
    pub fn duhamel(&self, mult: LinearMultiplier, sign: f64) -> TrigPolynomial {
        self.map_half(|n, p| p.duhamel(&mult.rate(&self.xi_squared(n)), sign))
    }

    /// Time derivative of every coefficient.
    pub fn time_derivative(&self) -> TrigPolynomial {
        self.map_half(|_, p| p.derivative())
    }

    /// Collapses every coefficient to its value at time `t`.
    pub fn evaluate_at(&self, t: f64) -> TrigPolynomial {
        self.map_half(|_, p| ExpPolynomial::constant(p.evaluate(t)))
    }

    /// `g(t) = f(σ t)`.
    pub fn time_rescale(&self, sigma: &Rate) -> TrigPolynomial {
        self.map_half(|_, p| p.time_rescale(sigma))
    }

    /// The same coefficients on a different frequency scale.
    pub fn with_scale(&self, scale: Rate) -> TrigPolynomial {
        assert!(scale.is_positive(), "scale must be positive");
        TrigPolynomial { dim: self.dim, scale, modes: self.modes.clone() }
    }

    /// Keeps the modes selected by `keep`.
    pub fn filter_modes(&self, mut keep: impl FnMut(&Frequency) -> bool) -> TrigPolynomial {
        TrigPolynomial {
            dim: self.dim,
            scale: self.scale.clone(),
            modes: self
                .modes
                .iter()
                .filter(|(n, _)| keep(n))
                .map(|(n, p)| (n.clone(), p.clone()))
                .collect(),
        }
    }

    /// Complex value `Σ c_n e^{i ξ(n)·x}` of a static field.
    pub fn sample_complex(&self, x: &[f64]) -> Result<Complex64, FieldError> {
        if x.len() != self.dim {
            return Err(FieldError::DimensionMismatch(self.dim, x.len()));
        }
        if !self.is_static() {
            return Err(FieldError::NotStatic);
        }
        let s = self.scale.to_f64();
        let mut acc = Complex64::new(0.0, 0.0);
        for (n, p) in &self.modes {
            let phase: f64 = n
                .components()
                .iter()
                .zip(x)
                .map(|(&k, &xi)| k as f64 * xi)
                .sum::<f64>()
                * s;
            acc += p.constant_term() * Complex64::from_polar(1.0, phase);
        }
        Ok(acc)
    }

    /// Real value of a static field at `x`.
    pub fn sample(&self, x: &[f64]) -> Result<f64, FieldError> {
        self.sample_complex(x).map(|z| z.re)
    }

    /// `Σ_n |c_n|` of a static field (Wiener-algebra norm, bounds `L^∞`).
    pub fn l1_norm(&self) -> Result<f64, FieldError> {
        if !self.is_static() {
            return Err(FieldError::NotStatic);
        }
        Ok(self.modes.values().map(|p| p.constant_term().norm()).sum())
    }

    /// Largest coefficient deviation from exact Hermitian symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (n, p) in &self.modes {
            let m = n.neg().expect("negatable");
            let d = match self.modes.get(&m) {
                Some(q) => p.max_abs_difference(&q.conj()),
                None => p.max_abs_coeff(),
            };
            worst = worst.max(d);
        }
        worst
    }

    /// `max |c|` over all `(mode, power, rate)` keys of `self - other`.
    pub fn max_abs_difference(&self, other: &TrigPolynomial) -> Result<f64, FieldError> {
        self.check_compatible(other)?;
        let empty = ExpPolynomial::zero();
        let mut worst = 0.0f64;
        for (n, p) in &self.modes {
            worst = worst.max(p.max_abs_difference(other.modes.get(n).unwrap_or(&empty)));
        }
        for (n, q) in &other.modes {
            if !self.modes.contains_key(n) {
                worst = worst.max(q.max_abs_coeff());
            }
        }
        Ok(worst)
    }

    /// Largest coefficient magnitude of any term.
    pub fn max_abs_coeff(&self) -> f64 {
        self.modes.values().map(ExpPolynomial::max_abs_coeff).fold(0.0, f64::max)
    }

    /// Canonical text form: a `# trigpoly dim=d scale=p/q` header, then one
    /// line per mode in lexicographic order,
    /// `n_1 … n_d re im [m λ_num/λ_den re im]*`, where `re im` is the
    /// time-independent coefficient.
    pub fn to_canonical_string(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# trigpoly dim={} scale={}", self.dim, self.scale).unwrap();
        for (n, p) in &self.modes {
            let comps: Vec<String> = n.components().iter().map(|c| c.to_string()).collect();
            let c0 = p.constant_term();
            write!(s, "{} {:e} {:e}", comps.join(" "), c0.re, c0.im).unwrap();
            for t in p.terms() {
                if t.power == 0 && t.rate.is_zero() {
                    continue;
                }
                write!(s, " {} {} {:e} {:e}", t.power, t.rate, t.coeff.re, t.coeff.im).unwrap();
            }
            s.push('\n');
        }
        s
    }

    /// Parses [`to_canonical_string`](Self::to_canonical_string) output.
    ///
    /// Mirrored coefficients must be conjugate to within `1e-12` relative;
    /// the parsed field is re-symmetrised from the canonical half.
    pub fn parse_canonical(text: &str) -> Result<TrigPolynomial, FieldError> {
        let perr = |line: usize, message: String| FieldError::Parse { line, message };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines.next().ok_or_else(|| perr(1, "empty input".into()))?;
        let mut dim = None;
        let mut scale = None;
        let mut tokens = header.split_whitespace();
        if tokens.next() != Some("#") || tokens.next() != Some("trigpoly") {
            return Err(perr(hline + 1, "expected `# trigpoly` header".into()));
        }
        for tok in tokens {
            if let Some(v) = tok.strip_prefix("dim=") {
                let d: usize = v.parse().map_err(|_| perr(hline + 1, format!("bad dim `{v}`")))?;
                if d == 0 || d > 64 {
                    return Err(perr(hline + 1, format!("dimension {d} out of range")));
                }
                dim = Some(d);
            } else if let Some(v) = tok.strip_prefix("scale=") {
                let r: Rate = v.parse().map_err(|e| perr(hline + 1, format!("{e}")))?;
                if !r.is_positive() {
                    return Err(perr(hline + 1, "scale must be positive".into()));
                }
                scale = Some(r);
            } else {
                return Err(perr(hline + 1, format!("unknown header field `{tok}`")));
            }
        }
        let dim = dim.ok_or_else(|| perr(hline + 1, "missing dim".into()))?;
        let scale = scale.ok_or_else(|| perr(hline + 1, "missing scale".into()))?;

        let mut raw: BTreeMap<Frequency, ExpPolynomial> = BTreeMap::new();
        for (i, line) in lines {
            let lno = i + 1;
            if line.trim_start().starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() < dim + 2 || (toks.len() - dim - 2) % 4 != 0 {
                return Err(perr(lno, format!("expected {dim} components, re, im and groups of 4")));
            }
            let comps = toks[..dim]
                .iter()
                .map(|t| t.parse::<i64>().map_err(|_| perr(lno, format!("bad component `{t}`"))))
                .collect::<Result<Vec<_>, _>>()?;
            let n = Frequency::new(&comps);
            if n.neg().is_none() {
                return Err(perr(lno, "component out of range".into()));
            }
            let float = |t: &str| -> Result<f64, FieldError> {
                let v: f64 = t.parse().map_err(|_| perr(lno, format!("bad number `{t}`")))?;
                if !v.is_finite() {
                    return Err(perr(lno, format!("non-finite number `{t}`")));
                }
                Ok(v)
            };
            let mut terms = vec![ExpTerm::new(
                Complex64::new(float(toks[dim])?, float(toks[dim + 1])?),
                0,
                Rate::ZERO,
            )];
            for g in toks[dim + 2..].chunks(4) {
                let power: u32 = g[0].parse().map_err(|_| perr(lno, format!("bad power `{}`", g[0])))?;
                if power > 1024 {
                    return Err(perr(lno, format!("power {power} too large")));
                }
                let rate: Rate = g[1].parse().map_err(|e| perr(lno, format!("{e}")))?;
                terms.push(ExpTerm::new(Complex64::new(float(g[2])?, float(g[3])?), power, rate));
            }
            if raw.insert(n, ExpPolynomial::from_terms(terms)).is_some() {
                return Err(perr(lno, "duplicate mode".into()));
            }
        }

        let mut out = TrigPolynomial::zero(dim, scale);
        let empty = ExpPolynomial::zero();
        for (n, p) in &raw {
            if !n.is_nonnegative() {
                continue;
            }
            let mirror = raw.get(&n.neg().expect("checked")).unwrap_or(&empty);
            let tol = 1e-12 * p.max_abs_coeff().max(mirror.max_abs_coeff());
            if p.max_abs_difference(&mirror.conj()) > tol {
                return Err(perr(0, format!("mode {:?} is not Hermitian-symmetric", n.components())));
            }
            if n.is_zero() {
                let real = ExpPolynomial::from_terms(
                    p.terms()
                        .iter()
                        .map(|t| ExpTerm::new(Complex64::new(t.coeff.re, 0.0), t.power, t.rate.clone()))
                        .collect(),
                );
                out.insert_mode(n.clone(), real);
            } else {
                out.insert_pair(n.clone(), p.clone());
            }
        }
        for n in raw.keys() {
            if !n.is_nonnegative() && !raw.contains_key(&n.neg().expect("checked")) {
                return Err(perr(0, format!("mode {:?} has no mirror", n.components())));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cos1(n: i64, a: f64) -> TrigPolynomial {
        TrigPolynomial::cosine(1, Rate::ONE, &[n], a)
    }

    #[test]
    fn add_doubles_and_identity() {
        let c = cos1(1, 1.0);
        let two = c.add(&c).unwrap();
        assert_eq!(
            two.coefficient(&Frequency::new(&[1])).unwrap().constant_term(),
            Complex64::new(1.0, 0.0)
        );
        assert_eq!(c.add(&TrigPolynomial::zero_standard(1)).unwrap(), c);
        let mixed = cos1(1, 1.0).add(&cos1(2, 1.0)).unwrap();
        assert_eq!(mixed.support_len(), 4);
        for x in [0.0f64, 0.3, 1.7, 4.0] {
            let want = x.cos() + (2.0 * x).cos();
            assert!((mixed.sample(&[x]).unwrap() - want).abs() < 1e-14);
        }
    }

    #[test]
    fn add_rejects_mismatch() {
        let a = TrigPolynomial::zero_standard(1);
        let b = TrigPolynomial::zero_standard(2);
        assert!(matches!(a.add(&b), Err(FieldError::DimensionMismatch(1, 2))));
        let c = TrigPolynomial::zero(1, Rate::new(1, 2));
        assert!(matches!(a.multiply(&c), Err(FieldError::ScaleMismatch(..))));
    }

    #[test]
    fn cosine_products() {
        let c = cos1(1, 1.0);
        let sq = c.multiply(&c).unwrap();
        let want = TrigPolynomial::constant(1, Rate::ONE, 0.5).add(&cos1(2, 0.5)).unwrap();
        assert!(sq.max_abs_difference(&want).unwrap() < 1e-16);
        let cube = sq.multiply(&c).unwrap();
        let want = cos1(3, 0.25).add(&cos1(1, 0.75)).unwrap();
        assert!(cube.max_abs_difference(&want).unwrap() < 1e-16);
    }

    #[test]
    fn decaying_product_adds_rates() {
        let a = cos1(1, 1.0).apply_semigroup(LinearMultiplier::Heat);
        let b = cos1(2, 1.0).apply_semigroup(LinearMultiplier::Heat);
        let p = a.multiply(&b).unwrap();
        for n in [1, 3] {
            let c = p.coefficient(&Frequency::new(&[n])).unwrap();
            assert_eq!(c.terms(), &[ExpTerm::new(Complex64::new(0.25, 0.0), 0, Rate::integer(5))]);
        }
        // Quadrature cross-check in x at fixed t.
        let t = 0.13;
        let pt = p.evaluate_at(t);
        let m = 64;
        let mut worst = 0.0f64;
        for i in 0..m {
            let x = 2.0 * PI * i as f64 / m as f64;
            let want = (-5.0 * t).exp() * x.cos() * (2.0 * x).cos();
            worst = worst.max((pt.sample(&[x]).unwrap() - want).abs());
        }
        assert!(worst < 1e-14);
    }

    #[test]
    fn operators_are_fourier_multipliers() {
        let c = cos1(3, 1.0);
        let lap = c.apply_operator(FieldOperator::Laplacian).unwrap();
        assert!(lap.max_abs_difference(&cos1(3, -9.0)).unwrap() < 1e-15);
        let bi = c.apply_operator(FieldOperator::Bilaplacian).unwrap();
        assert!(bi.max_abs_difference(&cos1(3, 81.0)).unwrap() < 1e-13);

        let f = TrigPolynomial::cosine(2, Rate::ONE, &[2, 0], 1.0);
        let d = f.apply_operator(FieldOperator::Partial(0)).unwrap();
        let want = TrigPolynomial::sine(2, Rate::ONE, &[2, 0], -2.0);
        assert!(d.max_abs_difference(&want).unwrap() < 1e-15);
        // finite differences
        let h = 1e-5;
        for &(x, y) in &[(0.3, 1.0), (2.0, -0.5)] {
            let fd = (f.sample(&[x + h, y]).unwrap() - f.sample(&[x - h, y]).unwrap()) / (2.0 * h);
            assert!((d.sample(&[x, y]).unwrap() - fd).abs() < 1e-8);
        }
        assert!(matches!(
            f.apply_operator(FieldOperator::Partial(2)),
            Err(FieldError::InvalidAxis { axis: 2, dim: 2 })
        ));
    }

    #[test]
    fn sampling_requires_static() {
        let f = cos1(1, 1.0).apply_semigroup(LinearMultiplier::Heat);
        assert_eq!(f.sample(&[0.0]), Err(FieldError::NotStatic));
        assert_eq!(f.evaluate_at(0.0).sample(&[0.0]).unwrap(), 1.0);
        let c = TrigPolynomial::constant(1, Rate::ONE, 2.5);
        assert_eq!(c.sample(&[1.234]).unwrap(), 2.5);
    }

    #[test]
    fn semigroup_identity_and_additivity() {
        let f = cos1(2, 1.0).add(&cos1(5, 0.3)).unwrap();
        assert_eq!(f.apply_semigroup(LinearMultiplier::Zero), f);
        let g = f.apply_semigroup(LinearMultiplier::Heat);
        let (t1, t2) = (0.011, 0.027);
        let composed = g.evaluate_at(t1).apply_semigroup(LinearMultiplier::Heat).evaluate_at(t2);
        let direct = g.evaluate_at(t1 + t2);
        assert!(composed.max_abs_difference(&direct).unwrap() < 1e-15);
    }

    #[test]
    fn duhamel_constant_forcing_zero_rate() {
        let one = TrigPolynomial::constant(1, Rate::ONE, 1.0);
        let d = one.duhamel(LinearMultiplier::Heat, 1.0);
        let c = d.coefficient(&Frequency::zero(1)).unwrap();
        assert_eq!(c.terms(), &[ExpTerm::new(Complex64::new(1.0, 0.0), 1, Rate::ZERO)]);
    }

    #[test]
    fn wide_rates_are_exact() {
        // a_5 N with N = 2^8 squares past 64 bits.
        let n = (1i64 << 32) * 256;
        let f = cos1(n, 1.0).apply_semigroup(LinearMultiplier::Heat);
        let c = f.coefficient(&Frequency::new(&[n])).unwrap();
        assert_eq!(c.terms()[0].rate.numer(), num_bigint::BigInt::from(n).pow(2));
        let huge = cos1(i64::MAX / 2, 1.0);
        assert!(matches!(huge.multiply(&cos1(i64::MAX / 2 + 2, 1.0)), Err(FieldError::Overflow)));
    }

    #[test]
    fn canonical_round_trip_and_errors() {
        let f = cos1(1, 1.0)
            .add(&TrigPolynomial::sine(1, Rate::ONE, &[3], 0.5))
            .unwrap()
            .apply_semigroup(LinearMultiplier::ShiftedHeat)
            .duhamel(LinearMultiplier::Heat, -1.0);
        let text = f.to_canonical_string();
        let g = TrigPolynomial::parse_canonical(&text).unwrap();
        assert_eq!(f, g);
        assert_eq!(g.to_canonical_string(), text);

        assert!(TrigPolynomial::parse_canonical("").is_err());
        assert!(TrigPolynomial::parse_canonical("# trigpoly dim=1 scale=1\n1 0.5 0\n").is_err());
        assert!(TrigPolynomial::parse_canonical("# trigpoly dim=1 scale=1\n1 0.5 0\n-1 0.5 0.1\n").is_err());
        assert!(TrigPolynomial::parse_canonical("# trigpoly dim=1 scale=0\n").is_err());
        let ok = TrigPolynomial::parse_canonical("# trigpoly dim=1 scale=1/2\n-1 5e-1 0\n1 5e-1 0\n").unwrap();
        assert_eq!(ok.scale(), &Rate::new(1, 2));
    }
}
