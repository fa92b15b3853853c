//! Exponential polynomials `Σ c · t^m · e^{-λ t}` in one time variable.
//!
//! This is the exact time profile of every Fourier coefficient produced by
//! the Picard iteration: the class is closed under products, under the
//! semigroup shift `e^{-μ t}` and under the Duhamel integral.

use num_complex::Complex64;

use crate::rate::Rate;

/// Terms with a coefficient below this magnitude are dropped on consolidation.
pub const PRUNE_THRESHOLD: f64 = 1e-30;

/// `e^{-λ t}` is taken to be exactly zero once `λ t` exceeds this.
pub const UNDERFLOW_EXPONENT: f64 = 750.0;

/// One term `coeff · t^power · e^{-rate · t}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpTerm {
    pub power: u32,
    pub rate: Rate,
    pub coeff: Complex64,
}

impl ExpTerm {
    pub fn new(coeff: Complex64, power: u32, rate: Rate) -> Self {
        ExpTerm { power, rate, coeff }
    }

    fn key_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.power
            .cmp(&other.power)
            .then_with(|| self.rate.cmp(&other.rate))
    }
}

/// A consolidated exponential polynomial: terms sorted by `(power, rate)`,
/// unique keys, no coefficient below [`PRUNE_THRESHOLD`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExpPolynomial {
    terms: Vec<ExpTerm>,
}

impl ExpPolynomial {
    pub fn zero() -> Self {
        ExpPolynomial { terms: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::from_terms(vec![ExpTerm::new(c, 0, Rate::ZERO)])
    }

    pub fn monomial(c: Complex64, power: u32, rate: Rate) -> Self {
        Self::from_terms(vec![ExpTerm::new(c, power, rate)])
    }

    /// Builds a consolidated polynomial from arbitrary terms.
    pub fn from_terms(mut terms: Vec<ExpTerm>) -> Self {
        consolidate(&mut terms);
        ExpPolynomial { terms }
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<ExpTerm> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    /// True when the polynomial has no time dependence.
    pub fn is_constant(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.power == 0 && t.rate.is_zero())
    }

    /// The coefficient of the `(0, 0)` term.
    pub fn constant_term(&self) -> Complex64 {
        self.coefficient(0, &Rate::ZERO)
    }

    pub fn coefficient(&self, power: u32, rate: &Rate) -> Complex64 {
        self.terms
            .binary_search_by(|t| t.power.cmp(&power).then_with(|| t.rate.cmp(rate)))
            .map(|i| self.terms[i].coeff)
            .unwrap_or_default()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max)
    }

    pub fn add(&self, other: &ExpPolynomial) -> ExpPolynomial {
        let mut terms = Vec::with_capacity(self.len() + other.len());
        terms.extend_from_slice(&self.terms);
        terms.extend_from_slice(&other.terms);
        Self::from_terms(terms)
    }

    pub fn scale(&self, factor: Complex64) -> ExpPolynomial {
        Self::from_terms(
            self.terms
                .iter()
                .map(|t| ExpTerm::new(t.coeff * factor, t.power, t.rate.clone()))
                .collect(),
        )
    }

    pub fn conj(&self) -> ExpPolynomial {
        ExpPolynomial {
            terms: self
                .terms
                .iter()
                .map(|t| ExpTerm::new(t.coeff.conj(), t.power, t.rate.clone()))
                .collect(),
        }
    }

    /// Appends the unconsolidated termwise product of `self` and `other`.
    pub(crate) fn mul_into(&self, other: &ExpPolynomial, out: &mut Vec<ExpTerm>) {
        out.reserve(self.len() * other.len());
        for a in &self.terms {
            for b in &other.terms {
                out.push(ExpTerm::new(
                    a.coeff * b.coeff,
                    a.power + b.power,
                    a.rate.add(&b.rate),
                ));
            }
        }
    }

    pub fn mul(&self, other: &ExpPolynomial) -> ExpPolynomial {
        let mut out = Vec::new();
        self.mul_into(other, &mut out);
        Self::from_terms(out)
    }

    /// Multiplies by `e^{-μ t}`.
    pub fn shift_rate(&self, mu: &Rate) -> ExpPolynomial {
        if mu.is_zero() {
            return self.clone();
        }
        ExpPolynomial {
            terms: self
                .terms
                .iter()
                .map(|t| ExpTerm::new(t.coeff, t.power, t.rate.add(mu)))
                .collect(),
        }
    }

    /// `sign · ∫_0^t e^{-(t-s) μ} p(s) ds`, computed in closed form.
    ///
    /// A term with `λ = μ` is resonant and integrates to `t^{m+1}/(m+1)`.
    /// Otherwise, with `a = λ - μ`,
    /// `∫_0^t s^m e^{-a s} ds = m!/a^{m+1} (1 - e^{-a t} Σ_{k≤m} (a t)^k/k!)`.
    pub fn duhamel(&self, mu: &Rate, sign: f64) -> ExpPolynomial {
        let mut out = Vec::new();
        for term in &self.terms {
            let c = term.coeff * sign;
            let m = term.power;
            let a = term.rate.sub(mu);
            if a.is_zero() {
                out.push(ExpTerm::new(c / (m as f64 + 1.0), m + 1, mu.clone()));
                continue;
            }
            let af = a.to_f64();
            // m!/a^{m+1}, then peel off one factor a/k per lower power.
            let mut factor = 1.0 / af;
            for k in 1..=m {
                factor *= k as f64 / af;
            }
            out.push(ExpTerm::new(c * factor, 0, mu.clone()));
            // coefficient of t^k e^{-λ t}: -m!/(k! a^{m+1-k})
            let mut g = factor;
            for k in 0..=m {
                out.push(ExpTerm::new(-c * g, k, term.rate.clone()));
                g *= af / (k as f64 + 1.0);
            }
        }
        Self::from_terms(out)
    }

    /// Time derivative.
    pub fn derivative(&self) -> ExpPolynomial {
        let mut out = Vec::with_capacity(2 * self.len());
        for t in &self.terms {
            if t.power > 0 {
                out.push(ExpTerm::new(t.coeff * t.power as f64, t.power - 1, t.rate.clone()));
            }
            if !t.rate.is_zero() {
                out.push(ExpTerm::new(-t.coeff * t.rate.to_f64(), t.power, t.rate.clone()));
            }
        }
        Self::from_terms(out)
    }

    /// Evaluates at time `t ≥ 0`.
    pub fn evaluate(&self, t: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for term in &self.terms {
            acc += term.coeff * time_factor(term.power, &term.rate, t);
        }
        acc
    }

    /// Returns `q(t) = p(σ t)`: rates scale by `σ`, coefficients by `σ^m`.
    pub fn time_rescale(&self, sigma: &Rate) -> ExpPolynomial {
        let sf = sigma.to_f64();
        Self::from_terms(
            self.terms
                .iter()
                .map(|t| ExpTerm::new(t.coeff * sf.powi(t.power as i32), t.power, t.rate.mul(sigma)))
                .collect(),
        )
    }

    /// `max |c|` over the union of keys of `self - other`.
    pub fn max_abs_difference(&self, other: &ExpPolynomial) -> f64 {
        let (mut i, mut j) = (0, 0);
        let mut worst = 0.0f64;
        while i < self.terms.len() || j < other.terms.len() {
            let ord = match (self.terms.get(i), other.terms.get(j)) {
                (Some(a), Some(b)) => a.key_cmp(b),
                (Some(_), None) => std::cmp::Ordering::Less,
                _ => std::cmp::Ordering::Greater,
            };
            let d = match ord {
                std::cmp::Ordering::Less => {
                    i += 1;
                    self.terms[i - 1].coeff.norm()
                }
                std::cmp::Ordering::Greater => {
                    j += 1;
                    other.terms[j - 1].coeff.norm()
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                    (self.terms[i - 1].coeff - other.terms[j - 1].coeff).norm()
                }
            };
            worst = worst.max(d);
        }
        worst
    }
}

/// `t^m e^{-λ t}` with underflow to zero for large `λ t`.
pub fn time_factor(power: u32, rate: &Rate, t: f64) -> f64 {
    let exponent = if rate.is_zero() { 0.0 } else { rate.to_f64() * t };
    if exponent > UNDERFLOW_EXPONENT {
        return 0.0;
    }
    let poly = if power == 0 { 1.0 } else { t.powi(power as i32) };
    poly * (-exponent).exp()
}

/// Sorts by key, merges duplicates (summing in input order) and prunes.
pub(crate) fn consolidate(terms: &mut Vec<ExpTerm>) {
    if terms.len() > 1 {
        terms.sort_by(|a, b| a.key_cmp(b));
        let mut write = 0;
        for read in 1..terms.len() {
            if terms[read].key_cmp(&terms[write]) == std::cmp::Ordering::Equal {
                let c = terms[read].coeff;
                terms[write].coeff += c;
            } else {
                write += 1;
                terms.swap(write, read);
            }
        }
        terms.truncate(write + 1);
    }
    terms.retain(|t| t.coeff.norm() >= PRUNE_THRESHOLD);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn consolidation_merges_and_prunes() {
        let p = ExpPolynomial::from_terms(vec![
            ExpTerm::new(re(1.0), 0, Rate::integer(2)),
            ExpTerm::new(re(2.0), 0, Rate::integer(2)),
            ExpTerm::new(re(1e-31), 1, Rate::ZERO),
            ExpTerm::new(re(-3.0), 0, Rate::integer(2)),
        ]);
        assert!(p.is_zero());
    }

    #[test]
    fn duhamel_nonresonant_matches_display_profile() {
        // e^{-9tN²}(e^{6tN²}-1)/(6N²) from a unit e^{-3tN²} forcing at rate 9N².
        let n2 = 16i128;
        let p = ExpPolynomial::monomial(re(1.0), 0, Rate::integer(3 * n2));
        let d = p.duhamel(&Rate::integer(9 * n2), 1.0);
        for &t in &[0.0, 0.01, 0.05, 0.3] {
            let nn = n2 as f64;
            let want = (-9.0 * t * nn).exp() * ((6.0 * t * nn).exp() - 1.0) / (6.0 * nn);
            let got = d.evaluate(t).re;
            assert!((got - want).abs() <= 1e-14 * want.abs().max(1e-300) + 1e-18, "{got} {want}");
        }
    }

    #[test]
    fn duhamel_resonant_gains_a_power() {
        let mu = Rate::integer(9 * 16);
        let p = ExpPolynomial::monomial(re(3.0), 0, mu.clone());
        let d = p.duhamel(&mu, 1.0);
        assert_eq!(d.terms(), &[ExpTerm::new(re(3.0), 1, mu)]);
    }

    #[test]
    fn duhamel_of_constant_with_zero_rate_is_t() {
        let d = ExpPolynomial::constant(re(1.0)).duhamel(&Rate::ZERO, 1.0);
        assert_eq!(d.terms(), &[ExpTerm::new(re(1.0), 1, Rate::ZERO)]);
    }

    #[test]
    fn duhamel_satisfies_its_ode() {
        let p = ExpPolynomial::from_terms(vec![
            ExpTerm::new(re(0.7), 2, Rate::new(5, 3)),
            ExpTerm::new(Complex64::new(-0.2, 0.4), 1, Rate::integer(4)),
            ExpTerm::new(re(1.5), 0, Rate::new(7, 2)),
        ]);
        for sign in [1.0, -1.0] {
            let mu = Rate::new(7, 2);
            let d = p.duhamel(&mu, sign);
            let residual = d
                .derivative()
                .add(&d.scale(re(mu.to_f64())))
                .add(&p.scale(re(-sign)));
            assert!(residual.max_abs_coeff() < 1e-14, "{residual:?}");
            assert!(d.evaluate(0.0).norm() < 1e-15);
        }
    }

    #[test]
    fn evaluation_underflows_for_huge_rates() {
        let p = ExpPolynomial::monomial(re(1.0), 0, Rate::integer(1 << 100));
        assert_eq!(p.evaluate(1e-10), re(0.0));
        assert_eq!(p.evaluate(0.0), re(1.0));
    }

    #[test]
    fn time_rescale_is_composition() {
        let p = ExpPolynomial::from_terms(vec![
            ExpTerm::new(re(0.5), 2, Rate::new(3, 2)),
            ExpTerm::new(re(-1.0), 0, Rate::integer(1)),
        ]);
        let sigma = Rate::new(9, 4);
        let q = p.time_rescale(&sigma);
        for &t in &[0.0, 0.2, 1.3] {
            assert!((q.evaluate(t) - p.evaluate(2.25 * t)).norm() < 1e-14);
        }
    }
}
