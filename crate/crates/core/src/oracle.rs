//! Galerkin reference solver.
//!
//! The equation is restricted to a finite, negation-symmetric mode set and
//! integrated with exponential Euler: the linear part is exact per mode and
//! the nonlinearity is frozen over each step. Romberg extrapolation over
//! successive step halvings removes the first-order error.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::expo::ExpPolynomial;
use crate::field::{FieldError, FieldOperator, Frequency, TrigPolynomial};
use crate::picard::{self, EquationSpec, PicardError, SeriesOptions};
use crate::rate::Rate;

/// Coefficient magnitude treated as numerical blow-up.
pub const BLOW_UP_THRESHOLD: f64 = 1e12;
/// Ceiling on the size of the precomputed convolution tables.
pub const MAX_TABLE_ENTRIES: usize = 50_000_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Picard(#[from] PicardError),
    #[error("initial data must be time independent")]
    NonStaticData,
    #[error("coefficient magnitude {magnitude:e} exceeded {BLOW_UP_THRESHOLD:e} at t = {time}")]
    BlowUp { time: f64, magnitude: f64 },
    #[error("convolution tables would need {0} entries")]
    TooManyModes(usize),
    #[error("invalid step: {0}")]
    InvalidStep(String),
    #[error("outside the convergence radius: C0·τ(t)·‖u0‖² = {ratio} ≥ 1")]
    OutsideRadius { ratio: f64 },
}

/// One nonlinear monomial restricted to the mode set.
struct GalerkinTerm {
    coefficient: f64,
    /// Operator symbol per factor and mode.
    symbols: Vec<Vec<Complex64>>,
}

/// The equation restricted to a finite set of modes.
pub struct GalerkinSystem {
    dim: usize,
    scale: Rate,
    modes: Vec<Frequency>,
    mu: Vec<f64>,
    terms: Vec<GalerkinTerm>,
    /// `(i, j, p)`: `modes[i] + modes[j]` is intermediate mode `p`.
    pairs: Vec<(u32, u32, u32)>,
    intermediate_len: usize,
    /// `(p, k, out)`: intermediate `p` plus `modes[k]` is `modes[out]`.
    triples: Vec<(u32, u32, u32)>,
    negation: Vec<u32>,
}

/// Truncation radius covering everything generation `big_j` can reach.
pub fn default_truncation(big_j: usize) -> usize {
    2 * (2 * big_j + 1)
}

fn lattice_steps(u0: &TrigPolynomial) -> Vec<u64> {
    let mut g = vec![0u64; u0.dim()];
    for (n, _) in u0.modes() {
        for (k, &c) in n.components().iter().enumerate() {
            g[k] = num_integer::gcd(g[k], c.unsigned_abs());
        }
    }
    g
}

impl GalerkinSystem {
    /// Mode set: sums of support modes of `u0` with every coordinate
    /// `|n_k| ≤ M·g_k`, where `g_k` is the gcd of the support along axis `k`
    /// and `M` is `truncation` times the highest reduced harmonic.
    pub fn new(u0: &TrigPolynomial, eq: &EquationSpec, truncation: usize) -> Result<Self, OracleError> {
        if !u0.is_static() {
            return Err(OracleError::NonStaticData);
        }
        let dim = u0.dim();
        let steps = lattice_steps(u0);
        let reduced_high = u0
            .modes()
            .flat_map(|(n, _)| {
                n.components()
                    .iter()
                    .zip(&steps)
                    .filter(|(_, &g)| g > 0)
                    .map(|(&c, &g)| c.unsigned_abs() / g)
                    .collect::<Vec<_>>()
            })
            .max()
            .unwrap_or(0);
        let radius = (truncation as u64).saturating_mul(reduced_high.max(1));
        let in_box = |n: &Frequency| {
            n.components()
                .iter()
                .zip(&steps)
                .all(|(&c, &g)| if g == 0 { c == 0 } else { c.unsigned_abs() <= radius * g })
        };

        let generators: Vec<Frequency> = u0.modes().map(|(n, _)| n.clone()).collect();
        let mut modes: Vec<Frequency> = vec![Frequency::zero(dim)];
        let mut seen: HashMap<Frequency, usize> = HashMap::from([(Frequency::zero(dim), 0)]);
        let mut frontier = 0;
        while frontier < modes.len() {
            let base = modes[frontier].clone();
            for s in &generators {
                if let Some(m) = base.checked_add(s) {
                    if in_box(&m) && !seen.contains_key(&m) {
                        seen.insert(m.clone(), modes.len());
                        modes.push(m);
                    }
                }
            }
            frontier += 1;
        }
        modes.sort();
        let index: HashMap<Frequency, usize> =
            modes.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();

        let shape = TrigPolynomial::zero(dim, u0.scale().clone());
        let mu = modes
            .iter()
            .map(|n| eq.multiplier.rate(&shape.xi_squared(n)).to_f64())
            .collect();
        let terms = eq
            .terms
            .iter()
            .map(|t| GalerkinTerm {
                coefficient: t.coefficient.to_f64(),
                symbols: t
                    .factors
                    .iter()
                    .map(|op| modes.iter().map(|n| shape.operator_symbol(*op, n)).collect())
                    .collect(),
            })
            .collect();
        for t in &eq.terms {
            for op in &t.factors {
                if let FieldOperator::Partial(axis) = op {
                    if *axis >= dim {
                        return Err(FieldError::InvalidAxis { axis: *axis, dim }.into());
                    }
                }
            }
        }

        let m = modes.len();
        if m.saturating_mul(m) > MAX_TABLE_ENTRIES {
            return Err(OracleError::TooManyModes(m * m));
        }
        let mut inter_index: HashMap<Frequency, u32> = HashMap::new();
        let mut inter_modes: Vec<Frequency> = Vec::new();
        let mut pairs = Vec::with_capacity(m * m);
        for (i, a) in modes.iter().enumerate() {
            for (j, b) in modes.iter().enumerate() {
                let s = a.checked_add(b).ok_or(FieldError::Overflow)?;
                let p = *inter_index.entry(s.clone()).or_insert_with(|| {
                    inter_modes.push(s);
                    (inter_modes.len() - 1) as u32
                });
                pairs.push((i as u32, j as u32, p));
            }
        }
        if inter_modes.len().saturating_mul(m) > MAX_TABLE_ENTRIES {
            return Err(OracleError::TooManyModes(inter_modes.len() * m));
        }
        let mut triples = Vec::new();
        for (p, a) in inter_modes.iter().enumerate() {
            for (k, b) in modes.iter().enumerate() {
                if let Some(out) = a.checked_add(b).and_then(|s| index.get(&s)) {
                    triples.push((p as u32, k as u32, *out as u32));
                }
            }
        }
        let negation = modes.iter().map(|n| index[&n.neg().expect("negatable")] as u32).collect();

        Ok(GalerkinSystem {
            dim,
            scale: u0.scale().clone(),
            modes,
            mu,
            terms,
            pairs,
            intermediate_len: inter_modes.len(),
            triples,
            negation,
        })
    }

    pub fn modes(&self) -> &[Frequency] {
        &self.modes
    }

    /// Coefficients of `u0` on the mode set; modes outside it are dropped.
    pub fn initial_state(&self, u0: &TrigPolynomial) -> Vec<Complex64> {
        self.modes
            .iter()
            .map(|n| u0.coefficient(n).map(ExpPolynomial::constant_term).unwrap_or_default())
            .collect()
    }

    fn convolve3(&self, a: &[Complex64], b: &[Complex64], c: &[Complex64], out: &mut [Complex64]) {
        let mut ab = vec![Complex64::new(0.0, 0.0); self.intermediate_len];
        for &(i, j, p) in &self.pairs {
            ab[p as usize] += a[i as usize] * b[j as usize];
        }
        for &(p, k, o) in &self.triples {
            out[o as usize] += ab[p as usize] * c[k as usize];
        }
    }

    /// The nonlinearity projected onto the mode set.
    pub fn nonlinearity(&self, state: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); state.len()];
        let mut scratch = vec![Complex64::new(0.0, 0.0); state.len()];
        for term in &self.terms {
            let factors: Vec<Vec<Complex64>> = term
                .symbols
                .iter()
                .map(|sym| sym.iter().zip(state).map(|(s, c)| s * c).collect())
                .collect();
            scratch.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            if factors.len() == 1 {
                scratch.copy_from_slice(&factors[0]);
            } else {
                self.convolve3(&factors[0], &factors[1], &factors[2], &mut scratch);
            }
            for (o, s) in out.iter_mut().zip(&scratch) {
                *o += s * term.coefficient;
            }
        }
        out
    }

    /// Runs `steps` exponential-Euler steps of size `t_end / steps`.
    pub fn run(&self, mut state: Vec<Complex64>, t_end: f64, steps: usize) -> Result<Vec<Complex64>, OracleError> {
        if steps == 0 || t_end.is_nan() || t_end < 0.0 || !t_end.is_finite() {
            return Err(OracleError::InvalidStep(format!("t_end = {t_end}, steps = {steps}")));
        }
        if t_end == 0.0 {
            return Ok(state);
        }
        let h = t_end / steps as f64;
        let decay: Vec<f64> = self.mu.iter().map(|m| (-m * h).exp()).collect();
        let phi: Vec<f64> = self
            .mu
            .iter()
            .map(|&m| if m == 0.0 { h } else { -(-m * h).exp_m1() / m })
            .collect();
        let has_nonlinearity = !self.terms.is_empty();
        for step in 0..steps {
            if has_nonlinearity {
                let f = self.nonlinearity(&state);
                for k in 0..state.len() {
                    state[k] = decay[k] * state[k] + phi[k] * f[k];
                }
            } else {
                for k in 0..state.len() {
                    state[k] *= decay[k];
                }
            }
            let peak = state.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if peak.is_nan() || peak > BLOW_UP_THRESHOLD {
                return Err(OracleError::BlowUp { time: (step + 1) as f64 * h, magnitude: peak });
            }
        }
        Ok(state)
    }

    /// `max_n |c_n - conj(c_{-n})|`.
    pub fn hermitian_defect(&self, state: &[Complex64]) -> f64 {
        state
            .iter()
            .zip(&self.negation)
            .map(|(c, &m)| (c - state[m as usize].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Static field from a state, symmetrized from the nonnegative half.
    pub fn to_field(&self, state: &[Complex64]) -> TrigPolynomial {
        TrigPolynomial::from_half_modes(
            self.dim,
            self.scale.clone(),
            self.modes.iter().zip(state).filter(|(n, _)| n.is_nonnegative()).map(|(n, c)| {
                let c = if n.is_zero() { Complex64::new(c.re, 0.0) } else { *c };
                (n.clone(), ExpPolynomial::constant(c))
            }),
        )
    }
}

fn sup_difference(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Exponential Euler with steps of at most `dt`; the step count is rounded
/// up so the run ends exactly at `t_end`.
pub fn integrate(
    u0: &TrigPolynomial,
    eq: &EquationSpec,
    t_end: f64,
    dt: f64,
    truncation: usize,
) -> Result<TrigPolynomial, OracleError> {
    if dt.is_nan() || dt <= 0.0 {
        return Err(OracleError::InvalidStep(format!("dt = {dt}")));
    }
    let sys = GalerkinSystem::new(u0, eq, truncation)?;
    let steps = ((t_end / dt).ceil() as usize).max(1);
    let state = sys.run(sys.initial_state(u0), t_end, steps)?;
    Ok(sys.to_field(&state))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtrapolationOptions {
    pub initial_steps: usize,
    pub max_levels: usize,
    pub tolerance: f64,
}

impl Default for ExtrapolationOptions {
    fn default() -> Self {
        ExtrapolationOptions { initial_steps: 32, max_levels: 14, tolerance: 1e-8 }
    }
}

#[derive(Clone, Debug)]
pub struct ExtrapolatedSolution {
    pub field: TrigPolynomial,
    /// Coefficient-sup change between the last two tableau diagonals.
    pub dt_error_estimate: f64,
    pub levels: usize,
    pub finest_steps: usize,
    pub converged: bool,
}

/// Romberg extrapolation of exponential Euler over step halvings, stopping
/// once successive diagonal entries agree to `tolerance`.
pub fn integrate_extrapolated(
    u0: &TrigPolynomial,
    eq: &EquationSpec,
    t_end: f64,
    truncation: usize,
    opts: ExtrapolationOptions,
) -> Result<ExtrapolatedSolution, OracleError> {
    let sys = GalerkinSystem::new(u0, eq, truncation)?;
    let init = sys.initial_state(u0);
    let mut tableau: Vec<Vec<Vec<Complex64>>> = Vec::new();
    let mut estimate = f64::INFINITY;
    let mut steps = opts.initial_steps.max(1);
    for level in 0..opts.max_levels.max(2) {
        let mut row = vec![sys.run(init.clone(), t_end, steps)?];
        for m in 1..=level {
            let factor = ((1u64 << m) - 1) as f64;
            let prev = &tableau[level - 1][m - 1];
            let cur = &row[m - 1];
            let next = cur.iter().zip(prev).map(|(c, p)| c + (c - p) / factor).collect();
            row.push(next);
        }
        if level > 0 {
            estimate = sup_difference(&row[level], &tableau[level - 1][level - 1]);
        }
        tableau.push(row);
        if level > 0 && estimate < opts.tolerance {
            let best = &tableau[level][level];
            return Ok(ExtrapolatedSolution {
                field: sys.to_field(best),
                dt_error_estimate: estimate,
                levels: level + 1,
                finest_steps: steps,
                converged: true,
            });
        }
        steps *= 2;
    }
    let last = tableau.len() - 1;
    Ok(ExtrapolatedSolution {
        field: sys.to_field(&tableau[last][last]),
        dt_error_estimate: estimate,
        levels: tableau.len(),
        finest_steps: steps / 2,
        converged: false,
    })
}

/// Series against oracle at one time.
#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub equation: String,
    pub t: f64,
    pub generations: usize,
    pub truncation: usize,
    pub c0: f64,
    pub u0_sup_bound: f64,
    pub radius_ratio: f64,
    /// Coefficient-sup deviation of the partial sum of order `J` from the oracle.
    pub deviation: f64,
    /// Deviation for every partial-sum order `0..=J`.
    pub deviations: Vec<f64>,
    /// Largest ratio of consecutive deviations above the noise floor.
    pub geometric_ratio: Option<f64>,
    pub tail_bound: f64,
    pub dt_error_estimate: f64,
    pub oracle_levels: usize,
    pub oracle_steps: usize,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ComparisonOptions {
    pub series: SeriesOptions,
    pub truncation: Option<usize>,
    pub extrapolation: ExtrapolationOptions,
}

/// Compares partial sums of orders `0..=J` against the oracle at time `t`.
/// Refuses to run outside the convergence radius.
pub fn compare_with_series(
    u0: &TrigPolynomial,
    eq: &EquationSpec,
    t: f64,
    big_j: usize,
    opts: ComparisonOptions,
) -> Result<ComparisonReport, OracleError> {
    let u0_sup = u0.l1_norm().map_err(|_| OracleError::NonStaticData)?;
    let scaling = eq.time_scaling();
    let ratio = picard::majorant_ratio(t, u0_sup, opts.series.c0, scaling);
    if ratio >= 1.0 {
        return Err(OracleError::OutsideRadius { ratio });
    }
    let truncation = opts.truncation.unwrap_or_else(|| default_truncation(big_j));
    let oracle = integrate_extrapolated(u0, eq, t, truncation, opts.extrapolation)?;
    let gens = picard::xi_generations(big_j, u0, eq, opts.series.generation_cap)?;

    let mut partial = TrigPolynomial::zero(u0.dim(), u0.scale().clone());
    let mut deviations = Vec::with_capacity(big_j + 1);
    for g in &gens {
        partial = partial.add(&g.evaluate_at(t))?;
        deviations.push(partial.max_abs_difference(&oracle.field)?);
    }
    let floor = 100.0 * oracle.dt_error_estimate.max(1e-15);
    let geometric_ratio = deviations
        .windows(2)
        .filter(|w| w[1] > floor)
        .map(|w| w[1] / w[0])
        .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))));
    let deviation = *deviations.last().expect("at least one generation");
    // Cancellation when evaluating exponential polynomials costs at most a
    // few ulps of the summed term magnitudes.
    let rounding: f64 = gens
        .iter()
        .map(|g| 4.0 * f64::EPSILON * g.max_abs_coeff() * g.term_count() as f64)
        .sum();
    let tail = picard::tail_bound(big_j, t, u0_sup, opts.series.c0, scaling);
    Ok(ComparisonReport {
        equation: eq.id.name().to_string(),
        t,
        generations: big_j,
        truncation,
        c0: opts.series.c0,
        u0_sup_bound: u0_sup,
        radius_ratio: ratio,
        deviation,
        deviations,
        geometric_ratio,
        tail_bound: tail,
        dt_error_estimate: oracle.dt_error_estimate,
        oracle_levels: oracle.levels,
        oracle_steps: oracle.finest_steps,
        pass: deviation <= tail + 10.0 * oracle.dt_error_estimate + rounding,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::LinearMultiplier;
    use crate::picard::EquationId;

    fn cos(n: i64, a: f64) -> TrigPolynomial {
        TrigPolynomial::cosine(1, Rate::ONE, &[n], a)
    }

    #[test]
    fn mode_set_is_symmetric_lattice() {
        let u0 = cos(3, 1.0).add(&cos(6, 1.0)).unwrap();
        let sys = GalerkinSystem::new(&u0, &EquationId::Nlh.spec(1), 4).unwrap();
        let comps: Vec<i64> = sys.modes().iter().map(|n| n.components()[0]).collect();
        let want: Vec<i64> = (-8..=8).map(|m| 3 * m).collect();
        assert_eq!(comps, want);
    }

    #[test]
    fn zero_data_stays_zero() {
        let u0 = TrigPolynomial::zero_standard(1);
        let out = integrate(&u0, &EquationId::Nlh.spec(1), 1.0, 0.01, 4).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn small_data_is_nearly_linear() {
        let u0 = cos(1, 0.01);
        let out = integrate(&u0, &EquationId::Nlh.spec(1), 0.1, 1e-3, 6).unwrap();
        let lin = u0.apply_semigroup(LinearMultiplier::Heat).evaluate_at(0.1);
        let dev = out.max_abs_difference(&lin).unwrap();
        assert!(dev < 1e-6 && dev > 1e-9, "{dev}");
    }

    #[test]
    fn linear_flow_is_exact() {
        let mut eq = EquationId::Nlh.spec(1);
        eq.terms.clear();
        let u0 = cos(2, 0.4).add(&cos(5, 1.3)).unwrap();
        let out = integrate(&u0, &eq, 0.3, 0.01, 3).unwrap();
        let lin = u0.apply_semigroup(LinearMultiplier::Heat).evaluate_at(0.3);
        assert!(out.max_abs_difference(&lin).unwrap() < 1e-15);
    }

    #[test]
    fn first_order_convergence() {
        let u0 = cos(1, 0.8);
        let eq = EquationId::Nlh.spec(1);
        let sys = GalerkinSystem::new(&u0, &eq, 8).unwrap();
        let run = |n| sys.run(sys.initial_state(&u0), 0.5, n).unwrap();
        let (a, b, c) = (run(100), run(200), run(400));
        let d1 = sup_difference(&a, &b);
        let d2 = sup_difference(&b, &c);
        assert!((d1 / d2 - 2.0).abs() < 0.1, "{d1} {d2}");
    }

    #[test]
    fn blow_up_is_caught() {
        let u0 = cos(1, 50.0);
        let err = integrate(&u0, &EquationId::NlhFocusing.spec(1), 1.0, 1e-3, 4).unwrap_err();
        assert!(matches!(err, OracleError::BlowUp { .. }), "{err}");
    }

    #[test]
    fn refuses_outside_radius() {
        let u0 = cos(1, 1.0);
        let err = compare_with_series(&u0, &EquationId::Nlh.spec(1), 1.0, 2, Default::default())
            .unwrap_err();
        assert!(matches!(err, OracleError::OutsideRadius { .. }));
    }

    #[test]
    fn time_zero_has_no_deviation() {
        let u0 = cos(2, 0.3).add(&cos(4, 0.3)).unwrap();
        let r = compare_with_series(&u0, &EquationId::Nlh.spec(1), 0.0, 2, Default::default()).unwrap();
        assert!(r.deviation < 1e-16, "{r:?}");
        assert!(r.pass, "{r:?}");
    }
}
