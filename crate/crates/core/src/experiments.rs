//! Initial data, closed forms and inflation scans.
//!
//! Two data families are built here. The non-endpoint family is
//! `A (cos(n₁·x) + cos(2n₁·x))` with `A = N^{-s-ε}`, for `s` inside the
//! window `-1+δ-ε < s < -2/3-ε`. The endpoint family stacks lacunary copies
//! at frequencies `a_k N` with `a_k = 2^{2^k}`. The zero mode of the first
//! Picard generation is where the growth shows up.

use std::time::Instant;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::field::{FieldError, TrigPolynomial};
use crate::norms::{self, BesovParams, NormError};
use crate::picard::{self, EquationId, PicardError, TimeScaling};
use crate::rate::Rate;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExperimentError {
    #[error(
        "s = {s} is outside the admissible window -1+δ-ε < s < -2/3-ε \
         (here {lower} < s < {upper} for δ = {delta}, ε = {eps})"
    )]
    Window { s: f64, eps: f64, delta: f64, lower: f64, upper: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("frequency a_K·N = 2^(2^{k})·{n} does not fit in 63 bits")]
    FrequencyOverflow { k: usize, n: u64 },
    #[error("the endpoint construction has no closed form for `{0}`")]
    UnsupportedEquation(EquationId),
    #[error("fit needs at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("log-log fit needs positive values, got ({x}, {y})")]
    NonPositive { x: f64, y: f64 },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Picard(#[from] PicardError),
    #[error(transparent)]
    Norm(#[from] NormError),
}

/// `-1 + δ - ε < s < -2/3 - ε`.
pub fn check_window(s: f64, eps: f64, delta: f64) -> Result<(), ExperimentError> {
    let lower = -1.0 + delta - eps;
    let upper = -2.0 / 3.0 - eps;
    if s > lower && s < upper {
        Ok(())
    } else {
        Err(ExperimentError::Window { s, eps, delta, lower, upper })
    }
}

/// Inflation time `N^{-2+δ}`, or `N^{-4+δ}` for a fourth-order multiplier.
pub fn inflation_time(n: u64, delta: f64, scaling: TimeScaling) -> f64 {
    let order = match scaling {
        TimeScaling::Linear => 2.0,
        TimeScaling::Sqrt => 4.0,
    };
    (n as f64).powf(-order + delta)
}

/// Largest torus dimension accepted for generated data.
pub const MAX_DIM: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NonEndpointParams {
    pub n: u64,
    pub s: f64,
    pub eps: f64,
    pub delta: f64,
    pub dim: usize,
}

impl NonEndpointParams {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.n < 2 {
            return Err(ExperimentError::InvalidParameter(format!("N = {} must be ≥ 2", self.n)));
        }
        if self.dim == 0 || self.dim > MAX_DIM {
            return Err(ExperimentError::InvalidParameter(format!(
                "dimension {} is outside 1..={MAX_DIM}",
                self.dim
            )));
        }
        if !(self.eps >= 0.0 && self.delta > 0.0) {
            return Err(ExperimentError::InvalidParameter(format!(
                "need ε ≥ 0 and δ > 0, got ε = {}, δ = {}",
                self.eps, self.delta
            )));
        }
        check_window(self.s, self.eps, self.delta)
    }

    /// `N^{-s-ε}`.
    pub fn amplitude(&self) -> f64 {
        (self.n as f64).powf(-self.s - self.eps)
    }
}

fn axis_mode(dim: usize, m: u64) -> Result<Vec<i64>, ExperimentError> {
    let m = i64::try_from(m).map_err(|_| FieldError::Overflow)?;
    let mut v = vec![0; dim];
    v[0] = m;
    Ok(v)
}

/// `A cos(n₁·x) + A cos(2n₁·x)` with `n₁ = (N, 0, …, 0)`.
pub fn pair_data(dim: usize, n: u64, amplitude: f64) -> Result<TrigPolynomial, ExperimentError> {
    let two_n = n.checked_mul(2).ok_or(FieldError::Overflow)?;
    Ok(TrigPolynomial::cosine(dim, Rate::ONE, &axis_mode(dim, n)?, amplitude)
        .add(&TrigPolynomial::cosine(dim, Rate::ONE, &axis_mode(dim, two_n)?, amplitude))?)
}

pub fn make_data_nonendpoint(p: &NonEndpointParams) -> Result<TrigPolynomial, ExperimentError> {
    p.validate()?;
    pair_data(p.dim, p.n, p.amplitude())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EndpointParams {
    pub n: u64,
    pub k: usize,
    pub delta: f64,
    pub dim: usize,
}

/// `a_k = 2^{2^k}`. Panics when `2^k` overflows `usize`.
pub fn lacunary(k: usize) -> BigUint {
    BigUint::from(1u32) << (1usize << k)
}

impl EndpointParams {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.k < 2 {
            return Err(ExperimentError::InvalidParameter(format!("K = {} must be ≥ 2", self.k)));
        }
        if self.n < 1 || self.dim == 0 || self.dim > MAX_DIM || self.delta.is_nan() || self.delta <= 0.0 {
            return Err(ExperimentError::InvalidParameter(format!(
                "need N ≥ 1, d ≥ 1, δ > 0; got N = {}, d = {}, δ = {}",
                self.n, self.dim, self.delta
            )));
        }
        Ok(())
    }

    /// `a_k N` for `k = 1..=K`, as exact integers.
    pub fn frequencies(&self) -> Result<Vec<u64>, ExperimentError> {
        (1..=self.k)
            .map(|k| {
                // a_7 = 2^128 already overflows; avoid building huge integers.
                if k > 6 {
                    return Err(ExperimentError::FrequencyOverflow { k, n: self.n });
                }
                let f = lacunary(k) * BigUint::from(self.n) * BigUint::from(2u32);
                u64::try_from(&f)
                    .ok()
                    .filter(|v| *v <= i64::MAX as u64)
                    .map(|v| v / 2)
                    .ok_or(ExperimentError::FrequencyOverflow { k, n: self.n })
            })
            .collect()
    }
}

/// `(1/log K) Σ_{k=1}^{K} (a_k N)^{2/3} (cos(a_k n₁·x) + cos(2 a_k n₁·x))`.
pub fn make_data_endpoint(p: &EndpointParams) -> Result<TrigPolynomial, ExperimentError> {
    p.validate()?;
    let log_k = (p.k as f64).ln();
    let mut u0 = TrigPolynomial::zero_standard(p.dim);
    for f in p.frequencies()? {
        u0 = u0.add(&pair_data(p.dim, f, (f as f64).powf(2.0 / 3.0) / log_k)?)?;
    }
    Ok(u0)
}

/// Signed zero mode of the first generation at `t` for non-endpoint data with
/// amplitude `a` at base frequency `n`, derived by hand for each equation.
pub fn closed_form_p0_xi1(eq: EquationId, n: u64, amplitude: f64, t: f64) -> f64 {
    let nn = n as f64;
    let a3 = amplitude.powi(3);
    let n2 = nn * nn;
    match eq {
        EquationId::Nlh | EquationId::AllenCahnMixed => -a3 / (8.0 * n2) * -(-6.0 * t * n2).exp_m1(),
        EquationId::NlhFocusing => a3 / (8.0 * n2) * -(-6.0 * t * n2).exp_m1(),
        EquationId::AllenCahn => {
            let rate = 6.0 * n2 - 2.0;
            -0.75 * a3 * t.exp() * -(-rate * t).exp_m1() / rate
        }
        EquationId::ChVariant1 => -a3 / (12.0 * n2) * -(-18.0 * t * n2 * n2).exp_m1(),
        EquationId::ChVariant2 => a3 / (24.0 * n2) * -(-18.0 * t * n2 * n2).exp_m1(),
    }
}

/// `(1/(8 (log K)³)) Σ_k (1 - e^{-6t(a_k N)²})`, evaluated in floating point
/// so that any `K` is accepted.
pub fn endpoint_closed_form(n: u64, k: usize, t: f64) -> f64 {
    let log_k = (k as f64).ln();
    let sum: f64 = (1..=k)
        .map(|j| {
            let f = 2f64.powf(2f64.powi(j as i32)) * n as f64;
            -(-6.0 * t * f * f).exp_m1()
        })
        .sum();
    sum / (8.0 * log_k.powi(3))
}

/// Zero-mode contribution of the one resonant interaction between different
/// lacunary blocks: `2a₁N + 2a₁N = a₂N` (only `a₂ = 4a₁` makes this close).
pub fn endpoint_cross_term(n: u64, k: usize, t: f64) -> f64 {
    if k < 2 {
        return 0.0;
    }
    let log_k = (k as f64).ln();
    let f1 = 4.0 * n as f64;
    let f2 = 16.0 * n as f64;
    let amp1 = f1.powf(2.0 / 3.0) / log_k;
    let amp2 = f2.powf(2.0 / 3.0) / log_k;
    let rate = 2.0 * (2.0 * f1).powi(2) + f2 * f2;
    0.75 * amp1 * amp1 * amp2 * -(-rate * t).exp_m1() / rate
}

/// Which data family and closed form a scan uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Nonendpoint,
    Endpoint,
    AllenCahn,
    ChVar1,
    ChVar2,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::Nonendpoint,
        Experiment::Endpoint,
        Experiment::AllenCahn,
        Experiment::ChVar1,
        Experiment::ChVar2,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Nonendpoint => "nonendpoint",
            Experiment::Endpoint => "endpoint",
            Experiment::AllenCahn => "allen-cahn",
            Experiment::ChVar1 => "ch-var1",
            Experiment::ChVar2 => "ch-var2",
        }
    }

    pub fn default_equation(&self) -> EquationId {
        match self {
            Experiment::Nonendpoint | Experiment::Endpoint => EquationId::Nlh,
            Experiment::AllenCahn => EquationId::AllenCahn,
            Experiment::ChVar1 => EquationId::ChVariant1,
            Experiment::ChVar2 => EquationId::ChVariant2,
        }
    }

    pub fn is_endpoint(&self) -> bool {
        matches!(self, Experiment::Endpoint)
    }
}

impl std::str::FromStr for Experiment {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .iter()
            .find(|e| e.name() == s)
            .copied()
            .ok_or_else(|| format!("unknown experiment `{s}`"))
    }
}

/// One scan point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InflationRecord {
    pub equation: String,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    pub s: f64,
    pub eps: f64,
    pub delta: f64,
    pub t: f64,
    #[serde(rename = "norm_u0_Cs")]
    pub norm_u0_cs: f64,
    pub p0_xi1_closed: f64,
    pub p0_xi1_pipeline: f64,
    pub tail_bound: f64,
    pub lower_bound: f64,
    pub wall_ms: u64,
}

/// Parameters shared by every point of a scan.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanSpec {
    pub experiment: Experiment,
    pub equation: EquationId,
    pub s: f64,
    pub eps: f64,
    pub delta: f64,
    pub dim: usize,
    pub n_list: Vec<u64>,
    pub k_list: Vec<usize>,
    pub c0: f64,
    /// Generations `2..=j_max` enter the tail exactly; the majorant covers the rest.
    pub j_max: usize,
    pub generation_cap: usize,
    pub record_wall_time: bool,
}

/// A scan point that could not be evaluated.
#[derive(Clone, Debug, PartialEq)]
pub struct PointFailure {
    pub n: u64,
    pub k: Option<usize>,
    pub error: ExperimentError,
}

fn scan_points(spec: &ScanSpec) -> Vec<(u64, Option<usize>)> {
    if spec.experiment.is_endpoint() {
        spec.n_list
            .iter()
            .flat_map(|&n| spec.k_list.iter().map(move |&k| (n, Some(k))))
            .collect()
    } else {
        spec.n_list.iter().map(|&n| (n, None)).collect()
    }
}

/// Evaluates a single scan point.
pub fn inflation_point(
    spec: &ScanSpec,
    n: u64,
    k: Option<usize>,
) -> Result<InflationRecord, ExperimentError> {
    let started = Instant::now();
    let eq = spec.equation.spec(spec.dim);
    let scaling = eq.time_scaling();
    let t = inflation_time(n, spec.delta, scaling);
    let (u0, s, closed) = match k {
        Some(k) => {
            if !matches!(spec.equation, EquationId::Nlh | EquationId::NlhFocusing) {
                return Err(ExperimentError::UnsupportedEquation(spec.equation));
            }
            let p = EndpointParams { n, k, delta: spec.delta, dim: spec.dim };
            (make_data_endpoint(&p)?, -2.0 / 3.0, endpoint_closed_form(n, k, t))
        }
        None => {
            let p = NonEndpointParams { n, s: spec.s, eps: spec.eps, delta: spec.delta, dim: spec.dim };
            let u0 = make_data_nonendpoint(&p)?;
            (u0, spec.s, closed_form_p0_xi1(spec.equation, n, p.amplitude(), t).abs())
        }
    };
    let norm = norms::besov_norm(&u0, BesovParams::holder(s))?.value;
    let xi1 = picard::xi(1, &u0, &eq)?.evaluate_at(t);
    let pipeline = picard::zero_mode(&xi1).abs();
    let linear_p0 = picard::zero_mode(&eq.linear_solution(&u0)?.evaluate_at(t)).abs();
    let tail = higher_generation_tail(&u0, &eq, t, spec.j_max, spec.c0, spec.generation_cap)?;
    let wall_ms = if spec.record_wall_time { started.elapsed().as_millis() as u64 } else { 0 };
    Ok(InflationRecord {
        equation: spec.equation.name().to_string(),
        n,
        k,
        s,
        eps: if k.is_some() { 0.0 } else { spec.eps },
        delta: spec.delta,
        t,
        norm_u0_cs: norm,
        p0_xi1_closed: closed,
        p0_xi1_pipeline: pipeline,
        tail_bound: tail,
        lower_bound: pipeline - linear_p0 - tail,
        wall_ms,
    })
}

/// Bound on `|Σ_{j≥2} P₀Ξ_j(t)|`: the exact zero modes of generations
/// `2..=J` plus the geometric majorant beyond `J`, where `J` is `j_max` or
/// the last generation that fits the term budget, whichever is smaller.
pub fn higher_generation_tail(
    u0: &TrigPolynomial,
    eq: &crate::picard::EquationSpec,
    t: f64,
    j_max: usize,
    c0: f64,
    generation_cap: usize,
) -> Result<f64, ExperimentError> {
    let gens = picard::xi_generations_within_budget(j_max, u0, eq, generation_cap)?;
    let exact: f64 = gens
        .iter()
        .skip(2)
        .map(|x| picard::zero_mode(&x.evaluate_at(t)).abs())
        .sum();
    let last = (gens.len() - 1).max(1);
    Ok(exact + picard::tail_bound(last, t, u0.l1_norm()?, c0, eq.time_scaling()))
}

/// Runs every point of the scan concurrently; `sink` sees the outcomes in
/// parameter order. Failed points are reported and the scan continues.
pub fn run_inflation_scan(
    spec: &ScanSpec,
    mut sink: impl FnMut(&Result<InflationRecord, PointFailure>),
) -> Vec<Result<InflationRecord, PointFailure>> {
    let outcomes: Vec<_> = scan_points(spec)
        .into_par_iter()
        .map(|(n, k)| inflation_point(spec, n, k).map_err(|error| PointFailure { n, k, error }))
        .collect();
    outcomes.iter().for_each(&mut sink);
    outcomes
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    /// `None` when there are too few points to estimate it.
    pub stderr: Option<f64>,
}

/// Least squares fit of `log y = slope · log x + intercept`.
pub fn fit_scaling(points: &[(f64, f64)]) -> Result<ScalingFit, ExperimentError> {
    if points.len() < 2 {
        return Err(ExperimentError::TooFewPoints(points.len()));
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(ExperimentError::NonPositive { x, y });
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(ExperimentError::InvalidParameter("all x values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = (logs.len() > 2).then(|| {
        let rss: f64 = logs.iter().map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        (rss / (m - 2.0) / sxx).sqrt()
    });
    Ok(ScalingFit { slope, intercept, stderr })
}

/// One row of the higher-order table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HigherOrderRow {
    pub generation: usize,
    /// `Σ_n |ĉ_n|` of `Ξ_j(t)`.
    pub measured: f64,
    /// `C₀^j τ(t)^j ‖u₀‖^{2j+1}`.
    pub majorant: f64,
    /// `(measured / (τ^j ‖u₀‖^{2j+1}))^{1/j}`: the smallest constant that works at this j.
    pub effective_c0: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HigherOrderReport {
    pub equation: String,
    pub n: u64,
    pub t: f64,
    pub c0: f64,
    pub u0_sup: f64,
    pub rows: Vec<HigherOrderRow>,
}

impl HigherOrderReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    /// Largest per-generation constant over `j ≥ 1`.
    pub fn empirical_c0(&self) -> f64 {
        self.rows.iter().skip(1).map(|r| r.effective_c0).fold(0.0, f64::max)
    }
}

/// Measured size of each generation against the geometric majorant, for the
/// non-endpoint data at its inflation time.
pub fn higher_order_report(
    eq: EquationId,
    p: &NonEndpointParams,
    j_max: usize,
    c0: f64,
    generation_cap: usize,
) -> Result<HigherOrderReport, ExperimentError> {
    let spec = eq.spec(p.dim);
    let scaling = spec.time_scaling();
    let u0 = make_data_nonendpoint(p)?;
    let t = inflation_time(p.n, p.delta, scaling);
    let u0_sup = norms::linf_norm(&u0)?.value;
    let tau = match scaling {
        TimeScaling::Linear => t,
        TimeScaling::Sqrt => t.sqrt(),
    };
    let gens = picard::xi_generations(j_max, &u0, &spec, generation_cap)?;
    let rows = gens
        .iter()
        .enumerate()
        .map(|(j, x)| {
            let measured = x.evaluate_at(t).l1_norm()?;
            let base = tau.powi(j as i32) * u0_sup.powi(2 * j as i32 + 1);
            let majorant = picard::majorant(j, t, u0_sup, c0, scaling);
            let effective_c0 =
                if j == 0 { measured / u0_sup } else { (measured / base).powf(1.0 / j as f64) };
            Ok(HigherOrderRow { generation: j, measured, majorant, effective_c0, pass: measured <= majorant })
        })
        .collect::<Result<Vec<_>, FieldError>>()?;
    Ok(HigherOrderReport { equation: eq.name().to_string(), n: p.n, t, c0, u0_sup, rows })
}
