//! Dyadic blocks and Besov norms of static trigonometric polynomials.
//!
//! Blocks use sharp cutoffs: block 0 holds `|ξ| ≤ 1`, block `j ≥ 1` holds
//! `2^{j-1} < |ξ| ≤ 2^j`. `L^p` norms are taken with respect to the
//! normalized measure on the torus, so constants have norm `|c|` for every p.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::field::{FieldError, Frequency, TrigPolynomial};
use crate::rate::Rate;

/// Default oversampling: grid points per unit of the highest harmonic.
pub const DEFAULT_POINTS_PER_HARMONIC: usize = 8;
/// Default ceiling on the total number of grid points.
pub const DEFAULT_MAX_GRID_POINTS: usize = 1 << 24;

const CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NormError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("norms are defined for time-independent fields only")]
    NotStatic,
    #[error("sampling grid needs {points} points, above the limit {limit}")]
    GridTooLarge { points: u128, limit: usize },
    #[error("invalid exponent `{0}`: must be a number ≥ 1 or `inf`")]
    InvalidExponent(String),
}

/// An exponent in `[1, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn finite(p: f64) -> Result<Self, NormError> {
        if p.is_finite() && p >= 1.0 {
            Ok(Exponent::Finite(p))
        } else if p == f64::INFINITY {
            Ok(Exponent::Infinity)
        } else {
            Err(NormError::InvalidExponent(p.to_string()))
        }
    }

    /// ℓ^q combination of nonnegative entries.
    fn combine(&self, values: impl Iterator<Item = f64>) -> f64 {
        match self {
            Exponent::Infinity => values.fold(0.0, f64::max),
            Exponent::Finite(q) => values.map(|v| v.powf(*q)).sum::<f64>().powf(1.0 / q),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = NormError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
            t => t
                .parse::<f64>()
                .map_err(|_| NormError::InvalidExponent(s.to_string()))
                .and_then(Exponent::finite),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesovParams {
    pub s: f64,
    pub p: Exponent,
    pub q: Exponent,
}

impl BesovParams {
    /// The Hölder–Besov space `C^s = B^s_{∞,∞}`.
    pub fn holder(s: f64) -> Self {
        BesovParams { s, p: Exponent::Infinity, q: Exponent::Infinity }
    }
}

/// A computed norm with a rigorous bound on `|value - exact|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub error_bound: f64,
}

impl NormEstimate {
    fn exact(value: f64) -> Self {
        NormEstimate { value, error_bound: 0.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridOptions {
    pub points_per_harmonic: usize,
    pub max_points: usize,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            points_per_harmonic: DEFAULT_POINTS_PER_HARMONIC,
            max_points: DEFAULT_MAX_GRID_POINTS,
        }
    }
}

/// Dyadic block containing a frequency with squared modulus `xi_sq`.
pub fn block_index(xi_sq: &Rate) -> usize {
    if *xi_sq <= Rate::ONE {
        return 0;
    }
    // Start just below the floating-point estimate, then settle exactly.
    let guess = (xi_sq.to_f64().log2() / 2.0).ceil();
    let mut j = if guess.is_finite() && guess > 2.0 { guess as usize - 2 } else { 1 };
    let four_pow = |j: usize| Rate::from_bigint(BigInt::from(1) << (2 * j));
    while j > 1 && *xi_sq <= four_pow(j - 1) {
        j -= 1;
    }
    while *xi_sq > four_pow(j) {
        j += 1;
    }
    j
}

/// Sharp projector onto block `j`.
pub fn lp_block(j: usize, f: &TrigPolynomial) -> TrigPolynomial {
    f.filter_modes(|n| block_index(&f.xi_squared(n)) == j)
}

/// All nonempty blocks, keyed by index.
pub fn blocks(f: &TrigPolynomial) -> BTreeMap<usize, TrigPolynomial> {
    let mut index: BTreeMap<usize, Vec<Frequency>> = BTreeMap::new();
    for (n, _) in f.modes() {
        index.entry(block_index(&f.xi_squared(n))).or_default().push(n.clone());
    }
    index
        .into_iter()
        .map(|(j, ns)| {
            let keep: std::collections::BTreeSet<Frequency> = ns.into_iter().collect();
            (j, f.filter_modes(|n| keep.contains(n)))
        })
        .collect()
}

fn require_static(f: &TrigPolynomial) -> Result<(), NormError> {
    if f.is_static() {
        Ok(())
    } else {
        Err(NormError::NotStatic)
    }
}

/// Closed-form sup norm when the support is `{0}` or a single `±n` pair.
fn exact_sup(f: &TrigPolynomial) -> Option<f64> {
    let modes: Vec<_> = f.modes().collect();
    match modes.as_slice() {
        [] => Some(0.0),
        [(n, c)] if n.is_zero() => Some(c.constant_term().norm()),
        [(_, a), (_, _)] if !modes[0].0.is_zero() && !modes[1].0.is_zero() => {
            Some(2.0 * a.constant_term().norm())
        }
        _ => None,
    }
}

/// Flattened static field ready for repeated evaluation.
struct Sampler {
    /// Per mode: physical frequency vector and coefficient.
    modes: Vec<(Vec<f64>, Complex64)>,
    /// Active axes with their grid sizes and periods.
    axes: Vec<(usize, usize, f64)>,
    dim: usize,
    total: usize,
    /// Half-diagonal of a grid cell, in physical units.
    half_diag: f64,
    gradient_bound: f64,
}

impl Sampler {
    fn new(f: &TrigPolynomial, opts: GridOptions) -> Result<Self, NormError> {
        let dim = f.dim();
        let scale = f.scale().to_f64();
        let mut gcds = vec![0u64; dim];
        let mut highs = vec![0u64; dim];
        for (n, _) in f.modes() {
            for (k, &c) in n.components().iter().enumerate() {
                let a = c.unsigned_abs();
                gcds[k] = num_integer::gcd(gcds[k], a);
                highs[k] = highs[k].max(a);
            }
        }
        let mut axes = Vec::new();
        let mut total: u128 = 1;
        let mut cell = 0.0f64;
        for k in 0..dim {
            if highs[k] == 0 {
                continue;
            }
            // Every harmonic on this axis is a multiple of gcds[k], so one
            // reduced period suffices.
            let reduced_high = (highs[k] / gcds[k]) as u128;
            let points = (opts.points_per_harmonic.max(1) as u128 * reduced_high).max(8);
            total = total.saturating_mul(points);
            let period = 2.0 * std::f64::consts::PI / (scale * gcds[k] as f64);
            let h = period / points as f64;
            cell += h * h;
            axes.push((k, points as usize, period));
        }
        if total > opts.max_points as u128 {
            return Err(NormError::GridTooLarge { points: total, limit: opts.max_points });
        }
        let modes = f
            .modes()
            .map(|(n, p)| {
                let xi = n.components().iter().map(|&c| c as f64 * scale).collect();
                (xi, p.constant_term())
            })
            .collect::<Vec<(Vec<f64>, Complex64)>>();
        let gradient_bound = modes
            .iter()
            .map(|(xi, c)| xi.iter().map(|v| v * v).sum::<f64>().sqrt() * c.norm())
            .sum();
        Ok(Sampler {
            modes,
            axes,
            dim,
            total: total as usize,
            half_diag: cell.sqrt() / 2.0,
            gradient_bound,
        })
    }

    fn point(&self, mut idx: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        for &(k, points, period) in &self.axes {
            x[k] = (idx % points) as f64 * period / points as f64;
            idx /= points;
        }
        x
    }

    fn value(&self, idx: usize) -> f64 {
        let x = self.point(idx);
        let mut re = 0.0;
        for (xi, c) in &self.modes {
            let phase: f64 = xi.iter().zip(&x).map(|(a, b)| a * b).sum();
            re += c.re * phase.cos() - c.im * phase.sin();
        }
        re
    }

    /// Applies `f` to every sample and sums the results in a fixed order.
    fn chunked_sum(&self, f: impl Fn(f64) -> f64 + Sync) -> f64 {
        let chunks = self.total.div_ceil(CHUNK);
        let partial: Vec<f64> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let end = ((c + 1) * CHUNK).min(self.total);
                (c * CHUNK..end).map(|i| f(self.value(i))).sum()
            })
            .collect();
        partial.iter().sum()
    }

    fn max_abs(&self) -> f64 {
        (0..self.total)
            .into_par_iter()
            .map(|i| self.value(i).abs())
            .reduce(|| 0.0, f64::max)
    }

    /// Bound on `|f(x) - f(x_grid)|` for `x` in the cell of `x_grid`.
    fn cell_variation(&self) -> f64 {
        self.gradient_bound * self.half_diag
    }
}

/// `‖f‖_{L^∞}` with an error bound; exact for a constant or a single pair.
pub fn linf_norm(f: &TrigPolynomial) -> Result<NormEstimate, NormError> {
    linf_norm_with(f, GridOptions::default())
}

pub fn linf_norm_with(f: &TrigPolynomial, opts: GridOptions) -> Result<NormEstimate, NormError> {
    require_static(f)?;
    if let Some(v) = exact_sup(f) {
        return Ok(NormEstimate::exact(v));
    }
    let s = Sampler::new(f, opts)?;
    Ok(NormEstimate { value: s.max_abs(), error_bound: s.cell_variation() })
}

/// `‖f‖_{L^p}` under the normalized measure.
pub fn lp_norm(f: &TrigPolynomial, p: Exponent) -> Result<NormEstimate, NormError> {
    lp_norm_with(f, p, GridOptions::default())
}

pub fn lp_norm_with(
    f: &TrigPolynomial,
    p: Exponent,
    opts: GridOptions,
) -> Result<NormEstimate, NormError> {
    let p = match p {
        Exponent::Infinity => return linf_norm_with(f, opts),
        Exponent::Finite(p) => p,
    };
    require_static(f)?;
    if f.is_empty() {
        return Ok(NormEstimate::exact(0.0));
    }
    if p == 2.0 {
        let parseval: f64 = f.modes().map(|(_, c)| c.constant_term().norm_sqr()).sum();
        return Ok(NormEstimate::exact(parseval.sqrt()));
    }
    if f.support_len() == 1 {
        // Only the zero mode survives for a real field with one mode.
        return Ok(NormEstimate::exact(f.modes().next().unwrap().1.constant_term().norm()));
    }
    let s = Sampler::new(f, opts)?;
    let mean = s.chunked_sum(|v| v.abs().powf(p)) / s.total as f64;
    Ok(NormEstimate { value: mean.powf(1.0 / p), error_bound: s.cell_variation() })
}

/// `‖(2^{js} ‖P_j f‖_{L^p})_j‖_{ℓ^q}` over the nonempty blocks.
pub fn besov_norm(f: &TrigPolynomial, params: BesovParams) -> Result<NormEstimate, NormError> {
    besov_norm_with(f, params, GridOptions::default())
}

pub fn besov_norm_with(
    f: &TrigPolynomial,
    params: BesovParams,
    opts: GridOptions,
) -> Result<NormEstimate, NormError> {
    require_static(f)?;
    let mut values = Vec::new();
    let mut errors = Vec::new();
    for (j, block) in blocks(f) {
        let est = lp_norm_with(&block, params.p, opts)?;
        let w = (j as f64 * params.s).exp2();
        values.push(w * est.value);
        errors.push(w * est.error_bound);
    }
    // ℓ^q is 1-Lipschitz for its own norm, so block errors combine the same way.
    Ok(NormEstimate {
        value: params.q.combine(values.into_iter()),
        error_bound: params.q.combine(errors.into_iter()),
    })
}
