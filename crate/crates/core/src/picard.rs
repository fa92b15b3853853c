//! Tree-indexed Picard power series.
//!
//! For `∂_t u + μ(D) u = F(u)` with `F` a sum of monomials of degree one or
//! three, the solution is expanded as `u = Σ_j Ξ_j(u₀)` where `Ξ_j` sums
//! `Ψ(T)` over trees `T` with `j` internal nodes. `Ψ` replaces a leaf by the
//! linear solution `e^{-tμ(D)} u₀` and an internal node by the Duhamel
//! integral of the matching monomial applied to its children.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::field::{FieldError, FieldOperator, LinearMultiplier, TrigPolynomial};
use crate::rate::Rate;
use crate::trees::{self, AritySet, Tree, TreeError, DEFAULT_ENUMERATION_CAP};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PicardError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("generation {generation} exceeds the generation cap {cap}")]
    CapExceeded { generation: usize, cap: usize },
    #[error("tree node with {0} children has no matching nonlinear term")]
    ArityMismatch(usize),
    #[error("initial data must be time independent")]
    NonStaticData,
    #[error("product of {left} and {right} terms exceeds the budget of {budget} term pairs")]
    TermBudget { left: usize, right: usize, budget: usize },
}

/// Largest number of term pairs a single field product may expand into.
pub const TERM_PAIR_BUDGET: usize = 4_000_000;

fn budgeted_multiply(a: &TrigPolynomial, b: &TrigPolynomial) -> Result<TrigPolynomial, PicardError> {
    let (left, right) = (a.term_count(), b.term_count());
    if left.saturating_mul(right) > TERM_PAIR_BUDGET {
        return Err(PicardError::TermBudget { left, right, budget: TERM_PAIR_BUDGET });
    }
    Ok(a.multiply(b)?)
}

/// One monomial `coefficient · Π_i op_i(u)` of the nonlinearity.
#[derive(Clone, Debug, PartialEq)]
pub struct NonlinearTerm {
    pub coefficient: Rate,
    pub factors: Vec<FieldOperator>,
}

impl NonlinearTerm {
    pub fn new(coefficient: Rate, factors: Vec<FieldOperator>) -> Self {
        assert!(
            factors.len() == 1 || factors.len() == 3,
            "only unary and cubic monomials are supported"
        );
        NonlinearTerm { coefficient, factors }
    }

    pub fn arity(&self) -> usize {
        self.factors.len()
    }
}

/// The equations the solver knows about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EquationId {
    /// `∂_t u - Δu + u³ = 0`
    #[serde(rename = "nlh")]
    Nlh,
    /// `∂_t u - Δu - u³ = 0`
    #[serde(rename = "nlh-focusing")]
    NlhFocusing,
    /// Allen–Cahn with the shifted multiplier `|ξ|² - 1` and cubic trees.
    #[serde(rename = "allen-cahn")]
    AllenCahn,
    /// Allen–Cahn with the heat multiplier and a unary `+u` term (mixed trees).
    #[serde(rename = "allen-cahn-mixed")]
    AllenCahnMixed,
    /// `∂_t u + Δ²u - u²Δu = 0`
    #[serde(rename = "ch-var1")]
    ChVariant1,
    /// `∂_t u + Δ²u - u(∂u)(∂u) = 0`, summed over axes.
    #[serde(rename = "ch-var2")]
    ChVariant2,
}

impl EquationId {
    pub const ALL: [EquationId; 6] = [
        EquationId::Nlh,
        EquationId::NlhFocusing,
        EquationId::AllenCahn,
        EquationId::AllenCahnMixed,
        EquationId::ChVariant1,
        EquationId::ChVariant2,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            EquationId::Nlh => "nlh",
            EquationId::NlhFocusing => "nlh-focusing",
            EquationId::AllenCahn => "allen-cahn",
            EquationId::AllenCahnMixed => "allen-cahn-mixed",
            EquationId::ChVariant1 => "ch-var1",
            EquationId::ChVariant2 => "ch-var2",
        }
    }

    /// The equation in `dim` space dimensions.
    pub fn spec(&self, dim: usize) -> EquationSpec {
        use FieldOperator::*;
        let cubic = |c: i128| NonlinearTerm::new(Rate::integer(c), vec![Identity; 3]);
        let (multiplier, terms) = match self {
            EquationId::Nlh => (LinearMultiplier::Heat, vec![cubic(-1)]),
            EquationId::NlhFocusing => (LinearMultiplier::Heat, vec![cubic(1)]),
            EquationId::AllenCahn => (LinearMultiplier::ShiftedHeat, vec![cubic(-1)]),
            EquationId::AllenCahnMixed => (
                LinearMultiplier::Heat,
                vec![NonlinearTerm::new(Rate::ONE, vec![Identity]), cubic(-1)],
            ),
            EquationId::ChVariant1 => (
                LinearMultiplier::Bilaplacian,
                vec![NonlinearTerm::new(Rate::ONE, vec![Identity, Identity, Laplacian])],
            ),
            EquationId::ChVariant2 => (
                LinearMultiplier::Bilaplacian,
                (0..dim)
                    .map(|k| NonlinearTerm::new(Rate::ONE, vec![Identity, Partial(k), Partial(k)]))
                    .collect(),
            ),
        };
        EquationSpec { id: *self, multiplier, terms }
    }
}

impl fmt::Display for EquationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EquationId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EquationId::ALL
            .iter()
            .find(|e| e.name() == s)
            .copied()
            .ok_or_else(|| format!("unknown equation `{s}`"))
    }
}

/// `∂_t u + μ(D) u = Σ_terms c · Π op_i(u)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EquationSpec {
    pub id: EquationId,
    pub multiplier: LinearMultiplier,
    pub terms: Vec<NonlinearTerm>,
}

impl EquationSpec {
    pub fn arity_set(&self) -> AritySet {
        if self.terms.iter().any(|t| t.arity() == 1) {
            AritySet::UnaryTernary
        } else {
            AritySet::Ternary
        }
    }

    pub fn time_scaling(&self) -> TimeScaling {
        if self.multiplier.order() == 4 {
            TimeScaling::Sqrt
        } else {
            TimeScaling::Linear
        }
    }

    /// The nonlinearity of the given arity applied to `args`, with operators
    /// acting factor by factor.
    fn nonlinearity(&self, args: &[&TrigPolynomial]) -> Result<TrigPolynomial, PicardError> {
        let first = args[0];
        let mut total = TrigPolynomial::zero(first.dim(), first.scale().clone());
        let mut matched = false;
        for term in self.terms.iter().filter(|t| t.arity() == args.len()) {
            matched = true;
            let mut prod = args[0].apply_operator(term.factors[0])?;
            for (arg, op) in args.iter().zip(&term.factors).skip(1) {
                prod = budgeted_multiply(&prod, &arg.apply_operator(*op)?)?;
            }
            total = total.add(&prod.scale_by(term.coefficient.to_f64()))?;
        }
        if !matched {
            return Err(PicardError::ArityMismatch(args.len()));
        }
        Ok(total)
    }

    /// `∫_0^t e^{-(t-s)μ(D)} N[args](s) ds`.
    fn node(&self, args: &[&TrigPolynomial]) -> Result<TrigPolynomial, PicardError> {
        Ok(self.nonlinearity(args)?.duhamel(self.multiplier, 1.0))
    }

    pub fn linear_solution(&self, u0: &TrigPolynomial) -> Result<TrigPolynomial, PicardError> {
        if !u0.is_static() {
            return Err(PicardError::NonStaticData);
        }
        Ok(u0.apply_semigroup(self.multiplier))
    }
}

/// How the per-generation majorant scales with time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeScaling {
    /// `C₀^j t^j ‖u₀‖^{2j+1}` (second-order parabolic).
    Linear,
    /// `C₀^j t^{j/2} ‖u₀‖^{2j+1}` (bilaplacian with a Laplacian in the nonlinearity).
    Sqrt,
}

impl TimeScaling {
    fn time_factor(&self, t: f64) -> f64 {
        match self {
            TimeScaling::Linear => t,
            TimeScaling::Sqrt => t.sqrt(),
        }
    }
}

/// Ratio of the geometric majorant, `C₀ τ(t) ‖u₀‖²`.
pub fn majorant_ratio(t: f64, u0_sup: f64, c0: f64, scaling: TimeScaling) -> f64 {
    c0 * scaling.time_factor(t) * u0_sup * u0_sup
}

/// Per-generation majorant `C₀^j τ(t)^j ‖u₀‖^{2j+1}`.
pub fn majorant(j: usize, t: f64, u0_sup: f64, c0: f64, scaling: TimeScaling) -> f64 {
    u0_sup * majorant_ratio(t, u0_sup, c0, scaling).powi(j as i32)
}

/// Whether the majorant series converges: `C₀ τ(t) ‖u₀‖² < 1`.
pub fn radius_check(t: f64, u0_sup: f64, c0: f64, scaling: TimeScaling) -> bool {
    majorant_ratio(t, u0_sup, c0, scaling) < 1.0
}

/// `Σ_{j>J} C₀^j τ(t)^j ‖u₀‖^{2j+1}` in closed form; `+∞` outside the radius.
pub fn tail_bound(big_j: usize, t: f64, u0_sup: f64, c0: f64, scaling: TimeScaling) -> f64 {
    if t == 0.0 || u0_sup == 0.0 {
        return 0.0;
    }
    let r = majorant_ratio(t, u0_sup, c0, scaling);
    if r >= 1.0 {
        return f64::INFINITY;
    }
    u0_sup * r.powi(big_j as i32 + 1) / (1.0 - r)
}

/// Ψ(T) for a single tree.
pub fn psi(tree: &Tree, u0: &TrigPolynomial, eq: &EquationSpec) -> Result<TrigPolynomial, PicardError> {
    let linear = eq.linear_solution(u0)?;
    psi_with_leaf(tree, &linear, eq)
}

fn psi_with_leaf(
    tree: &Tree,
    linear: &TrigPolynomial,
    eq: &EquationSpec,
) -> Result<TrigPolynomial, PicardError> {
    match tree {
        Tree::Leaf => Ok(linear.clone()),
        Tree::Node(children) => {
            let vals = children
                .iter()
                .map(|c| psi_with_leaf(c, linear, eq))
                .collect::<Result<Vec<_>, _>>()?;
            let refs: Vec<&TrigPolynomial> = vals.iter().collect();
            eq.node(&refs)
        }
    }
}

/// Ξ_j computed as the sum of Ψ(T) over every tree of generation `j`, in
/// canonical tree order. Subtree values are shared across trees.
pub fn xi(j: usize, u0: &TrigPolynomial, eq: &EquationSpec) -> Result<TrigPolynomial, PicardError> {
    xi_with_cap(j, u0, eq, DEFAULT_ENUMERATION_CAP)
}

pub fn xi_with_cap(
    j: usize,
    u0: &TrigPolynomial,
    eq: &EquationSpec,
    cap: usize,
) -> Result<TrigPolynomial, PicardError> {
    if j > cap {
        return Err(PicardError::CapExceeded { generation: j, cap });
    }
    let linear = eq.linear_solution(u0)?;
    let gens = trees::enumerate_generations(j, eq.arity_set());
    let mut memo: HashMap<Tree, Arc<TrigPolynomial>> = HashMap::new();
    memo.insert(Tree::Leaf, Arc::new(linear));
    for generation in gens.iter().skip(1) {
        let computed = generation
            .par_iter()
            .map(|tree| {
                let args: Vec<&TrigPolynomial> =
                    tree.children().iter().map(|c| memo[c].as_ref()).collect();
                eq.node(&args).map(|v| (tree.clone(), Arc::new(v)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        memo.extend(computed);
    }
    let mut total = TrigPolynomial::zero(u0.dim(), u0.scale().clone());
    for tree in &gens[j] {
        total = total.add(&memo[tree])?;
    }
    Ok(total)
}

/// `Ξ_0, …, Ξ_J` from the generation recursion
/// `Ξ_g = D[Σ_unary c·op(Ξ_{g-1}) + Σ_cubic c·Σ_{a+b+c=g-1} op₁(Ξ_a) op₂(Ξ_b) op₃(Ξ_c)]`,
/// which regroups the tree sum by the generations of the root's children.
pub fn xi_generations(
    big_j: usize,
    u0: &TrigPolynomial,
    eq: &EquationSpec,
    cap: usize,
) -> Result<Vec<TrigPolynomial>, PicardError> {
    if big_j > cap {
        return Err(PicardError::CapExceeded { generation: big_j, cap });
    }
    let mut gens = vec![eq.linear_solution(u0)?];
    for _ in 1..=big_j {
        let next = next_generation(&gens, u0, eq)?;
        gens.push(next);
    }
    Ok(gens)
}

/// Like [`xi_generations`], but stops early instead of failing when a
/// product would exceed [`TERM_PAIR_BUDGET`]; the result may be shorter
/// than `big_j + 1`.
pub fn xi_generations_within_budget(
    big_j: usize,
    u0: &TrigPolynomial,
    eq: &EquationSpec,
    cap: usize,
) -> Result<Vec<TrigPolynomial>, PicardError> {
    if big_j > cap {
        return Err(PicardError::CapExceeded { generation: big_j, cap });
    }
    let mut gens = vec![eq.linear_solution(u0)?];
    for _ in 1..=big_j {
        match next_generation(&gens, u0, eq) {
            Ok(next) => gens.push(next),
            Err(PicardError::TermBudget { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(gens)
}

fn next_generation(
    gens: &[TrigPolynomial],
    u0: &TrigPolynomial,
    eq: &EquationSpec,
) -> Result<TrigPolynomial, PicardError> {
    let g = gens.len();
    let mut forcing = TrigPolynomial::zero(u0.dim(), u0.scale().clone());
    for term in &eq.terms {
        let c = term.coefficient.to_f64();
        let contribution = if term.arity() == 1 {
            gens[g - 1].apply_operator(term.factors[0])?
        } else {
            cubic_generation_sum(gens, g - 1, &term.factors)?
        };
        forcing = forcing.add(&contribution.scale_by(c))?;
    }
    Ok(forcing.duhamel(eq.multiplier, 1.0))
}

/// `Σ_{a+b+c=total} op₁(X_a) op₂(X_b) op₃(X_c)`, grouping permutations when
/// all three operators coincide.
fn cubic_generation_sum(
    gens: &[TrigPolynomial],
    total: usize,
    ops: &[FieldOperator],
) -> Result<TrigPolynomial, PicardError> {
    let applied: Vec<Vec<TrigPolynomial>> = ops
        .iter()
        .map(|op| gens.iter().map(|x| x.apply_operator(*op)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<_, _>>()?;
    let symmetric = ops.iter().all(|op| *op == ops[0]);
    let mut jobs: Vec<(usize, usize, usize, f64)> = Vec::new();
    for a in 0..=total {
        for b in 0..=total - a {
            let c = total - a - b;
            if symmetric {
                if a <= b && b <= c {
                    let mult = if a == c {
                        1.0
                    } else if a == b || b == c {
                        3.0
                    } else {
                        6.0
                    };
                    jobs.push((a, b, c, mult));
                }
            } else {
                jobs.push((a, b, c, 1.0));
            }
        }
    }
    let parts = jobs
        .par_iter()
        .map(|&(a, b, c, mult)| {
            let p = budgeted_multiply(&budgeted_multiply(&applied[0][a], &applied[1][b])?, &applied[2][c])?;
            Ok(if mult == 1.0 { p } else { p.scale_by(mult) })
        })
        .collect::<Result<Vec<_>, PicardError>>()?;
    let mut sum = TrigPolynomial::zero(gens[0].dim(), gens[0].scale().clone());
    for p in &parts {
        sum = sum.add(p)?;
    }
    Ok(sum)
}

/// Options for partial sums.
#[derive(Clone, Copy, Debug)]
pub struct SeriesOptions {
    pub c0: f64,
    pub generation_cap: usize,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions { c0: 6.75, generation_cap: DEFAULT_ENUMERATION_CAP }
    }
}

/// Size of one generation at the evaluation time.
#[derive(Clone, Debug, PartialEq)]
pub struct GenerationStats {
    pub generation: usize,
    /// `Σ_n |ĉ_n(t)|`, an upper bound for the sup norm.
    pub l1_norm: f64,
    pub mode_count: usize,
    pub term_count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesDiagnostics {
    pub per_generation: Vec<GenerationStats>,
    pub u0_sup_bound: f64,
    pub tail_bound: f64,
    pub within_radius: bool,
}

/// Partial sum `Σ_{j≤J} Ξ_j(u₀)(t)` with diagnostics.
pub fn partial_sum(
    big_j: usize,
    u0: &TrigPolynomial,
    eq: &EquationSpec,
    t: f64,
    opts: SeriesOptions,
) -> Result<(TrigPolynomial, SeriesDiagnostics), PicardError> {
    let gens = xi_generations(big_j, u0, eq, opts.generation_cap)?;
    Ok(sum_generations_at(&gens, u0, eq, t, opts))
}

/// Evaluates precomputed generations at `t` and sums them in order.
pub fn sum_generations_at(
    gens: &[TrigPolynomial],
    u0: &TrigPolynomial,
    eq: &EquationSpec,
    t: f64,
    opts: SeriesOptions,
) -> (TrigPolynomial, SeriesDiagnostics) {
    let mut total = TrigPolynomial::zero(u0.dim(), u0.scale().clone());
    let mut per_generation = Vec::with_capacity(gens.len());
    for (g, x) in gens.iter().enumerate() {
        let at = x.evaluate_at(t);
        per_generation.push(GenerationStats {
            generation: g,
            l1_norm: at.l1_norm().expect("evaluated field is static"),
            mode_count: x.support_len(),
            term_count: x.term_count(),
        });
        total = total.add(&at).expect("same lattice");
    }
    let u0_sup = u0.l1_norm().unwrap_or(f64::NAN);
    let scaling = eq.time_scaling();
    let big_j = gens.len().saturating_sub(1);
    let diag = SeriesDiagnostics {
        per_generation,
        u0_sup_bound: u0_sup,
        tail_bound: tail_bound(big_j, t, u0_sup, opts.c0, scaling),
        within_radius: radius_check(t, u0_sup, opts.c0, scaling),
    };
    (total, diag)
}

/// Real part of the zero-frequency coefficient of a static field.
pub fn zero_mode(f: &TrigPolynomial) -> f64 {
    f.coefficient(&crate::field::Frequency::zero(f.dim()))
        .map(|p| p.constant_term().re)
        .unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Frequency;

    fn data(n: i64, amp: f64) -> TrigPolynomial {
        TrigPolynomial::cosine(1, Rate::ONE, &[n], amp)
            .add(&TrigPolynomial::cosine(1, Rate::ONE, &[2 * n], amp))
            .unwrap()
    }

    #[test]
    fn leaf_is_linear_solution() {
        let u0 = data(3, 1.0);
        let eq = EquationId::Nlh.spec(1);
        assert_eq!(psi(&Tree::Leaf, &u0, &eq).unwrap(), u0.apply_semigroup(LinearMultiplier::Heat));
        assert_eq!(xi(0, &u0, &eq).unwrap(), u0.apply_semigroup(LinearMultiplier::Heat));
    }

    #[test]
    fn zero_data_gives_zero() {
        let u0 = TrigPolynomial::zero_standard(1);
        let eq = EquationId::Nlh.spec(1);
        let t = Tree::node(vec![Tree::Leaf, Tree::Leaf, Tree::Leaf]);
        assert!(psi(&t, &u0, &eq).unwrap().is_empty());
    }

    #[test]
    fn arity_mismatch_is_reported() {
        let u0 = data(1, 1.0);
        let eq = EquationId::Nlh.spec(1);
        let unary = Tree::node(vec![Tree::Leaf]);
        assert_eq!(psi(&unary, &u0, &eq), Err(PicardError::ArityMismatch(1)));
    }

    #[test]
    fn tree_sum_equals_generation_recursion() {
        let u0 = data(1, 0.7);
        for id in [EquationId::Nlh, EquationId::AllenCahnMixed, EquationId::ChVariant1] {
            let eq = id.spec(1);
            let rec = xi_generations(4, &u0, &eq, 8).unwrap();
            for (j, r) in rec.iter().enumerate() {
                let by_trees = xi(j, &u0, &eq).unwrap();
                let scale = r.max_abs_coeff().max(1e-300);
                let diff = by_trees.max_abs_difference(r).unwrap();
                assert!(diff <= 1e-12 * scale, "{id} j={j}: {diff} vs {scale}");
            }
        }
    }

    #[test]
    fn support_of_second_generation() {
        let n = 3;
        let u0 = data(n, 1.0);
        let x2 = xi(2, &u0, &EquationId::Nlh.spec(1)).unwrap();
        for (f, _) in x2.modes() {
            let c = f.components()[0];
            assert_eq!(c % n, 0);
            assert!((c / n).abs() <= 10);
        }
    }

    #[test]
    fn tail_and_radius() {
        assert_eq!(tail_bound(3, 0.0, 2.0, 6.75, TimeScaling::Linear), 0.0);
        let u = 1.7;
        let t = 0.1 / (u * u);
        let tail = tail_bound(2, t, u, 6.75, TimeScaling::Linear);
        let r: f64 = 0.675;
        assert!((tail - u * r.powi(3) / (1.0 - r)).abs() < 1e-12);
        assert!((tail / u - 0.946).abs() < 5e-4);
        assert!(!radius_check(1.0 / 6.75, 1.0, 6.75, TimeScaling::Linear));
        assert!(radius_check(0.99 / 6.75, 1.0, 6.75, TimeScaling::Linear));
        assert_eq!(tail_bound(1, 1.0, 1.0, 6.75, TimeScaling::Linear), f64::INFINITY);
        let sq = tail_bound(0, 0.01, 1.0, 2.0, TimeScaling::Sqrt);
        assert!((sq - 0.2 / 0.8).abs() < 1e-15);
    }

    #[test]
    fn partial_sum_zero_is_linear() {
        let u0 = data(2, 0.1);
        let eq = EquationId::Nlh.spec(1);
        let (s, diag) = partial_sum(0, &u0, &eq, 0.05, SeriesOptions::default()).unwrap();
        let lin = u0.apply_semigroup(LinearMultiplier::Heat).evaluate_at(0.05);
        assert!(s.max_abs_difference(&lin).unwrap() < 1e-17);
        assert_eq!(diag.per_generation.len(), 1);
        assert!(zero_mode(&s).abs() < 1e-300);
    }

    #[test]
    fn duhamel_residual_decays_with_generation() {
        // r_J = u_J - e^{tΔ}u₀ - I[u_J] should shrink geometrically in J.
        let u0 = data(1, 0.3);
        let eq = EquationId::Nlh.spec(1);
        let gens = xi_generations(4, &u0, &eq, 8).unwrap();
        let mut residuals = Vec::new();
        for big_j in 0..=3 {
            let mut u = TrigPolynomial::zero_standard(1);
            for g in &gens[..=big_j] {
                u = u.add(g).unwrap();
            }
            let cube = u.multiply(&u).unwrap().multiply(&u).unwrap();
            let duhamel = cube.scale_by(-1.0).duhamel(LinearMultiplier::Heat, 1.0);
            let r = u.sub(&gens[0]).unwrap().sub(&duhamel).unwrap().evaluate_at(0.5);
            residuals.push(r.l1_norm().unwrap());
        }
        for w in residuals.windows(2) {
            assert!(w[1] < 0.2 * w[0], "{residuals:?}");
        }
    }

    #[test]
    fn p0_of_linear_solution_vanishes() {
        let u0 = data(4, 2.0);
        let lin = EquationId::Nlh.spec(1).linear_solution(&u0).unwrap();
        assert!(lin.coefficient(&Frequency::zero(1)).is_none());
    }

    #[test]
    fn equation_names_round_trip() {
        for id in EquationId::ALL {
            assert_eq!(id.name().parse::<EquationId>().unwrap(), id);
        }
        assert!("heat".parse::<EquationId>().is_err());
    }
}
