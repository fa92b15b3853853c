//! Ordered rooted trees indexing the terms of the Picard power series.
//!
//! Every internal node has exactly three children (ternary trees) or, for the
//! mixed family, either one or three children. Children are ordered: trees
//! differing only in the order of their subtrees are distinct.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Default largest generation [`enumerate`] will materialise.
pub const DEFAULT_ENUMERATION_CAP: usize = 8;

/// Allowed child counts of internal nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AritySet {
    /// `{3}`
    Ternary,
    /// `{1, 3}`
    UnaryTernary,
}

impl AritySet {
    pub fn allows(&self, children: usize) -> bool {
        match self {
            AritySet::Ternary => children == 3,
            AritySet::UnaryTernary => children == 1 || children == 3,
        }
    }

    /// Growth constant used for `count(j) ≤ C₀^j` certificates, as `(num, den)`.
    pub fn certificate_constant(&self) -> (u32, u32) {
        match self {
            AritySet::Ternary => (27, 4),
            AritySet::UnaryTernary => (8, 1),
        }
    }
}

impl FromStr for AritySet {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "3" => Ok(AritySet::Ternary),
            "13" | "1,3" => Ok(AritySet::UnaryTernary),
            other => Err(format!("unknown arity set `{other}` (expected 3 or 13)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("generation {generation} exceeds the enumeration cap {cap}; use count instead")]
    CapExceeded { generation: usize, cap: usize },
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tree {
    Leaf,
    Node(Arc<Vec<Tree>>),
}

impl Tree {
    pub fn node(children: Vec<Tree>) -> Tree {
        assert!(!children.is_empty(), "internal node without children");
        Tree::Node(Arc::new(children))
    }

    pub fn children(&self) -> &[Tree] {
        match self {
            Tree::Leaf => &[],
            Tree::Node(c) => c,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Tree::Leaf)
    }

    /// Number of internal nodes (the generation `j`).
    pub fn internal_nodes(&self) -> usize {
        match self {
            Tree::Leaf => 0,
            Tree::Node(c) => 1 + c.iter().map(Tree::internal_nodes).sum::<usize>(),
        }
    }

    /// `(unary, ternary)` internal-node counts.
    pub fn arity_profile(&self) -> (usize, usize) {
        match self {
            Tree::Leaf => (0, 0),
            Tree::Node(c) => {
                let (mut u, mut t) = if c.len() == 1 { (1, 0) } else { (0, 1) };
                for child in c.iter() {
                    let (cu, ct) = child.arity_profile();
                    u += cu;
                    t += ct;
                }
                (u, t)
            }
        }
    }

    pub fn leaves(&self) -> usize {
        match self {
            Tree::Leaf => 1,
            Tree::Node(c) => c.iter().map(Tree::leaves).sum(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.internal_nodes() + self.leaves()
    }

    pub fn conforms_to(&self, arity: AritySet) -> bool {
        match self {
            Tree::Leaf => true,
            Tree::Node(c) => arity.allows(c.len()) && c.iter().all(|t| t.conforms_to(arity)),
        }
    }

    /// Canonical string form: `L` for a leaf, `(…)` around the children.
    pub fn serialize(&self) -> String {
        self.to_string()
    }

    pub fn parse(s: &str) -> Result<Tree, TreeError> {
        let bytes = s.as_bytes();
        let mut pos = 0;
        let tree = parse_tree(bytes, &mut pos, 0)?;
        if pos != bytes.len() {
            return Err(TreeError::Parse { position: pos, message: "trailing input".into() });
        }
        Ok(tree)
    }
}

/// Deep inputs are rejected instead of overflowing the stack.
const MAX_PARSE_DEPTH: usize = 4096;

fn parse_tree(bytes: &[u8], pos: &mut usize, depth: usize) -> Result<Tree, TreeError> {
    let err = |position: usize, message: &str| TreeError::Parse { position, message: message.into() };
    if depth > MAX_PARSE_DEPTH {
        return Err(err(*pos, "nesting too deep"));
    }
    match bytes.get(*pos) {
        Some(b'L') => {
            *pos += 1;
            Ok(Tree::Leaf)
        }
        Some(b'(') => {
            let open = *pos;
            *pos += 1;
            let mut children = Vec::new();
            loop {
                match bytes.get(*pos) {
                    Some(b')') => {
                        *pos += 1;
                        break;
                    }
                    Some(_) => children.push(parse_tree(bytes, pos, depth + 1)?),
                    None => return Err(err(open, "unclosed `(`")),
                }
            }
            if children.is_empty() {
                return Err(err(open, "empty node `()`"));
            }
            Ok(Tree::node(children))
        }
        Some(_) => Err(err(*pos, "expected `L` or `(`")),
        None => Err(err(*pos, "unexpected end of input")),
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Leaf => f.write_str("L"),
            Tree::Node(c) => {
                f.write_str("(")?;
                for child in c.iter() {
                    write!(f, "{child}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl FromStr for Tree {
    type Err = TreeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Tree::parse(s)
    }
}

/// Every tree of generation `j`, each once, in serialization order.
pub fn enumerate(j: usize, arity: AritySet) -> Result<Vec<Tree>, TreeError> {
    enumerate_with_cap(j, arity, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_with_cap(j: usize, arity: AritySet, cap: usize) -> Result<Vec<Tree>, TreeError> {
    if j > cap {
        return Err(TreeError::CapExceeded { generation: j, cap });
    }
    Ok(enumerate_generations(j, arity).pop().expect("non-empty"))
}

/// Trees of generations `0..=j`, each generation in serialization order.
pub fn enumerate_generations(j: usize, arity: AritySet) -> Vec<Vec<Tree>> {
    let mut gens: Vec<Vec<Tree>> = vec![vec![Tree::Leaf]];
    for g in 1..=j {
        let mut out = Vec::new();
        if arity == AritySet::UnaryTernary {
            out.extend(gens[g - 1].iter().map(|t| Tree::node(vec![t.clone()])));
        }
        for a in 0..g {
            for b in 0..g - a {
                let c = g - 1 - a - b;
                for x in &gens[a] {
                    for y in &gens[b] {
                        for z in &gens[c] {
                            out.push(Tree::node(vec![x.clone(), y.clone(), z.clone()]));
                        }
                    }
                }
            }
        }
        let mut keyed: Vec<(String, Tree)> = out.into_iter().map(|t| (t.serialize(), t)).collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        gens.push(keyed.into_iter().map(|(_, t)| t).collect());
    }
    gens
}

/// Number of trees of generation `j`, from the convolution recurrences
/// `c_j = Σ_{a+b+c=j-1} c_a c_b c_c` and, for `{1,3}`,
/// `a_j = a_{j-1} + Σ_{p+q+r=j-1} a_p a_q a_r`.
pub fn count(j: usize, arity: AritySet) -> BigUint {
    counts(j, arity).pop().expect("non-empty")
}

/// `count(g)` for `g = 0..=j`.
pub fn counts(j: usize, arity: AritySet) -> Vec<BigUint> {
    let mut c: Vec<BigUint> = vec![BigUint::one()];
    // pair[s] = Σ_{a+b=s} c_a c_b
    let mut pair: Vec<BigUint> = vec![BigUint::one()];
    for g in 1..=j {
        let mut total = BigUint::zero();
        for a in 0..g {
            total += &c[a] * &pair[g - 1 - a];
        }
        if arity == AritySet::UnaryTernary {
            total += &c[g - 1];
        }
        c.push(total);
        let mut p = BigUint::zero();
        for a in 0..=g {
            p += &c[a] * &c[g - a];
        }
        pair.push(p);
    }
    c
}

/// Checks `count(j) ≤ (num/den)^j`, i.e. `count · den^j ≤ num^j`, exactly.
pub fn count_within_certificate(j: usize, arity: AritySet, num: u32, den: u32) -> bool {
    let lhs = count(j, arity) * BigUint::from(den).pow(j as u32);
    lhs <= BigUint::from(num).pow(j as u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: brute-force over all balanced strings of `L` and
    /// parentheses of the right length, keeping those that parse to a
    /// conforming tree of generation `j`.
    fn brute_force(j: usize, arity: AritySet) -> Vec<String> {
        fn grow(prefix: &mut String, budget: usize, out: &mut Vec<String>) {
            if let Ok(t) = Tree::parse(prefix) {
                out.push(t.serialize());
            }
            if budget == 0 {
                return;
            }
            for ch in ['L', '(', ')'] {
                prefix.push(ch);
                grow(prefix, budget - 1, out);
                prefix.pop();
            }
        }
        // generation j tree in {1,3} has at most 3j+1 nodes → ≤ 3j+1 letters
        // and 2j parentheses.
        let max_len = 5 * j + 1;
        let mut all = Vec::new();
        grow(&mut String::new(), max_len, &mut all);
        let mut v: Vec<String> = all
            .into_iter()
            .filter(|s| {
                let t = Tree::parse(s).unwrap();
                t.conforms_to(arity) && t.internal_nodes() == j
            })
            .collect();
        v.sort();
        v.dedup();
        v
    }

    #[test]
    fn small_generations_match_brute_force() {
        for (j, arity, expect) in [
            (0, AritySet::Ternary, 1),
            (1, AritySet::Ternary, 1),
            (2, AritySet::Ternary, 3),
            (1, AritySet::UnaryTernary, 2),
            (2, AritySet::UnaryTernary, 8),
        ] {
            let bf = brute_force(j, arity);
            let en: Vec<String> = enumerate(j, arity).unwrap().iter().map(Tree::serialize).collect();
            assert_eq!(bf.len(), expect);
            assert_eq!(en, bf);
        }
    }

    #[test]
    fn trivial_and_one_node() {
        assert_eq!(enumerate(0, AritySet::Ternary).unwrap(), vec![Tree::Leaf]);
        assert_eq!(Tree::Leaf.serialize(), "L");
        let t = Tree::node(vec![Tree::Leaf, Tree::Leaf, Tree::Leaf]);
        assert_eq!(t.serialize(), "(LLL)");
    }

    #[test]
    fn counts_match_recurrences_and_enumeration() {
        let want = [1u32, 1, 3, 12, 55, 273];
        for (j, &w) in want.iter().enumerate() {
            assert_eq!(count(j, AritySet::Ternary), BigUint::from(w));
        }
        for j in 0..=6 {
            assert_eq!(count(j, AritySet::Ternary), BigUint::from(enumerate(j, AritySet::Ternary).unwrap().len()));
            assert_eq!(
                count(j, AritySet::UnaryTernary),
                BigUint::from(enumerate(j, AritySet::UnaryTernary).unwrap().len())
            );
        }
        assert_eq!(count(1, AritySet::UnaryTernary), BigUint::from(2u32));
    }

    #[test]
    fn fuss_catalan_closed_form() {
        // (1/(2j+1)) C(3j, j)
        fn binom(n: u64, k: u64) -> BigUint {
            (0..k).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
        }
        for j in 0..=30u64 {
            assert_eq!(count(j as usize, AritySet::Ternary), binom(3 * j, j) / (2 * j + 1));
        }
    }

    #[test]
    fn node_count_identities() {
        for j in 0..=5 {
            for t in enumerate(j, AritySet::Ternary).unwrap() {
                assert_eq!(t.node_count(), 3 * j + 1);
                assert_eq!(t.leaves(), 2 * j + 1);
                assert_eq!(t.internal_nodes(), j);
            }
            for t in enumerate(j, AritySet::UnaryTernary).unwrap() {
                let (u, k) = t.arity_profile();
                assert_eq!(u + k, j);
                assert_eq!(t.node_count(), u + 3 * k + 1);
            }
        }
    }

    #[test]
    fn no_duplicates_and_round_trip() {
        for j in 0..=4 {
            for arity in [AritySet::Ternary, AritySet::UnaryTernary] {
                let trees = enumerate(j, arity).unwrap();
                let mut s: Vec<String> = trees.iter().map(Tree::serialize).collect();
                for (t, text) in trees.iter().zip(&s) {
                    assert_eq!(&Tree::parse(text).unwrap(), t);
                }
                let n = s.len();
                s.dedup();
                assert_eq!(s.len(), n);
            }
        }
    }

    #[test]
    fn certificates() {
        for j in 0..=30 {
            assert!(count_within_certificate(j, AritySet::Ternary, 27, 4), "j={j}");
            assert!(count_within_certificate(j, AritySet::UnaryTernary, 8, 1), "j={j}");
        }
    }

    #[test]
    fn cap_is_enforced() {
        assert_eq!(
            enumerate(9, AritySet::Ternary),
            Err(TreeError::CapExceeded { generation: 9, cap: 8 })
        );
    }

    #[test]
    fn parse_errors_carry_positions() {
        let cases = [("", 0), ("(", 0), ("()", 0), ("(LL", 0), ("LL", 1), ("(LxL)", 2), (")", 0)];
        for (s, p) in cases {
            match Tree::parse(s) {
                Err(TreeError::Parse { position, .. }) => assert_eq!(position, p, "{s}"),
                other => panic!("{s}: {other:?}"),
            }
        }
        let deep = "(".repeat(10_000) + "L" + &")".repeat(10_000);
        assert!(Tree::parse(&deep).is_err());
    }
}
