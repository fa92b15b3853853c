//! Symbolic Picard expansions for cubic parabolic equations on the torus.

pub mod experiments;
pub mod expo;
pub mod field;
pub mod io;
pub mod norms;
pub mod oracle;
pub mod picard;
pub mod rate;
pub mod trees;

pub use expo::{ExpPolynomial, ExpTerm};
pub use field::{FieldError, FieldOperator, Frequency, LinearMultiplier, TrigPolynomial};
pub use picard::{EquationId, EquationSpec, PicardError};
pub use rate::Rate;
pub use trees::{AritySet, Tree};
