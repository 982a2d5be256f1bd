//! Exact supercommutative chart algebras.

pub mod context;
pub mod element;
pub mod poly;
pub mod scalar;

pub use context::{Ctx, GeneratorContext};
pub use element::{rational, AssumptionSet, OddMonomial, PartitionRelation, Substitution, SuperElement};
pub use poly::{Monomial, Poly, Rational};
pub use scalar::EvenScalar;
