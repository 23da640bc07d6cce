//! Hyperinterpolation-class operators on the unit sphere.
//!
//! The crate builds positive-weight quadrature rules with certified
//! polynomial exactness, evaluates real spherical harmonics and the
//! associated reproducing kernels, realizes the hyperinterpolation family
//! of operators (classical, Lasso, hard-thresholding, filtered,
//! generalized, partial-sum) as diagonal coefficient transforms, and ships
//! a verification engine that checks the operator-algebra laws this family
//! satisfies (self-adjointness, projection and semigroup structure,
//! product/sum/difference behaviour, composition tables, homomorphism)
//! against numeric tolerances.
//!
//! Everything is generic over the scalar type through [`Real`]; `f64` is
//! the working precision of the shipped binaries and the aliases below.

pub mod algebra;
pub mod basis;
pub mod coefficients;
pub mod error;
pub mod numeric;
pub mod operators;
pub mod quadrature;
pub mod report;
pub mod scalar;
pub mod special;
pub mod testfns;

pub use error::{Error, Result};
pub use scalar::Real;

pub use basis::{HarmonicIndex, SpherePoint};
pub use coefficients::CoefficientVector;
pub use operators::{Filter, OperatorKind, OperatorSpec, SampledFunction};
pub use quadrature::QuadratureRule;
pub use report::{CheckReport, RuleDescriptor};
pub use testfns::TestFunction;

/// Concrete aliases at the working precision.
pub type SpherePointF64 = SpherePoint<f64>;
pub type QuadratureRuleF64 = QuadratureRule<f64>;
pub type CoefficientVectorF64 = CoefficientVector<f64>;
pub type OperatorSpecF64 = OperatorSpec<f64>;
pub type FilterF64 = Filter<f64>;
pub type SampledFunctionF64 = SampledFunction<f64>;
pub type TestFunctionF64 = TestFunction<f64>;
pub type Quadrature1DF64 = special::Quadrature1D<f64>;
