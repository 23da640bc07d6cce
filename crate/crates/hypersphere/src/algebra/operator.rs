//! Operator abstraction for the law checks.
//!
//! The diagonal family from [`crate::operators`] covers the named
//! operators, but the product/sum/difference laws quantify over arbitrary
//! projections, so the checks work against this trait and a few
//! combinators: composition with re-synthesis at the nodes, coefficientwise
//! sum and difference, and projections onto explicit coefficient subspaces
//! (which supply the non-commuting counterexamples that no diagonal pair
//! can produce).

use crate::coefficients::{self, CoefficientVector};
use crate::error::{Error, Result};
use crate::numeric::KahanSum;
use crate::operators::{
    analyze, apply_with, synthesize_at_nodes, ExactnessPolicy, OperatorSpec, SampledFunction,
};
use crate::quadrature::QuadratureRule;
use crate::scalar::Real;

/// An operator from continuous functions into the degree-bounded
/// polynomials, presented through its coefficient output.
pub trait HyperOperator<T: Real>: Send + Sync {
    /// Output degree bound.
    fn degree(&self) -> usize;

    /// Label for reports.
    fn label(&self) -> String;

    fn apply_op(
        &self,
        f: &SampledFunction<T>,
        rule: &QuadratureRule<T>,
    ) -> Result<CoefficientVector<T>>;
}

impl<T: Real> HyperOperator<T> for OperatorSpec<T> {
    fn degree(&self) -> usize {
        OperatorSpec::degree(self)
    }

    fn label(&self) -> String {
        OperatorSpec::label(self)
    }

    fn apply_op(
        &self,
        f: &SampledFunction<T>,
        rule: &QuadratureRule<T>,
    ) -> Result<CoefficientVector<T>> {
        crate::operators::apply(self, f, rule)
    }
}

fn require_exactness<T: Real>(rule: &QuadratureRule<T>, degree: usize) -> Result<()> {
    if rule.exactness() < 2 * degree {
        return Err(Error::ExactnessShortfall {
            required: 2 * degree,
            actual: rule.exactness(),
        });
    }
    Ok(())
}

/// `outer . inner`: the inner output polynomial is synthesized at the
/// rule's nodes and fed to the outer operator.
pub struct ComposedOp<'a, T: Real> {
    outer: &'a dyn HyperOperator<T>,
    inner: &'a dyn HyperOperator<T>,
}

impl<'a, T: Real> ComposedOp<'a, T> {
    pub fn new(outer: &'a dyn HyperOperator<T>, inner: &'a dyn HyperOperator<T>) -> Self {
        ComposedOp { outer, inner }
    }
}

impl<T: Real> HyperOperator<T> for ComposedOp<'_, T> {
    fn degree(&self) -> usize {
        self.outer.degree()
    }

    fn label(&self) -> String {
        format!("{} . {}", self.outer.label(), self.inner.label())
    }

    fn apply_op(
        &self,
        f: &SampledFunction<T>,
        rule: &QuadratureRule<T>,
    ) -> Result<CoefficientVector<T>> {
        require_exactness(rule, self.outer.degree().max(self.inner.degree()))?;
        let mid = self.inner.apply_op(f, rule)?;
        let mid_fn = synthesize_at_nodes(&mid, rule)?;
        self.outer.apply_op(&mid_fn, rule)
    }
}

/// Composition of two operator descriptions through the trait interface.
pub fn compose_ops<T: Real>(
    outer: &dyn HyperOperator<T>,
    inner: &dyn HyperOperator<T>,
    f: &SampledFunction<T>,
    rule: &QuadratureRule<T>,
) -> Result<CoefficientVector<T>> {
    ComposedOp::new(outer, inner).apply_op(f, rule)
}

/// Coefficientwise sum on the common padded degree.
pub struct SumOp<'a, T: Real> {
    a: &'a dyn HyperOperator<T>,
    b: &'a dyn HyperOperator<T>,
}

impl<'a, T: Real> SumOp<'a, T> {
    pub fn new(a: &'a dyn HyperOperator<T>, b: &'a dyn HyperOperator<T>) -> Self {
        SumOp { a, b }
    }
}

impl<T: Real> HyperOperator<T> for SumOp<'_, T> {
    fn degree(&self) -> usize {
        self.a.degree().max(self.b.degree())
    }

    fn label(&self) -> String {
        format!("{} + {}", self.a.label(), self.b.label())
    }

    fn apply_op(
        &self,
        f: &SampledFunction<T>,
        rule: &QuadratureRule<T>,
    ) -> Result<CoefficientVector<T>> {
        let xa = self.a.apply_op(f, rule)?;
        let xb = self.b.apply_op(f, rule)?;
        coefficients::add(&xa, &xb)
    }
}

/// Coefficientwise difference `a - b` on the common padded degree.
pub struct DiffOp<'a, T: Real> {
    a: &'a dyn HyperOperator<T>,
    b: &'a dyn HyperOperator<T>,
}

impl<'a, T: Real> DiffOp<'a, T> {
    pub fn new(a: &'a dyn HyperOperator<T>, b: &'a dyn HyperOperator<T>) -> Self {
        DiffOp { a, b }
    }
}

impl<T: Real> HyperOperator<T> for DiffOp<'_, T> {
    fn degree(&self) -> usize {
        self.a.degree().max(self.b.degree())
    }

    fn label(&self) -> String {
        format!("{} - {}", self.a.label(), self.b.label())
    }

    fn apply_op(
        &self,
        f: &SampledFunction<T>,
        rule: &QuadratureRule<T>,
    ) -> Result<CoefficientVector<T>> {
        let xa = self.a.apply_op(f, rule)?;
        let xb = self.b.apply_op(f, rule)?;
        coefficients::sub(&xa, &xb)
    }
}

fn coeff_dot<T: Real>(a: &CoefficientVector<T>, b: &CoefficientVector<T>) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = KahanSum::new();
    for (&x, &y) in a.values().iter().zip(b.values()) {
        acc.add(x * y);
    }
    acc.value()
}

/// Orthogonal projection onto the span of explicit coefficient vectors.
/// Under a rule of exactness 2n the discrete inner product of degree-n
/// polynomials is the coefficient dot product, so this is a genuine
/// projection for the discrete geometry: idempotent and self-adjoint.
/// Spans built from rotated basis directions give non-commuting pairs.
pub struct CoeffProjectionOp<T: Real> {
    degree: usize,
    basis: Vec<CoefficientVector<T>>,
    label: String,
}

impl<T: Real> CoeffProjectionOp<T> {
    /// Orthonormalizes `spanning` (modified Gram-Schmidt, dropping
    /// near-dependent directions) over coefficient space at `degree`.
    pub fn new(
        degree: usize,
        spanning: Vec<CoefficientVector<T>>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let mut basis: Vec<CoefficientVector<T>> = Vec::new();
        for v in spanning {
            let mut v = v.padded(degree)?;
            for b in &basis {
                let proj = coeff_dot(&v, b);
                let values: Vec<T> = v
                    .values()
                    .iter()
                    .zip(b.values())
                    .map(|(&x, &y)| x - proj * y)
                    .collect();
                v = CoefficientVector::from_values(v.dim_d(), degree, values)?;
            }
            let norm = v.l2_norm();
            if norm > T::of(1e-10) {
                let values: Vec<T> = v.values().iter().map(|&x| x / norm).collect();
                basis.push(CoefficientVector::from_values(v.dim_d(), degree, values)?);
            }
        }
        if basis.is_empty() {
            return Err(Error::InvalidSpec(
                "projection span is degenerate".to_string(),
            ));
        }
        Ok(CoeffProjectionOp {
            degree,
            basis,
            label: label.into(),
        })
    }

    /// Rank-one projection onto a single harmonic direction.
    pub fn onto_index(degree: usize, index: crate::basis::HarmonicIndex) -> Result<Self> {
        let mut v = CoefficientVector::zeros(2, degree)?;
        v.set(index, T::one());
        Self::new(
            degree,
            vec![v],
            format!("proj(span Y_({},{}), n={degree})", index.degree, index.k),
        )
    }
}

impl<T: Real> HyperOperator<T> for CoeffProjectionOp<T> {
    fn degree(&self) -> usize {
        self.degree
    }

    fn label(&self) -> String {
        self.label.clone()
    }

    fn apply_op(
        &self,
        f: &SampledFunction<T>,
        rule: &QuadratureRule<T>,
    ) -> Result<CoefficientVector<T>> {
        require_exactness(rule, self.degree)?;
        let a = analyze(f, self.degree, rule)?;
        let mut out = CoefficientVector::zeros(a.dim_d(), self.degree)?;
        for b in &self.basis {
            let w = coeff_dot(&a, b);
            let values: Vec<T> = out
                .values()
                .iter()
                .zip(b.values())
                .map(|(&x, &y)| x + w * y)
                .collect();
            out = CoefficientVector::from_values(a.dim_d(), self.degree, values)?;
        }
        Ok(out)
    }
}

/// Convenience: apply a spec through the trait without the strict
/// exactness check (used by witnesses on deliberately weak rules).
pub fn apply_lenient<T: Real>(
    spec: &OperatorSpec<T>,
    f: &SampledFunction<T>,
    rule: &QuadratureRule<T>,
) -> Result<CoefficientVector<T>> {
    apply_with(spec, f, rule, ExactnessPolicy::AllowShortfall)
}
