//! The discrete semi-inner product, analysis/synthesis between samples and
//! coefficients, and the hyperinterpolation family of operators realized as
//! diagonal coefficient transforms.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::basis::{
    compensated_dot, eval_harmonics_upto, evaluation_grid, surface_area, HarmonicIndex,
    SpherePoint,
};
use crate::coefficients::CoefficientVector;
use crate::error::{Error, Result};
use crate::numeric::KahanSum;
use crate::quadrature::QuadratureRule;
use crate::report::CheckReport;
use crate::scalar::Real;
use crate::testfns::TestFunction;

/// A continuous function presented either as an evaluable handle or as a
/// vector of samples bound to the node order of one specific rule.
#[derive(Clone)]
#[allow(clippy::type_complexity)]
pub enum SampledFunction<T> {
    Handle(Arc<dyn Fn(&SpherePoint<T>) -> T + Send + Sync>),
    NodeAligned {
        values: Arc<Vec<T>>,
        rule_fingerprint: u64,
    },
}

impl<T: Real> SampledFunction<T> {
    pub fn from_fn(f: impl Fn(&SpherePoint<T>) -> T + Send + Sync + 'static) -> Self {
        SampledFunction::Handle(Arc::new(f))
    }

    pub fn constant(c: T) -> Self {
        Self::from_fn(move |_| c)
    }

    /// Binds node-order samples to `rule`.
    pub fn from_samples(values: Vec<T>, rule: &QuadratureRule<T>) -> Result<Self> {
        if values.len() != rule.node_count() {
            return Err(Error::SampleLength {
                expected: rule.node_count(),
                got: values.len(),
            });
        }
        Ok(SampledFunction::NodeAligned {
            values: Arc::new(values),
            rule_fingerprint: rule.fingerprint(),
        })
    }

    /// Handle that synthesizes the polynomial with coefficients `c`.
    pub fn from_coefficients(c: CoefficientVector<T>) -> Self {
        Self::from_fn(move |x| synthesize(&c, x).expect("synthesis on S^2"))
    }

    /// Values at the rule's nodes in node order. Node-aligned data must
    /// have been taken under the same rule.
    pub fn values_at_nodes(&self, rule: &QuadratureRule<T>) -> Result<Vec<T>> {
        match self {
            SampledFunction::Handle(f) => {
                let mut out = Vec::with_capacity(rule.node_count());
                for (j, p) in rule.nodes().iter().enumerate() {
                    let v = f(p);
                    if !v.is_finite() {
                        return Err(Error::NonFiniteSample { node: j });
                    }
                    out.push(v);
                }
                Ok(out)
            }
            SampledFunction::NodeAligned {
                values,
                rule_fingerprint,
            } => {
                if *rule_fingerprint != rule.fingerprint() {
                    return Err(Error::RuleMismatch {
                        expected: *rule_fingerprint,
                        got: rule.fingerprint(),
                    });
                }
                Ok(values.as_ref().clone())
            }
        }
    }

    /// Pointwise evaluation; `None` for node-aligned data, which is only
    /// defined on its rule's nodes.
    pub fn eval(&self, x: &SpherePoint<T>) -> Option<T> {
        match self {
            SampledFunction::Handle(f) => Some(f(x)),
            SampledFunction::NodeAligned { .. } => None,
        }
    }
}

impl<T> std::fmt::Debug for SampledFunction<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SampledFunction::Handle(_) => f.write_str("SampledFunction::Handle"),
            SampledFunction::NodeAligned { values, .. } => {
                write!(f, "SampledFunction::NodeAligned({} values)", values.len())
            }
        }
    }
}

/// Discrete semi-inner product: the weighted node sum of f*g in fixed node
/// order with compensated accumulation. Symmetric and bilinear.
pub fn discrete_inner<T: Real>(
    f: &SampledFunction<T>,
    g: &SampledFunction<T>,
    rule: &QuadratureRule<T>,
) -> Result<T> {
    let fv = f.values_at_nodes(rule)?;
    let gv = g.values_at_nodes(rule)?;
    let mut acc = KahanSum::new();
    for ((&w, &a), &b) in rule.weights().iter().zip(&fv).zip(&gv) {
        acc.add(w * a * b);
    }
    Ok(acc.value())
}

/// Semi-norm induced by the discrete inner product. Vanishes on any
/// function that is zero at every node, not only on the zero function.
pub fn semi_norm<T: Real>(f: &SampledFunction<T>, rule: &QuadratureRule<T>) -> Result<T> {
    Ok(discrete_inner(f, f, rule)?.max(T::zero()).sqrt())
}

/// Hyperinterpolation analysis: coefficient (l, k) is the discrete inner
/// product of `f` with Y_{l k}, for every degree l <= n. Accurate as an L2
/// projection when the rule's exactness is at least 2n.
pub fn analyze<T: Real>(
    f: &SampledFunction<T>,
    n: usize,
    rule: &QuadratureRule<T>,
) -> Result<CoefficientVector<T>> {
    if rule.dim_d() != 2 {
        return Err(Error::UnsupportedDimension {
            dim_d: rule.dim_d(),
        });
    }
    let values = f.values_at_nodes(rule)?;
    let count = (n + 1) * (n + 1);
    let mut sums = vec![KahanSum::<T>::new(); count];
    for ((p, &w), &v) in rule.nodes().iter().zip(rule.weights()).zip(&values) {
        let table = eval_harmonics_upto(n, p)?;
        let wv = w * v;
        for (acc, &y) in sums.iter_mut().zip(&table) {
            acc.add(wv * y);
        }
    }
    CoefficientVector::from_values(2, n, sums.iter().map(|s| s.value()).collect())
}

/// Evaluates the polynomial with coefficients `c` at `x`.
pub fn synthesize<T: Real>(c: &CoefficientVector<T>, x: &SpherePoint<T>) -> Result<T> {
    if c.dim_d() != 2 || x.dim_d() != 2 {
        return Err(Error::UnsupportedDimension {
            dim_d: x.dim_d().max(c.dim_d()),
        });
    }
    let table = eval_harmonics_upto(c.degree(), x)?;
    Ok(compensated_dot(&table, c.values()))
}

/// Synthesizes `c` at every node of `rule`, returning node-aligned samples.
pub fn synthesize_at_nodes<T: Real>(
    c: &CoefficientVector<T>,
    rule: &QuadratureRule<T>,
) -> Result<SampledFunction<T>> {
    let mut values = Vec::with_capacity(rule.node_count());
    for p in rule.nodes() {
        values.push(synthesize(c, p)?);
    }
    SampledFunction::from_samples(values, rule)
}

/// Soft thresholding: `max(0, a - k) + min(0, a + k)`.
pub fn soft_threshold<T: Real>(a: T, k: T) -> T {
    assert!(k >= T::zero(), "threshold level must be nonnegative");
    (a - k).max(T::zero()) + (a + k).min(T::zero())
}

/// Hard thresholding: `a` if `|a| > k`, else 0.
pub fn hard_threshold<T: Real>(a: T, k: T) -> T {
    assert!(k >= T::zero(), "threshold level must be nonnegative");
    if a.abs() > k {
        a
    } else {
        T::zero()
    }
}

/// A filter: 1 on [0, s], 0 on [1, inf), with a fixed transition in
/// between. `H1` uses sin^2(pi x) past s = 1/2; `H2` uses sin^2(2 pi x)
/// past s = 3/4. Custom filters are validated against the same axiom at
/// construction.
#[derive(Clone)]
pub enum Filter<T> {
    H1,
    H2,
    Custom {
        s: T,
        h: Arc<dyn Fn(T) -> T + Send + Sync>,
    },
}

impl<T: Real> Filter<T> {
    /// End of the plateau where the filter is identically one.
    pub fn support_onset(&self) -> T {
        match self {
            Filter::H1 => T::of(0.5),
            Filter::H2 => T::of(0.75),
            Filter::Custom { s, .. } => *s,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Filter::H1 => "h1",
            Filter::H2 => "h2",
            Filter::Custom { .. } => "custom",
        }
    }

    pub fn eval(&self, x: T) -> T {
        assert!(x >= T::zero(), "filters are defined on [0, inf)");
        match self {
            Filter::H1 => {
                if x <= T::of(0.5) {
                    T::one()
                } else if x < T::one() {
                    (T::PI() * x).sin().powi(2)
                } else {
                    T::zero()
                }
            }
            Filter::H2 => {
                if x <= T::of(0.75) {
                    T::one()
                } else if x < T::one() {
                    (T::of(2.0) * T::PI() * x).sin().powi(2)
                } else {
                    T::zero()
                }
            }
            Filter::Custom { h, .. } => h(x),
        }
    }

    /// Wraps a custom filter after checking the axiom h = 1 on [0, s] and
    /// h = 0 on [1, inf) on a dense sample.
    pub fn custom(s: T, h: impl Fn(T) -> T + Send + Sync + 'static) -> Result<Self> {
        if !(s > T::zero() && s < T::one()) {
            return Err(Error::InvalidFilter(
                "support onset must lie in (0, 1)".to_string(),
            ));
        }
        let tol = T::of(1e-12).max(T::epsilon() * T::of(64.0));
        let samples = 257;
        for i in 0..=samples {
            let x = s * T::of_usize(i) / T::of_usize(samples);
            let v = h(x);
            if !(v.is_finite() && (v - T::one()).abs() <= tol) {
                return Err(Error::InvalidFilter(format!(
                    "h({}) = {} but the filter must be 1 on [0, s]",
                    x.as_f64(),
                    v.as_f64()
                )));
            }
        }
        for i in 0..=samples {
            let x = T::one() + T::of(3.0) * T::of_usize(i) / T::of_usize(samples);
            let v = h(x);
            if !(v.is_finite() && v.abs() <= tol) {
                return Err(Error::InvalidFilter(format!(
                    "h({}) = {} but the filter must vanish on [1, inf)",
                    x.as_f64(),
                    v.as_f64()
                )));
            }
        }
        Ok(Filter::Custom { s, h: Arc::new(h) })
    }
}

impl<T> std::fmt::Debug for Filter<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Filter::H1 => f.write_str("Filter::H1"),
            Filter::H2 => f.write_str("Filter::H2"),
            Filter::Custom { .. } => f.write_str("Filter::Custom"),
        }
    }
}

/// Per-index Lasso penalty weights; every index defaults to one.
#[derive(Debug, Clone, Default)]
pub struct PenaltyWeights<T> {
    overrides: BTreeMap<(usize, usize), T>,
}

impl<T: Real> PenaltyWeights<T> {
    pub fn uniform() -> Self {
        Self::default()
    }

    #[allow(clippy::neg_cmp_op_on_partial_ord)] // negated form rejects NaN weights
    pub fn with_overrides(overrides: BTreeMap<(usize, usize), T>) -> Result<Self> {
        if overrides.values().any(|&v| !(v > T::zero())) {
            return Err(Error::InvalidSpec(
                "penalty weights must be positive".to_string(),
            ));
        }
        Ok(PenaltyWeights { overrides })
    }

    pub fn get(&self, index: HarmonicIndex) -> T {
        self.overrides
            .get(&(index.degree, index.k))
            .copied()
            .unwrap_or_else(T::one)
    }

    pub fn overrides(&self) -> &BTreeMap<(usize, usize), T> {
        &self.overrides
    }
}

/// Which member of the operator family a spec denotes.
#[derive(Debug, Clone)]
pub enum OperatorKind<T> {
    /// Plain truncation of the analyzed coefficients.
    Hyper,
    /// Soft thresholding at level `lambda * mu_{l k}`.
    Lasso {
        lambda: T,
        penalties: PenaltyWeights<T>,
    },
    /// Hard thresholding at level `lambda`.
    Hard { lambda: T },
    /// Damping by `h(l / n)`.
    Filtered { filter: Filter<T> },
    /// Per-degree weights `a_{n l}` with `a_{n 0} = 1`.
    Generalized { weights: Vec<T> },
    /// Keeps the degrees in `[low, high]`, zeroes the rest.
    PartialSum { low: usize, high: usize },
}

/// Declarative description of one operator: its kind plus the truncation
/// degree. Applying a spec is always `coefficient_transform . analyze`.
#[derive(Debug, Clone)]
pub struct OperatorSpec<T> {
    degree: usize,
    kind: OperatorKind<T>,
}

impl<T: Real> OperatorSpec<T> {
    pub fn hyper(degree: usize) -> Self {
        OperatorSpec {
            degree,
            kind: OperatorKind::Hyper,
        }
    }

    pub fn lasso(degree: usize, lambda: T) -> Self {
        assert!(lambda >= T::zero(), "lambda must be nonnegative");
        OperatorSpec {
            degree,
            kind: OperatorKind::Lasso {
                lambda,
                penalties: PenaltyWeights::uniform(),
            },
        }
    }

    pub fn lasso_weighted(degree: usize, lambda: T, penalties: PenaltyWeights<T>) -> Self {
        assert!(lambda >= T::zero(), "lambda must be nonnegative");
        OperatorSpec {
            degree,
            kind: OperatorKind::Lasso { lambda, penalties },
        }
    }

    pub fn hard(degree: usize, lambda: T) -> Self {
        assert!(lambda >= T::zero(), "lambda must be nonnegative");
        OperatorSpec {
            degree,
            kind: OperatorKind::Hard { lambda },
        }
    }

    pub fn filtered(degree: usize, filter: Filter<T>) -> Self {
        OperatorSpec {
            degree,
            kind: OperatorKind::Filtered { filter },
        }
    }

    /// Weights must provide `a_{n l}` for l = 0..=degree with `a_{n 0} = 1`
    /// (the normalization of the kernel's mean value).
    pub fn generalized(degree: usize, weights: Vec<T>) -> Result<Self> {
        if weights.len() != degree + 1 {
            return Err(Error::InvalidSpec(format!(
                "generalized weights need {} entries, got {}",
                degree + 1,
                weights.len()
            )));
        }
        if (weights[0] - T::one()).abs() > T::of(1e-12).max(T::epsilon() * T::of(8.0)) {
            return Err(Error::InvalidSpec(
                "generalized weights must start with a_0 = 1".to_string(),
            ));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidSpec(
                "generalized weights must be finite".to_string(),
            ));
        }
        Ok(OperatorSpec {
            degree,
            kind: OperatorKind::Generalized { weights },
        })
    }

    pub fn partial_sum(degree: usize, low: usize, high: usize) -> Result<Self> {
        if !(low <= high && high <= degree) {
            return Err(Error::InvalidSpec(format!(
                "band [{low}, {high}] must satisfy 0 <= low <= high <= {degree}"
            )));
        }
        Ok(OperatorSpec {
            degree,
            kind: OperatorKind::PartialSum { low, high },
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn kind(&self) -> &OperatorKind<T> {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            OperatorKind::Hyper => "hyper",
            OperatorKind::Lasso { .. } => "lasso",
            OperatorKind::Hard { .. } => "hard",
            OperatorKind::Filtered { .. } => "filtered",
            OperatorKind::Generalized { .. } => "generalized",
            OperatorKind::PartialSum { .. } => "partial_sum",
        }
    }

    /// Short human-readable label used in reports and CSV rows.
    pub fn label(&self) -> String {
        match &self.kind {
            OperatorKind::Hyper => format!("hyper(n={})", self.degree),
            OperatorKind::Lasso { lambda, .. } => {
                format!("lasso(n={}, lambda={})", self.degree, lambda.as_f64())
            }
            OperatorKind::Hard { lambda } => {
                format!("hard(n={}, lambda={})", self.degree, lambda.as_f64())
            }
            OperatorKind::Filtered { filter } => {
                format!("filtered(n={}, {})", self.degree, filter.name())
            }
            OperatorKind::Generalized { .. } => format!("generalized(n={})", self.degree),
            OperatorKind::PartialSum { low, high } => {
                format!("partial_sum(n={}, band=[{low},{high}])", self.degree)
            }
        }
    }

    /// The diagonal factor applied at `index`, for the linear members of
    /// the family (`None` for the thresholding kinds, whose action is
    /// nonlinear in the coefficient).
    pub fn diagonal_factor(&self, index: HarmonicIndex) -> Option<T> {
        match &self.kind {
            OperatorKind::Hyper => Some(T::one()),
            OperatorKind::Filtered { filter } => {
                let x = T::of_usize(index.degree) / T::of_usize(self.degree.max(1));
                Some(filter.eval(x))
            }
            OperatorKind::Generalized { weights } => Some(weights[index.degree]),
            OperatorKind::PartialSum { low, high } => {
                if index.degree >= *low && index.degree <= *high {
                    Some(T::one())
                } else {
                    Some(T::zero())
                }
            }
            OperatorKind::Lasso { .. } | OperatorKind::Hard { .. } => None,
        }
    }
}

/// Applies the spec's diagonal action to analyzed coefficients; the output
/// is truncated to the spec's degree.
pub fn coefficient_transform<T: Real>(
    spec: &OperatorSpec<T>,
    c: &CoefficientVector<T>,
) -> Result<CoefficientVector<T>> {
    if c.degree() < spec.degree {
        return Err(Error::DegreeMismatch {
            coeff_degree: c.degree(),
            spec_degree: spec.degree,
        });
    }
    let truncated = c.truncated(spec.degree)?;
    truncated.map_indexed(|idx, a| match &spec.kind {
        OperatorKind::Hyper => a,
        OperatorKind::Lasso { lambda, penalties } => {
            soft_threshold(a, *lambda * penalties.get(idx))
        }
        OperatorKind::Hard { lambda } => hard_threshold(a, *lambda),
        OperatorKind::Filtered { .. }
        | OperatorKind::Generalized { .. }
        | OperatorKind::PartialSum { .. } => spec.diagonal_factor(idx).unwrap() * a,
    })
}

/// Whether `apply`/`compose` insist on the rule exactness matching the
/// operator degree. The strict policy is the default; the override exists
/// for experiments with deliberately weak rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactnessPolicy {
    Strict,
    AllowShortfall,
}

/// Full operator application: analyze to the spec's degree, then transform.
/// Requires rule exactness >= 2 * degree under the strict policy.
pub fn apply<T: Real>(
    spec: &OperatorSpec<T>,
    f: &SampledFunction<T>,
    rule: &QuadratureRule<T>,
) -> Result<CoefficientVector<T>> {
    apply_with(spec, f, rule, ExactnessPolicy::Strict)
}

pub fn apply_with<T: Real>(
    spec: &OperatorSpec<T>,
    f: &SampledFunction<T>,
    rule: &QuadratureRule<T>,
    policy: ExactnessPolicy,
) -> Result<CoefficientVector<T>> {
    if policy == ExactnessPolicy::Strict && rule.exactness() < 2 * spec.degree {
        return Err(Error::ExactnessShortfall {
            required: 2 * spec.degree,
            actual: rule.exactness(),
        });
    }
    let analyzed = analyze(f, spec.degree, rule)?;
    coefficient_transform(spec, &analyzed)
}

/// Composition `outer . inner`: applies `inner`, synthesizes its polynomial
/// at the rule's nodes, and applies `outer` to the node-aligned result.
pub fn compose<T: Real>(
    outer: &OperatorSpec<T>,
    inner: &OperatorSpec<T>,
    f: &SampledFunction<T>,
    rule: &QuadratureRule<T>,
) -> Result<CoefficientVector<T>> {
    let max_degree = outer.degree.max(inner.degree);
    if rule.exactness() < 2 * max_degree {
        return Err(Error::ExactnessShortfall {
            required: 2 * max_degree,
            actual: rule.exactness(),
        });
    }
    let mid = apply_with(inner, f, rule, ExactnessPolicy::AllowShortfall)?;
    let mid_fn = synthesize_at_nodes(&mid, rule)?;
    apply_with(outer, &mid_fn, rule, ExactnessPolicy::AllowShortfall)
}

/// Euclidean norm of the coefficients, i.e. the L2 norm of the operator
/// output by Parseval.
pub fn poly_l2_norm<T: Real>(c: &CoefficientVector<T>) -> T {
    c.l2_norm()
}

/// Estimates sup |f| over the rule's nodes plus a fixed 80 x 160
/// equiangular grid (nodes only for node-aligned samples, which cannot be
/// evaluated off their grid).
pub fn sup_norm_estimate<T: Real>(
    f: &SampledFunction<T>,
    rule: &QuadratureRule<T>,
) -> Result<T> {
    let node_values = f.values_at_nodes(rule)?;
    let mut sup = node_values
        .iter()
        .fold(T::zero(), |m, &v| m.max(v.abs()));
    if let SampledFunction::Handle(h) = f {
        for p in evaluation_grid::<T>(80, 160) {
            sup = sup.max(h(&p).abs());
        }
    }
    Ok(sup)
}

/// Default L2-over-sup bound for the membership scan on S^2: the ratio a
/// constant function attains, with five percent headroom.
pub fn default_hc_bound<T: Real>() -> T {
    surface_area::<T>(2).sqrt() * T::of(1.05)
}

/// Scans a corpus for the ratio `|T f|_{L2} / sup |f|` and reports the
/// worst case against `bound` (the class membership constant).
pub fn hc_membership_scan<T: Real>(
    spec: &OperatorSpec<T>,
    corpus: &[TestFunction<T>],
    rule: &QuadratureRule<T>,
    bound: Option<T>,
) -> Result<CheckReport> {
    assert!(!corpus.is_empty(), "membership scan needs a nonempty corpus");
    let bound = bound.unwrap_or_else(default_hc_bound::<T>);
    let mut worst = T::zero();
    let mut worst_name = String::new();
    let mut skipped = Vec::new();
    let mut samples = 0u64;
    for tf in corpus {
        let sup = sup_norm_estimate(tf.function(), rule)?;
        if sup <= T::of(1e-14) {
            skipped.push(tf.name().to_string());
            continue;
        }
        let out = apply(spec, tf.function(), rule)?;
        let ratio = poly_l2_norm(&out) / sup;
        samples += 1;
        if ratio > worst {
            worst = ratio;
            worst_name = tf.name().to_string();
        }
    }
    let mut witness = serde_json::json!({
        "operator": spec.label(),
        "worst_function": worst_name,
    });
    if !skipped.is_empty() {
        witness["skipped_zero_functions"] = serde_json::json!(skipped);
    }
    Ok(CheckReport::holds(
        format!("def2.8.hc_membership.{}", spec.kind_name()),
        worst.as_f64(),
        bound.as_f64(),
        rule.descriptor(),
    )
    .with_samples(samples)
    .with_witness(witness))
}

#[derive(Serialize, Deserialize)]
struct FilterFile {
    kind: String,
    s: f64,
}

#[derive(Serialize, Deserialize)]
struct SpecFile {
    kind: String,
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu: Option<BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    filter: Option<FilterFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    a: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    band: Option<[usize; 2]>,
}

impl<T: Real> OperatorSpec<T> {
    /// Serializes to the JSON schema
    /// `{ "kind", "n", "lambda"?, "mu"?, "filter"?, "a"?, "band"? }`.
    pub fn to_json(&self) -> Result<String> {
        let mut file = SpecFile {
            kind: self.kind_name().to_string(),
            n: self.degree,
            lambda: None,
            mu: None,
            filter: None,
            a: None,
            band: None,
        };
        match &self.kind {
            OperatorKind::Hyper => {}
            OperatorKind::Lasso { lambda, penalties } => {
                file.lambda = Some(lambda.as_f64());
                if !penalties.overrides().is_empty() {
                    file.mu = Some(
                        penalties
                            .overrides()
                            .iter()
                            .map(|(&(l, k), &v)| (format!("{l},{k}"), v.as_f64()))
                            .collect(),
                    );
                }
            }
            OperatorKind::Hard { lambda } => file.lambda = Some(lambda.as_f64()),
            OperatorKind::Filtered { filter } => match filter {
                Filter::Custom { .. } => {
                    return Err(Error::InvalidSpec(
                        "custom filters have no file form".to_string(),
                    ))
                }
                _ => {
                    file.filter = Some(FilterFile {
                        kind: filter.name().to_string(),
                        s: filter.support_onset().as_f64(),
                    })
                }
            },
            OperatorKind::Generalized { weights } => {
                file.a = Some(weights.iter().map(|w| w.as_f64()).collect());
            }
            OperatorKind::PartialSum { low, high } => file.band = Some([*low, *high]),
        }
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SpecFile = serde_json::from_str(text)?;
        let n = file.n;
        match file.kind.as_str() {
            "hyper" => Ok(Self::hyper(n)),
            "lasso" => {
                let lambda = file.lambda.ok_or_else(|| {
                    Error::InvalidSpec("lasso needs a lambda field".to_string())
                })?;
                if lambda < 0.0 {
                    return Err(Error::InvalidSpec("lambda must be >= 0".to_string()));
                }
                let penalties = match file.mu {
                    None => PenaltyWeights::uniform(),
                    Some(map) => {
                        let mut overrides = BTreeMap::new();
                        for (key, v) in map {
                            let parts: Vec<&str> = key.split(',').collect();
                            if parts.len() != 2 {
                                return Err(Error::InvalidSpec(format!(
                                    "penalty key '{key}' is not of the form 'l,k'"
                                )));
                            }
                            let l: usize = parts[0].trim().parse().map_err(|_| {
                                Error::InvalidSpec(format!("bad penalty key '{key}'"))
                            })?;
                            let k: usize = parts[1].trim().parse().map_err(|_| {
                                Error::InvalidSpec(format!("bad penalty key '{key}'"))
                            })?;
                            overrides.insert((l, k), T::of(v));
                        }
                        PenaltyWeights::with_overrides(overrides)?
                    }
                };
                Ok(Self::lasso_weighted(n, T::of(lambda), penalties))
            }
            "hard" => {
                let lambda = file.lambda.ok_or_else(|| {
                    Error::InvalidSpec("hard needs a lambda field".to_string())
                })?;
                if lambda < 0.0 {
                    return Err(Error::InvalidSpec("lambda must be >= 0".to_string()));
                }
                Ok(Self::hard(n, T::of(lambda)))
            }
            "filtered" => {
                let ff = file.filter.ok_or_else(|| {
                    Error::InvalidSpec("filtered needs a filter field".to_string())
                })?;
                let filter = match ff.kind.as_str() {
                    "h1" => Filter::<T>::H1,
                    "h2" => Filter::<T>::H2,
                    other => {
                        return Err(Error::InvalidSpec(format!(
                            "unknown filter kind '{other}'"
                        )))
                    }
                };
                let canonical = filter.support_onset().as_f64();
                if (ff.s - canonical).abs() > 1e-12 {
                    return Err(Error::InvalidSpec(format!(
                        "filter '{}' has onset {}, file says {}",
                        ff.kind, canonical, ff.s
                    )));
                }
                Ok(Self::filtered(n, filter))
            }
            "generalized" => {
                let a = file.a.ok_or_else(|| {
                    Error::InvalidSpec("generalized needs an 'a' field".to_string())
                })?;
                Self::generalized(n, a.into_iter().map(T::of).collect())
            }
            "partial_sum" => {
                let band = file.band.ok_or_else(|| {
                    Error::InvalidSpec("partial_sum needs a band field".to_string())
                })?;
                Self::partial_sum(n, band[0], band[1])
            }
            other => Err(Error::InvalidSpec(format!("unknown kind '{other}'"))),
        }
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }
}
