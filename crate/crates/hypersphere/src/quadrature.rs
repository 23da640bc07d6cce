//! Positive-weight quadrature rules on S^2 with certified polynomial
//! exactness; the substrate of the discrete inner product.
//!
//! The rule family is a tensor product of Gauss–Legendre in the polar
//! cosine with an equiangular azimuth grid. For a target degree n the rule
//! uses n + 1 polar nodes and 2n + 2 azimuths (even, so the node set is
//! symmetric under phi -> phi + pi), which gives exactness 2n with
//! N = (n + 1)(2n + 2) nodes.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::basis::{eval_harmonics_upto, surface_area, HarmonicIndex, SpherePoint};
use crate::error::{Error, Result};
use crate::numeric::{Fnv1a, KahanSum};
use crate::report::{CheckReport, RuleDescriptor};
use crate::scalar::Real;
use crate::special::gauss_legendre;

/// Absolute residual allowed on harmonic integrals during certification.
pub const CERTIFICATION_TOL: f64 = 1e-9;

/// Quadrature rule on S^d: positive weights, nodes, and the certified
/// polynomial exactness degree. Immutable after construction.
#[derive(Debug, Clone)]
pub struct QuadratureRule<T> {
    nodes: Vec<SpherePoint<T>>,
    weights: Vec<T>,
    exactness: usize,
    dim_d: usize,
    fingerprint: u64,
    /// Polar factor nodes when the rule was built as a tensor product;
    /// drives witness constructions that need the rule's structure.
    polar_nodes: Option<Arc<Vec<T>>>,
}

impl<T: Real> QuadratureRule<T> {
    pub fn nodes(&self) -> &[SpherePoint<T>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn exactness(&self) -> usize {
        self.exactness
    }

    pub fn dim_d(&self) -> usize {
        self.dim_d
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn fingerprint_hex(&self) -> String {
        format!("{:016x}", self.fingerprint)
    }

    /// Gauss–Legendre polar nodes for rules built by [`build_rule`];
    /// `None` for rules of unknown provenance (for example loaded files).
    pub fn polar_nodes(&self) -> Option<&[T]> {
        self.polar_nodes.as_deref().map(|v| v.as_slice())
    }

    pub fn descriptor(&self) -> RuleDescriptor {
        RuleDescriptor {
            n: self.exactness / 2,
            exactness: self.exactness,
            fingerprint: self.fingerprint_hex(),
        }
    }

    fn compute_fingerprint(
        dim_d: usize,
        exactness: usize,
        nodes: &[SpherePoint<T>],
        weights: &[T],
    ) -> u64 {
        let mut h = Fnv1a::new();
        h.write_u64(dim_d as u64);
        h.write_u64(exactness as u64);
        h.write_u64(nodes.len() as u64);
        for p in nodes {
            for &c in p.coords() {
                h.write_f64(c.as_f64());
            }
        }
        for &w in weights {
            h.write_f64(w.as_f64());
        }
        h.finish()
    }

    #[allow(clippy::neg_cmp_op_on_partial_ord)] // negated forms reject NaN
    fn validate(&self) -> Result<()> {
        if self.nodes.len() != self.weights.len() {
            return Err(Error::InvalidRule(
                "node/weight length mismatch".to_string(),
            ));
        }
        if self.weights.iter().any(|&w| !(w > T::zero())) {
            return Err(Error::InvalidRule("weights must be positive".to_string()));
        }
        let total = crate::numeric::kahan_sum(self.weights.iter().copied());
        let omega = surface_area::<T>(self.dim_d);
        if (total - omega).abs() > T::of(1e-10).max(T::epsilon() * T::of_usize(64 * self.nodes.len())) {
            return Err(Error::InvalidRule(format!(
                "weight sum {} differs from the sphere area {}",
                total.as_f64(),
                omega.as_f64()
            )));
        }
        for p in &self.nodes {
            if p.dim_d() != self.dim_d {
                return Err(Error::InvalidRule(
                    "node dimension mismatch".to_string(),
                ));
            }
        }
        Ok(())
    }
}

/// Builds the tensor-product rule on S^2 with exactness at least 2n and
/// certifies it. Two calls with the same n produce bit-identical rules.
pub fn build_rule<T: Real>(n: usize) -> Result<QuadratureRule<T>> {
    let polar = gauss_legendre::<T>(n + 1)?;
    let n_phi = 2 * n + 2;
    let phi_weight = T::of(2.0) * T::PI() / T::of_usize(n_phi);
    let mut nodes = Vec::with_capacity((n + 1) * n_phi);
    let mut weights = Vec::with_capacity((n + 1) * n_phi);
    for (&t, &wt) in polar.nodes().iter().zip(polar.weights()) {
        for j in 0..n_phi {
            let phi = T::of(2.0) * T::PI() * T::of_usize(j) / T::of_usize(n_phi);
            nodes.push(SpherePoint::from_polar(t, phi));
            weights.push(phi_weight * wt);
        }
    }
    let fingerprint = QuadratureRule::compute_fingerprint(2, 2 * n, &nodes, &weights);
    let rule = QuadratureRule {
        nodes,
        weights,
        exactness: 2 * n,
        dim_d: 2,
        fingerprint,
        polar_nodes: Some(Arc::new(polar.nodes().to_vec())),
    };
    rule.validate()?;
    let report = verify_exactness(&rule, 2 * n)?;
    if !report.pass {
        return Err(Error::InvalidRule(format!(
            "certification failed at degree {} with residual {:e}",
            2 * n,
            report.residual_max
        )));
    }
    Ok(rule)
}

/// Checks that the rule integrates every spherical harmonic of degree at
/// most `degree` to its exact value (sqrt(omega_d) for the constant, zero
/// otherwise). Returns the worst residual and the index achieving it.
pub fn verify_exactness<T: Real>(
    rule: &QuadratureRule<T>,
    degree: usize,
) -> Result<CheckReport> {
    if rule.dim_d != 2 {
        return Err(Error::UnsupportedDimension { dim_d: rule.dim_d });
    }
    let count = (degree + 1) * (degree + 1);
    let mut sums = vec![KahanSum::<T>::new(); count];
    for (p, &w) in rule.nodes.iter().zip(&rule.weights) {
        let table = eval_harmonics_upto(degree, p)?;
        for (acc, &y) in sums.iter_mut().zip(&table) {
            acc.add(w * y);
        }
    }
    let sqrt_omega = surface_area::<T>(2).sqrt();
    let mut worst = T::zero();
    let mut worst_index = HarmonicIndex::new(0, 1);
    for l in 0..=degree {
        for k in 1..=(2 * l + 1) {
            let got = sums[l * l + k - 1].value();
            let expected = if l == 0 { sqrt_omega } else { T::zero() };
            let residual = (got - expected).abs();
            if residual > worst {
                worst = residual;
                worst_index = HarmonicIndex::new(l, k);
            }
        }
    }
    let report = CheckReport::holds(
        "quadrature.exactness",
        worst.as_f64(),
        CERTIFICATION_TOL,
        rule.descriptor(),
    )
    .with_samples(count as u64)
    .with_witness(serde_json::json!({
        "worst_harmonic": { "l": worst_index.degree, "k": worst_index.k },
        "checked_degree": degree,
    }));
    Ok(report)
}

/// Applies the rule to `f`: the weighted node sum in fixed order with
/// compensated accumulation. A non-finite value at a node is an error
/// naming the node.
pub fn integrate<T: Real>(
    rule: &QuadratureRule<T>,
    mut f: impl FnMut(&SpherePoint<T>) -> T,
) -> Result<T> {
    let mut acc = KahanSum::new();
    for (j, (p, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        let v = f(p);
        if !v.is_finite() {
            return Err(Error::NonFiniteSample { node: j });
        }
        acc.add(w * v);
    }
    Ok(acc.value())
}

#[derive(Serialize, Deserialize)]
struct RuleFile {
    d: usize,
    exactness: usize,
    nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl<T: Real> QuadratureRule<T> {
    /// Serializes to the on-disk JSON schema
    /// `{ "d", "exactness", "nodes": [[x,y,z],...], "weights": [...] }`.
    /// The encoding is value-exact for `f64` scalars.
    pub fn to_json(&self) -> Result<String> {
        let file = RuleFile {
            d: self.dim_d,
            exactness: self.exactness,
            nodes: self
                .nodes
                .iter()
                .map(|p| p.coords().iter().map(|&c| c.as_f64()).collect())
                .collect(),
            weights: self.weights.iter().map(|&w| w.as_f64()).collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: RuleFile = serde_json::from_str(text)?;
        if file.nodes.len() != file.weights.len() {
            return Err(Error::Format(
                "node and weight counts differ".to_string(),
            ));
        }
        let mut nodes = Vec::with_capacity(file.nodes.len());
        for coords in &file.nodes {
            if coords.len() != file.d + 1 {
                return Err(Error::Format(format!(
                    "node has {} coordinates, expected {}",
                    coords.len(),
                    file.d + 1
                )));
            }
            nodes.push(SpherePoint::new(
                coords.iter().map(|&c| T::of(c)).collect(),
            )?);
        }
        let weights: Vec<T> = file.weights.iter().map(|&w| T::of(w)).collect();
        let fingerprint =
            QuadratureRule::compute_fingerprint(file.d, file.exactness, &nodes, &weights);
        let rule = QuadratureRule {
            nodes,
            weights,
            exactness: file.exactness,
            dim_d: file.d,
            fingerprint,
            polar_nodes: None,
        };
        rule.validate()?;
        Ok(rule)
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
