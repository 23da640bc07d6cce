//! Deterministic corpus of functions on S^2 feeding the checkers and the
//! command-line experiments: random polynomials, a few named smooth and
//! merely-continuous functions, and noisy node-aligned variants.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::basis::SpherePoint;
use crate::coefficients::CoefficientVector;
use crate::error::{Error, Result};
use crate::numeric::{derive_seed, Fnv1a};
use crate::operators::SampledFunction;
use crate::quadrature::QuadratureRule;
use crate::scalar::Real;
use crate::special::gauss_legendre;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothness {
    Polynomial,
    Smooth,
    C0,
    Noisy,
}

impl Smoothness {
    pub fn tag(&self) -> &'static str {
        match self {
            Smoothness::Polynomial => "polynomial",
            Smoothness::Smooth => "smooth",
            Smoothness::C0 => "c0",
            Smoothness::Noisy => "noisy",
        }
    }
}

/// A catalogued test function. Evaluation is deterministic given the name
/// and seed.
#[derive(Debug, Clone)]
pub struct TestFunction<T> {
    name: String,
    smoothness: Smoothness,
    seed: u64,
    f: SampledFunction<T>,
}

impl<T: Real> TestFunction<T> {
    pub fn from_parts(
        name: impl Into<String>,
        smoothness: Smoothness,
        seed: u64,
        f: SampledFunction<T>,
    ) -> Self {
        TestFunction {
            name: name.into(),
            smoothness,
            seed,
            f,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn function(&self) -> &SampledFunction<T> {
        &self.f
    }
}

/// Random polynomial of degree `n` with coefficients drawn i.i.d. uniform
/// on [-1, 1] from a generator seeded by `seed`; returns both the
/// generating coefficients and the synthesized function.
pub fn random_polynomial<T: Real>(
    n: usize,
    seed: u64,
) -> Result<(CoefficientVector<T>, TestFunction<T>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = CoefficientVector::<T>::zeros(2, n)?;
    let values: Vec<T> = (0..coeffs.len())
        .map(|_| T::of(rng.random_range(-1.0..=1.0)))
        .collect();
    coeffs = CoefficientVector::from_values(2, n, values)?;
    let f = SampledFunction::from_coefficients(coeffs.clone());
    Ok((
        coeffs,
        TestFunction::from_parts(
            format!("random_poly_deg{n}_seed{seed}"),
            Smoothness::Polynomial,
            seed,
            f,
        ),
    ))
}

/// Random polynomial with coefficients uniform on [-amplitude, amplitude];
/// used by the operator-equality fingerprint corpus, where coefficients
/// must be able to survive thresholding at every lambda in play.
pub fn random_polynomial_scaled<T: Real>(
    n: usize,
    seed: u64,
    amplitude: f64,
) -> Result<(CoefficientVector<T>, TestFunction<T>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<T> = (0..crate::basis::space_dimension(2, n)?)
        .map(|_| T::of(rng.random_range(-amplitude..=amplitude)))
        .collect();
    let coeffs = CoefficientVector::from_values(2, n, values)?;
    let f = SampledFunction::from_coefficients(coeffs.clone());
    Ok((
        coeffs,
        TestFunction::from_parts(
            format!("fingerprint_poly_deg{n}_seed{seed}"),
            Smoothness::Polynomial,
            seed,
            f,
        ),
    ))
}

/// The polynomial `prod_j (z - t_j) / prod_j (1 - t_j)` over the
/// Gauss-Legendre nodes `t_j` of the (n+1)-point rule: a degree n + 1 zonal
/// polynomial that vanishes at every polar node of the degree-n tensor rule
/// while being 1 at the north pole.
pub fn vanishing_polynomial<T: Real>(n: usize) -> Result<SampledFunction<T>> {
    let polar = gauss_legendre::<T>(n + 1)?;
    let nodes: Vec<T> = polar.nodes().to_vec();
    let mut scale = T::one();
    for &t in &nodes {
        scale *= T::one() - t;
    }
    Ok(SampledFunction::from_fn(move |x: &SpherePoint<T>| {
        let z = x.polar_cos();
        let mut acc = T::one();
        for &t in &nodes {
            acc *= z - t;
        }
        acc / scale
    }))
}

fn cap_center<T: Real>() -> SpherePoint<T> {
    SpherePoint::from_unnormalized(vec![T::one(), T::one(), T::one()])
}

fn bump_center<T: Real>() -> SpherePoint<T> {
    SpherePoint::from_unnormalized(vec![-T::one(), T::of(0.5), T::of(2.0)])
}

fn franke<T: Real>(p: &SpherePoint<T>) -> T {
    let c = p.coords();
    let (x, y, z) = (c[0], c[1], c[2]);
    let nine = T::of(9.0);
    let t1 = T::of(0.75)
        * (-((nine * x - T::of(2.0)).powi(2)
            + (nine * y - T::of(2.0)).powi(2)
            + (nine * z - T::of(2.0)).powi(2))
            / T::of(4.0))
        .exp();
    let t2 = T::of(0.75)
        * (-((nine * x + T::one()).powi(2)) / T::of(49.0)
            - (nine * y + T::one()) / T::of(10.0)
            - (nine * z + T::one()) / T::of(10.0))
        .exp();
    let t3 = T::of(0.5)
        * (-((nine * x - T::of(7.0)).powi(2)
            + (nine * y - T::of(3.0)).powi(2)
            + (nine * z - T::of(5.0)).powi(2))
            / T::of(4.0))
        .exp();
    let t4 = T::of(0.2)
        * (-((nine * x - T::of(4.0)).powi(2)
            + (nine * y - T::of(7.0)).powi(2)
            + (nine * z - T::of(5.0)).powi(2)))
        .exp();
    t1 + t2 + t3 - t4
}

/// Looks up a catalogued function by name. Available names: `const1`,
/// `cosine_cap`, `franke_sphere`, `gauss_bump`, `zonal_abs`, `equator_abs`,
/// `vanishing` (the degree-3 vanishing polynomial).
pub fn named_function<T: Real>(name: &str) -> Result<TestFunction<T>> {
    let tf = match name {
        "const1" => TestFunction::from_parts(
            "const1",
            Smoothness::Smooth,
            0,
            SampledFunction::constant(T::one()),
        ),
        "cosine_cap" => {
            let center = cap_center::<T>();
            let radius = T::PI() / T::of(3.0);
            TestFunction::from_parts(
                "cosine_cap",
                Smoothness::Smooth,
                0,
                SampledFunction::from_fn(move |x: &SpherePoint<T>| {
                    let t = x.dot(&center).min(T::one()).max(-T::one());
                    let r = t.acos();
                    if r >= radius {
                        T::zero()
                    } else {
                        (T::PI() / T::of(2.0) * r / radius).cos().powi(2)
                    }
                }),
            )
        }
        "franke_sphere" => TestFunction::from_parts(
            "franke_sphere",
            Smoothness::Smooth,
            0,
            SampledFunction::from_fn(|x: &SpherePoint<T>| franke(x)),
        ),
        "gauss_bump" => {
            let center = bump_center::<T>();
            TestFunction::from_parts(
                "gauss_bump",
                Smoothness::Smooth,
                0,
                SampledFunction::from_fn(move |x: &SpherePoint<T>| {
                    (-T::of(12.0) * (T::one() - x.dot(&center))).exp()
                }),
            )
        }
        "zonal_abs" => TestFunction::from_parts(
            "zonal_abs",
            Smoothness::C0,
            0,
            SampledFunction::from_fn(|x: &SpherePoint<T>| x.polar_cos().abs()),
        ),
        "equator_abs" => TestFunction::from_parts(
            "equator_abs",
            Smoothness::C0,
            0,
            SampledFunction::from_fn(|x: &SpherePoint<T>| x.coords()[0].abs()),
        ),
        "vanishing" => TestFunction::from_parts(
            "vanishing",
            Smoothness::Polynomial,
            0,
            vanishing_polynomial::<T>(3)?,
        ),
        other => return Err(Error::UnknownFunction(other.to_string())),
    };
    Ok(tf)
}

/// Adds i.i.d. Gaussian noise of standard deviation `sigma` at the rule's
/// nodes, producing node-aligned samples.
pub fn add_noise<T: Real>(
    f: &TestFunction<T>,
    sigma: T,
    rule: &QuadratureRule<T>,
    seed: u64,
) -> Result<TestFunction<T>> {
    assert!(sigma >= T::zero(), "noise level must be nonnegative");
    let clean = f.function().values_at_nodes(rule)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<T> = clean
        .iter()
        .map(|&v| {
            let g: f64 = rng.sample(StandardNormal);
            v + sigma * T::of(g)
        })
        .collect();
    Ok(TestFunction::from_parts(
        format!("{}+noise(sigma={},seed={seed})", f.name(), sigma.as_f64()),
        Smoothness::Noisy,
        seed,
        SampledFunction::from_samples(values, rule)?,
    ))
}

/// The default twenty-member corpus: eight random polynomials of degrees
/// 0..=7, four named smooth functions, two merely continuous ones, and six
/// noisy variants aligned to `rule`. Deterministic given `(rule, seed)`.
pub fn default_corpus<T: Real>(
    rule: &QuadratureRule<T>,
    seed: u64,
) -> Result<Vec<TestFunction<T>>> {
    let mut corpus = Vec::with_capacity(20);
    for degree in 0..=7usize {
        let (_, tf) = random_polynomial::<T>(degree, derive_seed(seed, degree as u64))?;
        corpus.push(tf);
    }
    for name in ["const1", "cosine_cap", "franke_sphere", "gauss_bump"] {
        corpus.push(named_function::<T>(name)?);
    }
    corpus.push(named_function::<T>("zonal_abs")?);
    corpus.push(named_function::<T>("equator_abs")?);
    let sigma = T::of(0.1);
    let noisy_sources = [
        corpus[10].clone(), // franke_sphere
        corpus[9].clone(),  // cosine_cap
        corpus[11].clone(), // gauss_bump
        corpus[12].clone(), // zonal_abs
        corpus[3].clone(),  // random degree 3
        corpus[5].clone(),  // random degree 5
    ];
    for (i, src) in noisy_sources.iter().enumerate() {
        corpus.push(add_noise(src, sigma, rule, derive_seed(seed, 100 + i as u64))?);
    }
    Ok(corpus)
}

/// Fingerprint of a corpus: hash of every member's values at the rule's
/// nodes, in corpus order.
pub fn corpus_fingerprint<T: Real>(
    corpus: &[TestFunction<T>],
    rule: &QuadratureRule<T>,
) -> Result<u64> {
    let mut h = Fnv1a::new();
    h.write_u64(corpus.len() as u64);
    for tf in corpus {
        h.write_bytes(tf.name().as_bytes());
        for v in tf.function().values_at_nodes(rule)? {
            h.write_f64(v.as_f64());
        }
    }
    Ok(h.finish())
}

/// Writes node-aligned samples as CSV with header `j,x,y,z,w,value`.
pub fn write_samples_csv<T: Real>(
    f: &SampledFunction<T>,
    rule: &QuadratureRule<T>,
    mut out: impl Write,
) -> Result<()> {
    let values = f.values_at_nodes(rule)?;
    writeln!(out, "j,x,y,z,w,value")?;
    for (j, (p, (&w, &v))) in rule
        .nodes()
        .iter()
        .zip(rule.weights().iter().zip(&values))
        .enumerate()
    {
        let c = p.coords();
        writeln!(
            out,
            "{j},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            c[0].as_f64(),
            c[1].as_f64(),
            c[2].as_f64(),
            w.as_f64(),
            v.as_f64()
        )?;
    }
    Ok(())
}

pub fn write_samples_csv_file<T: Real>(
    f: &SampledFunction<T>,
    rule: &QuadratureRule<T>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_samples_csv(f, rule, file)
}

/// Reads node-aligned samples written by [`write_samples_csv`], checking
/// that the node coordinates and weights match `rule`.
pub fn read_samples_csv<T: Real>(
    input: impl std::io::Read,
    rule: &QuadratureRule<T>,
) -> Result<SampledFunction<T>> {
    let reader = BufReader::new(input);
    let mut values = vec![T::zero(); rule.node_count()];
    let mut seen = vec![false; rule.node_count()];
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || (i == 0 && trimmed == "j,x,y,z,w,value") {
            continue;
        }
        let parts: Vec<&str> = trimmed.split(',').collect();
        if parts.len() != 6 {
            return Err(Error::Format(format!("bad samples row: {trimmed}")));
        }
        let j: usize = parts[0]
            .trim()
            .parse()
            .map_err(|_| Error::Format(format!("bad node index: {trimmed}")))?;
        if j >= rule.node_count() {
            return Err(Error::Format(format!(
                "node index {j} out of range for a rule with {} nodes",
                rule.node_count()
            )));
        }
        let mut nums = [0.0f64; 5];
        for (slot, part) in nums.iter_mut().zip(&parts[1..]) {
            *slot = part
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("bad number in row: {trimmed}")))?;
        }
        let node = rule.nodes()[j].coords();
        let tol = 1e-12;
        if (nums[0] - node[0].as_f64()).abs() > tol
            || (nums[1] - node[1].as_f64()).abs() > tol
            || (nums[2] - node[2].as_f64()).abs() > tol
            || (nums[3] - rule.weights()[j].as_f64()).abs() > tol
        {
            return Err(Error::Format(format!(
                "row {j} does not match the rule's node or weight"
            )));
        }
        values[j] = T::of(nums[4]);
        seen[j] = true;
    }
    if seen.iter().any(|&s| !s) {
        return Err(Error::Format("missing node rows in samples file".into()));
    }
    SampledFunction::from_samples(values, rule)
}

pub fn read_samples_csv_file<T: Real>(
    path: impl AsRef<Path>,
    rule: &QuadratureRule<T>,
) -> Result<SampledFunction<T>> {
    let file = std::fs::File::open(path)?;
    read_samples_csv(file, rule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::evaluation_grid;
    use crate::operators::{discrete_inner, semi_norm};
    use crate::quadrature::build_rule;

    #[test]
    fn random_polynomial_is_deterministic() {
        let (a, _) = random_polynomial::<f64>(5, 42).unwrap();
        let (b, _) = random_polynomial::<f64>(5, 42).unwrap();
        assert_eq!(a, b);
        let (c, _) = random_polynomial::<f64>(5, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn degree_zero_polynomial_is_constant() {
        let (coeffs, tf) = random_polynomial::<f64>(0, 1).unwrap();
        let p1 = SpherePoint::from_unnormalized(vec![1.0, 0.0, 0.2]);
        let p2 = SpherePoint::from_unnormalized(vec![-0.3, 2.0, 0.0]);
        let v1 = tf.function().eval(&p1).unwrap();
        let v2 = tf.function().eval(&p2).unwrap();
        assert!((v1 - v2).abs() < 1e-15);
        let expect = coeffs.values()[0] / (4.0 * std::f64::consts::PI).sqrt();
        assert!((v1 - expect).abs() < 1e-15);
    }

    #[test]
    fn named_function_catalogue() {
        let pole = SpherePoint::north_pole(2);
        let c1 = named_function::<f64>("const1").unwrap();
        assert_eq!(c1.function().eval(&pole).unwrap(), 1.0);
        let za = named_function::<f64>("zonal_abs").unwrap();
        assert_eq!(za.function().eval(&pole).unwrap(), 1.0);
        assert!(matches!(
            named_function::<f64>("nope"),
            Err(Error::UnknownFunction(_))
        ));
    }

    #[test]
    #[allow(clippy::excessive_precision)] // frozen 17-digit fixtures
    fn cosine_cap_regression_values() {
        // Frozen value table; guards the cap definition against drift.
        let cap = named_function::<f64>("cosine_cap").unwrap();
        let cases = [
            ([1.0, 1.0, 1.0], 1.0),
            ([1.0, 0.0, 0.0], 1.88747756753118411e-2),
            ([0.0, 0.0, 1.0], 1.88747756753118411e-2),
            ([0.5, 1.0, 0.8], 8.53485292462578649e-1),
            ([-1.0, -1.0, -1.0], 0.0),
        ];
        for (coords, expect) in cases {
            let p = SpherePoint::from_unnormalized(coords.to_vec());
            let got = cap.function().eval(&p).unwrap();
            assert!(
                (got - expect).abs() < 1e-15,
                "cap{coords:?} = {got:.17e}, expected {expect:.17e}"
            );
        }
    }

    #[test]
    fn corpus_fingerprint_frozen() {
        let rule = build_rule::<f64>(6).unwrap();
        let corpus = default_corpus::<f64>(&rule, 42).unwrap();
        assert_eq!(
            corpus_fingerprint(&corpus, &rule).unwrap(),
            0x753e883f2bf3a772
        );
    }

    #[test]
    fn cosine_cap_peaks_at_its_center() {
        let cap = named_function::<f64>("cosine_cap").unwrap();
        let center = cap_center::<f64>();
        let at_center = cap.function().eval(&center).unwrap();
        assert!((at_center - 1.0).abs() < 1e-12);
        for p in evaluation_grid::<f64>(20, 40) {
            let v = cap.function().eval(&p).unwrap();
            assert!((0.0..=1.0 + 1e-12).contains(&v));
            assert!(v <= at_center + 1e-12);
        }
        // Far side of the sphere is outside the cap.
        let far = SpherePoint::from_unnormalized(vec![-1.0, -1.0, -1.0]);
        assert_eq!(cap.function().eval(&far).unwrap(), 0.0);
    }

    #[test]
    fn noise_is_deterministic_and_vanishes_at_sigma_zero() {
        let rule = build_rule::<f64>(3).unwrap();
        let base = named_function::<f64>("franke_sphere").unwrap();
        let clean = base.function().values_at_nodes(&rule).unwrap();
        let a = add_noise(&base, 0.0, &rule, 5).unwrap();
        let av = a.function().values_at_nodes(&rule).unwrap();
        assert_eq!(av, clean);
        let b1 = add_noise(&base, 0.1, &rule, 5).unwrap();
        let b2 = add_noise(&base, 0.1, &rule, 5).unwrap();
        assert_eq!(
            b1.function().values_at_nodes(&rule).unwrap(),
            b2.function().values_at_nodes(&rule).unwrap()
        );
    }

    #[test]
    fn noise_energy_concentrates() {
        // Weighted noise energy is sigma^2 * omega_2 in expectation; with
        // N >= 500 nodes the seeded draw must land within twenty percent.
        let rule = build_rule::<f64>(15).unwrap();
        assert!(rule.node_count() >= 500);
        let base = named_function::<f64>("const1").unwrap();
        let sigma = 0.1;
        let noisy = add_noise(&base, sigma, &rule, 7).unwrap();
        let clean = base.function().clone();
        let noisy_fn = noisy.function().clone();
        let diff_vals: Vec<f64> = noisy_fn
            .values_at_nodes(&rule)
            .unwrap()
            .iter()
            .zip(clean.values_at_nodes(&rule).unwrap())
            .map(|(&a, b)| a - b)
            .collect();
        let diff = SampledFunction::from_samples(diff_vals, &rule).unwrap();
        let energy = semi_norm(&diff, &rule).unwrap().powi(2);
        let expect = sigma * sigma * 4.0 * std::f64::consts::PI;
        assert!(
            (energy - expect).abs() <= 0.2 * expect,
            "energy {energy} vs {expect}"
        );
    }

    #[test]
    fn corpus_has_twenty_members_and_is_deterministic() {
        let rule = build_rule::<f64>(6).unwrap();
        let corpus = default_corpus::<f64>(&rule, 42).unwrap();
        assert_eq!(corpus.len(), 20);
        let fp1 = corpus_fingerprint(&corpus, &rule).unwrap();
        let corpus2 = default_corpus::<f64>(&rule, 42).unwrap();
        let fp2 = corpus_fingerprint(&corpus2, &rule).unwrap();
        assert_eq!(fp1, fp2);
        let corpus3 = default_corpus::<f64>(&rule, 43).unwrap();
        assert_ne!(fp1, corpus_fingerprint(&corpus3, &rule).unwrap());
        // Composition: 8 polynomial + 4 smooth + 2 C0 + 6 noisy.
        let count = |s: Smoothness| corpus.iter().filter(|t| t.smoothness() == s).count();
        assert_eq!(count(Smoothness::Polynomial), 8);
        assert_eq!(count(Smoothness::Smooth), 4);
        assert_eq!(count(Smoothness::C0), 2);
        assert_eq!(count(Smoothness::Noisy), 6);
    }

    #[test]
    fn corpus_members_are_finite_on_the_grid() {
        let rule = build_rule::<f64>(4).unwrap();
        let corpus = default_corpus::<f64>(&rule, 42).unwrap();
        let grid = evaluation_grid::<f64>(80, 160);
        for tf in &corpus {
            match tf.function() {
                SampledFunction::Handle(_) => {
                    for p in &grid {
                        assert!(tf.function().eval(p).unwrap().is_finite());
                    }
                }
                SampledFunction::NodeAligned { .. } => {
                    for v in tf.function().values_at_nodes(&rule).unwrap() {
                        assert!(v.is_finite());
                    }
                }
            }
        }
    }

    #[test]
    fn vanishing_polynomial_is_null_at_nodes_but_not_identically() {
        let rule = build_rule::<f64>(2).unwrap();
        let f = vanishing_polynomial::<f64>(2).unwrap();
        assert!(semi_norm(&f, &rule).unwrap() <= 1e-12);
        let pole = SpherePoint::north_pole(2);
        assert!((f.eval(&pole).unwrap() - 1.0).abs() < 1e-12);
        // Orthogonal to everything in the discrete product.
        let g = named_function::<f64>("franke_sphere").unwrap();
        let ip = discrete_inner(&f, g.function(), &rule).unwrap();
        assert_eq!(ip, 0.0);
    }

    #[test]
    fn samples_csv_round_trip() {
        let rule = build_rule::<f64>(3).unwrap();
        let base = named_function::<f64>("gauss_bump").unwrap();
        let mut buf = Vec::new();
        write_samples_csv(base.function(), &rule, &mut buf).unwrap();
        let back = read_samples_csv::<f64>(buf.as_slice(), &rule).unwrap();
        assert_eq!(
            back.values_at_nodes(&rule).unwrap(),
            base.function().values_at_nodes(&rule).unwrap()
        );
        // A different rule is rejected.
        let other = build_rule::<f64>(4).unwrap();
        assert!(read_samples_csv::<f64>(buf.as_slice(), &other).is_err());
    }
}
