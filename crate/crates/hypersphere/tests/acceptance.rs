//! Acceptance suite: every numbered criterion below runs as its own test
//! and prints one PASS/FAIL line (visible with `--nocapture`). Criterion 12
//! (byte-identical verify runs) lives in the CLI crate, next to the binary
//! it exercises.

use hypersphere::algebra::{
    self, CoeffProjectionOp, ComposedOp, HomomorphismCase, HyperOperator, Tolerances,
};
use hypersphere::basis::{eval_harmonics_upto, kernel_e, kernel_g, HarmonicIndex, SpherePoint};
use hypersphere::coefficients::{max_abs_diff, CoefficientVector};
use hypersphere::numeric::KahanSum;
use hypersphere::operators::{
    apply, discrete_inner, semi_norm, sup_norm_estimate, Filter, OperatorSpec,
};
use hypersphere::quadrature::{build_rule, verify_exactness, QuadratureRule};
use hypersphere::testfns::{default_corpus, named_function, random_polynomial, TestFunction};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn criterion(number: u32, description: &str, pass: bool, detail: String) {
    println!(
        "criterion {number:02} [{}] {description} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {number} failed: {description}: {detail}");
}

fn setup(n: usize) -> (QuadratureRule<f64>, Vec<TestFunction<f64>>) {
    let rule = build_rule::<f64>(n).unwrap();
    let corpus = default_corpus::<f64>(&rule, 42).unwrap();
    (rule, corpus)
}

fn random_point(rng: &mut ChaCha8Rng) -> SpherePoint<f64> {
    loop {
        let v = vec![
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
        ];
        let n2: f64 = v.iter().map(|x| x * x).sum();
        if n2 > 1e-3 {
            return SpherePoint::from_unnormalized(v);
        }
    }
}

#[test]
fn criterion_01_quadrature_certification() {
    let mut worst = 0.0f64;
    let mut all_pass = true;
    for n in 0..=20usize {
        let rule = build_rule::<f64>(n).unwrap();
        let report = verify_exactness(&rule, 2 * n).unwrap();
        worst = worst.max(report.residual_max);
        all_pass &= report.pass && report.residual_max <= 1e-9;
    }
    criterion(
        1,
        "rules certify their design exactness for n = 0..=20",
        all_pass,
        format!("worst residual {worst:.3e}"),
    );
}

#[test]
fn criterion_02_addition_theorem_and_kernel_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_add = 0.0f64;
    for _ in 0..200 {
        let x = random_point(&mut rng);
        let y = random_point(&mut rng);
        let yx = eval_harmonics_upto(25, &x).unwrap();
        let yy = eval_harmonics_upto(25, &y).unwrap();
        let t = x.dot(&y);
        for l in 0..=25usize {
            let mut acc = KahanSum::new();
            for i in 0..(2 * l + 1) {
                acc.add(yx[l * l + i] * yy[l * l + i]);
            }
            worst_add = worst_add.max((acc.value() - kernel_g(l, 2, t)).abs());
        }
    }
    let mut worst_kernel = 0.0f64;
    for d in 2..=4usize {
        for n in 0..=25usize {
            for i in 0..=32 {
                let t = -1.0 + 2.0 * i as f64 / 32.0;
                let e = kernel_e(n, d, t);
                let sum: f64 = (0..=n).map(|l| kernel_g(l, d, t)).sum();
                worst_kernel = worst_kernel.max((e - sum).abs() / e.abs().max(1.0));
            }
        }
    }
    criterion(
        2,
        "addition theorem and kernel partial-sum consistency",
        worst_add <= 1e-10 && worst_kernel <= 1e-9,
        format!("addition {worst_add:.3e}, kernels {worst_kernel:.3e}"),
    );
}

#[test]
fn criterion_03_projection_laws() {
    let tol = Tolerances::default();
    let mut pass = true;
    let mut detail = String::new();
    for n in [3usize, 6, 10] {
        let (rule, corpus) = setup(n);
        // Plain truncation: self-adjoint and idempotent.
        let hyper = algebra::projection_check(
            &OperatorSpec::<f64>::hyper(n),
            &corpus,
            &rule,
            &tol,
        )
        .unwrap();
        pass &= hyper.pass && hyper.residual_max <= 1e-9;
        // Weighted truncation: self-adjoint and commuting with truncation.
        let weights: Vec<f64> = (0..=n)
            .map(|l| Filter::<f64>::H1.eval(l as f64 / n as f64))
            .collect();
        let gen =
            algebra::generalized_commutation_check(&weights, n, &corpus, &rule, &tol).unwrap();
        pass &= gen.pass && gen.residual_max <= 1e-10;
        // Predicted violations with real witnesses.
        let filt = algebra::filtered_not_idempotent_check(
            n,
            Filter::H1,
            &corpus,
            &rule,
            &tol,
            11,
        )
        .unwrap();
        pass &= filt.pass && filt.residual_max >= 1e-3;
        let hard = algebra::thresholding_not_self_adjoint_check(
            &OperatorSpec::hard(n, 0.2),
            &corpus,
            &rule,
            &tol,
            13,
        )
        .unwrap();
        pass &= hard.pass && hard.residual_max >= 1e-3;
        let lasso_adj = algebra::thresholding_not_self_adjoint_check(
            &OperatorSpec::lasso(n, 0.2),
            &corpus,
            &rule,
            &tol,
            17,
        )
        .unwrap();
        pass &= lasso_adj.pass && lasso_adj.residual_max >= 1e-3;
        let lasso_idem =
            algebra::lasso_not_idempotent_check(n, 0.2, &corpus, &rule, &tol, 19).unwrap();
        pass &= lasso_idem.pass && lasso_idem.residual_max >= 1e-3;
        detail.push_str(&format!(
            "n={n}: hyper {:.1e}, gen {:.1e}, viol({:.1e},{:.1e},{:.1e},{:.1e}); ",
            hyper.residual_max,
            gen.residual_max,
            filt.residual_max,
            hard.residual_max,
            lasso_adj.residual_max,
            lasso_idem.residual_max
        ));
    }
    criterion(3, "projection laws and predicted violations", pass, detail);
}

#[test]
fn criterion_04_semigroup_membership() {
    let tol = Tolerances::default();
    let mut pass = true;
    let mut detail = String::new();
    for n in [3usize, 6, 10] {
        let (rule, corpus) = setup(n);
        for spec in [OperatorSpec::<f64>::hyper(n), OperatorSpec::hard(n, 0.2)] {
            let mut worst = 0.0f64;
            for tf in &corpus {
                let ff = discrete_inner(tf.function(), tf.function(), &rule).unwrap();
                if ff <= 1e-14 {
                    continue;
                }
                let r = algebra::pythagorean_residual(&spec, tf.function(), &rule).unwrap();
                worst = worst.max(r / ff);
            }
            pass &= worst <= 1e-9;
            detail.push_str(&format!("{} {:.1e}; ", spec.kind_name(), worst));
        }
        for spec in [
            OperatorSpec::<f64>::filtered(n, Filter::H1),
            OperatorSpec::lasso(n, 0.2),
        ] {
            let report = algebra::pythagorean_check(&spec, &corpus, &rule, &tol, 23).unwrap();
            pass &= report.pass && report.expect_violation && report.residual_max >= 1e-4;
            detail.push_str(&format!("{} viol {:.1e}; ", spec.kind_name(), report.residual_max));
        }
    }
    criterion(
        4,
        "Pythagorean identity holds for the family and fails for filtered/lasso",
        pass,
        detail,
    );
}

#[test]
fn criterion_05_best_approximation() {
    let tol = Tolerances::default();
    let (rule, _) = setup(6);
    let f = named_function::<f64>("franke_sphere").unwrap();
    let report =
        algebra::best_approx_check(f.function(), 6, &rule, 500, 29, &tol).unwrap();
    criterion(
        5,
        "truncation is the weighted least-squares optimum over 500 perturbations",
        report.pass && report.residual_max <= 1e-9,
        format!("residual {:.3e}", report.residual_max),
    );
}

#[test]
fn criterion_06_norm_bounds_and_norm_one() {
    let tol = Tolerances::default();
    let mut pass = true;
    let mut detail = String::new();
    for n in [3usize, 6, 10] {
        let (rule, corpus) = setup(n);
        for spec in [OperatorSpec::<f64>::hyper(n), OperatorSpec::hard(n, 0.2)] {
            let report = algebra::norm_bound_check(&spec, &corpus, &rule, &tol).unwrap();
            pass &= report.pass;
            detail.push_str(&format!("{} {:.1e}; ", spec.kind_name(), report.residual_max));
        }
        let norm_one = algebra::norm_one_check::<f64>(n, &rule, &tol, 50, 31).unwrap();
        pass &= norm_one.pass && norm_one.residual_max <= 1e-10;
        detail.push_str(&format!("norm-one {:.1e}; ", norm_one.residual_max));
    }
    criterion(
        6,
        "quadratic-form identity, norm bound, and norm-one on polynomials",
        pass,
        detail,
    );
}

#[test]
fn criterion_07_product_sum_difference() {
    let tol = Tolerances::default();
    let mut pass = true;
    let mut detail = String::new();
    for (n, m) in [(3usize, 6usize), (4, 10)] {
        let rule = build_rule::<f64>(m).unwrap();
        let corpus: Vec<TestFunction<f64>> = (0..12)
            .map(|i| {
                hypersphere::testfns::random_polynomial_scaled::<f64>(m, 300 + i, 2.0)
                    .unwrap()
                    .1
            })
            .collect();

        // Product, commuting direction: nested truncations.
        let a = OperatorSpec::<f64>::hyper(n);
        let b = OperatorSpec::<f64>::hyper(m);
        let commuting =
            algebra::product_projection_check(&a, &b, &corpus, &rule, &tol).unwrap();
        pass &= commuting.pass && !commuting.expect_violation && commuting.residual_max <= 1e-9;

        // Product, non-commuting direction: projections onto overlapping
        // non-nested coefficient lines.
        let p1 = CoeffProjectionOp::<f64>::onto_index(2, HarmonicIndex::new(1, 1)).unwrap();
        let mut mixed = CoefficientVector::<f64>::zeros(2, 2).unwrap();
        mixed.set(HarmonicIndex::new(1, 1), 1.0);
        mixed.set(HarmonicIndex::new(1, 2), 1.0);
        let p2 = CoeffProjectionOp::<f64>::new(2, vec![mixed], "proj(mixed)").unwrap();
        let clashing =
            algebra::product_projection_check(&p1, &p2, &corpus, &rule, &tol).unwrap();
        pass &= clashing.pass && clashing.expect_violation && clashing.residual_max >= 1e-3;

        // Sum, orthogonal direction: truncation plus the complementary band
        // acts as the larger truncation.
        let band = OperatorSpec::<f64>::partial_sum(m, n + 1, m).unwrap();
        let orthogonal =
            algebra::sum_projection_check(&a, &band, &corpus, &rule, &tol).unwrap();
        pass &= orthogonal.pass && !orthogonal.expect_violation;
        let sum_op = hypersphere::algebra::SumOp::new(&a, &band);
        let full = OperatorSpec::<f64>::hyper(m);
        let mut sum_vs_full = 0.0f64;
        for tf in &corpus {
            let d = max_abs_diff(
                &sum_op.apply_op(tf.function(), &rule).unwrap(),
                &full.apply_op(tf.function(), &rule).unwrap(),
            )
            .unwrap();
            sum_vs_full = sum_vs_full.max(d);
        }
        pass &= sum_vs_full <= 1e-9;

        // Sum, overlapping direction: doubling a projection fails.
        let overlapping =
            algebra::sum_projection_check(&a, &a, &corpus, &rule, &tol).unwrap();
        pass &= overlapping.pass && overlapping.expect_violation && overlapping.residual_max >= 1e-3;

        // Difference, suboperator direction, including the band identity.
        let nested =
            algebra::difference_projection_check(&a, &b, &corpus, &rule, &tol).unwrap();
        pass &= nested.pass && !nested.expect_violation;
        let diff_op = hypersphere::algebra::DiffOp::new(&b, &a);
        let mut diff_vs_band = 0.0f64;
        for tf in &corpus {
            let d = max_abs_diff(
                &diff_op.apply_op(tf.function(), &rule).unwrap(),
                &band.apply_op(tf.function(), &rule).unwrap(),
            )
            .unwrap();
            diff_vs_band = diff_vs_band.max(d);
        }
        pass &= diff_vs_band <= 1e-9;

        // Difference, reversed roles: not a suboperator, projection fails.
        let reversed =
            algebra::difference_projection_check(&b, &a, &corpus, &rule, &tol).unwrap();
        pass &= reversed.pass && reversed.expect_violation && reversed.residual_max >= 1e-3;

        detail.push_str(&format!(
            "(n,m)=({n},{m}): prod {:.1e}/{:.1e}, sum {:.1e}/{:.1e} band {:.1e}, diff {:.1e}/{:.1e} band {:.1e}; ",
            commuting.residual_max,
            clashing.residual_max,
            orthogonal.residual_max,
            overlapping.residual_max,
            sum_vs_full,
            nested.residual_max,
            reversed.residual_max,
            diff_vs_band
        ));
    }
    criterion(
        7,
        "product/sum/difference laws hold and fail in the predicted directions",
        pass,
        detail,
    );
}

#[test]
fn criterion_08_composition_tables_and_minimality() {
    let tol = Tolerances::default();
    let mut pass = true;
    let mut detail = String::new();
    for (m, n) in [(7usize, 4usize), (3, 6), (5, 5)] {
        let top = m.max(n);
        let rule = build_rule::<f64>(top).unwrap();
        let corpus: Vec<TestFunction<f64>> = (0..20)
            .map(|i| {
                hypersphere::testfns::random_polynomial_scaled::<f64>(top, 400 + i, 2.0)
                    .unwrap()
                    .1
            })
            .collect();
        for lambda in [0.05, 0.2, 1.0] {
            let report =
                algebra::ideal_composition_check(m, n, lambda, &corpus, &rule, &tol).unwrap();
            pass &= report.pass && report.residual_max <= 1e-10;
            detail.push_str(&format!(
                "({m},{n},{lambda}) {:.1e}; ",
                report.residual_max
            ));
        }
    }
    for k in [1usize, 2, 4] {
        let rule = build_rule::<f64>(k + 1).unwrap();
        let corpus: Vec<TestFunction<f64>> = (0..20)
            .map(|i| {
                hypersphere::testfns::random_polynomial_scaled::<f64>(k + 1, 500 + i, 2.0)
                    .unwrap()
                    .1
            })
            .collect();
        let report =
            algebra::minimality_witness(k, k + 2, 0.2, &corpus, &rule, &tol).unwrap();
        pass &= report.pass;
        detail.push_str(&format!("min k={k} {:.1e}; ", report.residual_max));
    }
    criterion(
        8,
        "composition tables collapse to the minimum degree; minimality witness confirmed",
        pass,
        detail,
    );
}

#[test]
fn criterion_09_homomorphism() {
    let tol = Tolerances::default();
    let n = 10usize;
    let rule = build_rule::<f64>(n).unwrap();
    let corpus: Vec<TestFunction<f64>> = (0..20)
        .map(|i| {
            hypersphere::testfns::random_polynomial_scaled::<f64>(n, 600 + i, 2.0)
                .unwrap()
                .1
        })
        .collect();
    let mut pass = true;
    let mut detail = String::new();
    for case in [
        HomomorphismCase::HyperHyper,
        HomomorphismCase::HyperHard,
        HomomorphismCase::HardHard,
    ] {
        let report =
            algebra::homomorphism_check(n, case, &[2, 5, 8], 0.2, &corpus, &rule, &tol)
                .unwrap();
        pass &= report.pass && report.residual_max <= 1e-10;
        detail.push_str(&format!("{} {:.1e}; ", case.tag(), report.residual_max));
    }
    criterion(
        9,
        "truncation is multiplicative across all three pair families",
        pass,
        detail,
    );
}

#[test]
fn criterion_10_seminorm_degeneracy() {
    let mut pass = true;
    let mut detail = String::new();
    for n in [0usize, 2, 5] {
        let rule = build_rule::<f64>(n).unwrap();
        let witness = algebra::vanishing_witness::<f64>(n, &rule).unwrap();
        let null = semi_norm(witness.function(), &rule).unwrap();
        let sup = sup_norm_estimate(witness.function(), &rule).unwrap();
        pass &= null <= 1e-12 && sup >= 0.1;
        detail.push_str(&format!("n={n}: null {null:.1e}, sup {sup:.3}; "));
    }
    criterion(
        10,
        "the vanishing witness is null at the nodes yet visible on the grid",
        pass,
        detail,
    );
}

#[test]
fn criterion_11_membership_scan() {
    let mut pass = true;
    let mut detail = String::new();
    for n in [3usize, 6, 10] {
        let (rule, corpus) = setup(n);
        let weights: Vec<f64> = (0..=n)
            .map(|l| Filter::<f64>::H1.eval(l as f64 / n as f64))
            .collect();
        let specs = vec![
            OperatorSpec::<f64>::hyper(n),
            OperatorSpec::lasso(n, 0.2),
            OperatorSpec::hard(n, 0.2),
            OperatorSpec::filtered(n, Filter::H1),
            OperatorSpec::generalized(n, weights).unwrap(),
        ];
        for tf in &corpus {
            let sup = sup_norm_estimate(tf.function(), &rule).unwrap();
            if sup <= 1e-14 {
                continue;
            }
            let mut hyper_ratio = 0.0f64;
            for spec in &specs {
                let ratio =
                    apply(spec, tf.function(), &rule).unwrap().l2_norm() / sup;
                pass &= ratio.is_finite();
                match spec.kind_name() {
                    "hyper" => hyper_ratio = ratio,
                    "lasso" | "hard" => pass &= ratio <= hyper_ratio + 1e-9,
                    _ => {}
                }
            }
        }
        let scan = hypersphere::operators::hc_membership_scan(
            &OperatorSpec::<f64>::hyper(n),
            &corpus,
            &rule,
            None,
        )
        .unwrap();
        pass &= scan.pass;
        detail.push_str(&format!("n={n} worst ratio {:.3}; ", scan.residual_max));
    }
    criterion(
        11,
        "membership ratios are finite, bounded, and dominated by plain truncation",
        pass,
        detail,
    );
}

/// A composed operator sanity check used by several criteria above; kept
/// here so a regression in the composition path fails loudly in this
/// suite too.
#[test]
fn composition_collapses_across_degrees() {
    let rule = build_rule::<f64>(6).unwrap();
    let (_, tf) = random_polynomial::<f64>(6, 9).unwrap();
    let small = OperatorSpec::<f64>::hyper(3);
    let large = OperatorSpec::<f64>::hyper(6);
    let ab = ComposedOp::new(&small, &large)
        .apply_op(tf.function(), &rule)
        .unwrap();
    let ba = ComposedOp::new(&large, &small)
        .apply_op(tf.function(), &rule)
        .unwrap();
    let direct = small.apply_op(tf.function(), &rule).unwrap();
    assert!(max_abs_diff(&ab, &ba).unwrap() <= 1e-11);
    assert!(max_abs_diff(&ab, &direct).unwrap() <= 1e-11);
}
