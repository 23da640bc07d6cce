use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;
use serde_json::json;

use hypersphere::algebra::{all_pass, run_suite, SuiteConfig};
use hypersphere::coefficients;
use hypersphere::operators::{
    analyze, apply_with, semi_norm, synthesize_at_nodes, ExactnessPolicy, Filter, OperatorSpec,
    SampledFunction,
};
use hypersphere::quadrature::{build_rule, verify_exactness, QuadratureRule};
use hypersphere::testfns;

use crate::Failure;

type R = f64;

fn version_string() -> String {
    format!("hypersphere-{}", env!("CARGO_PKG_VERSION"))
}

fn unix_timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn env_threads() -> Result<usize, Failure> {
    match std::env::var("HYPERSPHERE_THREADS") {
        Err(_) => Ok(1),
        Ok(v) => v
            .parse::<usize>()
            .map_err(|_| Failure::Config(format!("HYPERSPHERE_THREADS must be an integer, got '{v}'")))
            .map(|t| t.max(1)),
    }
}

fn env_tol_scale() -> Result<f64, Failure> {
    match std::env::var("HYPERSPHERE_TOL_SCALE") {
        Err(_) => Ok(1.0),
        Ok(v) => {
            let scale: f64 = v.parse().map_err(|_| {
                Failure::Config(format!("HYPERSPHERE_TOL_SCALE must be a number, got '{v}'"))
            })?;
            if scale <= 0.0 {
                return Err(Failure::Config(
                    "HYPERSPHERE_TOL_SCALE must be positive".to_string(),
                ));
            }
            Ok(scale)
        }
    }
}

fn write_output(path: Option<&Path>, contents: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, contents).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// rule
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct RuleArgs {
    /// Degree parameter; the built rule has exactness 2n.
    #[arg(long)]
    pub n: Option<usize>,
    /// Write the rule as JSON to this path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Re-certify an existing rule file instead of building one.
    #[arg(long)]
    pub verify: Option<PathBuf>,
    /// Exactness degree to certify with --verify (defaults to the file's
    /// declared exactness).
    #[arg(long)]
    pub degree: Option<usize>,
}

pub fn run_rule(args: RuleArgs) -> Result<(), Failure> {
    if let Some(path) = &args.verify {
        let rule = QuadratureRule::<R>::read_file(path)?;
        let degree = args.degree.unwrap_or_else(|| rule.exactness());
        let report = verify_exactness(&rule, degree)?;
        println!(
            "rule {}: N = {}, declared exactness = {}, certified at degree {} -> {} (residual {:.3e})",
            path.display(),
            rule.node_count(),
            rule.exactness(),
            degree,
            if report.pass { "pass" } else { "FAIL" },
            report.residual_max
        );
        if !report.pass {
            return Err(Failure::LawMismatch(vec![report.law_id]));
        }
        return Ok(());
    }
    let n = args
        .n
        .ok_or_else(|| Failure::Config("rule needs --n or --verify".to_string()))?;
    let rule = build_rule::<R>(n)?;
    let report = verify_exactness(&rule, 2 * n)?;
    println!(
        "built rule n = {n}: N = {} nodes, exactness = {}, certification residual {:.3e} ({})",
        rule.node_count(),
        rule.exactness(),
        report.residual_max,
        if report.pass { "pass" } else { "FAIL" }
    );
    if let Some(out) = &args.out {
        rule.write_file(out)?;
        println!("wrote {}", out.display());
    }
    if !report.pass {
        return Err(Failure::LawMismatch(vec![report.law_id]));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// approx
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct ApproxArgs {
    /// Operator kind (hyper|lasso|hard|filtered|generalized|partial_sum) or
    /// a path to an operator spec JSON.
    #[arg(long, default_value = "hyper")]
    pub op: String,
    /// Truncation degrees, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "6")]
    pub n: Vec<usize>,
    /// Thresholding levels for lasso/hard, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub lambda: Vec<f64>,
    /// Filter for the filtered kind: h1 or h2.
    #[arg(long)]
    pub filter: Option<String>,
    /// Band for the partial_sum kind, as "low,high".
    #[arg(long)]
    pub band: Option<String>,
    /// Input function: a catalogue name or a node-aligned samples CSV.
    #[arg(long, default_value = "franke_sphere")]
    pub corpus: String,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Gaussian noise level added at the rule's nodes before the operator
    /// runs; errors are then measured against the clean function.
    #[arg(long)]
    pub noise: Option<f64>,
    /// Use this rule file instead of building the tensor rule for each n.
    #[arg(long)]
    pub rule: Option<PathBuf>,
    /// Accept rules whose exactness falls below twice the degree.
    #[arg(long)]
    pub allow_low_exactness: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv or json.
    #[arg(long, default_value = "csv")]
    pub format: String,
}

#[derive(Serialize, Clone)]
struct ApproxRow {
    n: usize,
    operator: String,
    lambda: Option<f64>,
    l2_error: f64,
    l2w_error: f64,
    sparsity: usize,
}

fn parse_band(text: &str) -> Result<(usize, usize), Failure> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(Failure::Config(format!("--band expects 'low,high', got '{text}'")));
    }
    let low = parts[0]
        .trim()
        .parse()
        .map_err(|_| Failure::Config(format!("bad band bound '{}'", parts[0])))?;
    let high = parts[1]
        .trim()
        .parse()
        .map_err(|_| Failure::Config(format!("bad band bound '{}'", parts[1])))?;
    Ok((low, high))
}

fn parse_filter(name: &str) -> Result<Filter<R>, Failure> {
    match name {
        "h1" => Ok(Filter::H1),
        "h2" => Ok(Filter::H2),
        other => Err(Failure::Config(format!("unknown filter '{other}', use h1 or h2"))),
    }
}

/// Builds the operator for one (n, lambda) cell from the CLI description.
fn build_operator(
    args_op: &str,
    n: usize,
    lambda: Option<f64>,
    filter: Option<&str>,
    band: Option<&str>,
) -> Result<OperatorSpec<R>, Failure> {
    let kind_names = [
        "hyper",
        "lasso",
        "hard",
        "filtered",
        "generalized",
        "partial_sum",
    ];
    if !kind_names.contains(&args_op) {
        // Treat as a spec file; the file pins every parameter.
        return Ok(OperatorSpec::<R>::read_file(args_op)?);
    }
    let spec = match args_op {
        "hyper" => OperatorSpec::hyper(n),
        "lasso" => OperatorSpec::lasso(
            n,
            lambda.ok_or_else(|| Failure::Config("lasso needs --lambda".to_string()))?,
        ),
        "hard" => OperatorSpec::hard(
            n,
            lambda.ok_or_else(|| Failure::Config("hard needs --lambda".to_string()))?,
        ),
        "filtered" => OperatorSpec::filtered(n, parse_filter(filter.unwrap_or("h1"))?),
        "generalized" => {
            // Default weights follow the h1 profile; a spec file can pin
            // arbitrary weights.
            let h = parse_filter(filter.unwrap_or("h1"))?;
            let weights: Vec<R> = (0..=n).map(|l| h.eval(l as f64 / n.max(1) as f64)).collect();
            OperatorSpec::generalized(n, weights)?
        }
        "partial_sum" => {
            let (low, high) = match band {
                Some(b) => parse_band(b)?,
                None => (0, n),
            };
            OperatorSpec::partial_sum(n, low, high)?
        }
        _ => unreachable!(),
    };
    Ok(spec)
}

/// The input function plus, when known, the clean handle that error
/// measurements should reference.
struct ApproxInput {
    function: SampledFunction<R>,
    clean: Option<SampledFunction<R>>,
    name: String,
}

fn load_input(
    corpus: &str,
    rule: &QuadratureRule<R>,
    noise: Option<f64>,
    seed: u64,
) -> Result<ApproxInput, Failure> {
    let base: testfns::TestFunction<R> = if Path::new(corpus).exists() {
        testfns::TestFunction::from_parts(
            corpus,
            testfns::Smoothness::Noisy,
            seed,
            testfns::read_samples_csv_file(corpus, rule)?,
        )
    } else {
        testfns::named_function(corpus)?
    };
    match noise {
        None => {
            let clean = match base.function() {
                SampledFunction::Handle(_) => Some(base.function().clone()),
                SampledFunction::NodeAligned { .. } => None,
            };
            Ok(ApproxInput {
                function: base.function().clone(),
                clean,
                name: base.name().to_string(),
            })
        }
        Some(sigma) => {
            if sigma < 0.0 {
                return Err(Failure::Config("--noise must be nonnegative".to_string()));
            }
            let clean = match base.function() {
                SampledFunction::Handle(_) => Some(base.function().clone()),
                SampledFunction::NodeAligned { .. } => None,
            };
            let noisy = testfns::add_noise(&base, sigma, rule, seed)?;
            Ok(ApproxInput {
                function: noisy.function().clone(),
                clean,
                name: noisy.name().to_string(),
            })
        }
    }
}

/// Degree margin of the oversampled reference analysis used as ground
/// truth when the exact expansion is unavailable.
const REFERENCE_MARGIN: usize = 20;

fn approx_row(
    spec: &OperatorSpec<R>,
    input: &ApproxInput,
    rule: &QuadratureRule<R>,
    lambda: Option<f64>,
    policy: ExactnessPolicy,
) -> Result<ApproxRow, Failure> {
    let n = spec.degree();
    let coeffs = apply_with(spec, &input.function, rule, policy)?;
    let l2_error = match &input.clean {
        Some(clean) => {
            let ref_degree = n + REFERENCE_MARGIN;
            let big_rule = build_rule::<R>(ref_degree)?;
            let reference = analyze(clean, ref_degree, &big_rule)?;
            coefficients::sub(&coeffs.padded(ref_degree)?, &reference)?.l2_norm()
        }
        None => {
            let reference = analyze(&input.function, n, rule)?;
            coefficients::sub(&coeffs, &reference)?.l2_norm()
        }
    };
    let fitted = synthesize_at_nodes(&coeffs, rule)?;
    let residual: Vec<R> = input
        .function
        .values_at_nodes(rule)?
        .iter()
        .zip(fitted.values_at_nodes(rule)?)
        .map(|(&a, b)| a - b)
        .collect();
    let l2w_error = semi_norm(&SampledFunction::from_samples(residual, rule)?, rule)?;
    Ok(ApproxRow {
        n,
        operator: spec.kind_name().to_string(),
        lambda,
        l2_error,
        l2w_error,
        sparsity: coeffs.sparsity(),
    })
}

fn rows_to_csv(config: &serde_json::Value, rows: &[ApproxRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!("# {config}\n"));
    out.push_str("n,operator,lambda,l2_error,l2w_error,sparsity\n");
    for r in rows {
        let lambda = r.lambda.map(|l| l.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{:.16e},{:.16e},{}\n",
            r.n, r.operator, lambda, r.l2_error, r.l2w_error, r.sparsity
        ));
    }
    out
}

pub fn run_approx(args: ApproxArgs) -> Result<(), Failure> {
    if args.n.is_empty() {
        return Err(Failure::Config("approx needs at least one --n".to_string()));
    }
    let policy = if args.allow_low_exactness {
        ExactnessPolicy::AllowShortfall
    } else {
        ExactnessPolicy::Strict
    };
    let lambdas: Vec<Option<f64>> = if args.lambda.is_empty() {
        vec![None]
    } else {
        args.lambda.iter().copied().map(Some).collect()
    };
    let mut rows = Vec::new();
    let mut fingerprints = serde_json::Map::new();
    let mut input_names: Vec<String> = Vec::new();
    for &n in &args.n {
        let rule = match &args.rule {
            Some(path) => QuadratureRule::<R>::read_file(path)?,
            None => build_rule::<R>(n)?,
        };
        fingerprints.insert(n.to_string(), json!(rule.fingerprint_hex()));
        let input = load_input(&args.corpus, &rule, args.noise, args.seed)?;
        if !input_names.contains(&input.name) {
            input_names.push(input.name.clone());
        }
        for &lambda in &lambdas {
            let spec = build_operator(
                &args.op,
                n,
                lambda,
                args.filter.as_deref(),
                args.band.as_deref(),
            )?;
            rows.push(approx_row(&spec, &input, &rule, lambda, policy)?);
        }
    }
    let config = json!({
        "command": "approx",
        "version": version_string(),
        "op": args.op,
        "n": args.n,
        "lambda": args.lambda,
        "filter": args.filter,
        "band": args.band,
        "corpus": args.corpus,
        "input": input_names,
        "noise": args.noise,
        "seed": args.seed,
        "allow_low_exactness": args.allow_low_exactness,
        "rule_fingerprints": fingerprints,
    });
    let text = match args.format.as_str() {
        "csv" => rows_to_csv(&config, &rows),
        "json" => {
            let doc = json!({ "config": config, "rows": rows });
            format!("{}\n", serde_json::to_string_pretty(&doc).expect("serializable"))
        }
        other => {
            return Err(Failure::Config(format!(
                "unknown format '{other}', use csv or json"
            )))
        }
    };
    write_output(args.out.as_deref(), &text)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct VerifyArgs {
    /// Law id filter (substring); 'all' runs the whole catalogue.
    #[arg(long, default_value = "all")]
    pub law: String,
    /// Restrict to laws touching this operator kind.
    #[arg(long)]
    pub op: Option<String>,
    /// Override the n parameter of the pairwise laws.
    #[arg(long)]
    pub n: Option<usize>,
    /// Override the m parameter of the pairwise laws.
    #[arg(long)]
    pub m: Option<usize>,
    /// Degrees for the per-degree laws.
    #[arg(long, value_delimiter = ',', default_value = "3,6,10")]
    pub degrees: Vec<usize>,
    /// Thresholding levels swept by the composition tables.
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.2,1.0")]
    pub lambda: Vec<f64>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Write the JSON run report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct VerifyDocument {
    version: String,
    timestamp: u64,
    config: SuiteConfig,
    reports: Vec<hypersphere::CheckReport>,
}

pub fn run_verify(args: VerifyArgs) -> Result<(), Failure> {
    let threads = env_threads()?;
    let tol_scale = env_tol_scale()?;
    let config = SuiteConfig {
        seed: args.seed,
        degrees: args.degrees.clone(),
        lambdas: args.lambda.clone(),
        law_filter: if args.law == "all" {
            None
        } else {
            Some(args.law.clone())
        },
        op_filter: args.op.clone(),
        n_override: args.n,
        m_override: args.m,
        tol_scale,
        threads,
    };
    let reports = run_suite::<R>(&config)?;
    for r in &reports {
        println!(
            "{} {} residual={:.3e} threshold={:.3e}{}",
            if r.pass { "PASS" } else { "FAIL" },
            r.law_id,
            r.residual_max,
            r.threshold,
            if r.expect_violation {
                " (expected violation)"
            } else {
                ""
            }
        );
    }
    let passed = reports.iter().filter(|r| r.pass).count();
    println!("{passed}/{} laws match their expected status", reports.len());
    let doc = VerifyDocument {
        version: version_string(),
        timestamp: unix_timestamp(),
        config,
        reports: reports.clone(),
    };
    let text = format!(
        "{}\n",
        serde_json::to_string_pretty(&doc).expect("serializable")
    );
    if let Some(out) = &args.out {
        std::fs::write(out, &text).map_err(|e| Failure::Io(format!("{}: {e}", out.display())))?;
        println!("wrote {}", out.display());
    }
    if !all_pass(&reports) {
        let failing = reports
            .iter()
            .filter(|r| !r.pass)
            .map(|r| r.law_id.clone())
            .collect();
        return Err(Failure::LawMismatch(failing));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// table
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct TableArgs {
    /// Degrees to sweep, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2,4,6,8,10,12,14,16,18,20")]
    pub n: Vec<usize>,
    /// Operators to compare: kind names or spec files, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "hyper")]
    pub op: Vec<String>,
    /// Thresholding level used by lasso/hard columns.
    #[arg(long, default_value_t = 0.2)]
    pub lambda: f64,
    #[arg(long)]
    pub filter: Option<String>,
    #[arg(long, default_value = "franke_sphere")]
    pub corpus: String,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Gaussian noise level at the rule nodes.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also render an SVG line chart of the error columns.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

pub fn run_table(args: TableArgs) -> Result<(), Failure> {
    if args.n.is_empty() {
        return Err(Failure::Config("table needs a nonempty --n list".to_string()));
    }
    if args.op.is_empty() {
        return Err(Failure::Config("table needs at least one --op".to_string()));
    }
    let mut rows: Vec<ApproxRow> = Vec::new();
    let mut fingerprints = serde_json::Map::new();
    for &n in &args.n {
        let rule = build_rule::<R>(n)?;
        fingerprints.insert(n.to_string(), json!(rule.fingerprint_hex()));
        let input = load_input(&args.corpus, &rule, args.noise, args.seed)?;
        for op in &args.op {
            let lambda = matches!(op.as_str(), "lasso" | "hard").then_some(args.lambda);
            let spec = build_operator(op, n, lambda, args.filter.as_deref(), None)?;
            rows.push(approx_row(
                &spec,
                &input,
                &rule,
                lambda,
                ExactnessPolicy::Strict,
            )?);
        }
    }
    let config = json!({
        "command": "table",
        "version": version_string(),
        "op": args.op,
        "n": args.n,
        "lambda": args.lambda,
        "filter": args.filter,
        "corpus": args.corpus,
        "noise": args.noise,
        "seed": args.seed,
        "rule_fingerprints": fingerprints,
    });
    let text = rows_to_csv(&config, &rows);
    write_output(args.out.as_deref(), &text)?;
    if let Some(svg_path) = &args.svg {
        let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
        for op in &args.op {
            let points: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| &r.operator == op || r.operator == op.as_str())
                .map(|r| (r.n as f64, r.l2_error))
                .collect();
            series.push((op.clone(), points));
        }
        let chart = crate::svg::line_chart(
            &format!("L2 error vs degree ({})", args.corpus),
            "degree n",
            "L2 error",
            &series,
        );
        let mut file = std::fs::File::create(svg_path)
            .map_err(|e| Failure::Io(format!("{}: {e}", svg_path.display())))?;
        file.write_all(chart.as_bytes())
            .map_err(|e| Failure::Io(format!("{}: {e}", svg_path.display())))?;
        println!("wrote {}", svg_path.display());
    }
    Ok(())
}
