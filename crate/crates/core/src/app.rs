//! Command implementations behind the `levy-exotic` binary.
//!
//! Each command returns an [`Outcome`] instead of printing, so the binary only
//! writes the two streams and exits with the code.

use std::time::Instant;

use serde_json::{json, Value};

use crate::contracts::{price_contract, price_contract_fixed, ContractSpec};
use crate::error::PricingError;
use crate::gaussian::closed_form_price;
use crate::levy::{LevyModel, ModelKind};
use crate::mc::mc_price;
use crate::spec::{Method, RunSpec, DEFAULT_PATHS, DEFAULT_SEED};
use crate::validate::{run_suite, SuiteReport, SUITES};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION_FAILED: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_PRICING: i32 = 3;
pub const EXIT_UNSUPPORTED: i32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(code: i32, stderr: String) -> Self {
        Outcome {
            code,
            stdout: String::new(),
            stderr,
        }
    }

    fn pricing(e: &PricingError) -> Self {
        let code = match e {
            PricingError::UnsupportedModel(_) | PricingError::UnsupportedContract(_) | PricingError::NestingTooDeep(_) => {
                EXIT_UNSUPPORTED
            }
            _ => EXIT_PRICING,
        };
        Outcome::fail(code, format!("error: {}: {e}\n", e.name()))
    }
}

/// Command-line overrides of the spec's `pricing` block.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PriceOverrides {
    pub method: Option<Method>,
    pub tol: Option<f64>,
    pub paths: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Axis {
    Grid,
    Paths,
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serialises");
    s.push('\n');
    s
}

/// Reads and checks a spec file. Errors map to exit code 2 (schema or value)
/// or 4 (method/model pairing).
pub fn load_spec(path: &str, overrides: PriceOverrides) -> Result<(RunSpec, LevyModel), Outcome> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Outcome::fail(EXIT_PARSE, format!("error: cannot read {path}: {e}\n")))?;
    let mut spec =
        RunSpec::from_json(&text).map_err(|e| Outcome::fail(EXIT_PARSE, format!("error: invalid spec {path}: {e}\n")))?;
    if let Some(m) = overrides.method {
        spec.pricing.method = m;
    }
    spec.pricing.tol = overrides.tol.or(spec.pricing.tol);
    spec.pricing.paths = overrides.paths.or(spec.pricing.paths);
    spec.pricing.seed = overrides.seed.or(spec.pricing.seed);
    let model = spec
        .validate()
        .map_err(|e| Outcome::fail(EXIT_PARSE, format!("error: invalid spec {path}: {}: {e}\n", e.name())))?;
    spec.check_pairing().map_err(|e| Outcome::pricing(&e))?;
    Ok((spec, model))
}

fn gaussian_sigma(kind: ModelKind) -> Option<f64> {
    match kind {
        ModelKind::Gaussian { sigma } => Some(sigma),
        _ => None,
    }
}

/// Prices the spec with its method and builds the JSON report.
pub fn price_report(spec: &RunSpec, model: &LevyModel) -> Result<Value, PricingError> {
    let c = &spec.contract;
    let mut report = json!({
        "method": spec.pricing.method.name(),
        "model": model,
        "contract": c,
        "spot": spec.spot,
    });
    match spec.pricing.method {
        Method::Fourier => {
            let r = price_contract(c, model, spec.spot, spec.pricing.tol)?;
            report["price"] = json!(r.value);
            report["error_estimate"] = json!(r.quadrature_error);
            report["diagnostics"] = json!({
                "dimensions": [r.dimensions.0, r.dimensions.1],
                "evaluations": r.evaluations,
                "offsets": r.offsets_used.omega,
            });
        }
        Method::Mc => {
            let paths = spec.pricing.paths.unwrap_or(DEFAULT_PATHS);
            let seed = spec.pricing.seed.unwrap_or(DEFAULT_SEED);
            let r = mc_price(c, model, spec.spot, paths, seed)?;
            report["price"] = json!(r.estimate);
            report["stderr"] = json!(r.stderr);
            report["diagnostics"] = json!({"paths": r.n_paths, "seed": r.seed});
        }
        Method::ClosedForm => {
            let sigma = gaussian_sigma(model.kind)
                .ok_or_else(|| PricingError::UnsupportedModel("closed_form requires the gaussian model".into()))?;
            report["price"] = json!(closed_form_price(c, sigma, model.r, spec.spot)?);
            report["error_estimate"] = json!(0.0);
            report["diagnostics"] = json!({});
        }
    }
    Ok(report)
}

pub fn cmd_price(path: &str, overrides: PriceOverrides) -> Outcome {
    let (spec, model) = match load_spec(path, overrides) {
        Ok(x) => x,
        Err(o) => return o,
    };
    match price_report(&spec, &model) {
        Ok(v) => Outcome::ok(pretty(&v)),
        Err(e) => Outcome::pricing(&e),
    }
}

fn suite_json(r: &SuiteReport) -> Value {
    serde_json::to_value(r).expect("suite report serialises")
}

pub fn cmd_validate(suite: &str) -> Outcome {
    let names: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite] };
    let mut reports = Vec::new();
    for name in names {
        match run_suite(name) {
            Ok(r) => reports.push(r),
            Err(e) => return Outcome::fail(EXIT_PARSE, format!("error: {e}\n")),
        }
    }
    let ok = reports.iter().all(SuiteReport::all_passed);
    let body = if reports.len() == 1 {
        suite_json(&reports[0])
    } else {
        json!({
            "suite": "all",
            "cases": reports.iter().map(|r| r.cases).sum::<usize>(),
            "passed": reports.iter().map(|r| r.passed).sum::<usize>(),
            "max_violation": reports.iter().map(|r| r.max_violation).fold(0.0, f64::max),
            "suites": reports.iter().map(suite_json).collect::<Vec<_>>(),
        })
    };
    let mut out = Outcome::ok(pretty(&body));
    if !ok {
        out.code = EXIT_VALIDATION_FAILED;
        for r in reports.iter().filter(|r| !r.all_passed()) {
            out.stderr.push_str(&format!(
                "suite {} failed {} of {} cases; first failure: {}\n",
                r.suite,
                r.cases - r.passed,
                r.cases,
                r.first_failure.as_ref().map(Value::to_string).unwrap_or_default()
            ));
        }
    }
    out
}

pub const CSV_HEADER: &str = "resolution,price,error,wall_time_ms";

/// Base node counts of the grid study: `16, 32, …` up to 4096 in one
/// dimension and 256 otherwise.
fn grid_levels(c: &ContractSpec) -> Vec<usize> {
    let multi = matches!(
        c,
        ContractSpec::Chooser { .. } | ContractSpec::LookbackFixed { .. } | ContractSpec::BarrierDownOutCall { .. }
    ) || matches!(c, ContractSpec::Compound { legs } if legs.len() > 1)
        || matches!(c, ContractSpec::Digital { payoff, .. } if payoff.n() > 1);
    let top = if multi { 256 } else { 4096 };
    std::iter::successors(Some(16usize), |n| Some(n * 2)).take_while(|&n| n <= top).collect()
}

/// Path counts of the sampling study: `10⁴ · 2^k` up to `1.28 · 10⁶`.
pub const PATH_LEVELS: [usize; 8] = [10_000, 20_000, 40_000, 80_000, 160_000, 320_000, 640_000, 1_280_000];

pub fn convergence_rows(spec: &RunSpec, model: &LevyModel, axis: Axis) -> Result<Vec<(usize, f64, f64, f64)>, PricingError> {
    let c = &spec.contract;
    let mut rows = Vec::new();
    match axis {
        Axis::Grid => {
            let reference = price_contract(c, model, spec.spot, Some(1e-12 * spec.spot.max(1.0)))?.value;
            for n in grid_levels(c) {
                let t = Instant::now();
                let v = price_contract_fixed(c, model, spec.spot, n)?;
                rows.push((n, v, (v - reference).abs(), t.elapsed().as_secs_f64() * 1e3));
            }
        }
        Axis::Paths => {
            let seed = spec.pricing.seed.unwrap_or(DEFAULT_SEED);
            for n in PATH_LEVELS {
                let t = Instant::now();
                let r = mc_price(c, model, spec.spot, n, seed)?;
                rows.push((n, r.estimate, r.stderr, t.elapsed().as_secs_f64() * 1e3));
            }
        }
    }
    Ok(rows)
}

pub fn cmd_convergence(path: &str, axis: Axis) -> Outcome {
    let method = match axis {
        Axis::Grid => Method::Fourier,
        Axis::Paths => Method::Mc,
    };
    let overrides = PriceOverrides {
        method: Some(method),
        ..Default::default()
    };
    let (spec, model) = match load_spec(path, overrides) {
        Ok(x) => x,
        Err(o) => return o,
    };
    match convergence_rows(&spec, &model, axis) {
        Ok(rows) => {
            let mut s = String::from(CSV_HEADER);
            s.push('\n');
            for (n, p, e, ms) in rows {
                s.push_str(&format!("{n},{p:.15e},{e:.6e},{ms:.3}\n"));
            }
            Outcome::ok(s)
        }
        Err(e) => Outcome::pricing(&e),
    }
}
