//! Built-in validation suites: each case compares the engine with an
//! independent reference and records the violation against its limit.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::contracts::{compound_parity_check, price_contract, CompoundLeg, ContractSpec};
use crate::digital::{MonitoringSchedule, PayoffParameterSet};
use crate::error::{PricingError, Result};
use crate::gaussian::mvn::{mvn_cdf, CorrelationMatrix};
use crate::gaussian::{black_scholes, closed_form_price, lemma1_contour_side};
use crate::levy::LevyModel;

pub const SUITES: [&str; 4] = ["lemma1", "gaussian", "parity", "asian-limit"];

#[derive(Debug, Clone, Serialize)]
pub struct CaseResult {
    pub inputs: Value,
    pub violation: f64,
    pub limit: f64,
}

impl CaseResult {
    pub fn passed(&self) -> bool {
        self.violation <= self.limit
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub cases: usize,
    pub passed: usize,
    pub max_violation: f64,
    /// Inputs of the first failing case.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<Value>,
    pub seconds: f64,
    #[serde(skip)]
    pub details: Vec<CaseResult>,
}

impl SuiteReport {
    fn from_cases(suite: &str, details: Vec<CaseResult>, started: Instant) -> Self {
        let passed = details.iter().filter(|c| c.passed()).count();
        let max_violation = details.iter().map(|c| c.violation).fold(0.0, f64::max);
        let first_failure = details.iter().find(|c| !c.passed()).map(|c| {
            json!({"inputs": c.inputs, "violation": finite_or_string(c.violation), "limit": c.limit})
        });
        SuiteReport {
            suite: suite.to_string(),
            cases: details.len(),
            passed,
            max_violation,
            first_failure,
            seconds: started.elapsed().as_secs_f64(),
            details,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.passed == self.cases
    }
}

fn finite_or_string(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

/// A case whose computation failed counts as an infinite violation.
fn case(inputs: Value, limit: f64, violation: Result<f64>) -> CaseResult {
    match violation {
        Ok(v) => CaseResult {
            inputs,
            violation: if v.is_nan() { f64::INFINITY } else { v },
            limit,
        },
        Err(e) => {
            let mut inputs = inputs;
            inputs["error"] = json!(format!("{}: {e}", e.name()));
            CaseResult {
                inputs,
                violation: f64::INFINITY,
                limit,
            }
        }
    }
}

pub fn run_suite(name: &str) -> Result<SuiteReport> {
    match name {
        "lemma1" => Ok(lemma1_suite(20, 1)),
        "gaussian" => Ok(gaussian_suite()),
        "parity" => Ok(parity_suite()),
        "asian-limit" => Ok(asian_limit_suite()),
        other => Err(PricingError::InvalidInput(format!(
            "unknown suite {other}; expected one of {SUITES:?} or all"
        ))),
    }
}

/// Random well-conditioned correlation matrix: normalised `VVᵀ + I/2`.
fn random_correlation(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let v: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let mut s = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in 0..n {
            s[a][b] = (0..n).map(|k| v[a][k] * v[b][k]).sum::<f64>() + if a == b { 0.5 } else { 0.0 };
        }
    }
    (0..n)
        .map(|a| (0..n).map(|b| if a == b { 1.0 } else { s[a][b] / (s[a][a] * s[b][b]).sqrt() }).collect())
        .collect()
}

/// Contour side of the normal CDF identity against the normal CDF itself,
/// `per_dim` random instances for each `N ∈ {1, 2, 3}`.
pub fn lemma1_suite(per_dim: usize, seed: u64) -> SuiteReport {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut details = Vec::new();
    for n in 1..=3usize {
        let limit = if n <= 2 { 1e-6 } else { 1e-4 };
        for _ in 0..per_dim {
            let rows = random_correlation(&mut rng, n);
            let d: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let w: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
            let omega: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..2.0)).collect();
            let inputs = json!({"n": n, "d": d, "correlation": rows, "w": w, "omega": omega});
            let violation = (|| {
                let c = CorrelationMatrix::new(rows.clone())?;
                let contour = lemma1_contour_side(&d, &c, &w, &omega)?;
                let wd: Vec<f64> = d.iter().zip(&w).map(|(a, b)| a * b).collect();
                let sign: f64 = w.iter().product();
                Ok((contour - sign * mvn_cdf(&wd, &c.signed(&w))?).abs())
            })();
            details.push(case(inputs, limit, violation));
        }
    }
    SuiteReport::from_cases("lemma1", details, started)
}

/// The contracts of the Gaussian reduction grid at one parameter point, with
/// the relative tolerance each must meet.
pub fn gaussian_grid_contracts(sigma: f64, r: f64, ratio: f64) -> Result<Vec<(&'static str, ContractSpec, f64)>> {
    let spot = 100.0;
    let k = spot / ratio;
    let year = MonitoringSchedule::new(0.0, vec![1.0])?;
    let two = MonitoringSchedule::new(0.0, vec![0.5, 1.0])?;
    let three = MonitoringSchedule::uniform(0.0, 1.0, 3)?;
    // outer strikes: half the inner value if the spot stayed put
    let k1 = 0.5 * black_scholes(spot, k, sigma, r, 0.5, 1.0);
    let k0 = 0.5
        * closed_form_price(
            &ContractSpec::Compound {
                legs: vec![
                    CompoundLeg { expiry: 0.25, strike: k1, w: 1.0 },
                    CompoundLeg { expiry: 0.75, strike: k, w: 1.0 },
                ],
            },
            sigma,
            r,
            spot,
        )?;
    Ok(vec![
        (
            "digital",
            ContractSpec::Digital {
                schedule: year,
                payoff: PayoffParameterSet::single(0.0, 1.0, 1.0, k.ln())?,
            },
            1e-6,
        ),
        ("forward_start", ContractSpec::ForwardStart { t1: 0.5, t2: 1.5, w: 1.0 }, 1e-6),
        (
            "asian_geometric_m4",
            ContractSpec::AsianGeometric {
                schedule: MonitoringSchedule::uniform(0.0, 1.0, 4)?,
                strike: k,
                w: 1.0,
                weights: vec![],
            },
            1e-6,
        ),
        (
            "chooser",
            ContractSpec::Chooser {
                t1: 0.5,
                t_expiry: 1.0,
                strike: k,
            },
            1e-4,
        ),
        (
            "compound_2",
            ContractSpec::Compound {
                legs: vec![
                    CompoundLeg { expiry: 0.5, strike: k1, w: 1.0 },
                    CompoundLeg { expiry: 1.0, strike: k, w: 1.0 },
                ],
            },
            1e-4,
        ),
        (
            "compound_3",
            ContractSpec::Compound {
                legs: vec![
                    CompoundLeg { expiry: 0.25, strike: k0, w: 1.0 },
                    CompoundLeg { expiry: 0.5, strike: k1, w: 1.0 },
                    CompoundLeg { expiry: 1.0, strike: k, w: 1.0 },
                ],
            },
            1e-4,
        ),
        (
            "barrier_m2",
            ContractSpec::BarrierDownOutCall {
                schedule: two.clone(),
                barrier: 90.0,
                strike: k,
            },
            1e-4,
        ),
        (
            "barrier_m3",
            ContractSpec::BarrierDownOutCall {
                schedule: three.clone(),
                barrier: 90.0,
                strike: k,
            },
            1e-4,
        ),
        (
            "lookback_m2",
            ContractSpec::LookbackFixed {
                schedule: two,
                strike: k,
                w: 1.0,
            },
            1e-4,
        ),
        (
            "lookback_m3",
            ContractSpec::LookbackFixed {
                schedule: three,
                strike: k,
                w: 1.0,
            },
            1e-4,
        ),
    ])
}

/// Relative gap between the Fourier engine and the Gaussian closed form.
pub fn gaussian_case(name: &str, c: &ContractSpec, sigma: f64, r: f64, spot: f64, rel: f64) -> CaseResult {
    let inputs = json!({"contract": name, "sigma": sigma, "r": r, "spot": spot, "spec": c});
    let violation = (|| {
        let model = LevyModel::gaussian(sigma, r)?;
        let reference = closed_form_price(c, sigma, r, spot)?;
        let tol = (0.01 * rel * reference.abs()).max(1e-13);
        let engine = price_contract(c, &model, spot, Some(tol))?.value;
        Ok((engine - reference).abs() / reference.abs())
    })();
    case(inputs, rel, violation)
}

pub fn gaussian_suite() -> SuiteReport {
    let started = Instant::now();
    let mut details = Vec::new();
    for sigma in [0.1, 0.2, 0.4] {
        for r in [0.0, 0.05] {
            for ratio in [0.8, 1.0, 1.25] {
                match gaussian_grid_contracts(sigma, r, ratio) {
                    Ok(list) => {
                        for (name, c, rel) in list {
                            // forward start has no strike: scale the spot instead
                            let spot = if name == "forward_start" { 100.0 * ratio } else { 100.0 };
                            details.push(gaussian_case(name, &c, sigma, r, spot, rel));
                        }
                    }
                    Err(e) => details.push(case(json!({"sigma": sigma, "r": r, "ratio": ratio}), 0.0, Err(e))),
                }
            }
        }
    }
    SuiteReport::from_cases("gaussian", details, started)
}

/// Parameter sets `(K₁, T₁, K₂, T₂, w₂)` for the compound parity suite.
pub const PARITY_SETS: [(f64, f64, f64, f64, f64); 6] = [
    (5.0, 0.5, 100.0, 1.0, 1.0),
    (2.0, 0.25, 100.0, 1.0, 1.0),
    (10.0, 0.5, 90.0, 1.0, 1.0),
    (5.0, 0.5, 100.0, 1.0, -1.0),
    (3.0, 0.5, 110.0, 1.5, -1.0),
    (8.0, 0.75, 100.0, 2.0, 1.0),
];

pub fn parity_models() -> Result<Vec<(&'static str, LevyModel, f64)>> {
    Ok(vec![
        ("gaussian", LevyModel::gaussian(0.2, 0.05)?, 1e-6),
        ("nig", LevyModel::nig(8.0, -2.0, 0.3, 0.05)?, 1e-5),
        ("cgmy", LevyModel::cgmy(1.0, 5.0, 10.0, 0.5, 0.05)?, 1e-5),
    ])
}

pub fn parity_suite() -> SuiteReport {
    let started = Instant::now();
    let mut details = Vec::new();
    match parity_models() {
        Ok(models) => {
            for (name, model, limit) in models {
                for (k1, t1, k2, t2, w2) in PARITY_SETS {
                    let inputs = json!({"model": name, "k1": k1, "t1": t1, "k2": k2, "t2": t2, "w2": w2, "spot": 100.0});
                    let v = compound_parity_check(&model, k1, t1, k2, t2, w2, 100.0).map(f64::abs);
                    details.push(case(inputs, limit, v));
                }
            }
        }
        Err(e) => details.push(case(json!({}), 0.0, Err(e))),
    }
    SuiteReport::from_cases("parity", details, started)
}

/// Monitoring counts of the discrete-to-continuous Asian study.
pub const ASIAN_COUNTS: [usize; 4] = [4, 8, 16, 32];

/// `|F_M - F_∞|` for the equally weighted geometric Asian call on `[0, 1]`.
pub fn asian_gaps(model: &LevyModel, spot: f64, strike: f64) -> Result<(Vec<f64>, f64)> {
    let limit = price_contract(
        &ContractSpec::AsianContinuous {
            t_start: 0.0,
            t_end: 1.0,
            strike,
            w: 1.0,
        },
        model,
        spot,
        Some(1e-11),
    )?
    .value;
    let gaps = ASIAN_COUNTS
        .iter()
        .map(|&m| {
            let c = ContractSpec::AsianGeometric {
                schedule: MonitoringSchedule::uniform(0.0, 1.0, m)?,
                strike,
                w: 1.0,
                weights: vec![],
            };
            Ok((price_contract(&c, model, spot, Some(1e-11))?.value - limit).abs())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((gaps, limit))
}

pub fn asian_limit_suite() -> SuiteReport {
    let started = Instant::now();
    let mut details = Vec::new();
    let models = [
        ("gaussian", LevyModel::gaussian(0.2, 0.05)),
        ("nig", LevyModel::nig(8.0, -2.0, 0.3, 0.05)),
    ];
    for (name, model) in models {
        let inputs = json!({"model": name, "counts": ASIAN_COUNTS, "spot": 100.0, "strike": 100.0});
        let gaps = model.and_then(|m| asian_gaps(&m, 100.0, 100.0));
        // violation: largest ratio of successive gaps (must stay below 1)
        let v = gaps.as_ref().map(|(g, _)| g.windows(2).map(|p| p[1] / p[0]).fold(0.0, f64::max)).map_err(Clone::clone);
        let mut inputs = inputs;
        if let Ok((g, _)) = &gaps {
            inputs["gaps"] = json!(g);
        }
        details.push(CaseResult {
            limit: 1.0 - f64::EPSILON,
            ..case(inputs, 1.0, v)
        });
        if name == "gaussian" {
            let inputs = json!({"model": name, "check": "continuous closed form", "spot": 100.0, "strike": 100.0});
            let v = gaps.and_then(|(_, limit)| {
                let c = ContractSpec::AsianContinuous {
                    t_start: 0.0,
                    t_end: 1.0,
                    strike: 100.0,
                    w: 1.0,
                };
                let cf = closed_form_price(&c, 0.2, 0.05, 100.0)?;
                Ok((limit - cf).abs() / cf)
            });
            details.push(case(inputs, 1e-6, v));
        }
    }
    SuiteReport::from_cases("asian-limit", details, started)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lemma1_suite_passes() {
        let r = lemma1_suite(3, 9);
        assert_eq!(r.cases, 9);
        assert!(r.all_passed(), "{:?}", r.first_failure);
    }

    #[test]
    fn failures_are_reported_with_inputs() {
        let r = SuiteReport::from_cases(
            "x",
            vec![
                case(json!({"a": 1}), 1.0, Ok(0.5)),
                case(json!({"a": 2}), 1.0, Err(PricingError::NoRoot("test".into()))),
            ],
            Instant::now(),
        );
        assert_eq!((r.cases, r.passed), (2, 1));
        let f = r.first_failure.unwrap();
        assert_eq!(f["inputs"]["a"], 2);
        assert!(f["inputs"]["error"].as_str().unwrap().starts_with("NoRoot"));
    }

    #[test]
    fn random_correlations_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=4 {
            assert!(CorrelationMatrix::new(random_correlation(&mut rng, n)).is_ok());
        }
    }
}
