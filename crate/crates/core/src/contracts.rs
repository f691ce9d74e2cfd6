//! Exotic contracts as static portfolios of power digitals.
//!
//! Every contract except the continuously averaged Asian is compiled into a
//! [`DigitalPortfolio`]: weighted power digitals plus a discounted cash amount.
//! Contracts without an explicit schedule are valued at time 0.

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::digital::{
    conditioned_offset, price_digital, price_digital_fixed, price_unconditional,
    ContourOffsets, MonitoringSchedule, PayoffParameterSet, PriceResult,
};
use crate::error::{PricingError, Result};
use crate::levy::LevyModel;
use crate::quadrature::{gauss_legendre, integrate_line, trapezoid_line, truncation_radius_by};
use crate::roots::{geometric_bracket, solve_bracketed, RootTolerance};

/// Largest lookback schedule (the decomposition needs `M`-dimensional integrals).
pub const MAX_LOOKBACK_DATES: usize = 3;
/// Largest compound depth.
pub const MAX_COMPOUND_DEPTH: usize = 3;
/// Compound threshold brackets grow from the strike by at most `2^60`.
pub const MAX_BRACKET_DOUBLINGS: u32 = 60;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// One option layer of a compound: expiry, strike and sign (`+1` call, `-1` put).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompoundLeg {
    pub expiry: f64,
    pub strike: f64,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ContractSpec {
    /// A single power digital.
    Digital {
        schedule: MonitoringSchedule,
        payoff: PayoffParameterSet,
    },
    /// Pays `(w(S_{t2} - S_{t1}))⁺` at `t2`.
    ForwardStart { t1: f64, t2: f64, w: f64 },
    /// Pays `(w(Π S_{T_k}^{θ_k} - K))⁺` at `T_M`; empty weights mean equal weights.
    AsianGeometric {
        schedule: MonitoringSchedule,
        strike: f64,
        w: f64,
        #[serde(default)]
        weights: Vec<f64>,
    },
    /// Continuous geometric average over `[t_start, t_end]`, paid at `t_end`.
    AsianContinuous {
        t_start: f64,
        t_end: f64,
        strike: f64,
        w: f64,
    },
    /// Fixed-strike lookback on the monitoring dates: `(max S - K)⁺` for
    /// `w = 1`, `(K - min S)⁺` for `w = -1`.
    LookbackFixed {
        schedule: MonitoringSchedule,
        strike: f64,
        w: f64,
    },
    /// Choice at `t1` between a call and a put, both struck at `strike` and
    /// expiring at `t_expiry`.
    Chooser { t1: f64, t_expiry: f64, strike: f64 },
    /// Option on option on … on a vanilla; `legs` ordered by expiry, innermost last.
    Compound { legs: Vec<CompoundLeg> },
    /// `(S_{T_M} - K)⁺` knocked out if `S_{T_j} < B` at any monitoring date.
    BarrierDownOutCall {
        schedule: MonitoringSchedule,
        barrier: f64,
        strike: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortfolioTerm {
    pub coefficient: f64,
    pub schedule: MonitoringSchedule,
    pub payoff: PayoffParameterSet,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DigitalPortfolio {
    pub terms: Vec<PortfolioTerm>,
    /// Present value of the parts priced without integrals.
    pub cash: f64,
}

impl DigitalPortfolio {
    fn empty() -> Self {
        DigitalPortfolio {
            terms: Vec::new(),
            cash: 0.0,
        }
    }

    fn push(&mut self, coefficient: f64, schedule: &MonitoringSchedule, payoff: PayoffParameterSet) {
        if coefficient != 0.0 {
            self.terms.push(PortfolioTerm {
                coefficient,
                schedule: schedule.clone(),
                payoff,
            });
        }
    }
}

fn check_sign(w: f64, what: &str) -> Result<()> {
    if w == 1.0 || w == -1.0 {
        Ok(())
    } else {
        Err(PricingError::InvalidInput(format!("{what} must be +1 or -1, got {w}")))
    }
}

fn check_positive(x: f64, what: &str) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(PricingError::NonPositiveInput(format!("{what} = {x}")))
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    let mut prev = 0.0;
    for &t in times {
        if !(t > prev && t.is_finite()) {
            return Err(PricingError::InvalidInput(format!(
                "times must be increasing and positive, got {times:?}"
            )));
        }
        prev = t;
    }
    Ok(())
}

impl ContractSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ContractSpec::Digital { schedule, payoff } => {
                schedule.validate()?;
                payoff.validate()?;
                if schedule.m() != payoff.m() {
                    return Err(PricingError::InvalidInput(
                        "digital schedule and payoff disagree on M".into(),
                    ));
                }
            }
            ContractSpec::ForwardStart { t1, t2, w } => {
                check_times(&[*t1, *t2])?;
                check_sign(*w, "w")?;
            }
            ContractSpec::AsianGeometric {
                schedule,
                strike,
                w,
                weights,
            } => {
                schedule.validate()?;
                check_positive(*strike, "strike")?;
                check_sign(*w, "w")?;
                if !weights.is_empty() {
                    if weights.len() != schedule.m() {
                        return Err(PricingError::InvalidInput(format!(
                            "{} weights for {} dates",
                            weights.len(),
                            schedule.m()
                        )));
                    }
                    if weights.iter().any(|&x| !(x >= 0.0 && x.is_finite()))
                        || !(weights.iter().sum::<f64>() > 0.0)
                    {
                        return Err(PricingError::InvalidInput(
                            "Asian weights must be nonnegative with a positive sum".into(),
                        ));
                    }
                }
            }
            ContractSpec::AsianContinuous {
                t_start,
                t_end,
                strike,
                w,
            } => {
                if !(*t_start >= 0.0 && t_end > t_start && t_end.is_finite()) {
                    return Err(PricingError::InvalidInput(format!(
                        "averaging window [{t_start}, {t_end}] must satisfy 0 <= start < end"
                    )));
                }
                check_positive(*strike, "strike")?;
                check_sign(*w, "w")?;
            }
            ContractSpec::LookbackFixed { schedule, strike, w } => {
                schedule.validate()?;
                check_positive(*strike, "strike")?;
                check_sign(*w, "w")?;
                if schedule.m() > MAX_LOOKBACK_DATES {
                    return Err(PricingError::CapExceeded(format!(
                        "lookback with {} dates (max {MAX_LOOKBACK_DATES})",
                        schedule.m()
                    )));
                }
            }
            ContractSpec::Chooser { t1, t_expiry, strike } => {
                check_times(&[*t1, *t_expiry])?;
                check_positive(*strike, "strike")?;
            }
            ContractSpec::Compound { legs } => {
                if legs.is_empty() {
                    return Err(PricingError::InvalidInput("compound needs at least one leg".into()));
                }
                if legs.len() > MAX_COMPOUND_DEPTH {
                    return Err(PricingError::CapExceeded(format!(
                        "compound depth {} (max {MAX_COMPOUND_DEPTH})",
                        legs.len()
                    )));
                }
                check_times(&legs.iter().map(|l| l.expiry).collect::<Vec<_>>())?;
                for (j, l) in legs.iter().enumerate() {
                    check_sign(l.w, &format!("w of leg {}", j + 1))?;
                    if !(l.strike >= 0.0 && l.strike.is_finite()) {
                        return Err(PricingError::NonPositiveInput(format!(
                            "strike of leg {} = {}",
                            j + 1,
                            l.strike
                        )));
                    }
                }
                check_positive(legs.last().unwrap().strike, "innermost strike")?;
            }
            ContractSpec::BarrierDownOutCall {
                schedule,
                barrier,
                strike,
            } => {
                schedule.validate()?;
                check_positive(*barrier, "barrier")?;
                check_positive(*strike, "strike")?;
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            ContractSpec::Digital { .. } => "digital",
            ContractSpec::ForwardStart { .. } => "forward_start",
            ContractSpec::AsianGeometric { .. } => "asian_geometric",
            ContractSpec::AsianContinuous { .. } => "asian_continuous",
            ContractSpec::LookbackFixed { .. } => "lookback_fixed",
            ContractSpec::Chooser { .. } => "chooser",
            ContractSpec::Compound { .. } => "compound",
            ContractSpec::BarrierDownOutCall { .. } => "barrier_down_out_call",
        }
    }

    /// Final payment date.
    pub fn expiry(&self) -> f64 {
        match self {
            ContractSpec::Digital { schedule, .. }
            | ContractSpec::AsianGeometric { schedule, .. }
            | ContractSpec::LookbackFixed { schedule, .. }
            | ContractSpec::BarrierDownOutCall { schedule, .. } => schedule.expiry(),
            ContractSpec::ForwardStart { t2, .. } => *t2,
            ContractSpec::AsianContinuous { t_end, .. } => *t_end,
            ContractSpec::Chooser { t_expiry, .. } => *t_expiry,
            ContractSpec::Compound { legs } => legs.last().map(|l| l.expiry).unwrap_or(0.0),
        }
    }
}

/// Normalised Asian weights (equal weights when none are given).
pub fn asian_weights(weights: &[f64], m: usize) -> Vec<f64> {
    if weights.is_empty() {
        return vec![1.0 / m as f64; m];
    }
    let total: f64 = weights.iter().sum();
    weights.iter().map(|x| x / total).collect()
}

fn unit(m: usize, p: usize) -> Vec<f64> {
    let mut v = vec![0.0; m];
    v[p] = 1.0;
    v
}

fn identity_rows(m: usize, scale: f64) -> Vec<Vec<f64>> {
    (0..m).map(|p| unit(m, p).iter().map(|x| scale * x).collect()).collect()
}

/// Decomposes a contract into weighted power digitals plus cash.
///
/// Compound thresholds are solved here (which is where the model is needed
/// beyond discounting). The continuously averaged Asian has no such
/// decomposition and yields [`PricingError::UnsupportedContract`].
pub fn to_portfolio(c: &ContractSpec, model: &LevyModel, spot: f64) -> Result<DigitalPortfolio> {
    c.validate()?;
    check_positive(spot, "spot")?;
    let mut out = DigitalPortfolio::empty();
    match c {
        ContractSpec::Digital { schedule, payoff } => out.push(1.0, schedule, payoff.clone()),
        ContractSpec::ForwardStart { t1, t2, w } => {
            let sched = MonitoringSchedule::new(0.0, vec![*t1, *t2])?;
            let a = vec![vec![-1.0, 1.0]];
            out.push(*w, &sched, PayoffParameterSet::new(vec![0.0, 1.0], vec![0.0], vec![*w], a.clone())?);
            out.push(-w, &sched, PayoffParameterSet::new(vec![1.0, 0.0], vec![0.0], vec![*w], a)?);
        }
        ContractSpec::AsianGeometric {
            schedule,
            strike,
            w,
            weights,
        } => {
            let theta = asian_weights(weights, schedule.m());
            let k = strike.ln();
            let a = vec![theta.clone()];
            out.push(*w, schedule, PayoffParameterSet::new(theta.clone(), vec![k], vec![*w], a.clone())?);
            out.push(
                -w * strike,
                schedule,
                PayoffParameterSet::new(vec![0.0; theta.len()], vec![k], vec![*w], a)?,
            );
        }
        ContractSpec::AsianContinuous { .. } => {
            return Err(PricingError::UnsupportedContract(
                "the continuously averaged Asian is priced by its own kernel, not a portfolio".into(),
            ))
        }
        ContractSpec::LookbackFixed { schedule, strike, w } => {
            let m = schedule.m();
            let k = strike.ln();
            for p in 0..m {
                // S_p on {w(X_p - X_k) >= 0 for k != p}
                if m == 1 {
                    out.cash += w * price_unconditional(model, schedule, &unit(m, p), spot)?;
                } else {
                    let rows: Vec<Vec<f64>> = (0..m)
                        .filter(|&k| k != p)
                        .map(|k| {
                            let mut r = unit(m, p);
                            r[k] -= 1.0;
                            r
                        })
                        .collect();
                    out.push(
                        *w,
                        schedule,
                        PayoffParameterSet::new(unit(m, p), vec![0.0; m - 1], vec![*w; m - 1], rows)?,
                    );
                }
                // minus the same on {w X_p <= w ln K}
                let rows: Vec<Vec<f64>> = (0..m)
                    .map(|i| {
                        if i == p {
                            unit(m, p).iter().map(|x| -x).collect()
                        } else {
                            let mut r = unit(m, p);
                            r[i] -= 1.0;
                            r
                        }
                    })
                    .collect();
                let mut ks = vec![0.0; m];
                ks[p] = -k;
                out.push(-w, schedule, PayoffParameterSet::new(unit(m, p), ks, vec![*w; m], rows)?);
            }
            // cash leg: -wK (1 - 1{w X_k <= w ln K for all k})
            out.push(
                w * strike,
                schedule,
                PayoffParameterSet::new(vec![0.0; m], vec![-k; m], vec![*w; m], identity_rows(m, -1.0))?,
            );
            out.cash -= w * strike * (-model.r * (schedule.expiry() - schedule.t)).exp();
        }
        ContractSpec::Chooser { t1, t_expiry, strike } => {
            let sched = MonitoringSchedule::new(0.0, vec![*t1, *t_expiry])?;
            let switch = (strike * (-model.r * (t_expiry - t1)).exp()).ln();
            let ks = vec![switch, strike.ln()];
            let id = identity_rows(2, 1.0);
            let up = vec![1.0, 1.0];
            let dn = vec![-1.0, -1.0];
            out.push(1.0, &sched, PayoffParameterSet::new(vec![0.0, 1.0], ks.clone(), up.clone(), id.clone())?);
            out.push(-strike, &sched, PayoffParameterSet::new(vec![0.0, 0.0], ks.clone(), up, id.clone())?);
            out.push(*strike, &sched, PayoffParameterSet::new(vec![0.0, 0.0], ks.clone(), dn.clone(), id.clone())?);
            out.push(-1.0, &sched, PayoffParameterSet::new(vec![0.0, 1.0], ks, dn, id)?);
        }
        ContractSpec::Compound { legs } => {
            let thresholds = solve_compound_thresholds(c, model)?;
            return compound_portfolio(legs, &thresholds, 0.0);
        }
        ContractSpec::BarrierDownOutCall {
            schedule,
            barrier,
            strike,
        } => {
            let m = schedule.m();
            let mut ks = vec![barrier.ln(); m];
            ks[m - 1] = strike.max(*barrier).ln();
            let id = identity_rows(m, 1.0);
            out.push(1.0, schedule, PayoffParameterSet::new(unit(m, m - 1), ks.clone(), vec![1.0; m], id.clone())?);
            out.push(-strike, schedule, PayoffParameterSet::new(vec![0.0; m], ks, vec![1.0; m], id)?);
        }
    }
    Ok(out)
}

/// Exercise signs `e_j = Π_{n>=j} w_n`: layer `j` is exercised iff
/// `e_j (X_{T_j} - ln S_j*) > 0`.
pub fn compound_exercise_signs(legs: &[CompoundLeg]) -> Vec<f64> {
    let mut e = vec![0.0; legs.len()];
    let mut acc = 1.0;
    for j in (0..legs.len()).rev() {
        acc *= legs[j].w;
        e[j] = acc;
    }
    e
}

/// Portfolio of a compound valued at `t` (before the first expiry) given its thresholds.
fn compound_portfolio(legs: &[CompoundLeg], thresholds: &[f64], t: f64) -> Result<DigitalPortfolio> {
    let n = legs.len();
    let e = compound_exercise_signs(legs);
    let mut out = DigitalPortfolio::empty();
    let dates: Vec<f64> = legs.iter().map(|l| l.expiry).collect();
    let logs: Vec<f64> = thresholds.iter().map(|s| s.ln()).collect();
    let mut sign = 1.0;
    for j in 1..=n {
        sign *= legs[j - 1].w;
        let sched = MonitoringSchedule::new(t, dates[..j].to_vec())?;
        let p = PayoffParameterSet::new(vec![0.0; j], logs[..j].to_vec(), e[..j].to_vec(), identity_rows(j, 1.0))?;
        out.push(-sign * legs[j - 1].strike, &sched, p);
    }
    let sched = MonitoringSchedule::new(t, dates)?;
    let p = PayoffParameterSet::new(unit(n, n - 1), logs, e, identity_rows(n, 1.0))?;
    out.push(sign, &sched, p);
    Ok(out)
}

/// Exercise thresholds `S_j*` of a compound, innermost outward.
///
/// `S_N* = K_N`; each outer `S_j*` solves `F_{N-j}(s, T_j) = K_j`, where
/// `F_{N-j}` is the compound formed by the inner layers. A zero strike makes a
/// layer's decision trivial; its threshold is then placed at the bracket end
/// that makes the exercise condition always (call) or never (put) hold.
pub fn solve_compound_thresholds(c: &ContractSpec, model: &LevyModel) -> Result<Vec<f64>> {
    let legs = match c {
        ContractSpec::Compound { legs } => legs,
        _ => return Err(PricingError::InvalidInput("not a compound contract".into())),
    };
    c.validate()?;
    let n = legs.len();
    let e = compound_exercise_signs(legs);
    let reference = legs[n - 1].strike;
    let span = 2f64.powi(MAX_BRACKET_DOUBLINGS as i32);
    let mut s = vec![0.0; n];
    s[n - 1] = reference;
    for j in (0..n - 1).rev() {
        let leg = legs[j];
        if leg.strike == 0.0 {
            let always = leg.w > 0.0;
            let low = (e[j] > 0.0) == always;
            s[j] = if low { reference / span } else { reference * span };
            continue;
        }
        let inner = &legs[j + 1..];
        let inner_thresholds = s[j + 1..].to_vec();
        let t = leg.expiry;
        let value = |x: f64| -> Result<f64> {
            let port = compound_portfolio(inner, &inner_thresholds, t)?;
            let tol = if inner.len() == 1 { 1e-11 } else { 1e-9 };
            Ok(price_portfolio(&port, model, x, Some(tol))?.value - leg.strike)
        };
        let (lo, hi) = geometric_bracket(value, leg.strike, MAX_BRACKET_DOUBLINGS).map_err(|e| match e {
            PricingError::NoRoot(msg) => PricingError::NoRoot(format!(
                "layer {} threshold (strike {}): {msg}",
                j + 1,
                leg.strike
            )),
            other => other,
        })?;
        if lo == hi {
            s[j] = lo;
            continue;
        }
        let tol = RootTolerance {
            x_abs: 1e-12,
            x_rel: 0.0,
            f_abs: 0.0,
            max_iter: 200,
        };
        let x = solve_bracketed(|y| value(y.exp()), lo.ln(), hi.ln(), tol)?;
        s[j] = x.exp();
    }
    Ok(s)
}

/// Default contract tolerance per unit of spot, one-dimensional integrals.
pub const CONTRACT_TOL_1D: f64 = 1e-8;
/// Default contract tolerance per unit of spot, multi-dimensional integrals.
pub const CONTRACT_TOL_ND: f64 = 1e-5;

/// Absolute price tolerance used when none is given: proportional to spot.
pub fn default_contract_tol(n: usize, spot: f64) -> f64 {
    spot * if n <= 1 { CONTRACT_TOL_1D } else { CONTRACT_TOL_ND }
}

/// Prices every term and adds the cash. `tol` (by default
/// [`default_contract_tol`] for the largest term) applies to each term's
/// digital price before weighting, divided by `max(1, |coefficient|)`.
pub fn price_portfolio(port: &DigitalPortfolio, model: &LevyModel, spot: f64, tol: Option<f64>) -> Result<PriceResult> {
    let n_max = port.terms.iter().map(|t| t.payoff.n()).max().unwrap_or(1);
    let tol = tol.unwrap_or_else(|| default_contract_tol(n_max, spot));
    let mut value = port.cash;
    let mut error = 0.0;
    let mut evaluations = 0;
    let mut dims = (0, 0);
    let mut offsets = ContourOffsets { omega: Vec::new() };
    for term in &port.terms {
        let t = tol / term.coefficient.abs().max(1.0);
        let r = price_digital(model, &term.schedule, &term.payoff, spot, None, Some(t))?;
        value += term.coefficient * r.value;
        error += term.coefficient.abs() * r.quadrature_error;
        evaluations += r.evaluations;
        if r.dimensions.0 > dims.0 || (r.dimensions.0 == dims.0 && r.dimensions.1 > dims.1) {
            dims = r.dimensions;
            offsets = r.offsets_used;
        }
    }
    Ok(PriceResult {
        value,
        quadrature_error: error,
        offsets_used: offsets,
        dimensions: dims,
        evaluations,
    })
}

/// Contract price: the portfolio value, or the averaging kernel for the
/// continuously averaged Asian.
pub fn price_contract(c: &ContractSpec, model: &LevyModel, spot: f64, tol: Option<f64>) -> Result<PriceResult> {
    if let ContractSpec::AsianContinuous {
        t_start,
        t_end,
        strike,
        w,
    } = c
    {
        c.validate()?;
        return price_asian_continuous(model, *t_start, *t_end, *strike, *w, spot, tol);
    }
    let port = to_portfolio(c, model, spot)?;
    price_portfolio(&port, model, spot, tol)
}

/// Contract price from a single trapezoid level per term (`base` nodes on the
/// shortest axis); used for refinement studies.
pub fn price_contract_fixed(c: &ContractSpec, model: &LevyModel, spot: f64, base: usize) -> Result<f64> {
    if let ContractSpec::AsianContinuous {
        t_start,
        t_end,
        strike,
        w,
    } = c
    {
        c.validate()?;
        let k = AsianKernel::new(model, *t_start, *t_end, *strike, *w, spot, None)?;
        let (v, _, _) = trapezoid_line(&|x| k.integrand(x), k.offset, k.radius, base.max(16))?;
        return Ok((k.norm * v).re);
    }
    let port = to_portfolio(c, model, spot)?;
    let mut value = port.cash;
    for term in &port.terms {
        value += term.coefficient * price_digital_fixed(model, &term.schedule, &term.payoff, spot, None, base)?.value;
    }
    Ok(value)
}

fn gl64() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let (x, w) = gauss_legendre(64);
        // map [-1, 1] to [0, 1]
        (x.iter().map(|x| 0.5 * (x + 1.0)).collect(), w.iter().map(|w| 0.5 * w).collect())
    })
}

/// `∫₀¹ ψ(ξ(1-y)) dy` by 64-point Gauss-Legendre.
pub fn continuous_asian_psi(model: &LevyModel, xi: Complex64) -> Result<Complex64> {
    if !model.in_strip(xi.im) && xi.im != 0.0 {
        return Err(PricingError::StripViolation {
            im: xi.im,
            lo: model.strip.0,
            hi: model.strip.1,
            leg: None,
        });
    }
    Ok(continuous_asian_psi_unchecked(model, xi))
}

fn continuous_asian_psi_unchecked(model: &LevyModel, xi: Complex64) -> Complex64 {
    let (y, w) = gl64();
    let mut s = Complex64::new(0.0, 0.0);
    for (y, w) in y.iter().zip(w) {
        s += w * model.psi_unchecked(xi * (1.0 - y));
    }
    s
}

/// The averaging kernel `-K e^{-rT}/(2π) ∫ e^{iξ ln(S/K) - E(ξ)} / (ξ(ξ+i)) dξ`
/// on `Im ξ = -wω`, where `E(ξ) = T' ψ(ξ) + (T - T') ∫₀¹ ψ(ξ(1-y)) dy`.
struct AsianKernel<'a> {
    model: &'a LevyModel,
    start: f64,
    window: f64,
    moneyness: f64,
    offset: f64,
    radius: f64,
    norm: f64,
    tol: f64,
}

impl<'a> AsianKernel<'a> {
    fn new(
        model: &'a LevyModel,
        t_start: f64,
        t_end: f64,
        strike: f64,
        w: f64,
        spot: f64,
        tol: Option<f64>,
    ) -> Result<Self> {
        check_positive(spot, "spot")?;
        let (lam_minus, lam_plus) = model.strip;
        // ω ∈ ]1, -λ₋[ for calls, ]0, λ₊[ for puts
        let (lo, hi) = if w > 0.0 { (1.0, -lam_minus) } else { (0.0, lam_plus) };
        if !(lo < hi) {
            return Err(PricingError::NoFeasibleOffsets {
                leg: 1,
                reason: format!("averaging kernel needs omega in ]{lo}, {hi}["),
            });
        }
        let moneyness = (spot / strike).ln();
        let window = t_end - t_start;
        let cumulant_avg = |u: f64| -> f64 {
            let (y, wt) = gl64();
            y.iter().zip(wt).map(|(y, wt)| wt * model.cumulant(u * (1.0 - y))).sum()
        };
        let bound = |om: f64| {
            let u = w * om;
            u * moneyness + t_start * model.cumulant(u) + window * cumulant_avg(u)
        };
        let omega = conditioned_offset(lo, hi, bound);
        let tol = tol.unwrap_or_else(|| default_contract_tol(1, spot));
        let norm = strike * (-model.r * t_end).exp() / (2.0 * std::f64::consts::PI);
        let tail_tol = (0.1 * tol / norm * (-bound(omega)).exp()).clamp(1e-300, 0.1);
        let radius = truncation_radius_by(
            |l| {
                let x = Complex64::new(l, 0.0);
                (t_start * model.psi_unchecked(x) + window * continuous_asian_psi_unchecked(model, x)).re
            },
            tail_tol,
        )?;
        Ok(AsianKernel {
            model,
            start: t_start,
            window,
            moneyness,
            offset: -w * omega,
            radius,
            norm: -norm,
            tol,
        })
    }

    fn integrand(&self, xi: Complex64) -> Complex64 {
        let e = self.start * self.model.psi_unchecked(xi) + self.window * continuous_asian_psi_unchecked(self.model, xi);
        (I * xi * self.moneyness - e).exp() / (xi * (xi + I))
    }
}

fn price_asian_continuous(
    model: &LevyModel,
    t_start: f64,
    t_end: f64,
    strike: f64,
    w: f64,
    spot: f64,
    tol: Option<f64>,
) -> Result<PriceResult> {
    let k = AsianKernel::new(model, t_start, t_end, strike, w, spot, tol)?;
    let res = integrate_line(|x| k.integrand(x), k.offset, k.radius, k.tol / k.norm.abs())?;
    let z = k.norm * res.value;
    if z.im.abs() > 1e-8 * (1.0 + z.re.abs()) {
        return Err(PricingError::NaNEncountered(format!(
            "averaging kernel left an imaginary residue {z}"
        )));
    }
    Ok(PriceResult {
        value: z.re,
        quadrature_error: k.norm.abs() * res.error_estimate,
        offsets_used: ContourOffsets::uniform(-k.offset * w, 1),
        dimensions: (1, 0),
        evaluations: res.evaluations,
    })
}

/// Chooser value through its one-dimensional reduction: a call struck at `K`
/// expiring at `T` plus a put struck at `K e^{-r(T-t1)}` expiring at `t1`,
/// each assembled from two single-period digitals.
pub fn chooser_reduced(model: &LevyModel, t1: f64, t_expiry: f64, strike: f64, spot: f64) -> Result<f64> {
    let vanilla = |expiry: f64, k: f64, w: f64| -> Result<f64> {
        let sched = MonitoringSchedule::new(0.0, vec![expiry])?;
        let asset = price_digital(model, &sched, &PayoffParameterSet::single(1.0, 1.0, w, k.ln())?, spot, None, None)?;
        let cash = price_digital(model, &sched, &PayoffParameterSet::single(0.0, 1.0, w, k.ln())?, spot, None, None)?;
        Ok(w * (asset.value - k * cash.value))
    };
    let switch = strike * (-model.r * (t_expiry - t1)).exp();
    Ok(vanilla(t_expiry, strike, 1.0)? + vanilla(t1, switch, -1.0)?)
}

/// Compound put-call parity residual:
/// `F(call on U) - F(put on U) - U + K₁ e^{-r T₁}`, where `U` is the option
/// `(T₂, K₂, w₂)`.
pub fn compound_parity_check(
    model: &LevyModel,
    k1: f64,
    t1: f64,
    k2: f64,
    t2: f64,
    w2: f64,
    spot: f64,
) -> Result<f64> {
    let inner = CompoundLeg {
        expiry: t2,
        strike: k2,
        w: w2,
    };
    let call = ContractSpec::Compound {
        legs: vec![CompoundLeg { expiry: t1, strike: k1, w: 1.0 }, inner],
    };
    let put = ContractSpec::Compound {
        legs: vec![CompoundLeg { expiry: t1, strike: k1, w: -1.0 }, inner],
    };
    let under = ContractSpec::Compound { legs: vec![inner] };
    let tol = Some(1e-9);
    let c = price_contract(&call, model, spot, tol)?.value;
    let p = price_contract(&put, model, spot, tol)?.value;
    let u = price_contract(&under, model, spot, tol)?.value;
    Ok(c - p - u + k1 * (-model.r * t1).exp())
}
