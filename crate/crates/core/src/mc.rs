//! Monte Carlo prices from paths sampled at the monitoring dates.
//!
//! Path `i` draws from its own ChaCha stream (`set_stream(i)` on a generator
//! seeded once), so results do not depend on batch layout or on the total
//! number of paths. Batch statistics are merged in a fixed order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, InverseGaussian, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::contracts::{asian_weights, price_contract, CompoundLeg, ContractSpec};
use crate::digital::MonitoringSchedule;
use crate::error::{PricingError, Result};
use crate::levy::{LevyModel, ModelKind};

const BATCH: usize = 4096;
/// Sub-steps used to discretise a continuous average.
pub const CONTINUOUS_AVERAGE_STEPS: usize = 256;
/// Grid points of the tabulated inner value in nested compound pricing.
const INNER_GRID: usize = 801;
/// Half-width of that grid in standard deviations of `X_{T_1}`.
const INNER_GRID_SDS: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MCResult {
    pub estimate: f64,
    pub stderr: f64,
    pub n_paths: usize,
    pub seed: u64,
}

/// Exact sampler of one increment of `X` over a step of length `tau`.
#[derive(Clone, Copy)]
enum Increment {
    Gaussian { mean: f64, sd: f64 },
    Nig { drift: f64, beta: f64, ig: InverseGaussian<f64> },
}

impl Increment {
    fn new(model: &LevyModel, tau: f64) -> Result<Self> {
        match model.kind {
            ModelKind::Gaussian { sigma } => Ok(Increment::Gaussian {
                mean: model.mu * tau,
                sd: sigma * tau.sqrt(),
            }),
            ModelKind::Nig { alpha, beta, delta } => {
                // X_τ = μτ + βZ + √Z N, Z ~ IG(δτ/γ, (δτ)²)
                let gamma = (alpha * alpha - beta * beta).sqrt();
                let ig = InverseGaussian::new(delta * tau / gamma, (delta * tau).powi(2))
                    .map_err(|e| PricingError::InvalidModel(format!("inverse Gaussian: {e}")))?;
                Ok(Increment::Nig {
                    drift: model.mu * tau,
                    beta,
                    ig,
                })
            }
            ModelKind::Cgmy { .. } => Err(PricingError::UnsupportedModel(
                "no exact CGMY sampler; Monte Carlo supports gaussian and nig".into(),
            )),
        }
    }

    #[inline]
    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            Increment::Gaussian { mean, sd } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + sd * z
            }
            Increment::Nig { drift, beta, ig } => {
                let t = ig.sample(rng);
                let z: f64 = rng.sample(StandardNormal);
                drift + beta * t + t.sqrt() * z
            }
        }
    }
}

fn check_request(n_paths: usize) -> Result<()> {
    if n_paths == 0 {
        return Err(PricingError::InvalidInput("n_paths must be >= 1".into()));
    }
    Ok(())
}

fn path_rng(base: &ChaCha8Rng, i: usize) -> ChaCha8Rng {
    let mut rng = base.clone();
    rng.set_stream(i as u64);
    rng
}

/// Increments `X_{T_j} - X_{T_{j-1}}` (from `X_t = 0`) for every path: an
/// `n_paths × M` matrix, row `i` drawn from substream `i`.
pub fn simulate_monitoring(model: &LevyModel, sched: &MonitoringSchedule, n_paths: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    check_request(n_paths)?;
    sched.validate()?;
    let steps = sched
        .increments()
        .iter()
        .map(|&tau| Increment::new(model, tau))
        .collect::<Result<Vec<_>>>()?;
    let base = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(&base, i);
            let mut x = 0.0;
            steps
                .iter()
                .map(|s| {
                    x += s.sample(&mut rng);
                    x
                })
                .collect()
        })
        .collect())
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if self.n == 0.0 {
            return o;
        }
        if o.n == 0.0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * o.n / n,
            m2: self.m2 + o.m2 + d * d * self.n * o.n / n,
        }
    }
}

/// Uniform grid of the inner option value at `T_1`, in log-spot, with
/// Catmull-Rom interpolation and linear asymptotes outside.
struct InnerTable {
    x0: f64,
    h: f64,
    values: Vec<f64>,
    leg: CompoundLeg,
    r: f64,
    horizon: f64,
}

impl InnerTable {
    fn new(model: &LevyModel, spot: f64, t1: f64, leg: CompoundLeg) -> Result<Self> {
        let horizon = leg.expiry - t1;
        let centre = spot.ln() + model.mu * t1;
        let half = INNER_GRID_SDS * (model.variance() * t1).sqrt() + 1.0;
        let x0 = centre - half;
        let h = 2.0 * half / (INNER_GRID - 1) as f64;
        let inner = ContractSpec::Compound {
            legs: vec![CompoundLeg { expiry: horizon, ..leg }],
        };
        let values = (0..INNER_GRID)
            .map(|k| Ok(price_contract(&inner, model, (x0 + k as f64 * h).exp(), Some(1e-10))?.value))
            .collect::<Result<Vec<_>>>()?;
        Ok(InnerTable {
            x0,
            h,
            values,
            leg,
            r: model.r,
            horizon,
        })
    }

    fn value(&self, x: f64) -> f64 {
        let u = (x - self.x0) / self.h;
        let last = (INNER_GRID - 1) as f64;
        if !(u >= 1.0 && u <= last - 1.0) {
            // deep in or out of the money
            let fwd = x.exp() - self.leg.strike * (-self.r * self.horizon).exp();
            return (self.leg.w * fwd).max(0.0);
        }
        let k = (u.floor() as usize).min(INNER_GRID - 3);
        let s = u - k as f64;
        let (p0, p1, p2, p3) = (self.values[k - 1], self.values[k], self.values[k + 1], self.values[k + 2]);
        p1 + 0.5
            * s
            * (p2 - p0 + s * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + s * (3.0 * (p1 - p2) + p3 - p0)))
    }
}

/// Simulation dates and pathwise discounted payoff of a contract.
struct PathPayoff<'a> {
    sched: MonitoringSchedule,
    payoff: Box<dyn Fn(&[f64]) -> f64 + Sync + 'a>,
}

fn path_payoff<'a>(c: &'a ContractSpec, model: &LevyModel, spot: f64) -> Result<PathPayoff<'a>> {
    let r = model.r;
    let ls = spot.ln();
    Ok(match c {
        ContractSpec::Digital { schedule, payoff } => {
            let disc = (-r * (schedule.expiry() - schedule.t)).exp();
            PathPayoff {
                sched: schedule.clone(),
                payoff: Box::new(move |x| {
                    let hit = payoff.a.iter().enumerate().all(|(n, row)| {
                        let y: f64 = row.iter().zip(x).map(|(a, x)| a * (ls + x)).sum();
                        payoff.w[n] * (y - payoff.k_log[n]) >= 0.0
                    });
                    if !hit {
                        return 0.0;
                    }
                    let g: f64 = payoff.gamma.iter().zip(x).map(|(g, x)| g * (ls + x)).sum();
                    disc * g.exp()
                }),
            }
        }
        ContractSpec::ForwardStart { t1, t2, w } => {
            let disc = (-r * t2).exp();
            PathPayoff {
                sched: MonitoringSchedule::new(0.0, vec![*t1, *t2])?,
                payoff: Box::new(move |x| disc * spot * (w * (x[1].exp() - x[0].exp())).max(0.0)),
            }
        }
        ContractSpec::AsianGeometric {
            schedule,
            strike,
            w,
            weights,
        } => {
            let theta = asian_weights(weights, schedule.m());
            let disc = (-r * (schedule.expiry() - schedule.t)).exp();
            PathPayoff {
                sched: schedule.clone(),
                payoff: Box::new(move |x| {
                    let avg: f64 = theta.iter().zip(x).map(|(t, x)| t * x).sum();
                    disc * (w * (spot * avg.exp() - strike)).max(0.0)
                }),
            }
        }
        ContractSpec::AsianContinuous {
            t_start,
            t_end,
            strike,
            w,
        } => {
            let steps = CONTINUOUS_AVERAGE_STEPS;
            let h = (t_end - t_start) / steps as f64;
            let mut dates: Vec<f64> = (1..=steps).map(|k| t_start + k as f64 * h).collect();
            let leading = *t_start > 0.0;
            if leading {
                dates.insert(0, *t_start);
            }
            let disc = (-r * t_end).exp();
            PathPayoff {
                sched: MonitoringSchedule::new(0.0, dates)?,
                payoff: Box::new(move |x| {
                    // trapezoid average of X over the window
                    let (start, rest) = if leading { (x[0], &x[1..]) } else { (0.0, x) };
                    let mut s = 0.5 * (start + rest[steps - 1]);
                    for v in &rest[..steps - 1] {
                        s += v;
                    }
                    disc * (w * (spot * (s / steps as f64).exp() - strike)).max(0.0)
                }),
            }
        }
        ContractSpec::LookbackFixed { schedule, strike, w } => {
            let disc = (-r * (schedule.expiry() - schedule.t)).exp();
            PathPayoff {
                sched: schedule.clone(),
                payoff: Box::new(move |x| {
                    let ext = if *w > 0.0 {
                        x.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                    } else {
                        x.iter().cloned().fold(f64::INFINITY, f64::min)
                    };
                    disc * (w * (spot * ext.exp() - strike)).max(0.0)
                }),
            }
        }
        ContractSpec::Chooser { t1, t_expiry, strike } => {
            // call iff its value exceeds the put's: S_{T₁} > K e^{-r(T-T₁)}
            let switch = (strike * (-r * (t_expiry - t1)).exp() / spot).ln();
            let disc = (-r * t_expiry).exp();
            PathPayoff {
                sched: MonitoringSchedule::new(0.0, vec![*t1, *t_expiry])?,
                payoff: Box::new(move |x| {
                    let w = if x[0] > switch { 1.0 } else { -1.0 };
                    disc * (w * (spot * x[1].exp() - strike)).max(0.0)
                }),
            }
        }
        ContractSpec::Compound { legs } => match legs.len() {
            1 => {
                let leg = legs[0];
                let disc = (-r * leg.expiry).exp();
                PathPayoff {
                    sched: MonitoringSchedule::new(0.0, vec![leg.expiry])?,
                    payoff: Box::new(move |x| disc * (leg.w * (spot * x[0].exp() - leg.strike)).max(0.0)),
                }
            }
            2 => {
                let outer = legs[0];
                let table = InnerTable::new(model, spot, outer.expiry, legs[1])?;
                let disc = (-r * outer.expiry).exp();
                PathPayoff {
                    sched: MonitoringSchedule::new(0.0, vec![outer.expiry])?,
                    payoff: Box::new(move |x| disc * (outer.w * (table.value(ls + x[0]) - outer.strike)).max(0.0)),
                }
            }
            n => return Err(PricingError::NestingTooDeep(n)),
        },
        ContractSpec::BarrierDownOutCall {
            schedule,
            barrier,
            strike,
        } => {
            let lb = (barrier / spot).ln();
            let disc = (-r * (schedule.expiry() - schedule.t)).exp();
            PathPayoff {
                sched: schedule.clone(),
                payoff: Box::new(move |x| {
                    if x.iter().any(|&v| v < lb) {
                        return 0.0;
                    }
                    disc * (spot * x[x.len() - 1].exp() - strike).max(0.0)
                }),
            }
        }
    })
}

/// Discounted sample mean of the pathwise payoff with its standard error.
pub fn mc_price(c: &ContractSpec, model: &LevyModel, spot: f64, n_paths: usize, seed: u64) -> Result<MCResult> {
    check_request(n_paths)?;
    c.validate()?;
    if !(spot > 0.0 && spot.is_finite()) {
        return Err(PricingError::NonPositiveInput(format!("spot = {spot}")));
    }
    if let ModelKind::Cgmy { .. } = model.kind {
        return Err(PricingError::UnsupportedModel(
            "no exact CGMY sampler; Monte Carlo supports gaussian and nig".into(),
        ));
    }
    let pp = path_payoff(c, model, spot)?;
    let steps = pp
        .sched
        .increments()
        .iter()
        .map(|&tau| Increment::new(model, tau))
        .collect::<Result<Vec<_>>>()?;
    let base = ChaCha8Rng::seed_from_u64(seed);
    let batches = n_paths.div_ceil(BATCH);
    let parts: Vec<Moments> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut m = Moments::default();
            let mut x = vec![0.0; steps.len()];
            for i in b * BATCH..((b + 1) * BATCH).min(n_paths) {
                let mut rng = path_rng(&base, i);
                let mut acc = 0.0;
                for (slot, s) in x.iter_mut().zip(&steps) {
                    acc += s.sample(&mut rng);
                    *slot = acc;
                }
                m.push((pp.payoff)(&x));
            }
            m
        })
        .collect();
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    let var = if total.n > 1.0 { total.m2 / (total.n - 1.0) } else { 0.0 };
    Ok(MCResult {
        estimate: total.mean,
        stderr: (var / total.n).sqrt(),
        n_paths,
        seed,
    })
}
