//! Closed-form prices under the Gaussian (Black-Scholes) model.
//!
//! Everything here is built from [`mvn::mvn_cdf`] and elementary functions and
//! works directly with the joint law of the monitored log-prices,
//! `X_{T_k} ~ N(ln S + μ T_k, σ² min(T_a, T_b))` with `μ = r - σ²/2`.
//! The one exception is [`lemma1_contour_side`], which evaluates the contour
//! integral whose value the normal CDF identity predicts.

pub mod mvn;

use num_complex::Complex64;

use crate::contracts::{asian_weights, compound_exercise_signs, CompoundLeg, ContractSpec};
use crate::digital::{MonitoringSchedule, PayoffParameterSet};
use crate::error::{PricingError, Result};
use crate::quadrature::{integrate_line, integrate_tensor, truncation_radius_by, ContourSpec};
use crate::roots::{geometric_bracket, solve_bracketed, RootTolerance};
use mvn::{mvn_cdf, norm_cdf, CorrelationMatrix};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `(2πi)^{-N} ∫ exp(i Σ ξ_k d_k - ½ ξᵀCξ) / Πξ_k dξ` along `Im ξ_k = -w_k ω_k`.
///
/// Equals `(Πw_k) N_N(w ∘ d; WCW)`. `C` must be nonsingular (the truncation
/// radii come from `C⁻¹`) and `N ≤ 3`.
pub fn lemma1_contour_side(d: &[f64], c: &CorrelationMatrix, w: &[f64], omega: &[f64]) -> Result<f64> {
    let n = d.len();
    if c.dim() != n || w.len() != n || omega.len() != n {
        return Err(PricingError::InvalidInput("lemma1: argument lengths disagree".into()));
    }
    if n > 3 {
        return Err(PricingError::DimensionTooLarge { dim: n, max: 3 });
    }
    if omega.iter().any(|&o| !(o > 0.0 && o.is_finite())) {
        return Err(PricingError::NonPositiveInput(format!("offsets {omega:?}")));
    }
    if w.iter().any(|&x| x != 1.0 && x != -1.0) {
        return Err(PricingError::InvalidInput(format!("signs must be ±1, got {w:?}")));
    }
    let cm = c.rows();
    let inv = invert(&cm).ok_or_else(|| PricingError::InvalidInput("lemma1 needs a nonsingular C".into()))?;
    let shift: Vec<f64> = (0..n).map(|k| w[k] * omega[k]).collect();
    let mut log_bound = 0.0;
    for a in 0..n {
        log_bound += shift[a] * d[a];
        for b in 0..n {
            log_bound += 0.5 * shift[a] * cm[a][b] * shift[b];
        }
    }
    let two_pi_n = (2.0 * std::f64::consts::PI).powi(n as i32);
    let tol = if n <= 2 { 1e-9 } else { 1e-6 };
    let tail = (0.1 * tol * two_pi_n * (-log_bound).exp()).clamp(1e-300, 0.1);
    let radii = (0..n)
        .map(|k| truncation_radius_by(|l| 0.5 * l * l / inv[k][k], tail))
        .collect::<Result<Vec<_>>>()?;
    let offsets: Vec<f64> = shift.iter().map(|s| -s).collect();
    let integrand = |xi: &[Complex64]| {
        let mut e = Complex64::new(0.0, 0.0);
        let mut prod = Complex64::new(1.0, 0.0);
        for a in 0..n {
            e += I * xi[a] * d[a];
            prod *= xi[a];
            for b in 0..n {
                e -= 0.5 * cm[a][b] * xi[a] * xi[b];
            }
        }
        e.exp() / prod
    };
    let res = if n == 1 {
        integrate_line(|x| integrand(&[x]), offsets[0], radii[0], tol * two_pi_n)?
    } else {
        let mut spec = ContourSpec::new(offsets, radii)?;
        spec.reflection = Some(if n % 2 == 0 { 1.0 } else { -1.0 });
        integrate_tensor(integrand, &spec, tol * two_pi_n)?
    };
    let z = res.value / Complex64::new(0.0, 2.0 * std::f64::consts::PI).powi(n as i32);
    Ok(z.re)
}

fn invert(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut inv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col];
        for j in 0..n {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for r in 0..n {
            if r != col {
                let f = a[r][col];
                for j in 0..n {
                    a[r][j] -= f * a[col][j];
                    inv[r][j] -= f * inv[col][j];
                }
            }
        }
    }
    Some(inv)
}

fn check_gaussian(sigma: f64, r: f64, spot: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(PricingError::InvalidModel(format!("sigma = {sigma}")));
    }
    if !r.is_finite() {
        return Err(PricingError::InvalidModel(format!("r = {r}")));
    }
    if !(spot > 0.0 && spot.is_finite()) {
        return Err(PricingError::NonPositiveInput(format!("spot = {spot}")));
    }
    Ok(())
}

/// Black-Scholes price of a call (`w = 1`) or put (`w = -1`).
pub fn black_scholes(spot: f64, strike: f64, sigma: f64, r: f64, t: f64, w: f64) -> f64 {
    let v = sigma * t.sqrt();
    let d1 = ((spot / strike).ln() + (r + 0.5 * sigma * sigma) * t) / v;
    let d2 = d1 - v;
    w * (spot * norm_cdf(w * d1) - strike * (-r * t).exp() * norm_cdf(w * d2))
}

/// `e^{-rT} E[(w(e^Y - K))⁺]` for `Y ~ N(mean, var)`.
fn lognormal_option(mean: f64, var: f64, strike: f64, r: f64, t: f64, w: f64) -> f64 {
    let s = var.sqrt();
    let d2 = (mean - strike.ln()) / s;
    let d1 = d2 + s;
    (-r * t).exp() * w * ((mean + 0.5 * var).exp() * norm_cdf(w * d1) - strike * norm_cdf(w * d2))
}

/// Probability that `w_n (Y_n - k_n) >= 0` for all `n`, `Y ~ N(mean, cov)`.
/// Components with zero variance act as sure or impossible events.
fn gaussian_orthant(mean: &[f64], cov: &[Vec<f64>], k: &[f64], w: &[f64]) -> Result<f64> {
    let n = mean.len();
    let scale = cov.iter().enumerate().map(|(i, r)| r[i]).fold(0.0, f64::max).max(1e-300);
    let mut idx = Vec::new();
    for i in 0..n {
        if cov[i][i] <= 1e-14 * scale {
            if w[i] * (mean[i] - k[i]) < 0.0 {
                return Ok(0.0);
            }
        } else {
            idx.push(i);
        }
    }
    if idx.is_empty() {
        return Ok(1.0);
    }
    let sd: Vec<f64> = idx.iter().map(|&i| cov[i][i].sqrt()).collect();
    let d: Vec<f64> = idx
        .iter()
        .zip(&sd)
        .map(|(&i, s)| w[i] * (mean[i] - k[i]) / s)
        .collect();
    let rows: Vec<Vec<f64>> = idx
        .iter()
        .enumerate()
        .map(|(a, &i)| {
            idx.iter()
                .enumerate()
                .map(|(b, &j)| {
                    if a == b {
                        1.0
                    } else {
                        (w[i] * w[j] * cov[i][j] / (sd[a] * sd[b])).clamp(-1.0, 1.0)
                    }
                })
                .collect()
        })
        .collect();
    mvn_cdf(&d, &CorrelationMatrix::new(rows)?)
}

/// Joint law of `(X_{T_1}, …, X_{T_M})` under the measure tilted by `e^{γ·X}`,
/// and the tilt's normalising factor `ln E[e^{γ·X}]`.
fn tilted_log_prices(sigma: f64, r: f64, spot: f64, t0: f64, dates: &[f64], gamma: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>, f64) {
    let mu = r - 0.5 * sigma * sigma;
    let m = dates.len();
    let cov: Vec<Vec<f64>> = (0..m)
        .map(|a| (0..m).map(|b| sigma * sigma * (dates[a].min(dates[b]) - t0)).collect())
        .collect();
    let base: Vec<f64> = dates.iter().map(|t| spot.ln() + mu * (t - t0)).collect();
    let mut log_mgf = 0.0;
    let mut mean = base.clone();
    for a in 0..m {
        log_mgf += gamma[a] * base[a];
        for b in 0..m {
            mean[a] += cov[a][b] * gamma[b];
            log_mgf += 0.5 * gamma[a] * cov[a][b] * gamma[b];
        }
    }
    (mean, cov, log_mgf)
}

/// Power digital price from the joint normal law of the monitored log-prices.
pub fn gaussian_power_digital(
    sigma: f64,
    r: f64,
    sched: &MonitoringSchedule,
    p: &PayoffParameterSet,
    spot: f64,
) -> Result<f64> {
    check_gaussian(sigma, r, spot)?;
    sched.validate()?;
    p.validate()?;
    if sched.m() != p.m() {
        return Err(PricingError::InvalidInput("schedule and payoff disagree on M".into()));
    }
    if p.n() > mvn::MAX_DIM {
        return Err(PricingError::DimensionTooLarge { dim: p.n(), max: mvn::MAX_DIM });
    }
    let (mean, cov, log_mgf) = tilted_log_prices(sigma, r, spot, sched.t, &sched.dates, &p.gamma);
    let m = sched.m();
    let y_mean: Vec<f64> = p.a.iter().map(|row| (0..m).map(|k| row[k] * mean[k]).sum()).collect();
    let y_cov: Vec<Vec<f64>> = p
        .a
        .iter()
        .map(|ra| {
            p.a.iter()
                .map(|rb| (0..m).map(|i| (0..m).map(|j| ra[i] * cov[i][j] * rb[j]).sum::<f64>()).sum())
                .collect()
        })
        .collect();
    let prob = gaussian_orthant(&y_mean, &y_cov, &p.k_log, &p.w)?;
    Ok((-r * (sched.expiry() - sched.t)).exp() * log_mgf.exp() * prob)
}

/// Exercise threshold of one compound layer.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Threshold {
    At(f64),
    Always,
    Never,
}

/// Value at time `t` (spot `s`) of a compound whose thresholds are known.
fn compound_value(legs: &[CompoundLeg], th: &[Threshold], sigma: f64, r: f64, s: f64, t: f64) -> Result<f64> {
    let e = compound_exercise_signs(legs);
    let n = legs.len();
    // cumulative event over the first j layers: D⁻, D⁺ rows and correlations
    let probability = |j: usize, plus: bool| -> Result<f64> {
        let mut rows = Vec::new();
        for (i, th) in th.iter().enumerate().take(j) {
            match th {
                Threshold::Never => return Ok(0.0),
                Threshold::Always => {}
                Threshold::At(x) => rows.push((i, *x)),
            }
        }
        let drift = if plus { r + 0.5 * sigma * sigma } else { r - 0.5 * sigma * sigma };
        let d: Vec<f64> = rows
            .iter()
            .map(|&(i, x)| {
                let tau = legs[i].expiry - t;
                e[i] * ((s / x).ln() + drift * tau) / (sigma * tau.sqrt())
            })
            .collect();
        let corr: Vec<Vec<f64>> = rows
            .iter()
            .map(|&(a, _)| {
                rows.iter()
                    .map(|&(b, _)| {
                        if a == b {
                            1.0
                        } else {
                            let (ta, tb) = (legs[a].expiry - t, legs[b].expiry - t);
                            e[a] * e[b] * (ta.min(tb) / ta.max(tb)).sqrt()
                        }
                    })
                    .collect()
            })
            .collect();
        if d.is_empty() {
            return Ok(1.0);
        }
        mvn_cdf(&d, &CorrelationMatrix::new(corr)?)
    };
    let mut value = 0.0;
    let mut sign = 1.0;
    for j in 1..=n {
        sign *= legs[j - 1].w;
        let k = legs[j - 1].strike;
        if k != 0.0 {
            value -= sign * k * (-r * (legs[j - 1].expiry - t)).exp() * probability(j, false)?;
        }
    }
    value += sign * s * probability(n, true)?;
    Ok(value)
}

fn compound_thresholds(legs: &[CompoundLeg], sigma: f64, r: f64) -> Result<Vec<Threshold>> {
    let n = legs.len();
    let mut th = vec![Threshold::At(legs[n - 1].strike); n];
    for j in (0..n - 1).rev() {
        let leg = legs[j];
        if leg.strike == 0.0 {
            th[j] = if leg.w > 0.0 { Threshold::Always } else { Threshold::Never };
            continue;
        }
        let inner = &legs[j + 1..];
        let inner_th = th[j + 1..].to_vec();
        let f = |x: f64| compound_value(inner, &inner_th, sigma, r, x, leg.expiry).map(|v| v - leg.strike);
        let (lo, hi) = geometric_bracket(f, leg.strike, 60)?;
        th[j] = if lo == hi {
            Threshold::At(lo)
        } else {
            let tol = RootTolerance {
                x_abs: 1e-13,
                x_rel: 0.0,
                f_abs: 0.0,
                max_iter: 200,
            };
            Threshold::At(solve_bracketed(|y| f(y.exp()), lo.ln(), hi.ln(), tol)?.exp())
        };
    }
    Ok(th)
}

/// Critical prices `S_j*` of a Gaussian compound (Geske). Layers that are
/// always exercised report `0` (or `∞` when the exercise side is below the
/// threshold); never-exercised layers report the opposite end.
pub fn compound_critical_prices(legs: &[CompoundLeg], sigma: f64, r: f64) -> Result<Vec<f64>> {
    ContractSpec::Compound { legs: legs.to_vec() }.validate()?;
    check_gaussian(sigma, r, 1.0)?;
    let e = compound_exercise_signs(legs);
    Ok(compound_thresholds(legs, sigma, r)?
        .iter()
        .zip(&e)
        .map(|(t, &e)| match t {
            Threshold::At(x) => *x,
            Threshold::Always => if e > 0.0 { 0.0 } else { f64::INFINITY },
            Threshold::Never => if e > 0.0 { f64::INFINITY } else { 0.0 },
        })
        .collect())
}

fn unsupported(what: &str) -> PricingError {
    PricingError::UnsupportedContract(format!("no Gaussian closed form for {what}"))
}

/// Gaussian closed-form price of a contract, valued at time 0 (or at the
/// schedule's valuation date for digitals).
pub fn closed_form_price(c: &ContractSpec, sigma: f64, r: f64, spot: f64) -> Result<f64> {
    check_gaussian(sigma, r, spot)?;
    c.validate()?;
    let mu = r - 0.5 * sigma * sigma;
    match c {
        ContractSpec::Digital { schedule, payoff } => gaussian_power_digital(sigma, r, schedule, payoff, spot),
        ContractSpec::ForwardStart { t1, t2, w } => {
            // at T₁ the option is an at-the-money vanilla on S_{T₁}
            let tau = t2 - t1;
            Ok(black_scholes(1.0, 1.0, sigma, r, tau, *w) * spot)
        }
        ContractSpec::AsianGeometric {
            schedule,
            strike,
            w,
            weights,
        } => {
            let theta = asian_weights(weights, schedule.m());
            let tau = schedule.increments();
            // ln G = ln S + Σ_j λ_j Δ_j with λ_j = Σ_{k>=j} θ_k
            let mut lambda = 0.0;
            let (mut mean, mut var) = (spot.ln(), 0.0);
            for j in (0..theta.len()).rev() {
                lambda += theta[j];
                mean += mu * lambda * tau[j];
                var += sigma * sigma * lambda * lambda * tau[j];
            }
            Ok(lognormal_option(mean, var, *strike, r, schedule.expiry() - schedule.t, *w))
        }
        ContractSpec::AsianContinuous {
            t_start,
            t_end,
            strike,
            w,
        } => {
            let window = t_end - t_start;
            let mean = spot.ln() + mu * (t_start + 0.5 * window);
            let var = sigma * sigma * (t_start + window / 3.0);
            Ok(lognormal_option(mean, var, *strike, r, *t_end, *w))
        }
        ContractSpec::Chooser { t1, t_expiry, strike } => {
            let switch = strike * (-r * (t_expiry - t1)).exp();
            Ok(black_scholes(spot, *strike, sigma, r, *t_expiry, 1.0) + black_scholes(spot, switch, sigma, r, *t1, -1.0))
        }
        ContractSpec::Compound { legs } => {
            let th = compound_thresholds(legs, sigma, r)?;
            compound_value(legs, &th, sigma, r, spot, 0.0)
        }
        ContractSpec::BarrierDownOutCall {
            schedule,
            barrier,
            strike,
        } => {
            let m = schedule.m();
            if m > mvn::MAX_DIM {
                return Err(unsupported("barriers with more than six monitoring dates"));
            }
            let times: Vec<f64> = schedule.dates.iter().map(|d| d - schedule.t).collect();
            let levels: Vec<f64> = (0..m).map(|j| if j + 1 == m { strike.max(*barrier) } else { *barrier }).collect();
            let corr: Vec<Vec<f64>> = (0..m)
                .map(|a| (0..m).map(|b| (times[a].min(times[b]) / times[a].max(times[b])).sqrt()).collect())
                .collect();
            let c = CorrelationMatrix::new(corr)?;
            let d = |drift: f64| -> Vec<f64> {
                (0..m)
                    .map(|j| ((spot / levels[j]).ln() + drift * times[j]) / (sigma * times[j].sqrt()))
                    .collect()
            };
            let big_t = times[m - 1];
            Ok(spot * mvn_cdf(&d(r + 0.5 * sigma * sigma), &c)?
                - strike * (-r * big_t).exp() * mvn_cdf(&d(mu), &c)?)
        }
        ContractSpec::LookbackFixed { schedule, strike, w } => {
            // Σ_p over the index attaining the extremum: w(S_p - K) on
            // {w X_p >= w X_k for all k, w X_p >= w ln K}
            let m = schedule.m();
            let big_t = schedule.expiry() - schedule.t;
            let mut value = 0.0;
            for p in 0..m {
                let mut rows = Vec::with_capacity(m);
                for k in 0..m {
                    let mut row = vec![0.0; m];
                    row[p] = 1.0;
                    if k != p {
                        row[k] = -1.0;
                    }
                    rows.push(row);
                }
                let ks: Vec<f64> = (0..m).map(|k| if k == p { strike.ln() } else { 0.0 }).collect();
                let event = |gamma: &[f64]| -> Result<f64> {
                    let (mean, cov, log_mgf) = tilted_log_prices(sigma, r, spot, schedule.t, &schedule.dates, gamma);
                    let y_mean: Vec<f64> = rows.iter().map(|row| (0..m).map(|i| row[i] * mean[i]).sum()).collect();
                    let y_cov: Vec<Vec<f64>> = rows
                        .iter()
                        .map(|ra| {
                            rows.iter()
                                .map(|rb| (0..m).map(|i| (0..m).map(|j| ra[i] * cov[i][j] * rb[j]).sum::<f64>()).sum())
                                .collect()
                        })
                        .collect();
                    Ok(log_mgf.exp() * gaussian_orthant(&y_mean, &y_cov, &ks, &vec![*w; m])?)
                };
                let mut gp = vec![0.0; m];
                gp[p] = 1.0;
                value += w * (event(&gp)? - strike * event(&vec![0.0; m])?);
            }
            Ok((-r * big_t).exp() * value)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contracts::{price_contract, CompoundLeg};
    use crate::digital::price_digital;
    use crate::levy::LevyModel;
    use crate::quadrature::adaptive_gk15;
    use mvn::norm_pdf;

    #[test]
    fn lemma1_examples() {
        let one = CorrelationMatrix::identity(1);
        let v = lemma1_contour_side(&[0.0], &one, &[1.0], &[1.0]).unwrap();
        assert!((v - 0.5).abs() < 1e-9);
        let c = CorrelationMatrix::new(vec![vec![1.0, 0.3], vec![0.3, 1.0]]).unwrap();
        let v = lemma1_contour_side(&[1.0, -0.5], &c, &[1.0, -1.0], &[0.7, 1.1]).unwrap();
        let expected = -mvn::bvn_cdf(1.0, 0.5, -0.3);
        assert!((v - expected).abs() < 1e-8, "{v} vs {expected}");
        let a = lemma1_contour_side(&[1.0, -0.5], &c, &[1.0, -1.0], &[0.5, 0.5]).unwrap();
        let b = lemma1_contour_side(&[1.0, -0.5], &c, &[1.0, -1.0], &[2.0, 1.0]).unwrap();
        assert!((a - b).abs() < 1e-8);
    }

    #[test]
    fn lemma1_three_dimensions() {
        let c = CorrelationMatrix::new(vec![vec![1.0, 0.2, -0.1], vec![0.2, 1.0, 0.4], vec![-0.1, 0.4, 1.0]]).unwrap();
        let d = [0.3, -0.2, 0.5];
        let w = [1.0, -1.0, 1.0];
        let v = lemma1_contour_side(&d, &c, &w, &[0.6, 0.6, 0.6]).unwrap();
        let wd: Vec<f64> = d.iter().zip(&w).map(|(a, b)| a * b).collect();
        let expected = -mvn_cdf(&wd, &c.signed(&w)).unwrap();
        assert!((v - expected).abs() < 1e-5, "{v} vs {expected}");
    }

    #[test]
    fn forward_start_example() {
        let v = closed_form_price(&ContractSpec::ForwardStart { t1: 1.0, t2: 2.0, w: 1.0 }, 0.2, 0.05, 100.0).unwrap();
        let expected = 100.0 * (norm_cdf(0.35) - (-0.05f64).exp() * norm_cdf(0.15));
        assert!((v - expected).abs() < 1e-12);
        assert!((v / 100.0 - 0.1045).abs() < 1e-4);
    }

    #[test]
    fn one_fold_compound_is_vanilla() {
        let c = ContractSpec::Compound {
            legs: vec![CompoundLeg { expiry: 1.0, strike: 100.0, w: 1.0 }],
        };
        let v = closed_form_price(&c, 0.2, 0.05, 100.0).unwrap();
        assert!((v - 10.4506).abs() < 1e-4);
        assert!((v - black_scholes(100.0, 100.0, 0.2, 0.05, 1.0, 1.0)).abs() < 1e-12);
    }

    #[test]
    fn chooser_with_vanishing_strike() {
        let c = ContractSpec::Chooser {
            t1: 0.5,
            t_expiry: 1.0,
            strike: 1e-8,
        };
        let v = closed_form_price(&c, 0.2, 0.05, 100.0).unwrap();
        assert!((v - (100.0 - 1e-8 * (-0.05f64).exp())).abs() < 1e-9);
    }

    #[test]
    fn asian_one_date_and_equal_weights_factor() {
        let sched = MonitoringSchedule::new(0.0, vec![1.0]).unwrap();
        let c = ContractSpec::AsianGeometric {
            schedule: sched,
            strike: 90.0,
            w: -1.0,
            weights: vec![],
        };
        let v = closed_form_price(&c, 0.3, 0.02, 100.0).unwrap();
        assert!((v - black_scholes(100.0, 90.0, 0.3, 0.02, 1.0, -1.0)).abs() < 1e-12);
        // equally spaced, equally weighted: variance σ²T(M+1)(2M+1)/(6M²)
        let m = 4;
        let sched = MonitoringSchedule::uniform(0.0, 1.0, m).unwrap();
        let theta = asian_weights(&[], m);
        let tau = sched.increments();
        let mut lambda = 0.0;
        let mut var = 0.0;
        for j in (0..m).rev() {
            lambda += theta[j];
            var += lambda * lambda * tau[j];
        }
        let mf = m as f64;
        assert!((var - (mf + 1.0) * (2.0 * mf + 1.0) / (6.0 * mf * mf)).abs() < 1e-14);
    }

    #[test]
    fn power_digital_matches_density_quadrature() {
        // S_T^2 1{X_T >= ln 90}
        let (sigma, r, s, t) = (0.25, 0.03, 100.0, 0.7);
        let sched = MonitoringSchedule::new(0.0, vec![t]).unwrap();
        let p = PayoffParameterSet::single(2.0, 1.0, 1.0, 90f64.ln()).unwrap();
        let v = gaussian_power_digital(sigma, r, &sched, &p, s).unwrap();
        let mean = s.ln() + (r - 0.5 * sigma * sigma) * t;
        let sd = sigma * t.sqrt();
        let lo = (90f64.ln() - mean) / sd;
        let oracle = (-r * t).exp() * adaptive_gk15(|z| (2.0 * (mean + sd * z)).exp() * norm_pdf(z), lo, 12.0, 1e-9);
        assert!((v - oracle).abs() < 1e-9 * oracle, "{v} vs {oracle}");
    }

    #[test]
    fn fourier_agrees_on_two_period_digital() {
        let m = LevyModel::gaussian(0.2, 0.05).unwrap();
        let sched = MonitoringSchedule::new(0.0, vec![0.5, 1.0]).unwrap();
        let p = PayoffParameterSet::new(
            vec![0.5, 0.5],
            vec![4.5, 4.7],
            vec![1.0, -1.0],
            vec![vec![1.0, 0.0], vec![0.3, 0.7]],
        )
        .unwrap();
        let f = price_digital(&m, &sched, &p, 100.0, None, Some(1e-9)).unwrap().value;
        let g = gaussian_power_digital(0.2, 0.05, &sched, &p, 100.0).unwrap();
        assert!((f - g).abs() < 1e-6 * g.abs(), "{f} vs {g}");
    }

    #[test]
    fn geske_critical_price_matches_engine() {
        let legs = vec![
            CompoundLeg { expiry: 0.5, strike: 5.0, w: 1.0 },
            CompoundLeg { expiry: 1.0, strike: 100.0, w: 1.0 },
        ];
        let cf = compound_critical_prices(&legs, 0.2, 0.05).unwrap();
        // the critical price makes the T₁ value of the inner call equal K₁
        let inner = black_scholes(cf[0], 100.0, 0.2, 0.05, 0.5, 1.0);
        assert!((inner - 5.0).abs() < 1e-10);
        let m = LevyModel::gaussian(0.2, 0.05).unwrap();
        let eng = crate::contracts::solve_compound_thresholds(&ContractSpec::Compound { legs: legs.clone() }, &m).unwrap();
        assert!((eng[0] - cf[0]).abs() < 1e-6 * cf[0]);
        let c = ContractSpec::Compound { legs };
        let a = closed_form_price(&c, 0.2, 0.05, 100.0).unwrap();
        let b = price_contract(&c, &m, 100.0, None).unwrap().value;
        assert!((a - b).abs() < 1e-4 * a, "{a} vs {b}");
    }

    #[test]
    fn lookback_and_barrier_agree_with_engine() {
        let m = LevyModel::gaussian(0.2, 0.05).unwrap();
        let sched = MonitoringSchedule::new(0.0, vec![0.5, 1.0]).unwrap();
        for w in [1.0, -1.0] {
            let c = ContractSpec::LookbackFixed {
                schedule: sched.clone(),
                strike: 100.0,
                w,
            };
            let a = closed_form_price(&c, 0.2, 0.05, 100.0).unwrap();
            let b = price_contract(&c, &m, 100.0, None).unwrap().value;
            assert!((a - b).abs() < 1e-4 * a, "w={w}: {a} vs {b}");
        }
        let c = ContractSpec::BarrierDownOutCall {
            schedule: sched,
            barrier: 90.0,
            strike: 100.0,
        };
        let a = closed_form_price(&c, 0.2, 0.05, 100.0).unwrap();
        let b = price_contract(&c, &m, 100.0, None).unwrap().value;
        assert!((a - b).abs() < 1e-4 * a, "{a} vs {b}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let c = ContractSpec::ForwardStart { t1: 1.0, t2: 2.0, w: 1.0 };
        assert!(matches!(closed_form_price(&c, 0.0, 0.05, 100.0), Err(PricingError::InvalidModel(_))));
        assert!(matches!(closed_form_price(&c, 0.2, 0.05, -1.0), Err(PricingError::NonPositiveInput(_))));
    }
}
