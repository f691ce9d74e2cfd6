//! Characteristic exponents of regular Lévy processes of exponential type.
//!
//! A model is described by its characteristic exponent `ψ`, defined through
//! `E[exp(iξX_t)] = exp(-t ψ(ξ))`, together with the open strip
//! `λ₋ < Im ξ < λ₊` on which `ψ` is holomorphic and the order `υ` of its
//! growth `Re ψ(ξ) ~ c|ξ|^υ`. Every exponent has the form `ψ(ξ) = -iμξ + φ(ξ)`
//! where `φ` is the drift-free part.
//!
//! Risk-neutral models are built by mean correction (`μ = r + φ(-i)`), which
//! enforces `r + ψ(-i) = 0`. An Esscher transform of a historic model is
//! available through [`esscher_calibrate`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use libm::tgamma as gamma;

use crate::error::{PricingError, Result};
use crate::roots::{solve_bracketed, RootTolerance};

/// Default half-width of the strip reported for Brownian motion, which is
/// holomorphic everywhere.
pub const GAUSSIAN_STRIP_PROXY: f64 = 50.0;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Model family and its shape parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum ModelKind {
    Gaussian { sigma: f64 },
    Nig { alpha: f64, beta: f64, delta: f64 },
    Cgmy { c: f64, g: f64, m: f64, y: f64 },
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Gaussian { .. } => "gaussian",
            ModelKind::Nig { .. } => "nig",
            ModelKind::Cgmy { .. } => "cgmy",
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(PricingError::InvalidModel(msg));
        match *self {
            ModelKind::Gaussian { sigma } => {
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return bad(format!("gaussian sigma must be > 0, got {sigma}"));
                }
            }
            ModelKind::Nig { alpha, beta, delta } => {
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return bad(format!("nig alpha must be > 0, got {alpha}"));
                }
                if !(beta.abs() < alpha) {
                    return bad(format!("nig requires |beta| < alpha, got beta = {beta}"));
                }
                if !(delta > 0.0 && delta.is_finite()) {
                    return bad(format!("nig delta must be > 0, got {delta}"));
                }
            }
            ModelKind::Cgmy { c, g, m, y } => {
                if !(c > 0.0 && g > 0.0 && m > 0.0)
                    || !(c.is_finite() && g.is_finite() && m.is_finite())
                {
                    return bad(format!("cgmy requires c, g, m > 0, got ({c}, {g}, {m})"));
                }
                if !(y > 0.0 && y < 2.0) || y == 1.0 {
                    return bad(format!("cgmy requires y in ]0,1[ or ]1,2[, got {y}"));
                }
            }
        }
        Ok(())
    }

    /// Drift-free part `φ(ξ)` of the exponent, without a strip check.
    #[inline]
    fn phi(&self, xi: Complex64) -> Complex64 {
        match *self {
            ModelKind::Gaussian { sigma } => 0.5 * sigma * sigma * xi * xi,
            ModelKind::Nig { alpha, beta, delta } => {
                let z = beta + I * xi;
                let radicand = alpha * alpha - z * z;
                debug_assert!(radicand.re > 0.0, "nig radicand on the branch cut: {radicand}");
                delta * (radicand.sqrt() - (alpha * alpha - beta * beta).sqrt())
            }
            ModelKind::Cgmy { c, g, m, y } => {
                let left = m - I * xi;
                let right = g + I * xi;
                debug_assert!(left.re > 0.0 && right.re > 0.0, "cgmy base on the branch cut");
                -c * gamma(-y) * (left.powf(y) - m.powf(y) + right.powf(y) - g.powf(y))
            }
        }
    }
}

/// A Lévy model: characteristic exponent, regularity strip and order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevyModel {
    pub kind: ModelKind,
    /// Drift per year.
    pub mu: f64,
    /// Risk-free rate per year.
    pub r: f64,
    /// `(λ₋, λ₊)`: bounds on `Im ξ`.
    pub strip: (f64, f64),
    /// Growth order `υ ∈ ]0, 2]`.
    pub order: f64,
    /// Cached `Γ(-y)` for CGMY; 0 otherwise.
    #[serde(skip)]
    cgmy_gamma: f64,
}

impl LevyModel {
    /// Risk-neutral Brownian model with the default strip proxy.
    pub fn gaussian(sigma: f64, r: f64) -> Result<Self> {
        Self::risk_neutral(ModelKind::Gaussian { sigma }, r)
    }

    /// Risk-neutral Brownian model with a custom strip proxy `(-bound, bound)`.
    pub fn gaussian_with_strip(sigma: f64, r: f64, bound: f64) -> Result<Self> {
        if !(bound > 1.0) {
            return Err(PricingError::InvalidModel(format!(
                "gaussian strip proxy must exceed 1, got {bound}"
            )));
        }
        let mut model = Self::build(ModelKind::Gaussian { sigma }, 0.0, r, Some(bound))?;
        model.mu = r + model.phi(-I).re;
        model.check_risk_neutral()?;
        Ok(model)
    }

    pub fn nig(alpha: f64, beta: f64, delta: f64, r: f64) -> Result<Self> {
        Self::risk_neutral(ModelKind::Nig { alpha, beta, delta }, r)
    }

    pub fn cgmy(c: f64, g: f64, m: f64, y: f64, r: f64) -> Result<Self> {
        Self::risk_neutral(ModelKind::Cgmy { c, g, m, y }, r)
    }

    /// Builds a risk-neutral model by mean correction: `μ = r + φ(-i)`.
    pub fn risk_neutral(kind: ModelKind, r: f64) -> Result<Self> {
        let mut model = Self::build(kind, 0.0, r, None)?;
        if !(model.strip.0 < -1.0) {
            return Err(PricingError::StripTooNarrow {
                lambda_minus: model.strip.0,
            });
        }
        model.mu = r + model.phi(-I).re;
        model.check_risk_neutral()?;
        Ok(model)
    }

    /// A model with a free (historic) drift. No martingale condition is imposed,
    /// and the strip only has to contain the real axis.
    pub fn with_drift(kind: ModelKind, mu: f64, r: f64) -> Result<Self> {
        Self::build(kind, mu, r, None)
    }

    fn build(kind: ModelKind, mu: f64, r: f64, gaussian_bound: Option<f64>) -> Result<Self> {
        kind.validate()?;
        if !r.is_finite() || !mu.is_finite() {
            return Err(PricingError::InvalidModel(format!("non-finite rate or drift ({r}, {mu})")));
        }
        let (strip, order, cgmy_gamma) = match kind {
            ModelKind::Gaussian { .. } => {
                let b = gaussian_bound.unwrap_or(GAUSSIAN_STRIP_PROXY);
                ((-b, b), 2.0, 0.0)
            }
            ModelKind::Nig { alpha, beta, .. } => ((beta - alpha, beta + alpha), 1.0, 0.0),
            ModelKind::Cgmy { g, m, y, .. } => ((-m, g), y, gamma(-y)),
        };
        if !(strip.0 < 0.0 && strip.1 > 0.0) {
            return Err(PricingError::InvalidModel(format!(
                "strip ({}, {}) does not contain the real axis",
                strip.0, strip.1
            )));
        }
        Ok(LevyModel {
            kind,
            mu,
            r,
            strip,
            order,
            cgmy_gamma,
        })
    }

    fn check_risk_neutral(&self) -> Result<()> {
        let residual = self.emm_residual();
        if residual.abs() > 1e-12 {
            return Err(PricingError::InvalidModel(format!(
                "martingale condition violated: |r + psi(-i)| = {residual:e}"
            )));
        }
        Ok(())
    }

    /// `r + ψ(-i)`; zero for a risk-neutral model.
    pub fn emm_residual(&self) -> f64 {
        let v = self.psi_unchecked(-I);
        (self.r + v.re).hypot(v.im)
    }

    pub fn in_strip(&self, im: f64) -> bool {
        im > self.strip.0 && im < self.strip.1
    }

    /// `ψ(ξ)`; fails when `Im ξ` lies outside the open strip.
    pub fn psi(&self, xi: Complex64) -> Result<Complex64> {
        if !self.in_strip(xi.im) {
            return Err(PricingError::StripViolation {
                im: xi.im,
                lo: self.strip.0,
                hi: self.strip.1,
                leg: None,
            });
        }
        let branch_ok = match self.kind {
            ModelKind::Gaussian { .. } => true,
            ModelKind::Nig { alpha, beta, .. } => {
                let z = beta + I * xi;
                (alpha * alpha - z * z).re > 0.0
            }
            ModelKind::Cgmy { g, m, .. } => (m - I * xi).re > 0.0 && (g + I * xi).re > 0.0,
        };
        assert!(branch_ok, "branch cut reached inside the strip at xi = {xi}");
        Ok(self.psi_unchecked(xi))
    }

    /// `ψ(ξ)` without the strip check. Callers must have verified `Im ξ`.
    #[inline]
    pub fn psi_unchecked(&self, xi: Complex64) -> Complex64 {
        -I * self.mu * xi + self.phi(xi)
    }

    #[inline]
    fn phi(&self, xi: Complex64) -> Complex64 {
        match self.kind {
            ModelKind::Cgmy { c, g, m, y } => {
                let left = m - I * xi;
                let right = g + I * xi;
                -c * self.cgmy_gamma * (left.powf(y) - m.powf(y) + right.powf(y) - g.powf(y))
            }
            _ => self.kind.phi(xi),
        }
    }

    /// Log moment generating function per unit time, `κ(u) = ln E[e^{uX_1}] = -ψ(-iu)`.
    pub fn cumulant(&self, u: f64) -> f64 {
        -self.psi_unchecked(Complex64::new(0.0, -u)).re
    }

    /// Constant `c` in `Re ψ(ξ) ≈ c|ξ|^υ` for large real `ξ`.
    pub fn decay_constant(&self) -> f64 {
        match self.kind {
            ModelKind::Gaussian { sigma } => 0.5 * sigma * sigma,
            ModelKind::Nig { delta, .. } => delta,
            ModelKind::Cgmy { c, y, .. } => {
                -2.0 * c * self.cgmy_gamma * (std::f64::consts::FRAC_PI_2 * y).cos()
            }
        }
    }

    /// Variance of `X_1`.
    pub fn variance(&self) -> f64 {
        match self.kind {
            ModelKind::Gaussian { sigma } => sigma * sigma,
            ModelKind::Nig { alpha, beta, delta } => {
                let g = (alpha * alpha - beta * beta).sqrt();
                delta * alpha * alpha / (g * g * g)
            }
            ModelKind::Cgmy { c, g, m, y } => {
                c * gamma(2.0 - y) * (m.powf(y - 2.0) + g.powf(y - 2.0))
            }
        }
    }
}

/// Outcome of an Esscher calibration.
#[derive(Debug, Clone, Copy)]
pub struct EsscherResult {
    pub model: LevyModel,
    /// Esscher parameter `h`.
    pub h: f64,
}

/// Risk-neutralises a historic model by an Esscher transform.
///
/// Solves `ψ_P(-ih) - ψ_P(-ih - i) = r` for `h` and returns the model with
/// exponent `ψ_Q(ξ) = ψ_P(ξ - ih) - ψ_P(-ih)`. Each family is closed under the
/// transform, so the result is expressed in the same family with shifted
/// parameters (Brownian drift, NIG `β`, CGMY `G` and `M`).
pub fn esscher_calibrate(historic: &LevyModel, r: f64) -> Result<EsscherResult> {
    let (lam_lo, lam_hi) = match historic.kind {
        // entire exponent: the proxy strip must not cap the root
        ModelKind::Gaussian { sigma } => {
            let reach = 2.0 * ((historic.mu - r).abs() / (sigma * sigma) + 1.0);
            (-reach, reach)
        }
        _ => historic.strip,
    };
    // need -h and -h-1 inside the strip
    let lo = -lam_hi;
    let hi = -lam_lo - 1.0;
    if !(hi > lo) {
        return Err(PricingError::NoRoot(format!(
            "strip ({lam_lo}, {lam_hi}) cannot hold both -ih and -ih-i"
        )));
    }
    let entire = matches!(historic.kind, ModelKind::Gaussian { .. });
    let psi = |xi: Complex64| if entire { Ok(historic.psi_unchecked(xi)) } else { historic.psi(xi) };
    let residual = |h: f64| -> Result<f64> {
        let a = psi(Complex64::new(0.0, -h))?;
        let b = psi(Complex64::new(0.0, -h - 1.0))?;
        Ok((a - b).re - r)
    };
    let margin = 1e-9 * (hi - lo);
    let h = solve_bracketed(
        residual,
        lo + margin,
        hi - margin,
        RootTolerance {
            x_abs: 0.0,
            x_rel: 1e-16,
            f_abs: 1e-14,
            max_iter: 400,
        },
    )?;

    let kind = match historic.kind {
        ModelKind::Gaussian { sigma } => ModelKind::Gaussian { sigma },
        ModelKind::Nig { alpha, beta, delta } => ModelKind::Nig {
            alpha,
            beta: beta + h,
            delta,
        },
        ModelKind::Cgmy { c, g, m, y } => ModelKind::Cgmy {
            c,
            g: g + h,
            m: m - h,
            y,
        },
    };
    let mu = match historic.kind {
        ModelKind::Gaussian { sigma } => historic.mu + sigma * sigma * h,
        _ => historic.mu,
    };
    let bound = match historic.kind {
        ModelKind::Gaussian { .. } => Some(historic.strip.1),
        _ => None,
    };
    let model = LevyModel::build(kind, mu, r, bound)?;
    if !(model.strip.0 < -1.0) {
        return Err(PricingError::StripTooNarrow {
            lambda_minus: model.strip.0,
        });
    }
    model.check_risk_neutral()?;
    Ok(EsscherResult { model, h })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn models() -> Vec<LevyModel> {
        vec![
            LevyModel::gaussian(0.2, 0.05).unwrap(),
            LevyModel::nig(8.0, -2.0, 0.3, 0.05).unwrap(),
            LevyModel::cgmy(0.5, 5.0, 5.0, 0.5, 0.03).unwrap(),
            LevyModel::cgmy(0.1, 8.0, 10.0, 1.5, 0.0).unwrap(),
        ]
    }

    #[test]
    fn gaussian_exponent_values() {
        let m = LevyModel::gaussian(0.2, 0.05).unwrap();
        assert!(m.psi(c(0.0, 0.0)).unwrap().norm() < 1e-15);
        assert!((m.psi(c(0.0, -1.0)).unwrap() - c(-0.05, 0.0)).norm() < 1e-15);
        assert!((m.psi(c(1.0, 0.0)).unwrap() - c(0.02, -0.03)).norm() < 1e-15);
        assert!((m.mu - 0.03).abs() < 1e-15);
    }

    #[test]
    fn nig_mean_correction() {
        let m = LevyModel::nig(8.0, -2.0, 0.3, 0.05).unwrap();
        assert_eq!(m.strip, (-10.0, 6.0));
        assert_eq!(m.order, 1.0);
        assert!((m.psi(c(0.0, -1.0)).unwrap() - c(-0.05, 0.0)).norm() < 1e-12);
        assert!(m.emm_residual() < 1e-12);
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            LevyModel::cgmy(1.0, 5.0, 0.9, 0.5, 0.0),
            Err(PricingError::StripTooNarrow { .. })
        ));
        assert!(matches!(
            LevyModel::nig(2.0, 1.5, 0.3, 0.0),
            Err(PricingError::StripTooNarrow { .. })
        ));
        assert!(matches!(LevyModel::gaussian(0.0, 0.0), Err(PricingError::InvalidModel(_))));
        assert!(matches!(LevyModel::nig(1.0, 1.0, 0.3, 0.0), Err(PricingError::InvalidModel(_))));
        assert!(matches!(LevyModel::cgmy(1.0, 5.0, 5.0, 1.0, 0.0), Err(PricingError::InvalidModel(_))));
        assert!(matches!(LevyModel::cgmy(1.0, 5.0, 5.0, 0.0, 0.0), Err(PricingError::InvalidModel(_))));
    }

    #[test]
    fn strip_violation_is_reported() {
        let m = LevyModel::nig(8.0, -2.0, 0.3, 0.05).unwrap();
        assert!(matches!(m.psi(c(1.0, 6.0)), Err(PricingError::StripViolation { .. })));
        assert!(matches!(m.psi(c(1.0, -10.5)), Err(PricingError::StripViolation { .. })));
        assert!(m.psi(c(1.0, 5.9)).is_ok());
    }

    #[test]
    fn normalisation_and_hermitian_symmetry() {
        for m in models() {
            assert!(m.psi(c(0.0, 0.0)).unwrap().norm() < 1e-14, "{:?}", m.kind);
            assert!(m.emm_residual() < 1e-12);
            for k in -40..=40 {
                let x = 0.37 * k as f64;
                let a = m.psi(c(x, 0.0)).unwrap();
                let b = m.psi(c(-x, 0.0)).unwrap();
                assert!((b - a.conj()).norm() < 1e-12 * (1.0 + a.norm()));
                assert!(a.re >= -1e-15, "Re psi < 0 at {x} for {:?}", m.kind);
            }
        }
    }

    #[test]
    fn growth_ratio_settles() {
        for m in models() {
            let ratio = |x: f64| m.psi(c(x, 0.0)).unwrap().re / x.powf(m.order);
            let samples: Vec<f64> = [10.0, 100.0, 1e3, 1e4].iter().map(|&x| ratio(x)).collect();
            assert!(samples.iter().all(|&v| v > 0.0));
            // gaps to the limiting constant shrink as |ξ| grows
            let lim = m.decay_constant();
            let gaps: Vec<f64> = samples.iter().map(|v| (v - lim).abs()).collect();
            for w in gaps.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "{:?}: {gaps:?}", m.kind);
            }
            assert!(gaps[3] < 0.05 * lim, "{:?}: {samples:?} vs {lim}", m.kind);
        }
    }

    #[test]
    fn cgmy_gamma_at_negative_argument() {
        assert!((gamma(-0.5) + 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn esscher_gaussian_closed_form() {
        let hist = LevyModel::with_drift(ModelKind::Gaussian { sigma: 0.2 }, 0.1, 0.05).unwrap();
        let out = esscher_calibrate(&hist, 0.05).unwrap();
        // closed form h = (r - μ_P - σ²/2)/σ²
        let expected = (0.05 - 0.1 - 0.02) / 0.04;
        assert!((expected - -1.75f64).abs() < 1e-15);
        assert!((out.h - expected).abs() < 1e-10, "h = {}", out.h);
        assert!(out.model.emm_residual() < 1e-12);
        assert!((out.model.mu - (0.05 - 0.02)).abs() < 1e-12);
    }

    #[test]
    fn esscher_identity_on_risk_neutral_input() {
        let q = LevyModel::gaussian(0.2, 0.05).unwrap();
        let hist = LevyModel::with_drift(q.kind, q.mu, 0.05).unwrap();
        let out = esscher_calibrate(&hist, 0.05).unwrap();
        assert!(out.h.abs() < 1e-10);
        assert!((out.model.mu - q.mu).abs() < 1e-12);
    }

    #[test]
    fn esscher_transform_matches_shifted_exponent() {
        let hists = [
            LevyModel::with_drift(ModelKind::Nig { alpha: 8.0, beta: -2.0, delta: 0.3 }, 0.12, 0.03).unwrap(),
            LevyModel::with_drift(ModelKind::Cgmy { c: 0.5, g: 5.0, m: 6.0, y: 0.5 }, 0.08, 0.02).unwrap(),
        ];
        for hist in hists {
            let out = esscher_calibrate(&hist, hist.r).unwrap();
            assert!(out.model.emm_residual() < 1e-12);
            let h = out.h;
            let shift = hist.psi(c(0.0, -h)).unwrap();
            for &x in &[-3.0, -0.5, 0.0, 0.7, 4.0] {
                let xi = c(x, -0.3);
                let lhs = out.model.psi(xi).unwrap();
                let rhs = hist.psi(xi - c(0.0, h)).unwrap() - shift;
                assert!((lhs - rhs).norm() < 1e-12, "{:?} at {x}: {lhs} vs {rhs}", hist.kind);
            }
        }
    }
}
