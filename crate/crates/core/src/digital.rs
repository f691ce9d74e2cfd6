//! Multi-period power digital options.
//!
//! A power digital pays `Π_k S_{T_k}^{γ_k}` at `T_M` on the event
//! `{w_n Σ_k a_nk X_{T_k} >= w_n K_n, n = 1..N}`, where `X = ln S`. Its price is
//!
//! ```text
//! e^{-r(T_M-t)} S^{Σγ} Πw_n (2πi)^{-N} ∫ (Πξ_n)^{-1} exp[i Σ_n ξ_n (ρ_n ln S - K_n) - Ψ(ξ)] dξ
//! ```
//!
//! with `ρ_n = Σ_k a_nk`, each `ξ_n` running along `Im ξ_n = -w_n ω_n`, and
//!
//! ```text
//! Ψ(ξ) = Σ_j (T_j - T_{j-1}) ψ(ζ_j),   ζ_j = Σ_n B_jn ξ_n - iΓ_j,
//! B_jn = Σ_{k>=j} a_nk,   Γ_j = Σ_{k>=j} γ_k,   T_0 = t.
//! ```
//!
//! The offsets `ω_n > 0` must keep every `Im ζ_j` inside the model strip.

use std::cell::RefCell;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};
use crate::levy::LevyModel;
use crate::quadrature::{
    integrate_line, integrate_tensor_levels, integrate_tensor_with, line_edges, tensor_edges, trapezoid_line,
    trapezoid_tensor, truncation_radius_by, truncation_tail, ContourSpec, EdgeMass, Refinement,
};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Default absolute price tolerance for one-dimensional integrals.
pub const DEFAULT_TOL_1D: f64 = 1e-8;
/// Default absolute price tolerance for multi-dimensional integrals.
pub const DEFAULT_TOL_ND: f64 = 1e-6;

/// Allowed growth of the log integrand bound above its minimum over `ω`.
const CONDITIONING_MARGIN: f64 = 8.0;
/// Offsets are not pushed below this unless the feasible interval forces it.
const OMEGA_FLOOR: f64 = 0.25;
/// Upper end used when the feasible interval is unbounded.
const OPEN_INTERVAL_SPAN: f64 = 50.0;
/// Share of the tolerance given to the truncated tails.
const TAIL_SHARE: f64 = 1e-2;
/// Required drop in an axis' log bound before its complement is priced instead.
const COMPLEMENT_MARGIN: f64 = 1.0;

pub fn default_tol(n: usize) -> f64 {
    if n <= 1 {
        DEFAULT_TOL_1D
    } else {
        DEFAULT_TOL_ND
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitoringSchedule {
    /// Valuation time.
    pub t: f64,
    /// Monitoring dates `T_1 < … < T_M`; the last one is the expiry.
    pub dates: Vec<f64>,
}

impl MonitoringSchedule {
    pub fn new(t: f64, dates: Vec<f64>) -> Result<Self> {
        let s = MonitoringSchedule { t, dates };
        s.validate()?;
        Ok(s)
    }

    /// `M` equally spaced dates ending at `expiry`, starting after `t`.
    pub fn uniform(t: f64, expiry: f64, m: usize) -> Result<Self> {
        let dt = (expiry - t) / m as f64;
        Self::new(t, (1..=m).map(|j| t + j as f64 * dt).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if self.dates.is_empty() {
            return Err(PricingError::InvalidInput("schedule has no monitoring dates".into()));
        }
        if !self.t.is_finite() || self.dates.iter().any(|d| !d.is_finite()) {
            return Err(PricingError::InvalidInput("non-finite time in schedule".into()));
        }
        let mut prev = self.t;
        for (j, &d) in self.dates.iter().enumerate() {
            if !(d > prev) {
                return Err(PricingError::InvalidInput(format!(
                    "monitoring date {} ({d}) does not follow {prev}",
                    j + 1
                )));
            }
            prev = d;
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.dates.len()
    }

    pub fn expiry(&self) -> f64 {
        *self.dates.last().unwrap()
    }

    /// `T_j - T_{j-1}` with `T_0 = t`.
    pub fn increments(&self) -> Vec<f64> {
        let mut prev = self.t;
        self.dates
            .iter()
            .map(|&d| {
                let dt = d - prev;
                prev = d;
                dt
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffParameterSet {
    /// Payoff index per monitoring date (length `M`).
    pub gamma: Vec<f64>,
    /// Log-strikes `K_n` (length `N`).
    pub k_log: Vec<f64>,
    /// Exercise signs `w_n ∈ {-1, +1}`.
    pub w: Vec<f64>,
    /// Exercise matrix, `N` rows of length `M`.
    pub a: Vec<Vec<f64>>,
}

impl PayoffParameterSet {
    pub fn new(gamma: Vec<f64>, k_log: Vec<f64>, w: Vec<f64>, a: Vec<Vec<f64>>) -> Result<Self> {
        let p = PayoffParameterSet { gamma, k_log, w, a };
        p.validate()?;
        Ok(p)
    }

    /// Single-condition payoff `S_T^γ 1{w·a·X_T >= w·k}` with one monitoring date.
    pub fn single(gamma: f64, a: f64, w: f64, k_log: f64) -> Result<Self> {
        Self::new(vec![gamma], vec![k_log], vec![w], vec![vec![a]])
    }

    pub fn n(&self) -> usize {
        self.k_log.len()
    }

    pub fn m(&self) -> usize {
        self.gamma.len()
    }

    pub fn validate(&self) -> Result<()> {
        let (n, m) = (self.n(), self.m());
        if n == 0 || m == 0 {
            return Err(PricingError::InvalidInput("payoff needs N >= 1 and M >= 1".into()));
        }
        if self.w.len() != n || self.a.len() != n {
            return Err(PricingError::InvalidInput(format!(
                "payoff has {n} strikes but {} signs and {} matrix rows",
                self.w.len(),
                self.a.len()
            )));
        }
        for (i, row) in self.a.iter().enumerate() {
            if row.len() != m {
                return Err(PricingError::InvalidInput(format!(
                    "row {i} of the exercise matrix has {} entries, expected {m}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) || row.iter().all(|&v| v == 0.0) {
                return Err(PricingError::InvalidInput(format!(
                    "row {i} of the exercise matrix must be finite and nonzero"
                )));
            }
        }
        if self.w.iter().any(|&w| w != 1.0 && w != -1.0) {
            return Err(PricingError::InvalidInput(format!("signs must be +-1, got {:?}", self.w)));
        }
        if self.gamma.iter().chain(&self.k_log).any(|v| !v.is_finite()) {
            return Err(PricingError::InvalidInput("non-finite gamma or strike".into()));
        }
        Ok(())
    }

    pub fn gamma_sum(&self) -> f64 {
        self.gamma.iter().sum()
    }

    /// Row sums `ρ_n = Σ_k a_nk`.
    pub fn row_sums(&self) -> Vec<f64> {
        self.a.iter().map(|row| row.iter().sum()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourOffsets {
    pub omega: Vec<f64>,
}

impl ContourOffsets {
    pub fn uniform(omega: f64, n: usize) -> Self {
        ContourOffsets { omega: vec![omega; n] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceResult {
    pub value: f64,
    pub quadrature_error: f64,
    pub offsets_used: ContourOffsets,
    /// `(N, M)`.
    pub dimensions: (usize, usize),
    pub evaluations: usize,
}

/// Legs of the exponent: `B` (row-major `M × N`), tail sums `Γ_j` and increments.
struct Legs {
    n: usize,
    m: usize,
    b: Vec<f64>,
    gamma_tail: Vec<f64>,
    tau: Vec<f64>,
}

impl Legs {
    fn new(sched: &MonitoringSchedule, p: &PayoffParameterSet) -> Result<Self> {
        sched.validate()?;
        p.validate()?;
        if sched.m() != p.m() {
            return Err(PricingError::InvalidInput(format!(
                "schedule has {} dates but the payoff has {} gamma entries",
                sched.m(),
                p.m()
            )));
        }
        let (n, m) = (p.n(), p.m());
        let mut b = vec![0.0; m * n];
        let mut gamma_tail = vec![0.0; m];
        for j in (0..m).rev() {
            for k in 0..n {
                b[j * n + k] = p.a[k][j] + if j + 1 < m { b[(j + 1) * n + k] } else { 0.0 };
            }
            gamma_tail[j] = p.gamma[j] + if j + 1 < m { gamma_tail[j + 1] } else { 0.0 };
        }
        Ok(Legs {
            n,
            m,
            b,
            gamma_tail,
            tau: sched.increments(),
        })
    }

    #[inline]
    fn zeta(&self, j: usize, xi: &[Complex64]) -> Complex64 {
        let row = &self.b[j * self.n..(j + 1) * self.n];
        let mut z = Complex64::new(0.0, -self.gamma_tail[j]);
        for (b, x) in row.iter().zip(xi) {
            z += b * x;
        }
        z
    }

    #[inline]
    fn psi_sum(&self, model: &LevyModel, xi: &[Complex64]) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for j in 0..self.m {
            s += self.tau[j] * model.psi_unchecked(self.zeta(j, xi));
        }
        s
    }

    /// `s_j = Σ_n w_n ω_n B_jn + Γ_j`, so that `Im ζ_j = -s_j` on the contour.
    fn leg_shift(&self, j: usize, w: &[f64], omega: &[f64]) -> f64 {
        let row = &self.b[j * self.n..(j + 1) * self.n];
        let mut s = self.gamma_tail[j];
        for k in 0..self.n {
            s += w[k] * omega[k] * row[k];
        }
        s
    }

    /// `B` as integers, when all its entries are integers of modest size.
    fn integer_b(&self) -> Option<Vec<i64>> {
        self.b
            .iter()
            .map(|&x| {
                let r = x.round();
                ((x - r).abs() < 1e-12 && r.abs() <= 64.0).then_some(r as i64)
            })
            .collect()
    }

    /// Distance from the contour, in each variable separately, to the nearest
    /// singularity: a pole `ξ_n = 0` or an edge of the strip in some leg.
    fn analytic_margin(&self, model: &LevyModel, w: &[f64], omega: &[f64]) -> f64 {
        let (lo, hi) = model.strip;
        let mut d = omega.iter().cloned().fold(f64::INFINITY, f64::min);
        for j in 0..self.m {
            let im = -self.leg_shift(j, w, omega);
            let slack = (im - lo).min(hi - im);
            for b in &self.b[j * self.n..(j + 1) * self.n] {
                if b.abs() > 1e-14 {
                    d = d.min(slack / b.abs());
                }
            }
        }
        d
    }

    fn check_offsets(&self, model: &LevyModel, w: &[f64], omega: &[f64]) -> Result<()> {
        if omega.len() != self.n || omega.iter().any(|&o| !(o > 0.0 && o.is_finite())) {
            return Err(PricingError::InvalidInput(format!(
                "offsets must be {} positive reals, got {omega:?}",
                self.n
            )));
        }
        for j in 0..self.m {
            let im = -self.leg_shift(j, w, omega);
            if !model.in_strip(im) {
                return Err(PricingError::StripViolation {
                    im,
                    lo: model.strip.0,
                    hi: model.strip.1,
                    leg: Some(j + 1),
                });
            }
        }
        Ok(())
    }

    /// Effective time weight per axis: `1/(G⁻¹)_nn` with `G = Bᵀ diag(τ) B`.
    fn axis_weights(&self) -> Result<Vec<f64>> {
        let n = self.n;
        let mut g = vec![0.0; n * n];
        for j in 0..self.m {
            for a in 0..n {
                for c in 0..n {
                    g[a * n + c] += self.tau[j] * self.b[j * n + a] * self.b[j * n + c];
                }
            }
        }
        let inv = invert_spd(&g, n).ok_or_else(|| {
            PricingError::InvalidInput("exercise matrix rows are linearly dependent".into())
        })?;
        Ok((0..n).map(|k| 1.0 / inv[k * n + k]).collect())
    }
}

/// Inverse of a small symmetric positive definite matrix by Gauss-Jordan.
fn invert_spd(g: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut a = g.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    let scale = (0..n).map(|i| g[i * n + i].abs()).fold(0.0, f64::max);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x * n + col].abs().total_cmp(&a[y * n + col].abs()))
            .unwrap();
        if a[piv * n + col].abs() <= 1e-12 * scale {
            return None;
        }
        for c in 0..n {
            a.swap(col * n + c, piv * n + c);
            inv.swap(col * n + c, piv * n + c);
        }
        let d = a[col * n + col];
        for c in 0..n {
            a[col * n + c] /= d;
            inv[col * n + c] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = a[r * n + col];
                for c in 0..n {
                    a[r * n + c] -= f * a[col * n + c];
                    inv[r * n + c] -= f * inv[col * n + c];
                }
            }
        }
    }
    Some(inv)
}

/// `Σ_j (T_j - T_{j-1}) ψ(ζ_j)` at a point `ξ`, checking every leg against the strip.
pub fn psi_aggregate(
    model: &LevyModel,
    sched: &MonitoringSchedule,
    p: &PayoffParameterSet,
    xi: &[Complex64],
) -> Result<Complex64> {
    let legs = Legs::new(sched, p)?;
    if xi.len() != legs.n {
        return Err(PricingError::InvalidInput(format!(
            "expected {} arguments, got {}",
            legs.n,
            xi.len()
        )));
    }
    let mut s = Complex64::new(0.0, 0.0);
    for j in 0..legs.m {
        let z = legs.zeta(j, xi);
        let v = model.psi(z).map_err(|e| match e {
            PricingError::StripViolation { im, lo, hi, .. } => PricingError::StripViolation {
                im,
                lo,
                hi,
                leg: Some(j + 1),
            },
            other => other,
        })?;
        s += legs.tau[j] * v;
    }
    Ok(s)
}

/// Interval of equal offsets `ω` satisfying every leg's strip condition.
pub fn feasible_interval(model: &LevyModel, sched: &MonitoringSchedule, p: &PayoffParameterSet) -> Result<(f64, f64)> {
    let legs = Legs::new(sched, p)?;
    feasible_interval_legs(model, &legs, &p.w)
}

fn feasible_interval_legs(model: &LevyModel, legs: &Legs, w: &[f64]) -> Result<(f64, f64)> {
    let (lam_minus, lam_plus) = model.strip;
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    for j in 0..legs.m {
        let row = &legs.b[j * legs.n..(j + 1) * legs.n];
        let c: f64 = row.iter().zip(w).map(|(b, w)| b * w).sum();
        let g = legs.gamma_tail[j];
        // need -λ₊ < c·ω + Γ_j < -λ₋
        let (a, b) = (-lam_plus - g, -lam_minus - g);
        if c.abs() < 1e-14 {
            if !(a < 0.0 && 0.0 < b) {
                return Err(PricingError::NoFeasibleOffsets {
                    leg: j + 1,
                    reason: format!(
                        "tail gamma {g} lies outside ]{}, {}[ for every offset",
                        -lam_plus, -lam_minus
                    ),
                });
            }
            continue;
        }
        let (l, h) = if c > 0.0 { (a / c, b / c) } else { (b / c, a / c) };
        lo = lo.max(l);
        hi = hi.min(h);
        if !(lo < hi) {
            return Err(PricingError::NoFeasibleOffsets {
                leg: j + 1,
                reason: format!(
                    "leg requires omega in ]{l}, {h}[, incompatible with earlier legs and omega > 0"
                ),
            });
        }
    }
    Ok((lo, hi))
}

/// Log of the integrand's modulus bound on the contour (a Chernoff bound):
/// `Σ_n w_n ω_n d_n + Σ_j τ_j κ(s_j)` with `d_n = ρ_n ln S - K_n`.
fn log_bound(model: &LevyModel, legs: &Legs, p: &PayoffParameterSet, d: &[f64], omega: &[f64]) -> f64 {
    let mut h = 0.0;
    for k in 0..legs.n {
        h += p.w[k] * omega[k] * d[k];
    }
    for j in 0..legs.m {
        h += legs.tau[j] * model.cumulant(legs.leg_shift(j, &p.w, omega));
    }
    h
}

fn log_moneyness(p: &PayoffParameterSet, spot: f64) -> Vec<f64> {
    let ls = spot.ln();
    p.row_sums().iter().zip(&p.k_log).map(|(r, k)| r * ls - k).collect()
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Offset inside `]lo, hi[` for an integrand whose log modulus bound is `h(ω)`:
/// the midpoint, moved toward the minimiser of `h` while `h` exceeds its
/// minimum by more than the conditioning margin, and kept above
/// `min(0.25, midpoint)`. An unbounded `hi` is replaced by `lo + 50`.
pub(crate) fn conditioned_offset<H: Fn(f64) -> f64>(lo: f64, hi: f64, h: H) -> f64 {
    let hi = if hi.is_finite() { hi } else { lo + OPEN_INTERVAL_SPAN };
    conditioned_offset_from(lo, hi, 0.5 * (lo + hi), h)
}

/// As [`conditioned_offset`] with the starting point `mid` in place of the
/// midpoint of a finite interval.
fn conditioned_offset_from<H: Fn(f64) -> f64>(lo: f64, hi: f64, mid: f64, h: H) -> f64 {
    let edge = 1e-6 * (hi - lo);
    let (w_min, h_min) = golden_min(&h, lo + edge, hi - edge);
    let limit = h_min + CONDITIONING_MARGIN;
    let mut omega = mid;
    if h(mid) > limit {
        let (mut inside, mut outside) = (w_min, mid);
        for _ in 0..100 {
            let x = 0.5 * (inside + outside);
            if h(x) <= limit {
                inside = x;
            } else {
                outside = x;
            }
        }
        omega = inside;
    }
    omega.max(OMEGA_FLOOR.min(mid))
}

fn select_offsets(model: &LevyModel, legs: &Legs, p: &PayoffParameterSet, spot: f64) -> Result<ContourOffsets> {
    let (lo, hi) = feasible_interval_legs(model, legs, &p.w)?;
    let d = log_moneyness(p, spot);
    let n = legs.n;
    let hi = if hi.is_finite() { hi } else { lo + OPEN_INTERVAL_SPAN };
    let edge = 1e-6 * (hi - lo);
    let (widest, _) = golden_min(|om| -legs.analytic_margin(model, &p.w, &vec![om; n]), lo + edge, hi - edge);
    let omega = conditioned_offset_from(lo, hi, widest, |om| log_bound(model, legs, p, &d, &vec![om; n]));
    let offsets = ContourOffsets::uniform(omega, n);
    legs.check_offsets(model, &p.w, &offsets.omega)?;
    Ok(offsets)
}

/// Equal offsets for the payoff: start where the integrand's strip of
/// analyticity around the contour is widest and move toward the minimiser of the integrand bound when the midpoint makes
/// the integrand needlessly large.
pub fn default_offsets(
    model: &LevyModel,
    sched: &MonitoringSchedule,
    p: &PayoffParameterSet,
    spot: f64,
) -> Result<ContourOffsets> {
    check_spot(spot)?;
    let legs = Legs::new(sched, p)?;
    select_offsets(model, &legs, p, spot)
}

fn check_spot(spot: f64) -> Result<()> {
    if !(spot > 0.0 && spot.is_finite()) {
        return Err(PricingError::NonPositiveInput(format!("spot = {spot}")));
    }
    Ok(())
}

/// Everything needed to integrate one payoff.
struct Problem<'a> {
    model: &'a LevyModel,
    p: &'a PayoffParameterSet,
    legs: Legs,
    d: Vec<f64>,
    rho: Vec<f64>,
    spot: f64,
    offsets: ContourOffsets,
    /// `e^{-r(T_M-t)} S^{Σγ}`.
    scale: f64,
    tol: f64,
}

impl<'a> Problem<'a> {
    fn new(
        model: &'a LevyModel,
        sched: &MonitoringSchedule,
        p: &'a PayoffParameterSet,
        spot: f64,
        offsets: Option<&ContourOffsets>,
        tol: Option<f64>,
    ) -> Result<Self> {
        check_spot(spot)?;
        let legs = Legs::new(sched, p)?;
        let offsets = match offsets {
            Some(o) => {
                legs.check_offsets(model, &p.w, &o.omega)?;
                o.clone()
            }
            None => select_offsets(model, &legs, p, spot)?,
        };
        let tol = tol.unwrap_or_else(|| default_tol(legs.n));
        if !(tol > 0.0) {
            return Err(PricingError::NonPositiveInput(format!("tol = {tol}")));
        }
        let scale = (-model.r * (sched.expiry() - sched.t)).exp() * spot.powf(p.gamma_sum());
        Ok(Problem {
            model,
            p,
            d: log_moneyness(p, spot),
            rho: p.row_sums(),
            legs,
            spot,
            offsets,
            scale,
            tol,
        })
    }

    /// Factor turning the raw integral into a price.
    fn normalisation(&self) -> Complex64 {
        let sign: f64 = self.p.w.iter().product();
        self.scale * sign / Complex64::new(0.0, 2.0 * std::f64::consts::PI).powi(self.legs.n as i32)
    }

    /// Absolute tolerance on the raw integral.
    fn integral_tol(&self) -> f64 {
        self.tol * (2.0 * std::f64::consts::PI).powi(self.legs.n as i32) / self.scale
    }

    fn contour(&self) -> Result<ContourSpec> {
        let weights = self.legs.axis_weights()?;
        let bound = log_bound(self.model, &self.legs, self.p, &self.d, &self.offsets.omega);
        let tail_tol = (TAIL_SHARE * self.integral_tol() * (-bound).exp()).clamp(1e-300, 0.1);
        // attenuation along axis n, scaled so that the quadratic case is exact
        let total: f64 = self.legs.tau.iter().sum();
        let model = self.model;
        let radii = weights
            .iter()
            .map(|&tw| {
                let scale = (tw / total).sqrt();
                truncation_radius_by(
                    |l| total * model.psi_unchecked(Complex64::new(l * scale, 0.0)).re,
                    tail_tol,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let offsets = (0..self.legs.n).map(|k| -self.p.w[k] * self.offsets.omega[k]).collect();
        let mut spec = ContourSpec::new(offsets, radii.clone())?;
        spec.reflection = Some(if self.legs.n % 2 == 0 { 1.0 } else { -1.0 });
        // one spacing on every axis; radii widened to whole steps so that the
        // nodes of all axes sit on a common lattice
        let shortest = radii.iter().cloned().fold(f64::INFINITY, f64::min);
        let h = shortest / 8.0;
        spec.nodes = radii.iter().map(|&l| 2 * (l / h - 1e-9).ceil() as usize).collect();
        spec.truncation = spec.nodes.iter().map(|&n| 0.5 * n as f64 * h).collect();
        Ok(spec)
    }

    #[inline]
    fn integrand(&self, xi: &[Complex64]) -> Complex64 {
        let mut e = -self.legs.psi_sum(self.model, xi);
        let mut prod = Complex64::new(1.0, 0.0);
        for k in 0..self.legs.n {
            e += I * xi[k] * self.d[k];
            prod *= xi[k];
        }
        e.exp() / prod
    }

    /// `(Σγ + iΣ_n ρ_n ξ_n)/S`, the spot derivative of the log integrand.
    #[inline]
    fn delta_factor(&self, xi: &[Complex64]) -> Complex64 {
        let mut f = Complex64::new(self.p.gamma_sum(), 0.0);
        for k in 0..self.legs.n {
            f += I * self.rho[k] * xi[k];
        }
        f / self.spot
    }

    fn run(&self, delta: bool) -> Result<PriceResult> {
        let spec = self.contour()?;
        let tol = self.integral_tol();
        // the refinement difference does not see the truncation, so the
        // estimated tail of the final grid is added to the error
        let (res, tail) = if self.legs.n == 1 {
            let f = |x: Complex64| {
                let xi = [x];
                let v = self.integrand(&xi);
                if delta {
                    v * self.delta_factor(&xi)
                } else {
                    v
                }
            };
            let res = integrate_line(f, spec.offsets[0], spec.truncation[0], tol)?;
            let nodes = res.levels.last().map_or(spec.nodes[0], |l| l.nodes_per_axis);
            let tail = line_edges(&f, spec.offsets[0], spec.truncation[0], nodes).tail();
            (res, tail)
        } else {
            let f = |xi: &[Complex64]| {
                let v = self.integrand(xi);
                if delta {
                    v * self.delta_factor(xi)
                } else {
                    v
                }
            };
            let refine = Refinement { min_nodes: 32, max_nodes: None };
            match (delta, self.legs.integer_b()) {
                (false, Some(b)) => {
                    let last_edges = RefCell::new(Vec::new());
                    let level = |nodes: &[usize]| {
                        let (v, mass, evals, edges) = self.lattice_level(&spec, nodes, &b)?;
                        *last_edges.borrow_mut() = edges;
                        Ok((v, mass, evals))
                    };
                    let res = integrate_tensor_levels(level, &spec, tol, refine)?;
                    let tail = truncation_tail(&last_edges.borrow());
                    (res, tail)
                }
                _ => {
                    let res = integrate_tensor_with(f, &spec, tol, refine)?;
                    let doublings = res.levels.len().saturating_sub(1);
                    let nodes: Vec<usize> = spec.nodes.iter().map(|n| n << doublings).collect();
                    let tail = truncation_tail(&tensor_edges(&f, &spec, &nodes));
                    (res, tail)
                }
            }
        };
        let norm = self.normalisation();
        let z = norm * res.value;
        self.finish(z, norm.norm() * res.error_estimate.max(tail), res.evaluations)
    }

    /// [`trapezoid_tensor`] of the integrand for a contour from [`Self::contour`]
    /// and an integer `B`. Every `ζ_j` then lies on a lattice of spacing `h`,
    /// so `e^{-τ_j ψ(ζ_j)}` and the per-axis factors `e^{iξ_n d_n}/ξ_n` are
    /// tabulated once and each node costs a handful of products.
    /// Also returns the [`EdgeMass`] of every axis.
    fn lattice_level(
        &self,
        spec: &ContourSpec,
        nodes: &[usize],
        b: &[i64],
    ) -> Result<(Complex64, f64, usize, Vec<EdgeMass>)> {
        let (n, m) = (self.legs.n, self.legs.m);
        let h = 2.0 * spec.truncation[0] / nodes[0] as f64;
        let half: Vec<i64> = nodes.iter().map(|&k| (k / 2) as i64).collect();
        let axes: Vec<Vec<Complex64>> = (0..n)
            .map(|k| {
                (0..=nodes[k])
                    .map(|i| {
                        let xi = Complex64::new(h * (i as i64 - half[k]) as f64, spec.offsets[k]);
                        let w = if i == 0 || i == nodes[k] { 0.5 * h } else { h };
                        w * (I * xi * self.d[k]).exp() / xi
                    })
                    .collect()
            })
            .collect();
        let reach: Vec<i64> = (0..m).map(|j| (0..n).map(|k| b[j * n + k].abs() * half[k]).sum()).collect();
        let legs: Vec<Vec<Complex64>> = (0..m)
            .map(|j| {
                let im = -self.legs.leg_shift(j, &self.p.w, &self.offsets.omega);
                (-reach[j]..=reach[j])
                    .map(|q| (-self.legs.tau[j] * self.model.psi_unchecked(Complex64::new(h * q as f64, im))).exp())
                    .collect()
            })
            .collect();
        if axes.iter().chain(&legs).flatten().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(PricingError::NaNEncountered("non-finite integrand table".into()));
        }
        let last = n - 1;
        // legs that move along the innermost axis, with their strides
        let moving: Vec<(usize, i64)> = (0..m).filter(|&j| b[j * n + last] != 0).map(|j| (j, b[j * n + last])).collect();
        let inner_count: usize = nodes[1..last].iter().map(|k| k + 1).product();
        let centre = nodes[0] / 2;
        let outer: Vec<usize> = match spec.reflection {
            Some(_) => (centre..=nodes[0]).collect(),
            None => (0..=nodes[0]).collect(),
        };
        let slices: Vec<(Complex64, f64, Vec<EdgeMass>)> = outer
            .par_iter()
            .map(|&i0| {
                let mut idx = vec![0usize; n];
                idx[0] = i0;
                let mut sum = Complex64::new(0.0, 0.0);
                let mut mass = 0.0;
                let mut edges = vec![EdgeMass::default(); n];
                let mut q = vec![0i64; m];
                for _ in 0..inner_count {
                    let mut pre = Complex64::new(1.0, 0.0);
                    for k in 0..last {
                        pre *= axes[k][idx[k]];
                    }
                    for j in 0..m {
                        let mut t = reach[j] - b[j * n + last] * half[last];
                        for k in 0..last {
                            t += b[j * n + k] * (idx[k] as i64 - half[k]);
                        }
                        q[j] = t;
                        if b[j * n + last] == 0 {
                            pre *= legs[j][t as usize];
                        }
                    }
                    let mut acc = Complex64::new(0.0, 0.0);
                    let mut acc_mass = 0.0;
                    for (i, a) in axes[last].iter().enumerate() {
                        let mut v = *a;
                        for &(j, stride) in &moving {
                            v *= legs[j][(q[j] + stride * i as i64) as usize];
                        }
                        acc += v;
                        acc_mass += v.re.abs() + v.im.abs();
                    }
                    sum += pre * acc;
                    let pre_mass = pre.norm();
                    mass += pre_mass * acc_mass;
                    for k in 0..last {
                        let e = &mut edges[k];
                        if idx[k] == 0 || idx[k] == nodes[k] {
                            e.end += pre_mass * acc_mass;
                        } else if idx[k] == 1 || idx[k] == nodes[k] - 1 {
                            e.inside += pre_mass * acc_mass;
                        }
                    }
                    let term = |i: usize| {
                        let mut v = axes[last][i];
                        for &(j, stride) in &moving {
                            v *= legs[j][(q[j] + stride * i as i64) as usize];
                        }
                        pre_mass * (v.re.abs() + v.im.abs())
                    };
                    let nl = nodes[last];
                    edges[last].end += term(0) + term(nl);
                    edges[last].inside += term(1) + term(nl - 1);
                    let mut a = last - 1;
                    while a >= 1 {
                        idx[a] += 1;
                        if idx[a] <= nodes[a] {
                            break;
                        }
                        idx[a] = 0;
                        a -= 1;
                    }
                }
                match spec.reflection {
                    // the mirror slice swaps the two ends of every axis
                    Some(s) if i0 > centre => {
                        for e in edges.iter_mut() {
                            e.end *= 2.0;
                            e.inside *= 2.0;
                        }
                        (sum + s * sum.conj(), 2.0 * mass, edges)
                    }
                    // the centre slice is its own mirror
                    Some(s) => (0.5 * (sum + s * sum.conj()), mass, edges),
                    None => (sum, mass, edges),
                }
            })
            .collect();
        let mut total = Complex64::new(0.0, 0.0);
        let mut mass = 0.0;
        let mut edges = vec![EdgeMass::default(); n];
        for (v, w, e) in slices {
            total += v;
            mass += w;
            for (a, b) in edges.iter_mut().zip(e) {
                a.end += b.end;
                a.inside += b.inside;
            }
        }
        if !(total.re.is_finite() && total.im.is_finite()) {
            return Err(PricingError::NaNEncountered(format!("lattice sum {total}")));
        }
        Ok((total, mass, outer.len() * inner_count * (nodes[last] + 1), edges))
    }

    fn finish(&self, z: Complex64, error: f64, evaluations: usize) -> Result<PriceResult> {
        if z.im.abs() > 1e-8 * (1.0 + z.re.abs()) {
            return Err(PricingError::NaNEncountered(format!(
                "assembled price {z} has an imaginary residue above 1e-8 (1 + |value|)"
            )));
        }
        Ok(PriceResult {
            value: z.re,
            quadrature_error: error,
            offsets_used: self.offsets.clone(),
            dimensions: (self.legs.n, self.legs.m),
            evaluations,
        })
    }

    /// One trapezoid level with `base` nodes on the shortest axis.
    fn run_fixed(&self, base: usize) -> Result<PriceResult> {
        let mut spec = self.contour()?;
        let scale = base.max(16) / 16;
        for n in spec.nodes.iter_mut() {
            *n *= scale;
        }
        let (v, _, evals) = if self.legs.n == 1 {
            let f = |x: Complex64| self.integrand(&[x]);
            trapezoid_line(&f, spec.offsets[0], spec.truncation[0], spec.nodes[0])?
        } else {
            match self.legs.integer_b() {
                Some(b) => {
                    let (v, mass, evals, _) = self.lattice_level(&spec, &spec.nodes, &b)?;
                    (v, mass, evals)
                }
                None => trapezoid_tensor(&|xi: &[Complex64]| self.integrand(xi), &spec, &spec.nodes)?,
            }
        };
        self.finish(self.normalisation() * v, f64::NAN, evals)
    }
}

/// Minimum over feasible `ω` of the log bound for axis `axis` alone, taken
/// with sign `w`. `None` when that orientation admits no contour.
fn marginal_log_bound(
    model: &LevyModel,
    sched: &MonitoringSchedule,
    p: &PayoffParameterSet,
    axis: usize,
    w: f64,
    spot: f64,
) -> Option<f64> {
    let q = PayoffParameterSet {
        gamma: p.gamma.clone(),
        k_log: vec![p.k_log[axis]],
        w: vec![w],
        a: vec![p.a[axis].clone()],
    };
    let legs = Legs::new(sched, &q).ok()?;
    let (lo, hi) = feasible_interval_legs(model, &legs, &q.w).ok()?;
    let hi = if hi.is_finite() { hi } else { lo + OPEN_INTERVAL_SPAN };
    let d = log_moneyness(&q, spot);
    let edge = 1e-6 * (hi - lo);
    Some(golden_min(|om| log_bound(model, &legs, &q, &d, &[om]), lo + edge, hi - edge).1)
}

/// Axes whose complementary event is markedly less likely than the event itself.
fn complement_axes(model: &LevyModel, sched: &MonitoringSchedule, p: &PayoffParameterSet, spot: f64) -> Vec<usize> {
    (0..p.n())
        .filter(|&k| {
            match (
                marginal_log_bound(model, sched, p, k, p.w[k], spot),
                marginal_log_bound(model, sched, p, k, -p.w[k], spot),
            ) {
                (Some(keep), Some(flip)) => flip < keep - COMPLEMENT_MARGIN,
                _ => false,
            }
        })
        .collect()
}

/// Inclusion-exclusion over the flipped axes: `(sign, payoff)` pairs, where
/// `None` stands for the unconditional payoff.
fn complement_pieces(p: &PayoffParameterSet, flips: &[usize]) -> Vec<(f64, Option<PayoffParameterSet>)> {
    (0..1usize << flips.len())
        .map(|mask| {
            let chosen = |k: usize| flips.iter().position(|&f| f == k).map(|i| mask >> i & 1 == 1);
            let mut q = PayoffParameterSet {
                gamma: p.gamma.clone(),
                k_log: Vec::new(),
                w: Vec::new(),
                a: Vec::new(),
            };
            for k in 0..p.n() {
                let w = match chosen(k) {
                    None => p.w[k],
                    Some(true) => -p.w[k],
                    Some(false) => continue,
                };
                q.k_log.push(p.k_log[k]);
                q.w.push(w);
                q.a.push(p.a[k].clone());
            }
            let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            (sign, if q.a.is_empty() { None } else { Some(q) })
        })
        .collect()
}

/// Runs `eval` on the original payoff, or on its complement decomposition when
/// some axes describe near-certain events. `unconditional` values the payoff
/// with every condition removed.
fn with_complements<E, U>(
    model: &LevyModel,
    sched: &MonitoringSchedule,
    p: &PayoffParameterSet,
    spot: f64,
    tol: Option<f64>,
    eval: E,
    unconditional: U,
) -> Result<PriceResult>
where
    E: Fn(&PayoffParameterSet, Option<f64>) -> Result<PriceResult>,
    U: Fn() -> Result<f64>,
{
    check_spot(spot)?;
    Legs::new(sched, p)?;
    let flips = complement_axes(model, sched, p, spot);
    if flips.is_empty() {
        return eval(p, tol);
    }
    let pieces = complement_pieces(p, &flips);
    let piece_tol = tol.unwrap_or_else(|| default_tol(p.n())) / pieces.len() as f64;
    let combined = || -> Result<PriceResult> {
        let mut out = PriceResult {
            value: 0.0,
            quadrature_error: 0.0,
            offsets_used: ContourOffsets { omega: Vec::new() },
            dimensions: (p.n(), p.m()),
            evaluations: 0,
        };
        for (sign, q) in &pieces {
            match q {
                None => out.value += sign * unconditional()?,
                Some(q) => {
                    let r = eval(q, Some(piece_tol))?;
                    out.value += sign * r.value;
                    out.quadrature_error += r.quadrature_error;
                    out.evaluations += r.evaluations;
                    if r.offsets_used.omega.len() > out.offsets_used.omega.len() {
                        out.offsets_used = r.offsets_used;
                    }
                }
            }
        }
        Ok(out)
    };
    match combined() {
        Err(PricingError::NoFeasibleOffsets { .. }) | Err(PricingError::StripViolation { .. }) => eval(p, tol),
        other => other,
    }
}

/// Price of the power digital described by `p`.
///
/// `offsets` overrides the automatic contour choice; `tol` is an absolute
/// price tolerance (default `1e-8` for `N = 1`, `1e-6` otherwise). Without
/// explicit offsets, conditions that hold almost surely are replaced by one
/// minus their complement, which keeps the integrands well scaled.
pub fn price_digital(
    model: &LevyModel,
    sched: &MonitoringSchedule,
    p: &PayoffParameterSet,
    spot: f64,
    offsets: Option<&ContourOffsets>,
    tol: Option<f64>,
) -> Result<PriceResult> {
    if offsets.is_some() {
        return Problem::new(model, sched, p, spot, offsets, tol)?.run(false);
    }
    with_complements(
        model,
        sched,
        p,
        spot,
        tol,
        |q, t| Problem::new(model, sched, q, spot, None, t)?.run(false),
        || price_unconditional(model, sched, &p.gamma, spot),
    )
}

/// Price from a single trapezoid level with `base` nodes on the shortest
/// axis. No error estimate is attached (`quadrature_error` is NaN).
pub fn price_digital_fixed(
    model: &LevyModel,
    sched: &MonitoringSchedule,
    p: &PayoffParameterSet,
    spot: f64,
    tol: Option<f64>,
    base: usize,
) -> Result<PriceResult> {
    let mut r = with_complements(
        model,
        sched,
        p,
        spot,
        tol,
        |q, t| Problem::new(model, sched, q, spot, None, t)?.run_fixed(base),
        || price_unconditional(model, sched, &p.gamma, spot),
    )?;
    r.quadrature_error = f64::NAN;
    Ok(r)
}

/// `S_T^γ 1{w·a·X_T >= w·k}` paid at `expiry`, valued at time 0.
pub fn price_single_period(
    model: &LevyModel,
    expiry: f64,
    gamma: f64,
    a: f64,
    w: f64,
    k_log: f64,
    spot: f64,
) -> Result<PriceResult> {
    let sched = MonitoringSchedule::new(0.0, vec![expiry])?;
    let p = PayoffParameterSet::single(gamma, a, w, k_log)?;
    price_digital(model, &sched, &p, spot, None, None)
}

/// `∂F/∂S` by differentiating under the integral sign.
pub fn delta(
    model: &LevyModel,
    sched: &MonitoringSchedule,
    p: &PayoffParameterSet,
    spot: f64,
    tol: Option<f64>,
) -> Result<f64> {
    Ok(with_complements(
        model,
        sched,
        p,
        spot,
        tol,
        |q, t| Problem::new(model, sched, q, spot, None, t)?.run(true),
        || Ok(p.gamma_sum() * price_unconditional(model, sched, &p.gamma, spot)? / spot),
    )?
    .value)
}

/// Price of the unconditional payoff `Π_k S_{T_k}^{γ_k}` paid at `T_M`:
/// `e^{-r(T_M-t)} S^{Σγ} exp(-Σ_j τ_j ψ(-iΓ_j))`.
pub fn price_unconditional(model: &LevyModel, sched: &MonitoringSchedule, gamma: &[f64], spot: f64) -> Result<f64> {
    check_spot(spot)?;
    sched.validate()?;
    if gamma.len() != sched.m() {
        return Err(PricingError::InvalidInput("gamma length differs from the schedule".into()));
    }
    let tau = sched.increments();
    let mut tail = 0.0;
    let mut expo = Complex64::new(0.0, 0.0);
    for j in (0..gamma.len()).rev() {
        tail += gamma[j];
        let v = model.psi(Complex64::new(0.0, -tail)).map_err(|e| match e {
            PricingError::StripViolation { im, lo, hi, .. } => PricingError::StripViolation {
                im,
                lo,
                hi,
                leg: Some(j + 1),
            },
            other => other,
        })?;
        expo -= tau[j] * v;
    }
    let total: f64 = gamma.iter().sum();
    Ok((-model.r * (sched.expiry() - sched.t)).exp() * spot.powf(total) * expo.re.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::ModelKind;

    fn phi(x: f64) -> f64 {
        0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
    }

    fn gauss() -> LevyModel {
        LevyModel::gaussian(0.2, 0.05).unwrap()
    }

    fn nig() -> LevyModel {
        LevyModel::nig(8.0, -2.0, 0.3, 0.05).unwrap()
    }

    fn one_year() -> MonitoringSchedule {
        MonitoringSchedule::new(0.0, vec![1.0]).unwrap()
    }

    #[test]
    fn single_leg_exponent() {
        let m = nig();
        let p = PayoffParameterSet::single(0.0, 1.0, 1.0, 0.0).unwrap();
        let sched = MonitoringSchedule::new(0.25, vec![1.0]).unwrap();
        let xi = Complex64::new(0.7, -1.2);
        let v = psi_aggregate(&m, &sched, &p, &[xi]).unwrap();
        assert!((v - 0.75 * m.psi(xi).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn emm_telescopes_for_terminal_power() {
        let m = nig();
        let sched = MonitoringSchedule::new(0.0, vec![0.3, 0.7, 1.2]).unwrap();
        let p = PayoffParameterSet::new(
            vec![0.0, 0.0, 1.0],
            vec![0.0, 0.1],
            vec![1.0, -1.0],
            vec![vec![1.0, -0.5, 2.0], vec![0.0, 1.0, 1.0]],
        )
        .unwrap();
        let zero = Complex64::new(0.0, 0.0);
        let v = psi_aggregate(&m, &sched, &p, &[zero, zero]).unwrap();
        assert!((v - Complex64::new(-0.05 * 1.2, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn forward_start_exponent_expansion() {
        let m = nig();
        let sched = MonitoringSchedule::new(0.0, vec![0.5, 1.5]).unwrap();
        let p = PayoffParameterSet::new(vec![0.0, 1.0], vec![0.0], vec![1.0], vec![vec![-1.0, 1.0]]).unwrap();
        let xi = Complex64::new(0.4, -0.8);
        let v = psi_aggregate(&m, &sched, &p, &[xi]).unwrap();
        let expected = -0.05 * 0.5 + 1.0 * m.psi(xi - I).unwrap();
        assert!((v - expected).norm() < 1e-13);
    }

    #[test]
    fn strip_violation_names_the_leg() {
        let m = nig();
        let sched = MonitoringSchedule::new(0.0, vec![0.5, 1.0]).unwrap();
        let p = PayoffParameterSet::new(vec![0.0, 11.0], vec![0.0], vec![1.0], vec![vec![0.0, 1.0]]).unwrap();
        let err = psi_aggregate(&m, &sched, &p, &[Complex64::new(0.0, -0.5)]).unwrap_err();
        assert!(matches!(err, PricingError::StripViolation { leg: Some(_), .. }));
    }

    #[test]
    fn offsets_examples() {
        let g = gauss();
        let p = PayoffParameterSet::single(0.0, 1.0, 1.0, 100f64.ln()).unwrap();
        let o = default_offsets(&g, &one_year(), &p, 100.0).unwrap();
        assert!(o.omega[0] >= 0.25);

        let m = nig();
        let o = default_offsets(&m, &one_year(), &p, 100.0).unwrap();
        assert_eq!(o.omega, vec![5.0]);

        // S^11 has no finite expectation on an upward exercise line when -λ₋ = 10
        let p = PayoffParameterSet::single(11.0, 1.0, 1.0, 0.0).unwrap();
        assert!(matches!(
            default_offsets(&m, &one_year(), &p, 100.0),
            Err(PricingError::NoFeasibleOffsets { leg: 1, .. })
        ));
    }

    #[test]
    fn certain_payoffs() {
        let g = gauss();
        let r = price_single_period(&g, 1.0, 0.0, 1.0, 1.0, -50.0, 100.0).unwrap();
        assert!((r.value - (-0.05f64).exp()).abs() < 1e-8, "{r:?}");
        let r = price_single_period(&g, 1.0, 1.0, 1.0, 1.0, -50.0, 100.0).unwrap();
        assert!((r.value - 100.0).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn gaussian_atm_digital_matches_closed_form() {
        let g = gauss();
        let r = price_single_period(&g, 1.0, 0.0, 1.0, 1.0, 100f64.ln(), 100.0).unwrap();
        let expected = (-0.05f64).exp() * phi(0.15);
        assert!((r.value - expected).abs() < 1e-9, "{} vs {expected}", r.value);
        assert!((r.value - 0.532325).abs() < 1e-6);
    }

    #[test]
    fn call_plus_put_is_a_bond() {
        for m in [gauss(), nig(), LevyModel::cgmy(1.0, 5.0, 10.0, 0.5, 0.05).unwrap()] {
            let c = price_single_period(&m, 1.0, 0.0, 1.0, 1.0, 95f64.ln(), 100.0).unwrap();
            let p = price_single_period(&m, 1.0, 0.0, 1.0, -1.0, 95f64.ln(), 100.0).unwrap();
            assert!((c.value + p.value - (-0.05f64).exp()).abs() < 1e-8, "{:?} {c:?} {p:?}", m.kind);
        }
    }

    #[test]
    fn negative_exercise_row_flips_the_event() {
        let m = nig();
        let a = price_single_period(&m, 1.0, 0.0, -1.0, 1.0, -(105f64.ln()), 100.0).unwrap();
        let b = price_single_period(&m, 1.0, 0.0, 1.0, -1.0, 105f64.ln(), 100.0).unwrap();
        assert!((a.value - b.value).abs() < 1e-8);
    }

    #[test]
    fn offsets_do_not_change_the_price() {
        let m = nig();
        let sched = one_year();
        let p = PayoffParameterSet::single(1.0, 1.0, 1.0, 100f64.ln()).unwrap();
        let (lo, hi) = feasible_interval(&m, &sched, &p).unwrap();
        let mut prices = Vec::new();
        for f in [0.2, 0.5, 0.8] {
            let o = ContourOffsets::uniform(lo + f * (hi - lo), 1);
            prices.push(price_digital(&m, &sched, &p, 100.0, Some(&o), None).unwrap());
        }
        for r in &prices[1..] {
            let bound = 10.0 * (r.quadrature_error + prices[0].quadrature_error) + 1e-12;
            assert!((r.value - prices[0].value).abs() <= bound.max(1e-8));
        }
    }

    #[test]
    fn lattice_sum_matches_direct_tensor_sum() {
        let m = nig();
        let sched = MonitoringSchedule::new(0.0, vec![0.4, 0.7, 1.0]).unwrap();
        let p = PayoffParameterSet::new(
            vec![0.0, 0.5, 0.5],
            vec![4.5, 0.05, 4.6],
            vec![1.0, -1.0, 1.0],
            vec![vec![1.0, 0.0, 0.0], vec![-1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0]],
        )
        .unwrap();
        let prob = Problem::new(&m, &sched, &p, 100.0, None, Some(1e-6)).unwrap();
        let b = prob.legs.integer_b().unwrap();
        for fold in [false, true] {
            let mut spec = prob.contour().unwrap();
            if !fold {
                spec.reflection = None;
            }
            let (direct, _, de) = trapezoid_tensor(&|xi: &[Complex64]| prob.integrand(xi), &spec, &spec.nodes).unwrap();
            let (lattice, _, le, edges) = prob.lattice_level(&spec, &spec.nodes, &b).unwrap();
            assert_eq!(de, le);
            assert!((direct - lattice).norm() <= 1e-12 * direct.norm(), "{direct} vs {lattice}");
            // the lattice sums l1 norms, within a factor √2 of the modulus
            let exact = tensor_edges(&|xi: &[Complex64]| prob.integrand(xi), &spec, &spec.nodes);
            for (e, x) in edges.iter().zip(&exact) {
                for (a, b) in [(e.end, x.end), (e.inside, x.inside)] {
                    assert!(a >= b * (1.0 - 1e-12) && a <= b * std::f64::consts::SQRT_2 * (1.0 + 1e-12), "{a} vs {b}");
                }
            }
        }
        let q = PayoffParameterSet::new(vec![0.0, 1.0], vec![0.0], vec![1.0], vec![vec![0.5, 1.0]]).unwrap();
        let two = MonitoringSchedule::new(0.0, vec![0.5, 1.0]).unwrap();
        assert!(Problem::new(&m, &two, &q, 100.0, None, None).unwrap().legs.integer_b().is_none());
    }

    #[test]
    fn delta_matches_finite_difference() {
        let g = gauss();
        let sched = one_year();
        let p = PayoffParameterSet::single(0.0, 1.0, 1.0, 100f64.ln()).unwrap();
        let h = 1e-4 * 100.0;
        let up = price_digital(&g, &sched, &p, 100.0 + h, None, Some(1e-12)).unwrap().value;
        let dn = price_digital(&g, &sched, &p, 100.0 - h, None, Some(1e-12)).unwrap().value;
        let fd = (up - dn) / (2.0 * h);
        let d = delta(&g, &sched, &p, 100.0, Some(1e-12)).unwrap();
        assert!((d - fd).abs() < 1e-5 * fd.abs(), "{d} vs {fd}");

        let p = PayoffParameterSet::single(0.0, 1.0, 1.0, -50.0).unwrap();
        assert!(delta(&g, &sched, &p, 100.0, None).unwrap().abs() < 1e-8);
    }

    #[test]
    fn unconditional_power_payoff() {
        let m = nig();
        let sched = MonitoringSchedule::new(0.0, vec![0.5, 1.0]).unwrap();
        let v = price_unconditional(&m, &sched, &[0.0, 1.0], 80.0).unwrap();
        assert!((v - 80.0).abs() < 1e-10);
        let v = price_unconditional(&m, &sched, &[0.0, 0.0], 80.0).unwrap();
        assert!((v - (-0.05f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn two_dimensional_independent_legs_factorise() {
        // conditions on disjoint increments are independent
        let m = nig();
        let sched = MonitoringSchedule::new(0.0, vec![0.5, 1.0]).unwrap();
        let p = PayoffParameterSet::new(
            vec![0.0, 0.0],
            vec![0.01, 0.02],
            vec![1.0, -1.0],
            vec![vec![1.0, 0.0], vec![-1.0, 1.0]],
        )
        .unwrap();
        let v = price_digital(&m, &sched, &p, 1.0, None, None).unwrap();
        let half = MonitoringSchedule::new(0.0, vec![0.5]).unwrap();
        let p1 = PayoffParameterSet::single(0.0, 1.0, 1.0, 0.01).unwrap();
        let p2 = PayoffParameterSet::single(0.0, 1.0, -1.0, 0.02).unwrap();
        let a = price_digital(&m, &half, &p1, 1.0, None, None).unwrap().value;
        let b = price_digital(&m, &half, &p2, 1.0, None, None).unwrap().value;
        // a and b each carry e^{-r/2}; the joint price carries e^{-r}
        let expected = a * b;
        assert!((v.value - expected).abs() < 1e-6, "{} vs {expected}", v.value);
    }

    #[test]
    fn fixed_levels_approach_adaptive_value() {
        let m = LevyModel::risk_neutral(ModelKind::Nig { alpha: 8.0, beta: -2.0, delta: 0.3 }, 0.05).unwrap();
        let sched = one_year();
        let p = PayoffParameterSet::single(0.0, 1.0, 1.0, 100f64.ln()).unwrap();
        let exact = price_digital(&m, &sched, &p, 100.0, None, Some(1e-12)).unwrap().value;
        let errs: Vec<f64> = [16, 32, 64, 128]
            .iter()
            .map(|&b| (price_digital_fixed(&m, &sched, &p, 100.0, None, b).unwrap().value - exact).abs())
            .collect();
        assert!(errs[3] < errs[0]);
        assert!(errs[3] < 1e-6, "{errs:?}");
    }
}
