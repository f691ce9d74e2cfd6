//! Error-controlled quadrature along horizontal lines in the complex plane.
//!
//! Integrals `∫ f(x + ib) dx` over `[-L, L]` are evaluated with the composite
//! trapezoid rule on a uniform grid whose node count is doubled until two
//! successive levels agree. For integrands analytic in a strip around the
//! line and negligible at `±L` the rule converges geometrically, so the
//! difference between levels is a conservative estimate of the coarser
//! level's error. The N-dimensional version refines every axis together.
//!
//! Also hosts the fixed real rules used elsewhere: Gauss-Legendre nodes and
//! an adaptive Gauss-Kronrod (7/15) integrator.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{PricingError, Result};

/// Smallest and largest truncation radius handed out by [`truncation_radius`].
pub const MIN_TRUNCATION: f64 = 1.0;
pub const MAX_TRUNCATION: f64 = 1e4;

/// Evaluation budget for one tensor level (about the cost of a `2^7`-per-axis
/// 4-D grid).
pub const TENSOR_BUDGET: usize = 1 << 28;

/// One contour: the line `Im ξ_n = offsets[n]` truncated to `|Re ξ_n| <= truncation[n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourSpec {
    pub offsets: Vec<f64>,
    pub truncation: Vec<f64>,
    /// Initial node count per axis (even, at least 16).
    pub nodes: Vec<usize>,
    /// `Some(s)` declares `f(-conj ξ) = s·conj f(ξ)`; the tensor drivers then
    /// evaluate only the half `Re ξ_0 >= 0` of the outer axis.
    pub reflection: Option<f64>,
}

impl ContourSpec {
    pub fn new(offsets: Vec<f64>, truncation: Vec<f64>) -> Result<Self> {
        let n = offsets.len();
        let spec = ContourSpec {
            offsets,
            truncation,
            nodes: vec![16; n],
            reflection: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.offsets.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.offsets.len();
        if n == 0 || self.truncation.len() != n || self.nodes.len() != n {
            return Err(PricingError::InvalidInput(format!(
                "contour spec lengths disagree: {} offsets, {} radii, {} node counts",
                n,
                self.truncation.len(),
                self.nodes.len()
            )));
        }
        for i in 0..n {
            if self.offsets[i] == 0.0 || !self.offsets[i].is_finite() {
                return Err(PricingError::InvalidInput(format!(
                    "offset {i} is {} (the line must avoid the real axis)",
                    self.offsets[i]
                )));
            }
            if !(self.truncation[i] > 0.0 && self.truncation[i].is_finite()) {
                return Err(PricingError::InvalidInput(format!(
                    "truncation radius {i} must be positive, got {}",
                    self.truncation[i]
                )));
            }
            if self.nodes[i] < 16 || self.nodes[i] % 2 != 0 {
                return Err(PricingError::InvalidInput(format!(
                    "node count {i} must be even and >= 16, got {}",
                    self.nodes[i]
                )));
            }
        }
        Ok(())
    }
}

/// Value and diagnostics of one trapezoid level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    /// Largest node count over the axes.
    pub nodes_per_axis: usize,
    pub value: Complex64,
    /// `|value - previous level|`; infinite for the first level.
    pub difference: f64,
    /// Rounding floor: a small multiple of machine epsilon times `Σ|f|·w`.
    pub rounding: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex64,
    /// `max(|finest - next finest|, rounding floor)`.
    pub error_estimate: f64,
    pub evaluations: usize,
    pub truncation_used: Vec<f64>,
    pub levels: Vec<Level>,
}

/// Refinement limits for the trapezoid drivers.
#[derive(Debug, Clone, Copy)]
pub struct Refinement {
    /// Minimum nodes per axis before convergence may be declared.
    pub min_nodes: usize,
    /// Maximum nodes per axis; `None` applies the per-axis `2^14` cap and the
    /// tensor budget.
    pub max_nodes: Option<usize>,
}

impl Default for Refinement {
    fn default() -> Self {
        Refinement {
            min_nodes: 64,
            max_nodes: None,
        }
    }
}

/// Per-axis node cap for a cube-shaped grid: `2^14` in one dimension, otherwise
/// the largest power of two whose `dim`-th power fits in [`TENSOR_BUDGET`]
/// (`2^7` in 4-D). Tensor refinement stops once another doubling would leave
/// the budget, so grids with unequal axes may go further on the short ones.
pub fn default_node_cap(dim: usize) -> usize {
    if dim <= 1 {
        return 1 << 14;
    }
    let bits = 28 / dim as u32;
    1usize << bits.min(14)
}

/// Smallest `L >= 1` with `e^{-c·τ·L^υ} <= tol/(1+L)`, clamped to `[1, 10⁴]`.
/// A tolerance of one or more needs no decay at all and returns the lower clamp.
pub fn truncation_radius(decay_c: f64, order: f64, tau: f64, tol: f64) -> Result<f64> {
    for (name, v) in [("decay_c", decay_c), ("order", order), ("tau", tau), ("tol", tol)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(PricingError::NonPositiveInput(format!("{name} = {v}")));
        }
    }
    if order > 2.0 {
        return Err(PricingError::InvalidInput(format!("order {order} exceeds 2")));
    }
    truncation_radius_by(|l| decay_c * tau * l.powf(order), tol)
}

/// Smallest `L` in `[1, 10⁴]` with `decay(L) >= -ln(tol) + ln(1+L)`, where
/// `decay(x)` is the log of the integrand's attenuation at distance `x`.
/// `decay` is assumed eventually increasing; the search doubles, then bisects.
pub fn truncation_radius_by<D: Fn(f64) -> f64>(decay: D, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(PricingError::NonPositiveInput(format!("tol = {tol}")));
    }
    if tol >= 1.0 {
        return Ok(MIN_TRUNCATION);
    }
    let target = -tol.ln();
    let excess = |l: f64| decay(l) - (1.0 + l).ln() - target;
    if excess(MIN_TRUNCATION) >= 0.0 {
        return Ok(MIN_TRUNCATION);
    }
    let mut lo = MIN_TRUNCATION;
    let mut hi = 2.0 * lo;
    while excess(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi >= MAX_TRUNCATION {
            if excess(MAX_TRUNCATION) < 0.0 {
                return Ok(MAX_TRUNCATION);
            }
            hi = MAX_TRUNCATION;
            break;
        }
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-12 * hi {
            break;
        }
    }
    Ok(hi)
}

/// Composite trapezoid sum of `f(x + ib)` on `[-L, L]` with `n` intervals.
/// Returns `(value, Σ|f|·w, evaluations)`.
pub fn trapezoid_line<F>(f: &F, offset: f64, radius: f64, n: usize) -> Result<(Complex64, f64, usize)>
where
    F: Fn(Complex64) -> Complex64 + ?Sized,
{
    let h = 2.0 * radius / n as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut mass = 0.0;
    for k in 0..=n {
        let x = -radius + k as f64 * h;
        let w = if k == 0 || k == n { 0.5 * h } else { h };
        let v = f(Complex64::new(x, offset));
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(PricingError::NaNEncountered(format!("xi = {x} + {offset}i")));
        }
        sum += w * v;
        mass += w * v.norm();
    }
    Ok((sum, mass, n + 1))
}

fn rounding_floor(mass: f64, points: usize) -> f64 {
    16.0 * f64::EPSILON * mass * (points as f64).sqrt().max(1.0)
}

/// Trapezoid integral of `f` along `Im ξ = offset`, `|Re ξ| <= radius`, doubling
/// the node count until successive levels differ by at most `tol`.
///
/// On hitting the node cap returns [`PricingError::NoConvergence`] carrying the
/// best value.
pub fn integrate_line<F>(f: F, offset: f64, radius: f64, tol: f64) -> Result<QuadratureResult>
where
    F: Fn(Complex64) -> Complex64,
{
    integrate_line_with(f, offset, radius, tol, Refinement::default())
}

pub fn integrate_line_with<F>(
    f: F,
    offset: f64,
    radius: f64,
    tol: f64,
    refine: Refinement,
) -> Result<QuadratureResult>
where
    F: Fn(Complex64) -> Complex64,
{
    if offset == 0.0 {
        return Err(PricingError::InvalidInput("line offset must be nonzero".into()));
    }
    if !(radius > 0.0) || !(tol > 0.0) {
        return Err(PricingError::NonPositiveInput(format!("radius {radius}, tol {tol}")));
    }
    let cap = refine.max_nodes.unwrap_or_else(|| default_node_cap(1));
    let mut n = 16usize;
    let (mut value, mut mass, mut evaluations) = trapezoid_line(&f, offset, radius, n)?;
    let mut levels = vec![Level {
        nodes_per_axis: n,
        value,
        difference: f64::INFINITY,
        rounding: rounding_floor(mass, n + 1),
    }];
    loop {
        if n * 2 > cap {
            let last = levels.last().unwrap();
            return Err(PricingError::NoConvergence {
                best: value.re,
                error_estimate: last.difference,
                evaluations,
            });
        }
        // reuse the previous level: only the odd nodes of the finer grid are new
        let h_new = radius / n as f64;
        let mut odd = Complex64::new(0.0, 0.0);
        let mut odd_mass = 0.0;
        for k in 0..n {
            let x = -radius + (2 * k + 1) as f64 * h_new;
            let v = f(Complex64::new(x, offset));
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(PricingError::NaNEncountered(format!("xi = {x} + {offset}i")));
            }
            odd += v;
            odd_mass += v.norm();
        }
        evaluations += n;
        let next = 0.5 * value + h_new * odd;
        mass = 0.5 * mass + h_new * odd_mass;
        n *= 2;
        let difference = (next - value).norm();
        let rounding = rounding_floor(mass, n + 1);
        value = next;
        levels.push(Level {
            nodes_per_axis: n,
            value,
            difference,
            rounding,
        });
        if n >= refine.min_nodes && difference <= tol.max(rounding) {
            return Ok(QuadratureResult {
                value,
                error_estimate: difference.max(rounding),
                evaluations,
                truncation_used: vec![radius],
                levels,
            });
        }
    }
}

/// Tensor-product trapezoid sum of `f` over the box described by `spec` with
/// `nodes[n]` intervals per axis. Returns `(value, Σ|f|·w, evaluations)`.
///
/// The outermost axis is split across threads; each slice is summed in
/// ascending index order and the slice totals are added in ascending order, so
/// the result does not depend on the thread count.
pub fn trapezoid_tensor<F>(f: &F, spec: &ContourSpec, nodes: &[usize]) -> Result<(Complex64, f64, usize)>
where
    F: Fn(&[Complex64]) -> Complex64 + Sync + ?Sized,
{
    let dim = spec.dim();
    let axes: Vec<Vec<(Complex64, f64)>> = (0..dim)
        .map(|a| {
            let n = nodes[a];
            let h = 2.0 * spec.truncation[a] / n as f64;
            (0..=n)
                .map(|k| {
                    let x = -spec.truncation[a] + k as f64 * h;
                    let w = if k == 0 || k == n { 0.5 * h } else { h };
                    (Complex64::new(x, spec.offsets[a]), w)
                })
                .collect()
        })
        .collect();
    // with a reflection, slice k > n/2 also stands for its mirror n - k
    let centre = nodes[0] / 2;
    let outer: &[(Complex64, f64)] = match spec.reflection {
        Some(_) => &axes[0][centre..],
        None => &axes[0],
    };
    let inner_count: usize = axes[1..].iter().map(|a| a.len()).product();
    let slices: Vec<Result<(Complex64, f64)>> = outer
        .par_iter()
        .enumerate()
        .map(|(i, &(x0, w0))| {
            let mut point = vec![x0; dim];
            let mut idx = vec![0usize; dim];
            let mut sum = Complex64::new(0.0, 0.0);
            let mut mass = 0.0;
            for _ in 0..inner_count {
                let mut w = w0;
                for a in 1..dim {
                    let (x, wa) = axes[a][idx[a]];
                    point[a] = x;
                    w *= wa;
                }
                let v = f(&point);
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(PricingError::NaNEncountered(format!("xi = {point:?}")));
                }
                sum += w * v;
                mass += w * v.norm();
                // odometer over axes 1..dim, last axis fastest
                let mut a = dim - 1;
                while a >= 1 {
                    idx[a] += 1;
                    if idx[a] < axes[a].len() {
                        break;
                    }
                    idx[a] = 0;
                    a -= 1;
                }
            }
            match spec.reflection {
                Some(s) if i > 0 => Ok((sum + s * sum.conj(), 2.0 * mass)),
                // the centre slice is its own mirror
                Some(s) => Ok((0.5 * (sum + s * sum.conj()), mass)),
                None => Ok((sum, mass)),
            }
        })
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    let mut mass = 0.0;
    for s in slices {
        let (v, m) = s?;
        total += v;
        mass += m;
    }
    Ok((total, mass, outer.len() * inner_count))
}

/// `|f|` mass of one axis' two end layers of a trapezoid grid (end weights
/// included) and of the two layers just inside them.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EdgeMass {
    pub end: f64,
    pub inside: f64,
}

/// Decay ratio assumed when the layers do not shrink towards the edge.
const MAX_DECAY_RATIO: f64 = 0.99;

impl EdgeMass {
    /// Geometric extrapolation of the mass beyond the truncation.
    pub fn tail(&self) -> f64 {
        // end nodes carry half weight
        let end = 2.0 * self.end;
        if !(end > 0.0) {
            return 0.0;
        }
        let ratio = if self.inside > 0.0 {
            (end / self.inside).min(MAX_DECAY_RATIO)
        } else {
            MAX_DECAY_RATIO
        };
        end * ratio / (1.0 - ratio)
    }
}

/// Estimate of the integral of `|f|` outside the truncation box.
pub fn truncation_tail(edges: &[EdgeMass]) -> f64 {
    edges.iter().map(EdgeMass::tail).sum()
}

/// [`EdgeMass`] of the grid used by [`trapezoid_line`].
pub fn line_edges<F>(f: &F, offset: f64, radius: f64, n: usize) -> EdgeMass
where
    F: Fn(Complex64) -> Complex64 + ?Sized,
{
    let h = 2.0 * radius / n as f64;
    let at = |k: usize| f(Complex64::new(-radius + k as f64 * h, offset)).norm();
    EdgeMass {
        end: 0.5 * h * (at(0) + at(n)),
        inside: h * (at(1) + at(n - 1)),
    }
}

/// [`EdgeMass`] per axis of the grid used by [`trapezoid_tensor`].
pub fn tensor_edges<F>(f: &F, spec: &ContourSpec, nodes: &[usize]) -> Vec<EdgeMass>
where
    F: Fn(&[Complex64]) -> Complex64 + Sync + ?Sized,
{
    let dim = spec.dim();
    let axes: Vec<Vec<(Complex64, f64)>> = (0..dim)
        .map(|a| {
            let n = nodes[a];
            let h = 2.0 * spec.truncation[a] / n as f64;
            (0..=n)
                .map(|k| {
                    let w = if k == 0 || k == n { 0.5 * h } else { h };
                    (Complex64::new(-spec.truncation[a] + k as f64 * h, spec.offsets[a]), w)
                })
                .collect()
        })
        .collect();
    (0..dim)
        .map(|a| {
            let n = nodes[a];
            let others: Vec<usize> = (0..dim).filter(|&b| b != a).collect();
            let count: usize = others.iter().map(|&b| axes[b].len()).product();
            let layer = |k: usize| -> f64 {
                (0..count)
                    .into_par_iter()
                    .map(|mut flat| {
                        let mut point = vec![axes[a][k].0; dim];
                        let mut w = axes[a][k].1;
                        for &b in &others {
                            let (x, wb) = axes[b][flat % axes[b].len()];
                            flat /= axes[b].len();
                            point[b] = x;
                            w *= wb;
                        }
                        w * f(&point).norm()
                    })
                    .collect::<Vec<f64>>()
                    .iter()
                    .sum()
            };
            EdgeMass {
                end: layer(0) + layer(n),
                inside: layer(1) + layer(n - 1),
            }
        })
        .collect()
}

/// Evaluations of one tensor level with `nodes` intervals per axis.
fn tensor_cost(spec: &ContourSpec, nodes: &[usize]) -> usize {
    let inner: usize = nodes[1..].iter().map(|n| n + 1).product();
    let outer = match spec.reflection {
        Some(_) => nodes[0] / 2 + 1,
        None => nodes[0] + 1,
    };
    outer * inner
}

/// Tensor trapezoid integral with uniform doubling of every axis until
/// successive levels differ by at most `tol`. Dimensions above four are refused.
pub fn integrate_tensor<F>(f: F, spec: &ContourSpec, tol: f64) -> Result<QuadratureResult>
where
    F: Fn(&[Complex64]) -> Complex64 + Sync,
{
    integrate_tensor_with(f, spec, tol, Refinement { min_nodes: 32, max_nodes: None })
}

pub fn integrate_tensor_with<F>(
    f: F,
    spec: &ContourSpec,
    tol: f64,
    refine: Refinement,
) -> Result<QuadratureResult>
where
    F: Fn(&[Complex64]) -> Complex64 + Sync,
{
    integrate_tensor_levels(|nodes: &[usize]| trapezoid_tensor(&f, spec, nodes), spec, tol, refine)
}

/// The doubling driver behind [`integrate_tensor_with`], for callers with
/// their own level sum. `level(nodes)` must return what [`trapezoid_tensor`]
/// returns for the same grid.
pub fn integrate_tensor_levels<L>(level: L, spec: &ContourSpec, tol: f64, refine: Refinement) -> Result<QuadratureResult>
where
    L: Fn(&[usize]) -> Result<(Complex64, f64, usize)>,
{
    spec.validate()?;
    let dim = spec.dim();
    if dim > 4 {
        return Err(PricingError::DimensionTooLarge { dim, max: 4 });
    }
    if !(tol > 0.0) {
        return Err(PricingError::NonPositiveInput(format!("tol {tol}")));
    }
    let mut nodes = spec.nodes.clone();
    let at_cap = |nodes: &[usize]| match refine.max_nodes {
        Some(cap) => nodes.iter().any(|&n| n * 2 > cap),
        None => {
            let next: Vec<usize> = nodes.iter().map(|n| 2 * n).collect();
            nodes.iter().any(|&n| n * 2 > default_node_cap(1)) || tensor_cost(spec, &next) > TENSOR_BUDGET
        }
    };
    let (mut value, mass, mut evaluations) = level(&nodes)?;
    let mut levels = vec![Level {
        nodes_per_axis: *nodes.iter().max().unwrap(),
        value,
        difference: f64::INFINITY,
        rounding: rounding_floor(mass, evaluations),
    }];
    loop {
        if at_cap(&nodes) {
            let last = levels.last().unwrap();
            return Err(PricingError::NoConvergence {
                best: value.re,
                error_estimate: last.difference,
                evaluations,
            });
        }
        for n in nodes.iter_mut() {
            *n *= 2;
        }
        let (next, mass, evals) = level(&nodes)?;
        evaluations += evals;
        let difference = (next - value).norm();
        let rounding = rounding_floor(mass, evals);
        value = next;
        levels.push(Level {
            nodes_per_axis: *nodes.iter().max().unwrap(),
            value,
            difference,
            rounding,
        });
        let min_nodes = *nodes.iter().min().unwrap();
        if min_nodes >= refine.min_nodes && difference <= tol.max(rounding) {
            return Ok(QuadratureResult {
                value,
                error_estimate: difference.max(rounding),
                evaluations,
                truncation_used: spec.truncation.clone(),
                levels,
            });
        }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending nodes.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = x;
                p0 = 1.0;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            dp = 1.0;
            x = 0.0;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    (nodes, weights)
}

// Kronrod 15-point nodes (positive half) and weights, with the embedded
// Gauss 7-point weights on the odd-indexed nodes.
const XGK15: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK15: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG7: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK15[7];
    let mut gauss = fc * WG7[3];
    for j in 0..7 {
        let dx = h * XGK15[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK15[j] * s;
        if j % 2 == 1 {
            gauss += WG7[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod (7/15) integral of a real function on `[a, b]` to an
/// absolute tolerance. Subdivision is depth-first and deterministic.
pub fn adaptive_gk15<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64) -> f64 {
    fn recurse<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: f64, whole: (f64, f64), depth: u32) -> f64 {
        let (value, err) = whole;
        if err <= tol || depth >= 40 || (b - a).abs() < 1e-14 * (1.0 + a.abs()) {
            return value;
        }
        let m = 0.5 * (a + b);
        let left = gk15(f, a, m);
        let right = gk15(f, m, b);
        recurse(f, a, m, 0.5 * tol, left, depth + 1) + recurse(f, m, b, 0.5 * tol, right, depth + 1)
    }
    if a == b {
        return 0.0;
    }
    // a few initial panels guard against accidental Gauss/Kronrod agreement
    const PANELS: usize = 8;
    let width = (b - a) / PANELS as f64;
    let mut total = 0.0;
    for i in 0..PANELS {
        let lo = a + i as f64 * width;
        let hi = if i + 1 == PANELS { b } else { lo + width };
        let whole = gk15(&mut f, lo, hi);
        total += recurse(&mut f, lo, hi, abs_tol / PANELS as f64, whole, 0);
    }
    total
}
