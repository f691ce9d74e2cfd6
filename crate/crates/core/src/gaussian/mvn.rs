//! Multivariate normal distribution functions.
//!
//! Bivariate probabilities use Genz's Gauss-Legendre scheme (Drezner-Wesolowsky
//! with the asymptotic expansion for `|ρ| >= 0.925`). Higher dimensions
//! condition on the first coordinate and integrate adaptively, recursing down
//! to the bivariate case, so every value is deterministic.

use std::f64::consts::{PI, SQRT_2};
use std::sync::OnceLock;

use crate::error::{PricingError, Result};
use crate::quadrature::{adaptive_gk15, gauss_legendre};

/// Largest supported dimension.
pub const MAX_DIM: usize = 6;

/// Integration range for conditioning variables, in standard deviations.
const Z_RANGE: f64 = 9.0;

/// Standard normal distribution function.
pub fn norm_cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    0.5 * libm::erfc(-x / SQRT_2)
}

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// A validated correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    dim: usize,
    c: Vec<f64>,
}

impl CorrelationMatrix {
    /// Checks symmetry, unit diagonal and positive semidefiniteness.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(PricingError::InvalidInput("empty correlation matrix".into()));
        }
        if dim > MAX_DIM {
            return Err(PricingError::DimensionTooLarge { dim, max: MAX_DIM });
        }
        let mut c = Vec::with_capacity(dim * dim);
        for row in &rows {
            if row.len() != dim {
                return Err(PricingError::InvalidInput("correlation matrix is not square".into()));
            }
            c.extend_from_slice(row);
        }
        for i in 0..dim {
            if (c[i * dim + i] - 1.0).abs() > 1e-12 {
                return Err(PricingError::InvalidInput(format!("diagonal entry {i} is not 1")));
            }
            for j in 0..i {
                let (a, b) = (c[i * dim + j], c[j * dim + i]);
                if !a.is_finite() || (a - b).abs() > 1e-12 || a.abs() > 1.0 + 1e-12 {
                    return Err(PricingError::InvalidInput(format!(
                        "entries ({i},{j}) and ({j},{i}) are not a valid correlation pair"
                    )));
                }
            }
        }
        let smallest = smallest_pivot(&c, dim);
        if smallest < -1e-10 {
            return Err(PricingError::NotPSD(smallest));
        }
        Ok(CorrelationMatrix { dim, c })
    }

    pub fn identity(dim: usize) -> Self {
        let mut c = vec![0.0; dim * dim];
        for i in 0..dim {
            c[i * dim + i] = 1.0;
        }
        CorrelationMatrix { dim, c }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.c[i * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.c.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    /// `W C W` for a vector of signs `W`.
    pub fn signed(&self, w: &[f64]) -> Self {
        let n = self.dim;
        let mut c = self.c.clone();
        for i in 0..n {
            for j in 0..n {
                c[i * n + j] *= w[i] * w[j];
            }
        }
        CorrelationMatrix { dim: n, c }
    }
}

/// Smallest pivot of an LDLᵀ factorisation with clipping; negative when the
/// matrix is indefinite.
fn smallest_pivot(c: &[f64], n: usize) -> f64 {
    let mut a = c.to_vec();
    let mut smallest = f64::INFINITY;
    for k in 0..n {
        let d = a[k * n + k];
        smallest = smallest.min(d);
        if d <= 1e-14 {
            continue;
        }
        for i in k + 1..n {
            let f = a[i * n + k] / d;
            for j in k + 1..n {
                a[i * n + j] -= f * a[k * n + j];
            }
        }
    }
    smallest
}

struct GlTable {
    x: Vec<f64>,
    w: Vec<f64>,
}

/// Negative-half Gauss-Legendre nodes for 6, 12 and 20 points.
fn gl_tables() -> &'static [GlTable; 3] {
    static TABLES: OnceLock<[GlTable; 3]> = OnceLock::new();
    TABLES.get_or_init(|| {
        [6usize, 12, 20].map(|n| {
            let (x, w) = gauss_legendre(n);
            GlTable {
                x: x[..n / 2].to_vec(),
                w: w[..n / 2].to_vec(),
            }
        })
    })
}

/// Upper bivariate probability `P(X > dh, Y > dk)` with correlation `r`.
fn bvnu(dh: f64, dk: f64, r: f64) -> f64 {
    let tables = gl_tables();
    let table = if r.abs() < 0.3 {
        &tables[0]
    } else if r.abs() < 0.75 {
        &tables[1]
    } else {
        &tables[2]
    };
    let h = dh;
    let mut k = dk;
    let mut hk = h * k;
    let mut bvn = 0.0;
    if r.abs() < 0.925 {
        let hs = 0.5 * (h * h + k * k);
        let asr = r.asin();
        for (x, w) in table.x.iter().zip(&table.w) {
            for sgn in [1.0, -1.0] {
                let sn = (0.5 * asr * (1.0 + sgn * x)).sin();
                bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
            }
        }
        return bvn * asr / (4.0 * PI) + norm_cdf(-h) * norm_cdf(-k);
    }
    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    if r.abs() < 1.0 {
        let as_ = (1.0 - r) * (1.0 + r);
        let mut a = as_.sqrt();
        let bs = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        bvn = a
            * (-0.5 * (bs / as_ + hk)).exp()
            * (1.0 - c * (bs - as_) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as_ * as_ / 5.0);
        if hk > -160.0 {
            let b = bs.sqrt();
            bvn -= (-0.5 * hk).exp()
                * (2.0 * PI).sqrt()
                * norm_cdf(-b / a)
                * b
                * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
        }
        a *= 0.5;
        for (x, w) in table.x.iter().zip(&table.w) {
            for sgn in [1.0, -1.0] {
                let xs = (a * (sgn * x + 1.0)).powi(2);
                let rs = (1.0 - xs).sqrt();
                let asr = -0.5 * (bs / xs + hk);
                if asr > -100.0 {
                    bvn += a
                        * w
                        * asr.exp()
                        * ((-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs
                            - (1.0 + c * xs * (1.0 + d * xs)));
                }
            }
        }
        bvn = -bvn / (2.0 * PI);
    }
    if r > 0.0 {
        bvn + norm_cdf(-h.max(k))
    } else {
        bvn = -bvn;
        if k > h {
            if h < 0.0 {
                bvn += norm_cdf(k) - norm_cdf(h);
            } else {
                bvn += norm_cdf(-h) - norm_cdf(-k);
            }
        }
        bvn
    }
}

/// `P(X <= a, Y <= b)` for standard normals with correlation `rho`.
pub fn bvn_cdf(a: f64, b: f64, rho: f64) -> f64 {
    if a == f64::NEG_INFINITY || b == f64::NEG_INFINITY {
        return 0.0;
    }
    if a == f64::INFINITY {
        return norm_cdf(b);
    }
    if b == f64::INFINITY {
        return norm_cdf(a);
    }
    let rho = rho.clamp(-1.0, 1.0);
    if rho >= 1.0 {
        return norm_cdf(a.min(b));
    }
    if rho <= -1.0 {
        return (norm_cdf(a) - norm_cdf(-b)).max(0.0);
    }
    bvnu(-a, -b, rho).clamp(0.0, 1.0)
}

/// `P(X_k <= d_k for all k)` for a standard normal vector with correlation `c`.
/// Infinite thresholds are allowed.
pub fn mvn_cdf(d: &[f64], c: &CorrelationMatrix) -> Result<f64> {
    if d.len() != c.dim() {
        return Err(PricingError::InvalidInput(format!(
            "{} thresholds for a {}-dimensional correlation matrix",
            d.len(),
            c.dim()
        )));
    }
    if d.iter().any(|x| x.is_nan()) {
        return Err(PricingError::NaNEncountered("mvn threshold".into()));
    }
    let tol = if d.len() <= 3 { 1e-10 } else { 1e-8 };
    Ok(mvn_rec(d.to_vec(), c.c.clone(), tol).clamp(0.0, 1.0))
}

fn mvn_rec(d: Vec<f64>, c: Vec<f64>, tol: f64) -> f64 {
    let n = d.len();
    if d.iter().any(|&x| x == f64::NEG_INFINITY) {
        return 0.0;
    }
    // coordinates with +∞ thresholds do not constrain anything
    let keep: Vec<usize> = (0..n).filter(|&i| d[i] != f64::INFINITY).collect();
    if keep.len() < n {
        let m = keep.len();
        let dd: Vec<f64> = keep.iter().map(|&i| d[i]).collect();
        let mut cc = vec![0.0; m * m];
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                cc[a * m + b] = c[i * n + j];
            }
        }
        return mvn_rec(dd, cc, tol);
    }
    match n {
        0 => 1.0,
        1 => norm_cdf(d[0]),
        2 => bvn_cdf(d[0], d[1], c[1]),
        _ => {
            // condition on x = X_1; X_k | x ~ N(c_k1 x, 1 - c_k1²)
            let mut lo = -Z_RANGE;
            let mut hi = d[0].min(Z_RANGE);
            let mut free = Vec::new();
            for k in 1..n {
                let ck = c[k * n];
                if 1.0 - ck * ck < 1e-12 {
                    // X_k = ±x: the constraint is a bound on x
                    if ck > 0.0 {
                        hi = hi.min(d[k]);
                    } else {
                        lo = lo.max(-d[k]);
                    }
                } else {
                    free.push(k);
                }
            }
            if !(lo < hi) {
                return 0.0;
            }
            let m = free.len();
            let sd: Vec<f64> = free.iter().map(|&k| (1.0 - c[k * n] * c[k * n]).sqrt()).collect();
            let mut cc = vec![0.0; m * m];
            for a in 0..m {
                for b in 0..m {
                    let (i, j) = (free[a], free[b]);
                    cc[a * m + b] = if a == b {
                        1.0
                    } else {
                        ((c[i * n + j] - c[i * n] * c[j * n]) / (sd[a] * sd[b])).clamp(-1.0, 1.0)
                    };
                }
            }
            let inner_tol = tol / (hi - lo).max(1.0);
            adaptive_gk15(
                |x| {
                    let dd: Vec<f64> = free
                        .iter()
                        .zip(&sd)
                        .map(|(&k, s)| (d[k] - c[k * n] * x) / s)
                        .collect();
                    norm_pdf(x) * mvn_rec(dd, cc.clone(), inner_tol)
                },
                lo,
                hi,
                tol,
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force `P(X <= a, Y <= b)` by adaptive quadrature of the conditional form.
    fn bvn_oracle(a: f64, b: f64, rho: f64) -> f64 {
        let s = (1.0 - rho * rho).sqrt();
        adaptive_gk15(|t| norm_pdf(t) * norm_cdf((b - rho * t) / s), -12.0, a.min(12.0), 1e-15)
    }

    #[test]
    fn bivariate_against_brute_force() {
        for &rho in &[-0.99, -0.95, -0.8, -0.5, -0.1, 0.0, 0.2, 0.5, 0.8, 0.93, 0.99] {
            for &(a, b) in &[(0.0, 0.0), (1.0, -0.5), (-1.3, 0.7), (2.0, 2.5), (-2.0, -1.0), (0.3, 0.3)] {
                let v = bvn_cdf(a, b, rho);
                let o = bvn_oracle(a, b, rho);
                assert!((v - o).abs() < 1e-13, "a={a} b={b} rho={rho}: {v} vs {o}");
            }
        }
    }

    #[test]
    fn bivariate_closed_values() {
        assert!((bvn_cdf(0.0, 0.0, 0.5) - 1.0 / 3.0).abs() < 1e-14);
        let rho: f64 = -0.3;
        let expected = 0.25 + rho.asin() / (2.0 * PI);
        assert!((bvn_cdf(0.0, 0.0, rho) - expected).abs() < 1e-14);
        assert!((bvn_cdf(0.4, 9.0e9, 0.7) - norm_cdf(0.4)).abs() < 1e-14);
    }

    #[test]
    fn trivariate_examples() {
        let id = CorrelationMatrix::identity(3);
        assert!((mvn_cdf(&[0.0; 3], &id).unwrap() - 0.125).abs() < 1e-10);
        // orthant probability: 1/8 + (asin ρ12 + asin ρ13 + asin ρ23)/(4π)
        let c = CorrelationMatrix::new(vec![
            vec![1.0, 0.3, -0.2],
            vec![0.3, 1.0, 0.5],
            vec![-0.2, 0.5, 1.0],
        ])
        .unwrap();
        let expected = 0.125 + (0.3f64.asin() + (-0.2f64).asin() + 0.5f64.asin()) / (4.0 * PI);
        assert!((mvn_cdf(&[0.0; 3], &c).unwrap() - expected).abs() < 1e-9);
        assert!((mvn_cdf(&[40.0; 3], &c).unwrap() - 1.0).abs() < 1e-12);
        let inf = f64::INFINITY;
        let v = mvn_cdf(&[0.5, inf, -0.3], &c).unwrap();
        assert!((v - bvn_cdf(0.5, -0.3, -0.2)).abs() < 1e-14);
    }

    #[test]
    fn degenerate_correlation_restricts_range() {
        let c = CorrelationMatrix::new(vec![
            vec![1.0, 1.0, 0.0],
            vec![1.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let v = mvn_cdf(&[0.5, -0.2, 0.0], &c).unwrap();
        assert!((v - 0.5 * norm_cdf(-0.2)).abs() < 1e-9);
    }

    #[test]
    fn four_dimensional_orthant() {
        // equicorrelated ρ = 1/2: P = 1/5 for the negative orthant in 4-D
        let mut rows = vec![vec![0.5; 4]; 4];
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        let c = CorrelationMatrix::new(rows).unwrap();
        assert!((mvn_cdf(&[0.0; 4], &c).unwrap() - 0.2).abs() < 1e-7);
    }

    #[test]
    fn rejects_invalid_matrices() {
        let bad = CorrelationMatrix::new(vec![
            vec![1.0, 0.9, -0.9],
            vec![0.9, 1.0, 0.9],
            vec![-0.9, 0.9, 1.0],
        ]);
        assert!(matches!(bad, Err(PricingError::NotPSD(_))));
        assert!(CorrelationMatrix::new(vec![vec![1.0, 0.2], vec![0.3, 1.0]]).is_err());
        assert!(matches!(
            CorrelationMatrix::new(vec![vec![1.0; 7]; 7]),
            Err(PricingError::DimensionTooLarge { .. })
        ));
    }
}
