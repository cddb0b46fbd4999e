//! Weyl-sum design residual, its tangential gradient, and design
//! certification against exact monomial integrals.
//!
//! For points `p_1..p_N` the squared `L²(λ_d)` norm of `Σ_j G_{p_j}` is
//!
//! ```text
//! ‖Σ_j G_{p_j}‖² = ω_d Σ_{i,j} Σ_{ℓ=1..t} D(ℓ,d) P_{ℓ,d}(⟨p_i, p_j⟩)
//! ```
//!
//! which vanishes exactly when the points form a spherical `t`-design.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonics::{surface_area, KernelSpec};
use crate::point::{Point, SphereDim};

/// Default tolerance on the normalized residual `A_{t,N}`.
pub const DEFAULT_DESIGN_TOL: f64 = 1e-10;

const PARALLEL_THRESHOLD: usize = 96;

/// A fixed point set (`Y_M`, possibly empty) together with free points (`X_N`).
///
/// Multiset semantics: duplicates are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    dim: SphereDim,
    fixed: Vec<Point>,
    free: Vec<Point>,
}

impl Configuration {
    pub fn new(dim: SphereDim, fixed: Vec<Point>, free: Vec<Point>) -> Result<Self> {
        for p in fixed.iter().chain(&free) {
            p.check_dim(dim)?;
            let n = crate::point::norm(p.coords());
            if (n - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "point is not unit-norm (|p| = {n})"
                )));
            }
        }
        Ok(Configuration { dim, fixed, free })
    }

    /// Configuration with every point free.
    pub fn from_points(dim: SphereDim, points: Vec<Point>) -> Result<Self> {
        Self::new(dim, Vec::new(), points)
    }

    pub fn dim(&self) -> SphereDim {
        self.dim
    }

    pub fn fixed(&self) -> &[Point] {
        &self.fixed
    }

    pub fn free(&self) -> &[Point] {
        &self.free
    }

    pub fn len(&self) -> usize {
        self.fixed.len() + self.free.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Fixed points followed by free points.
    pub fn union(&self) -> Vec<Point> {
        self.fixed.iter().chain(&self.free).cloned().collect()
    }

    pub fn into_parts(self) -> (Vec<Point>, Vec<Point>) {
        (self.fixed, self.free)
    }
}

/// Residual and certification data for a point set at degree `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignCertificate {
    pub t: usize,
    pub dim: usize,
    pub points: usize,
    /// `‖Σ G_p‖²_2`, in units of `ω_d²`.
    pub total_residual: f64,
    /// Contribution of each degree `ℓ = 1..=t`.
    pub per_degree: Vec<f64>,
    /// `A_{t,N} = total_residual / (ω_d N²)`.
    pub normalized_residual: f64,
    pub oracle_max_deviation: Option<f64>,
    pub tolerance: Option<f64>,
    pub is_design: Option<bool>,
}

/// Sum in a fixed binary-tree order, independent of thread count.
pub(crate) fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        2 => v[0] + v[1],
        n => {
            let (a, b) = v.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

fn rows<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if n >= PARALLEL_THRESHOLD {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

/// `Σ_{i,j} D(ℓ,d) P_ℓ(⟨p_i,p_j⟩)` for each `ℓ`, without the `ω_d` factor.
fn per_degree_sums(kernel: &KernelSpec, pts: &[Point]) -> Vec<f64> {
    let t = kernel.degree();
    let n = pts.len();
    let row_terms: Vec<Vec<f64>> = rows(n, |i| {
        let mut acc = vec![0.0; t];
        for j in (i + 1)..n {
            kernel.accumulate_per_degree(pts[i].dot(&pts[j]), &mut acc);
        }
        acc
    });
    (0..t)
        .map(|l| {
            let col: Vec<f64> = row_terms.iter().map(|r| r[l]).collect();
            kernel.weights()[l] * n as f64 + 2.0 * pairwise_sum(&col)
        })
        .collect()
}

/// Normalized residual `A = (1/N²) Σ_{i,j} k_t(p_i, p_j)`.
pub(crate) fn normalized_objective(kernel: &KernelSpec, pts: &[Point]) -> f64 {
    let n = pts.len();
    let row_terms: Vec<f64> = rows(n, |i| {
        let terms: Vec<f64> = ((i + 1)..n)
            .map(|j| kernel.profile(pts[i].dot(&pts[j])).0)
            .collect();
        pairwise_sum(&terms)
    });
    let total = kernel.dim_space() * n as f64 + 2.0 * pairwise_sum(&row_terms);
    total / (n as f64 * n as f64)
}

/// Gradient of the normalized residual with respect to `pts[first..]`,
/// projected to each tangent space.
pub(crate) fn normalized_gradient(
    kernel: &KernelSpec,
    pts: &[Point],
    first: usize,
) -> Vec<Vec<f64>> {
    let n = pts.len();
    let dim = pts.first().map_or(0, |p| p.coords().len());
    let scale = 2.0 / (n as f64 * n as f64);
    rows(n - first, |k| {
        let i = first + k;
        let pi = pts[i].coords();
        let mut g = vec![0.0; dim];
        for (j, pj) in pts.iter().enumerate() {
            if j == i {
                continue;
            }
            let s = pts[i].dot(pj);
            let (_, der) = kernel.profile(s);
            for (gc, (a, b)) in g.iter_mut().zip(pj.coords().iter().zip(pi)) {
                *gc += der * (a - s * b);
            }
        }
        g.iter_mut().for_each(|v| *v *= scale);
        // Re-project to absorb rounding.
        pts[i].project_tangent(&g)
    })
}

fn check_nonempty(t: usize, cfg: &Configuration) -> Result<KernelSpec> {
    if cfg.is_empty() {
        return Err(Error::EmptyConfiguration);
    }
    KernelSpec::new(t, cfg.dim())
}

fn certificate_from_points(kernel: &KernelSpec, pts: &[Point]) -> DesignCertificate {
    let dim = kernel.dim();
    let omega = surface_area(dim);
    let per_degree: Vec<f64> = per_degree_sums(kernel, pts)
        .into_iter()
        .map(|v| omega * v)
        .collect();
    let total = pairwise_sum(&per_degree);
    let n = pts.len() as f64;
    DesignCertificate {
        t: kernel.degree(),
        dim: dim.get(),
        points: pts.len(),
        total_residual: total,
        per_degree,
        normalized_residual: total / (omega * n * n),
        oracle_max_deviation: None,
        tolerance: None,
        is_design: None,
    }
}

/// Squared norm of the summed representers over every point of `cfg`.
pub fn weyl_residual(t: usize, cfg: &Configuration) -> Result<DesignCertificate> {
    let kernel = check_nonempty(t, cfg)?;
    Ok(certificate_from_points(&kernel, &cfg.union()))
}

/// Residual of the union `fixed ∪ free`.
///
/// When the fixed set is a `t₁`-design the degree-`ℓ ≤ t₁` contributions of
/// the fixed set vanish, so only the free points and the cross terms feed the
/// low degrees.
pub fn nested_residual(t: usize, cfg: &Configuration) -> Result<DesignCertificate> {
    weyl_residual(t, cfg)
}

/// Gradient of `total_residual` for each free point, projected to its tangent
/// space. Fixed points receive no gradient.
pub fn residual_gradient(t: usize, cfg: &Configuration) -> Result<Vec<Vec<f64>>> {
    let kernel = check_nonempty(t, cfg)?;
    let pts = cfg.union();
    let n = pts.len() as f64;
    let rescale = surface_area(cfg.dim()) * n * n;
    Ok(normalized_gradient(&kernel, &pts, cfg.fixed().len())
        .into_iter()
        .map(|g| g.into_iter().map(|v| v * rescale).collect())
        .collect())
}

/// Exact `∫_{S^d} x^α dμ_d` for the normalized surface measure.
pub fn monomial_integral(alpha: &[u32], d: SphereDim) -> Result<f64> {
    if alpha.len() != d.ambient() {
        return Err(Error::DimensionMismatch {
            expected: d.ambient(),
            found: alpha.len(),
        });
    }
    if alpha.iter().any(|a| a % 2 == 1) {
        return Ok(0.0);
    }
    // Π_i (α_i - 1)!! / Π_{j<K} (d + 1 + 2j), with K = |α| / 2.
    let mut num = 1.0;
    for &a in alpha {
        let mut k = a as i64 - 1;
        while k > 1 {
            num *= k as f64;
            k -= 2;
        }
    }
    let half: u32 = alpha.iter().sum::<u32>() / 2;
    let den: f64 = (0..half)
        .map(|j| (d.ambient() + 2 * j as usize) as f64)
        .product();
    Ok(num / den)
}

/// All multi-indices of length `len` with total degree in `1..=max_degree`.
pub fn multi_indices(len: usize, max_degree: u32) -> Vec<Vec<u32>> {
    fn rec(prefix: &mut Vec<u32>, len: usize, budget: u32, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == len {
            if prefix.iter().any(|&a| a > 0) {
                out.push(prefix.clone());
            }
            return;
        }
        for a in 0..=budget {
            prefix.push(a);
            rec(prefix, len, budget - a, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(len), len, max_degree, &mut out);
    out
}

/// `max_α |N⁻¹ Σ_p p^α - ∫ x^α dμ|` over `1 ≤ |α| ≤ t`.
pub fn monomial_deviation(t: usize, dim: SphereDim, pts: &[Point]) -> Result<f64> {
    if pts.is_empty() {
        return Err(Error::EmptyConfiguration);
    }
    let amb = dim.ambient();
    let tt = t as u32;
    // powers[p][i][k] = x_i^k
    let powers: Vec<Vec<Vec<f64>>> = pts
        .iter()
        .map(|p| {
            p.coords()
                .iter()
                .map(|&c| {
                    let mut v = Vec::with_capacity(t + 1);
                    let mut acc = 1.0;
                    for _ in 0..=t {
                        v.push(acc);
                        acc *= c;
                    }
                    v
                })
                .collect()
        })
        .collect();
    let n = pts.len() as f64;
    let mut worst: f64 = 0.0;
    for alpha in multi_indices(amb, tt) {
        let vals: Vec<f64> = powers
            .iter()
            .map(|pw| {
                alpha
                    .iter()
                    .enumerate()
                    .map(|(i, &a)| pw[i][a as usize])
                    .product()
            })
            .collect();
        let avg = pairwise_sum(&vals) / n;
        let exact = monomial_integral(&alpha, dim)?;
        worst = worst.max((avg - exact).abs());
    }
    Ok(worst)
}

/// Certifies `fixed ∪ free` as a `t`-design at tolerance `tol`, requiring both
/// the kernel residual and the monomial oracle to pass.
///
/// The monomial deviation can never exceed `sqrt(A_{t,N})` (Cauchy-Schwarz on
/// the harmonic expansion of a monomial bounded by 1 on the sphere); a
/// violation beyond `10·tol` is reported as [`Error::Inconsistent`].
pub fn certify_design(t: usize, cfg: &Configuration, tol: f64) -> Result<DesignCertificate> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let kernel = check_nonempty(t, cfg)?;
    let pts = cfg.union();
    let mut cert = certificate_from_points(&kernel, &pts);
    let deviation = monomial_deviation(t, cfg.dim(), &pts)?;
    let bound = cert.normalized_residual.max(0.0).sqrt();
    if deviation > bound + 10.0 * tol {
        return Err(Error::Inconsistent { deviation, bound });
    }
    cert.oracle_max_deviation = Some(deviation);
    cert.tolerance = Some(tol);
    cert.is_design = Some(deviation <= tol && cert.normalized_residual <= tol);
    Ok(cert)
}

/// Convenience wrapper: certify a plain point list.
pub fn certify_points(
    t: usize,
    dim: SphereDim,
    pts: &[Point],
    tol: f64,
) -> Result<DesignCertificate> {
    certify_design(t, &Configuration::from_points(dim, pts.to_vec())?, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs;
    use std::f64::consts::PI;

    fn s2() -> SphereDim {
        SphereDim::TWO
    }

    #[test]
    fn single_point_residual_is_diagonal() {
        let p = Point::new(vec![0.2, 0.5, -0.7]).unwrap();
        let cfg = Configuration::from_points(s2(), vec![p]).unwrap();
        for t in 1..6 {
            let c = weyl_residual(t, &cfg).unwrap();
            let dt = crate::harmonics::dim_space(t as u64, s2()).unwrap() as f64;
            assert!((c.total_residual - 4.0 * PI * dt).abs() < 1e-10);
            assert!((c.normalized_residual - dt).abs() < 1e-12);
        }
    }

    #[test]
    fn antipodal_pair_degree_one() {
        let x = Point::new(vec![0.3, -0.4, 0.5]).unwrap();
        let cfg = Configuration::from_points(s2(), vec![x.clone(), x.negate()]).unwrap();
        let c = weyl_residual(1, &cfg).unwrap();
        assert!(c.total_residual.abs() < 1e-13);
    }

    #[test]
    fn empty_configuration_rejected() {
        let cfg = Configuration::from_points(s2(), vec![]).unwrap();
        assert_eq!(weyl_residual(2, &cfg), Err(Error::EmptyConfiguration));
        assert!(residual_gradient(2, &cfg).is_err());
    }

    #[test]
    fn per_degree_sums_to_total() {
        let ico = designs::icosahedron();
        let cfg = Configuration::from_points(s2(), ico).unwrap();
        let c = weyl_residual(8, &cfg).unwrap();
        let s: f64 = c.per_degree.iter().sum();
        assert!((s - c.total_residual).abs() <= 1e-9 * c.total_residual.abs().max(1.0));
        // The icosahedron is a 5-design but not a 6-design.
        assert!(c.per_degree[..5].iter().all(|v| v.abs() < 1e-9));
        assert!(c.per_degree[5] > 1.0);
    }

    #[test]
    fn monomial_integrals() {
        assert_eq!(monomial_integral(&[0, 0, 0], s2()).unwrap(), 1.0);
        assert_eq!(monomial_integral(&[1, 0, 0], s2()).unwrap(), 0.0);
        assert!((monomial_integral(&[2, 0, 0], s2()).unwrap() - 1.0 / 3.0).abs() < 1e-16);
        assert!((monomial_integral(&[4, 0, 0], s2()).unwrap() - 0.2).abs() < 1e-16);
        // x²y² on S²: 1/15
        assert!((monomial_integral(&[2, 2, 0], s2()).unwrap() - 1.0 / 15.0).abs() < 1e-16);
        assert!(monomial_integral(&[2, 0], s2()).is_err());
    }

    #[test]
    fn monomial_integral_matches_gamma_form() {
        use statrs::function::gamma::gamma;
        for d in 1..5usize {
            let dim = SphereDim::new(d).unwrap();
            let omega = surface_area(dim);
            for alpha in multi_indices(d + 1, 6) {
                if alpha.iter().any(|a| a % 2 == 1) {
                    continue;
                }
                let total: u32 = alpha.iter().sum();
                let num: f64 = alpha
                    .iter()
                    .map(|&a| gamma((a as f64 + 1.0) / 2.0))
                    .product();
                let want = 2.0 / omega * num / gamma((total as f64 + d as f64 + 1.0) / 2.0);
                let got = monomial_integral(&alpha, dim).unwrap();
                assert!((got - want).abs() < 1e-13, "{alpha:?}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn octahedron_degree_four_deviation() {
        let oct = designs::octahedron();
        let cfg = Configuration::from_points(s2(), oct).unwrap();
        let c = certify_design(4, &cfg, 1e-10).unwrap();
        assert_eq!(c.is_design, Some(false));
        let dev = c.oracle_max_deviation.unwrap();
        assert!((dev - (1.0 / 3.0 - 1.0 / 5.0)).abs() < 1e-14);
    }

    #[test]
    fn bad_tolerance_rejected() {
        let cfg = Configuration::from_points(s2(), designs::octahedron()).unwrap();
        assert!(certify_design(3, &cfg, 0.0).is_err());
    }

    #[test]
    fn pairwise_sum_small() {
        assert_eq!(pairwise_sum(&[]), 0.0);
        assert_eq!(pairwise_sum(&[1.0, 2.0, 3.0, 4.0, 5.0]), 15.0);
    }

    #[test]
    fn multi_index_count() {
        // C(t + d + 1, d + 1) - 1 nonzero indices.
        assert_eq!(multi_indices(3, 5).len(), 55);
        assert_eq!(multi_indices(3, 1).len(), 3);
    }
}
