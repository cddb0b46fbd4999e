//! Closed-form counting bounds for spherical designs and nested extensions,
//! plus the replication construction for degree ratios `t / t₁ = p / q`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::designs::{rotated_union, Classical};
use crate::error::{Error, Result};
use crate::harmonics::{binom, dim_harmonic, dim_space, surface_area};
use crate::optimizer::{extend_design, ExtendOptions};
use crate::point::{Point, SphereDim};
use crate::residual::{certify_points, DesignCertificate, DEFAULT_DESIGN_TOL};

pub const DEFAULT_B_D: f64 = 7.0;
pub const DEFAULT_R_D: f64 = 1.0;
pub const DEFAULT_C1_MARGIN: f64 = 0.01;

/// The constants `B_d`, `r_d` and the derived `C₁`, `C₂`, `C₃`.
///
/// `C₁ = max(override, (108 B_d / r_d)^d (1 + margin))` is strictly above
/// `(108 B_d / r_d)^d`, `C₂ = r_d / (36 √d)` and `C₃ = sqrt((d+1)/d)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperConstants {
    dim: usize,
    b_d: f64,
    r_d: f64,
    c1_margin: f64,
    c1_override: Option<f64>,
    c1_d: f64,
    c2_d: f64,
    c3_d: f64,
}

impl PaperConstants {
    pub fn new(
        dim: SphereDim,
        b_d: f64,
        r_d: f64,
        c1_margin: f64,
        c1_override: Option<f64>,
    ) -> Result<Self> {
        let finite_pos = |v: f64| v.is_finite() && v > 0.0;
        if !finite_pos(b_d) || !finite_pos(r_d) || !finite_pos(c1_margin) {
            return Err(Error::InvalidConstants(format!(
                "b_d, r_d and c1_margin must be positive (got {b_d}, {r_d}, {c1_margin})"
            )));
        }
        if let Some(c) = c1_override {
            if !finite_pos(c) {
                return Err(Error::InvalidConstants(format!(
                    "C1 override {c} is not positive"
                )));
            }
        }
        let d = dim.get() as f64;
        let floor = (108.0 * b_d / r_d).powi(dim.get() as i32);
        let c1_d = (floor * (1.0 + c1_margin)).max(c1_override.unwrap_or(0.0));
        Ok(PaperConstants {
            dim: dim.get(),
            b_d,
            r_d,
            c1_margin,
            c1_override,
            c1_d,
            c2_d: r_d / (36.0 * d.sqrt()),
            c3_d: ((d + 1.0) / d).sqrt(),
        })
    }

    /// `B_d = 7`, `r_d = 1`, margin `0.01`.
    pub fn defaults(dim: SphereDim) -> Result<Self> {
        Self::new(dim, DEFAULT_B_D, DEFAULT_R_D, DEFAULT_C1_MARGIN, None)
    }

    pub fn dim(&self) -> SphereDim {
        SphereDim::new(self.dim).expect("validated at construction")
    }

    pub fn b_d(&self) -> f64 {
        self.b_d
    }

    pub fn r_d(&self) -> f64 {
        self.r_d
    }

    pub fn c1_margin(&self) -> f64 {
        self.c1_margin
    }

    pub fn c1(&self) -> f64 {
        self.c1_d
    }

    pub fn c2(&self) -> f64 {
        self.c2_d
    }

    pub fn c3(&self) -> f64 {
        self.c3_d
    }
}

/// Delsarte-Goethals-Seidel lower bound on the size of a `t`-design on `S^d`.
pub fn dgs_lower_bound(t: usize, dim: SphereDim) -> Result<u64> {
    if t == 0 {
        return Err(Error::InvalidArgument("t must be at least 1".into()));
    }
    let d = dim.get() as u64;
    let k = (t / 2) as u64;
    if t.is_multiple_of(2) {
        binom(d + k, d)?
            .checked_add(binom(d + k - 1, d)?)
            .ok_or(Error::Overflow("DGS bound"))
    } else {
        binom(d + k, d)?
            .checked_mul(2)
            .ok_or(Error::Overflow("DGS bound"))
    }
}

/// Norm bounds for a set of `M` points. Entries marked `nested` assume
/// the set is a `t₁`-design. The two `lemma3` entries are the magnitudes of
/// lower bounds that are negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaBounds {
    /// `sqrt((d+1)/d · ω_d · D(t+1, d+1))`, bounding `‖P‖₂` on the boundary.
    pub lemma1: f64,
    /// `M sqrt(ω_d D_t)`.
    pub lemma2_general: f64,
    /// `M sqrt(ω_d (D_t - D_{t₁}))`.
    pub lemma2_nested: f64,
    /// `M sqrt((d+1)/d · D(t+1, d+1) · D_t)`.
    pub lemma3_general: f64,
    /// `M sqrt((d+1)/d · D(t+1, d+1) · (D_t - D_{t₁}))`.
    pub lemma3_nested: f64,
}

fn check_degrees(t: usize, t1: usize) -> Result<()> {
    if t1 == 0 || t1 >= t {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= t1 < t (got t1 = {t1}, t = {t})"
        )));
    }
    Ok(())
}

/// `D(t+1, d+1)`.
fn d_next(t: usize, dim: SphereDim) -> Result<f64> {
    Ok(dim_harmonic(t as u64 + 1, SphereDim::new(dim.get() + 1)?)? as f64)
}

fn ds(t: usize, dim: SphereDim) -> Result<f64> {
    Ok(dim_space(t as u64, dim)? as f64)
}

pub fn lemma_bounds(t: usize, t1: usize, m: usize, dim: SphereDim) -> Result<LemmaBounds> {
    check_degrees(t, t1)?;
    let d = dim.get() as f64;
    let omega = surface_area(dim);
    let big = d_next(t, dim)?;
    let (dt, dt1) = (ds(t, dim)?, ds(t1, dim)?);
    let m = m as f64;
    let ratio = (d + 1.0) / d;
    Ok(LemmaBounds {
        lemma1: (ratio * omega * big).sqrt(),
        lemma2_general: m * (omega * dt).sqrt(),
        lemma2_nested: m * (omega * (dt - dt1)).sqrt(),
        lemma3_general: m * (ratio * big * dt).sqrt(),
        lemma3_nested: m * (ratio * big * (dt - dt1)).sqrt(),
    })
}

/// Sufficient number of added points
/// `max(C₁ t^d, C₃/C₂ · M t sqrt(D(t+1,d+1) D_t))`, and the nested variant
/// with `D_t - D_{t₁}` when `t₁` is given.
pub fn theorem4_points(
    t: usize,
    t1: Option<usize>,
    m: usize,
    dim: SphereDim,
    consts: &PaperConstants,
) -> Result<(f64, Option<f64>)> {
    if t == 0 {
        return Err(Error::InvalidArgument("t must be at least 1".into()));
    }
    if consts.dim() != dim {
        return Err(Error::InvalidConstants(format!(
            "constants are for d = {}, not d = {}",
            consts.dim().get(),
            dim.get()
        )));
    }
    let tf = t as f64;
    let first = consts.c1() * tf.powi(dim.get() as i32);
    let lead = consts.c3() / consts.c2() * m as f64 * tf;
    let big = d_next(t, dim)?;
    let dt = ds(t, dim)?;
    let general = first.max(lead * (big * dt).sqrt());
    let nested = match t1 {
        Some(t1) => {
            check_degrees(t, t1)?;
            Some(first.max(lead * (big * (dt - ds(t1, dim)?)).sqrt()))
        }
        None => None,
    };
    Ok((general, nested))
}

/// The `N + M` figure for a given set of size `M = t^d`:
/// `C₃/C₂ · M t sqrt(D(t+1,d+1) D_t) + M`, of order `t^{2d+1}`.
pub fn corollary3_order(t: usize, dim: SphereDim, consts: &PaperConstants) -> Result<f64> {
    if t < 2 {
        return Err(Error::InvalidArgument("t must be at least 2".into()));
    }
    let tf = t as f64;
    let m = tf.powi(dim.get() as i32);
    let root = (d_next(t, dim)? * ds(t, dim)?).sqrt();
    Ok(consts.c3() / consts.c2() * m * tf * root + m)
}

/// Least-squares slope of `log corollary3_order` against `log t` over `ts`.
pub fn corollary3_slope(ts: &[usize], dim: SphereDim, consts: &PaperConstants) -> Result<f64> {
    let pts: Vec<(f64, f64)> = ts
        .iter()
        .map(|&t| Ok(((t as f64).ln(), corollary3_order(t, dim, consts)?.ln())))
        .collect::<Result<_>>()?;
    let n = pts.len() as f64;
    let (mx, my) = pts
        .iter()
        .fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n));
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |a, p| {
        (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx).powi(2))
    });
    Ok(sxy / sxx)
}

/// Every quantity above for one `(d, t, t₁, M)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub d: usize,
    pub t: usize,
    pub t1: Option<usize>,
    pub m: usize,
    pub constants: PaperConstants,
    pub dim_space: u64,
    pub dgs_lower: u64,
    pub lemma1: f64,
    pub lemma2_general: f64,
    pub lemma2_nested: Option<f64>,
    pub lemma3_general: f64,
    pub lemma3_nested: Option<f64>,
    pub theorem4_n_general: f64,
    pub theorem4_n_nested: Option<f64>,
    pub corollary3_total_order: Option<f64>,
}

pub fn bounds_report(
    t: usize,
    t1: Option<usize>,
    m: usize,
    dim: SphereDim,
    consts: &PaperConstants,
) -> Result<BoundsReport> {
    let d = dim.get() as f64;
    let omega = surface_area(dim);
    let big = d_next(t, dim)?;
    let dt = ds(t, dim)?;
    let lemmas = t1.map(|t1| lemma_bounds(t, t1, m, dim)).transpose()?;
    let (n_general, n_nested) = theorem4_points(t, t1, m, dim, consts)?;
    Ok(BoundsReport {
        d: dim.get(),
        t,
        t1,
        m,
        constants: consts.clone(),
        dim_space: dim_space(t as u64, dim)?,
        dgs_lower: dgs_lower_bound(t, dim)?,
        lemma1: ((d + 1.0) / d * omega * big).sqrt(),
        lemma2_general: m as f64 * (omega * dt).sqrt(),
        lemma2_nested: lemmas.map(|l| l.lemma2_nested),
        lemma3_general: m as f64 * ((d + 1.0) / d * big * dt).sqrt(),
        lemma3_nested: lemmas.map(|l| l.lemma3_nested),
        theorem4_n_general: n_general,
        theorem4_n_nested: n_nested,
        corollary3_total_order: (t >= 2)
            .then(|| corollary3_order(t, dim, consts))
            .transpose()?,
    })
}

/// Replication arithmetic for `t = (p/q) t₁`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Proposition1Plan {
    pub t1: usize,
    pub t: usize,
    pub d: usize,
    pub p: u64,
    pub q: u64,
    /// `p^d - q^d` extra `t`-designs of size `N / q^d`.
    pub copies: u64,
    /// `q^d`: the base design holds this many unit blocks.
    pub base_units: u64,
    /// `m^d = (p/q)^d`, the growth of the constant in the order.
    pub constant_factor: f64,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn proposition1_plan(t1: usize, t: usize, dim: SphereDim) -> Result<Proposition1Plan> {
    check_degrees(t, t1)?;
    let g = gcd(t as u64, t1 as u64);
    let (p, q) = (t as u64 / g, t1 as u64 / g);
    let e = dim.get() as u32;
    let pd = p.checked_pow(e).ok_or(Error::Overflow("p^d"))?;
    let qd = q.checked_pow(e).ok_or(Error::Overflow("q^d"))?;
    Ok(Proposition1Plan {
        t1,
        t,
        d: dim.get(),
        p,
        q,
        copies: pd - qd,
        base_units: qd,
        constant_factor: (p as f64 / q as f64).powi(e as i32),
    })
}

/// A supplier of certified designs.
pub trait DesignSource {
    /// A `deg`-design of exactly `n` points on `S^d`.
    fn design(&mut self, deg: usize, n: usize, dim: SphereDim) -> Result<Vec<Point>>;

    /// Smallest size this source can supply for `deg`, if known.
    fn unit_size(&self, deg: usize, dim: SphereDim) -> Option<usize>;
}

/// Randomly rotated unions of the classical designs on `S^2`.
#[derive(Debug, Clone)]
pub struct ClassicalDesigns {
    rng: ChaCha8Rng,
}

impl ClassicalDesigns {
    pub fn new(seed: u64) -> Self {
        ClassicalDesigns {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn pick(deg: usize, n: Option<usize>) -> Option<Classical> {
        Classical::ALL
            .into_iter()
            .filter(|c| c.strength() >= deg && n.is_none_or(|n| n % c.size() == 0))
            .min_by_key(|c| c.size())
    }
}

impl DesignSource for ClassicalDesigns {
    fn design(&mut self, deg: usize, n: usize, dim: SphereDim) -> Result<Vec<Point>> {
        if dim != SphereDim::TWO {
            return Err(Error::DesignSource(
                "classical designs exist here for d = 2 only".into(),
            ));
        }
        let c = Self::pick(deg, Some(n)).ok_or_else(|| {
            Error::DesignSource(format!("no classical {deg}-design divides {n} points"))
        })?;
        Ok(rotated_union(&c.points(), n / c.size(), &mut self.rng))
    }

    fn unit_size(&self, deg: usize, dim: SphereDim) -> Option<usize> {
        (dim == SphereDim::TWO)
            .then(|| Self::pick(deg, None).map(|c| c.size()))
            .flatten()
    }
}

/// Designs computed from scratch by the optimizer.
#[derive(Debug, Clone)]
pub struct OptimizerDesigns {
    pub opts: ExtendOptions,
}

impl DesignSource for OptimizerDesigns {
    fn design(&mut self, deg: usize, n: usize, dim: SphereDim) -> Result<Vec<Point>> {
        let res = extend_design(deg, dim, &[], n, &self.opts)?;
        if !res.converged {
            return Err(Error::DesignSource(format!(
                "optimizer did not reach a {deg}-design with {n} points (A = {:e})",
                res.certificate.normalized_residual
            )));
        }
        // Vary the restart noise between calls.
        self.opts.seed = self.opts.seed.wrapping_add(1);
        Ok(res.free_points)
    }

    fn unit_size(&self, deg: usize, dim: SphereDim) -> Option<usize> {
        dgs_lower_bound(deg, dim).ok().map(|v| v as usize)
    }
}

/// Output of [`proposition1_build`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Proposition1Build {
    pub plan: Proposition1Plan,
    pub unit_size: usize,
    /// The base `t`-design, used as the `t₁`-design `Y`.
    pub base: Vec<Point>,
    /// `Y` followed by the added designs.
    pub union: Vec<Point>,
    pub base_certificate: DesignCertificate,
    pub union_certificate: DesignCertificate,
}

/// Runs the replication: a base `t`-design of `q^d · unit` points, then
/// `p^d - q^d` further `t`-designs of `unit` points each.
pub fn proposition1_build<S: DesignSource + ?Sized>(
    t1: usize,
    t: usize,
    dim: SphereDim,
    unit: Option<usize>,
    source: &mut S,
) -> Result<Proposition1Build> {
    let plan = proposition1_plan(t1, t, dim)?;
    let unit = match unit {
        Some(u) => u,
        None => source
            .unit_size(t, dim)
            .ok_or_else(|| Error::DesignSource("source has no default unit size".into()))?,
    };
    let base_n = usize::try_from(plan.base_units)
        .ok()
        .and_then(|b| b.checked_mul(unit))
        .ok_or(Error::Overflow("base size"))?;
    let base = source.design(t, base_n, dim)?;
    let mut union = base.clone();
    for _ in 0..plan.copies {
        union.extend(source.design(t, unit, dim)?);
    }
    let base_certificate = certify_points(t1, dim, &base, DEFAULT_DESIGN_TOL)?;
    let union_certificate = certify_points(t, dim, &union, DEFAULT_DESIGN_TOL)?;
    Ok(Proposition1Build {
        plan,
        unit_size: unit,
        base,
        union,
        base_certificate,
        union_certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn s2() -> SphereDim {
        SphereDim::TWO
    }

    #[test]
    fn dgs_values() {
        assert_eq!(dgs_lower_bound(1, s2()).unwrap(), 2);
        assert_eq!(dgs_lower_bound(2, s2()).unwrap(), 4);
        assert_eq!(dgs_lower_bound(3, s2()).unwrap(), 6);
        assert_eq!(dgs_lower_bound(5, s2()).unwrap(), 12);
        assert!(dgs_lower_bound(0, s2()).is_err());
    }

    #[test]
    fn lemma2_example() {
        let b = lemma_bounds(3, 2, 4, s2()).unwrap();
        assert!((b.lemma2_general - 4.0 * (4.0 * PI * 15.0).sqrt()).abs() < 1e-12);
        assert!(b.lemma2_nested < b.lemma2_general);
        assert!(b.lemma3_nested < b.lemma3_general);
        assert!(lemma_bounds(3, 3, 4, s2()).is_err());
    }

    #[test]
    fn constants() {
        let c = PaperConstants::defaults(s2()).unwrap();
        assert!(c.c1() > 756.0f64.powi(2));
        assert!((c.c2() - 1.0 / (36.0 * 2f64.sqrt())).abs() < 1e-15);
        assert!((c.c3() - 1.5f64.sqrt()).abs() < 1e-15);
        let big = PaperConstants::new(s2(), 7.0, 1.0, 0.01, Some(1e9)).unwrap();
        assert_eq!(big.c1(), 1e9);
        assert!(PaperConstants::new(s2(), -1.0, 1.0, 0.01, None).is_err());
        assert!(PaperConstants::new(s2(), 7.0, 1.0, 0.0, None).is_err());
    }

    #[test]
    fn theorem4_without_fixed_points() {
        let c = PaperConstants::defaults(s2()).unwrap();
        let (g, n) = theorem4_points(4, Some(2), 0, s2(), &c).unwrap();
        assert_eq!(g, c.c1() * 16.0);
        assert_eq!(n, Some(g));
    }

    #[test]
    fn plan_arithmetic() {
        let p = proposition1_plan(1, 2, s2()).unwrap();
        assert_eq!((p.p, p.q, p.copies), (2, 1, 3));
        let p = proposition1_plan(2, 3, s2()).unwrap();
        assert_eq!((p.p, p.q, p.copies, p.base_units), (3, 2, 5, 4));
        let p = proposition1_plan(2, 4, s2()).unwrap();
        assert_eq!((p.p, p.q, p.copies), (2, 1, 3));
    }

    #[test]
    fn classical_build() {
        let mut src = ClassicalDesigns::new(1);
        let b = proposition1_build(2, 3, s2(), None, &mut src).unwrap();
        assert_eq!(b.unit_size, 6);
        assert_eq!(b.union.len(), 54);
        assert_eq!(&b.union[..24], &b.base[..]);
        assert_eq!(b.base_certificate.is_design, Some(true));
        assert_eq!(b.union_certificate.is_design, Some(true));
    }
}
