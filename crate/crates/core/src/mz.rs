//! Sphere quadrature and the Marcinkiewicz-Zygmund sampling checks.
//!
//! Discrete averages of `|P|` and `|∇P|` over one point per cell of an
//! area-regular partition are compared with the continuous integrals, which
//! are computed by quadrature since neither integrand is a polynomial.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{PolynomialHandle, DEFAULT_R_D};
use crate::harmonics::{dim_harmonic, surface_area, KernelSpec};
use crate::partition::{Cell, Partition};
use crate::point::{cube_to_sphere, halton, norm, Point, SphereDim};
use crate::residual::pairwise_sum;

/// Integrals below this are treated as zero.
pub const DEGENERATE_INTEGRAL: f64 = 1e-14;
/// Randomized QMC: independent shifts per estimate.
const QMC_REPLICATES: usize = 16;
const QMC_SAMPLES_PER_ORDER: usize = 512;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))` for the classical Legendre polynomial.
fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * z * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Positive-weight rule on `S^2`, normalized to total weight one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub dim: SphereDim,
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
    pub exact_degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_i f(x_i)`.
    pub fn integrate<F: Fn(&Point) -> f64 + Sync>(&self, f: F) -> f64 {
        let terms: Vec<f64> = self
            .nodes
            .par_iter()
            .zip(self.weights.par_iter())
            .map(|(x, w)| w * f(x))
            .collect();
        pairwise_sum(&terms)
    }
}

/// Gauss-Legendre in `cos θ` times the uniform rule in `φ`; exact for every
/// polynomial of degree `≤ exact_degree` on `S^2`.
pub fn product_quadrature(exact_degree: usize) -> Result<QuadratureRule> {
    if exact_degree == 0 {
        return Err(Error::InvalidArgument(
            "exact_degree must be at least 1".into(),
        ));
    }
    let n_theta = exact_degree / 2 + 1;
    let n_phi = exact_degree + 1;
    let (z, wz) = gauss_legendre(n_theta);
    let mut nodes = Vec::with_capacity(n_theta * n_phi);
    let mut weights = Vec::with_capacity(n_theta * n_phi);
    for (zi, wi) in z.iter().zip(&wz) {
        let r = (1.0 - zi * zi).max(0.0).sqrt();
        for j in 0..n_phi {
            let (s, c) = (2.0 * PI * j as f64 / n_phi as f64).sin_cos();
            nodes.push(Point::from_unit(vec![r * c, r * s, *zi]));
            weights.push(wi / (2.0 * n_phi as f64));
        }
    }
    Ok(QuadratureRule {
        dim: SphereDim::TWO,
        nodes,
        weights,
        exact_degree,
    })
}

/// Equispaced rule on `S^1`, exact for trigonometric degree `≤ exact_degree`.
fn circle_quadrature(exact_degree: usize) -> QuadratureRule {
    let n = exact_degree + 1;
    let nodes = (0..n)
        .map(|j| {
            let (s, c) = (2.0 * PI * j as f64 / n as f64).sin_cos();
            Point::from_unit(vec![c, s])
        })
        .collect();
    QuadratureRule {
        dim: SphereDim::new(1).expect("d = 1"),
        nodes,
        weights: vec![1.0 / n as f64; n],
        exact_degree,
    }
}

/// An integral estimate against `μ_d` with its error indicator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    /// For tensor rules, `|I_order - I_2·order|`; for QMC, the standard error.
    pub error: f64,
    /// Integrand evaluations behind `value`.
    pub samples: usize,
}

/// `∫_{S^d} f dμ_d`.
///
/// `d ≤ 2` uses a tensor rule exact to `order`, with the error taken from a
/// second rule of order `2·order`. `d ≥ 3` uses Halton points mapped to the
/// sphere with independent random shifts, and reports the standard error
/// across shifts.
pub fn integrate_sphere<F>(dim: SphereDim, order: usize, f: F) -> Result<Estimate>
where
    F: Fn(&Point) -> f64 + Sync,
{
    let order = order.max(1);
    match dim.get() {
        1 | 2 => {
            let rule = |k: usize| -> Result<QuadratureRule> {
                if dim.get() == 1 {
                    Ok(circle_quadrature(k))
                } else {
                    product_quadrature(k)
                }
            };
            let coarse = rule(order)?;
            let fine = rule(2 * order)?;
            let value = coarse.integrate(&f);
            let check = fine.integrate(&f);
            Ok(Estimate {
                value,
                error: (value - check).abs(),
                samples: coarse.len(),
            })
        }
        _ => Ok(qmc_integrate(dim, order * QMC_SAMPLES_PER_ORDER, f)),
    }
}

fn qmc_integrate<F: Fn(&Point) -> f64 + Sync>(dim: SphereDim, n: usize, f: F) -> Estimate {
    let amb = dim.ambient();
    let cube_dims = amb + amb % 2;
    let base: Vec<Vec<f64>> = (1..=n as u64).map(|k| halton(k, cube_dims)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let shifts: Vec<Vec<f64>> = (0..QMC_REPLICATES)
        .map(|_| (0..cube_dims).map(|_| rng.random::<f64>()).collect())
        .collect();
    let means: Vec<f64> = shifts
        .par_iter()
        .map(|shift| {
            let vals: Vec<f64> = base
                .iter()
                .map(|u| {
                    let v: Vec<f64> = u.iter().zip(shift).map(|(a, b)| (a + b).fract()).collect();
                    cube_to_sphere(&v, amb).map_or(0.0, |x| f(&x))
                })
                .collect();
            pairwise_sum(&vals) / n as f64
        })
        .collect();
    let r = means.len() as f64;
    let mean = pairwise_sum(&means) / r;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (r - 1.0);
    Estimate {
        value: mean,
        error: (var / r).sqrt(),
        samples: n * QMC_REPLICATES,
    }
}

/// Gauss-Legendre points per direction inside one adaptive cell.
const CELL_POINTS: usize = 6;
/// Refinement stops at this many cells even if the tolerance is not met.
const MAX_CELLS: usize = 400_000;

/// Default relative tolerance for [`integrate_nonsmooth`].
pub const NONSMOOTH_REL_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy)]
struct Patch {
    theta: (f64, f64),
    phi: (f64, f64),
    parts: [f64; 4],
    value: f64,
    error: f64,
}

struct PatchRule {
    x: Vec<f64>,
    w: Vec<f64>,
    two_d: bool,
}

impl PatchRule {
    fn new(two_d: bool) -> Self {
        let (x, w) = gauss_legendre(CELL_POINTS);
        PatchRule { x, w, two_d }
    }

    /// Tensor Gauss rule on one patch, with the area element `sin θ dθ dφ / 4π`
    /// on `S^2` or `dφ / 2π` on `S^1`.
    fn apply<F: Fn(&Point) -> f64>(&self, f: &F, theta: (f64, f64), phi: (f64, f64)) -> f64 {
        let (pm, ph) = (0.5 * (phi.0 + phi.1), 0.5 * (phi.1 - phi.0));
        if !self.two_d {
            let s: f64 = self
                .x
                .iter()
                .zip(&self.w)
                .map(|(u, w)| {
                    let (s, c) = (pm + ph * u).sin_cos();
                    w * f(&Point::from_unit(vec![c, s]))
                })
                .sum();
            return s * ph / (2.0 * PI);
        }
        let (tm, th) = (0.5 * (theta.0 + theta.1), 0.5 * (theta.1 - theta.0));
        let mut acc = 0.0;
        for (u, wu) in self.x.iter().zip(&self.w) {
            let (st, ct) = (tm + th * u).sin_cos();
            let mut row = 0.0;
            for (v, wv) in self.x.iter().zip(&self.w) {
                let (sp, cp) = (pm + ph * v).sin_cos();
                row += wv * f(&Point::from_unit(vec![st * cp, st * sp, ct]));
            }
            acc += wu * st * row;
        }
        acc * th * ph / (4.0 * PI)
    }

    fn split(&self, theta: (f64, f64), phi: (f64, f64)) -> Vec<((f64, f64), (f64, f64))> {
        let pm = 0.5 * (phi.0 + phi.1);
        if !self.two_d {
            return vec![(theta, (phi.0, pm)), (theta, (pm, phi.1))];
        }
        let tm = 0.5 * (theta.0 + theta.1);
        vec![
            ((theta.0, tm), (phi.0, pm)),
            ((theta.0, tm), (pm, phi.1)),
            ((tm, theta.1), (phi.0, pm)),
            ((tm, theta.1), (pm, phi.1)),
        ]
    }

    /// Value from the split patch, error from comparing with the whole
    /// patch, whose rule value is `whole` when already known.
    fn patch<F: Fn(&Point) -> f64>(
        &self,
        f: &F,
        theta: (f64, f64),
        phi: (f64, f64),
        whole: Option<f64>,
    ) -> Patch {
        let whole = whole.unwrap_or_else(|| self.apply(f, theta, phi));
        let mut parts = [0.0; 4];
        for (slot, (t, p)) in parts.iter_mut().zip(self.split(theta, phi)) {
            *slot = self.apply(f, t, p);
        }
        let value = parts.iter().sum::<f64>();
        Patch {
            theta,
            phi,
            parts,
            value,
            error: (whole - value).abs(),
        }
    }

    fn refine<F: Fn(&Point) -> f64>(&self, f: &F, c: &Patch) -> Vec<Patch> {
        self.split(c.theta, c.phi)
            .into_iter()
            .zip(c.parts)
            .map(|((t, p), whole)| self.patch(f, t, p, Some(whole)))
            .collect()
    }
}

/// `∫_{S^d} f dμ_d` for integrands that are only piecewise smooth, such as
/// `|P|` and `|∇P|`.
///
/// For `d ≤ 2` the `(θ, φ)` domain is covered by patches carrying a tensor
/// Gauss rule, and patches are bisected until the summed error indicator is
/// below `rel_tol · |I|`. The initial grid resolves degree `order`. For
/// `d ≥ 3` this falls back to [`integrate_sphere`].
pub fn integrate_nonsmooth<F>(dim: SphereDim, order: usize, rel_tol: f64, f: F) -> Result<Estimate>
where
    F: Fn(&Point) -> f64 + Sync,
{
    if dim.get() > 2 {
        return integrate_sphere(dim, order, f);
    }
    let two_d = dim.get() == 2;
    let rule = PatchRule::new(two_d);
    let per_patch = if two_d { 4 } else { 2 } * CELL_POINTS.pow(if two_d { 2 } else { 1 });
    let n_phi = ((order.max(1) + 1) as f64 / CELL_POINTS as f64)
        .ceil()
        .max(2.0) as usize;
    let n_theta = if two_d { n_phi.div_ceil(2).max(2) } else { 1 };
    let mut seeds = Vec::with_capacity(n_theta * n_phi);
    for i in 0..n_theta {
        let theta = if two_d {
            (
                PI * i as f64 / n_theta as f64,
                PI * (i + 1) as f64 / n_theta as f64,
            )
        } else {
            (0.0, 0.0)
        };
        for j in 0..n_phi {
            let phi = (
                2.0 * PI * j as f64 / n_phi as f64,
                2.0 * PI * (j + 1) as f64 / n_phi as f64,
            );
            seeds.push((theta, phi));
        }
    }
    let mut patches: Vec<Patch> = seeds
        .par_iter()
        .map(|&(t, p)| rule.patch(&f, t, p, None))
        .collect();
    let mut evals = patches.len() * (per_patch + per_patch / if two_d { 4 } else { 2 });
    loop {
        let values: Vec<f64> = patches.iter().map(|c| c.value).collect();
        let errors: Vec<f64> = patches.iter().map(|c| c.error).collect();
        let (total, err) = (pairwise_sum(&values), pairwise_sum(&errors));
        let tol = rel_tol * total.abs() + 1e-300;
        if err <= tol || patches.len() >= MAX_CELLS {
            return Ok(Estimate {
                value: total,
                error: err,
                samples: evals,
            });
        }
        let cut = tol / (4.0 * patches.len() as f64);
        let (refine, keep): (Vec<Patch>, Vec<Patch>) =
            patches.into_iter().partition(|c| c.error > cut);
        let kids: Vec<Patch> = refine
            .par_iter()
            .flat_map_iter(|c| rule.refine(&f, c))
            .collect();
        evals += kids.len() * per_patch;
        patches = keep;
        patches.extend(kids);
    }
}

/// Outcome of a Marcinkiewicz-Zygmund comparison. Each ratio is the discrete
/// average over the continuous integral; the value ratios must lie in
/// `[1/2, 3/2]` and the gradient ratios in `[1/(3√d), 3√d]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MZReport {
    pub m: usize,
    pub n: usize,
    pub partition_norm: f64,
    pub r_d: f64,
    pub lower_ratio: Option<f64>,
    pub upper_ratio: Option<f64>,
    pub gradient_lower_ratio: Option<f64>,
    pub gradient_upper_ratio: Option<f64>,
    /// `‖R‖ < r_d / m`.
    pub value_hypothesis: bool,
    /// `‖R‖ < r_d / (m + 1)`.
    pub gradient_hypothesis: bool,
    pub value_pass: Option<bool>,
    pub gradient_pass: Option<bool>,
    /// Every check that ran passed.
    pub pass: bool,
}

impl MZReport {
    fn empty(m: usize, r: &Partition, r_d: f64) -> Self {
        let norm = r.norm();
        MZReport {
            m,
            n: r.len(),
            partition_norm: norm,
            r_d,
            lower_ratio: None,
            upper_ratio: None,
            gradient_lower_ratio: None,
            gradient_upper_ratio: None,
            value_hypothesis: norm < r_d / m.max(1) as f64,
            gradient_hypothesis: norm < r_d / (m + 1) as f64,
            value_pass: None,
            gradient_pass: None,
            pass: true,
        }
    }

    /// Fills in the gradient fields of `other`.
    pub fn merge(mut self, other: &MZReport) -> Self {
        if other.gradient_pass.is_some() {
            self.gradient_lower_ratio = other.gradient_lower_ratio;
            self.gradient_upper_ratio = other.gradient_upper_ratio;
            self.gradient_pass = other.gradient_pass;
        }
        if other.value_pass.is_some() {
            self.lower_ratio = other.lower_ratio;
            self.upper_ratio = other.upper_ratio;
            self.value_pass = other.value_pass;
        }
        self.pass = self.value_pass.unwrap_or(true) && self.gradient_pass.unwrap_or(true);
        self
    }

    /// CSV header matching [`MZReport::csv_row`].
    pub const CSV_HEADER: &'static str = "m,n,partition_norm,r_d,lower_ratio,upper_ratio,\
gradient_lower_ratio,gradient_upper_ratio,value_hypothesis,gradient_hypothesis,pass";

    pub fn csv_row(&self) -> String {
        let f = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.12e}"));
        format!(
            "{},{},{:.12e},{},{},{},{},{},{},{},{}",
            self.m,
            self.n,
            self.partition_norm,
            self.r_d,
            f(self.lower_ratio),
            f(self.upper_ratio),
            f(self.gradient_lower_ratio),
            f(self.gradient_upper_ratio),
            self.value_hypothesis,
            self.gradient_hypothesis,
            self.pass
        )
    }
}

/// Options shared by the MZ checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MZOptions {
    pub r_d: f64,
    /// Quadrature order; at least `2m + 16` is used regardless.
    pub quad_order: usize,
    /// Relative tolerance for the continuous integrals.
    pub rel_tol: f64,
}

impl Default for MZOptions {
    fn default() -> Self {
        MZOptions {
            r_d: DEFAULT_R_D,
            quad_order: 0,
            rel_tol: 1e-6,
        }
    }
}

fn cell_holds(cell: &Cell, x: &Point) -> bool {
    const TOL: f64 = 1e-9;
    let (theta, phi) = x.to_spherical();
    let widened = Cell {
        kind: cell.kind,
        theta: (cell.theta.0 - TOL, cell.theta.1 + TOL),
        phi: (cell.phi.0 - TOL, cell.phi.1 + TOL),
    };
    widened.contains(theta, phi) || widened.contains(theta, phi + 2.0 * PI)
}

fn check_samples(p: &PolynomialHandle, r: &Partition, pts: &[Point]) -> Result<()> {
    if p.dim() != SphereDim::TWO {
        return Err(Error::UnsupportedDimension {
            d: p.dim().get(),
            what: "MZ checks",
        });
    }
    if pts.len() != r.len() {
        return Err(Error::InvalidArgument(format!(
            "need one point per cell ({} cells, {} points)",
            r.len(),
            pts.len()
        )));
    }
    for (i, (x, c)) in pts.iter().zip(r.cells()).enumerate() {
        x.check_dim(SphereDim::TWO)?;
        if !cell_holds(c, x) {
            return Err(Error::InvalidArgument(format!(
                "point {i} is outside cell {i}"
            )));
        }
    }
    Ok(())
}

fn ratio_of<F, G>(p: &PolynomialHandle, pts: &[Point], opts: &MZOptions, f: F, g: G) -> Result<f64>
where
    F: Fn(&Point) -> f64 + Sync,
    G: Fn(&Point) -> f64 + Sync + Send,
{
    let order = opts.quad_order.max(2 * p.degree() + 16);
    let cont = integrate_nonsmooth(p.dim(), order, opts.rel_tol, f)?.value;
    if !(cont > DEGENERATE_INTEGRAL) {
        return Err(Error::DegeneratePolynomial(format!(
            "integral {cont:e} is too small for a ratio"
        )));
    }
    let vals: Vec<f64> = pts.par_iter().map(g).collect();
    Ok(pairwise_sum(&vals) / pts.len() as f64 / cont)
}

/// Value inequality: `N⁻¹ Σ|P(x_i)|` against `∫|P| dμ`.
pub fn mz_value_check(
    p: &PolynomialHandle,
    r: &Partition,
    pts: &[Point],
    opts: &MZOptions,
) -> Result<MZReport> {
    check_samples(p, r, pts)?;
    let ratio = ratio_of(p, pts, opts, |x| p.eval(x).abs(), |x| p.eval(x).abs())?;
    let ok = (0.5..=1.5).contains(&ratio);
    let mut rep = MZReport::empty(p.degree(), r, opts.r_d);
    rep.lower_ratio = Some(ratio);
    rep.upper_ratio = Some(ratio);
    rep.value_pass = Some(ok);
    rep.pass = ok;
    Ok(rep)
}

/// Gradient inequality: `N⁻¹ Σ|∇P(x_i)|` against `∫|∇P| dμ`.
pub fn mz_gradient_check(
    p: &PolynomialHandle,
    r: &Partition,
    pts: &[Point],
    opts: &MZOptions,
) -> Result<MZReport> {
    check_samples(p, r, pts)?;
    let g = |x: &Point| norm(&p.grad(x));
    let ratio = ratio_of(p, pts, opts, g, g)?;
    let s = 3.0 * (p.dim().get() as f64).sqrt();
    let ok = ratio >= 1.0 / s && ratio <= s;
    let mut rep = MZReport::empty(p.degree(), r, opts.r_d);
    rep.gradient_lower_ratio = Some(ratio);
    rep.gradient_upper_ratio = Some(ratio);
    rep.gradient_pass = Some(ok);
    rep.pass = ok;
    Ok(rep)
}

/// Both checks in one report.
pub fn mz_check(
    p: &PolynomialHandle,
    r: &Partition,
    pts: &[Point],
    opts: &MZOptions,
) -> Result<MZReport> {
    let v = mz_value_check(p, r, pts, opts)?;
    let g = mz_gradient_check(p, r, pts, opts)?;
    Ok(v.merge(&g))
}

/// Comparison of `‖P‖₂` (unnormalized measure) with
/// `sqrt((d+1)/d · ω_d · D(t+1, d+1))` for `P` on the unit-gradient boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Check {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
}

/// `sqrt((d+1)/d · ω_d · D(t+1, d+1))`.
pub fn lemma1_rhs(t: usize, dim: SphereDim) -> Result<f64> {
    let d = dim.get() as f64;
    let big = dim_harmonic(t as u64 + 1, SphereDim::new(dim.get() + 1)?)? as f64;
    Ok(((d + 1.0) / d * surface_area(dim) * big).sqrt())
}

pub fn lemma1_check(p: &PolynomialHandle) -> Result<Lemma1Check> {
    if !p.is_boundary_normalized() {
        return Err(Error::InvalidArgument(
            "lemma 1 applies to boundary-normalized polynomials".into(),
        ));
    }
    let order = 2 * p.degree() + 16;
    let mean_sq = integrate_sphere(p.dim(), order, |x| p.eval(x).powi(2))?.value;
    let lhs = (surface_area(p.dim()) * mean_sq).sqrt();
    let rhs = lemma1_rhs(p.degree(), p.dim())?;
    Ok(Lemma1Check {
        lhs,
        rhs,
        slack: lhs / rhs,
        holds: lhs <= rhs,
    })
}

/// Summary of a randomized MZ sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MZSweep {
    pub cases: Vec<MZReport>,
    pub min_value_ratio: f64,
    pub max_value_ratio: f64,
    pub min_gradient_ratio: f64,
    pub max_gradient_ratio: f64,
    pub all_pass: bool,
    /// Every failing case had a false hypothesis flag.
    pub failures_explained: bool,
}

/// `cases` random polynomials of degree `1..=max_m` (Gaussian coefficients)
/// with one uniformly random point per cell of `r`. Case `i` draws from its
/// own generator seeded by `(seed, i)`, so the sweep is reproducible and
/// runs in parallel.
pub fn mz_sweep(
    r: &Partition,
    max_m: usize,
    cases: usize,
    seed: u64,
    opts: &MZOptions,
) -> Result<MZSweep> {
    if max_m == 0 {
        return Err(Error::InvalidArgument(
            "max degree must be at least 1".into(),
        ));
    }
    let reports: Vec<MZReport> = (0..cases)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64 + 1);
            let m = rng.random_range(1..=max_m);
            let p = PolynomialHandle::random(KernelSpec::new(m, SphereDim::TWO)?, &mut rng);
            let pts = r.sample_points(&mut rng);
            mz_check(&p, r, &pts, opts)
        })
        .collect::<Result<_>>()?;
    let fold = |f: &dyn Fn(&MZReport) -> Option<f64>, min: bool| {
        reports.iter().filter_map(f).fold(
            if min {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            },
            |a, b| if min { a.min(b) } else { a.max(b) },
        )
    };
    let failures_explained = reports.iter().all(|c| {
        (c.value_pass != Some(false) || !c.value_hypothesis)
            && (c.gradient_pass != Some(false) || !c.gradient_hypothesis)
    });
    Ok(MZSweep {
        min_value_ratio: fold(&|c| c.lower_ratio, true),
        max_value_ratio: fold(&|c| c.upper_ratio, false),
        min_gradient_ratio: fold(&|c| c.gradient_lower_ratio, true),
        max_gradient_ratio: fold(&|c| c.gradient_upper_ratio, false),
        all_pass: reports.iter().all(|c| c.pass),
        failures_explained,
        cases: reports,
    })
}
