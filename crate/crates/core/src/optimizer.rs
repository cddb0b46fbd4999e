//! Extension of a fixed point set to a spherical design by projected
//! gradient descent on the product of spheres.
//!
//! The objective is the normalized residual `A` of `fixed ∪ free`. Each
//! iteration moves every free point against its tangential gradient and
//! renormalizes. Trial steps come from the Barzilai-Borwein formula and are
//! accepted by an Armijo test that tolerates the rounding floor of `A`; once
//! `A` sits at that floor the gradient, which is still resolved, keeps
//! driving the points until the monomial oracle is satisfied.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{dgs_lower_bound, theorem4_points, PaperConstants};
use crate::error::{Error, Result};
use crate::harmonics::{dim_space, KernelSpec};
use crate::partition::equal_area_partition;
use crate::point::{norm, random_tangent, spiral_points, Point, SphereDim};
use crate::residual::{
    certify_design, monomial_deviation, normalized_gradient, normalized_objective, Configuration,
    DesignCertificate, DEFAULT_DESIGN_TOL,
};

const ARMIJO_C: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;
/// Largest geodesic move of any single point in one step.
const MAX_MOVE: f64 = 0.5;
const STALL_WINDOW: usize = 200;

/// How free points are seeded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitStrategy {
    /// Centers of an `N`-cell area-regular partition (`d = 2` only).
    EqualAreaCenters,
    Spiral,
    Random(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineSearch {
    Backtracking,
    /// Constant step, always accepted.
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendOptions {
    pub init_strategy: InitStrategy,
    /// Iteration cap per restart.
    pub max_iters: usize,
    /// Stop when the gradient norm of `A` falls below this.
    pub step_tol: f64,
    /// Target for `A` and for the monomial oracle.
    pub residual_tol: f64,
    pub restarts: usize,
    pub line_search: LineSearch,
    /// Seeds the restart perturbations.
    pub seed: u64,
    pub record_trace: bool,
}

impl Default for ExtendOptions {
    fn default() -> Self {
        ExtendOptions {
            init_strategy: InitStrategy::EqualAreaCenters,
            max_iters: 20_000,
            step_tol: 1e-13,
            residual_tol: DEFAULT_DESIGN_TOL,
            restarts: 8,
            line_search: LineSearch::Backtracking,
            seed: 42,
            record_trace: false,
        }
    }
}

impl ExtendOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || self.restarts == 0 {
            return Err(Error::InvalidArgument(
                "max_iters and restarts must be at least 1".into(),
            ));
        }
        if !(self.step_tol > 0.0 && self.residual_tol > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if let LineSearch::Fixed(a) = self.line_search {
            if !(a > 0.0) {
                return Err(Error::InvalidArgument("fixed step must be positive".into()));
            }
        }
        Ok(())
    }
}

/// One accepted iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub restart: usize,
    pub iteration: usize,
    /// `A` after the step.
    pub residual: f64,
    pub grad_norm: f64,
    pub step: f64,
}

/// Renders a trace as CSV.
pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut out = String::from("restart,iteration,residual,grad_norm,step\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:.17e},{:.17e},{:.17e}",
            r.restart, r.iteration, r.residual, r.grad_norm, r.step
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendResult {
    /// The input fixed points, untouched.
    pub fixed_points: Vec<Point>,
    pub free_points: Vec<Point>,
    pub certificate: DesignCertificate,
    pub iterations_used: usize,
    pub restarts_used: usize,
    pub converged: bool,
    pub warnings: Vec<String>,
    pub trace: Option<Vec<TraceRow>>,
}

impl ExtendResult {
    /// Fixed points followed by free points.
    pub fn union(&self) -> Vec<Point> {
        self.fixed_points
            .iter()
            .chain(&self.free_points)
            .cloned()
            .collect()
    }
}

/// Seeds `n` free points on `S^d`.
pub fn initialize_points(
    strategy: InitStrategy,
    n: usize,
    dim: SphereDim,
    fixed: &[Point],
) -> Result<Vec<Point>> {
    for p in fixed {
        p.check_dim(dim)?;
    }
    if n == 0 {
        return Err(Error::InvalidArgument(
            "need at least one free point".into(),
        ));
    }
    match strategy {
        InitStrategy::EqualAreaCenters => {
            if dim != SphereDim::TWO {
                return Err(Error::UnsupportedDimension {
                    d: dim.get(),
                    what: "equal-area initialization",
                });
            }
            Ok(equal_area_partition(n)?.centers())
        }
        InitStrategy::Spiral => Ok(spiral_points(n, dim)),
        InitStrategy::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok((0..n).map(|_| Point::random(dim, &mut rng)).collect())
        }
    }
}

/// Smallest `N` not flagged by the feasibility heuristics: enough free
/// parameters for the `D_t` moment conditions, and enough points in total
/// for the Delsarte-Goethals-Seidel bound.
pub fn heuristic_floor(t: usize, dim: SphereDim, m: usize) -> Result<usize> {
    let dt = dim_space(t as u64, dim)? as usize;
    let params = dt.div_ceil(dim.get());
    let dgs = dgs_lower_bound(t, dim)? as usize;
    Ok(params.max(dgs.saturating_sub(m)).max(1))
}

fn size_warnings(t: usize, dim: SphereDim, m: usize, n: usize) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let floor = heuristic_floor(t, dim, m)?;
    if n < floor {
        out.push(format!(
            "N = {n} is below the heuristic floor {floor} for t = {t}, d = {}, M = {m}",
            dim.get()
        ));
    }
    if let Ok(consts) = PaperConstants::defaults(dim) {
        let (general, _) = theorem4_points(t, None, m, dim, &consts)?;
        if (n as f64) < general {
            out.push(format!(
                "N = {n} is below the sufficient count {general:.3e} from the existence bound"
            ));
        }
    }
    Ok(out)
}

enum Stop {
    Converged,
    Stationary,
    Stalled,
    Budget,
}

struct Run {
    free: Vec<Point>,
    value: f64,
    iterations: usize,
    stop: Stop,
}

struct Descent<'a> {
    kernel: &'a KernelSpec,
    fixed: &'a [Point],
    opts: &'a ExtendOptions,
    /// Rounding floor of `A`.
    noise: f64,
}

impl Descent<'_> {
    fn assemble(&self, free: &[Point]) -> Vec<Point> {
        self.fixed.iter().chain(free).cloned().collect()
    }

    fn moved(&self, free: &[Point], grad: &[Vec<f64>], alpha: f64) -> Vec<Point> {
        free.iter()
            .zip(grad)
            .map(|(p, g)| {
                let v: Vec<f64> = p
                    .coords()
                    .iter()
                    .zip(g)
                    .map(|(x, d)| x - alpha * d)
                    .collect();
                Point::new(v).expect("step left the origin")
            })
            .collect()
    }

    fn certified(&self, value: f64, pts: &[Point]) -> bool {
        value <= self.opts.residual_tol
            && monomial_deviation(self.kernel.degree(), self.kernel.dim(), pts)
                .is_ok_and(|d| d <= self.opts.residual_tol)
    }

    fn run(&self, mut free: Vec<Point>, restart: usize, trace: &mut Option<Vec<TraceRow>>) -> Run {
        let m = self.fixed.len();
        let mut pts = self.assemble(&free);
        let mut value = normalized_objective(self.kernel, &pts);
        let mut grad = normalized_gradient(self.kernel, &pts, m);
        let mut history = vec![value];
        let mut alpha: Option<f64> = None;
        for it in 0..self.opts.max_iters {
            let gnorm = grad
                .iter()
                .map(|g| g.iter().map(|v| v * v).sum::<f64>())
                .sum::<f64>()
                .sqrt();
            if self.certified(value, &pts) {
                return Run {
                    free,
                    value,
                    iterations: it,
                    stop: Stop::Converged,
                };
            }
            if gnorm <= self.opts.step_tol {
                return Run {
                    free,
                    value,
                    iterations: it,
                    stop: Stop::Stationary,
                };
            }
            if it >= STALL_WINDOW
                && value > self.opts.residual_tol
                && history[it - STALL_WINDOW] - value <= 1e-9 * value + self.noise
            {
                return Run {
                    free,
                    value,
                    iterations: it,
                    stop: Stop::Stalled,
                };
            }
            let gmax = grad.iter().map(|g| norm(g)).fold(0.0, f64::max);
            let cap = MAX_MOVE / gmax;
            let (next, next_value, step) = match self.opts.line_search {
                LineSearch::Fixed(a) => {
                    let next = self.moved(&free, &grad, a);
                    let v = normalized_objective(self.kernel, &self.assemble(&next));
                    (next, v, a)
                }
                LineSearch::Backtracking => {
                    let mut a = alpha.unwrap_or(0.1 / gmax).min(cap);
                    let mut accepted = None;
                    for _ in 0..MAX_BACKTRACKS {
                        let next = self.moved(&free, &grad, a);
                        let v = normalized_objective(self.kernel, &self.assemble(&next));
                        if v <= value - ARMIJO_C * a * gnorm * gnorm + self.noise {
                            accepted = Some((next, v, a));
                            break;
                        }
                        a *= 0.5;
                    }
                    match accepted {
                        Some(x) => x,
                        None => {
                            return Run {
                                free,
                                value,
                                iterations: it,
                                stop: Stop::Stationary,
                            }
                        }
                    }
                }
            };
            let next_pts = self.assemble(&next);
            let next_grad = normalized_gradient(self.kernel, &next_pts, m);
            // Barzilai-Borwein step from the ambient differences.
            let (mut ss, mut sy) = (0.0, 0.0);
            for k in 0..free.len() {
                for c in 0..free[k].coords().len() {
                    let s = next[k].coords()[c] - free[k].coords()[c];
                    ss += s * s;
                    sy += s * (next_grad[k][c] - grad[k][c]);
                }
            }
            alpha = Some(if sy > 0.0 { ss / sy } else { 2.0 * step });
            free = next;
            pts = next_pts;
            grad = next_grad;
            value = next_value;
            history.push(value);
            if let Some(rows) = trace.as_mut() {
                let gn = grad
                    .iter()
                    .map(|g| g.iter().map(|v| v * v).sum::<f64>())
                    .sum::<f64>()
                    .sqrt();
                rows.push(TraceRow {
                    restart,
                    iteration: it + 1,
                    residual: value,
                    grad_norm: gn,
                    step,
                });
            }
        }
        let it = self.opts.max_iters;
        if self.certified(value, &pts) {
            return Run {
                free,
                value,
                iterations: it,
                stop: Stop::Converged,
            };
        }
        Run {
            free,
            value,
            iterations: it,
            stop: Stop::Budget,
        }
    }
}

/// Rounding floor of `A` for `n` points: a few ulps of the diagonal value
/// per level of the summation tree.
fn noise_floor(kernel: &KernelSpec, n: usize) -> f64 {
    let levels = (2.0 * (n.max(2) as f64).log2()).ceil();
    8.0 * f64::EPSILON * kernel.dim_space() * (1.0 + levels)
}

/// Extends `fixed` by `n` free points toward a `t`-design.
pub fn extend_design(
    t: usize,
    dim: SphereDim,
    fixed: &[Point],
    n: usize,
    opts: &ExtendOptions,
) -> Result<ExtendResult> {
    let init = initialize_points(opts.init_strategy, n, dim, fixed)?;
    extend_design_from(t, dim, fixed, init, opts)
}

/// As [`extend_design`], starting from the given free points.
pub fn extend_design_from(
    t: usize,
    dim: SphereDim,
    fixed: &[Point],
    init: Vec<Point>,
    opts: &ExtendOptions,
) -> Result<ExtendResult> {
    opts.validate()?;
    if init.is_empty() {
        return Err(Error::InvalidArgument(
            "need at least one free point".into(),
        ));
    }
    // Validates dimensions and unit norms of both sets.
    Configuration::new(dim, fixed.to_vec(), init.clone())?;
    let kernel = KernelSpec::new(t, dim)?;
    let warnings = size_warnings(t, dim, fixed.len(), init.len())?;
    let descent = Descent {
        kernel: &kernel,
        fixed,
        opts,
        noise: noise_floor(&kernel, fixed.len() + init.len()),
    };
    let mut trace = opts.record_trace.then(Vec::new);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<Run> = None;
    let mut iterations = 0;
    let mut restarts_used = 0;
    let mut start = init;
    for r in 0..opts.restarts {
        restarts_used = r + 1;
        let run = descent.run(start, r, &mut trace);
        iterations += run.iterations;
        let done = matches!(run.stop, Stop::Converged);
        let stationary = matches!(run.stop, Stop::Stationary);
        if best.as_ref().is_none_or(|b| run.value < b.value || done) {
            best = Some(run);
        }
        if done {
            break;
        }
        // A stationary stop is usually a symmetric saddle, which a small kick
        // escapes; a stall is a local minimum and needs a large one.
        let sigma = if stationary {
            0.25
        } else {
            1.5 * 0.75f64.powi(r as i32)
        };
        start = best
            .as_ref()
            .expect("at least one run")
            .free
            .iter()
            .map(|p| {
                let v = random_tangent(p, &mut rng);
                p.retract(&v.iter().map(|c| sigma * c).collect::<Vec<_>>())
                    .expect("perturbed point")
            })
            .collect();
    }
    let best = best.expect("at least one run");
    let cfg = Configuration::new(dim, fixed.to_vec(), best.free.clone())?;
    let certificate = certify_design(t, &cfg, opts.residual_tol)?;
    let converged = certificate.is_design == Some(true);
    Ok(ExtendResult {
        fixed_points: fixed.to_vec(),
        free_points: best.free,
        certificate,
        iterations_used: iterations,
        restarts_used,
        converged,
        warnings,
        trace,
    })
}

/// Chooses `N` automatically: starts at [`heuristic_floor`] and grows by a
/// quarter until a run converges or `min(cap, existence bound)` is passed.
pub fn auto_extend(
    t: usize,
    dim: SphereDim,
    fixed: &[Point],
    cap: usize,
    consts: &PaperConstants,
    opts: &ExtendOptions,
) -> Result<ExtendResult> {
    let bound = theorem4_points(t, None, fixed.len(), dim, consts)?.0;
    let limit = (cap as f64).min(bound.ceil()).max(1.0) as usize;
    let mut n = heuristic_floor(t, dim, fixed.len())?.min(limit);
    loop {
        let res = extend_design(t, dim, fixed, n, opts)?;
        if res.converged || n >= limit {
            return Ok(res);
        }
        n = (n + n.div_ceil(4)).min(limit);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs;
    use crate::partition::equal_area_partition;

    #[test]
    fn antipodal_pair_from_scratch() {
        let opts = ExtendOptions {
            init_strategy: InitStrategy::Random(3),
            ..ExtendOptions::default()
        };
        let res = extend_design(1, SphereDim::TWO, &[], 2, &opts).unwrap();
        assert!(res.converged);
        assert!(res.certificate.normalized_residual <= 1e-12);
        let s = res.free_points[0].dot(&res.free_points[1]);
        assert!((s + 1.0).abs() < 1e-10);
    }

    #[test]
    fn tetrahedron_extends_to_three_design() {
        let tet = designs::tetrahedron();
        let res = extend_design(3, SphereDim::TWO, &tet, 4, &ExtendOptions::default()).unwrap();
        assert!(res.converged, "{:?}", res.certificate);
        assert_eq!(&res.union()[..4], &tet[..]);
        assert!(!res.warnings.is_empty());
    }

    #[test]
    fn initializers() {
        let a = initialize_points(InitStrategy::Random(7), 9, SphereDim::TWO, &[]).unwrap();
        let b = initialize_points(InitStrategy::Random(7), 9, SphereDim::TWO, &[]).unwrap();
        assert_eq!(a, b);
        let s = initialize_points(InitStrategy::Spiral, 4, SphereDim::TWO, &[]).unwrap();
        for i in 0..4 {
            for j in 0..i {
                assert!(s[i].geodesic_distance(&s[j]) > 0.1);
            }
        }
        let c = initialize_points(InitStrategy::EqualAreaCenters, 10, SphereDim::TWO, &[]).unwrap();
        let r = equal_area_partition(10).unwrap();
        for (i, p) in c.iter().enumerate() {
            assert_eq!(r.locate(p), i);
        }
        let d3 = SphereDim::new(3).unwrap();
        assert!(initialize_points(InitStrategy::EqualAreaCenters, 10, d3, &[]).is_err());
    }

    #[test]
    fn trace_is_monotone_within_noise() {
        let opts = ExtendOptions {
            init_strategy: InitStrategy::Random(11),
            record_trace: true,
            ..ExtendOptions::default()
        };
        let res = extend_design(2, SphereDim::TWO, &[], 6, &opts).unwrap();
        let rows = res.trace.unwrap();
        assert!(!rows.is_empty());
        let kernel = KernelSpec::new(2, SphereDim::TWO).unwrap();
        let eta = noise_floor(&kernel, 6);
        for w in rows.windows(2) {
            if w[0].restart == w[1].restart {
                assert!(w[1].residual <= w[0].residual + eta);
            }
        }
        assert!(trace_csv(&rows).starts_with("restart,iteration"));
    }

    #[test]
    fn rejects_bad_options() {
        let opts = ExtendOptions {
            restarts: 0,
            ..ExtendOptions::default()
        };
        assert!(extend_design(2, SphereDim::TWO, &[], 4, &opts).is_err());
        assert!(extend_design(2, SphereDim::TWO, &[], 0, &ExtendOptions::default()).is_err());
    }
}
