//! Polynomials of `P_t` as kernel expansions, the unit-`L¹`-gradient boundary
//! `∂Ω = {P : ∫|∇P| dμ = 1}`, and the clamped gradient flow that maps a
//! polynomial to a point configuration.
//!
//! The flow moves each start point along
//!
//! ```text
//! dw/ds = ∇P(w) / h_ε(|∇P(w)|),    h_ε(u) = max(u, ε),  ε = 1/(6√d)
//! ```
//!
//! up to the terminal time `r_d / (3t)`. The field has norm at most one, so a
//! trajectory never travels farther than the elapsed time, and the average of
//! `P` over the moving points is non-decreasing.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonics::{surface_area, KernelSpec};
use crate::mz::{self, Estimate};
use crate::point::{norm, spiral_points, Point, SphereDim};
use crate::residual::pairwise_sum;

/// Default value of the Marcinkiewicz-Zygmund radius constant `r_d`.
pub const DEFAULT_R_D: f64 = 1.0;
/// Default number of integrator steps.
pub const DEFAULT_STEPS: usize = 200;
/// Slack allowed on the displacement bound.
pub const DISPLACEMENT_SLACK: f64 = 1e-8;

/// `P = Σ_j c_j k_t(z_j, ·)`, an element of `P_t(S^d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialHandle {
    kernel: KernelSpec,
    anchors: Vec<Point>,
    coeffs: Vec<f64>,
    boundary_normalized: bool,
}

impl PolynomialHandle {
    pub fn new(kernel: KernelSpec, anchors: Vec<Point>, coeffs: Vec<f64>) -> Result<Self> {
        if anchors.is_empty() || anchors.len() != coeffs.len() {
            return Err(Error::InvalidArgument(format!(
                "need matching, nonempty anchors and coefficients ({} vs {})",
                anchors.len(),
                coeffs.len()
            )));
        }
        for a in &anchors {
            a.check_dim(kernel.dim())?;
        }
        Ok(PolynomialHandle {
            kernel,
            anchors,
            coeffs,
            boundary_normalized: false,
        })
    }

    /// `k_t(z, ·)` with coefficient one.
    pub fn representer(kernel: KernelSpec, z: Point) -> Result<Self> {
        Self::new(kernel, vec![z], vec![1.0])
    }

    /// Standard normal coefficients on `D_t` spiral anchors.
    pub fn random<R: Rng + ?Sized>(kernel: KernelSpec, rng: &mut R) -> Self {
        let n = kernel.dim_space() as usize;
        let anchors = spiral_points(n, kernel.dim());
        let coeffs = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        PolynomialHandle {
            kernel,
            anchors,
            coeffs,
            boundary_normalized: false,
        }
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn degree(&self) -> usize {
        self.kernel.degree()
    }

    pub fn dim(&self) -> SphereDim {
        self.kernel.dim()
    }

    pub fn anchors(&self) -> &[Point] {
        &self.anchors
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_boundary_normalized(&self) -> bool {
        self.boundary_normalized
    }

    /// Copy with every coefficient multiplied by `factor`. Clears the
    /// boundary flag unless `factor == 1`.
    pub fn scaled(&self, factor: f64) -> Self {
        PolynomialHandle {
            kernel: self.kernel.clone(),
            anchors: self.anchors.clone(),
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
            boundary_normalized: self.boundary_normalized && factor == 1.0,
        }
    }

    /// Copy with the given coefficients and the boundary flag cleared.
    pub fn with_coeffs(&self, coeffs: Vec<f64>) -> Result<Self> {
        Self::new(self.kernel.clone(), self.anchors.clone(), coeffs)
    }

    /// `P(x)`.
    pub fn eval(&self, x: &Point) -> f64 {
        self.anchors
            .iter()
            .zip(&self.coeffs)
            .map(|(z, c)| c * self.kernel.profile(z.dot(x)).0)
            .sum()
    }

    /// Spherical gradient `∇P(x)`, tangent to `x`.
    pub fn grad(&self, x: &Point) -> Vec<f64> {
        self.value_and_grad(x).1
    }

    /// `(P(x), ∇P(x))` in one pass over the anchors.
    pub fn value_and_grad(&self, x: &Point) -> (f64, Vec<f64>) {
        let xc = x.coords();
        // Σ_j c_j K'(s_j) z_j, then project: the tangential part of the
        // ambient gradient.
        let mut amb = vec![0.0; xc.len()];
        let mut val = 0.0;
        for (z, c) in self.anchors.iter().zip(&self.coeffs) {
            let (k, dk) = self.kernel.profile(z.dot(x));
            val += c * k;
            let w = c * dk;
            amb.iter_mut()
                .zip(z.coords())
                .for_each(|(a, zi)| *a += w * zi);
        }
        (val, x.project_tangent(&amb))
    }

    pub fn eval_checked(&self, x: &Point) -> Result<f64> {
        x.check_dim(self.dim())?;
        Ok(self.eval(x))
    }

    pub fn grad_checked(&self, x: &Point) -> Result<Vec<f64>> {
        x.check_dim(self.dim())?;
        Ok(self.grad(x))
    }

    /// `‖P‖₂` for the unnormalized surface measure, from the Gram matrix
    /// `ω_d Σ_{ij} c_i c_j k_t(z_i, z_j)`.
    pub fn l2_norm_exact(&self) -> f64 {
        let mut acc = 0.0;
        for (zi, ci) in self.anchors.iter().zip(&self.coeffs) {
            for (zj, cj) in self.anchors.iter().zip(&self.coeffs) {
                acc += ci * cj * self.kernel.profile(zi.dot(zj)).0;
            }
        }
        (surface_area(self.dim()) * acc.max(0.0)).sqrt()
    }
}

/// Estimate of `∫_{S^d} |∇P| dμ_d`.
///
/// For `d = 2` a product rule of the given order, with the error estimated
/// by re-integrating at twice the order; for `d ≥ 3` a randomized
/// quasi-Monte Carlo rule.
pub fn gradient_l1_norm(p: &PolynomialHandle, quad_order: usize) -> Result<Estimate> {
    mz::integrate_nonsmooth(p.dim(), quad_order, mz::NONSMOOTH_REL_TOL, |x| {
        norm(&p.grad(x))
    })
}

/// `u` if `u > ε`, otherwise `ε`.
#[inline]
pub fn h_clamp(u: f64, eps: f64) -> f64 {
    if u > eps {
        u
    } else {
        eps
    }
}

/// `ε = 1/(6√d)`.
pub fn flow_epsilon(dim: SphereDim) -> f64 {
    1.0 / (6.0 * (dim.get() as f64).sqrt())
}

/// Terminal time `r_d / (3t)`.
pub fn terminal_time(r_d: f64, t: usize) -> f64 {
    r_d / (3.0 * t as f64)
}

/// Rescales `p` so that `∫|∇P| dμ = 1` under the quadrature of `quad_order`.
pub fn normalize_to_boundary(p: &PolynomialHandle, quad_order: usize) -> Result<PolynomialHandle> {
    let est = gradient_l1_norm(p, quad_order)?;
    if !(est.value > 1e-14) {
        return Err(Error::DegeneratePolynomial(format!(
            "gradient L1 norm {:e} is too small to normalize",
            est.value
        )));
    }
    let mut out = p.scaled(1.0 / est.value);
    out.boundary_normalized = true;
    Ok(out)
}

/// Default quadrature order for `∫|∇P|`: `2t + 16`.
pub fn default_quad_order(t: usize) -> usize {
    2 * t + 16
}

/// Random member of `∂Ω`: Gaussian coefficients on spiral anchors, normalized.
pub fn random_boundary_polynomial<R: Rng + ?Sized>(
    t: usize,
    dim: SphereDim,
    rng: &mut R,
) -> Result<PolynomialHandle> {
    let kernel = KernelSpec::new(t, dim)?;
    normalize_to_boundary(
        &PolynomialHandle::random(kernel, rng),
        default_quad_order(t),
    )
}

/// Recorded flow: times, mean values `N⁻¹ Σ_i P(w_i(s))`, and endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowTrace {
    pub times: Vec<f64>,
    pub mean_values: Vec<f64>,
    pub endpoints: Vec<Point>,
}

impl FlowTrace {
    pub fn terminal_time(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    /// Largest drop between consecutive mean values (zero for a monotone trace).
    pub fn max_mean_decrease(&self) -> f64 {
        self.mean_values
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(0.0, f64::max)
    }
}

/// Flow integrator settings.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowIntegrator {
    pub r_d: f64,
    pub steps: usize,
    /// Multiplies the field. Always 1 for the actual flow; other values
    /// exist to exercise [`flow_displacement_bound_check`].
    pub field_scale: f64,
}

impl Default for FlowIntegrator {
    fn default() -> Self {
        FlowIntegrator {
            r_d: DEFAULT_R_D,
            steps: DEFAULT_STEPS,
            field_scale: 1.0,
        }
    }
}

struct Field<'a> {
    p: &'a PolynomialHandle,
    eps: f64,
    scale: f64,
}

/// Side of the switching surface `|∇P| = ε`.
#[derive(Clone, Copy, PartialEq)]
enum Branch {
    /// `U = ∇P / ε`.
    Clamped,
    /// `U = ∇P / |∇P|`.
    Unit,
}

impl Field<'_> {
    /// `|∇P| - ε` at `normalize(w)`.
    fn switch(&self, w: &[f64]) -> f64 {
        let x = Point::new(w.to_vec()).expect("flow left the sphere");
        norm(&self.p.grad(&x)) - self.eps
    }

    fn branch_at(&self, w: &[f64]) -> Branch {
        if self.switch(w) > 0.0 {
            Branch::Unit
        } else {
            Branch::Clamped
        }
    }

    /// Smooth extension of one branch of the field, evaluated at `normalize(w)`.
    fn at(&self, w: &[f64], branch: Branch) -> Vec<f64> {
        let x = Point::new(w.to_vec()).expect("flow left the sphere");
        let g = self.p.grad(&x);
        let h = match branch {
            Branch::Clamped => self.eps,
            Branch::Unit => norm(&g).max(f64::MIN_POSITIVE),
        };
        g.into_iter().map(|v| self.scale * v / h).collect()
    }

    fn rk4(&self, w: &[f64], h: f64, branch: Branch) -> Vec<f64> {
        let axpy = |a: &[f64], k: &[f64], s: f64| -> Vec<f64> {
            a.iter().zip(k).map(|(x, y)| x + s * y).collect()
        };
        let k1 = self.at(w, branch);
        let k2 = self.at(&axpy(w, &k1, h / 2.0), branch);
        let k3 = self.at(&axpy(w, &k2, h / 2.0), branch);
        let k4 = self.at(&axpy(w, &k3, h), branch);
        let next: Vec<f64> = (0..w.len())
            .map(|i| w[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect();
        let n = norm(&next);
        next.into_iter().map(|v| v / n).collect()
    }

    /// One step of size `h`.
    ///
    /// Each piece is integrated with the branch that holds at its start.
    /// When the end lands on the other side, the switching time is found by
    /// bisection and the rest of the step continues on the new branch, so
    /// no RK stage ever samples across the kink of the clamp.
    fn step(&self, w: &[f64], h: f64) -> Vec<f64> {
        let mut w = w.to_vec();
        let mut left = h;
        for _ in 0..8 {
            let branch = self.branch_at(&w);
            let full = self.rk4(&w, left, branch);
            if self.branch_at(&full) == branch {
                return full;
            }
            let (mut lo, mut hi) = (0.0, left);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if self.branch_at(&self.rk4(&w, mid, branch)) == branch {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-15 * h {
                    break;
                }
            }
            w = self.rk4(&w, hi, branch);
            left -= hi;
            if left <= 0.0 {
                return w;
            }
        }
        let branch = self.branch_at(&w);
        self.rk4(&w, left, branch)
    }

    /// Values of `P` at every step and the final position.
    fn trajectory(&self, start: &Point, h: f64, steps: usize) -> (Vec<f64>, Point) {
        let mut w = start.coords().to_vec();
        let mut values = Vec::with_capacity(steps + 1);
        values.push(self.p.eval(start));
        for _ in 0..steps {
            w = self.step(&w, h);
            values.push(self.p.eval(&Point::from_unit(w.clone())));
        }
        (values, Point::new(w).expect("unit endpoint"))
    }
}

impl FlowIntegrator {
    pub fn new(r_d: f64, steps: usize) -> Self {
        FlowIntegrator {
            r_d,
            steps,
            field_scale: 1.0,
        }
    }

    /// Integrates every start from `s = 0` to `r_d / (3t)` with classical RK4
    /// and renormalization after each step.
    pub fn run(&self, p: &PolynomialHandle, starts: &[Point]) -> Result<FlowTrace> {
        if self.steps < 10 {
            return Err(Error::InvalidArgument(
                "flow needs at least 10 steps".into(),
            ));
        }
        if !(self.r_d > 0.0) {
            return Err(Error::InvalidArgument("r_d must be positive".into()));
        }
        if starts.is_empty() {
            return Err(Error::EmptyConfiguration);
        }
        for s in starts {
            s.check_dim(p.dim())?;
            if (norm(s.coords()) - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument("flow start is not unit-norm".into()));
            }
        }
        let terminal = terminal_time(self.r_d, p.degree());
        let h = terminal / self.steps as f64;
        let field = Field {
            p,
            eps: flow_epsilon(p.dim()),
            scale: self.field_scale,
        };
        let runs: Vec<(Vec<f64>, Point)> = starts
            .par_iter()
            .map(|s| field.trajectory(s, h, self.steps))
            .collect();
        let n = starts.len() as f64;
        let mean_values = (0..=self.steps)
            .map(|k| {
                let col: Vec<f64> = runs.iter().map(|(v, _)| v[k]).collect();
                pairwise_sum(&col) / n
            })
            .collect();
        let times = (0..=self.steps)
            .map(|k| {
                if k == self.steps {
                    terminal
                } else {
                    k as f64 * h
                }
            })
            .collect();
        Ok(FlowTrace {
            times,
            mean_values,
            endpoints: runs.into_iter().map(|(_, e)| e).collect(),
        })
    }
}

/// Flow of a boundary-normalized polynomial from `starts`.
pub fn integrate_flow(
    p: &PolynomialHandle,
    starts: &[Point],
    r_d: f64,
    steps: usize,
) -> Result<FlowTrace> {
    if !p.is_boundary_normalized() {
        return Err(Error::InvalidArgument(
            "flow requires a polynomial normalized to the boundary".into(),
        ));
    }
    FlowIntegrator::new(r_d, steps).run(p, starts)
}

/// The map `F(P)`: flow endpoints at the terminal time.
pub fn flow_map(
    p: &PolynomialHandle,
    starts: &[Point],
    r_d: f64,
    steps: usize,
) -> Result<Vec<Point>> {
    Ok(integrate_flow(p, starts, r_d, steps)?.endpoints)
}

/// True iff every endpoint lies within geodesic distance `terminal time +
/// 1e-8` of its start.
pub fn flow_displacement_bound_check(trace: &FlowTrace, starts: &[Point]) -> bool {
    let limit = trace.terminal_time() + DISPLACEMENT_SLACK;
    trace.endpoints.len() == starts.len()
        && trace
            .endpoints
            .iter()
            .zip(starts)
            .all(|(e, s)| e.geodesic_distance(s) <= limit)
}

/// Ratio of successive step-doubling differences of the endpoints,
/// `max|F_n - F_2n| / max|F_2n - F_4n|`. Close to 16 for a fourth-order method.
pub fn step_doubling_ratio(
    p: &PolynomialHandle,
    starts: &[Point],
    r_d: f64,
    base_steps: usize,
) -> Result<f64> {
    let run = |steps| FlowIntegrator::new(r_d, steps).run(p, starts);
    let (a, b, c) = (run(base_steps)?, run(2 * base_steps)?, run(4 * base_steps)?);
    let diff = |x: &FlowTrace, y: &FlowTrace| {
        x.endpoints
            .iter()
            .zip(&y.endpoints)
            .map(|(u, v)| u.geodesic_distance(v))
            .fold(0.0, f64::max)
    };
    Ok(diff(&a, &b) / diff(&b, &c))
}
