//! Dimension counts, surface measures, Gegenbauer recurrences and the
//! reproducing kernel of the mean-zero polynomial space `P_t(S^d)`.
//!
//! Spherical harmonics are never built one by one. Every quantity is taken
//! through the addition formula, so the kernel reduces to
//! `k_t(x, y) = Σ_{ℓ=1..t} D(ℓ, d) P_{ℓ,d}(⟨x, y⟩)` with `P_{ℓ,d}(1) = 1`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::point::{Point, SphereDim};

fn binomial(n: u128, k: u128) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul(n - i)
            .ok_or(Error::Overflow("binomial coefficient"))?
            / (i + 1);
    }
    Ok(acc)
}

/// `binom(n, k)` in exact integer arithmetic.
pub fn binom(n: u64, k: u64) -> Result<u64> {
    if k > n {
        return Ok(0);
    }
    let v = binomial(n as u128, k as u128)?;
    u64::try_from(v).map_err(|_| Error::Overflow("binomial coefficient"))
}

/// Dimension `D(ℓ, d)` of the space of degree-`ℓ` spherical harmonics on `S^d`.
pub fn dim_harmonic(l: u64, d: SphereDim) -> Result<u64> {
    if l == 0 {
        return Ok(1);
    }
    let d = d.get() as u128;
    let l = l as u128;
    let b = binomial(l + d - 1, l)?;
    let num = (2 * l + d - 1)
        .checked_mul(b)
        .ok_or(Error::Overflow("D(l, d)"))?;
    debug_assert_eq!(num % (l + d - 1), 0);
    u64::try_from(num / (l + d - 1)).map_err(|_| Error::Overflow("D(l, d)"))
}

/// Dimension `D_t = D(t, d+1) - 1` of `P_t(S^d)`.
pub fn dim_space(t: u64, d: SphereDim) -> Result<u64> {
    let up = SphereDim::new(d.get() + 1)?;
    Ok(dim_harmonic(t, up)? - 1)
}

/// Surface area `ω_d = 2π^{(d+1)/2} / Γ((d+1)/2)` of `S^d`.
pub fn surface_area(d: SphereDim) -> f64 {
    // ω_d = 2π/(d-1) · ω_{d-2}, seeded by ω_1 = 2π and ω_2 = 4π.
    let d = d.get();
    let (mut k, mut w) = if d % 2 == 1 {
        (1, 2.0 * PI)
    } else {
        (2, 4.0 * PI)
    };
    while k < d {
        k += 2;
        w *= 2.0 * PI / (k as f64 - 1.0);
    }
    w
}

/// `P_{ℓ,d}(s)` and its derivative via the normalized Gegenbauer recurrence
/// `(ℓ+d-1) P_{ℓ+1} = (2ℓ+d-1) s P_ℓ - ℓ P_{ℓ-1}`.
///
/// `s` is clamped to `[-1, 1]`.
pub fn legendre_eval(l: usize, d: SphereDim, s: f64) -> (f64, f64) {
    let s = s.clamp(-1.0, 1.0);
    if l == 0 {
        return (1.0, 0.0);
    }
    let dm1 = d.get() as f64 - 1.0;
    let (mut p_prev, mut p) = (1.0, s);
    let (mut dp_prev, mut dp) = (0.0, 1.0);
    for k in 1..l {
        let kf = k as f64;
        let a = 2.0 * kf + dm1;
        let c = kf + dm1;
        let p_next = (a * s * p - kf * p_prev) / c;
        let dp_next = (a * (p + s * dp) - kf * dp_prev) / c;
        p_prev = p;
        p = p_next;
        dp_prev = dp;
        dp = dp_next;
    }
    (p, dp)
}

/// Reproducing kernel `k_t` of `P_t(S^d)` under the normalized inner product.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    t: usize,
    dim: SphereDim,
    /// `D(ℓ, d)` for `ℓ = 1..=t`.
    weights: Vec<f64>,
    /// `((2k+d-1)/(k+d-1), k/(k+d-1))` for `k = 1..t`.
    rec: Vec<(f64, f64)>,
    dim_space: f64,
}

impl KernelSpec {
    pub fn new(t: usize, dim: SphereDim) -> Result<Self> {
        if t == 0 {
            return Err(Error::InvalidArgument(
                "kernel degree t must be >= 1".into(),
            ));
        }
        let weights = (1..=t as u64)
            .map(|l| dim_harmonic(l, dim).map(|v| v as f64))
            .collect::<Result<Vec<_>>>()?;
        let dim_space = dim_space(t as u64, dim)? as f64;
        let dm1 = dim.get() as f64 - 1.0;
        let rec = (1..t)
            .map(|k| {
                let kf = k as f64;
                ((2.0 * kf + dm1) / (kf + dm1), kf / (kf + dm1))
            })
            .collect();
        Ok(KernelSpec {
            t,
            dim,
            weights,
            rec,
            dim_space,
        })
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.t
    }

    #[inline]
    pub fn dim(&self) -> SphereDim {
        self.dim
    }

    /// `D_t`, the value of the kernel on the diagonal.
    #[inline]
    pub fn dim_space(&self) -> f64 {
        self.dim_space
    }

    /// `D(ℓ, d)` for `ℓ = 1..=t`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `K(s) = Σ_ℓ D(ℓ,d) P_{ℓ,d}(s)` and `K'(s)`, in one recurrence pass.
    pub fn profile(&self, s: f64) -> (f64, f64) {
        let s = s.clamp(-1.0, 1.0);
        let (mut p_prev, mut p) = (1.0, s);
        let (mut dp_prev, mut dp) = (0.0, 1.0);
        let mut val = self.weights[0] * p;
        let mut der = self.weights[0] * dp;
        for (&(a, b), &w) in self.rec.iter().zip(&self.weights[1..]) {
            let p_next = a * s * p - b * p_prev;
            let dp_next = a * (p + s * dp) - b * dp_prev;
            p_prev = p;
            p = p_next;
            dp_prev = dp;
            dp = dp_next;
            val += w * p;
            der += w * dp;
        }
        (val, der)
    }

    /// Adds `D(ℓ,d) P_{ℓ,d}(s)` into `out[ℓ-1]` for every `ℓ = 1..=t`.
    pub fn accumulate_per_degree(&self, s: f64, out: &mut [f64]) {
        let s = s.clamp(-1.0, 1.0);
        let dm1 = self.dim.get() as f64 - 1.0;
        let (mut p_prev, mut p) = (1.0, s);
        out[0] += self.weights[0] * p;
        for (k, (o, w)) in out
            .iter_mut()
            .zip(&self.weights)
            .enumerate()
            .take(self.t)
            .skip(1)
        {
            let kf = k as f64;
            let p_next = ((2.0 * kf + dm1) * s * p - kf * p_prev) / (kf + dm1);
            p_prev = p;
            p = p_next;
            *o += w * p;
        }
    }

    fn check(&self, p: &Point) -> Result<()> {
        p.check_dim(self.dim)
    }

    /// `k_t(x, y)`.
    pub fn eval(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.profile(x.dot(y)).0)
    }

    /// Spherical gradient of `k_t(z, ·)` at `x`: `K'(⟨z,x⟩) (z - ⟨z,x⟩ x)`.
    pub fn grad(&self, z: &Point, x: &Point) -> Result<Vec<f64>> {
        self.check(z)?;
        self.check(x)?;
        if z == x {
            return Ok(vec![0.0; x.coords().len()]);
        }
        let s = z.dot(x);
        let (_, der) = self.profile(s);
        Ok(z.coords()
            .iter()
            .zip(x.coords())
            .map(|(zi, xi)| der * (zi - s * xi))
            .collect())
    }
}
