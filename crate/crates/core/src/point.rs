//! Points on the unit sphere `S^d` embedded in `R^{d+1}`.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimension `d` of the sphere `S^d`. Points carry `d + 1` coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SphereDim(usize);

impl SphereDim {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDimension(d));
        }
        Ok(SphereDim(d))
    }

    /// The 2-sphere in `R^3`.
    pub const TWO: SphereDim = SphereDim(2);

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    /// Number of ambient coordinates, `d + 1`.
    #[inline]
    pub fn ambient(self) -> usize {
        self.0 + 1
    }
}

impl fmt::Display for SphereDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A unit vector in `R^{d+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    /// Normalizes `coords` onto the sphere. Fails for a zero or non-finite vector.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidDimension(coords.len().saturating_sub(1)));
        }
        let norm = norm(&coords);
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::DegeneratePoint);
        }
        Ok(Point(coords.into_iter().map(|c| c / norm).collect()))
    }

    /// Wraps coordinates that are already unit-norm without touching them.
    ///
    /// Used where bitwise preservation matters (fixed point sets); the caller
    /// is responsible for the norm.
    pub fn from_unit(coords: Vec<f64>) -> Self {
        debug_assert!((norm(&coords) - 1.0).abs() < 1e-9);
        Point(coords)
    }

    /// Point from colatitude `theta` and longitude `phi` on `S^2`.
    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Point(vec![st * cp, st * sp, ct])
    }

    /// North pole `(0, …, 0, 1)`.
    pub fn north_pole(dim: SphereDim) -> Self {
        let mut c = vec![0.0; dim.ambient()];
        c[dim.get()] = 1.0;
        Point(c)
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    #[inline]
    pub fn dim(&self) -> SphereDim {
        SphereDim(self.0.len() - 1)
    }

    #[inline]
    pub fn dot(&self, other: &Point) -> f64 {
        dot(&self.0, &other.0)
    }

    /// Inner product clamped to `[-1, 1]`.
    #[inline]
    pub fn cos_angle(&self, other: &Point) -> f64 {
        self.dot(other).clamp(-1.0, 1.0)
    }

    /// Great-circle distance.
    pub fn geodesic_distance(&self, other: &Point) -> f64 {
        // atan2 form is accurate for both tiny and near-antipodal separations.
        let c = self.dot(other);
        let cross: f64 = self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| b - c * a)
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        cross.atan2(c)
    }

    /// Projects `v` onto the tangent space at this point.
    pub fn project_tangent(&self, v: &[f64]) -> Vec<f64> {
        let c = dot(&self.0, v);
        v.iter().zip(&self.0).map(|(vi, xi)| vi - c * xi).collect()
    }

    /// Retraction: `normalize(x + v)`.
    pub fn retract(&self, v: &[f64]) -> Result<Point> {
        Point::new(self.0.iter().zip(v).map(|(a, b)| a + b).collect())
    }

    pub fn negate(&self) -> Point {
        Point(self.0.iter().map(|c| -c).collect())
    }

    /// Colatitude in `[0, π]` and longitude in `[0, 2π)` of a point on `S^2`.
    pub fn to_spherical(&self) -> (f64, f64) {
        let c = &self.0;
        let rho = (c[0] * c[0] + c[1] * c[1]).sqrt();
        let theta = rho.atan2(c[2]);
        let mut phi = c[1].atan2(c[0]);
        if phi < 0.0 {
            phi += 2.0 * PI;
        }
        if phi >= 2.0 * PI {
            phi = 0.0;
        }
        (theta, phi)
    }

    pub fn check_dim(&self, dim: SphereDim) -> Result<()> {
        if self.0.len() != dim.ambient() {
            return Err(Error::DimensionMismatch {
                expected: dim.ambient(),
                found: self.0.len(),
            });
        }
        Ok(())
    }

    /// Uniformly distributed random point.
    pub fn random<R: Rng + ?Sized>(dim: SphereDim, rng: &mut R) -> Point {
        loop {
            let v: Vec<f64> = (0..dim.ambient())
                .map(|_| rng.sample(StandardNormal))
                .collect();
            if let Ok(p) = Point::new(v) {
                return p;
            }
        }
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Random tangent vector at `x` with i.i.d. Gaussian ambient components, projected.
pub fn random_tangent<R: Rng + ?Sized>(x: &Point, rng: &mut R) -> Vec<f64> {
    let v: Vec<f64> = (0..x.coords().len())
        .map(|_| rng.sample(StandardNormal))
        .collect();
    x.project_tangent(&v)
}

/// Square orthogonal matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation {
    n: usize,
    rows: Vec<f64>,
}

impl Rotation {
    pub fn identity(n: usize) -> Self {
        let mut rows = vec![0.0; n * n];
        for i in 0..n {
            rows[i * n + i] = 1.0;
        }
        Rotation { n, rows }
    }

    /// Haar-random orthogonal matrix (Gram-Schmidt of a Gaussian matrix).
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        'retry: loop {
            let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
            for _ in 0..n {
                let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                for _ in 0..2 {
                    for b in &basis {
                        let c = dot(&v, b);
                        v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= c * bi);
                    }
                }
                let nv = norm(&v);
                if nv < 1e-8 {
                    continue 'retry;
                }
                v.iter_mut().for_each(|vi| *vi /= nv);
                basis.push(v);
            }
            return Rotation {
                n,
                rows: basis.into_iter().flatten().collect(),
            };
        }
    }

    pub fn apply(&self, p: &Point) -> Point {
        let c = p.coords();
        assert_eq!(c.len(), self.n, "rotation dimension mismatch");
        let out = (0..self.n)
            .map(|i| dot(&self.rows[i * self.n..(i + 1) * self.n], c))
            .collect();
        Point(out)
    }

    pub fn apply_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| dot(&self.rows[i * self.n..(i + 1) * self.n], v))
            .collect()
    }
}

/// Radical inverse of `i` in `base` (van der Corput).
pub fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// `k`-th point of a Halton sequence in `[0,1)^dims`, `dims ≤ 16`.
pub fn halton(k: u64, dims: usize) -> Vec<f64> {
    assert!(
        dims <= PRIMES.len(),
        "Halton sequence limited to 16 dimensions"
    );
    PRIMES[..dims]
        .iter()
        .map(|&b| radical_inverse(k, b))
        .collect()
}

/// Maps a point of the unit cube (even length ≥ `amb`) to `S^{amb-1}` via
/// Box-Muller pairs and normalization.
pub(crate) fn cube_to_sphere(u: &[f64], amb: usize) -> Option<Point> {
    let mut g = Vec::with_capacity(amb + 1);
    for pair in u.chunks(2) {
        let u1 = pair[0].clamp(1e-300, 1.0);
        let u2 = pair.get(1).copied().unwrap_or(0.5);
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        g.push(r * c);
        g.push(r * s);
    }
    g.truncate(amb);
    Point::new(g).ok()
}

/// Deterministic, well-spread points: a circle for `d = 1`, the Fibonacci
/// spiral for `d = 2` and a Halton sequence pushed to the sphere otherwise.
pub fn spiral_points(n: usize, dim: SphereDim) -> Vec<Point> {
    match dim.get() {
        1 => (0..n)
            .map(|i| {
                let a = 2.0 * PI * (i as f64 + 0.5) / n as f64;
                Point(vec![a.cos(), a.sin()])
            })
            .collect(),
        2 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..n)
                .map(|i| {
                    let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let (s, c) = (golden * i as f64).sin_cos();
                    Point::new(vec![r * c, r * s, z]).expect("spiral point")
                })
                .collect()
        }
        _ => {
            let amb = dim.ambient();
            let cube_dims = amb + amb % 2;
            let mut out = Vec::with_capacity(n);
            let mut k = 1u64;
            while out.len() < n {
                if let Some(p) = cube_to_sphere(&halton(k, cube_dims), amb) {
                    out.push(p);
                }
                k += 1;
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn new_normalizes() {
        let p = Point::new(vec![3.0, 0.0, 4.0]).unwrap();
        assert!((norm(p.coords()) - 1.0).abs() < 1e-15);
        assert_eq!(p.coords(), &[0.6, 0.0, 0.8]);
    }

    #[test]
    fn zero_vector_rejected() {
        assert_eq!(Point::new(vec![0.0; 3]), Err(Error::DegeneratePoint));
        assert!(SphereDim::new(0).is_err());
    }

    #[test]
    fn geodesic_distance_extremes() {
        let n = Point::north_pole(SphereDim::TWO);
        assert_eq!(n.geodesic_distance(&n), 0.0);
        assert!((n.geodesic_distance(&n.negate()) - PI).abs() < 1e-15);
        let e = Point::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert!((n.geodesic_distance(&e) - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn spherical_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let p = Point::random(SphereDim::TWO, &mut rng);
            let (t, ph) = p.to_spherical();
            let q = Point::from_spherical(t, ph);
            assert!(p.geodesic_distance(&q) < 1e-14);
        }
    }

    #[test]
    fn spiral_points_are_distinct() {
        for d in 1..5 {
            let dim = SphereDim::new(d).unwrap();
            let pts = spiral_points(40, dim);
            assert_eq!(pts.len(), 40);
            for i in 0..pts.len() {
                assert!((norm(pts[i].coords()) - 1.0).abs() < 1e-14);
                for j in 0..i {
                    assert!(pts[i].geodesic_distance(&pts[j]) > 1e-6);
                }
            }
        }
    }

    #[test]
    fn radical_inverse_base_two() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert_eq!(radical_inverse(4, 2), 0.125);
    }

    #[test]
    fn rotation_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = Rotation::random(4, &mut rng);
        let a = Point::random(SphereDim::new(3).unwrap(), &mut rng);
        let b = Point::random(SphereDim::new(3).unwrap(), &mut rng);
        let (ra, rb) = (r.apply(&a), r.apply(&b));
        assert!((ra.dot(&rb) - a.dot(&b)).abs() < 1e-14);
        assert!((norm(ra.coords()) - 1.0).abs() < 1e-14);
    }
}
