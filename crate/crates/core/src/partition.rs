//! Area-regular zonal partitions of `S^2`.
//!
//! Two polar caps plus collars of roughly square cells. Collar boundaries are
//! placed at `cos θ = 1 - 2c/N` for integer cumulative counts `c`, so every
//! cell has normalized area exactly `1/N` up to rounding.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::{Point, SphereDim};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellKind {
    PolarCap,
    CollarRect,
}

/// A closed cell `[θ₀, θ₁] × [φ₀, φ₁]` in colatitude/longitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub kind: CellKind,
    pub theta: (f64, f64),
    pub phi: (f64, f64),
}

impl Cell {
    /// Normalized area `(cos θ₀ - cos θ₁)(φ₁ - φ₀) / 4π`.
    pub fn area(&self) -> f64 {
        (self.theta.0.cos() - self.theta.1.cos()) * (self.phi.1 - self.phi.0) / (4.0 * PI)
    }

    /// Largest geodesic distance between two points of the cell.
    pub fn diameter(&self) -> f64 {
        match self.kind {
            CellKind::PolarCap => {
                let (t0, t1) = self.theta;
                if t0 <= 0.0 {
                    (2.0 * t1).min(PI)
                } else {
                    (2.0 * (PI - t0)).min(PI)
                }
            }
            CellKind::CollarRect => rect_diameter(self.theta, self.phi.1 - self.phi.0),
        }
    }

    pub fn center(&self) -> Point {
        match self.kind {
            CellKind::PolarCap if self.theta.0 <= 0.0 => Point::north_pole(SphereDim::TWO),
            CellKind::PolarCap => Point::north_pole(SphereDim::TWO).negate(),
            CellKind::CollarRect => Point::from_spherical(
                0.5 * (self.theta.0 + self.theta.1),
                0.5 * (self.phi.0 + self.phi.1),
            ),
        }
    }

    pub fn contains(&self, theta: f64, phi: f64) -> bool {
        let in_theta = theta >= self.theta.0 && theta <= self.theta.1;
        match self.kind {
            CellKind::PolarCap => in_theta,
            CellKind::CollarRect => in_theta && phi >= self.phi.0 && phi <= self.phi.1,
        }
    }

    /// Area-uniform random point in the cell.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let (c0, c1) = (self.theta.0.cos(), self.theta.1.cos());
        let z: f64 = c1 + (c0 - c1) * rng.random::<f64>();
        let theta = z.clamp(-1.0, 1.0).acos().clamp(self.theta.0, self.theta.1);
        let phi = self.phi.0 + (self.phi.1 - self.phi.0) * rng.random::<f64>();
        Point::from_spherical(theta, phi)
    }
}

/// Diameter of `[θ₀, θ₁] × [φ, φ + width]`.
///
/// Minimizes `cos θa cos θb + c sin θa sin θb` with `c = cos(min(width, π))`
/// over the candidates where the minimum of a bilinear form on two circular
/// arcs can sit: arc endpoints, the parallel nearest the equator, and the
/// per-edge stationary point.
fn rect_diameter(theta: (f64, f64), width: f64) -> f64 {
    let (t0, t1) = theta;
    let c = width.min(PI).cos();
    let f = |a: f64, b: f64| a.cos() * b.cos() + c * a.sin() * b.sin();
    let mut us = vec![t0, t1];
    if t0 < FRAC_PI_2 && FRAC_PI_2 < t1 {
        us.push(FRAC_PI_2);
    }
    let mut best = f64::INFINITY;
    for &u in &us {
        let mut vs = us.clone();
        let psi = (c * u.sin()).atan2(u.cos());
        let v = psi + PI;
        if v >= t0 && v <= t1 {
            vs.push(v);
        }
        for &v in &vs {
            best = best.min(f(u, v));
        }
    }
    best.clamp(-1.0, 1.0).acos()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Band {
    theta: (f64, f64),
    first: usize,
    count: usize,
}

/// Area-regular partition of `S^2` into `N` cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    cells: Vec<Cell>,
    bands: Vec<Band>,
    norm: f64,
}

impl Partition {
    pub fn dim(&self) -> SphereDim {
        SphereDim::TWO
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Partition norm: the largest cell diameter.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Index of the cell containing `x`; ties on shared boundaries go to the
    /// lower index.
    pub fn locate(&self, x: &Point) -> usize {
        let (theta, phi) = x.to_spherical();
        let b = self
            .bands
            .partition_point(|band| band.theta.1 < theta)
            .min(self.bands.len() - 1);
        let band = &self.bands[b];
        if band.count == 1 {
            return band.first;
        }
        let width = TAU / band.count as f64;
        let k = ((phi / width).ceil() as isize - 1).clamp(0, band.count as isize - 1) as usize;
        band.first + k
    }

    /// One area-uniform random point per cell.
    pub fn sample_points<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Point> {
        self.cells.iter().map(|c| c.sample(rng)).collect()
    }

    pub fn centers(&self) -> Vec<Point> {
        self.cells.iter().map(Cell::center).collect()
    }
}

/// Maximum cell diameter of `r`.
pub fn partition_norm(r: &Partition) -> f64 {
    r.cells.iter().map(Cell::diameter).fold(0.0, f64::max)
}

pub fn cell_center(c: &Cell) -> Point {
    c.center()
}

pub fn locate(r: &Partition, x: &Point) -> usize {
    r.locate(x)
}

fn colatitude_for_count(count: usize, n: usize) -> f64 {
    if count == 0 {
        0.0
    } else if count >= n {
        PI
    } else {
        (1.0 - 2.0 * count as f64 / n as f64)
            .clamp(-1.0, 1.0)
            .acos()
    }
}

/// Collar cell counts for `n ≥ 3` cells, caps excluded.
fn collar_counts(n: usize) -> Vec<usize> {
    let cap = colatitude_for_count(1, n);
    let ideal = (4.0 * PI / n as f64).sqrt();
    let span = PI - 2.0 * cap;
    let collars = ((span / ideal).round() as usize).max(1);
    let fitting = span / collars as f64;
    let mut counts = Vec::with_capacity(collars);
    let mut carry = 0.0;
    for i in 0..collars {
        let a = cap + i as f64 * fitting;
        let b = cap + (i + 1) as f64 * fitting;
        let ideal_count = (a.cos() - b.cos()) / 2.0 * n as f64;
        let m = (ideal_count + carry).round().max(0.0);
        carry += ideal_count - m;
        counts.push(m as usize);
    }
    // Rounding with carry preserves the total, but guard against drift.
    let total: usize = counts.iter().sum();
    let last = counts.len() - 1;
    counts[last] = (counts[last] + (n - 2)).saturating_sub(total);
    counts.retain(|&m| m > 0);
    counts
}

/// Zonal area-regular partition of `S^2` into `n` cells.
pub fn equal_area_partition(n: usize) -> Result<Partition> {
    equal_area_partition_dim(n, SphereDim::TWO)
}

/// As [`equal_area_partition`], rejecting `d ≠ 2`.
pub fn equal_area_partition_dim(n: usize, dim: SphereDim) -> Result<Partition> {
    if dim.get() != 2 {
        return Err(Error::UnsupportedDimension {
            d: dim.get(),
            what: "equal-area partition",
        });
    }
    if n == 0 {
        return Err(Error::InvalidArgument(
            "partition needs at least one cell".into(),
        ));
    }
    let full = (0.0, TAU);
    let mut cells = Vec::with_capacity(n);
    let mut bands = Vec::new();
    let cap = |t0: f64, t1: f64| Cell {
        kind: CellKind::PolarCap,
        theta: (t0, t1),
        phi: full,
    };
    if n == 1 {
        cells.push(cap(0.0, PI));
        bands.push(Band {
            theta: (0.0, PI),
            first: 0,
            count: 1,
        });
    } else if n == 2 {
        cells.push(cap(0.0, FRAC_PI_2));
        cells.push(cap(FRAC_PI_2, PI));
        bands.push(Band {
            theta: (0.0, FRAC_PI_2),
            first: 0,
            count: 1,
        });
        bands.push(Band {
            theta: (FRAC_PI_2, PI),
            first: 1,
            count: 1,
        });
    } else {
        let top = colatitude_for_count(1, n);
        cells.push(cap(0.0, top));
        bands.push(Band {
            theta: (0.0, top),
            first: 0,
            count: 1,
        });
        let mut cumulative = 1;
        let mut upper = top;
        for m in collar_counts(n) {
            cumulative += m;
            let lower = colatitude_for_count(cumulative, n);
            let first = cells.len();
            let width = TAU / m as f64;
            for k in 0..m {
                let phi = if k + 1 == m {
                    (k as f64 * width, TAU)
                } else {
                    (k as f64 * width, (k + 1) as f64 * width)
                };
                cells.push(Cell {
                    kind: CellKind::CollarRect,
                    theta: (upper, lower),
                    phi,
                });
            }
            bands.push(Band {
                theta: (upper, lower),
                first,
                count: m,
            });
            upper = lower;
        }
        debug_assert_eq!(cumulative, n - 1);
        cells.push(cap(upper, PI));
        bands.push(Band {
            theta: (upper, PI),
            first: cells.len() - 1,
            count: 1,
        });
    }
    let mut partition = Partition {
        cells,
        bands,
        norm: 0.0,
    };
    partition.norm = partition_norm(&partition);
    Ok(partition)
}
