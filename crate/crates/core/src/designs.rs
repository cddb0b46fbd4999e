//! Classical spherical designs on `S^2`.

use rand::Rng;

use crate::point::{Point, Rotation};

fn unit(v: [f64; 3]) -> Point {
    Point::new(v.to_vec()).expect("nonzero vertex")
}

/// `{e_3, -e_3}`, a 1-design.
pub fn antipodal_pair() -> Vec<Point> {
    vec![unit([0.0, 0.0, 1.0]), unit([0.0, 0.0, -1.0])]
}

/// Regular tetrahedron, a 2-design.
pub fn tetrahedron() -> Vec<Point> {
    [
        [1.0, 1.0, 1.0],
        [1.0, -1.0, -1.0],
        [-1.0, 1.0, -1.0],
        [-1.0, -1.0, 1.0],
    ]
    .into_iter()
    .map(unit)
    .collect()
}

/// `±e_i`, a 3-design.
pub fn octahedron() -> Vec<Point> {
    let mut out = Vec::with_capacity(6);
    for i in 0..3 {
        for s in [1.0, -1.0] {
            let mut v = [0.0; 3];
            v[i] = s;
            out.push(unit(v));
        }
    }
    out
}

/// `(±1, ±1, ±1)/√3`, a 3-design.
pub fn cube() -> Vec<Point> {
    let mut out = Vec::with_capacity(8);
    for a in [1.0, -1.0] {
        for b in [1.0, -1.0] {
            for c in [1.0, -1.0] {
                out.push(unit([a, b, c]));
            }
        }
    }
    out
}

/// Regular icosahedron, a 5-design.
pub fn icosahedron() -> Vec<Point> {
    let g = (1.0 + 5f64.sqrt()) / 2.0;
    let mut out = Vec::with_capacity(12);
    for a in [1.0, -1.0] {
        for b in [g, -g] {
            out.push(unit([0.0, a, b]));
            out.push(unit([a, b, 0.0]));
            out.push(unit([b, 0.0, a]));
        }
    }
    out
}

/// A named classical design with its strength.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classical {
    AntipodalPair,
    Tetrahedron,
    Octahedron,
    Cube,
    Icosahedron,
}

impl Classical {
    pub const ALL: [Classical; 5] = [
        Classical::AntipodalPair,
        Classical::Tetrahedron,
        Classical::Octahedron,
        Classical::Cube,
        Classical::Icosahedron,
    ];

    pub fn strength(self) -> usize {
        match self {
            Classical::AntipodalPair => 1,
            Classical::Tetrahedron => 2,
            Classical::Octahedron | Classical::Cube => 3,
            Classical::Icosahedron => 5,
        }
    }

    pub fn points(self) -> Vec<Point> {
        match self {
            Classical::AntipodalPair => antipodal_pair(),
            Classical::Tetrahedron => tetrahedron(),
            Classical::Octahedron => octahedron(),
            Classical::Cube => cube(),
            Classical::Icosahedron => icosahedron(),
        }
    }

    pub fn size(self) -> usize {
        match self {
            Classical::AntipodalPair => 2,
            Classical::Tetrahedron => 4,
            Classical::Octahedron => 6,
            Classical::Cube => 8,
            Classical::Icosahedron => 12,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Classical::AntipodalPair => "antipodal_pair",
            Classical::Tetrahedron => "tetrahedron",
            Classical::Octahedron => "octahedron",
            Classical::Cube => "cube",
            Classical::Icosahedron => "icosahedron",
        }
    }
}

/// Union of `copies` independently rotated copies of `base`.
pub fn rotated_union<R: Rng + ?Sized>(base: &[Point], copies: usize, rng: &mut R) -> Vec<Point> {
    let n = base.first().map_or(3, |p| p.coords().len());
    (0..copies)
        .flat_map(|_| {
            let rot = Rotation::random(n, rng);
            base.iter().map(move |p| rot.apply(p)).collect::<Vec<_>>()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::SphereDim;
    use crate::residual::certify_points;

    #[test]
    fn strengths_certify() {
        for c in Classical::ALL {
            let pts = c.points();
            assert_eq!(pts.len(), c.size());
            let cert = certify_points(c.strength(), SphereDim::TWO, &pts, 1e-10).unwrap();
            assert_eq!(cert.is_design, Some(true), "{}", c.name());
            let next = certify_points(c.strength() + 1, SphereDim::TWO, &pts, 1e-10).unwrap();
            assert_eq!(next.is_design, Some(false), "{} at t+1", c.name());
        }
    }
}
