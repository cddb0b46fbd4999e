//! Plain-text point set files.
//!
//! ```text
//! # dim 2 count 4 degree 2
//! 5.7735026918962573e-1 5.7735026918962573e-1 5.7735026918962573e-1
//! ...
//! ```
//!
//! Coordinates are written with 17 significant digits, which round-trips
//! every `f64`. Blank lines and further `#` lines are ignored on read.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::point::{norm, Point, SphereDim};

/// Rows closer than this to unit norm are kept bitwise.
pub const KEEP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    pub dim: SphereDim,
    pub points: Vec<Point>,
    pub degree: Option<usize>,
}

/// A parsed file together with the largest `| |x| - 1 |` seen on load.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedPointSet {
    pub set: PointSet,
    pub max_correction: f64,
}

impl PointSet {
    pub fn new(dim: SphereDim, points: Vec<Point>) -> Result<Self> {
        for p in &points {
            p.check_dim(dim)?;
        }
        Ok(PointSet {
            dim,
            points,
            degree: None,
        })
    }

    pub fn with_degree(mut self, t: usize) -> Self {
        self.degree = Some(t);
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# dim {} count {}", self.dim.get(), self.points.len());
        if let Some(t) = self.degree {
            let _ = write!(out, " degree {t}");
        }
        out.push('\n');
        for p in &self.points {
            let row: Vec<String> = p.coords().iter().map(|c| format!("{c:.16e}")).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<LoadedPointSet> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let (hline, header) = lines
            .by_ref()
            .find(|(_, l)| !l.is_empty())
            .ok_or_else(|| format_err(1, "empty file, expected a header"))?;
        let (dim, count, degree) = parse_header(hline, header)?;
        let width = dim.ambient();
        let mut points = Vec::with_capacity(count);
        let mut max_correction = 0.0f64;
        for (no, line) in lines {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if points.len() == count {
                return Err(format_err(no, format!("more than {count} rows")));
            }
            let coords = line
                .split_whitespace()
                .map(|tok| {
                    f64::from_str(tok)
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| format_err(no, format!("bad coordinate {tok:?}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            if coords.len() != width {
                return Err(format_err(
                    no,
                    format!("expected {width} coordinates, found {}", coords.len()),
                ));
            }
            let r = norm(&coords);
            if r == 0.0 {
                return Err(format_err(no, "zero vector"));
            }
            let dev = (r - 1.0).abs();
            max_correction = max_correction.max(dev);
            points.push(if dev <= KEEP_TOL {
                Point::from_unit(coords)
            } else {
                Point::new(coords).map_err(|e| format_err(no, e.to_string()))?
            });
        }
        if points.len() != count {
            let last = text.lines().count().max(1);
            return Err(format_err(
                last,
                format!(
                    "unexpected end of file: header announces {count} rows, found {}",
                    points.len()
                ),
            ));
        }
        Ok(LoadedPointSet {
            set: PointSet {
                dim,
                points,
                degree,
            },
            max_correction,
        })
    }
}

fn format_err(line: usize, message: impl Into<String>) -> Error {
    Error::Format {
        line,
        message: message.into(),
    }
}

fn parse_header(no: usize, line: &str) -> Result<(SphereDim, usize, Option<usize>)> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| format_err(no, "expected header \"# dim <d> count <n> [degree <t>]\""))?;
    let toks: Vec<&str> = body.split_whitespace().collect();
    let mut dim = None;
    let mut count = None;
    let mut degree = None;
    if !toks.len().is_multiple_of(2) {
        return Err(format_err(no, "header keys and values must pair up"));
    }
    for kv in toks.chunks(2) {
        let v: usize = kv[1]
            .parse()
            .map_err(|_| format_err(no, format!("bad value {:?} for {}", kv[1], kv[0])))?;
        match kv[0] {
            "dim" => dim = Some(v),
            "count" => count = Some(v),
            "degree" => degree = Some(v),
            k => return Err(format_err(no, format!("unknown header key {k:?}"))),
        }
    }
    let dim = dim.ok_or_else(|| format_err(no, "header lacks dim"))?;
    let dim = SphereDim::new(dim).map_err(|e| format_err(no, e.to_string()))?;
    let count = count.ok_or_else(|| format_err(no, "header lacks count"))?;
    Ok((dim, count, degree))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs;

    #[test]
    fn round_trip_is_bitwise() {
        let set = PointSet::new(SphereDim::TWO, designs::icosahedron())
            .unwrap()
            .with_degree(5);
        let back = PointSet::parse(&set.to_text()).unwrap();
        assert_eq!(back.set, set);
        assert!(back.max_correction <= KEEP_TOL);
    }

    #[test]
    fn empty_set() {
        let set = PointSet::new(SphereDim::TWO, vec![]).unwrap();
        let text = set.to_text();
        assert_eq!(text, "# dim 2 count 0\n");
        assert!(PointSet::parse(&text).unwrap().set.is_empty());
    }

    #[test]
    fn renormalizes_and_reports() {
        let back = PointSet::parse("# dim 2 count 2\n2 0 0\n\n0 0 1\n").unwrap();
        assert_eq!(back.set.points[0].coords(), &[1.0, 0.0, 0.0]);
        assert_eq!(back.max_correction, 1.0);
    }

    fn line_of(text: &str) -> usize {
        match PointSet::parse(text) {
            Err(Error::Format { line, .. }) => line,
            other => panic!("expected a format error, got {other:?}"),
        }
    }

    #[test]
    fn diagnostics_carry_line_numbers() {
        assert_eq!(line_of(""), 1);
        assert_eq!(line_of("1 0 0\n"), 1);
        assert_eq!(line_of("# dim 2\n"), 1);
        assert_eq!(line_of("# dim 2 count 2 color 3\n"), 1);
        assert_eq!(line_of("# dim 2 count 2\n1 0 0\n0 1\n"), 3);
        assert_eq!(line_of("# dim 2 count 2\n1 0 0\n0 x 1\n"), 3);
        assert_eq!(line_of("# dim 2 count 1\n1 0 0\n0 1 0\n"), 3);
        assert_eq!(line_of("# dim 2 count 1\n0 0 0\n"), 2);
        assert_eq!(line_of("# dim 2 count 3\n1 0 0\n0 1 0\n"), 3);
        assert_eq!(line_of("# dim 2 count 1\nnan 0 1\n"), 2);
    }
}
