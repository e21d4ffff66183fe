use std::io::Write;

use crate::error::{Error, Result};

/// Largest Koch level accepted (3·4⁸ = 196 608 edges).
pub const MAX_KOCH_LEVEL: usize = 8;

/// Closed counter-clockwise polygon; the last vertex connects back to the
/// first.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<[f64; 2]>,
}

impl Polygon {
    pub fn new(vertices: Vec<[f64; 2]>) -> Self {
        Polygon { vertices }
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = ([f64; 2], [f64; 2])> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Signed shoelace area (positive for counter-clockwise).
    pub fn area(&self) -> f64 {
        0.5 * self.edges().map(|(p, q)| p[0] * q[1] - q[0] * p[1]).sum::<f64>()
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(p, q)| (q[0] - p[0]).hypot(q[1] - p[1])).sum()
    }

    /// Even-odd ray crossing test with a ray towards +x.
    pub fn contains(&self, x: &[f64]) -> bool {
        let (px, py) = (x[0], x[1]);
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a[1] > py) != (b[1] > py) {
                let cross = a[0] + (py - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
                if px < cross {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Euclidean distance from `x` to the nearest edge.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        self.edges().map(|(a, b)| segment_distance(a, b, [x[0], x[1]])).fold(f64::INFINITY, f64::min)
    }

    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &self.vertices {
            for j in 0..2 {
                lo[j] = lo[j].min(v[j]);
                hi[j] = hi[j].max(v[j]);
            }
        }
        (lo, hi)
    }

    /// Writes the vertex list as a two-column `x1,x2` CSV.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "x1,x2")?;
        for v in &self.vertices {
            writeln!(out, "{},{}", v[0], v[1])?;
        }
        Ok(())
    }
}

pub(crate) fn segment_distance(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > 0.0 { (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (a[0] + t * d[0] - p[0]).hypot(a[1] + t * d[1] - p[1])
}

/// Koch snowflake after `level` refinements of an equilateral triangle
/// centred at (0.5, 0.5) with circumradius 0.5 and one vertex pointing up.
pub fn koch_polygon(level: usize) -> Result<Polygon> {
    if level > MAX_KOCH_LEVEL {
        return Err(Error::ResourceLimit(format!("koch level {level} exceeds the maximum of {MAX_KOCH_LEVEL}")));
    }
    let (cx, cy, r) = (0.5, 0.5, 0.5);
    let mut vertices: Vec<[f64; 2]> = (0..3)
        .map(|k| {
            let theta = std::f64::consts::FRAC_PI_2 + k as f64 * 2.0 * std::f64::consts::PI / 3.0;
            [cx + r * theta.cos(), cy + r * theta.sin()]
        })
        .collect();
    let (s60, c60) = (3.0_f64.sqrt() / 2.0, 0.5);
    for _ in 0..level {
        let n = vertices.len();
        let mut next = Vec::with_capacity(4 * n);
        for i in 0..n {
            let p = vertices[i];
            let q = vertices[(i + 1) % n];
            let d = [(q[0] - p[0]) / 3.0, (q[1] - p[1]) / 3.0];
            let a = [p[0] + d[0], p[1] + d[1]];
            let b = [p[0] + 2.0 * d[0], p[1] + 2.0 * d[1]];
            // Outward is to the right of a counter-clockwise edge: rotate by -60°.
            let apex = [a[0] + c60 * d[0] + s60 * d[1], a[1] - s60 * d[0] + c60 * d[1]];
            next.extend_from_slice(&[p, a, apex, b]);
        }
        vertices = next;
    }
    Ok(Polygon { vertices })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Winding number by summing signed angles.
    fn winding(poly: &Polygon, x: [f64; 2]) -> i32 {
        let total: f64 = poly
            .edges()
            .map(|(a, b)| {
                let u = [a[0] - x[0], a[1] - x[1]];
                let v = [b[0] - x[0], b[1] - x[1]];
                (u[0] * v[1] - u[1] * v[0]).atan2(u[0] * v[0] + u[1] * v[1])
            })
            .sum();
        (total / (2.0 * std::f64::consts::PI)).round() as i32
    }

    fn closed_form_area(level: usize) -> f64 {
        let a0 = 3.0 * 3.0_f64.sqrt() / 4.0 * 0.25;
        let series: f64 = (1..=level).map(|i| (4.0_f64 / 9.0).powi(i as i32 - 1)).sum();
        a0 * (1.0 + series / 3.0)
    }

    #[test]
    fn edge_counts() {
        assert_eq!(koch_polygon(0).unwrap().edge_count(), 3);
        assert_eq!(koch_polygon(1).unwrap().edge_count(), 12);
        assert_eq!(koch_polygon(5).unwrap().edge_count(), 3072);
        assert!(matches!(koch_polygon(9), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn shoelace_matches_series() {
        for level in 0..=6 {
            let poly = koch_polygon(level).unwrap();
            let expected = closed_form_area(level);
            assert!((poly.area() - expected).abs() < 1e-12, "level {level}");
        }
    }

    #[test]
    fn centroid_is_inside() {
        let poly = koch_polygon(5).unwrap();
        assert!(poly.contains(&[0.5, 0.5]));
        assert!(!poly.contains(&[2.0, 0.5]));
    }

    #[test]
    fn crossing_rule_agrees_with_winding_number() {
        use rand::Rng;
        let poly = koch_polygon(3).unwrap();
        let mut rng = crate::rng::rng_for(17);
        let mut checked = 0;
        for _ in 0..1000 {
            let x = [rng.random_range(-0.1..1.1), rng.random_range(-0.1..1.1)];
            if poly.boundary_distance(&x) <= 1e-9 {
                continue;
            }
            assert_eq!(poly.contains(&x), winding(&poly, x) != 0, "{x:?}");
            checked += 1;
        }
        assert!(checked > 990);
    }

    #[test]
    fn csv_export() {
        let mut buf = Vec::new();
        koch_polygon(0).unwrap().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("x1,x2\n"));
    }
}
