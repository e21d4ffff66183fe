use faer::Mat;
use rand::Rng;

use super::polygon::{koch_polygon, Polygon};
use crate::error::{invalid, Error, Result};
use crate::rng::rng_for;

/// Interior samples closer than this to the boundary are redrawn.
pub const BOUNDARY_MARGIN: f64 = 1e-12;

/// Rejection sampling gives up when fewer than this fraction of candidates
/// are accepted.
const MIN_ACCEPTANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    /// Axis-aligned box `[lo, hi]`; covers intervals, rectangles, hypercubes
    /// and space-time boxes.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// `{ x ∈ R² : inner < |x| < outer }`.
    Annulus { inner: f64, outer: f64 },
    /// Koch snowflake of the given level.
    Koch { level: usize, polygon: Polygon },
}

/// Sampled boundary points with optional unit outward normals.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryGroup {
    pub label: String,
    pub points: Mat<f64>,
    pub normals: Option<Mat<f64>>,
}

impl BoundaryGroup {
    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }
}

impl Domain {
    pub fn new_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(invalid("box bounds must be non-empty and of equal length"));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l < h)) {
            return Err(invalid(format!("box needs lo < hi componentwise: {lo:?} {hi:?}")));
        }
        Ok(Domain::Box { lo, hi })
    }

    /// `[lo, hi]^dim`.
    pub fn hypercube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Domain::new_box(vec![lo; dim], vec![hi; dim])
    }

    /// `[0, a] × [0, b]`.
    pub fn rectangle(a: f64, b: f64) -> Result<Self> {
        Domain::new_box(vec![0.0, 0.0], vec![a, b])
    }

    pub fn annulus(inner: f64, outer: f64) -> Result<Self> {
        if !(inner > 0.0 && inner < outer) {
            return Err(invalid(format!("annulus needs 0 < inner < outer, got {inner}, {outer}")));
        }
        Ok(Domain::Annulus { inner, outer })
    }

    pub fn koch(level: usize) -> Result<Self> {
        Ok(Domain::Koch { level, polygon: koch_polygon(level)? })
    }

    pub fn dimension(&self) -> usize {
        match self {
            Domain::Box { lo, .. } => lo.len(),
            Domain::Annulus { .. } | Domain::Koch { .. } => 2,
        }
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Domain::Box { lo, hi } => (lo.clone(), hi.clone()),
            Domain::Annulus { outer, .. } => (vec![-outer, -outer], vec![*outer, *outer]),
            Domain::Koch { polygon, .. } => {
                let (lo, hi) = polygon.bounding_box();
                (lo.to_vec(), hi.to_vec())
            }
        }
    }

    /// Membership test. Points exactly on the boundary may go either way.
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Domain::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| l <= v && v <= h),
            Domain::Annulus { inner, outer } => {
                let r = x[0].hypot(x[1]);
                *inner < r && r < *outer
            }
            Domain::Koch { polygon, .. } => polygon.contains(x),
        }
    }

    /// Distance to the boundary for points inside the domain.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        match self {
            Domain::Box { lo, hi } => {
                x.iter().zip(lo.iter().zip(hi)).map(|(v, (l, h))| (v - l).min(h - v)).fold(f64::INFINITY, f64::min)
            }
            Domain::Annulus { inner, outer } => {
                let r = x[0].hypot(x[1]);
                (r - inner).abs().min((outer - r).abs())
            }
            Domain::Koch { polygon, .. } => polygon.boundary_distance(x),
        }
    }

    /// Labels accepted by [`sample_boundary`].
    pub fn boundary_labels(&self) -> Vec<String> {
        match self {
            Domain::Box { lo, .. } => {
                (0..lo.len()).flat_map(|j| [format!("x{}:lo", j + 1), format!("x{}:hi", j + 1)]).collect()
            }
            Domain::Annulus { .. } => vec!["inner".into(), "outer".into()],
            Domain::Koch { .. } => vec!["boundary".into()],
        }
    }
}

/// `n` i.i.d. uniform interior points, one per row.
///
/// Boxes sample directly; other domains use rejection against the bounding
/// box. Candidates within [`BOUNDARY_MARGIN`] of the boundary are redrawn.
pub fn sample_interior(domain: &Domain, n: usize, seed: u64) -> Result<Mat<f64>> {
    if n == 0 {
        return Err(invalid("sample count must be positive"));
    }
    let (lo, hi) = domain.bounding_box();
    let k = lo.len();
    let mut rng = rng_for(seed);
    let mut out = Mat::<f64>::zeros(n, k);
    let mut x = vec![0.0; k];
    let (mut accepted, mut attempts) = (0usize, 0usize);
    while accepted < n {
        for j in 0..k {
            x[j] = rng.random_range(lo[j]..hi[j]);
        }
        attempts += 1;
        if domain.contains(&x) && domain.boundary_distance(&x) > BOUNDARY_MARGIN {
            for j in 0..k {
                out[(accepted, j)] = x[j];
            }
            accepted += 1;
        }
        if attempts % 10_000 == 0 && (accepted as f64) < MIN_ACCEPTANCE * attempts as f64 {
            return Err(Error::SamplingFailure(format!(
                "acceptance rate {accepted}/{attempts} below {MIN_ACCEPTANCE}"
            )));
        }
    }
    Ok(out)
}

/// `n` boundary points, uniform with respect to boundary measure over the
/// selected components, with unit outward normals.
///
/// `subset` is a comma-separated list of labels from
/// [`Domain::boundary_labels`]; `None` selects the whole boundary.
pub fn sample_boundary(domain: &Domain, n: usize, seed: u64, subset: Option<&str>) -> Result<BoundaryGroup> {
    if n == 0 {
        return Err(invalid("sample count must be positive"));
    }
    let known = domain.boundary_labels();
    let selected: Vec<String> = match subset {
        None | Some("all") => known.clone(),
        Some(s) => {
            let parts: Vec<String> = s.split(',').map(|p| p.trim().to_string()).collect();
            if let Some(bad) = parts.iter().find(|p| !known.contains(p)) {
                return Err(invalid(format!("unknown boundary label `{bad}`; expected one of {known:?}")));
            }
            parts
        }
    };
    let label = subset.unwrap_or("boundary").to_string();
    let k = domain.dimension();
    let mut rng = rng_for(seed);
    let mut points = Mat::<f64>::zeros(n, k);
    let mut normals = Mat::<f64>::zeros(n, k);

    match domain {
        Domain::Box { lo, hi } => {
            // face = (axis, upper side)
            let faces: Vec<(usize, bool)> = selected
                .iter()
                .map(|l| {
                    let (axis, side) = l.split_once(':').unwrap();
                    (axis[1..].parse::<usize>().unwrap() - 1, side == "hi")
                })
                .collect();
            let measures: Vec<f64> =
                faces.iter().map(|&(axis, _)| (0..k).filter(|&j| j != axis).map(|j| hi[j] - lo[j]).product()).collect();
            for r in 0..n {
                let (axis, upper) = faces[pick(&mut rng, &measures)];
                for j in 0..k {
                    points[(r, j)] = if j == axis {
                        if upper {
                            hi[j]
                        } else {
                            lo[j]
                        }
                    } else {
                        rng.random_range(lo[j]..hi[j])
                    };
                }
                normals[(r, axis)] = if upper { 1.0 } else { -1.0 };
            }
        }
        Domain::Annulus { inner, outer } => {
            let circles: Vec<(f64, f64)> =
                selected.iter().map(|l| if l == "outer" { (*outer, 1.0) } else { (*inner, -1.0) }).collect();
            let measures: Vec<f64> = circles.iter().map(|c| c.0).collect();
            for r in 0..n {
                let (radius, sign) = circles[pick(&mut rng, &measures)];
                let theta = rng.random_range(0.0..std::f64::consts::TAU);
                let (s, c) = theta.sin_cos();
                points[(r, 0)] = radius * c;
                points[(r, 1)] = radius * s;
                normals[(r, 0)] = sign * c;
                normals[(r, 1)] = sign * s;
            }
        }
        Domain::Koch { polygon, .. } => {
            let edges: Vec<([f64; 2], [f64; 2])> = polygon.edges().collect();
            let mut cumulative = Vec::with_capacity(edges.len());
            let mut total = 0.0;
            for (a, b) in &edges {
                total += (b[0] - a[0]).hypot(b[1] - a[1]);
                cumulative.push(total);
            }
            for r in 0..n {
                let s = rng.random_range(0.0..total);
                let e = cumulative.partition_point(|&c| c <= s).min(edges.len() - 1);
                let (a, b) = edges[e];
                let t: f64 = rng.random_range(0.0..1.0);
                points[(r, 0)] = a[0] + t * (b[0] - a[0]);
                points[(r, 1)] = a[1] + t * (b[1] - a[1]);
                let len = (b[0] - a[0]).hypot(b[1] - a[1]);
                normals[(r, 0)] = (b[1] - a[1]) / len;
                normals[(r, 1)] = -(b[0] - a[0]) / len;
            }
        }
    }
    Ok(BoundaryGroup { label, points, normals: Some(normals) })
}

fn pick(rng: &mut impl Rng, weights: &[f64]) -> usize {
    if weights.len() == 1 {
        return 0;
    }
    let total: f64 = weights.iter().sum();
    let mut u = rng.random_range(0.0..total);
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::polygon::segment_distance;

    #[test]
    fn constructor_validation() {
        assert!(Domain::new_box(vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(Domain::annulus(2.0, 1.0).is_err());
        assert!(Domain::annulus(0.0, 1.0).is_err());
        assert_eq!(Domain::koch(2).unwrap().dimension(), 2);
        assert_eq!(Domain::hypercube(5, -1.0, 1.0).unwrap().dimension(), 5);
    }

    #[test]
    fn box_containment() {
        let d = Domain::rectangle(1.0, 1.0).unwrap();
        assert!(!d.contains(&[2.0, 0.5]));
        assert!(d.contains(&[0.2, 0.5]));
    }

    #[test]
    fn box_interior_is_deterministic() {
        let d = Domain::rectangle(1.0, 1.0).unwrap();
        let a = sample_interior(&d, 4, 9).unwrap();
        let b = sample_interior(&d, 4, 9).unwrap();
        assert_eq!(a, b);
        for r in 0..4 {
            assert!(d.contains(&[a[(r, 0)], a[(r, 1)]]));
        }
        assert_ne!(a, sample_interior(&d, 4, 10).unwrap());
    }

    #[test]
    fn annulus_interior() {
        let d = Domain::annulus(1.0, 2.0).unwrap();
        let x = sample_interior(&d, 1000, 3).unwrap();
        for r in 0..1000 {
            let rad = x[(r, 0)].hypot(x[(r, 1)]);
            assert!(1.0 < rad && rad < 2.0);
        }
    }

    #[test]
    fn annulus_outer_boundary() {
        let d = Domain::annulus(1.0, 2.0).unwrap();
        let g = sample_boundary(&d, 3, 1, Some("outer")).unwrap();
        let n = g.normals.as_ref().unwrap();
        for r in 0..3 {
            let (x, y) = (g.points[(r, 0)], g.points[(r, 1)]);
            assert!((x.hypot(y) - 2.0).abs() < 1e-14);
            assert!((n[(r, 0)] - x / 2.0).abs() < 1e-15);
            assert!((n[(r, 1)] - y / 2.0).abs() < 1e-15);
        }
        let g = sample_boundary(&d, 3, 1, Some("inner")).unwrap();
        let n = g.normals.as_ref().unwrap();
        for r in 0..3 {
            assert!((n[(r, 0)] + g.points[(r, 0)]).abs() < 1e-15);
        }
    }

    #[test]
    fn unknown_label_is_rejected() {
        let d = Domain::annulus(1.0, 2.0).unwrap();
        assert!(matches!(sample_boundary(&d, 3, 1, Some("middle")), Err(Error::InvalidArgument(_))));
        let b = Domain::rectangle(1.0, 1.0).unwrap();
        assert!(sample_boundary(&b, 3, 1, Some("x3:lo")).is_err());
    }

    #[test]
    fn square_faces_share_points() {
        let d = Domain::rectangle(1.0, 1.0).unwrap();
        let g = sample_boundary(&d, 400, 2024, None).unwrap();
        let mut counts = [0usize; 4];
        for r in 0..400 {
            let (x, y) = (g.points[(r, 0)], g.points[(r, 1)]);
            let face = if x == 0.0 {
                0
            } else if x == 1.0 {
                1
            } else if y == 0.0 {
                2
            } else {
                3
            };
            counts[face] += 1;
        }
        // binomial(400, 1/4): sd ≈ 8.7
        for c in counts {
            assert!((c as f64 - 100.0).abs() < 35.0, "{counts:?}");
        }
    }

    #[test]
    fn koch_boundary_points_lie_on_edges() {
        let d = Domain::koch(5).unwrap();
        let Domain::Koch { polygon, .. } = &d else { unreachable!() };
        let g = sample_boundary(&d, 3000, 8, None).unwrap();
        let normals = g.normals.as_ref().unwrap();
        for r in 0..3000 {
            let p = [g.points[(r, 0)], g.points[(r, 1)]];
            let dist = polygon.edges().map(|(a, b)| segment_distance(a, b, p)).fold(f64::INFINITY, f64::min);
            assert!(dist < 1e-12);
            assert!((normals[(r, 0)].hypot(normals[(r, 1)]) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn koch_interior_area_fraction() {
        // Fraction of samples inside the inscribed disk of the base triangle
        // (radius 0.25) against the analytic area ratio.
        let d = Domain::koch(5).unwrap();
        let Domain::Koch { polygon, .. } = &d else { unreachable!() };
        let n = 10_000;
        let x = sample_interior(&d, n, 77).unwrap();
        let hits = (0..n).filter(|&r| (x[(r, 0)] - 0.5).hypot(x[(r, 1)] - 0.5) < 0.25).count();
        let p = std::f64::consts::PI * 0.0625 / polygon.area();
        let frac = hits as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((frac - p).abs() < 3.0 * se, "{frac} vs {p}");
        for r in 0..n {
            assert!(d.contains(&[x[(r, 0)], x[(r, 1)]]));
        }
    }

    #[test]
    fn hypercube_boundary_is_on_faces() {
        let d = Domain::hypercube(5, -1.0, 1.0).unwrap();
        let g = sample_boundary(&d, 200, 4, None).unwrap();
        for r in 0..200 {
            let on_face = (0..5).filter(|&j| g.points[(r, j)].abs() == 1.0).count();
            assert_eq!(on_face, 1);
        }
    }

    #[test]
    fn one_dimensional_box_boundary_is_endpoints() {
        let d = Domain::new_box(vec![0.0], vec![1.0]).unwrap();
        let g = sample_boundary(&d, 10, 4, None).unwrap();
        let n = g.normals.unwrap();
        for r in 0..10 {
            let x = g.points[(r, 0)];
            assert!(x == 0.0 || x == 1.0);
            assert_eq!(n[(r, 0)], if x == 0.0 { -1.0 } else { 1.0 });
        }
    }
}
