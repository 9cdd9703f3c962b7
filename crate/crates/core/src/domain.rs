//! Planar computational domains: star-shaped regions given by a truncated
//! Fourier radius `r(theta) = R (1 + sum a_k cos k theta + sum b_k sin k theta)`
//! and simple polygons. Star domains carry exact boundary analytics (normal,
//! curvature, arc length), which the shape-derivative machinery relies on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Serializable domain description.
///
/// JSON forms:
/// `{"kind":"star","R":1.0,"cos":[0.0,0.0,0.3],"sin":[]}` where `cos[k-1]`
/// is the coefficient of `cos(k theta)`, and
/// `{"kind":"polygon","vertices":[[x,y],...]}` with counterclockwise simple
/// vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DomainSpec {
    Star {
        #[serde(rename = "R")]
        base_radius: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
    Polygon { vertices: Vec<[f64; 2]> },
}

impl DomainSpec {
    /// Disk of radius `r` centered at the origin.
    pub fn disk(r: f64) -> Self {
        DomainSpec::Star {
            base_radius: r,
            cos: Vec::new(),
            sin: Vec::new(),
        }
    }

    /// Star domain from base radius and Fourier coefficients.
    pub fn star(base_radius: f64, cos: Vec<f64>, sin: Vec<f64>) -> Self {
        DomainSpec::Star {
            base_radius,
            cos,
            sin,
        }
    }

    /// Axis-aligned ellipse with semi-axes `a`, `b`, represented as a star
    /// domain by the Fourier expansion of
    /// `r(theta) = a b / sqrt(b^2 cos^2 + a^2 sin^2)`.
    ///
    /// Coefficients decay like `q^{k/2}` with `q = (a-b)/(a+b)`, so the
    /// truncation (relative 1e-13) is far below any mesh scale for aspect
    /// ratios up to roughly 4.5; all boundary analytics then refer to the
    /// represented curve exactly.
    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a <= 0.0 || b <= 0.0 {
            return Err(Error::domain(format!("bad ellipse axes a={a}, b={b}")));
        }
        let radius = |theta: f64| {
            let (s, c) = theta.sin_cos();
            a * b / (b * b * c * c + a * a * s * s).sqrt()
        };
        // Trapezoid rule on a periodic integrand is spectrally accurate.
        let n = 4096usize;
        let mut mean = 0.0;
        for i in 0..n {
            mean += radius(2.0 * std::f64::consts::PI * i as f64 / n as f64);
        }
        mean /= n as f64;
        // Odd harmonics vanish by symmetry, so decay must be judged on the
        // full tail, not on the last coefficient alone.
        let k_max = 128usize;
        let mut cos_coeffs = Vec::new();
        for k in 1..=k_max {
            let mut ck = 0.0;
            for i in 0..n {
                let theta = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                ck += radius(theta) * (k as f64 * theta).cos();
            }
            ck *= 2.0 / n as f64;
            cos_coeffs.push(ck / mean);
        }
        if cos_coeffs[k_max - 2].abs().max(cos_coeffs[k_max - 1].abs()) > 1e-12 {
            return Err(Error::domain(format!(
                "ellipse a={a}, b={b} too eccentric for the Fourier representation"
            )));
        }
        while let Some(last) = cos_coeffs.last() {
            if last.abs() < 1e-13 {
                cos_coeffs.pop();
            } else {
                break;
            }
        }
        let spec = DomainSpec::Star {
            base_radius: mean,
            cos: cos_coeffs,
            sin: Vec::new(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Validate geometric well-posedness: positive radius for stars;
    /// counterclockwise simple polygons with at least three vertices.
    pub fn validate(&self) -> Result<()> {
        match self {
            DomainSpec::Star {
                base_radius,
                cos,
                sin,
            } => {
                if !base_radius.is_finite() || *base_radius <= 0.0 {
                    return Err(Error::domain(format!("base radius {base_radius} invalid")));
                }
                if cos.iter().chain(sin.iter()).any(|c| !c.is_finite()) {
                    return Err(Error::domain("non-finite Fourier coefficient".to_string()));
                }
                let shape = StarShape::from_spec(self).expect("is a star");
                for i in 0..4096 {
                    let theta = 2.0 * std::f64::consts::PI * i as f64 / 4096.0;
                    let r = shape.radius(theta);
                    if r <= 1e-9 * base_radius {
                        return Err(Error::domain(format!(
                            "radius nonpositive near theta = {theta:.4}: r = {r:.3e}"
                        )));
                    }
                }
                Ok(())
            }
            DomainSpec::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(Error::domain(format!(
                        "polygon needs >= 3 vertices, got {}",
                        vertices.len()
                    )));
                }
                if vertices.iter().flatten().any(|c| !c.is_finite()) {
                    return Err(Error::domain("non-finite polygon vertex".to_string()));
                }
                if polygon_signed_area(vertices) <= 0.0 {
                    return Err(Error::domain(
                        "polygon must be counterclockwise with positive area".to_string(),
                    ));
                }
                if !polygon_is_simple(vertices) {
                    return Err(Error::domain("polygon is self-intersecting".to_string()));
                }
                Ok(())
            }
        }
    }

    /// Exact area of the represented domain.
    pub fn area(&self) -> f64 {
        match self {
            DomainSpec::Star { .. } => {
                let shape = StarShape::from_spec(self).expect("is a star");
                // 1/2 integral of r^2 d theta, periodic trapezoid.
                let n = 16384usize;
                let mut sum = 0.0;
                for i in 0..n {
                    let theta = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                    let r = shape.radius(theta);
                    sum += r * r;
                }
                0.5 * sum * 2.0 * std::f64::consts::PI / n as f64
            }
            DomainSpec::Polygon { vertices } => polygon_signed_area(vertices),
        }
    }

    /// Exact perimeter of the represented domain.
    pub fn perimeter(&self) -> f64 {
        match self {
            DomainSpec::Star { .. } => {
                let shape = StarShape::from_spec(self).expect("is a star");
                let n = 16384usize;
                let mut sum = 0.0;
                for i in 0..n {
                    let theta = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                    sum += shape.speed(theta);
                }
                sum * 2.0 * std::f64::consts::PI / n as f64
            }
            DomainSpec::Polygon { vertices } => {
                let m = vertices.len();
                (0..m)
                    .map(|i| dist(vertices[i], vertices[(i + 1) % m]))
                    .sum()
            }
        }
    }

    /// Strict interior test.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        match self {
            DomainSpec::Star { .. } => {
                let shape = StarShape::from_spec(self).expect("is a star");
                let rho = (p[0] * p[0] + p[1] * p[1]).sqrt();
                rho < shape.radius(p[1].atan2(p[0]))
            }
            DomainSpec::Polygon { vertices } => point_in_polygon(p, vertices),
        }
    }

    /// Distance from `p` to the boundary, up to the polyline approximation
    /// used for stars (2048 segments; error is quadratic in the segment
    /// length and negligible at mesh scales).
    pub fn boundary_distance(&self, p: [f64; 2]) -> f64 {
        let poly: Vec<[f64; 2]> = match self {
            DomainSpec::Star { .. } => {
                let shape = StarShape::from_spec(self).expect("is a star");
                (0..2048)
                    .map(|i| shape.point(2.0 * std::f64::consts::PI * i as f64 / 2048.0))
                    .collect()
            }
            DomainSpec::Polygon { vertices } => vertices.clone(),
        };
        let m = poly.len();
        (0..m)
            .map(|i| point_segment_distance(p, poly[i], poly[(i + 1) % m]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Axis-aligned bounding box as `([xmin, ymin], [xmax, ymax])`.
    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        let pts: Vec<[f64; 2]> = match self {
            DomainSpec::Star { .. } => {
                let shape = StarShape::from_spec(self).expect("is a star");
                (0..1024)
                    .map(|i| shape.point(2.0 * std::f64::consts::PI * i as f64 / 1024.0))
                    .collect()
            }
            DomainSpec::Polygon { vertices } => vertices.clone(),
        };
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in pts {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        (lo, hi)
    }
}

/// Evaluated star-shape analytics.
#[derive(Debug, Clone)]
pub struct StarShape {
    pub base: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl StarShape {
    pub fn from_spec(spec: &DomainSpec) -> Option<Self> {
        match spec {
            DomainSpec::Star {
                base_radius,
                cos,
                sin,
            } => Some(StarShape {
                base: *base_radius,
                cos: cos.clone(),
                sin: sin.clone(),
            }),
            DomainSpec::Polygon { .. } => None,
        }
    }

    pub fn radius(&self, theta: f64) -> f64 {
        let mut r = 1.0;
        for (k, a) in self.cos.iter().enumerate() {
            r += a * ((k + 1) as f64 * theta).cos();
        }
        for (k, b) in self.sin.iter().enumerate() {
            r += b * ((k + 1) as f64 * theta).sin();
        }
        self.base * r
    }

    pub fn radius_prime(&self, theta: f64) -> f64 {
        let mut d = 0.0;
        for (k, a) in self.cos.iter().enumerate() {
            let kk = (k + 1) as f64;
            d -= a * kk * (kk * theta).sin();
        }
        for (k, b) in self.sin.iter().enumerate() {
            let kk = (k + 1) as f64;
            d += b * kk * (kk * theta).cos();
        }
        self.base * d
    }

    pub fn radius_second(&self, theta: f64) -> f64 {
        let mut d = 0.0;
        for (k, a) in self.cos.iter().enumerate() {
            let kk = (k + 1) as f64;
            d -= a * kk * kk * (kk * theta).cos();
        }
        for (k, b) in self.sin.iter().enumerate() {
            let kk = (k + 1) as f64;
            d -= b * kk * kk * (kk * theta).sin();
        }
        self.base * d
    }

    pub fn point(&self, theta: f64) -> [f64; 2] {
        let r = self.radius(theta);
        [r * theta.cos(), r * theta.sin()]
    }

    /// `|dp/dtheta| = sqrt(r^2 + r'^2)`.
    pub fn speed(&self, theta: f64) -> f64 {
        let r = self.radius(theta);
        let rp = self.radius_prime(theta);
        (r * r + rp * rp).sqrt()
    }

    /// Unit outward normal at `theta`.
    pub fn outward_normal(&self, theta: f64) -> [f64; 2] {
        let r = self.radius(theta);
        let rp = self.radius_prime(theta);
        let s = (r * r + rp * rp).sqrt();
        let (sin_t, cos_t) = theta.sin_cos();
        [
            (r * cos_t + rp * sin_t) / s,
            (r * sin_t - rp * cos_t) / s,
        ]
    }

    /// Signed curvature (positive for convex arcs) of the boundary at `theta`.
    pub fn curvature(&self, theta: f64) -> f64 {
        let r = self.radius(theta);
        let rp = self.radius_prime(theta);
        let rpp = self.radius_second(theta);
        (r * r + 2.0 * rp * rp - r * rpp) / (r * r + rp * rp).powf(1.5)
    }

    /// Cosine of the angle between the radial direction and the outward
    /// normal: `e_r . nu = r / sqrt(r^2 + r'^2)`.
    pub fn radial_normal_cos(&self, theta: f64) -> f64 {
        let r = self.radius(theta);
        let rp = self.radius_prime(theta);
        r / (r * r + rp * rp).sqrt()
    }

    /// Partition `[0, 2 pi)` into `m` boundary samples equidistributed in
    /// arc length, starting at `theta = 0`.
    ///
    /// A cumulative fine-grid table gives first guesses, then each sample is
    /// polished by Newton iteration on `s(theta) = j P / m` with local
    /// Simpson corrections, so equidistribution holds to about 1e-12.
    pub fn arc_equidistributed_thetas(&self, m: usize) -> Vec<f64> {
        assert!(m >= 3, "need at least 3 boundary samples");
        let two_pi = 2.0 * std::f64::consts::PI;
        let n = 32768usize;
        let dt = two_pi / n as f64;
        // Cumulative arc length with per-cell 2-point Gauss quadrature; the
        // table is then accurate to roughly machine precision, which the
        // Newton polish below depends on.
        let gauss_off = dt / (2.0 * 3.0f64.sqrt());
        let mut cum = Vec::with_capacity(n + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        for i in 0..n {
            let mid = (i as f64 + 0.5) * dt;
            acc += 0.5 * dt * (self.speed(mid - gauss_off) + self.speed(mid + gauss_off));
            cum.push(acc);
        }
        let total = acc;
        let local_arc = |a: f64, b: f64| crate::quad::simpson(|t| self.speed(t), a, b, 8);
        let mut out = Vec::with_capacity(m);
        out.push(0.0);
        let mut idx = 0usize;
        for j in 1..m {
            let target = total * j as f64 / m as f64;
            while idx + 1 < n && cum[idx + 1] < target {
                idx += 1;
            }
            let frac = (target - cum[idx]) / (cum[idx + 1] - cum[idx]);
            let mut theta = (idx as f64 + frac) * dt;
            let anchor_theta = idx as f64 * dt;
            for _ in 0..3 {
                let s_here = cum[idx] + local_arc(anchor_theta, theta);
                theta -= (s_here - target) / self.speed(theta);
            }
            out.push(theta);
        }
        out
    }
}

pub(crate) fn polygon_signed_area(vertices: &[[f64; 2]]) -> f64 {
    let m = vertices.len();
    let mut acc = 0.0;
    for i in 0..m {
        let a = vertices[i];
        let b = vertices[(i + 1) % m];
        acc += a[0] * b[1] - b[0] * a[1];
    }
    0.5 * acc
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len_sq = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len_sq > 0.0 {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len_sq).clamp(0.0, 1.0)
    } else {
        0.0
    };
    dist(p, [a[0] + t * ab[0], a[1] + t * ab[1]])
}

fn point_in_polygon(p: [f64; 2], vertices: &[[f64; 2]]) -> bool {
    // Even-odd crossing count.
    let m = vertices.len();
    let mut inside = false;
    for i in 0..m {
        let a = vertices[i];
        let b = vertices[(i + 1) % m];
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x_cross = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

fn segments_properly_intersect(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let orient = |p: [f64; 2], q: [f64; 2], r: [f64; 2]| {
        (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    };
    let d1 = orient(a, b, c);
    let d2 = orient(a, b, d);
    let d3 = orient(c, d, a);
    let d4 = orient(c, d, b);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

fn polygon_is_simple(vertices: &[[f64; 2]]) -> bool {
    let m = vertices.len();
    for i in 0..m {
        for j in (i + 1)..m {
            // Skip adjacent edges (shared endpoint).
            if j == i || (j + 1) % m == i || (i + 1) % m == j {
                continue;
            }
            if segments_properly_intersect(
                vertices[i],
                vertices[(i + 1) % m],
                vertices[j],
                vertices[(j + 1) % m],
            ) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn serde_round_trip_star() {
        let spec = DomainSpec::star(1.0, vec![0.0, 0.0, 0.3], vec![0.1]);
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("\"kind\":\"star\""), "{json}");
        assert!(json.contains("\"R\":1.0"), "{json}");
        let back: DomainSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn serde_round_trip_polygon() {
        let spec = DomainSpec::Polygon {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        };
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("\"kind\":\"polygon\""), "{json}");
        let back: DomainSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn parses_external_star_json() {
        let json = r#"{"kind":"star","R":2.0,"cos":[0.1],"sin":[]}"#;
        let spec: DomainSpec = serde_json::from_str(json).unwrap();
        spec.validate().unwrap();
        assert_relative_eq!(
            StarShape::from_spec(&spec).unwrap().radius(0.0),
            2.2,
            max_relative = 1e-15
        );
    }

    #[test]
    fn disk_measures() {
        let d = DomainSpec::disk(2.0);
        d.validate().unwrap();
        assert_relative_eq!(d.area(), 4.0 * std::f64::consts::PI, max_relative = 1e-12);
        assert_relative_eq!(
            d.perimeter(),
            4.0 * std::f64::consts::PI,
            max_relative = 1e-12
        );
    }

    #[test]
    fn ellipse_measures() {
        let e = DomainSpec::ellipse(2.0, 1.0).unwrap();
        assert_relative_eq!(e.area(), 2.0 * std::f64::consts::PI, max_relative = 1e-10);
        // 4 a E(e) for a=2, b=1.
        assert_relative_eq!(e.perimeter(), 9.688448220547675, max_relative = 1e-9);
        let shape = StarShape::from_spec(&e).unwrap();
        assert_relative_eq!(shape.radius(0.0), 2.0, max_relative = 1e-11);
        assert_relative_eq!(
            shape.radius(std::f64::consts::FRAC_PI_2),
            1.0,
            max_relative = 1e-11
        );
    }

    #[test]
    fn circle_boundary_analytics() {
        let shape = StarShape::from_spec(&DomainSpec::disk(2.0)).unwrap();
        for &theta in &[0.0, 0.7, 2.0, 4.5] {
            assert_relative_eq!(shape.curvature(theta), 0.5, max_relative = 1e-10);
            let n = shape.outward_normal(theta);
            assert_relative_eq!(n[0], theta.cos(), epsilon = 1e-12);
            assert_relative_eq!(n[1], theta.sin(), epsilon = 1e-12);
            assert_relative_eq!(shape.radial_normal_cos(theta), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn gauss_bonnet_on_star() {
        // integral of kappa dS = 2 pi for any smooth simple closed curve.
        let spec = DomainSpec::star(1.0, vec![0.0, 0.0, 0.3], vec![]);
        let shape = StarShape::from_spec(&spec).unwrap();
        let m = 512;
        let thetas = shape.arc_equidistributed_thetas(m);
        let w = spec.perimeter() / m as f64;
        let total: f64 = thetas.iter().map(|&t| shape.curvature(t) * w).sum();
        assert_relative_eq!(total, 2.0 * std::f64::consts::PI, max_relative = 1e-6);
    }

    #[test]
    fn arc_equidistribution() {
        let spec = DomainSpec::star(1.0, vec![0.0, 0.2, 0.1], vec![0.05]);
        let shape = StarShape::from_spec(&spec).unwrap();
        let m = 64;
        let thetas = shape.arc_equidistributed_thetas(m);
        let target = spec.perimeter() / m as f64;
        for i in 0..m {
            let a = thetas[i];
            let b = if i + 1 < m {
                thetas[i + 1]
            } else {
                2.0 * std::f64::consts::PI
            };
            let arc = crate::quad::simpson(|t| shape.speed(t), a, b, 64);
            assert_relative_eq!(arc, target, max_relative = 1e-8);
        }
    }

    #[test]
    fn circle_equidistribution_is_uniform() {
        let shape = StarShape::from_spec(&DomainSpec::disk(1.0)).unwrap();
        let thetas = shape.arc_equidistributed_thetas(64);
        for (j, &t) in thetas.iter().enumerate() {
            assert_relative_eq!(
                t,
                2.0 * std::f64::consts::PI * j as f64 / 64.0,
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn containment() {
        let star = DomainSpec::star(1.0, vec![0.0, 0.0, 0.3], vec![]);
        assert!(star.contains([0.0, 0.0]));
        assert!(star.contains([1.2, 0.0])); // r(0) = 1.3
        assert!(!star.contains([1.4, 0.0]));
        let square = DomainSpec::Polygon {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        };
        assert!(square.contains([0.5, 0.5]));
        assert!(!square.contains([1.5, 0.5]));
    }

    #[test]
    fn validation_rejects_degenerate_inputs() {
        assert!(DomainSpec::star(1.0, vec![1.5], vec![]).validate().is_err());
        assert!(DomainSpec::star(-1.0, vec![], vec![]).validate().is_err());
        assert!(DomainSpec::Polygon {
            vertices: vec![[0.0, 0.0], [1.0, 0.0]]
        }
        .validate()
        .is_err());
        // Clockwise square.
        assert!(DomainSpec::Polygon {
            vertices: vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]
        }
        .validate()
        .is_err());
        // Bowtie.
        assert!(DomainSpec::Polygon {
            vertices: vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]
        }
        .validate()
        .is_err());
    }

    #[test]
    fn boundary_distance_disk() {
        let d = DomainSpec::disk(1.0);
        assert_relative_eq!(d.boundary_distance([0.0, 0.0]), 1.0, max_relative = 1e-4);
        assert_relative_eq!(d.boundary_distance([0.5, 0.0]), 0.5, max_relative = 1e-4);
    }

    proptest! {
        #[test]
        fn random_mild_stars_are_valid(
            a1 in -0.05f64..0.05, a2 in -0.05f64..0.05,
            a3 in -0.05f64..0.05, b1 in -0.05f64..0.05,
        ) {
            let spec = DomainSpec::star(1.0, vec![a1, a2, a3], vec![b1]);
            spec.validate().unwrap();
            let area = spec.area();
            let per = spec.perimeter();
            prop_assert!(area > 0.0);
            // Isoperimetric inequality with a tiny quadrature allowance.
            prop_assert!(per * per >= 4.0 * std::f64::consts::PI * area * (1.0 - 1e-9));
        }
    }
}
