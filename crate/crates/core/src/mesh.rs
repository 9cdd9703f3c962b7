//! Unstructured triangle meshes for star-shaped and polygonal domains.
//!
//! Generation pipeline: boundary nodes equidistributed on the analytic
//! boundary, interior nodes on an origin-anchored hexagonal lattice clipped
//! away from the boundary, Bowyer-Watson Delaunay triangulation, centroid
//! filtering against the domain, and a couple of Laplacian smoothing /
//! retriangulation cycles. Everything is deterministic: the only "random"
//! ingredient is a hash-based microscopic jitter on interior lattice points
//! that breaks exact cocircularity (lattice rectangles are cyclic quads).
//!
//! The mesh is validated loudly: positive triangle areas that partition the
//! boundary polygon exactly, a single closed boundary loop visiting the
//! boundary nodes consecutively, and a minimum-angle bound.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::domain::{polygon_signed_area, DomainSpec, StarShape};
use crate::error::{Error, Result};

const MIN_ANGLE_DEG: f64 = 20.0;

/// Triangle mesh with boundary structure.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    /// Node coordinates; boundary nodes come first, in loop order.
    pub nodes: Vec<[f64; 2]>,
    /// Triangles as CCW index triples.
    pub triangles: Vec<[usize; 3]>,
    /// Boundary node indices in CCW loop order (currently `0..b`).
    pub boundary_loop: Vec<usize>,
    /// Boundary edges `[i, j]` following the loop orientation.
    pub boundary_edges: Vec<[usize; 2]>,
    /// For star domains, the boundary parameter `theta` of each boundary
    /// node, aligned with `boundary_loop`.
    pub boundary_params: Option<Vec<f64>>,
    /// Target mesh size used to generate the mesh.
    pub h: f64,
    /// Triangle areas (all positive).
    pub areas: Vec<f64>,
}

/// Options for [`triangulate_with`].
#[derive(Debug, Clone, Default)]
pub struct MeshOptions {
    /// Fix the number of boundary nodes instead of deriving it from `h`.
    /// Used by finite-difference oracles to keep meshes of perturbed domains
    /// combinatorially comparable. Star domains only.
    pub boundary_count: Option<usize>,
}

impl Mesh {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        node < self.boundary_loop.len()
    }

    /// Total mesh area (sum of triangle areas).
    pub fn area(&self) -> f64 {
        self.areas.iter().sum()
    }

    /// Boundary polyline length.
    pub fn perimeter(&self) -> f64 {
        self.boundary_edges
            .iter()
            .map(|e| {
                let a = self.nodes[e[0]];
                let b = self.nodes[e[1]];
                ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
            })
            .sum()
    }

    /// Smallest interior angle over all triangles, in degrees.
    pub fn min_angle_deg(&self) -> f64 {
        let mut worst = f64::INFINITY;
        for t in &self.triangles {
            let p = [self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]];
            for i in 0..3 {
                let a = p[i];
                let b = p[(i + 1) % 3];
                let c = p[(i + 2) % 3];
                let u = [b[0] - a[0], b[1] - a[1]];
                let v = [c[0] - a[0], c[1] - a[1]];
                let dot = u[0] * v[0] + u[1] * v[1];
                let cross = u[0] * v[1] - u[1] * v[0];
                worst = worst.min(cross.atan2(dot).abs());
            }
        }
        worst.to_degrees()
    }

    /// Locate the triangle containing `p` and its barycentric coordinates,
    /// accepting points within a small tolerance of an edge.
    pub fn locate(&self, p: [f64; 2]) -> Option<(usize, [f64; 3])> {
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for (ti, t) in self.triangles.iter().enumerate() {
            let a = self.nodes[t[0]];
            let b = self.nodes[t[1]];
            let c = self.nodes[t[2]];
            let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
            if det.abs() < 1e-30 {
                continue;
            }
            let l0 = ((b[0] - p[0]) * (c[1] - p[1]) - (c[0] - p[0]) * (b[1] - p[1])) / det;
            let l1 = ((c[0] - p[0]) * (a[1] - p[1]) - (a[0] - p[0]) * (c[1] - p[1])) / det;
            let l2 = 1.0 - l0 - l1;
            let worst = l0.min(l1).min(l2);
            if worst >= 0.0 {
                return Some((ti, [l0, l1, l2]));
            }
            match best {
                Some((_, _, w)) if w >= worst => {}
                _ => best = Some((ti, [l0, l1, l2], worst)),
            }
        }
        // Accept a near miss (point within ~1e-9 of an edge).
        match best {
            Some((ti, l, w)) if w > -1e-9 => Some((ti, l)),
            _ => None,
        }
    }

    /// Triangles adjacent to each node.
    pub fn node_triangles(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (ti, t) in self.triangles.iter().enumerate() {
            for &v in t {
                adj[v].push(ti);
            }
        }
        adj
    }

    /// Node-to-node adjacency (undirected, sorted).
    pub fn node_neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for t in &self.triangles {
            for i in 0..3 {
                let a = t[i];
                let b = t[(i + 1) % 3];
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    /// Serialize in the plain text exchange format:
    /// a header `"{n} nodes {t} triangles {b} boundary-edges"`, then node
    /// coordinate lines, triangle index triples, and boundary edge pairs.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "{} nodes {} triangles {} boundary-edges",
            self.nodes.len(),
            self.triangles.len(),
            self.boundary_edges.len()
        )
        .unwrap();
        for p in &self.nodes {
            writeln!(out, "{:.17e} {:.17e}", p[0], p[1]).unwrap();
        }
        for t in &self.triangles {
            writeln!(out, "{} {} {}", t[0], t[1], t[2]).unwrap();
        }
        for e in &self.boundary_edges {
            writeln!(out, "{} {}", e[0], e[1]).unwrap();
        }
        out
    }

    /// Parse the text exchange format and rebuild derived data. The boundary
    /// edge list must form a single closed loop over nodes `0..b`.
    pub fn from_text(text: &str) -> Result<Mesh> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::format("empty mesh file".to_string()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 6
            || fields[1] != "nodes"
            || fields[3] != "triangles"
            || fields[5] != "boundary-edges"
        {
            return Err(Error::format(format!("bad mesh header: {header:?}")));
        }
        let n: usize = fields[0]
            .parse()
            .map_err(|_| Error::format(format!("bad node count {:?}", fields[0])))?;
        let t: usize = fields[2]
            .parse()
            .map_err(|_| Error::format(format!("bad triangle count {:?}", fields[2])))?;
        let b: usize = fields[4]
            .parse()
            .map_err(|_| Error::format(format!("bad boundary edge count {:?}", fields[4])))?;
        let mut nodes = Vec::with_capacity(n);
        for i in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| Error::format(format!("missing node line {i}")))?;
            let mut it = line.split_whitespace();
            let x: f64 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::format(format!("bad node line {i}: {line:?}")))?;
            let y: f64 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::format(format!("bad node line {i}: {line:?}")))?;
            nodes.push([x, y]);
        }
        let mut triangles = Vec::with_capacity(t);
        for i in 0..t {
            let line = lines
                .next()
                .ok_or_else(|| Error::format(format!("missing triangle line {i}")))?;
            let mut vals = line.split_whitespace().map(|s| s.parse::<usize>());
            let mut tri = [0usize; 3];
            for v in &mut tri {
                *v = vals
                    .next()
                    .and_then(|r| r.ok())
                    .ok_or_else(|| Error::format(format!("bad triangle line {i}: {line:?}")))?;
                if *v >= n {
                    return Err(Error::format(format!(
                        "triangle {i} references node {v} out of {n}"
                    )));
                }
            }
            triangles.push(tri);
        }
        let mut boundary_edges = Vec::with_capacity(b);
        for i in 0..b {
            let line = lines
                .next()
                .ok_or_else(|| Error::format(format!("missing boundary edge line {i}")))?;
            let mut vals = line.split_whitespace().map(|s| s.parse::<usize>());
            let mut edge = [0usize; 2];
            for v in &mut edge {
                *v = vals
                    .next()
                    .and_then(|r| r.ok())
                    .ok_or_else(|| Error::format(format!("bad boundary edge {i}: {line:?}")))?;
                if *v >= n {
                    return Err(Error::format(format!(
                        "boundary edge {i} references node {v} out of {n}"
                    )));
                }
            }
            boundary_edges.push(edge);
        }
        let boundary_loop: Vec<usize> = (0..b).collect();
        for (i, e) in boundary_edges.iter().enumerate() {
            if e[0] != i || e[1] != (i + 1) % b {
                return Err(Error::format(format!(
                    "boundary edges must form the consecutive loop over nodes 0..{b}, edge {i} is {e:?}"
                )));
            }
        }
        let mut areas = Vec::with_capacity(triangles.len());
        for (i, tri) in triangles.iter_mut().enumerate() {
            let a = signed_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
            if a < 0.0 {
                tri.swap(1, 2);
            }
            let a = a.abs();
            if a <= 0.0 {
                return Err(Error::format(format!("triangle {i} is degenerate")));
            }
            areas.push(a);
        }
        // Estimate h from the median edge length of the first triangles.
        let h_est = triangles
            .first()
            .map(|t| {
                let a = nodes[t[0]];
                let b = nodes[t[1]];
                ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
            })
            .unwrap_or(1.0);
        let mesh = Mesh {
            nodes,
            triangles,
            boundary_loop,
            boundary_edges,
            boundary_params: None,
            h: h_est,
            areas,
        };
        mesh.validate_structure()?;
        Ok(mesh)
    }

    /// Structural checks shared by generation and parsing: each boundary
    /// edge appears in exactly one triangle, interior edges in exactly two,
    /// and every node is used.
    fn validate_structure(&self) -> Result<()> {
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &self.triangles {
            for i in 0..3 {
                let a = t[i];
                let b = t[(i + 1) % 3];
                let key = (a.min(b), a.max(b));
                *edge_count.entry(key).or_insert(0) += 1;
            }
        }
        let b = self.boundary_loop.len();
        for e in &self.boundary_edges {
            let key = (e[0].min(e[1]), e[0].max(e[1]));
            if edge_count.get(&key) != Some(&1) {
                return Err(Error::mesh(format!(
                    "boundary edge {e:?} is not a single-owner triangulation edge"
                )));
            }
        }
        let mut single_owner = 0usize;
        for (&(a, bb), &cnt) in &edge_count {
            if cnt == 1 {
                single_owner += 1;
                if a >= b || bb >= b {
                    return Err(Error::mesh(format!(
                        "free edge ({a}, {bb}) touches an interior node"
                    )));
                }
            } else if cnt != 2 {
                return Err(Error::mesh(format!(
                    "edge ({a}, {bb}) has {cnt} owners"
                )));
            }
        }
        if single_owner != self.boundary_edges.len() {
            return Err(Error::mesh(format!(
                "{} free edges but {} boundary edges",
                single_owner,
                self.boundary_edges.len()
            )));
        }
        let mut used = vec![false; self.nodes.len()];
        for t in &self.triangles {
            for &v in t {
                used[v] = true;
            }
        }
        if let Some(i) = used.iter().position(|u| !u) {
            return Err(Error::mesh(format!("node {i} is not used by any triangle")));
        }
        Ok(())
    }
}

fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

/// Generate a mesh with default options.
pub fn triangulate(spec: &DomainSpec, h: f64) -> Result<Mesh> {
    triangulate_with(spec, h, &MeshOptions::default())
}

/// Generate a mesh with explicit options.
pub fn triangulate_with(spec: &DomainSpec, h: f64, opts: &MeshOptions) -> Result<Mesh> {
    spec.validate()?;
    if !h.is_finite() || h <= 0.0 {
        return Err(Error::mesh(format!("mesh size must be positive, got {h}")));
    }

    // Boundary nodes, exactly on the analytic boundary, loop-ordered CCW.
    let (boundary_nodes, boundary_params) = boundary_samples(spec, h, opts)?;
    let m = boundary_nodes.len();
    if m < 8 {
        return Err(Error::mesh(format!(
            "h = {h} too coarse: only {m} boundary nodes"
        )));
    }

    // Interior lattice, anchored at the origin so that perturbing the domain
    // does not shift interior nodes.
    let bd = BoundaryPolyline::new(spec);
    let mut points = boundary_nodes.clone();
    points.extend(interior_lattice(spec, h, &bd));

    let mut mesh = build_once(spec, &points, m, h)?;

    // Laplacian smoothing with retriangulation. Two cycles are enough to
    // relax the lattice/boundary interface.
    for _ in 0..2 {
        let mut pts = mesh.nodes.clone();
        let neighbors = mesh.node_neighbors();
        for _ in 0..5 {
            let snapshot = pts.clone();
            for (i, p) in pts.iter_mut().enumerate().skip(m) {
                let list = &neighbors[i];
                if list.is_empty() {
                    continue;
                }
                let mut cx = 0.0;
                let mut cy = 0.0;
                for &j in list {
                    cx += snapshot[j][0];
                    cy += snapshot[j][1];
                }
                let cand = [cx / list.len() as f64, cy / list.len() as f64];
                if spec.contains(cand) && bd.dist(cand) > 0.4 * h {
                    *p = cand;
                }
            }
        }
        mesh = build_once(spec, &pts, m, h)?;
    }

    if let Some(params) = boundary_params {
        mesh.boundary_params = Some(params);
    }

    let min_angle = mesh.min_angle_deg();
    if min_angle < MIN_ANGLE_DEG {
        return Err(Error::mesh(format!(
            "mesh quality too low: min angle {min_angle:.2} deg < {MIN_ANGLE_DEG} deg; refine h or adjust the domain"
        )));
    }
    Ok(mesh)
}

fn boundary_samples(
    spec: &DomainSpec,
    h: f64,
    opts: &MeshOptions,
) -> Result<(Vec<[f64; 2]>, Option<Vec<f64>>)> {
    match spec {
        DomainSpec::Star { .. } => {
            let shape = StarShape::from_spec(spec).expect("star");
            let m = match opts.boundary_count {
                Some(m) => {
                    if m < 8 {
                        return Err(Error::mesh(format!("boundary count {m} too small")));
                    }
                    m
                }
                None => (spec.perimeter() / h).ceil() as usize,
            };
            if m < 8 {
                return Err(Error::mesh(format!(
                    "h = {h} too coarse: only {m} boundary nodes"
                )));
            }
            let thetas = shape.arc_equidistributed_thetas(m);
            let pts = thetas.iter().map(|&t| shape.point(t)).collect();
            Ok((pts, Some(thetas)))
        }
        DomainSpec::Polygon { vertices } => {
            if opts.boundary_count.is_some() {
                return Err(Error::precondition(
                    "fixed boundary count is only supported for star domains".to_string(),
                ));
            }
            let mut pts = Vec::new();
            let mv = vertices.len();
            for i in 0..mv {
                let a = vertices[i];
                let b = vertices[(i + 1) % mv];
                let len = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                let k = (len / h).ceil().max(1.0) as usize;
                for j in 0..k {
                    let t = j as f64 / k as f64;
                    pts.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
                }
            }
            Ok((pts, None))
        }
    }
}

/// Cached boundary polyline for fast distance queries during generation.
struct BoundaryPolyline {
    pts: Vec<[f64; 2]>,
}

impl BoundaryPolyline {
    fn new(spec: &DomainSpec) -> Self {
        let pts = match spec {
            DomainSpec::Star { .. } => {
                let shape = StarShape::from_spec(spec).expect("star");
                (0..2048)
                    .map(|i| shape.point(2.0 * std::f64::consts::PI * i as f64 / 2048.0))
                    .collect()
            }
            DomainSpec::Polygon { vertices } => vertices.clone(),
        };
        BoundaryPolyline { pts }
    }

    fn dist(&self, p: [f64; 2]) -> f64 {
        let m = self.pts.len();
        let mut best = f64::INFINITY;
        for i in 0..m {
            let a = self.pts[i];
            let b = self.pts[(i + 1) % m];
            let ab = [b[0] - a[0], b[1] - a[1]];
            let ap = [p[0] - a[0], p[1] - a[1]];
            let len_sq = ab[0] * ab[0] + ab[1] * ab[1];
            let t = if len_sq > 0.0 {
                ((ap[0] * ab[0] + ap[1] * ab[1]) / len_sq).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let dx = p[0] - (a[0] + t * ab[0]);
            let dy = p[1] - (a[1] + t * ab[1]);
            best = best.min(dx * dx + dy * dy);
        }
        best.sqrt()
    }
}

/// Hash-based uniform in [-1, 1], deterministic in the lattice index.
fn jitter_unit(i: i64, j: i64, salt: u64) -> f64 {
    let mut x = (i as u64).wrapping_mul(0x9e3779b97f4a7c15)
        ^ (j as u64).wrapping_mul(0xbf58476d1ce4e5b9)
        ^ salt;
    x ^= x >> 30;
    x = x.wrapping_mul(0xbf58476d1ce4e5b9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94d049bb133111eb);
    x ^= x >> 31;
    (x as f64 / u64::MAX as f64) * 2.0 - 1.0
}

fn interior_lattice(spec: &DomainSpec, h: f64, bd: &BoundaryPolyline) -> Vec<[f64; 2]> {
    let ([xmin, ymin], [xmax, ymax]) = spec.bounding_box();
    let row = h * 3.0f64.sqrt() / 2.0;
    let j_lo = ((ymin - h) / row).floor() as i64;
    let j_hi = ((ymax + h) / row).ceil() as i64;
    let buffer = 0.7 * h;
    let mut pts = Vec::new();
    for j in j_lo..=j_hi {
        let y = j as f64 * row;
        let offset = if j.rem_euclid(2) == 1 { 0.5 * h } else { 0.0 };
        let i_lo = ((xmin - h - offset) / h).floor() as i64;
        let i_hi = ((xmax + h - offset) / h).ceil() as i64;
        for i in i_lo..=i_hi {
            // Microscopic deterministic jitter to break cocircular lattice
            // degeneracies in the Delaunay predicates.
            let x = i as f64 * h + offset + 1e-3 * h * jitter_unit(i, j, 0x5eed);
            let yj = y + 1e-3 * h * jitter_unit(i, j, 0xa17e);
            let p = [x, yj];
            if spec.contains(p) && bd.dist(p) >= buffer {
                pts.push(p);
            }
        }
    }
    pts
}

/// One Delaunay + clip + validate pass over a fixed point set. The first
/// `m` points are the boundary loop.
fn build_once(spec: &DomainSpec, points: &[[f64; 2]], m: usize, h: f64) -> Result<Mesh> {
    let raw = delaunay(points)?;

    // Keep triangles whose centroid is inside the domain.
    let mut triangles = Vec::new();
    for t in raw {
        let a = points[t[0]];
        let b = points[t[1]];
        let c = points[t[2]];
        let centroid = [
            (a[0] + b[0] + c[0]) / 3.0,
            (a[1] + b[1] + c[1]) / 3.0,
        ];
        if spec.contains(centroid) {
            triangles.push(t);
        }
    }
    if triangles.is_empty() {
        return Err(Error::mesh("no triangles survive domain clipping".to_string()));
    }

    // Drop interior nodes that lost all their triangles; boundary nodes must
    // survive.
    let mut used = vec![false; points.len()];
    for t in &triangles {
        for &v in t {
            used[v] = true;
        }
    }
    for i in 0..m {
        if !used[i] {
            return Err(Error::mesh(format!(
                "boundary node {i} lost all triangles; refine h"
            )));
        }
    }
    let mut remap = vec![usize::MAX; points.len()];
    let mut nodes = Vec::new();
    for (i, &u) in used.iter().enumerate() {
        if u {
            remap[i] = nodes.len();
            nodes.push(points[i]);
        }
    }
    for t in &mut triangles {
        for v in t.iter_mut() {
            *v = remap[*v];
        }
    }

    // Orient CCW and compute areas.
    let mut areas = Vec::with_capacity(triangles.len());
    for t in &mut triangles {
        let a = signed_area(nodes[t[0]], nodes[t[1]], nodes[t[2]]);
        if a < 0.0 {
            t.swap(1, 2);
        }
        let a = a.abs();
        if a < 1e-14 * h * h {
            return Err(Error::mesh(format!(
                "degenerate triangle {t:?} with area {a:.3e}"
            )));
        }
        areas.push(a);
    }

    // Boundary edges must be exactly the consecutive pairs of the boundary
    // loop; anything else means the triangulation failed to resolve the
    // boundary and the mesh is rejected.
    let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
    for t in &triangles {
        for i in 0..3 {
            let a = t[i];
            let b = t[(i + 1) % 3];
            *edge_count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    let mut free_edges: Vec<(usize, usize)> = edge_count
        .iter()
        .filter(|(_, &c)| c == 1)
        .map(|(&e, _)| e)
        .collect();
    free_edges.sort_unstable();
    if free_edges.len() != m {
        return Err(Error::mesh(format!(
            "boundary not resolved: {} free edges for {} boundary nodes; refine h",
            free_edges.len(),
            m
        )));
    }
    for &(a, b) in &free_edges {
        let consecutive = b == a + 1 || (a == 0 && b == m - 1);
        if a >= m || b >= m || !consecutive {
            return Err(Error::mesh(format!(
                "free edge ({a}, {b}) does not follow the boundary loop; refine h"
            )));
        }
    }
    let boundary_edges: Vec<[usize; 2]> = (0..m).map(|i| [i, (i + 1) % m]).collect();

    // The kept triangles must partition the boundary polygon.
    let loop_poly: Vec<[f64; 2]> = (0..m).map(|i| nodes[i]).collect();
    let poly_area = polygon_signed_area(&loop_poly);
    let total: f64 = areas.iter().sum();
    if ((total - poly_area) / poly_area).abs() > 1e-10 {
        return Err(Error::mesh(format!(
            "triangles do not partition the domain: sum {total:.12e} vs polygon {poly_area:.12e}"
        )));
    }

    let mesh = Mesh {
        nodes,
        triangles,
        boundary_loop: (0..m).collect(),
        boundary_edges,
        boundary_params: None,
        h,
        areas,
    };
    mesh.validate_structure()?;
    Ok(mesh)
}

// ---------------------------------------------------------------------------
// Bowyer-Watson Delaunay triangulation with walking point location.

#[derive(Debug, Clone)]
struct DTri {
    v: [usize; 3],
    /// Neighbor across the edge opposite `v[i]`.
    nbr: [Option<usize>; 3],
    alive: bool,
}

fn orient2d(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Positive when `p` is strictly inside the circumcircle of CCW `(a, b, c)`.
fn incircle(a: [f64; 2], b: [f64; 2], c: [f64; 2], p: [f64; 2]) -> f64 {
    let ax = a[0] - p[0];
    let ay = a[1] - p[1];
    let bx = b[0] - p[0];
    let by = b[1] - p[1];
    let cx = c[0] - p[0];
    let cy = c[1] - p[1];
    let a2 = ax * ax + ay * ay;
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    ax * (by * c2 - b2 * cy) - ay * (bx * c2 - b2 * cx) + a2 * (bx * cy - by * cx)
}

/// Delaunay triangulation of a point set (returned as CCW index triples).
/// Points must be pairwise distinct.
fn delaunay(points: &[[f64; 2]]) -> Result<Vec<[usize; 3]>> {
    let n = points.len();
    if n < 3 {
        return Err(Error::mesh(format!("need at least 3 points, got {n}")));
    }

    // Super-triangle comfortably containing everything.
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in points {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
    let cx = 0.5 * (lo[0] + hi[0]);
    let cy = 0.5 * (lo[1] + hi[1]);
    let big = 64.0 * span;
    let mut all: Vec<[f64; 2]> = points.to_vec();
    let s0 = all.len();
    all.push([cx - big, cy - big]);
    all.push([cx + big, cy - big]);
    all.push([cx, cy + big]);

    let mut tris: Vec<DTri> = vec![DTri {
        v: [s0, s0 + 1, s0 + 2],
        nbr: [None, None, None],
        alive: true,
    }];
    let mut hint = 0usize;

    for (pi, &p) in points.iter().enumerate() {
        // Walk to the triangle containing p.
        let containing = walk_locate(&all, &tris, hint, p).ok_or_else(|| {
            Error::mesh(format!("point location failed for point {pi} at {p:?}"))
        })?;

        // Grow the cavity of circumcircle violations.
        let mut in_cavity = vec![false; tris.len()];
        let mut cavity = vec![containing];
        in_cavity[containing] = true;
        let mut stack = vec![containing];
        while let Some(t) = stack.pop() {
            for side in 0..3 {
                if let Some(nb) = tris[t].nbr[side] {
                    if !in_cavity[nb] && tris[nb].alive {
                        let tv = tris[nb].v;
                        if incircle(all[tv[0]], all[tv[1]], all[tv[2]], p) > 0.0 {
                            in_cavity[nb] = true;
                            cavity.push(nb);
                            stack.push(nb);
                        }
                    }
                }
            }
        }

        // Cavity boundary: directed edges whose cross-neighbor is outside.
        struct CavEdge {
            a: usize,
            b: usize,
            outside: Option<usize>,
        }
        let mut rim = Vec::new();
        for &t in &cavity {
            for side in 0..3 {
                let outside = tris[t].nbr[side];
                let is_rim = match outside {
                    Some(nb) => !in_cavity[nb],
                    None => true,
                };
                if is_rim {
                    rim.push(CavEdge {
                        a: tris[t].v[(side + 1) % 3],
                        b: tris[t].v[(side + 2) % 3],
                        outside,
                    });
                }
            }
        }
        for &t in &cavity {
            tris[t].alive = false;
        }

        // New triangles (p, a, b) over each rim edge; wire neighbors.
        let base = tris.len();
        let mut starts: HashMap<usize, usize> = HashMap::new();
        let mut ends: HashMap<usize, usize> = HashMap::new();
        for (j, e) in rim.iter().enumerate() {
            let idx = base + j;
            tris.push(DTri {
                v: [pi, e.a, e.b],
                nbr: [e.outside, None, None],
                alive: true,
            });
            if let Some(out) = e.outside {
                // Retarget exactly the side of `out` that shares edge (a, b).
                let mut wired = false;
                for side in 0..3 {
                    let oa = tris[out].v[(side + 1) % 3];
                    let ob = tris[out].v[(side + 2) % 3];
                    if (oa == e.a && ob == e.b) || (oa == e.b && ob == e.a) {
                        tris[out].nbr[side] = Some(idx);
                        wired = true;
                        break;
                    }
                }
                if !wired {
                    return Err(Error::mesh(format!(
                        "neighbor wiring lost edge ({}, {}) while inserting point {pi}",
                        e.a, e.b
                    )));
                }
            }
            starts.insert(e.a, idx);
            ends.insert(e.b, idx);
        }
        for (j, e) in rim.iter().enumerate() {
            let idx = base + j;
            // Edge opposite v[1]=a is (b, p): shared with the triangle whose
            // rim edge starts at b. Edge opposite v[2]=b is (p, a): shared
            // with the one ending at a.
            tris[idx].nbr[1] = starts.get(&e.b).copied();
            tris[idx].nbr[2] = ends.get(&e.a).copied();
            if tris[idx].nbr[1].is_none() || tris[idx].nbr[2].is_none() {
                return Err(Error::mesh(format!(
                    "cavity rim not closed while inserting point {pi}"
                )));
            }
        }
        hint = base;
    }

    let mut out = Vec::new();
    for t in &tris {
        if t.alive && t.v.iter().all(|&v| v < s0) {
            out.push(t.v);
        }
    }
    Ok(out)
}

fn walk_locate(all: &[[f64; 2]], tris: &[DTri], hint: usize, p: [f64; 2]) -> Option<usize> {
    let mut cur = if tris.get(hint).map(|t| t.alive) == Some(true) {
        hint
    } else {
        tris.iter().rposition(|t| t.alive)?
    };
    let mut steps = 0usize;
    let max_steps = 4 * tris.len() + 64;
    'walk: loop {
        steps += 1;
        if steps > max_steps {
            break;
        }
        let t = &tris[cur];
        for side in 0..3 {
            let a = all[t.v[(side + 1) % 3]];
            let b = all[t.v[(side + 2) % 3]];
            if orient2d(a, b, p) < -1e-14 {
                match t.nbr[side] {
                    Some(nb) if tris[nb].alive => {
                        cur = nb;
                        continue 'walk;
                    }
                    _ => break 'walk,
                }
            }
        }
        return Some(cur);
    }
    // Deterministic fallback: exhaustive scan with a relaxed containment
    // test. Rarely needed, but keeps degenerate walks from failing.
    for (i, t) in tris.iter().enumerate() {
        if !t.alive {
            continue;
        }
        let a = all[t.v[0]];
        let b = all[t.v[1]];
        let c = all[t.v[2]];
        if orient2d(a, b, p) >= -1e-12
            && orient2d(b, c, p) >= -1e-12
            && orient2d(c, a, p) >= -1e-12
        {
            return Some(i);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainSpec;

    fn unit_square() -> DomainSpec {
        DomainSpec::Polygon {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        }
    }

    #[test]
    fn delaunay_square_of_points() {
        let pts = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]];
        let tris = delaunay(&pts).unwrap();
        assert_eq!(tris.len(), 4);
        for t in &tris {
            assert!(signed_area(pts[t[0]], pts[t[1]], pts[t[2]]) > 0.0);
        }
    }

    #[test]
    fn delaunay_empty_circumcircles() {
        // Property check on a deterministic pseudo-random cloud.
        let mut pts = Vec::new();
        for i in 0..60i64 {
            pts.push([
                0.5 + 0.5 * jitter_unit(i, 3 * i + 1, 17),
                0.5 + 0.5 * jitter_unit(2 * i, i + 9, 99),
            ]);
        }
        let tris = delaunay(&pts).unwrap();
        for t in &tris {
            for (k, p) in pts.iter().enumerate() {
                if t.contains(&k) {
                    continue;
                }
                let v = incircle(pts[t[0]], pts[t[1]], pts[t[2]], *p);
                assert!(
                    v <= 1e-9,
                    "point {k} inside circumcircle of {t:?} by {v:.3e}"
                );
            }
        }
    }

    #[test]
    fn square_mesh_partitions_area() {
        let mesh = triangulate(&unit_square(), 0.2).unwrap();
        assert!((mesh.area() - 1.0).abs() < 1e-12);
        assert!((mesh.perimeter() - 4.0).abs() < 1e-12);
        assert!(mesh.min_angle_deg() >= MIN_ANGLE_DEG);
        assert_eq!(mesh.boundary_loop.len(), 20);
    }

    #[test]
    fn disk_mesh_geometry() {
        let mesh = triangulate(&DomainSpec::disk(1.0), 0.15).unwrap();
        let pi = std::f64::consts::PI;
        assert!((mesh.area() - pi).abs() < 0.02 * pi, "area {}", mesh.area());
        assert!(mesh.perimeter() < 2.0 * pi);
        assert!((mesh.perimeter() - 2.0 * pi).abs() < 0.02 * 2.0 * pi);
        assert!(mesh.min_angle_deg() >= MIN_ANGLE_DEG);
        // Boundary nodes sit exactly on the circle.
        for &i in &mesh.boundary_loop {
            let p = mesh.nodes[i];
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            assert!((r - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn star_and_ellipse_mesh() {
        let star = DomainSpec::star(1.0, vec![0.0, 0.0, 0.3], vec![]);
        let mesh = triangulate(&star, 0.1).unwrap();
        assert!(mesh.min_angle_deg() >= MIN_ANGLE_DEG);
        assert!((mesh.area() - star.area()).abs() < 0.01 * star.area());
        let thetas = mesh.boundary_params.as_ref().unwrap();
        assert_eq!(thetas.len(), mesh.boundary_loop.len());

        let ellipse = DomainSpec::ellipse(2.0, 1.0).unwrap();
        let mesh = triangulate(&ellipse, 0.12).unwrap();
        assert!(mesh.min_angle_deg() >= MIN_ANGLE_DEG);
        assert!((mesh.area() - ellipse.area()).abs() < 0.01 * ellipse.area());
    }

    #[test]
    fn fixed_boundary_count() {
        let opts = MeshOptions {
            boundary_count: Some(48),
        };
        let mesh = triangulate_with(&DomainSpec::disk(1.0), 0.15, &opts).unwrap();
        assert_eq!(mesh.boundary_loop.len(), 48);
        assert!(triangulate_with(&unit_square(), 0.2, &opts).is_err());
    }

    #[test]
    fn deterministic_generation() {
        let spec = DomainSpec::star(1.0, vec![0.1, 0.0, 0.2], vec![0.05]);
        let a = triangulate(&spec, 0.12).unwrap();
        let b = triangulate(&spec, 0.12).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn text_round_trip() {
        let mesh = triangulate(&DomainSpec::disk(1.0), 0.25).unwrap();
        let text = mesh.to_text();
        let back = Mesh::from_text(&text).unwrap();
        assert_eq!(mesh.nodes, back.nodes);
        assert_eq!(mesh.triangles, back.triangles);
        assert_eq!(mesh.boundary_edges, back.boundary_edges);
        assert_eq!(mesh.area(), back.area());
    }

    #[test]
    fn from_text_rejects_malformed() {
        assert!(Mesh::from_text("").is_err());
        assert!(Mesh::from_text("wat").is_err());
        assert!(Mesh::from_text("3 nodes 1 triangles 0 boundary-edges\n0 0\n1 0\n").is_err());
        // Out-of-range index.
        assert!(Mesh::from_text(
            "3 nodes 1 triangles 3 boundary-edges\n0 0\n1 0\n0 1\n0 1 5\n0 1\n1 2\n2 0\n"
        )
        .is_err());
    }

    #[test]
    fn too_coarse_h_is_rejected() {
        assert!(triangulate(&DomainSpec::disk(1.0), 5.0).is_err());
    }

    #[test]
    fn locate_finds_points() {
        let mesh = triangulate(&DomainSpec::disk(1.0), 0.2).unwrap();
        for &p in &[[0.0, 0.0], [0.3, 0.4], [-0.5, 0.1]] {
            let (ti, bary) = mesh.locate(p).unwrap();
            assert!(bary.iter().all(|&l| l >= -1e-9));
            assert!((bary.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            let t = mesh.triangles[ti];
            let x = (0..3).map(|k| bary[k] * mesh.nodes[t[k]][0]).sum::<f64>();
            let y = (0..3).map(|k| bary[k] * mesh.nodes[t[k]][1]).sum::<f64>();
            assert!((x - p[0]).abs() < 1e-9 && (y - p[1]).abs() < 1e-9);
        }
        assert!(mesh.locate([2.0, 2.0]).is_none());
    }
}
