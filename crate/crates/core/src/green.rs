//! Dirichlet Green's function on a meshed planar domain, harmonic radius and
//! center, superlevel-set geometry, condenser capacities, and harmonic
//! transplantation. Everything in this module is two-dimensional: the
//! logarithmic fundamental solution, `r(y) = exp(-H(y,y))`, and the Green
//! inversion `rho = r exp(-2 pi G)` all use the n = 2 branch.

use std::f64::consts::PI;

use crate::ball::{ball_eigenvalue, BallProblem};
use crate::domain::{polygon_signed_area, DomainSpec};
use crate::error::{Error, Result};
use crate::fem::{
    assemble, field_integrals, robin_principal_eigen_assembled, DirichletSolver, ScalarField,
};
use crate::mesh::{triangulate, Mesh};
use crate::quad::simpson;
use crate::report::{Check, ExperimentReport, LevelSetRow};

/// Fundamental-solution constant `1/(2 pi)`.
const GAMMA: f64 = 1.0 / (2.0 * PI);

/// Discrete Green's function of `-Laplace` with Dirichlet boundary condition
/// and pole `y`: `G = (S - H) / (2 pi)` with `S(x) = -ln|x - y|` and `H` the
/// discrete-harmonic extension of the boundary values of `S`.
#[derive(Debug, Clone)]
pub struct GreenData {
    pub pole: [f64; 2],
    /// Regular part `H` (nodal).
    pub h_field: ScalarField,
    /// `G` (nodal); exactly zero on boundary nodes, singular value at the
    /// pole capped from the second-nearest node ring.
    pub g_field: ScalarField,
    /// `exp(-H(y,y))` by P1 interpolation of `H` at the pole.
    pub harmonic_radius_at_pole: f64,
}

/// Distance from `p` to the boundary polyline of the mesh.
pub fn boundary_depth(mesh: &Mesh, p: [f64; 2]) -> f64 {
    let mut best = f64::INFINITY;
    for e in &mesh.boundary_edges {
        let a = mesh.nodes[e[0]];
        let b = mesh.nodes[e[1]];
        let ab = [b[0] - a[0], b[1] - a[1]];
        let ap = [p[0] - a[0], p[1] - a[1]];
        let len2 = ab[0] * ab[0] + ab[1] * ab[1];
        let s = if len2 > 0.0 {
            ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let d = ((ap[0] - s * ab[0]).powi(2) + (ap[1] - s * ab[1]).powi(2)).sqrt();
        best = best.min(d);
    }
    best
}

fn pole_boundary_data(mesh: &Mesh, y: [f64; 2]) -> Vec<f64> {
    mesh.boundary_loop
        .iter()
        .map(|&i| {
            let p = mesh.nodes[i];
            -((p[0] - y[0]).powi(2) + (p[1] - y[1]).powi(2)).sqrt().ln()
        })
        .collect()
}

/// Build the discrete Green's function with pole `y`.
///
/// The pole must sit at depth greater than `2h` from the boundary so the
/// singular boundary data stays resolvable.
pub fn green_function(mesh: &Mesh, solver: &DirichletSolver, y: [f64; 2]) -> Result<GreenData> {
    let depth = boundary_depth(mesh, y);
    if !(depth > 2.0 * mesh.h) {
        return Err(Error::precondition(format!(
            "pole depth {depth:.3e} is not greater than 2h = {:.3e}",
            2.0 * mesh.h
        )));
    }
    let h_field = solver.extend(&pole_boundary_data(mesh, y))?;
    let hy = h_field.interpolate(mesh, y)?;
    let radius = (-hy).exp();

    // Nodal distances to the pole; the closest node may coincide with the
    // pole, in which case its log is capped using the second-closest ring.
    let mut dist: Vec<f64> = mesh
        .nodes
        .iter()
        .map(|&p| ((p[0] - y[0]).powi(2) + (p[1] - y[1]).powi(2)).sqrt())
        .collect();
    let mut i1 = 0;
    for i in 1..dist.len() {
        if dist[i] < dist[i1] {
            i1 = i;
        }
    }
    let d2 = dist
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != i1)
        .map(|(_, &d)| d)
        .fold(f64::INFINITY, f64::min);
    if dist[i1] < 1e-9 * mesh.h {
        dist[i1] = d2;
    }

    let b = mesh.boundary_loop.len();
    let values: Vec<f64> = dist
        .iter()
        .zip(&h_field.values)
        .enumerate()
        .map(|(i, (&d, &h))| {
            if i < b {
                0.0
            } else {
                GAMMA * (-d.ln() - h)
            }
        })
        .collect();
    Ok(GreenData {
        pole: y,
        h_field,
        g_field: ScalarField { values },
        harmonic_radius_at_pole: radius,
    })
}

/// Harmonic radius `r(y) = exp(-H(y,y))` at a single interior point, without
/// retaining the fields.
pub fn harmonic_radius_at(mesh: &Mesh, solver: &DirichletSolver, y: [f64; 2]) -> Result<f64> {
    let h_field = solver.extend(&pole_boundary_data(mesh, y))?;
    Ok((-h_field.interpolate(mesh, y)?).exp())
}

/// Locate the harmonic center: the interior maximizer of the harmonic
/// radius. Seeds from the deepest-scoring interior node (depth filter `2h`),
/// then refines with a deterministic Nelder-Mead simplex (diameter tolerance
/// 1e-6). Returns `(y_h, r_Omega)`.
pub fn harmonic_center(mesh: &Mesh, solver: &DirichletSolver) -> Result<([f64; 2], f64)> {
    let depth_min = 2.0 * mesh.h;
    let eval = |y: [f64; 2]| -> f64 {
        if boundary_depth(mesh, y) <= depth_min {
            return f64::INFINITY;
        }
        match solver
            .extend(&pole_boundary_data(mesh, y))
            .and_then(|h| h.interpolate(mesh, y))
        {
            Ok(hy) => -(-hy).exp(),
            Err(_) => f64::INFINITY,
        }
    };

    let b = mesh.boundary_loop.len();
    let mut seed: Option<([f64; 2], f64)> = None;
    for &p in &mesh.nodes[b..] {
        if boundary_depth(mesh, p) <= depth_min {
            continue;
        }
        let v = eval(p);
        if seed.map_or(true, |(_, best)| v < best) {
            seed = Some((p, v));
        }
    }
    let (start, _) = seed.ok_or_else(|| {
        Error::mesh(format!(
            "no interior node deeper than 2h = {depth_min:.3e}; refine the mesh"
        ))
    })?;
    let (y, v) = nelder_mead(&eval, start, 0.5 * mesh.h, 1e-6, 300);
    if !v.is_finite() {
        return Err(Error::convergence(
            "harmonic-center refinement left the admissible region".to_string(),
        ));
    }
    Ok((y, -v))
}

/// Deterministic Nelder-Mead minimizer in the plane. Stops when the simplex
/// diameter drops below `tol` or after `max_iter` reshapes.
fn nelder_mead(
    f: &impl Fn([f64; 2]) -> f64,
    start: [f64; 2],
    scale: f64,
    tol: f64,
    max_iter: usize,
) -> ([f64; 2], f64) {
    let mut pts = [
        start,
        [start[0] + scale, start[1]],
        [start[0], start[1] + scale],
    ];
    let mut vals = [f(pts[0]), f(pts[1]), f(pts[2])];
    for _ in 0..max_iter {
        // Order the three vertices best-first.
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = [pts[idx[0]], pts[idx[1]], pts[idx[2]]];
        vals = [vals[idx[0]], vals[idx[1]], vals[idx[2]]];

        let diam = (0..3)
            .flat_map(|i| ((i + 1)..3).map(move |j| (i, j)))
            .map(|(i, j)| {
                ((pts[i][0] - pts[j][0]).powi(2) + (pts[i][1] - pts[j][1]).powi(2)).sqrt()
            })
            .fold(0.0f64, f64::max);
        if diam < tol {
            break;
        }

        let c = [
            0.5 * (pts[0][0] + pts[1][0]),
            0.5 * (pts[0][1] + pts[1][1]),
        ];
        let shift = |t: f64| [c[0] + t * (pts[2][0] - c[0]), c[1] + t * (pts[2][1] - c[1])];
        let xr = shift(-1.0);
        let fr = f(xr);
        if fr < vals[0] {
            let xe = shift(-2.0);
            let fe = f(xe);
            if fe < fr {
                pts[2] = xe;
                vals[2] = fe;
            } else {
                pts[2] = xr;
                vals[2] = fr;
            }
        } else if fr < vals[1] {
            pts[2] = xr;
            vals[2] = fr;
        } else {
            let xc = shift(if fr < vals[2] { -0.5 } else { 0.5 });
            let fc = f(xc);
            if fc < vals[2].min(fr) {
                pts[2] = xc;
                vals[2] = fc;
            } else {
                // Shrink toward the best vertex.
                for i in 1..3 {
                    pts[i] = [
                        0.5 * (pts[0][0] + pts[i][0]),
                        0.5 * (pts[0][1] + pts[i][1]),
                    ];
                    vals[i] = f(pts[i]);
                }
            }
        }
    }
    let mut best = 0;
    for i in 1..3 {
        if vals[i] < vals[best] {
            best = i;
        }
    }
    (pts[best], vals[best])
}

/// Area of `{G > t}` inside one triangle, exact for the P1 interpolant.
fn superlevel_area(p: &[[f64; 2]; 3], g: &[f64; 3], t: f64) -> f64 {
    let above = g.iter().filter(|&&v| v > t).count();
    if above == 0 {
        return 0.0;
    }
    let mut poly: Vec<[f64; 2]> = Vec::with_capacity(5);
    for i in 0..3 {
        let j = (i + 1) % 3;
        if g[i] > t {
            poly.push(p[i]);
        }
        if (g[i] - t) * (g[j] - t) < 0.0 {
            let s = (t - g[i]) / (g[j] - g[i]);
            poly.push([
                p[i][0] + s * (p[j][0] - p[i][0]),
                p[i][1] + s * (p[j][1] - p[i][1]),
            ]);
        }
    }
    polygon_signed_area(&poly).abs()
}

/// Superlevel-set areas of the Green field against the ball closed form.
#[derive(Debug, Clone)]
pub struct LevelSetTable {
    pub t: Vec<f64>,
    /// `|{G > t}|` by exact P1 clipping.
    pub m_omega: Vec<f64>,
    /// `pi r_t^2` with `r_t = r_Omega exp(-2 pi t)`.
    pub m_ball: Vec<f64>,
    /// `gamma-tilde = sqrt(|Omega| / |B_{r_Omega}|)` (n = 2).
    pub gamma_ratio: f64,
    pub r_omega: f64,
    pub area: f64,
    /// Mesh-error allowance `10 h |boundary|` used by the measure check.
    pub eps_h: f64,
}

/// Tabulate `m_Omega(t)` and `m_B(t)` on a nonnegative increasing grid.
pub fn level_set_measures(mesh: &Mesh, green: &GreenData, t_grid: &[f64]) -> Result<LevelSetTable> {
    if t_grid.is_empty() {
        return Err(Error::precondition("empty t grid".to_string()));
    }
    for w in t_grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::precondition(format!(
                "t grid must be strictly increasing, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    if !(t_grid[0] >= 0.0) || !t_grid.iter().all(|t| t.is_finite()) {
        return Err(Error::precondition(
            "t grid must be finite and nonnegative".to_string(),
        ));
    }
    let r = green.harmonic_radius_at_pole;
    let area = mesh.area();
    let mut m_omega = Vec::with_capacity(t_grid.len());
    let mut m_ball = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let mut m = 0.0;
        for (ti, tri) in mesh.triangles.iter().enumerate() {
            let p = [
                mesh.nodes[tri[0]],
                mesh.nodes[tri[1]],
                mesh.nodes[tri[2]],
            ];
            let g = [
                green.g_field.values[tri[0]],
                green.g_field.values[tri[1]],
                green.g_field.values[tri[2]],
            ];
            if t == 0.0 {
                m += mesh.areas[ti];
            } else {
                m += superlevel_area(&p, &g, t);
            }
        }
        m_omega.push(m);
        m_ball.push(PI * (r * (-2.0 * PI * t).exp()).powi(2));
    }
    Ok(LevelSetTable {
        t: t_grid.to_vec(),
        m_omega,
        m_ball,
        gamma_ratio: (area / (PI * r * r)).sqrt(),
        r_omega: r,
        area,
        eps_h: 10.0 * mesh.h * mesh.perimeter(),
    })
}

/// Condenser capacity of `Omega minus Omega^t` two ways: the discrete
/// Dirichlet energy of `G` over the clipped sublevel region divided by `t^2`,
/// and the ball closed form `2 pi / ln(r_Omega / r_t)`.
#[derive(Debug, Clone, Copy)]
pub struct CapacityCheck {
    pub t: f64,
    pub cap_domain: f64,
    pub cap_ball: f64,
    pub relative_gap: f64,
}

pub fn verify_capacity_equality(mesh: &Mesh, green: &GreenData, t: f64) -> Result<CapacityCheck> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::precondition(format!("need t > 0, got {t}")));
    }
    let mut m_super = 0.0;
    let mut energy = 0.0;
    for (ti, tri) in mesh.triangles.iter().enumerate() {
        let p = [mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]];
        let g = [
            green.g_field.values[tri[0]],
            green.g_field.values[tri[1]],
            green.g_field.values[tri[2]],
        ];
        let sup = superlevel_area(&p, &g, t);
        m_super += sup;
        let grad = green.g_field.gradient_on(mesh, ti);
        energy += (grad[0] * grad[0] + grad[1] * grad[1]) * (mesh.areas[ti] - sup);
    }
    let avg_tri = mesh.area() / mesh.n_triangles() as f64;
    if m_super <= 10.0 * avg_tri {
        return Err(Error::resolution(format!(
            "superlevel set at t = {t} covers area {m_super:.3e}, under 10 triangles; lower t or refine"
        )));
    }
    let r = green.harmonic_radius_at_pole;
    let r_t = r * (-2.0 * PI * t).exp();
    let cap_ball = 2.0 * PI / (r / r_t).ln();
    let cap_domain = energy / (t * t);
    Ok(CapacityCheck {
        t,
        cap_domain,
        cap_ball,
        relative_gap: (cap_domain - cap_ball).abs() / cap_ball,
    })
}

/// Outcome of the measure inequality `m_Omega(t) <= gamma-tilde^2 m_B(t)`
/// over a level-set table, with the mesh allowance.
#[derive(Debug, Clone)]
pub struct Lemma2Outcome {
    pub rows: Vec<LevelSetRow>,
    pub worst_margin: f64,
    pub eps_h: f64,
    pub passed: bool,
}

pub fn verify_lemma_cap2(table: &LevelSetTable) -> Lemma2Outcome {
    let gamma_n = table.gamma_ratio * table.gamma_ratio;
    let mut rows = Vec::with_capacity(table.t.len());
    let mut worst = f64::INFINITY;
    for i in 0..table.t.len() {
        let bound = gamma_n * table.m_ball[i] + table.eps_h;
        let margin = bound - table.m_omega[i];
        worst = worst.min(margin);
        rows.push(LevelSetRow {
            t: table.t[i],
            m_omega: table.m_omega[i],
            m_ball: table.m_ball[i],
            bound,
            margin,
        });
    }
    Lemma2Outcome {
        rows,
        worst_margin: worst,
        eps_h: table.eps_h,
        passed: worst >= 0.0,
    }
}

/// Harmonic transplantation: nodal `U(x) = phi(rho(x))` with
/// `rho = r_Omega exp(-2 pi G)` clamped to `[0, r_Omega]`. Boundary nodes map
/// to `rho = r_Omega` exactly, so `U` is constant on the boundary.
pub fn transplant(mesh: &Mesh, green: &GreenData, phi: impl Fn(f64) -> f64) -> ScalarField {
    debug_assert_eq!(green.g_field.values.len(), mesh.n_nodes());
    let r = green.harmonic_radius_at_pole;
    ScalarField {
        values: green
            .g_field
            .values
            .iter()
            .map(|&g| phi((r * (-2.0 * PI * g).exp()).clamp(0.0, r)))
            .collect(),
    }
}

/// Two-sided sandwich for monotone data:
/// `int_B f(phi) - eps <= int_Omega f(U) <= gamma-tilde^2 int_B f(phi) + eps`.
#[derive(Debug, Clone, Copy)]
pub struct TransplantBounds {
    pub ball_integral: f64,
    pub domain_integral: f64,
    pub upper_bound: f64,
    pub allowance: f64,
    pub lower_margin: f64,
    pub upper_margin: f64,
}

impl TransplantBounds {
    pub fn passed(&self) -> bool {
        self.lower_margin >= 0.0 && self.upper_margin >= 0.0
    }
}

/// Check the transplant sandwich for an increasing radial profile `phi` and a
/// positive increasing map `f`. `rel_allowance` sets the quadrature allowance
/// as a fraction of the integral scale.
pub fn verify_transplant_bounds(
    mesh: &Mesh,
    green: &GreenData,
    phi: impl Fn(f64) -> f64,
    f: impl Fn(f64) -> f64,
    rel_allowance: f64,
) -> Result<TransplantBounds> {
    let r = green.harmonic_radius_at_pole;
    // Hypotheses: phi nondecreasing on [0, r], f positive nondecreasing on
    // the range of phi.
    let samples = 257;
    let mut prev_phi = f64::NEG_INFINITY;
    let mut prev_f = f64::NEG_INFINITY;
    let mut scale = 0.0f64;
    for i in 0..samples {
        let s = r * i as f64 / (samples - 1) as f64;
        let v = phi(s);
        scale = scale.max(v.abs());
        if v < prev_phi - 1e-12 * (1.0 + scale) {
            return Err(Error::precondition(format!(
                "profile is not nondecreasing near s = {s:.6}"
            )));
        }
        prev_phi = v;
        let fv = f(v);
        if !(fv > 0.0) {
            return Err(Error::precondition(format!(
                "map is not positive at {v:.6}"
            )));
        }
        if fv < prev_f - 1e-12 * (1.0 + fv.abs()) {
            return Err(Error::precondition(format!(
                "map is not nondecreasing at {v:.6}"
            )));
        }
        prev_f = fv;
    }

    let ball_integral = 2.0 * PI * simpson(|s| f(phi(s)) * s, 0.0, r, 4096);
    let u = transplant(mesh, green, &phi);
    let domain_integral = field_integrals(mesh, &u, &f)?.volume;
    let gamma_n = mesh.area() / (PI * r * r);
    let upper_bound = gamma_n * ball_integral;
    let allowance = rel_allowance
        * ball_integral
            .abs()
            .max(domain_integral.abs())
            .max(upper_bound.abs());
    Ok(TransplantBounds {
        ball_integral,
        domain_integral,
        upper_bound,
        allowance,
        lower_margin: domain_integral - (ball_integral - allowance),
        upper_margin: (upper_bound + allowance) - domain_integral,
    })
}

/// Full product-inequality check `|Omega| lambda(Omega) <= |B_r| lambda(B_r)`
/// with `r` the harmonic radius at the harmonic center, plus the recorded
/// side inequalities: the equal-area ball comparison, the constant-trial
/// bound, the transplanted-trial Rayleigh quotient, and the perimeter chain.
pub fn theorem1_check(spec: &DomainSpec, alpha: f64, h: f64) -> Result<ExperimentReport> {
    let t0 = std::time::Instant::now();
    let mesh = triangulate(spec, h)?;
    let ops = assemble(&mesh);
    let eig = robin_principal_eigen_assembled(&mesh, &ops, alpha)?;
    let solver = DirichletSolver::new(&mesh, &ops)?;
    let (center, r_omega) = harmonic_center(&mesh, &solver)?;
    let green = green_function(&mesh, &solver, center)?;

    let ball = BallProblem::new(2, alpha, r_omega)?;
    let ball_res = ball_eigenvalue(&ball)?;
    let area = mesh.area();
    let perim = mesh.perimeter();
    let lhs = area * eig.lambda;
    let rhs = PI * r_omega * r_omega * ball_res.lambda;
    // Mesh-error allowance for the product inequality; quadratic in h to
    // track the FEM eigenvalue and polyline-area errors, with headroom.
    let eps_h = 10.0 * h * h * 0.5 * (lhs.abs() + rhs.abs());
    let eps_lambda = eps_h / area;

    // Transplanted ball eigenfunction as a trial field.
    let u = transplant(&mesh, &green, |s| {
        ball_res.profile(s.min(r_omega)).expect("s within [0, r]")
    });
    let rayleigh = (ops.stiffness.quadratic(&u.values)
        - alpha * ops.boundary_mass.quadratic(&u.values))
        / ops.mass.quadratic(&u.values);

    let equal_area_radius = (area / PI).sqrt();
    let bareket = ball_eigenvalue(&BallProblem::new(2, alpha, equal_area_radius)?)?.lambda;
    let constant_trial = -alpha * perim / area;

    let mut rep = ExperimentReport::new(
        "theorem1",
        serde_json::json!({"domain": spec, "alpha": alpha, "h": h}),
    );
    rep.record("lambda_omega", eig.lambda);
    rep.record("lambda_ball", ball_res.lambda);
    rep.record("r_omega", r_omega);
    rep.record("center_x", center[0]);
    rep.record("center_y", center[1]);
    rep.record("area", area);
    rep.record("perimeter", perim);
    rep.record("product_omega", lhs);
    rep.record("product_ball", rhs);
    rep.record("product_margin", rhs - lhs);
    rep.record("eps_h", eps_h);
    rep.record("transplant_rayleigh", rayleigh);
    rep.record("equal_area_radius", equal_area_radius);
    rep.record("lambda_equal_area_ball", bareket);
    rep.record("constant_trial_bound", constant_trial);

    rep.push(Check::le("product_inequality", lhs, rhs, eps_h));
    rep.push(Check::le(
        "transplant_rayleigh_upper_bound",
        eig.lambda,
        rayleigh,
        1e-10 * (1.0 + rayleigh.abs()),
    ));
    rep.push(Check::le(
        "equal_area_ball_comparison",
        eig.lambda,
        bareket,
        eps_lambda,
    ));
    rep.push(Check::le("constant_trial_bound", eig.lambda, constant_trial, 0.0));
    // Perimeter chain: |dOmega| >= 2 sqrt(pi |Omega|) >= |dB_r|.
    let iso_mid = 2.0 * (PI * area).sqrt();
    rep.push(Check::le(
        "isoperimetric_perimeter",
        iso_mid,
        perim,
        1e-9 * perim,
    ));
    rep.push(Check::le(
        "harmonic_radius_isoperimetric",
        2.0 * PI * r_omega,
        iso_mid,
        h * h * perim,
    ));
    rep.wall_time_s = t0.elapsed().as_secs_f64();
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn disk_setup(h: f64) -> (Mesh, DirichletSolver) {
        let mesh = triangulate(&DomainSpec::disk(1.0), h).unwrap();
        let ops = assemble(&mesh);
        let solver = DirichletSolver::new(&mesh, &ops).unwrap();
        (mesh, solver)
    }

    #[test]
    fn disk_green_center_pole() {
        let (mesh, solver) = disk_setup(0.1);
        let green = green_function(&mesh, &solver, [0.0, 0.0]).unwrap();
        // Boundary nodes sit on the unit circle, so the regular part is the
        // zero extension and the radius is 1 to rounding.
        assert!(green.harmonic_radius_at_pole > 1.0 - 1e-10);
        assert!(green.harmonic_radius_at_pole < 1.0 + 1e-10);
        let b = mesh.boundary_loop.len();
        for i in 0..b {
            assert_eq!(green.g_field.values[i], 0.0);
        }
        let min_g = green.g_field.values.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min_g >= -1e-8, "min G = {min_g}");
        // Interior values match the closed form -ln|x| / 2 pi.
        for (i, &p) in mesh.nodes.iter().enumerate().skip(b) {
            let s = (p[0] * p[0] + p[1] * p[1]).sqrt();
            if s > 0.2 {
                let exact = -(s.ln()) / (2.0 * PI);
                assert!(
                    (green.g_field.values[i] - exact).abs() < 5e-3,
                    "node {i} at radius {s}"
                );
            }
        }
    }

    #[test]
    fn scaled_disk_radius() {
        let mesh = triangulate(&DomainSpec::disk(2.0), 0.2).unwrap();
        let ops = assemble(&mesh);
        let solver = DirichletSolver::new(&mesh, &ops).unwrap();
        let green = green_function(&mesh, &solver, [0.0, 0.0]).unwrap();
        assert_relative_eq!(green.harmonic_radius_at_pole, 2.0, max_relative = 1e-10);
    }

    #[test]
    fn off_center_disk_radius_closed_form() {
        // r(y) = 1 - |y|^2 on the unit disk.
        let (mesh, solver) = disk_setup(0.08);
        for &c in &[0.0f64, 0.3, 0.5] {
            let r = harmonic_radius_at(&mesh, &solver, [c, 0.0]).unwrap();
            let exact = 1.0 - c * c;
            assert!(
                (r - exact).abs() / exact < 1e-2,
                "at {c}: got {r}, want {exact}"
            );
        }
    }

    #[test]
    fn radius_decreases_toward_boundary() {
        let (mesh, solver) = disk_setup(0.1);
        let rs: Vec<f64> = [0.0f64, 0.25, 0.5]
            .iter()
            .map(|&c| harmonic_radius_at(&mesh, &solver, [c, 0.0]).unwrap())
            .collect();
        assert!(rs[0] > rs[1] && rs[1] > rs[2], "{rs:?}");
    }

    #[test]
    fn shallow_pole_rejected() {
        let (mesh, solver) = disk_setup(0.1);
        assert!(green_function(&mesh, &solver, [0.95, 0.0]).is_err());
    }

    #[test]
    fn harmonic_center_of_disk_and_ellipse() {
        let (mesh, solver) = disk_setup(0.1);
        let (y, r) = harmonic_center(&mesh, &solver).unwrap();
        assert!(y[0].abs() < 5e-2 && y[1].abs() < 5e-2, "center {y:?}");
        assert!((r - 1.0).abs() < 1e-2, "radius {r}");

        let spec = DomainSpec::ellipse(2.0, 1.0).unwrap();
        let mesh = triangulate(&spec, 0.15).unwrap();
        let ops = assemble(&mesh);
        let solver = DirichletSolver::new(&mesh, &ops).unwrap();
        let (y, r) = harmonic_center(&mesh, &solver).unwrap();
        assert!(y[0].abs() < 5e-2 && y[1].abs() < 5e-2, "center {y:?}");
        assert!(r > 1.0 && r < 2.0, "radius {r}");
    }

    #[test]
    fn superlevel_area_linear_field() {
        // g = x on the unit right triangle; {x > t} is a shrinking corner.
        let p = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let g = [0.0, 1.0, 0.0];
        assert_relative_eq!(superlevel_area(&p, &g, 0.5), 0.125, epsilon = 1e-14);
        assert_relative_eq!(superlevel_area(&p, &g, 0.25), 0.28125, epsilon = 1e-14);
        assert_eq!(superlevel_area(&p, &g, 1.5), 0.0);
        // t below all values gives the whole triangle.
        assert_relative_eq!(superlevel_area(&p, &g, -0.1), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn disk_level_sets_match_closed_form() {
        let (mesh, solver) = disk_setup(0.08);
        let green = green_function(&mesh, &solver, [0.0, 0.0]).unwrap();
        let grid = [0.0, 0.05, 0.1, 0.15];
        let table = level_set_measures(&mesh, &green, &grid).unwrap();
        assert_relative_eq!(table.m_omega[0], mesh.area(), max_relative = 1e-12);
        for i in 1..grid.len() {
            let exact = PI * (-4.0 * PI * grid[i]).exp();
            let got = table.m_omega[i];
            assert!(
                (got - exact).abs() / exact < 0.02,
                "t = {}: got {got}, want {exact}",
                grid[i]
            );
            assert!(table.m_omega[i] < table.m_omega[i - 1]);
            assert!(table.m_ball[i] < table.m_ball[i - 1]);
        }
        // Disk is the equality case: gamma-tilde is 1 up to mesh error.
        assert!((table.gamma_ratio - 1.0).abs() < 5e-3);
        let outcome = verify_lemma_cap2(&table);
        assert!(outcome.passed, "worst margin {}", outcome.worst_margin);
    }

    #[test]
    fn rejects_bad_t_grid() {
        let (mesh, solver) = disk_setup(0.15);
        let green = green_function(&mesh, &solver, [0.0, 0.0]).unwrap();
        assert!(level_set_measures(&mesh, &green, &[]).is_err());
        assert!(level_set_measures(&mesh, &green, &[0.1, 0.1]).is_err());
        assert!(level_set_measures(&mesh, &green, &[-0.1, 0.1]).is_err());
    }

    #[test]
    fn disk_capacity_equality() {
        let (mesh, solver) = disk_setup(0.08);
        let green = green_function(&mesh, &solver, [0.0, 0.0]).unwrap();
        for &t in &[0.05f64, 0.1] {
            let cap = verify_capacity_equality(&mesh, &green, t).unwrap();
            assert_relative_eq!(cap.cap_ball, 1.0 / t, max_relative = 1e-12);
            assert!(
                cap.relative_gap < 0.02,
                "t = {t}: gap {}",
                cap.relative_gap
            );
        }
        // Deep t has an under-resolved superlevel set.
        assert!(verify_capacity_equality(&mesh, &green, 1.0).is_err());
    }

    #[test]
    fn transplant_is_identity_on_disk() {
        let (mesh, solver) = disk_setup(0.08);
        let green = green_function(&mesh, &solver, [0.0, 0.0]).unwrap();
        let u = transplant(&mesh, &green, |s| s * s);
        let mut worst = 0.0f64;
        for (i, &p) in mesh.nodes.iter().enumerate() {
            let exact = p[0] * p[0] + p[1] * p[1];
            worst = worst.max((u.values[i] - exact).abs());
        }
        assert!(worst < 5e-2, "max nodal deviation {worst}");
        // Constants transplant to constants.
        let c = transplant(&mesh, &green, |_| 3.5);
        assert!(c.values.iter().all(|&v| v == 3.5));
        // Boundary nodes take the boundary value exactly.
        let b = mesh.boundary_loop.len();
        for i in 0..b {
            assert_eq!(u.values[i], green.harmonic_radius_at_pole.powi(2));
        }
    }

    #[test]
    fn transplant_energy_identity_disk() {
        let (mesh, solver) = disk_setup(0.08);
        let green = green_function(&mesh, &solver, [0.0, 0.0]).unwrap();
        let res = ball_eigenvalue(&BallProblem::new(2, 1.0, green.harmonic_radius_at_pole).unwrap())
            .unwrap();
        let u = transplant(&mesh, &green, |s| res.profile(s).unwrap());
        let ints = field_integrals(&mesh, &u, |v| v * v).unwrap();
        let r = green.harmonic_radius_at_pole;
        let d = 1e-6;
        let ball_energy = 2.0 * PI
            * simpson(
                |s| {
                    let up = (res.profile(s + d).unwrap() - res.profile(s - d).unwrap())
                        / (2.0 * d);
                    up * up * s
                },
                d,
                r - d,
                2048,
            );
        assert!(
            (ints.dirichlet - ball_energy).abs() / ball_energy < 0.02,
            "domain {} vs ball {}",
            ints.dirichlet,
            ball_energy
        );
    }

    #[test]
    fn transplant_sandwich_disk() {
        let (mesh, solver) = disk_setup(0.1);
        let green = green_function(&mesh, &solver, [0.0, 0.0]).unwrap();
        let bounds =
            verify_transplant_bounds(&mesh, &green, |s| s * s + 0.1, |v| v * v, 0.02).unwrap();
        assert!(bounds.passed(), "{bounds:?}");
        // f must be positive; a sign-changing map is rejected.
        assert!(
            verify_transplant_bounds(&mesh, &green, |s| s, |v| v - 10.0, 0.02).is_err()
        );
        // Decreasing profile violates the hypotheses.
        assert!(verify_transplant_bounds(&mesh, &green, |s| -s, |v| v.exp(), 0.02).is_err());
    }

    #[test]
    fn theorem1_disk_and_ellipse() {
        let rep = theorem1_check(&DomainSpec::disk(1.0), 1.0, 0.1).unwrap();
        assert!(rep.passed(), "disk: {:?}", rep.first_failure());
        // Equality case: products agree to a few percent at this h.
        let lhs = rep.quantities["product_omega"];
        let rhs = rep.quantities["product_ball"];
        assert!((lhs - rhs).abs() / rhs.abs() < 0.05, "lhs {lhs} rhs {rhs}");

        let spec = DomainSpec::ellipse(1.5, 1.0).unwrap();
        let rep = theorem1_check(&spec, 1.0, 0.1).unwrap();
        assert!(rep.passed(), "ellipse: {:?}", rep.first_failure());
        assert!(rep.quantities["product_margin"] > 0.0);
    }
}
