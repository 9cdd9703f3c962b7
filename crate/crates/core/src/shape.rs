//! Radial perturbations of star domains and first variations: the volume
//! flux, the Robin eigenvalue derivative, and the boundary-flux energy
//! derivative, each expressed as a boundary integral and validated against
//! remeshed finite differences.

use crate::domain::{DomainSpec, StarShape};
use crate::error::{Error, Result};
use crate::fem::{robin_principal_eigen, EigenResult, ScalarField};
use crate::mesh::{triangulate_with, Mesh, MeshOptions};

/// Radial boundary perturbation `rho-hat(theta)` of a star domain, given in
/// absolute units: the perturbed boundary is `r_t = r + t rho-hat`. The
/// induced boundary velocity is `v = rho-hat e_r`.
#[derive(Debug, Clone)]
pub struct PerturbationField {
    pub dc: f64,
    /// Coefficient of `cos(k theta)` at index `k - 1`.
    pub cos: Vec<f64>,
    /// Coefficient of `sin(k theta)` at index `k - 1`.
    pub sin: Vec<f64>,
    /// Largest |t| for which the perturbed domain is known to stay a valid
    /// star domain (half the worst-case radius margin).
    pub t_max: f64,
}

impl PerturbationField {
    pub fn new(spec: &DomainSpec, dc: f64, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        let shape = StarShape::from_spec(spec)
            .ok_or_else(|| Error::domain("perturbations need a star domain".to_string()))?;
        if !dc.is_finite() || cos.iter().chain(sin.iter()).any(|c| !c.is_finite()) {
            return Err(Error::domain(
                "non-finite perturbation coefficient".to_string(),
            ));
        }
        let mut pert = PerturbationField {
            dc,
            cos,
            sin,
            t_max: 0.0,
        };
        let n = 4096;
        let mut min_r = f64::INFINITY;
        let mut max_amp = 0.0f64;
        for i in 0..n {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            min_r = min_r.min(shape.radius(theta));
            max_amp = max_amp.max(pert.amplitude(theta).abs());
        }
        pert.t_max = if max_amp == 0.0 {
            f64::INFINITY
        } else {
            0.5 * min_r / max_amp
        };
        Ok(pert)
    }

    /// Uniform dilation `rho-hat = 1`.
    pub fn dilation(spec: &DomainSpec) -> Result<Self> {
        Self::new(spec, 1.0, Vec::new(), Vec::new())
    }

    /// Single cosine mode `rho-hat = amp cos(k theta)`, `k >= 1`.
    pub fn cosine_mode(spec: &DomainSpec, k: usize, amp: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("use the dc term for mode zero".to_string()));
        }
        let mut cos = vec![0.0; k];
        cos[k - 1] = amp;
        Self::new(spec, 0.0, cos, Vec::new())
    }

    /// Pointwise amplitude `rho-hat(theta)`.
    pub fn amplitude(&self, theta: f64) -> f64 {
        let mut v = self.dc;
        for (k, a) in self.cos.iter().enumerate() {
            v += a * ((k + 1) as f64 * theta).cos();
        }
        for (k, b) in self.sin.iter().enumerate() {
            v += b * ((k + 1) as f64 * theta).sin();
        }
        v
    }

    /// Linear combination `ca * a + cb * b`, revalidated against `spec`.
    pub fn combine(
        spec: &DomainSpec,
        a: &PerturbationField,
        ca: f64,
        b: &PerturbationField,
        cb: f64,
    ) -> Result<Self> {
        let nc = a.cos.len().max(b.cos.len());
        let ns = a.sin.len().max(b.sin.len());
        let get = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
        let cos = (0..nc)
            .map(|i| ca * get(&a.cos, i) + cb * get(&b.cos, i))
            .collect();
        let sin = (0..ns)
            .map(|i| ca * get(&a.sin, i) + cb * get(&b.sin, i))
            .collect();
        Self::new(spec, ca * a.dc + cb * b.dc, cos, sin)
    }
}

/// Star spec of the perturbed boundary `r(theta) + t rho-hat(theta)`,
/// by exact Fourier arithmetic.
pub fn perturbed_spec(spec: &DomainSpec, pert: &PerturbationField, t: f64) -> Result<DomainSpec> {
    if !(t.abs() <= pert.t_max) {
        return Err(Error::domain(format!(
            "|t| = {} exceeds the perturbation validity bound {}",
            t.abs(),
            pert.t_max
        )));
    }
    let (base, cos, sin) = match spec {
        DomainSpec::Star {
            base_radius,
            cos,
            sin,
        } => (*base_radius, cos, sin),
        DomainSpec::Polygon { .. } => {
            return Err(Error::domain("perturbations need a star domain".to_string()))
        }
    };
    // Star coefficients are relative to the base radius, the perturbation is
    // absolute: r_t = base (1 + sum a_k ...) + t (dc + sum c_k ...).
    let new_base = base + t * pert.dc;
    let nc = cos.len().max(pert.cos.len());
    let ns = sin.len().max(pert.sin.len());
    let get = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    let new_cos: Vec<f64> = (0..nc)
        .map(|i| (base * get(cos, i) + t * get(&pert.cos, i)) / new_base)
        .collect();
    let new_sin: Vec<f64> = (0..ns)
        .map(|i| (base * get(sin, i) + t * get(&pert.sin, i)) / new_base)
        .collect();
    let out = DomainSpec::star(new_base, new_cos, new_sin);
    out.validate()?;
    Ok(out)
}

/// Per-boundary-node analytic geometry of a star mesh: outward normal,
/// curvature, arc weight, and the radial factor `e_r . nu` that converts the
/// radial amplitude into normal velocity.
#[derive(Debug, Clone)]
pub struct BoundaryGeometry {
    pub thetas: Vec<f64>,
    pub normals: Vec<[f64; 2]>,
    pub curvatures: Vec<f64>,
    /// Uniform arc weight `P/m` (boundary nodes are equidistributed in arc
    /// length, making the node sum a periodic trapezoid rule).
    pub weights: Vec<f64>,
    pub radial_normal_cos: Vec<f64>,
    pub radii: Vec<f64>,
    pub perimeter: f64,
}

impl BoundaryGeometry {
    pub fn from_star(spec: &DomainSpec, mesh: &Mesh) -> Result<Self> {
        let shape = StarShape::from_spec(spec)
            .ok_or_else(|| Error::domain("boundary geometry needs a star domain".to_string()))?;
        let thetas = mesh
            .boundary_params
            .clone()
            .ok_or_else(|| Error::mesh("mesh carries no boundary parameters".to_string()))?;
        let m = thetas.len();
        if m != mesh.boundary_loop.len() {
            return Err(Error::mesh("boundary parameter count mismatch".to_string()));
        }
        let perimeter = spec.perimeter();
        let w = perimeter / m as f64;
        Ok(BoundaryGeometry {
            normals: thetas.iter().map(|&t| shape.outward_normal(t)).collect(),
            curvatures: thetas.iter().map(|&t| shape.curvature(t)).collect(),
            weights: vec![w; m],
            radial_normal_cos: thetas.iter().map(|&t| shape.radial_normal_cos(t)).collect(),
            radii: thetas.iter().map(|&t| shape.radius(t)).collect(),
            perimeter,
            thetas,
        })
    }

    /// Normal velocity `v . nu = rho-hat (e_r . nu)` at each boundary node.
    pub fn normal_velocity(&self, pert: &PerturbationField) -> Vec<f64> {
        self.thetas
            .iter()
            .zip(&self.radial_normal_cos)
            .map(|(&theta, &c)| pert.amplitude(theta) * c)
            .collect()
    }
}

/// First-order volume change `d|Omega_t|/dt = boundary integral of (v . nu)`.
pub fn volume_flux(geom: &BoundaryGeometry, pert: &PerturbationField) -> f64 {
    geom.normal_velocity(pert)
        .iter()
        .zip(&geom.weights)
        .map(|(v, w)| v * w)
        .sum()
}

/// Tangential derivative of a P1 field at each boundary node, from the
/// area-weighted average of adjacent-element gradients projected on the
/// analytic tangent.
fn boundary_tangential_gradient(
    mesh: &Mesh,
    geom: &BoundaryGeometry,
    field: &ScalarField,
) -> Vec<f64> {
    let b = mesh.boundary_loop.len();
    let adjacency = mesh.node_triangles();
    let mut out = Vec::with_capacity(b);
    for i in 0..b {
        let mut g = [0.0f64, 0.0];
        let mut wsum = 0.0;
        for &ti in &adjacency[i] {
            let gt = field.gradient_on(mesh, ti);
            let a = mesh.areas[ti];
            g[0] += a * gt[0];
            g[1] += a * gt[1];
            wsum += a;
        }
        g[0] /= wsum;
        g[1] /= wsum;
        let nu = geom.normals[i];
        let tau = [-nu[1], nu[0]];
        out.push(g[0] * tau[0] + g[1] * tau[1]);
    }
    out
}

/// Boundary-integral first variation of the principal Robin eigenvalue:
/// the integrand `|grad u|^2 - lambda u^2 - 2 alpha^2 u^2 - alpha kappa u^2`
/// against the normal velocity, with `|grad u|^2` split tangentially and
/// the normal part replaced through the Robin condition `du/dnu = alpha u`.
pub fn eigen_shape_derivative(
    mesh: &Mesh,
    geom: &BoundaryGeometry,
    alpha: f64,
    eig: &EigenResult,
    pert: &PerturbationField,
) -> Result<f64> {
    let b = mesh.boundary_loop.len();
    if eig.field.values.len() != mesh.n_nodes() {
        return Err(Error::precondition(
            "eigenfield does not match the mesh".to_string(),
        ));
    }
    let g_tau = boundary_tangential_gradient(mesh, geom, &eig.field);
    let vnu = geom.normal_velocity(pert);
    let lambda = eig.lambda;
    let mut sum = 0.0;
    for i in 0..b {
        let u = eig.field.values[i];
        let grad_sq = g_tau[i] * g_tau[i] + (alpha * u) * (alpha * u);
        let integrand = grad_sq
            - lambda * u * u
            - 2.0 * alpha * alpha * u * u
            - alpha * geom.curvatures[i] * u * u;
        sum += geom.weights[i] * integrand * vnu[i];
    }
    Ok(sum)
}

/// The three candidate curvature terms of the energy first variation. The
/// base integrand `|grad u|^2 - 2G(u) - 2 mu^2 rho^2 - 2 mu u drho/dnu` is
/// shared; the candidates differ in the final term, and the finite-difference
/// oracle decides which one is the derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Var1Report {
    /// Curvature term `+2 mu kappa`.
    pub curvature_bare: f64,
    /// Curvature term `+2 mu kappa u rho`.
    pub curvature_plus_urho: f64,
    /// Curvature term `-2 mu kappa u rho`.
    pub curvature_minus_urho: f64,
}

impl Var1Report {
    pub fn values(&self) -> [(&'static str, f64); 3] {
        [
            ("curvature_bare", self.curvature_bare),
            ("curvature_plus_urho", self.curvature_plus_urho),
            ("curvature_minus_urho", self.curvature_minus_urho),
        ]
    }

    /// Variant closest to a reference derivative, with its relative error.
    pub fn closest_to(&self, reference: f64) -> (&'static str, f64) {
        let scale = reference.abs().max(1e-300);
        self.values()
            .into_iter()
            .map(|(name, v)| (name, (v - reference).abs() / scale))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("three variants")
    }
}

/// First variation of the boundary-flux energy functional. `rho` and
/// `rho_normal_deriv` are nodal boundary values of the weight map and its
/// normal derivative (supplied analytically); `g_of` evaluates the bulk
/// nonlinearity `G`. The solution `u` must satisfy `du/dnu = mu rho`, which
/// replaces the normal gradient in `|grad u|^2`.
#[allow(clippy::too_many_arguments)]
pub fn steklov_first_variation(
    mesh: &Mesh,
    geom: &BoundaryGeometry,
    u: &ScalarField,
    g_of: impl Fn(f64) -> f64,
    mu: f64,
    rho: &[f64],
    rho_normal_deriv: &[f64],
    pert: &PerturbationField,
) -> Result<Var1Report> {
    let b = mesh.boundary_loop.len();
    if rho.len() != b || rho_normal_deriv.len() != b {
        return Err(Error::precondition(format!(
            "expected {b} boundary weight values"
        )));
    }
    let g_tau = boundary_tangential_gradient(mesh, geom, u);
    let vnu = geom.normal_velocity(pert);
    let mut bare = 0.0;
    let mut plus = 0.0;
    let mut minus = 0.0;
    for i in 0..b {
        let uv = u.values[i];
        let grad_sq = g_tau[i] * g_tau[i] + (mu * rho[i]) * (mu * rho[i]);
        let base = grad_sq
            - 2.0 * g_of(uv)
            - 2.0 * mu * mu * rho[i] * rho[i]
            - 2.0 * mu * uv * rho_normal_deriv[i];
        let curv = 2.0 * mu * geom.curvatures[i];
        let w = geom.weights[i] * vnu[i];
        bare += w * (base + curv);
        plus += w * (base + curv * uv * rho[i]);
        minus += w * (base - curv * uv * rho[i]);
    }
    Ok(Var1Report {
        curvature_bare: bare,
        curvature_plus_urho: plus,
        curvature_minus_urho: minus,
    })
}

/// Centered finite difference with one Richardson halving step:
/// `(4 D(t/2) - D(t)) / 3` with `D(s) = (f(s) - f(-s)) / 2s`.
pub fn richardson_derivative(f: impl Fn(f64) -> Result<f64>, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::precondition(format!("need a positive step, got {t}")));
    }
    let central = |s: f64| -> Result<f64> { Ok((f(s)? - f(-s)?) / (2.0 * s)) };
    let d1 = central(t)?;
    let d2 = central(0.5 * t)?;
    Ok((4.0 * d2 - d1) / 3.0)
}

/// Robin eigenvalue of the perturbed domain, remeshed at the same target `h`
/// and the same boundary node count so meshes stay comparable across `t`.
pub fn perturbed_eigenvalue(
    spec: &DomainSpec,
    alpha: f64,
    h: f64,
    boundary_count: usize,
    pert: &PerturbationField,
    t: f64,
) -> Result<f64> {
    let p = perturbed_spec(spec, pert, t)?;
    let mesh = triangulate_with(
        &p,
        h,
        &MeshOptions {
            boundary_count: Some(boundary_count),
        },
    )?;
    Ok(robin_principal_eigen(&mesh, alpha)?.lambda)
}

/// Finite-difference oracle for the eigenvalue derivative: remeshed central
/// differences at step `t` with Richardson extrapolation.
pub fn eigen_derivative_fd(
    spec: &DomainSpec,
    alpha: f64,
    h: f64,
    boundary_count: usize,
    pert: &PerturbationField,
    t: f64,
) -> Result<f64> {
    richardson_derivative(
        |s| perturbed_eigenvalue(spec, alpha, h, boundary_count, pert, s),
        t,
    )
}
