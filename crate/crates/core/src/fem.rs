//! P1 finite elements on triangle meshes: operator assembly, the principal
//! Robin eigensolver, harmonic (Dirichlet) extension, a Helmholtz Neumann
//! solve, and quadrature of scalar fields.
//!
//! Conventions: the stiffness matrix K is the Dirichlet energy form, the
//! consistent mass matrix M the L2 form, and the boundary mass matrix B the
//! boundary L2 form on the polyline; all three are exact on P1 fields.

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::sparse::{SkylineFactor, SymCsr};

/// Nodal scalar field on a mesh (values aligned with `mesh.nodes`).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn constant(mesh: &Mesh, c: f64) -> Self {
        ScalarField {
            values: vec![c; mesh.n_nodes()],
        }
    }

    pub fn from_fn(mesh: &Mesh, f: impl Fn([f64; 2]) -> f64) -> Self {
        ScalarField {
            values: mesh.nodes.iter().map(|&p| f(p)).collect(),
        }
    }

    /// P1 interpolation at an arbitrary interior point.
    pub fn interpolate(&self, mesh: &Mesh, p: [f64; 2]) -> Result<f64> {
        let (ti, bary) = mesh
            .locate(p)
            .ok_or_else(|| Error::domain(format!("point {p:?} is outside the mesh")))?;
        let t = mesh.triangles[ti];
        Ok((0..3).map(|k| bary[k] * self.values[t[k]]).sum())
    }

    /// Constant gradient of the field on triangle `ti`.
    pub fn gradient_on(&self, mesh: &Mesh, ti: usize) -> [f64; 2] {
        let t = mesh.triangles[ti];
        let p = [mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]];
        let area2 = 2.0 * mesh.areas[ti];
        let mut g = [0.0, 0.0];
        for i in 0..3 {
            let j = (i + 1) % 3;
            let k = (i + 2) % 3;
            // grad of the hat at vertex i.
            let bx = (p[j][1] - p[k][1]) / area2;
            let by = (p[k][0] - p[j][0]) / area2;
            g[0] += self.values[t[i]] * bx;
            g[1] += self.values[t[i]] * by;
        }
        g
    }
}

/// Assembled P1 operators.
#[derive(Debug, Clone)]
pub struct FemOperators {
    pub stiffness: SymCsr,
    pub mass: SymCsr,
    pub boundary_mass: SymCsr,
}

/// Assemble K, M, B on a mesh.
pub fn assemble(mesh: &Mesh) -> FemOperators {
    let n = mesh.n_nodes();
    let mut kt = Vec::with_capacity(9 * mesh.n_triangles());
    let mut mt = Vec::with_capacity(9 * mesh.n_triangles());
    for (ti, t) in mesh.triangles.iter().enumerate() {
        let p = [mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]];
        let area = mesh.areas[ti];
        // Edge-opposite coefficients: grad hat_i = (b_i, c_i) / (2 area).
        let mut b = [0.0; 3];
        let mut c = [0.0; 3];
        for i in 0..3 {
            let j = (i + 1) % 3;
            let k = (i + 2) % 3;
            b[i] = p[j][1] - p[k][1];
            c[i] = p[k][0] - p[j][0];
        }
        for i in 0..3 {
            for j in 0..3 {
                let kij = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
                kt.push((t[i], t[j], kij));
                let mij = area / 12.0 * if i == j { 2.0 } else { 1.0 };
                mt.push((t[i], t[j], mij));
            }
        }
    }
    let mut bt = Vec::with_capacity(4 * mesh.boundary_edges.len());
    for e in &mesh.boundary_edges {
        let a = mesh.nodes[e[0]];
        let b = mesh.nodes[e[1]];
        let len = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        bt.push((e[0], e[0], len / 3.0));
        bt.push((e[1], e[1], len / 3.0));
        bt.push((e[0], e[1], len / 6.0));
        bt.push((e[1], e[0], len / 6.0));
    }
    FemOperators {
        stiffness: SymCsr::from_triplets(n, &kt),
        mass: SymCsr::from_triplets(n, &mt),
        boundary_mass: SymCsr::from_triplets(n, &bt),
    }
}

/// Principal Robin eigenpair.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub lambda: f64,
    pub field: ScalarField,
    /// l2 norm of `A u - lambda M u` after normalization.
    pub residual: f64,
    pub iterations: usize,
}

/// Principal eigenvalue of `-Laplace` with Robin condition
/// `du/dnu = alpha u` on the mesh: smallest `lambda` of
/// `K u - alpha B u = lambda M u`, by shift-and-invert inverse iteration.
///
/// The shift `-alpha |boundary| / |domain| - 1` sits strictly below the
/// spectrum (a constant trial field shows the bottom eigenvalue is above
/// `-alpha |boundary| / |domain|`), so the shifted pencil is SPD. The
/// returned eigenfunction is positive and normalized to unit L2 norm.
pub fn robin_principal_eigen(mesh: &Mesh, alpha: f64) -> Result<EigenResult> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::domain(format!(
            "alpha must be finite and positive, got {alpha}"
        )));
    }
    let ops = assemble(mesh);
    robin_principal_eigen_assembled(mesh, &ops, alpha)
}

/// Same as [`robin_principal_eigen`] with caller-provided operators.
pub fn robin_principal_eigen_assembled(
    mesh: &Mesh,
    ops: &FemOperators,
    alpha: f64,
) -> Result<EigenResult> {
    let n = mesh.n_nodes();
    let a = SymCsr::add_scaled(&ops.stiffness, 1.0, &ops.boundary_mass, -alpha);
    let sigma = -alpha * mesh.perimeter() / mesh.area() - 1.0;
    let shifted = SymCsr::add_scaled(&a, 1.0, &ops.mass, -sigma);
    let factor = SkylineFactor::new(&shifted).map_err(|e| {
        Error::solver(format!("shifted Robin pencil failed to factor: {e}"))
    })?;

    let mut v = vec![1.0; n];
    let norm = ops.mass.quadratic(&v).sqrt();
    for x in &mut v {
        *x /= norm;
    }
    let mut rho_prev = f64::INFINITY;
    let mut iterations = 0;
    loop {
        iterations += 1;
        if iterations > 500 {
            return Err(Error::convergence(format!(
                "inverse iteration did not converge in 500 steps (last Rayleigh {rho_prev:.6e})"
            )));
        }
        let w = factor.solve(&ops.mass.matvec(&v));
        let norm = ops.mass.quadratic(&w).sqrt();
        let w: Vec<f64> = w.into_iter().map(|x| x / norm).collect();
        let rho = a.quadratic(&w);
        let done = (rho - rho_prev).abs() <= 1e-12 * (1.0 + rho.abs()) && iterations >= 3;
        v = w;
        rho_prev = rho;
        if done {
            break;
        }
    }

    // Fix the sign to the positive principal branch.
    let mean: f64 = ops.mass.matvec(&v).iter().sum();
    if mean < 0.0 {
        for x in &mut v {
            *x = -*x;
        }
    }
    if v.iter().any(|&x| x <= 0.0) {
        return Err(Error::solver(
            "principal eigenfunction is not positive everywhere; mesh too coarse".to_string(),
        ));
    }

    let lambda = rho_prev;
    let au = a.matvec(&v);
    let mu = ops.mass.matvec(&v);
    let residual = au
        .iter()
        .zip(&mu)
        .map(|(x, y)| (x - lambda * y).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(EigenResult {
        lambda,
        field: ScalarField { values: v },
        residual,
        iterations,
    })
}

/// Reusable solver for Dirichlet problems `-Laplace u = 0, u = g` on the
/// boundary; the interior stiffness block is factored once.
pub struct DirichletSolver {
    k: SymCsr,
    factor: SkylineFactor,
    interior: Vec<usize>,
    boundary_count: usize,
    n: usize,
}

impl DirichletSolver {
    pub fn new(mesh: &Mesh, ops: &FemOperators) -> Result<Self> {
        let n = mesh.n_nodes();
        let b = mesh.boundary_loop.len();
        let keep: Vec<bool> = (0..n).map(|i| i >= b).collect();
        let (kii, interior) = ops.stiffness.restrict(&keep);
        if interior.is_empty() {
            return Err(Error::mesh(
                "no interior nodes; refine the mesh".to_string(),
            ));
        }
        let factor = SkylineFactor::new(&kii)?;
        Ok(DirichletSolver {
            k: ops.stiffness.clone(),
            factor,
            interior,
            boundary_count: b,
            n,
        })
    }

    /// Discrete harmonic extension of boundary data `g` (one value per
    /// boundary node, in loop order).
    pub fn extend(&self, g: &[f64]) -> Result<ScalarField> {
        if g.len() != self.boundary_count {
            return Err(Error::precondition(format!(
                "expected {} boundary values, got {}",
                self.boundary_count,
                g.len()
            )));
        }
        let mut full = vec![0.0; self.n];
        full[..self.boundary_count].copy_from_slice(g);
        // rhs_I = -K_IB g.
        let coupled = self.k.matvec(&full);
        let rhs: Vec<f64> = self.interior.iter().map(|&i| -coupled[i]).collect();
        let xi = self.factor.solve(&rhs);
        for (p, &i) in self.interior.iter().enumerate() {
            full[i] = xi[p];
        }
        Ok(ScalarField { values: full })
    }
}

/// Solve `(K + c2 M) u = B g` where `g` is a boundary flux density given at
/// the boundary nodes. Requires `c2 > 0` so the operator is SPD.
pub fn helmholtz_neumann_solve(
    mesh: &Mesh,
    ops: &FemOperators,
    c2: f64,
    boundary_flux: &[f64],
) -> Result<ScalarField> {
    if !(c2 > 0.0) {
        return Err(Error::domain(format!("need c2 > 0, got {c2}")));
    }
    let b = mesh.boundary_loop.len();
    if boundary_flux.len() != b {
        return Err(Error::precondition(format!(
            "expected {} boundary flux values, got {}",
            b,
            boundary_flux.len()
        )));
    }
    let mut g = vec![0.0; mesh.n_nodes()];
    g[..b].copy_from_slice(boundary_flux);
    let rhs = ops.boundary_mass.matvec(&g);
    let op = SymCsr::add_scaled(&ops.stiffness, 1.0, &ops.mass, c2);
    let factor = SkylineFactor::new(&op)?;
    Ok(ScalarField {
        values: factor.solve(&rhs),
    })
}

/// Quadratures of a composed field over the mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldIntegrals {
    /// `integral of f(u) dx` (3-point edge-midpoint rule, exact through
    /// quadratics).
    pub volume: f64,
    /// `integral of f(u) dS` over the boundary polyline (2-point Gauss).
    pub boundary: f64,
    /// `integral of |grad u|^2 dx` (exact for P1).
    pub dirichlet: f64,
}

/// Integrate `f(u)` over the mesh and its boundary, and the exact Dirichlet
/// energy of `u`.
pub fn field_integrals(
    mesh: &Mesh,
    u: &ScalarField,
    f: impl Fn(f64) -> f64,
) -> Result<FieldIntegrals> {
    if u.values.len() != mesh.n_nodes() {
        return Err(Error::precondition(format!(
            "field has {} values for {} nodes",
            u.values.len(),
            mesh.n_nodes()
        )));
    }
    let mut volume = 0.0;
    let mut dirichlet = 0.0;
    for (ti, t) in mesh.triangles.iter().enumerate() {
        let vals = [u.values[t[0]], u.values[t[1]], u.values[t[2]]];
        let area = mesh.areas[ti];
        // Midpoints of the three edges.
        volume += area / 3.0
            * (f(0.5 * (vals[0] + vals[1]))
                + f(0.5 * (vals[1] + vals[2]))
                + f(0.5 * (vals[2] + vals[0])));
        let g = u.gradient_on(mesh, ti);
        dirichlet += area * (g[0] * g[0] + g[1] * g[1]);
    }
    let mut boundary = 0.0;
    let gauss = 0.5 / 3.0f64.sqrt();
    for e in &mesh.boundary_edges {
        let a = mesh.nodes[e[0]];
        let b = mesh.nodes[e[1]];
        let len = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        let (ua, ub) = (u.values[e[0]], u.values[e[1]]);
        for t in [0.5 - gauss, 0.5 + gauss] {
            boundary += 0.5 * len * f(ua + t * (ub - ua));
        }
    }
    Ok(FieldIntegrals {
        volume,
        boundary,
        dirichlet,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::{ball_eigenvalue, BallProblem};
    use crate::domain::DomainSpec;
    use crate::mesh::triangulate;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn unit_square() -> DomainSpec {
        DomainSpec::Polygon {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        }
    }

    #[test]
    fn operators_on_constants_and_linears() {
        let mesh = triangulate(&unit_square(), 0.2).unwrap();
        let ops = assemble(&mesh);
        let ones = vec![1.0; mesh.n_nodes()];
        // Stiffness annihilates constants.
        let k1 = ops.stiffness.matvec(&ones);
        assert!(k1.iter().all(|v| v.abs() < 1e-12));
        // Mass of 1 is the area, boundary mass of 1 the perimeter.
        assert_relative_eq!(ops.mass.quadratic(&ones), 1.0, max_relative = 1e-12);
        assert_relative_eq!(
            ops.boundary_mass.quadratic(&ones),
            4.0,
            max_relative = 1e-12
        );
        // u = x: integral of x^2 = 1/3, energy = 1, boundary integral = 5/3.
        let u = ScalarField::from_fn(&mesh, |p| p[0]);
        assert_relative_eq!(ops.mass.quadratic(&u.values), 1.0 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(ops.stiffness.quadratic(&u.values), 1.0, max_relative = 1e-12);
        assert_relative_eq!(
            ops.boundary_mass.quadratic(&u.values),
            5.0 / 3.0,
            max_relative = 1e-12
        );
        // Quadrature module agrees.
        let ints = field_integrals(&mesh, &u, |s| s * s).unwrap();
        assert_relative_eq!(ints.volume, 1.0 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(ints.boundary, 5.0 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(ints.dirichlet, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn gradient_of_linear_field() {
        let mesh = triangulate(&unit_square(), 0.3).unwrap();
        let u = ScalarField::from_fn(&mesh, |p| 2.0 * p[0] - 3.0 * p[1] + 1.0);
        for ti in 0..mesh.n_triangles() {
            let g = u.gradient_on(&mesh, ti);
            assert_relative_eq!(g[0], 2.0, epsilon = 1e-10);
            assert_relative_eq!(g[1], -3.0, epsilon = 1e-10);
        }
        assert_relative_eq!(
            u.interpolate(&mesh, [0.3, 0.4]).unwrap(),
            2.0 * 0.3 - 3.0 * 0.4 + 1.0,
            epsilon = 1e-10
        );
    }

    #[test]
    fn robin_eigen_disk_matches_radial_solver() {
        let mesh = triangulate(&DomainSpec::disk(1.0), 0.1).unwrap();
        let eig = robin_principal_eigen(&mesh, 1.0).unwrap();
        let oracle = ball_eigenvalue(&BallProblem::new(2, 1.0, 1.0).unwrap()).unwrap();
        let rel = (eig.lambda - oracle.lambda).abs() / oracle.lambda.abs();
        assert!(rel < 0.03, "relative error {rel} at h=0.1");
        // Positive, normalized, self-consistent Rayleigh quotient.
        assert!(eig.field.values.iter().all(|&v| v > 0.0));
        let ops = assemble(&mesh);
        assert_relative_eq!(ops.mass.quadratic(&eig.field.values), 1.0, max_relative = 1e-10);
        let a = crate::sparse::SymCsr::add_scaled(&ops.stiffness, 1.0, &ops.boundary_mass, -1.0);
        let rayleigh = a.quadratic(&eig.field.values) / ops.mass.quadratic(&eig.field.values);
        assert!((rayleigh - eig.lambda).abs() < 1e-12 * (1.0 + eig.lambda.abs()));
        // Radial profile increases toward the boundary.
        let center = eig.field.interpolate(&mesh, [0.0, 0.0]).unwrap();
        let boundary_avg: f64 = (0..mesh.boundary_loop.len())
            .map(|i| eig.field.values[i])
            .sum::<f64>()
            / mesh.boundary_loop.len() as f64;
        assert!(boundary_avg > center);
    }

    #[test]
    fn eigenvalue_is_variational_minimum() {
        let mesh = triangulate(&DomainSpec::disk(1.0), 0.18).unwrap();
        let ops = assemble(&mesh);
        let alpha = 1.0;
        let eig = robin_principal_eigen_assembled(&mesh, &ops, alpha).unwrap();
        let a = crate::sparse::SymCsr::add_scaled(&ops.stiffness, 1.0, &ops.boundary_mass, -alpha);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let w: Vec<f64> = (0..mesh.n_nodes())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            let rayleigh = a.quadratic(&w) / ops.mass.quadratic(&w);
            assert!(
                eig.lambda <= rayleigh + 1e-10 * (1.0 + rayleigh.abs()),
                "trial field beat the eigenvalue: {rayleigh} < {}",
                eig.lambda
            );
        }
        // Constant-trial upper bound is exact in the discrete setting.
        let bound = -alpha * mesh.perimeter() / mesh.area();
        assert!(eig.lambda < bound);
    }

    #[test]
    fn dirichlet_extension_of_harmonic_polynomial() {
        let mesh = triangulate(&DomainSpec::disk(1.0), 0.1).unwrap();
        let ops = assemble(&mesh);
        let solver = DirichletSolver::new(&mesh, &ops).unwrap();
        let g: Vec<f64> = mesh
            .boundary_loop
            .iter()
            .map(|&i| {
                let p = mesh.nodes[i];
                p[0] * p[0] - p[1] * p[1]
            })
            .collect();
        let u = solver.extend(&g).unwrap();
        let mut worst = 0.0f64;
        for (i, &p) in mesh.nodes.iter().enumerate() {
            let exact = p[0] * p[0] - p[1] * p[1];
            worst = worst.max((u.values[i] - exact).abs());
        }
        assert!(worst < 0.02, "max nodal error {worst}");
        // Boundary data reproduced exactly.
        for (j, &i) in mesh.boundary_loop.iter().enumerate() {
            assert_eq!(u.values[i], g[j]);
        }
    }

    #[test]
    fn dirichlet_solver_rejects_wrong_data_length() {
        let mesh = triangulate(&DomainSpec::disk(1.0), 0.25).unwrap();
        let ops = assemble(&mesh);
        let solver = DirichletSolver::new(&mesh, &ops).unwrap();
        assert!(solver.extend(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn helmholtz_disk_closed_form() {
        // (K + c^2 M) u = B rho with rho = 1 matches
        // u(s) = I_0(c s) / (c I_1(c R)) on the disk.
        use crate::special::{bessel_i, BesselOrder};
        let mesh = triangulate(&DomainSpec::disk(1.0), 0.08).unwrap();
        let ops = assemble(&mesh);
        let c = 1.0f64;
        let flux = vec![1.0; mesh.boundary_loop.len()];
        let u = helmholtz_neumann_solve(&mesh, &ops, c * c, &flux).unwrap();
        let i0 = BesselOrder::new(0.0).unwrap();
        let i1 = BesselOrder::new(1.0).unwrap();
        let denom = c * bessel_i(i1, c).unwrap();
        for &p in &[[0.0f64, 0.0], [0.5, 0.0], [0.0, -0.8]] {
            let s = (p[0] * p[0] + p[1] * p[1]).sqrt();
            let exact = bessel_i(i0, c * s).unwrap() / denom;
            let got = u.interpolate(&mesh, p).unwrap();
            assert!(
                (got - exact).abs() / exact.abs() < 0.01,
                "at {p:?}: got {got}, want {exact}"
            );
        }
    }

    #[test]
    fn rejects_bad_alpha() {
        let mesh = triangulate(&DomainSpec::disk(1.0), 0.25).unwrap();
        assert!(robin_principal_eigen(&mesh, 0.0).is_err());
        assert!(robin_principal_eigen(&mesh, -1.0).is_err());
        assert!(robin_principal_eigen(&mesh, f64::NAN).is_err());
    }
}
