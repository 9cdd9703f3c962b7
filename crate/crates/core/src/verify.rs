//! Acceptance-grade verification suites: one function per numbered criterion,
//! each returning an [`ExperimentReport`] with every tolerance pinned in code.
//! Two criteria probe inequality directions that genuinely fail off-disk
//! (the weighted transplant upper bound and the middle link of the energy
//! chain); their reports carry the measured violations rather than inflated
//! allowances. See the repository README for the summary of expected
//! verdicts.

use std::f64::consts::PI;
use std::time::Instant;

use crate::ball::{
    ball_eigenvalue, ball_monotonicity_check, ball_shape_derivative_closed_form,
    shooting_eigenvalue, BallProblem,
};
use crate::domain::DomainSpec;
use crate::error::Result;
use crate::fem::{assemble, field_integrals, robin_principal_eigen, DirichletSolver};
use crate::green::{
    green_function, harmonic_center, level_set_measures, theorem1_check,
    verify_capacity_equality, verify_lemma_cap2, verify_transplant_bounds,
};
use crate::mesh::triangulate;
use crate::report::{Check, ExperimentReport};
use crate::shape::{
    eigen_derivative_fd, eigen_shape_derivative, richardson_derivative,
    steklov_first_variation, BoundaryGeometry, PerturbationField,
};
use crate::special::{bessel_i, BesselOrder};
use crate::steklov::{
    minimize_energy_assembled, verify_energy_bound, BoundaryWeight, ComparisonProblem,
    EnergyProblem, Nonlinearity,
};

/// The canonical noncircular test domains used across the geometric criteria.
pub fn test_domains() -> Vec<(&'static str, DomainSpec)> {
    vec![
        ("ellipse_1.5", DomainSpec::ellipse(1.5, 1.0).expect("valid")),
        ("ellipse_2.0", DomainSpec::ellipse(2.0, 1.0).expect("valid")),
        ("ellipse_3.0", DomainSpec::ellipse(3.0, 1.0).expect("valid")),
        ("star_3lobe", DomainSpec::star(1.0, vec![0.0, 0.0, 0.3], vec![])),
        ("star_4lobe", DomainSpec::star(1.0, vec![0.0, 0.0, 0.0, 0.2], vec![])),
    ]
}

fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    logspace(lo, hi, n)
}

/// Ball solver vs the independent shooting oracle over the full parameter
/// grid; relative agreement within 1e-8 and under five seconds.
pub fn criterion_01_ball_oracle() -> Result<ExperimentReport> {
    let t0 = Instant::now();
    let mut rep = ExperimentReport::new(
        "criterion_01_ball_oracle",
        serde_json::json!({"dims": [2,3,4], "alphas": [0.5,1.0,2.0], "radii": [0.5,1.0,2.0]}),
    );
    let mut worst = 0.0f64;
    let mut cases = 0;
    for dim in [2u32, 3, 4] {
        for alpha in [0.5, 1.0, 2.0] {
            for radius in [0.5, 1.0, 2.0] {
                let p = BallProblem::new(dim, alpha, radius)?;
                let solved = ball_eigenvalue(&p)?;
                let shot = shooting_eigenvalue(&p)?;
                let rel = (solved.lambda - shot).abs() / solved.lambda.abs();
                worst = worst.max(rel);
                cases += 1;
            }
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    rep.record("cases", cases as f64);
    rep.record("worst_relative_gap", worst);
    rep.record("runtime_s", elapsed);
    rep.push(Check::le("solver_oracle_agreement", worst, 1e-8, 0.0));
    rep.push(Check::le("runtime_under_5s", elapsed, 5.0, 0.0));
    rep.wall_time_s = elapsed;
    Ok(rep)
}

/// Large-radius limit: `sqrt(-lambda(B_r)) -> alpha` from above, already
/// inside (1.0, 1.1) at r = 50 for alpha = 1, decreasing along the grid.
pub fn criterion_02_asymptotic_limit() -> Result<ExperimentReport> {
    let t0 = Instant::now();
    let alpha = 1.0;
    let radii = [5.0, 10.0, 20.0, 50.0];
    let mut rep = ExperimentReport::new(
        "criterion_02_asymptotic_limit",
        serde_json::json!({"dim": 2, "alpha": alpha, "radii": radii}),
    );
    let mut ys = Vec::new();
    for r in radii {
        let res = ball_eigenvalue(&BallProblem::new(2, alpha, r)?)?;
        let y = (-res.lambda).sqrt();
        rep.record(format!("sqrt_neg_lambda_r{r}"), y);
        ys.push(y);
    }
    let y50 = ys[3];
    rep.push(Check::holds("limit_window_lower", y50 > 1.0, y50 - 1.0));
    rep.push(Check::holds("limit_window_upper", y50 < 1.1, 1.1 - y50));
    let min_drop = ys
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(f64::INFINITY, f64::min);
    rep.record("min_consecutive_drop", min_drop);
    rep.push(Check::holds(
        "strictly_decreasing_toward_alpha",
        min_drop > 0.0,
        min_drop,
    ));
    let elapsed = t0.elapsed().as_secs_f64();
    rep.record("runtime_s", elapsed);
    rep.push(Check::le("runtime_under_1s", elapsed, 1.0, 0.0));
    rep.wall_time_s = elapsed;
    Ok(rep)
}

/// Strict monotonicity of `lambda(B_r)` and of `y = r^{n/2} sqrt(-lambda)`
/// along a 20-point geometric radius grid for six (dim, alpha) pairs.
pub fn criterion_03_monotonicity() -> Result<ExperimentReport> {
    let t0 = Instant::now();
    let radii = geomspace(0.25, 16.0, 20);
    let mut rep = ExperimentReport::new(
        "criterion_03_monotonicity",
        serde_json::json!({"dims": [2,3], "alphas": [0.5,1.0,2.0],
                           "r_lo": 0.25, "r_hi": 16.0, "points": 20}),
    );
    for dim in [2u32, 3] {
        for alpha in [0.5, 1.0, 2.0] {
            let m = ball_monotonicity_check(dim, alpha, &radii)?;
            let tag = format!("n{dim}_alpha{alpha}");
            rep.record(format!("min_lambda_gap_{tag}"), m.min_lambda_gap);
            rep.record(format!("min_y_gap_{tag}"), m.min_y_gap);
            rep.push(Check::holds(
                format!("lambda_increasing_{tag}"),
                m.lambda_strictly_increasing(),
                m.min_lambda_gap,
            ));
            rep.push(Check::holds(
                format!("y_increasing_{tag}"),
                m.y_strictly_increasing(),
                m.min_y_gap,
            ));
        }
    }
    rep.wall_time_s = t0.elapsed().as_secs_f64();
    Ok(rep)
}

/// Sign inequality `lambda + alpha^2 + alpha (n-1)/r < 0` over every ball
/// case solved by the first and third criteria.
pub fn criterion_04_sign_inequality() -> Result<ExperimentReport> {
    let t0 = Instant::now();
    let mut rep = ExperimentReport::new(
        "criterion_04_sign_inequality",
        serde_json::json!({"source": "criterion 1 grid plus criterion 3 grids"}),
    );
    let mut worst = f64::INFINITY;
    let mut cases = 0;
    let mut run = |dim: u32, alpha: f64, radius: f64| -> Result<()> {
        let res = ball_eigenvalue(&BallProblem::new(dim, alpha, radius)?)?;
        worst = worst.min(res.sign_margin());
        cases += 1;
        Ok(())
    };
    for dim in [2u32, 3, 4] {
        for alpha in [0.5, 1.0, 2.0] {
            for radius in [0.5, 1.0, 2.0] {
                run(dim, alpha, radius)?;
            }
        }
    }
    for dim in [2u32, 3] {
        for alpha in [0.5, 1.0, 2.0] {
            for radius in geomspace(0.25, 16.0, 20) {
                run(dim, alpha, radius)?;
            }
        }
    }
    rep.record("cases", cases as f64);
    rep.record("worst_sign_margin", worst);
    rep.push(Check::holds("sign_margin_positive_everywhere", worst > 0.0, worst));
    rep.wall_time_s = t0.elapsed().as_secs_f64();
    Ok(rep)
}

/// FEM eigenvalue on the unit disk against the ball solver: within 1% at
/// h = 0.05 and at least three times better at h = 0.025.
pub fn criterion_05_fem_validation() -> Result<ExperimentReport> {
    let t0 = Instant::now();
    let alpha = 1.0;
    let oracle = ball_eigenvalue(&BallProblem::new(2, alpha, 1.0)?)?.lambda;
    let mut rep = ExperimentReport::new(
        "criterion_05_fem_validation",
        serde_json::json!({"alpha": alpha, "h": [0.05, 0.025], "oracle_lambda": oracle}),
    );
    let mut rels = Vec::new();
    for h in [0.05, 0.025] {
        let mesh = triangulate(&DomainSpec::disk(1.0), h)?;
        let eig = robin_principal_eigen(&mesh, alpha)?;
        let rel = (eig.lambda - oracle).abs() / oracle.abs();
        rep.record(format!("relative_error_h{h}"), rel);
        rep.record(format!("lambda_h{h}"), eig.lambda);
        rels.push(rel);
    }
    rep.record("error_ratio", rels[0] / rels[1]);
    rep.push(Check::le("one_percent_at_h005", rels[0], 0.01, 0.0));
    rep.push(Check::le("convergence_factor_3", 3.0 * rels[1], rels[0], 0.0));
    let elapsed = t0.elapsed().as_secs_f64();
    rep.record("runtime_s", elapsed);
    rep.push(Check::le("runtime_under_60s", elapsed, 60.0, 0.0));
    rep.wall_time_s = elapsed;
    Ok(rep)
}

/// Harmonic radius of the unit disk (value and center location) and the
/// isoperimetric property `|B_{r_Omega}| <= |Omega|` on every test domain.
pub fn criterion_06_harmonic_radius() -> Result<ExperimentReport> {
    let t0 = Instant::now();
    let mut rep = ExperimentReport::new(
        "criterion_06_harmonic_radius",
        serde_json::json!({"disk_h": 0.05, "domain_h": 0.06}),
    );
    let mesh = triangulate(&DomainSpec::disk(1.0), 0.05)?;
    let ops = assemble(&mesh);
    let solver = DirichletSolver::new(&mesh, &ops)?;
    let (center, r_omega) = harmonic_center(&mesh, &solver)?;
    let offset = (center[0] * center[0] + center[1] * center[1]).sqrt();
    rep.record("disk_r_omega", r_omega);
    rep.record("disk_center_offset", offset);
    rep.push(Check::close("disk_radius", r_omega, 1.0, 1e-2));
    rep.push(Check::close("disk_center", offset, 0.0, 5e-2));

    let h = 0.06;
    let mut worst_ratio = 0.0f64;
    let mut domains = vec![("disk", DomainSpec::disk(1.0))];
    domains.extend(test_domains());
    for (name, spec) in &domains {
        let mesh = triangulate(spec, h)?;
        let ops = assemble(&mesh);
        let solver = DirichletSolver::new(&mesh, &ops)?;
        let (_, r) = harmonic_center(&mesh, &solver)?;
        let ratio = PI * r * r / mesh.area();
        rep.record(format!("ball_area_ratio_{name}"), ratio);
        worst_ratio = worst_ratio.max(ratio);
    }
    rep.record("worst_ball_area_ratio", worst_ratio);
    rep.push(Check::le(
        "ball_area_le_domain_area",
        worst_ratio,
        1.0,
        5.0 * h * h,
    ));
    rep.wall_time_s = t0.elapsed().as_secs_f64();
    Ok(rep)
}

/// Capacity of Green superlevel sets equals the ball capacity within 5% at
/// five mid-range levels on the disk and the 2:1 ellipse.
pub fn criterion_07_capacity() -> Result<ExperimentReport> {
    let t0 = Instant::now();
    let levels = [0.03, 0.05, 0.07, 0.09, 0.11];
    let h = 0.05;
    let mut rep = ExperimentReport::new(
        "criterion_07_capacity",
        serde_json::json!({"levels": levels, "h": h}),
    );
    let mut worst = 0.0f64;
    for (name, spec) in [
        ("disk", DomainSpec::disk(1.0)),
        ("ellipse_2.0", DomainSpec::ellipse(2.0, 1.0)?),
    ] {
        let mesh = triangulate(&spec, h)?;
        let ops = assemble(&mesh);
        let solver = DirichletSolver::new(&mesh, &ops)?;
        let (center, _) = harmonic_center(&mesh, &solver)?;
        let green = green_function(&mesh, &solver, center)?;
        for t in levels {
            let check = verify_capacity_equality(&mesh, &green, t)?;
            rep.record(format!("gap_{name}_t{t}"), check.relative_gap);
            worst = worst.max(check.relative_gap.abs());
        }
    }
    rep.record("worst_relative_gap", worst);
    rep.push(Check::le("capacity_gap_under_5pc", worst, 0.05, 0.0));
    rep.wall_time_s = t0.elapsed().as_secs_f64();
    Ok(rep)
}

/// Weighted level-set measure bound `m_Omega(t) <= gamma_n m_ball(t) + eps_h`
/// at twenty log-spaced levels on two ellipses and the three-lobed star.
pub fn criterion_08_level_set_bound() -> Result<ExperimentReport> {
    let t0 = Instant::now();
    let h = 0.06;
    let levels = logspace(0.005, 0.25, 20);
    let mut rep = ExperimentReport::new(
        "criterion_08_level_set_bound",
        serde_json::json!({"h": h, "t_lo": 0.005, "t_hi": 0.25, "points": 20}),
    );
    for (name, spec) in [
        ("ellipse_1.5", DomainSpec::ellipse(1.5, 1.0)?),
        ("ellipse_2.0", DomainSpec::ellipse(2.0, 1.0)?),
        ("star_3lobe", DomainSpec::star(1.0, vec![0.0, 0.0, 0.3], vec![])),
    ] {
        let mesh = triangulate(&spec, h)?;
        let ops = assemble(&mesh);
        let solver = DirichletSolver::new(&mesh, &ops)?;
        let (center, _) = harmonic_center(&mesh, &solver)?;
        let green = green_function(&mesh, &solver, center)?;
        let table = level_set_measures(&mesh, &green, &levels)?;
        let outcome = verify_lemma_cap2(&table);
        rep.record(format!("worst_margin_{name}"), outcome.worst_margin);
        rep.record(format!("eps_h_{name}"), outcome.eps_h);
        rep.push(Check::holds(
            format!("measure_bound_{name}"),
            outcome.passed,
            outcome.worst_margin,
        ));
    }
    rep.wall_time_s = t0.elapsed().as_secs_f64();
    Ok(rep)
}

/// Transplant checks on the 1.5:1 ellipse with the ball Robin eigenfunction
/// profile: the Dirichlet energy identity within 2%, and the two-sided
/// sandwich with a 2% allowance. The unweighted lower bound holds; the
/// weighted upper bound as stated does not (the transplanted integral of an
/// increasing profile genuinely exceeds the weighted ball integral), so this
/// criterion reports an honest failure together with the reversed-direction
/// bound that does hold.
pub fn criterion_09_transplant() -> Result<ExperimentReport> {
    let t0 = Instant::now();
    let h = 0.05;
    let alpha = 1.0;
    let spec = DomainSpec::ellipse(1.5, 1.0)?;
    let mut rep = ExperimentReport::new(
        "criterion_09_transplant",
        serde_json::json!({"domain": spec, "h": h, "alpha": alpha,
                           "profile": "ball Robin eigenfunction", "map": "s^2"}),
    );
    let mesh = triangulate(&spec, h)?;
    let ops = assemble(&mesh);
    let solver = DirichletSolver::new(&mesh, &ops)?;
    let (center, _) = harmonic_center(&mesh, &solver)?;
    let green = green_function(&mesh, &solver, center)?;
    let r = green.harmonic_radius_at_pole;

    let ball = ball_eigenvalue(&BallProblem::new(2, alpha, r)?)?;
    let phi = |s: f64| ball.profile(s.min(r)).expect("s within [0, r]");

    // Dirichlet energy identity: the transplant preserves the profile's
    // Dirichlet energy. Ball side from the eigenvalue weak form:
    // int |grad phi|^2 = lambda ||phi||^2 + alpha oint phi^2.
    let u = crate::green::transplant(&mesh, &green, phi);
    let dir_domain = field_integrals(&mesh, &u, |s| s)?.dirichlet;
    let l2 = ball.profile_l2_sq();
    let boundary_sq = 2.0 * PI * r * ball.u_boundary * ball.u_boundary;
    let dir_ball = ball.lambda * l2 + alpha * boundary_sq;
    rep.record("dirichlet_domain", dir_domain);
    rep.record("dirichlet_ball", dir_ball);
    rep.push(Check::close(
        "dirichlet_identity",
        dir_domain / dir_ball,
        1.0,
        0.02,
    ));

    // Two-sided sandwich for f(s) = s^2 with a 2% allowance.
    let bounds = verify_transplant_bounds(&mesh, &green, phi, |s| s * s, 0.02)?;
    rep.record("ball_integral", bounds.ball_integral);
    rep.record("domain_integral", bounds.domain_integral);
    rep.record("weighted_ball_integral", bounds.upper_bound);
    rep.record("allowance", bounds.allowance);
    rep.record(
        "upper_excess_rel",
        (bounds.domain_integral - bounds.upper_bound) / bounds.upper_bound,
    );
    rep.push(Check::holds(
        "sandwich_lower",
        bounds.lower_margin >= 0.0,
        bounds.lower_margin,
    ));
    rep.push(Check::holds(
        "sandwich_upper_as_stated",
        bounds.upper_margin >= 0.0,
        bounds.upper_margin,
    ));
    // The direction that is actually valid for increasing profiles: the
    // domain integral dominates the weighted ball integral.
    let reversed_margin = bounds.domain_integral - bounds.upper_bound + bounds.allowance;
    rep.push(Check::holds(
        "weighted_bound_reversed_direction",
        reversed_margin >= 0.0,
        reversed_margin,
    ));
    rep.wall_time_s = t0.elapsed().as_secs_f64();
    Ok(rep)
}

/// Product inequality `|Omega| lambda(Omega) <= |B_r| lambda(B_r)` with
/// margin beyond the mesh allowance on five noncircular domains at two Robin
/// parameters, equality on the disk within 1%, side bounds recorded.
pub fn criterion_10_product_inequality() -> Result<ExperimentReport> {
    let t0 = Instant::now();
    let h = 0.06;
    let mut rep = ExperimentReport::new(
        "criterion_10_product_inequality",
        serde_json::json!({"h": h, "alphas": [0.5, 1.0],
                           "domains": test_domains().iter().map(|d| d.0).collect::<Vec<_>>()}),
    );
    for (name, spec) in test_domains() {
        for alpha in [0.5, 1.0] {
            let sub = theorem1_check(&spec, alpha, h)?;
            let tag = format!("{name}_alpha{alpha}");
            let margin = sub.quantities["product_margin"];
            let eps = sub.quantities["eps_h"];
            rep.record(format!("product_margin_{tag}"), margin);
            rep.record(format!("eps_h_{tag}"), eps);
            rep.record(
                format!("bareket_gap_{tag}"),
                sub.quantities["lambda_equal_area_ball"] - sub.quantities["lambda_omega"],
            );
            rep.record(
                format!("constant_trial_gap_{tag}"),
                sub.quantities["constant_trial_bound"] - sub.quantities["lambda_omega"],
            );
            rep.push(Check::holds(
                format!("margin_exceeds_eps_{tag}"),
                margin > eps,
                margin - eps,
            ));
            // The equal-area comparison is recorded above; every other
            // sub-check participates in the verdict.
            for c in &sub.checks {
                if c.name != "equal_area_ball_comparison" && !c.passed {
                    rep.push(Check::holds(
                        format!("subcheck_{}_{tag}", c.name),
                        false,
                        c.margin,
                    ));
                }
            }
        }
    }
    let disk = theorem1_check(&DomainSpec::disk(1.0), 1.0, h)?;
    let lhs = disk.quantities["product_omega"];
    let rhs = disk.quantities["product_ball"];
    rep.record("disk_product_omega", lhs);
    rep.record("disk_product_ball", rhs);
    rep.push(Check::close("disk_equality", lhs / rhs, 1.0, 0.01));
    let elapsed = t0.elapsed().as_secs_f64();
    rep.record("runtime_s", elapsed);
    rep.push(Check::le("runtime_under_600s", elapsed, 600.0, 0.0));
    rep.wall_time_s = elapsed;
    Ok(rep)
}

/// Eigenvalue shape derivative: closed form vs finite differences on the
/// ball (1e-4), boundary-integral formula vs remeshed finite differences on
/// the ellipse (1e-2), and positivity for flux-positive perturbations.
pub fn criterion_11_shape_derivative() -> Result<ExperimentReport> {
    let t0 = Instant::now();
    let alpha = 1.0;
    let mut rep = ExperimentReport::new(
        "criterion_11_shape_derivative",
        serde_json::json!({"alpha": alpha, "ellipse_h": 0.05, "fd_step": 1e-2}),
    );

    // Ball: dilation of the unit disk, total flux |boundary| = 2 pi r.
    let res = ball_eigenvalue(&BallProblem::new(2, alpha, 1.0)?)?;
    let closed = ball_shape_derivative_closed_form(&res, 2.0 * PI);
    let fd_ball = richardson_derivative(
        |t| Ok(ball_eigenvalue(&BallProblem::new(2, alpha, 1.0 + t)?)?.lambda),
        1e-3,
    )?;
    rep.record("ball_closed_form", closed);
    rep.record("ball_fd", fd_ball);
    rep.push(Check::close(
        "ball_closed_form_vs_fd",
        closed / fd_ball,
        1.0,
        1e-4,
    ));

    // Ellipse: boundary-integral formula against the remeshed oracle.
    let spec = DomainSpec::ellipse(1.5, 1.0)?;
    let h = 0.05;
    let mesh = triangulate(&spec, h)?;
    let geom = BoundaryGeometry::from_star(&spec, &mesh)?;
    let eig = robin_principal_eigen(&mesh, alpha)?;
    let pert = PerturbationField::cosine_mode(&spec, 2, 1.0)?;
    let formula = eigen_shape_derivative(&mesh, &geom, alpha, &eig, &pert)?;
    let fd = eigen_derivative_fd(&spec, alpha, h, mesh.boundary_loop.len(), &pert, 1e-2)?;
    rep.record("ellipse_formula", formula);
    rep.record("ellipse_fd", fd);
    rep.push(Check::close("ellipse_formula_vs_fd", formula / fd, 1.0, 1e-2));

    // Positivity for flux-positive perturbations of the disk.
    let disk = DomainSpec::disk(1.0);
    let dmesh = triangulate(&disk, h)?;
    let dgeom = BoundaryGeometry::from_star(&disk, &dmesh)?;
    let deig = robin_principal_eigen(&dmesh, alpha)?;
    let dilation = PerturbationField::dilation(&disk)?;
    let mixed = PerturbationField::new(&disk, 1.0, vec![0.3], vec![])?;
    let d_dil = eigen_shape_derivative(&dmesh, &dgeom, alpha, &deig, &dilation)?;
    let d_mix = eigen_shape_derivative(&dmesh, &dgeom, alpha, &deig, &mixed)?;
    rep.record("disk_dilation_derivative", d_dil);
    rep.record("disk_mixed_flux_derivative", d_mix);
    rep.push(Check::holds("positive_for_dilation", d_dil > 0.0, d_dil));
    rep.push(Check::holds("positive_for_mixed_flux", d_mix > 0.0, d_mix));
    rep.push(Check::holds("ball_derivative_positive", closed > 0.0, closed));
    rep.wall_time_s = t0.elapsed().as_secs_f64();
    Ok(rep)
}

/// Boundary-flux energy: the disk closed form within 1%, the bound chain on
/// the 2:1 ellipse, and the quadratic scaling covariance in mu. The middle
/// chain link (transplanted trial against the weighted comparison energy)
/// carries the same directional defect as the ninth criterion and fails
/// honestly off-disk; both endpoint inequalities hold.
pub fn criterion_12_energy_bound() -> Result<ExperimentReport> {
    let t0 = Instant::now();
    let mut rep = ExperimentReport::new(
        "criterion_12_energy_bound",
        serde_json::json!({"disk_h": 0.05, "ellipse_h": 0.05, "c": 1.0, "mu": 1.0}),
    );

    // Disk closed form: minimizer of the quadratic-sink energy is
    // A I_0(c s) with A c I_1(c) = mu for rho = 1.
    let c = 1.0;
    let mu = 1.0;
    let mesh = triangulate(&DomainSpec::disk(1.0), 0.05)?;
    let ops = assemble(&mesh);
    let p = EnergyProblem::new(
        &mesh,
        Nonlinearity::QuadraticSink { c },
        mu,
        &BoundaryWeight::Const(1.0),
    )?;
    let (u, _) = minimize_energy_assembled(&p, &ops)?;
    let order0 = BesselOrder::new(0.0)?;
    let order1 = BesselOrder::new(1.0)?;
    let amp = mu / (c * bessel_i(order1, c)?);
    let mut worst = 0.0f64;
    for (i, node) in mesh.nodes.iter().enumerate() {
        let s = (node[0] * node[0] + node[1] * node[1]).sqrt();
        let exact = amp * bessel_i(order0, c * s)?;
        worst = worst.max((u.values[i] - exact).abs() / exact.abs());
    }
    rep.record("disk_worst_nodal_rel", worst);
    rep.push(Check::le("disk_closed_form_1pc", worst, 0.01, 0.0));

    // Energy chain on the 2:1 ellipse.
    let spec = DomainSpec::ellipse(2.0, 1.0)?;
    let emesh = triangulate(&spec, 0.05)?;
    let eops = assemble(&emesh);
    let ep = EnergyProblem::new(
        &emesh,
        Nonlinearity::QuadraticSink { c },
        mu,
        &BoundaryWeight::Const(1.0),
    )?;
    let solver = DirichletSolver::new(&emesh, &eops)?;
    let (center, _) = harmonic_center(&emesh, &solver)?;
    let green = green_function(&emesh, &solver, center)?;
    let cp = ComparisonProblem::from_green(&emesh, &eops, &green, &ep)?;
    let chain = verify_energy_bound(&ep, &cp, &green)?;
    for (k, v) in &chain.quantities {
        rep.record(format!("ellipse_{k}"), *v);
    }
    for check in &chain.checks {
        rep.push(Check::holds(
            format!("chain_{}", check.name),
            check.passed,
            check.margin,
        ));
    }

    // Scaling covariance in mu.
    let smesh = triangulate(&DomainSpec::ellipse(1.4, 1.0)?, 0.1)?;
    let sops = assemble(&smesh);
    let weight = BoundaryWeight::Const(1.0);
    let p1 = EnergyProblem::new(&smesh, Nonlinearity::QuadraticSink { c }, 1.0, &weight)?;
    let p2 = EnergyProblem::new(&smesh, Nonlinearity::QuadraticSink { c }, 3.0, &weight)?;
    let (u1, e1) = minimize_energy_assembled(&p1, &sops)?;
    let (u2, e2) = minimize_energy_assembled(&p2, &sops)?;
    let scale = u1.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let field_dev = u1
        .values
        .iter()
        .zip(&u2.values)
        .map(|(a, b)| (b - 3.0 * a).abs())
        .fold(0.0f64, f64::max)
        / (3.0 * scale);
    let energy_dev = (e2 - 9.0 * e1).abs() / e1.abs().max(1e-300) / 9.0;
    rep.record("mu_scaling_field_dev", field_dev);
    rep.record("mu_scaling_energy_dev", energy_dev);
    rep.push(Check::le("mu_scaling_field", field_dev, 1e-10, 0.0));
    rep.push(Check::le("mu_scaling_energy", energy_dev, 1e-10, 0.0));
    rep.wall_time_s = t0.elapsed().as_secs_f64();
    Ok(rep)
}

/// First variation of the boundary-flux energy: every integrand variant
/// vanishes on the ball with radial data under a volume-preserving
/// perturbation, and the remeshed finite-difference oracle identifies the
/// matching curvature variant on the ellipse to 2%. The check name carries
/// the identified variant.
pub fn criterion_13_first_variation() -> Result<ExperimentReport> {
    let t0 = Instant::now();
    let h = 0.05;
    let c = 1.0;
    let mu = 1.0;
    let g_of = move |s: f64| -0.5 * c * c * s * s;
    let mut rep = ExperimentReport::new(
        "criterion_13_first_variation",
        serde_json::json!({"h": h, "c": c, "mu": mu, "perturbation": "cos 2theta"}),
    );

    // Ball: radial state, volume-preserving perturbation, all variants zero.
    let disk = DomainSpec::disk(1.0);
    let mesh = triangulate(&disk, h)?;
    let geom = BoundaryGeometry::from_star(&disk, &mesh)?;
    let b = mesh.boundary_loop.len();
    let p = EnergyProblem::new(
        &mesh,
        Nonlinearity::QuadraticSink { c },
        mu,
        &BoundaryWeight::Const(1.0),
    )?;
    let (u, e0) = crate::steklov::minimize_energy(&p)?;
    let pert = PerturbationField::cosine_mode(&disk, 2, 1.0)?;
    let ball_rep = steklov_first_variation(
        &mesh,
        &geom,
        &u,
        g_of,
        mu,
        &vec![1.0; b],
        &vec![0.0; b],
        &pert,
    )?;
    let tol_ball = 1e-6 * (1.0 + e0.abs());
    let mut worst_ball = 0.0f64;
    for (name, value) in ball_rep.values() {
        rep.record(format!("ball_{name}"), value);
        worst_ball = worst_ball.max(value.abs());
    }
    rep.record("ball_worst_abs", worst_ball);
    rep.push(Check::le("ball_all_variants_zero", worst_ball, tol_ball, 0.0));

    // Ellipse: finite-difference adjudication among the variants.
    let spec = DomainSpec::ellipse(1.5, 1.0)?;
    let emesh = triangulate(&spec, h)?;
    let egeom = BoundaryGeometry::from_star(&spec, &emesh)?;
    let eb = emesh.boundary_loop.len();
    let ep = EnergyProblem::new(
        &emesh,
        Nonlinearity::QuadraticSink { c },
        mu,
        &BoundaryWeight::Const(1.0),
    )?;
    let (eu, _) = crate::steklov::minimize_energy(&ep)?;
    let epert = PerturbationField::cosine_mode(&spec, 2, 1.0)?;
    let variants = steklov_first_variation(
        &emesh,
        &egeom,
        &eu,
        g_of,
        mu,
        &vec![1.0; eb],
        &vec![0.0; eb],
        &epert,
    )?;
    let fd = richardson_derivative(
        |t| {
            let spec_t = crate::shape::perturbed_spec(&spec, &epert, t)?;
            let mesh_t = crate::mesh::triangulate_with(
                &spec_t,
                h,
                &crate::mesh::MeshOptions {
                    boundary_count: Some(eb),
                },
            )?;
            let p_t = EnergyProblem::new(
                &mesh_t,
                Nonlinearity::QuadraticSink { c },
                mu,
                &BoundaryWeight::Const(1.0),
            )?;
            Ok(crate::steklov::minimize_energy(&p_t)?.1)
        },
        1e-2,
    )?;
    rep.record("ellipse_fd", fd);
    for (name, value) in variants.values() {
        rep.record(format!("ellipse_{name}"), value);
    }
    let (matching, rel) = variants.closest_to(fd);
    rep.record("matching_variant_rel_err", rel);
    rep.push(Check::le(
        format!("fd_identifies_{matching}"),
        rel,
        0.02,
        0.0,
    ));
    rep.wall_time_s = t0.elapsed().as_secs_f64();
    Ok(rep)
}

/// Run the whole suite in order.
pub fn run_all() -> Result<Vec<ExperimentReport>> {
    Ok(vec![
        criterion_01_ball_oracle()?,
        criterion_02_asymptotic_limit()?,
        criterion_03_monotonicity()?,
        criterion_04_sign_inequality()?,
        criterion_05_fem_validation()?,
        criterion_06_harmonic_radius()?,
        criterion_07_capacity()?,
        criterion_08_level_set_bound()?,
        criterion_09_transplant()?,
        criterion_10_product_inequality()?,
        criterion_11_shape_derivative()?,
        criterion_12_energy_bound()?,
        criterion_13_first_variation()?,
    ])
}

/// One-line verdict for a report: name, PASS/FAIL, and the failing check if
/// any.
pub fn summary_line(rep: &ExperimentReport) -> String {
    let pad = 44usize.saturating_sub(rep.id.len());
    let dots = ".".repeat(pad.max(1));
    match rep.first_failure() {
        None => format!("{} {} PASS ({} checks)", rep.id, dots, rep.checks.len()),
        Some(f) => format!(
            "{} {} FAIL ({} margin {:.3e})",
            rep.id, dots, f.name, f.margin
        ),
    }
}
