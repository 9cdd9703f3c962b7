//! One function per subcommand. Each returns the reports to print plus any
//! CSV artifacts; the caller owns all file writing so output stays
//! serialized even when experiments run concurrently.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use robin_iso::ball::{ball_eigenvalue, ball_monotonicity_check, shooting_eigenvalue, BallProblem};
use robin_iso::fem::{assemble, robin_principal_eigen, DirichletSolver};
use robin_iso::green::{
    green_function, harmonic_center, level_set_measures, theorem1_check, verify_capacity_equality,
    verify_lemma_cap2,
};
use robin_iso::mesh::triangulate;
use robin_iso::report::{write_ball_sweep_csv, write_level_set_csv, BallSweepRow};
use robin_iso::shape::{eigen_derivative_fd, eigen_shape_derivative, BoundaryGeometry, PerturbationField};
use robin_iso::steklov::{
    verify_energy_bound, BoundaryWeight, ComparisonProblem, EnergyProblem, Nonlinearity,
};
use robin_iso::verify;
use robin_iso::{Check, DomainSpec, ExperimentReport, Result};

use crate::config::JobConfig;

/// Reports plus named CSV artifacts (file name, contents).
pub struct CommandOutput {
    pub reports: Vec<ExperimentReport>,
    pub artifacts: Vec<(String, Vec<u8>)>,
}

impl CommandOutput {
    fn reports_only(reports: Vec<ExperimentReport>) -> Self {
        CommandOutput {
            reports,
            artifacts: Vec::new(),
        }
    }
}

/// Radius sweep of the ball eigenvalue, cross-checked against the shooting
/// oracle, with monotonicity and sign checks; emits the `r,lambda,y` CSV.
pub fn ball_eig(cfg: &JobConfig) -> Result<CommandOutput> {
    let t0 = std::time::Instant::now();
    let mut radii = cfg.radii_or_default();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let mut rep = ExperimentReport::new(
        "ball_eig_sweep",
        serde_json::json!({"dim": cfg.dim, "alpha": cfg.alpha, "radii": radii}),
    );
    let mut rows = Vec::with_capacity(radii.len());
    let mut worst_oracle = 0.0f64;
    let mut worst_sign = f64::INFINITY;
    for &r in &radii {
        let p = BallProblem::new(cfg.dim, cfg.alpha, r)?;
        let res = ball_eigenvalue(&p)?;
        let shot = shooting_eigenvalue(&p)?;
        worst_oracle = worst_oracle.max((res.lambda - shot).abs() / res.lambda.abs());
        worst_sign = worst_sign.min(res.sign_margin());
        rows.push(BallSweepRow {
            r,
            lambda: res.lambda,
            y: res.y(),
        });
    }
    let mono = ball_monotonicity_check(cfg.dim, cfg.alpha, &radii)?;
    rep.record("cases", radii.len() as f64);
    rep.record("worst_oracle_rel", worst_oracle);
    rep.record("worst_sign_margin", worst_sign);
    rep.record("min_lambda_gap", mono.min_lambda_gap);
    rep.record("min_y_gap", mono.min_y_gap);
    rep.push(Check::le(
        "solver_oracle_agreement",
        worst_oracle,
        cfg.tolerances.oracle_rel,
        0.0,
    ));
    rep.push(Check::holds(
        "lambda_strictly_increasing",
        mono.lambda_strictly_increasing(),
        mono.min_lambda_gap,
    ));
    rep.push(Check::holds(
        "y_strictly_increasing",
        mono.y_strictly_increasing(),
        mono.min_y_gap,
    ));
    rep.push(Check::holds(
        "sign_margin_positive",
        worst_sign > 0.0,
        worst_sign,
    ));
    rep.wall_time_s = t0.elapsed().as_secs_f64();

    let mut csv = Vec::new();
    write_ball_sweep_csv(&rows, &mut csv)?;
    Ok(CommandOutput {
        reports: vec![rep],
        artifacts: vec![(cfg.output.ball_sweep_csv.clone(), csv)],
    })
}

/// Robin eigenvalue of the configured domain by P1 finite elements, with
/// solver-health and variational upper-bound checks.
pub fn fem_eig(cfg: &JobConfig) -> Result<CommandOutput> {
    let t0 = std::time::Instant::now();
    let mut rep = ExperimentReport::new(
        "fem_eig",
        serde_json::json!({"domain": cfg.domain, "alpha": cfg.alpha, "h": cfg.h}),
    );
    let mesh = triangulate(&cfg.domain, cfg.h)?;
    let eig = robin_principal_eigen(&mesh, cfg.alpha)?;
    let area = mesh.area();
    let perimeter = mesh.perimeter();
    rep.record("lambda", eig.lambda);
    rep.record("residual", eig.residual);
    rep.record("iterations", eig.iterations as f64);
    rep.record("area", area);
    rep.record("perimeter", perimeter);
    rep.record("nodes", mesh.n_nodes() as f64);
    rep.record("triangles", mesh.n_triangles() as f64);
    rep.push(Check::le("solver_residual", eig.residual, 1e-8, 0.0));
    rep.push(Check::holds(
        "eigenvalue_negative",
        eig.lambda < 0.0,
        -eig.lambda,
    ));
    // The constant field is admissible, so the discrete minimum sits below
    // its Rayleigh quotient -alpha P / A (same assembled quadratures).
    let constant_trial = -cfg.alpha * perimeter / area;
    rep.record("constant_trial_bound", constant_trial);
    rep.push(Check::le(
        "below_constant_trial",
        eig.lambda,
        constant_trial,
        1e-9 * (1.0 + eig.lambda.abs()),
    ));
    rep.wall_time_s = t0.elapsed().as_secs_f64();
    Ok(CommandOutput::reports_only(vec![rep]))
}

/// Green's function diagnostics: harmonic radius and center, level-set
/// measure table (emitted as CSV), and capacity equality at the median
/// level.
pub fn harmonic(cfg: &JobConfig) -> Result<CommandOutput> {
    let t0 = std::time::Instant::now();
    let t_grid = cfg.t_grid_or_default();
    let mut rep = ExperimentReport::new(
        "harmonic_diagnostics",
        serde_json::json!({"domain": cfg.domain, "h": cfg.h, "t_grid": t_grid}),
    );
    let mesh = triangulate(&cfg.domain, cfg.h)?;
    let ops = assemble(&mesh);
    let solver = DirichletSolver::new(&mesh, &ops)?;
    let (center, r_omega) = harmonic_center(&mesh, &solver)?;
    let green = green_function(&mesh, &solver, center)?;
    rep.record("r_omega", r_omega);
    rep.record("center_x", center[0]);
    rep.record("center_y", center[1]);
    rep.record("area", mesh.area());

    let ball_ratio = std::f64::consts::PI * r_omega * r_omega / mesh.area();
    rep.record("ball_area_ratio", ball_ratio);
    rep.push(Check::le(
        "ball_area_le_domain_area",
        ball_ratio,
        1.0,
        5.0 * cfg.h * cfg.h,
    ));

    let table = level_set_measures(&mesh, &green, &t_grid)?;
    let outcome = verify_lemma_cap2(&table);
    rep.record("gamma_ratio", table.gamma_ratio);
    rep.record("level_set_worst_margin", outcome.worst_margin);
    rep.record("eps_h", outcome.eps_h);
    rep.push(Check::holds(
        "level_set_measure_bound",
        outcome.passed,
        outcome.worst_margin,
    ));

    let t_mid = t_grid[t_grid.len() / 2];
    let cap = verify_capacity_equality(&mesh, &green, t_mid)?;
    rep.record("capacity_t", cap.t);
    rep.record("capacity_domain", cap.cap_domain);
    rep.record("capacity_ball", cap.cap_ball);
    rep.record("capacity_relative_gap", cap.relative_gap);
    rep.push(Check::le(
        "capacity_equality",
        cap.relative_gap.abs(),
        cfg.tolerances.capacity_rel,
        0.0,
    ));
    rep.wall_time_s = t0.elapsed().as_secs_f64();

    let mut csv = Vec::new();
    write_level_set_csv(&outcome.rows, &mut csv)?;
    Ok(CommandOutput {
        reports: vec![rep],
        artifacts: vec![(cfg.output.level_set_csv.clone(), csv)],
    })
}

/// Full product-inequality check on the configured domain.
pub fn theorem1(cfg: &JobConfig) -> Result<CommandOutput> {
    let rep = theorem1_check(&cfg.domain, cfg.alpha, cfg.h)?;
    Ok(CommandOutput::reports_only(vec![rep]))
}

/// Shape derivative of the eigenvalue against the remeshed
/// finite-difference oracle for the configured cosine mode.
pub fn shape_deriv(cfg: &JobConfig) -> Result<CommandOutput> {
    let t0 = std::time::Instant::now();
    let mut rep = ExperimentReport::new(
        "shape_derivative",
        serde_json::json!({"domain": cfg.domain, "alpha": cfg.alpha, "h": cfg.h,
                           "mode": cfg.mode, "amplitude": cfg.amplitude,
                           "fd_step": cfg.fd_step}),
    );
    let mesh = triangulate(&cfg.domain, cfg.h)?;
    let geom = BoundaryGeometry::from_star(&cfg.domain, &mesh)?;
    let eig = robin_principal_eigen(&mesh, cfg.alpha)?;
    let pert = if cfg.mode == 0 {
        PerturbationField::new(&cfg.domain, cfg.amplitude, Vec::new(), Vec::new())?
    } else {
        PerturbationField::cosine_mode(&cfg.domain, cfg.mode, cfg.amplitude)?
    };
    let formula = eigen_shape_derivative(&mesh, &geom, cfg.alpha, &eig, &pert)?;
    let fd = eigen_derivative_fd(
        &cfg.domain,
        cfg.alpha,
        cfg.h,
        mesh.boundary_loop.len(),
        &pert,
        cfg.fd_step,
    )?;
    let rel = (formula - fd).abs() / fd.abs();
    rep.record("lambda", eig.lambda);
    rep.record("derivative_formula", formula);
    rep.record("derivative_fd", fd);
    rep.record("relative_gap", rel);
    rep.push(Check::le(
        "formula_vs_fd",
        rel,
        cfg.tolerances.derivative_rel,
        0.0,
    ));
    rep.wall_time_s = t0.elapsed().as_secs_f64();
    Ok(CommandOutput::reports_only(vec![rep]))
}

/// Boundary-flux energy suite on the configured domain: quadratic-sink
/// minimization, transplanted trial, and the radial comparison chain.
pub fn steklov(cfg: &JobConfig) -> Result<CommandOutput> {
    let mesh = triangulate(&cfg.domain, cfg.h)?;
    let ops = assemble(&mesh);
    let p = EnergyProblem::new(
        &mesh,
        Nonlinearity::QuadraticSink { c: cfg.c },
        cfg.mu,
        &BoundaryWeight::Const(1.0),
    )?;
    let solver = DirichletSolver::new(&mesh, &ops)?;
    let (center, _) = harmonic_center(&mesh, &solver)?;
    let green = green_function(&mesh, &solver, center)?;
    let cp = ComparisonProblem::from_green(&mesh, &ops, &green, &p)?;
    let rep = verify_energy_bound(&p, &cp, &green)?;
    Ok(CommandOutput::reports_only(vec![rep]))
}

/// The entire acceptance suite; criteria run concurrently on `jobs` worker
/// threads, results are reordered before reporting.
pub fn verify_all(jobs: usize) -> Result<CommandOutput> {
    type Criterion = fn() -> Result<ExperimentReport>;
    let suite: [Criterion; 13] = [
        verify::criterion_01_ball_oracle,
        verify::criterion_02_asymptotic_limit,
        verify::criterion_03_monotonicity,
        verify::criterion_04_sign_inequality,
        verify::criterion_05_fem_validation,
        verify::criterion_06_harmonic_radius,
        verify::criterion_07_capacity,
        verify::criterion_08_level_set_bound,
        verify::criterion_09_transplant,
        verify::criterion_10_product_inequality,
        verify::criterion_11_shape_derivative,
        verify::criterion_12_energy_bound,
        verify::criterion_13_first_variation,
    ];
    let next = AtomicUsize::new(0);
    let done: Mutex<Vec<(usize, Result<ExperimentReport>)>> = Mutex::new(Vec::new());
    let workers = jobs.min(suite.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= suite.len() {
                    break;
                }
                let outcome = (suite[i])();
                done.lock().expect("worker panicked").push((i, outcome));
            });
        }
    });
    let mut collected = done.into_inner().expect("worker panicked");
    collected.sort_by_key(|(i, _)| *i);
    let reports = collected
        .into_iter()
        .map(|(_, r)| r)
        .collect::<Result<Vec<_>>>()?;
    Ok(CommandOutput::reports_only(reports))
}

/// Perturbation machinery is defined for star-shaped specs only.
pub fn is_star(domain: &DomainSpec) -> bool {
    matches!(domain, DomainSpec::Star { .. })
}
