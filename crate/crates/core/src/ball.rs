//! Principal Robin eigenvalue of a ball with boundary condition
//! `du/dnu = alpha u`, `alpha > 0`, where the eigenvalue is negative and the
//! eigenfunction is the radial profile `s^(-nu) I_nu(k s)` with
//! `k = sqrt(-lambda)`.
//!
//! The eigenvalue is computed two independent ways. The production path
//! solves the transcendental equation
//!
//! ```text
//! k I'_nu(k r) / I_nu(k r) = alpha + (n - 2) / (2 r)
//! ```
//!
//! by bracketed bisection. The oracle path integrates the radial ODE
//! `u'' + (n-1)/rho u' + lambda u = 0` by fixed-step RK4 and matches the
//! boundary condition; the two must agree to about 1e-8 and that agreement is
//! enforced by the verification suite.
//!
//! The transcendental residual is kept in the normalized form above (the
//! unnormalized form `k I'_nu - c I_nu` scales like `e^(kr)` and makes any
//! absolute tolerance meaningless for large `k r`).

use crate::error::{Error, Result};
use crate::quad::simpson;
use crate::special::{bessel_i, bessel_i_prime, gamma_half_integer, BesselOrder};

/// Ball eigenvalue problem: dimension `n >= 2`, Robin parameter `alpha > 0`,
/// radius `r > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallProblem {
    pub dim: u32,
    pub alpha: f64,
    pub radius: f64,
}

impl BallProblem {
    pub fn new(dim: u32, alpha: f64, radius: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::domain(format!("dimension must be >= 2, got {dim}")));
        }
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::domain(format!(
                "alpha must be finite and positive, got {alpha}"
            )));
        }
        if !radius.is_finite() || radius <= 0.0 {
            return Err(Error::domain(format!(
                "radius must be finite and positive, got {radius}"
            )));
        }
        Ok(BallProblem { dim, alpha, radius })
    }

    fn order(&self) -> BesselOrder {
        BesselOrder::from_dimension(self.dim).expect("dim validated in constructor")
    }

    /// Right-hand side `c = alpha + (n - 2) / (2 r)` of the transcendental
    /// equation.
    pub fn robin_coefficient(&self) -> f64 {
        self.alpha + (self.dim as f64 - 2.0) / (2.0 * self.radius)
    }

    /// `|B_r|` in dimension n.
    pub fn volume(&self) -> f64 {
        let n = self.dim as f64;
        let unit = std::f64::consts::PI.powf(n / 2.0) / gamma_half_integer(n / 2.0 + 1.0);
        unit * self.radius.powf(n)
    }

    /// `|boundary of B_r|` in dimension n.
    pub fn boundary_area(&self) -> f64 {
        self.dim as f64 * self.volume() / self.radius
    }
}

/// Solved ball eigenvalue. `u_boundary` is the eigenfunction value at the
/// boundary under the normalization `u(0) = 1`; `residual` is the normalized
/// transcendental residual at the returned root.
#[derive(Debug, Clone)]
pub struct BallEigenResult {
    pub problem: BallProblem,
    pub lambda: f64,
    pub k: f64,
    pub u_boundary: f64,
    pub residual: f64,
}

impl BallEigenResult {
    /// Scaling variable `y = r^(n/2) sqrt(-lambda)`, strictly increasing in r.
    pub fn y(&self) -> f64 {
        self.problem.radius.powf(self.problem.dim as f64 / 2.0) * self.k
    }

    /// Positive margin in `lambda + alpha^2 + alpha (n-1)/r < 0`.
    pub fn sign_margin(&self) -> f64 {
        let p = &self.problem;
        -(self.lambda + p.alpha * p.alpha + p.alpha * (p.dim as f64 - 1.0) / p.radius)
    }

    /// Positive margin in the constant-trial bound `lambda < -alpha n / r`.
    pub fn constant_trial_margin(&self) -> f64 {
        let p = &self.problem;
        -p.alpha * p.dim as f64 / p.radius - self.lambda
    }

    /// Radial eigenfunction profile with `u(0) = 1`:
    /// `u(s) = Gamma(nu+1) (k s / 2)^(-nu) I_nu(k s)`.
    pub fn profile(&self, s: f64) -> Result<f64> {
        if !s.is_finite() || s < 0.0 {
            return Err(Error::domain(format!("radial coordinate {s} out of range")));
        }
        let nu = self.problem.order().nu();
        if s == 0.0 {
            return Ok(1.0);
        }
        let z = self.k * s;
        Ok(gamma_half_integer(nu + 1.0) * (z / 2.0).powf(-nu) * bessel_i(self.problem.order(), z)?)
    }

    /// `integral of u^2 over the ball` for the `u(0) = 1` profile.
    pub fn profile_l2_sq(&self) -> f64 {
        let n = self.problem.dim as f64;
        let sphere = n * std::f64::consts::PI.powf(n / 2.0) / gamma_half_integer(n / 2.0 + 1.0);
        sphere
            * simpson(
                |s| {
                    let u = self.profile(s).expect("s within [0, r]");
                    u * u * s.powf(n - 1.0)
                },
                0.0,
                self.problem.radius,
                4096,
            )
    }

    /// Squared boundary value of the L2-normalized eigenfunction.
    pub fn boundary_value_l2_sq(&self) -> f64 {
        self.u_boundary * self.u_boundary / self.profile_l2_sq()
    }
}

/// Normalized transcendental residual `k I'_nu(kr)/I_nu(kr) - c` whose unique
/// positive root is `k = sqrt(-lambda)`.
fn transcendental_residual(p: &BallProblem, k: f64) -> f64 {
    let z = k * p.radius;
    let order = p.order();
    let i = bessel_i(order, z).expect("positive argument");
    let ip = bessel_i_prime(order, z).expect("positive argument");
    k * ip / i - p.robin_coefficient()
}

/// Solve the transcendental equation for the principal eigenvalue.
pub fn ball_eigenvalue(p: &BallProblem) -> Result<BallEigenResult> {
    let c = p.robin_coefficient();
    let lo0 = 1e-9 * c.min(1.0);
    let mut hi = c + 1.0 / p.radius;
    let mut grow = 0;
    while transcendental_residual(p, hi) <= 0.0 {
        hi *= 2.0;
        grow += 1;
        if grow > 60 {
            return Err(Error::convergence(format!(
                "no sign change found while expanding bracket for {p:?}"
            )));
        }
    }
    if transcendental_residual(p, lo0) >= 0.0 {
        return Err(Error::convergence(format!(
            "residual not negative at bracket foot for {p:?}"
        )));
    }

    // The residual is strictly increasing in k, so the bracket must contain
    // exactly one sign change; scan for accidental extras and refuse to
    // report a root if any show up.
    let mut changes = 0;
    let mut prev = transcendental_residual(p, lo0);
    for i in 1..=64 {
        let k = lo0 + (hi - lo0) * i as f64 / 64.0;
        let val = transcendental_residual(p, k);
        if prev.signum() != val.signum() {
            changes += 1;
        }
        prev = val;
    }
    if changes != 1 {
        return Err(Error::solver(format!(
            "expected one sign change in [{lo0}, {hi}], found {changes} for {p:?}"
        )));
    }

    let mut lo = lo0;
    for _ in 0..200 {
        if hi - lo <= 1e-15 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if transcendental_residual(p, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let k = 0.5 * (lo + hi);
    let residual = transcendental_residual(p, k);
    if residual.abs() > 1e-12 * (1.0 + k) {
        return Err(Error::convergence(format!(
            "bisection stalled: residual {residual} at k = {k} for {p:?}"
        )));
    }

    let nu = p.order().nu();
    let z = k * p.radius;
    let u_boundary =
        gamma_half_integer(nu + 1.0) * (z / 2.0).powf(-nu) * bessel_i(p.order(), z)?;
    Ok(BallEigenResult {
        problem: *p,
        lambda: -k * k,
        k,
        u_boundary,
        residual,
    })
}

/// Shooting residual `u'(r) - alpha u(r)` for a trial `lambda < 0`, from a
/// fixed-step RK4 integration of the radial ODE with `steps` subintervals.
///
/// Sign convention: the residual is negative when `lambda` lies above the
/// principal eigenvalue and positive below it.
pub fn radial_shooting_residual_steps(p: &BallProblem, lambda: f64, steps: usize) -> Result<f64> {
    if !lambda.is_finite() || lambda >= 0.0 {
        return Err(Error::domain(format!(
            "shooting residual defined for negative lambda, got {lambda}"
        )));
    }
    if steps < 16 {
        return Err(Error::domain("need at least 16 RK4 steps".to_string()));
    }
    let n = p.dim as f64;
    let mu = -lambda; // positive
    let rho0 = 1e-4 * p.radius.min(1.0);
    // Series start: u = 1 + mu rho^2 / (2n) + O(rho^4), u' = mu rho / n.
    let mut u = 1.0 + mu * rho0 * rho0 / (2.0 * n);
    let mut v = mu * rho0 / n;
    let h = (p.radius - rho0) / steps as f64;
    let f = |rho: f64, u: f64, v: f64| (v, -(n - 1.0) / rho * v + mu * u);
    let mut rho = rho0;
    for _ in 0..steps {
        let (k1u, k1v) = f(rho, u, v);
        let (k2u, k2v) = f(rho + 0.5 * h, u + 0.5 * h * k1u, v + 0.5 * h * k1v);
        let (k3u, k3v) = f(rho + 0.5 * h, u + 0.5 * h * k2u, v + 0.5 * h * k2v);
        let (k4u, k4v) = f(rho + h, u + h * k3u, v + h * k3v);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        rho += h;
    }
    Ok(v - p.alpha * u)
}

/// Shooting residual with the default step count (4096).
pub fn radial_shooting_residual(p: &BallProblem, lambda: f64) -> Result<f64> {
    radial_shooting_residual_steps(p, lambda, 4096)
}

/// Independent eigenvalue oracle: bisection on the shooting residual.
pub fn shooting_eigenvalue(p: &BallProblem) -> Result<f64> {
    let res_at = |k: f64| radial_shooting_residual(p, -k * k);
    let mut lo = 1e-6;
    if res_at(lo)? >= 0.0 {
        return Err(Error::convergence(
            "shooting residual not negative at bracket foot".to_string(),
        ));
    }
    let mut hi = p.robin_coefficient() + 1.0 / p.radius;
    let mut grow = 0;
    while res_at(hi)? <= 0.0 {
        hi *= 2.0;
        grow += 1;
        if grow > 60 {
            return Err(Error::convergence(
                "no sign change found while expanding shooting bracket".to_string(),
            ));
        }
    }
    for _ in 0..200 {
        if hi - lo <= 1e-12 * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if res_at(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let k = 0.5 * (lo + hi);
    Ok(-k * k)
}

/// Monotonicity data for `lambda(B_r)` and `y(r) = r^(n/2) sqrt(-lambda)`
/// along an increasing radius grid.
#[derive(Debug, Clone)]
pub struct MonotonicityReport {
    pub dim: u32,
    pub alpha: f64,
    pub radii: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub y: Vec<f64>,
    /// Smallest forward difference of `lambda`; positive means strictly
    /// increasing.
    pub min_lambda_gap: f64,
    /// Smallest forward difference of `y`.
    pub min_y_gap: f64,
}

impl MonotonicityReport {
    pub fn lambda_strictly_increasing(&self) -> bool {
        self.min_lambda_gap > 0.0
    }
    pub fn y_strictly_increasing(&self) -> bool {
        self.min_y_gap > 0.0
    }
}

/// Solve on a radius grid and collect monotonicity margins. The grid must be
/// strictly increasing.
pub fn ball_monotonicity_check(dim: u32, alpha: f64, radii: &[f64]) -> Result<MonotonicityReport> {
    if radii.len() < 2 {
        return Err(Error::precondition("need at least two radii".to_string()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::precondition(
            "radius grid must be strictly increasing".to_string(),
        ));
    }
    let mut lambdas = Vec::with_capacity(radii.len());
    let mut y = Vec::with_capacity(radii.len());
    for &r in radii {
        let res = ball_eigenvalue(&BallProblem::new(dim, alpha, r)?)?;
        lambdas.push(res.lambda);
        y.push(res.y());
    }
    let min_gap = |v: &[f64]| {
        v.windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    };
    Ok(MonotonicityReport {
        dim,
        alpha,
        radii: radii.to_vec(),
        lambdas: lambdas.clone(),
        y: y.clone(),
        min_lambda_gap: min_gap(&lambdas),
        min_y_gap: min_gap(&y),
    })
}

/// Closed-form shape derivative of the ball eigenvalue under a boundary
/// perturbation with total flux `integral of (v . nu) dS`:
/// `dot lambda = -(lambda + alpha^2 + alpha (n-1)/r) u(r)^2 flux`,
/// with `u` normalized to unit L2 norm. The tangential-gradient term vanishes
/// because the eigenfunction is radial.
pub fn ball_shape_derivative_closed_form(res: &BallEigenResult, flux: f64) -> f64 {
    res.sign_margin() * res.boundary_value_l2_sq() * flux
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn problem(dim: u32, alpha: f64, radius: f64) -> BallProblem {
        BallProblem::new(dim, alpha, radius).unwrap()
    }

    #[test]
    fn rejects_bad_problems() {
        assert!(BallProblem::new(1, 1.0, 1.0).is_err());
        assert!(BallProblem::new(2, 0.0, 1.0).is_err());
        assert!(BallProblem::new(2, -1.0, 1.0).is_err());
        assert!(BallProblem::new(2, 1.0, 0.0).is_err());
        assert!(BallProblem::new(2, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn volume_and_surface() {
        let p2 = problem(2, 1.0, 2.0);
        assert_relative_eq!(p2.volume(), 4.0 * std::f64::consts::PI, max_relative = 1e-14);
        assert_relative_eq!(
            p2.boundary_area(),
            4.0 * std::f64::consts::PI,
            max_relative = 1e-14
        );
        let p3 = problem(3, 1.0, 1.0);
        assert_relative_eq!(
            p3.volume(),
            4.0 / 3.0 * std::f64::consts::PI,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            p3.boundary_area(),
            4.0 * std::f64::consts::PI,
            max_relative = 1e-14
        );
    }

    #[test]
    fn shooting_residual_sign_convention() {
        // n=2, alpha=1, r=1 has lambda* near -2.58; above it the residual is
        // negative, below it positive.
        let p = problem(2, 1.0, 1.0);
        assert!(radial_shooting_residual(&p, -2.0).unwrap() < 0.0);
        assert!(radial_shooting_residual(&p, -3.2).unwrap() > 0.0);
    }

    #[test]
    fn shooting_step_halving_stable() {
        let p = problem(2, 1.0, 1.0);
        let a = radial_shooting_residual_steps(&p, -2.0, 4096).unwrap();
        let b = radial_shooting_residual_steps(&p, -2.0, 8192).unwrap();
        assert!((a - b).abs() < 1e-9, "step halving moved residual by {}", a - b);
    }

    #[test]
    fn solver_matches_shooting_oracle() {
        for &(dim, alpha, r) in &[
            (2u32, 1.0, 0.5),
            (2, 1.0, 1.0),
            (2, 2.0, 2.0),
            (3, 0.5, 1.0),
            (3, 1.0, 2.0),
            (4, 1.0, 1.0),
        ] {
            let p = problem(dim, alpha, r);
            let solved = ball_eigenvalue(&p).unwrap();
            let oracle = shooting_eigenvalue(&p).unwrap();
            assert_relative_eq!(solved.lambda, oracle, max_relative = 1e-8);
        }
    }

    #[test]
    fn residual_is_small_at_root() {
        let res = ball_eigenvalue(&problem(3, 2.0, 0.5)).unwrap();
        assert!(res.residual.abs() < 1e-12 * (1.0 + res.k));
    }

    #[test]
    fn boundary_value_exceeds_center() {
        // The profile is strictly increasing, so u(r) > u(0) = 1.
        for &(dim, alpha, r) in &[(2u32, 1.0, 1.0), (3, 0.5, 2.0), (4, 2.0, 0.5)] {
            let res = ball_eigenvalue(&problem(dim, alpha, r)).unwrap();
            assert!(res.u_boundary > 1.0);
            assert_relative_eq!(
                res.profile(r).unwrap(),
                res.u_boundary,
                max_relative = 1e-13
            );
            assert_eq!(res.profile(0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn eigenvalue_bounds_hold() {
        for &(dim, alpha, r) in &[
            (2u32, 0.5, 0.5),
            (2, 1.0, 1.0),
            (2, 2.0, 2.0),
            (3, 1.0, 1.0),
            (4, 0.5, 2.0),
        ] {
            let res = ball_eigenvalue(&problem(dim, alpha, r)).unwrap();
            assert!(res.sign_margin() > 0.0, "sign inequality failed: {res:?}");
            assert!(
                res.constant_trial_margin() > 0.0,
                "constant trial bound failed: {res:?}"
            );
        }
    }

    #[test]
    fn large_radius_limit() {
        // sqrt(-lambda(B_r)) decreases to alpha as r grows.
        let mut prev = f64::INFINITY;
        for &r in &[5.0, 10.0, 20.0, 50.0] {
            let res = ball_eigenvalue(&problem(2, 1.0, r)).unwrap();
            assert!(res.k < prev, "k not decreasing at r = {r}");
            assert!(res.k > 1.0, "k fell below alpha at r = {r}");
            prev = res.k;
        }
        assert!(prev < 1.1, "k(50) = {prev} not within 10% of alpha");
    }

    #[test]
    fn monotone_in_radius() {
        let radii: Vec<f64> = (0..12).map(|i| 0.4 * 1.3f64.powi(i)).collect();
        let rep = ball_monotonicity_check(2, 1.0, &radii).unwrap();
        assert!(rep.lambda_strictly_increasing());
        assert!(rep.y_strictly_increasing());
        let rep3 = ball_monotonicity_check(3, 2.0, &radii).unwrap();
        assert!(rep3.lambda_strictly_increasing());
        assert!(rep3.y_strictly_increasing());
    }

    #[test]
    fn shape_derivative_matches_dilation_fd() {
        for &dim in &[2u32, 3] {
            let res = ball_eigenvalue(&problem(dim, 1.0, 1.0)).unwrap();
            let closed = ball_shape_derivative_closed_form(&res, res.problem.boundary_area());
            let dl = |t: f64| {
                let plus = ball_eigenvalue(&problem(dim, 1.0, 1.0 + t)).unwrap().lambda;
                let minus = ball_eigenvalue(&problem(dim, 1.0, 1.0 - t)).unwrap().lambda;
                (plus - minus) / (2.0 * t)
            };
            let d1 = dl(1e-2);
            let d2 = dl(5e-3);
            let fd = (4.0 * d2 - d1) / 3.0;
            assert_relative_eq!(closed, fd, max_relative = 1e-4);
            assert!(closed > 0.0);
        }
    }

    #[test]
    fn rejects_nonnegative_lambda_for_shooting() {
        let p = problem(2, 1.0, 1.0);
        assert!(radial_shooting_residual(&p, 0.0).is_err());
        assert!(radial_shooting_residual(&p, 1.0).is_err());
    }
}
