//! Variant-competition dynamics.
//!
//! Three equivalent views of the same process:
//!
//! * the discrete yearly recursion in which a fraction `c` of writers always
//!   uses `-ra`, and the rest either follow an institutional enforcement
//!   (fraction `gamma`) or sample the current distribution;
//! * its continuum limit `τ·ṡ = −s + E_s(t)` with an exponentially fading
//!   attention forcing `E_s(t) = a·τ·e^(−t/τ)`, solved in closed form by
//!   `s(t) = (a·t + s0)·e^(−t/τ)`;
//! * the autonomous two-dimensional linear system in `(s, e_s)` with
//!   `e_s = E_s/τ`, whose matrix has a repeated eigenvalue `−1/τ` and a
//!   one-dimensional eigenspace: the critically damped regime.
//!
//! All functions are pure; time is in years with `t = 0` at the configured
//! reference year (1750 by default).

use crate::error::{Error, Result};

/// Parameters of the discrete yearly recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteParams {
    /// Intrinsic `-ra` bias: fraction of writers that always use `-ra`.
    pub c: f64,
    /// Fraction of the remaining writers that follow the enforcement.
    pub gamma: f64,
    /// Enforcement target for `-ra`.
    pub e_r: f64,
    /// Enforcement target for `-se`.
    pub e_s: f64,
}

impl DiscreteParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c", self.c),
            ("gamma", self.gamma),
            ("e_r", self.e_r),
            ("e_s", self.e_s),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidInput(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Fractions of writers using each variant in a given year.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteState {
    pub r: f64,
    pub s: f64,
}

/// Parameters of the continuum attention-fading model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousParams {
    /// Attention amplitude (1/years), shared across verbs.
    pub a: f64,
    /// Relaxation timescale of the attention decay (years).
    pub tau: f64,
    /// `-se` fraction at t = 0.
    pub s0: f64,
}

impl ContinuousParams {
    pub fn new(a: f64, tau: f64, s0: f64) -> Result<Self> {
        let p = Self { a, tau, s0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.a.is_finite() || self.a < 0.0 {
            return Err(Error::InvalidInput(format!("a must be >= 0, got {}", self.a)));
        }
        if !self.tau.is_finite() || self.tau <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "tau must be > 0, got {}",
                self.tau
            )));
        }
        if !(0.0..=1.0).contains(&self.s0) {
            return Err(Error::InvalidInput(format!(
                "s0 must lie in [0, 1], got {}",
                self.s0
            )));
        }
        Ok(())
    }
}

/// Point of the two-dimensional phase space `(s, e_s)` with `e_s = E_s/τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub s: f64,
    pub e_s: f64,
}

/// One year of the discrete recursion:
/// `r' = (1−c)[γ·e_r + (1−γ)·r] + c`, `s' = (1−c)[γ·e_s + (1−γ)·s]`.
pub fn step_discrete(state: DiscreteState, p: &DiscreteParams) -> DiscreteState {
    let keep = 1.0 - p.c;
    DiscreteState {
        r: keep * (p.gamma * p.e_r + (1.0 - p.gamma) * state.r) + p.c,
        s: keep * (p.gamma * p.e_s + (1.0 - p.gamma) * state.s),
    }
}

/// Trajectory of length `n + 1` starting at `state`.
pub fn iterate_discrete(state: DiscreteState, p: &DiscreteParams, n: usize) -> Vec<DiscreteState> {
    let mut traj = Vec::with_capacity(n + 1);
    traj.push(state);
    let mut cur = state;
    for _ in 0..n {
        cur = step_discrete(cur, p);
        traj.push(cur);
    }
    traj
}

/// Unique fixed point of the recursion,
/// `s* = (1−c)·γ·e_s / (1 − (1−c)(1−γ))`, `r* = [(1−c)·γ·e_r + c] / (same)`.
///
/// Degenerate when `c = 0` and `gamma = 0` (every state is fixed).
pub fn discrete_fixed_point(p: &DiscreteParams) -> Result<DiscreteState> {
    let denom = 1.0 - (1.0 - p.c) * (1.0 - p.gamma);
    if denom == 0.0 {
        return Err(Error::DegenerateParams);
    }
    Ok(DiscreteState {
        r: ((1.0 - p.c) * p.gamma * p.e_r + p.c) / denom,
        s: (1.0 - p.c) * p.gamma * p.e_s / denom,
    })
}

/// Attention forcing `E_s(t) = a·τ·e^(−t/τ)`.
pub fn forcing(t: f64, p: &ContinuousParams) -> f64 {
    p.a * p.tau * (-t / p.tau).exp()
}

/// Closed-form solution `s(t) = (a·t + s0)·e^(−t/τ)` of `τ·ṡ = −s + E_s(t)`.
///
/// Not clamped to [0, 1]: parameter regimes where the curve exceeds 1 are
/// reported downstream, not hidden.
pub fn closed_form_s(t: f64, p: &ContinuousParams) -> f64 {
    (p.a * t + p.s0) * (-t / p.tau).exp()
}

/// Time of the curve maximum, `t* = τ − s0/a`, when it exists and is positive.
/// `None` means the curve decays monotonically from `t = 0`.
pub fn peak_time(p: &ContinuousParams) -> Option<f64> {
    if p.a <= 0.0 {
        return None;
    }
    let t_star = p.tau - p.s0 / p.a;
    (t_star > 0.0).then_some(t_star)
}

/// Internal RK4 step size: 0.01·τ capped at 0.25 years. The system is linear
/// and stiff-free, so a fixed step keeps runs deterministic across platforms.
fn rk4_step_size(tau: f64) -> f64 {
    (0.01 * tau).min(0.25)
}

fn validate_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::InvalidInput("empty time grid".into()));
    }
    if t_grid[0] != 0.0 {
        return Err(Error::BadTimeGrid(t_grid[0], 0));
    }
    for (i, w) in t_grid.windows(2).enumerate() {
        // NaN entries fail this comparison too.
        if w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::BadTimeGrid(w[1], i + 1));
        }
    }
    Ok(())
}

/// RK4 integration of a scalar ODE from `t0` over `dt`, split into steps of
/// at most `h_max`.
fn rk4_advance<F: Fn(f64, f64) -> f64>(f: &F, t0: f64, y0: f64, dt: f64, h_max: f64) -> f64 {
    let n = (dt / h_max).ceil().max(1.0) as usize;
    let h = dt / n as f64;
    let mut t = t0;
    let mut y = y0;
    for _ in 0..n {
        let k1 = f(t, y);
        let k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
        let k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
        let k4 = f(t + h, y + h * k3);
        y += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        t += h;
    }
    y
}

/// Numerically integrates `τ·ṡ = −s + E_s(t)` with `s(0) = s0`, sampling at
/// the given ascending grid (which must start at 0, where the result is `s0`
/// exactly).
pub fn integrate_ode(p: &ContinuousParams, t_grid: &[f64]) -> Result<Vec<f64>> {
    validate_grid(t_grid)?;
    let f = |t: f64, s: f64| (-s + forcing(t, p)) / p.tau;
    let h_max = rk4_step_size(p.tau);

    let mut out = Vec::with_capacity(t_grid.len());
    out.push(p.s0);
    let mut s = p.s0;
    for w in t_grid.windows(2) {
        s = rk4_advance(&f, w[0], s, w[1] - w[0], h_max);
        out.push(s);
    }
    Ok(out)
}

/// Vector field of the autonomous system: `(ṡ, ė_s) = (−s/τ + e_s, −e_s/τ)`.
pub fn phase_flow(state: PhaseState, tau: f64) -> PhaseState {
    PhaseState {
        s: -state.s / tau + state.e_s,
        e_s: -state.e_s / tau,
    }
}

/// Integrates the phase system from the perturbed equilibrium
/// `(s, e_s)(0) = (s0, a)`, sampling at the given grid. The first coordinate
/// reproduces `closed_form_s`.
pub fn integrate_phase(p: &ContinuousParams, t_grid: &[f64]) -> Result<Vec<PhaseState>> {
    validate_grid(t_grid)?;
    let h_max = rk4_step_size(p.tau);

    let mut out = Vec::with_capacity(t_grid.len());
    let mut state = PhaseState { s: p.s0, e_s: p.a };
    out.push(state);
    for w in t_grid.windows(2) {
        let dt = w[1] - w[0];
        let n = (dt / h_max).ceil().max(1.0) as usize;
        let h = dt / n as f64;
        for _ in 0..n {
            let k1 = phase_flow(state, p.tau);
            let k2 = phase_flow(offset(state, k1, 0.5 * h), p.tau);
            let k3 = phase_flow(offset(state, k2, 0.5 * h), p.tau);
            let k4 = phase_flow(offset(state, k3, h), p.tau);
            state = PhaseState {
                s: state.s + h * (k1.s + 2.0 * k2.s + 2.0 * k3.s + k4.s) / 6.0,
                e_s: state.e_s + h * (k1.e_s + 2.0 * k2.e_s + 2.0 * k3.e_s + k4.e_s) / 6.0,
            };
        }
        out.push(state);
    }
    Ok(out)
}

fn offset(state: PhaseState, d: PhaseState, h: f64) -> PhaseState {
    PhaseState {
        s: state.s + h * d.s,
        e_s: state.e_s + h * d.e_s,
    }
}

/// System matrix `A = [[−1/τ, 1], [0, −1/τ]]` of the phase flow.
pub fn system_matrix(tau: f64) -> [[f64; 2]; 2] {
    [[-1.0 / tau, 1.0], [0.0, -1.0 / tau]]
}

/// Eigenstructure report for the phase-flow matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenstructure {
    pub eigenvalue: f64,
    pub algebraic_multiplicity: usize,
    pub geometric_multiplicity: usize,
    /// max |entry| of `A + I/τ`; nonzero certifies the matrix is defective.
    pub shift_norm: f64,
    /// max |entry| of `(A + I/τ)²`; zero certifies nilpotency of index 2.
    pub shift_square_norm: f64,
}

fn mat_mul(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn max_abs(m: &[[f64; 2]; 2]) -> f64 {
    m.iter().flatten().fold(0.0_f64, |acc, &v| acc.max(v.abs()))
}

/// Computes the eigenstructure of the phase-flow matrix from its entries:
/// repeated eigenvalue `−1/τ` with algebraic multiplicity 2 and geometric
/// multiplicity 1 (defective, hence critically damped).
pub fn eigenstructure(tau: f64) -> Result<Eigenstructure> {
    if !tau.is_finite() || tau <= 0.0 {
        return Err(Error::InvalidInput(format!("tau must be > 0, got {tau}")));
    }
    let a = system_matrix(tau);
    let trace = a[0][0] + a[1][1];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let disc = trace * trace - 4.0 * det;
    let scale = max_abs(&a).max(1.0);
    let tol = 1e-12 * scale * scale;

    if disc.abs() > tol {
        // Cannot happen for this matrix family; kept as an honest check.
        return Err(Error::InvalidInput(format!(
            "eigenvalues are not repeated (discriminant {disc})"
        )));
    }
    let eigenvalue = trace / 2.0;

    // Shifted matrix N = A − λI; rank decides the geometric multiplicity.
    let shifted = [
        [a[0][0] - eigenvalue, a[0][1]],
        [a[1][0], a[1][1] - eigenvalue],
    ];
    let shift_norm = max_abs(&shifted);
    let geometric_multiplicity = if shift_norm <= tol { 2 } else { 1 };
    let shift_square_norm = max_abs(&mat_mul(&shifted, &shifted));

    Ok(Eigenstructure {
        eigenvalue,
        algebraic_multiplicity: 2,
        geometric_multiplicity,
        shift_norm,
        shift_square_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dp(c: f64, gamma: f64, e_r: f64, e_s: f64) -> DiscreteParams {
        DiscreteParams { c, gamma, e_r, e_s }
    }

    fn cp(a: f64, tau: f64, s0: f64) -> ContinuousParams {
        ContinuousParams { a, tau, s0 }
    }

    #[test]
    fn step_full_enforcement_pins_s() {
        let p = dp(0.0, 1.0, 0.5, 0.5);
        for s in [0.0, 0.3, 1.0] {
            let next = step_discrete(DiscreteState { r: 1.0 - s, s }, &p);
            assert_eq!(next.s, 0.5);
        }
    }

    #[test]
    fn step_full_intrinsic_bias() {
        let p = dp(1.0, 0.3, 0.5, 0.5);
        let next = step_discrete(DiscreteState { r: 0.2, s: 0.8 }, &p);
        assert_eq!((next.r, next.s), (1.0, 0.0));
    }

    #[test]
    fn step_hand_evaluated_case() {
        // 0.9·(0.5·0.5 + 0.5·0.4) = 0.405, cross-checked by hand.
        let p = dp(0.1, 0.5, 0.5, 0.5);
        let next = step_discrete(DiscreteState { r: 0.6, s: 0.4 }, &p);
        assert!((next.s - 0.405).abs() < 1e-15);
    }

    #[test]
    fn iterate_zero_steps_returns_initial() {
        let p = dp(0.1, 0.5, 0.5, 0.5);
        let init = DiscreteState { r: 0.7, s: 0.3 };
        assert_eq!(iterate_discrete(init, &p, 0), vec![init]);
    }

    #[test]
    fn symmetric_case_converges_to_half() {
        let p = dp(0.0, 0.2, 0.5, 0.5);
        let traj = iterate_discrete(DiscreteState { r: 0.1, s: 0.9 }, &p, 300);
        let last = traj.last().unwrap();
        assert!((last.s - 0.5).abs() < 1e-12);
        assert!((last.r - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fixed_point_matches_brute_force_iteration() {
        let p = dp(0.1, 0.5, 0.5, 0.5);
        let fp = discrete_fixed_point(&p).unwrap();
        assert!((fp.r - 0.325 / 0.55).abs() < 1e-15);
        assert!((fp.s - 0.225 / 0.55).abs() < 1e-15);

        // Independent oracle: iterate until the state stops moving.
        let mut state = DiscreteState { r: 0.9, s: 0.1 };
        for _ in 0..2000 {
            state = step_discrete(state, &p);
        }
        assert!((state.r - fp.r).abs() < 1e-12);
        assert!((state.s - fp.s).abs() < 1e-12);

        // The fixed point maps to itself.
        let next = step_discrete(fp, &p);
        assert!((next.r - fp.r).abs() < 1e-12);
        assert!((next.s - fp.s).abs() < 1e-12);
    }

    #[test]
    fn fixed_point_symmetric_c_zero() {
        let fp = discrete_fixed_point(&dp(0.0, 0.7, 0.5, 0.5)).unwrap();
        assert!((fp.s - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fixed_point_degenerate_errors() {
        assert!(matches!(
            discrete_fixed_point(&dp(0.0, 0.0, 0.5, 0.5)),
            Err(Error::DegenerateParams)
        ));
    }

    #[test]
    fn conservation_under_symmetric_enforcement() {
        // e_r + e_s = 1 and r + s = 1 imply r' + s' = 1, algebraically.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let e_s = rng.gen_range(0.0..=1.0);
            let p = dp(rng.gen_range(0.0..0.9), rng.gen_range(0.05..1.0), 1.0 - e_s, e_s);
            let s = rng.gen_range(0.0..=1.0);
            let mut state = DiscreteState { r: 1.0 - s, s };
            for _ in 0..1000 {
                state = step_discrete(state, &p);
                assert!((state.r + state.s - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn contraction_rate_bounds_convergence() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let p = dp(
                rng.gen_range(0.0..0.5),
                rng.gen_range(0.1..1.0),
                rng.gen_range(0.0..=1.0),
                rng.gen_range(0.0..=1.0),
            );
            let fp = discrete_fixed_point(&p).unwrap();
            let ratio = (1.0 - p.c) * (1.0 - p.gamma);
            let s0 = rng.gen_range(0.0..=1.0);
            let traj = iterate_discrete(DiscreteState { r: 1.0 - s0, s: s0 }, &p, 60);
            for (n, state) in traj.iter().enumerate() {
                let bound = (s0 - fp.s).abs() * ratio.powi(n as i32) + 1e-10;
                assert!(
                    (state.s - fp.s).abs() <= bound,
                    "contraction violated at step {n}"
                );
            }
        }
    }

    #[test]
    fn forcing_values() {
        let p = cp(0.02, 43.0, 0.0);
        assert!((forcing(0.0, &p) - 0.86).abs() < 1e-15);
        assert!((forcing(43.0, &p) - 0.86 / std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn forcing_stays_a_fraction_iff_tau_below_inverse_a() {
        // The forcing peaks at t = 0 with value a·τ, so the statistical
        // bound E_s <= 1 holds exactly when τ <= 1/a.
        for (a, tau) in [(0.02, 43.0), (0.02, 50.0), (0.02, 51.0), (0.027, 37.0), (0.027, 38.0)] {
            let p = cp(a, tau, 0.0);
            assert_eq!(forcing(0.0, &p) <= 1.0, tau <= 1.0 / a, "a = {a}, tau = {tau}");
        }
    }

    #[test]
    fn closed_form_at_zero_and_pure_decay() {
        let p = cp(0.027, 43.0, 0.2);
        assert_eq!(closed_form_s(0.0, &p), 0.2);
        let decay = cp(0.0, 43.0, 0.6);
        assert!((closed_form_s(43.0, &decay) - 0.6 / std::f64::consts::E).abs() < 1e-15);
    }

    /// Dense-grid argmax over [0, 250] at 0.001-year resolution.
    fn grid_argmax(p: &ContinuousParams) -> (f64, f64) {
        let mut best = (0.0, f64::NEG_INFINITY);
        let n = 250_000;
        for i in 0..=n {
            let t = i as f64 * 0.001;
            let v = closed_form_s(t, p);
            if v > best.1 {
                best = (t, v);
            }
        }
        best
    }

    #[test]
    fn peak_time_matches_grid_argmax_oracle() {
        let p = cp(0.027, 43.0, 0.2);
        let t_star = peak_time(&p).unwrap();
        let (t_grid, v_grid) = grid_argmax(&p);
        assert!((t_star - 35.5926).abs() < 1e-3);
        assert!((t_star - t_grid).abs() <= 0.001 + 1e-9);
        assert!((v_grid - 0.50744).abs() < 1e-4);
    }

    #[test]
    fn peak_time_edge_cases() {
        assert_eq!(peak_time(&cp(0.0, 43.0, 0.2)), None);
        assert_eq!(peak_time(&cp(0.027, 43.0, 0.0)), Some(43.0));
        // s0/a beyond tau: monotone decay.
        assert_eq!(peak_time(&cp(0.001, 10.0, 0.5)), None);
    }

    #[test]
    fn ode_starts_exactly_at_s0() {
        let p = cp(0.027, 43.0, 0.2);
        let out = integrate_ode(&p, &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(out[0], 0.2);
    }

    #[test]
    fn ode_matches_known_exponential() {
        let p = cp(0.0, 43.0, 1.0);
        let out = integrate_ode(&p, &[0.0, 43.0]).unwrap();
        assert!((out[1] - (-1.0_f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn ode_matches_closed_form() {
        let p = cp(0.027, 43.0, 0.2);
        let grid: Vec<f64> = (0..=250).map(|t| t as f64).collect();
        let out = integrate_ode(&p, &grid).unwrap();
        for (t, s) in grid.iter().zip(&out) {
            assert!((s - closed_form_s(*t, &p)).abs() < 1e-6, "t = {t}");
        }
    }

    #[test]
    fn ode_rejects_bad_grids() {
        let p = cp(0.0, 10.0, 0.5);
        assert!(matches!(
            integrate_ode(&p, &[1.0, 2.0]),
            Err(Error::BadTimeGrid(..))
        ));
        assert!(matches!(
            integrate_ode(&p, &[0.0, 2.0, 2.0]),
            Err(Error::BadTimeGrid(..))
        ));
    }

    #[test]
    fn closed_form_solves_the_ode_by_finite_differences() {
        // Central-difference residual of τ·ṡ + s − E_s on a 0.01-year grid.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..30 {
            let p = cp(
                rng.gen_range(0.0..=0.1),
                rng.gen_range(5.0..=200.0),
                rng.gen_range(0.0..=1.0),
            );
            let h = 0.01;
            for i in 1..2000 {
                let t = i as f64 * h;
                let ds = (closed_form_s(t + h, &p) - closed_form_s(t - h, &p)) / (2.0 * h);
                let residual = p.tau * ds + closed_form_s(t, &p) - forcing(t, &p);
                assert!(residual.abs() < 1e-4, "t = {t}, residual = {residual}");
            }
        }
    }

    #[test]
    fn solution_overshoots_the_stimulus() {
        let p = cp(0.027, 43.0, 0.2);
        assert!(peak_time(&p).is_some());
        let max_excess = (0..=2500)
            .map(|i| {
                let t = i as f64 * 0.1;
                closed_form_s(t, &p) - forcing(t, &p)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(max_excess > 0.0);
    }

    #[test]
    fn curve_is_unimodal_around_the_peak() {
        let p = cp(0.027, 43.0, 0.2);
        let t_star = peak_time(&p).unwrap();
        let mut prev = closed_form_s(0.0, &p);
        let mut t = 0.01;
        while t < t_star - 0.01 {
            let v = closed_form_s(t, &p);
            assert!(v > prev, "not increasing at t = {t}");
            prev = v;
            t += 0.01;
        }
        let mut prev = closed_form_s(t_star, &p);
        let mut t = t_star + 0.01;
        while t < 250.0 {
            let v = closed_form_s(t, &p);
            assert!(v < prev, "not decreasing at t = {t}");
            prev = v;
            t += 0.01;
        }
    }

    #[test]
    fn phase_flow_equilibrium_and_kick() {
        let origin = phase_flow(PhaseState { s: 0.0, e_s: 0.0 }, 43.0);
        assert_eq!((origin.s, origin.e_s), (0.0, 0.0));

        // Perturbation e_s(0) = a gives ṡ(0) = a.
        let a = 0.027;
        let kicked = phase_flow(PhaseState { s: 0.0, e_s: a }, 43.0);
        assert_eq!(kicked.s, a);
    }

    #[test]
    fn phase_integration_reproduces_closed_form() {
        let p = cp(0.027, 43.0, 0.2);
        let grid: Vec<f64> = (0..=250).map(|t| t as f64).collect();
        let states = integrate_phase(&p, &grid).unwrap();
        for (t, st) in grid.iter().zip(&states) {
            assert!((st.s - closed_form_s(*t, &p)).abs() < 1e-6, "t = {t}");
            // Second coordinate carries the rescaled forcing E_s/τ.
            assert!((st.e_s - forcing(*t, &p) / p.tau).abs() < 1e-6);
        }
    }

    #[test]
    fn eigenstructure_is_critically_damped() {
        let e = eigenstructure(1.0).unwrap();
        assert_eq!(e.eigenvalue, -1.0);
        assert_eq!(e.algebraic_multiplicity, 2);
        assert_eq!(e.geometric_multiplicity, 1);

        let e43 = eigenstructure(43.0).unwrap();
        assert!((e43.eigenvalue - (-0.023256)).abs() < 1e-6);
        assert!(e43.shift_norm > 0.0);
        assert!(e43.shift_square_norm < 1e-14);
    }

    #[test]
    fn continuum_limit_tracks_closed_form() {
        // Discrete recursion with c = 0, γ = 1/τ, and the enforcement sampled
        // from the fading forcing is the Euler discretization of the ODE, so
        // the deviation is O(1/τ).
        let tau = 100.0;
        let p = cp(0.01, tau, 0.2);
        let gamma = 1.0 / tau;
        let mut s = p.s0;
        let mut max_dev = 0.0_f64;
        for t in 0..600 {
            max_dev = max_dev.max((s - closed_form_s(t as f64, &p)).abs());
            let params = dp(0.0, gamma, 1.0 - forcing(t as f64, &p), forcing(t as f64, &p));
            s = step_discrete(DiscreteState { r: 1.0 - s, s }, &params).s;
        }
        assert!(max_dev < 0.02, "max deviation {max_dev}");
    }
}
