//! Runtime-selectable trajectory simulators.
//!
//! Each view of the dynamics (discrete recursion, continuous ODE, phase
//! space) sits behind the [`Simulator`] trait and is picked by name at
//! runtime, so the CLI and config can swap evaluators without code changes.
//! The continuous and phase strategies integrate the same process through
//! different state spaces; their `s` columns agree to integrator accuracy.

use std::io::Write;

use crate::dynamics::{
    integrate_ode, integrate_phase, iterate_discrete, ContinuousParams, DiscreteParams,
    DiscreteState,
};
use crate::error::{Error, Result};

/// Flat parameter bag for a simulation run; each strategy reads the fields
/// it understands and validates them.
#[derive(Debug, Clone, Copy)]
pub struct SimRequest {
    /// Horizon in years; output is sampled yearly from t = 0.
    pub t_max: f64,
    /// Continuous-model parameters (continuous and phase modes).
    pub continuous: ContinuousParams,
    /// Recursion parameters (discrete mode).
    pub discrete: DiscreteParams,
    /// Initial `-ra` fraction (discrete mode); the initial `-se` fraction is
    /// shared with the continuous `s0`.
    pub r0: f64,
}

/// A sampled trajectory, one row per output time.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Trajectory {
    /// Writes the trajectory as CSV (`t,s[,e_s]` depending on the strategy).
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    /// Row index with the largest value in the named column.
    pub fn argmax(&self, column: &str) -> Option<usize> {
        let col = self.columns.iter().position(|c| *c == column)?;
        self.rows
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a[col].total_cmp(&b[col]))
            .map(|(i, _)| i)
    }
}

pub trait Simulator: Send + Sync {
    /// Registry key used for runtime selection.
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn run(&self, req: &SimRequest) -> Result<Trajectory>;
}

fn validate_horizon(t_max: f64) -> Result<usize> {
    if !(t_max >= 1.0 && t_max.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "t_max must be a finite number of years >= 1, got {t_max}"
        )));
    }
    Ok(t_max.floor() as usize)
}

fn year_grid(years: usize) -> Vec<f64> {
    (0..=years).map(|t| t as f64).collect()
}

struct DiscreteSimulator;

impl Simulator for DiscreteSimulator {
    fn name(&self) -> &'static str {
        "discrete"
    }

    fn description(&self) -> &'static str {
        "yearly recursion with intrinsic bias c, enforcement-following fraction gamma and targets e_r/e_s"
    }

    fn run(&self, req: &SimRequest) -> Result<Trajectory> {
        let years = validate_horizon(req.t_max)?;
        req.discrete.validate()?;
        for (name, v) in [("r0", req.r0), ("s0", req.continuous.s0)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidInput(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        let init = DiscreteState {
            r: req.r0,
            s: req.continuous.s0,
        };
        let rows = iterate_discrete(init, &req.discrete, years)
            .into_iter()
            .enumerate()
            .map(|(t, state)| vec![t as f64, state.s])
            .collect();
        Ok(Trajectory {
            columns: vec!["t", "s"],
            rows,
        })
    }
}

struct ContinuousSimulator;

impl Simulator for ContinuousSimulator {
    fn name(&self) -> &'static str {
        "continuous"
    }

    fn description(&self) -> &'static str {
        "fixed-step RK4 integration of the attention-fading ODE for the -se fraction"
    }

    fn run(&self, req: &SimRequest) -> Result<Trajectory> {
        let years = validate_horizon(req.t_max)?;
        req.continuous.validate()?;
        let grid = year_grid(years);
        let values = integrate_ode(&req.continuous, &grid)?;
        let rows = grid
            .into_iter()
            .zip(values)
            .map(|(t, s)| vec![t, s])
            .collect();
        Ok(Trajectory {
            columns: vec!["t", "s"],
            rows,
        })
    }
}

struct PhaseSimulator;

impl Simulator for PhaseSimulator {
    fn name(&self) -> &'static str {
        "phase"
    }

    fn description(&self) -> &'static str {
        "two-dimensional critically damped system in (s, e_s), kicked by e_s(0) = a"
    }

    fn run(&self, req: &SimRequest) -> Result<Trajectory> {
        let years = validate_horizon(req.t_max)?;
        req.continuous.validate()?;
        let grid = year_grid(years);
        let states = integrate_phase(&req.continuous, &grid)?;
        let rows = grid
            .into_iter()
            .zip(states)
            .map(|(t, st)| vec![t, st.s, st.e_s])
            .collect();
        Ok(Trajectory {
            columns: vec!["t", "s", "e_s"],
            rows,
        })
    }
}

/// All registered simulators.
pub fn registry() -> Vec<Box<dyn Simulator>> {
    vec![
        Box::new(DiscreteSimulator),
        Box::new(ContinuousSimulator),
        Box::new(PhaseSimulator),
    ]
}

/// Registered names, in registry order.
pub fn names() -> Vec<&'static str> {
    registry().iter().map(|s| s.name()).collect()
}

/// Looks a simulator up by name.
pub fn by_name(name: &str) -> Result<Box<dyn Simulator>> {
    registry()
        .into_iter()
        .find(|s| s.name() == name)
        .ok_or_else(|| Error::UnknownSimulator(name.to_string(), names().join(", ")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{closed_form_s, peak_time};

    fn request() -> SimRequest {
        SimRequest {
            t_max: 250.0,
            continuous: ContinuousParams {
                a: 0.027,
                tau: 43.0,
                s0: 0.2,
            },
            discrete: DiscreteParams {
                c: 0.0,
                gamma: 0.2,
                e_r: 0.5,
                e_s: 0.5,
            },
            r0: 0.8,
        }
    }

    #[test]
    fn registry_exposes_three_strategies() {
        assert_eq!(names(), ["discrete", "continuous", "phase"]);
        assert!(by_name("continuous").is_ok());
        assert!(matches!(
            by_name("nonsense"),
            Err(Error::UnknownSimulator(..))
        ));
    }

    #[test]
    fn continuous_max_row_sits_at_the_peak() {
        let traj = by_name("continuous").unwrap().run(&request()).unwrap();
        assert_eq!(traj.rows.len(), 251);
        let t_star = peak_time(&request().continuous).unwrap();
        let idx = traj.argmax("s").unwrap();
        assert!((traj.rows[idx][0] - t_star).abs() <= 0.5);
    }

    #[test]
    fn discrete_symmetric_converges_to_half() {
        let traj = by_name("discrete").unwrap().run(&request()).unwrap();
        let last = traj.rows.last().unwrap();
        assert!((last[1] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn phase_and_continuous_agree_on_s() {
        let req = request();
        let cont = by_name("continuous").unwrap().run(&req).unwrap();
        let phase = by_name("phase").unwrap().run(&req).unwrap();
        assert_eq!(phase.columns, ["t", "s", "e_s"]);
        for (c, p) in cont.rows.iter().zip(&phase.rows) {
            assert!((c[1] - p[1]).abs() < 1e-6);
        }
        // And both track the closed form.
        for row in &cont.rows {
            assert!((row[1] - closed_form_s(row[0], &req.continuous)).abs() < 1e-6);
        }
    }

    #[test]
    fn csv_round_trips_through_display_parsing() {
        let traj = by_name("phase").unwrap().run(&request()).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,s,e_s"));
        for (line, row) in lines.zip(&traj.rows) {
            let parsed: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
            assert_eq!(&parsed, row);
        }
    }

    #[test]
    fn rejects_invalid_requests() {
        let mut req = request();
        req.t_max = 0.0;
        assert!(by_name("continuous").unwrap().run(&req).is_err());

        let mut req = request();
        req.discrete.gamma = 1.5;
        assert!(by_name("discrete").unwrap().run(&req).is_err());

        let mut req = request();
        req.continuous.tau = -1.0;
        assert!(by_name("phase").unwrap().run(&req).is_err());
    }
}
