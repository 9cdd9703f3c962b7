//! Experiment reports: a serialized record of an inequality check with its
//! inputs, computed quantities, tolerances, and realized margins.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One asserted inequality with its tolerance and realized margin.
/// `margin` is oriented so that positive means "holds with room": for a
/// check `lhs <= rhs + tol` the margin is `rhs + tol - lhs`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub tolerance: f64,
    pub margin: f64,
    pub passed: bool,
}

impl Check {
    /// Check that `value` is within `tolerance` of `target` (absolute).
    pub fn close(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        let margin = tolerance - (value - target).abs();
        Check {
            name: name.into(),
            tolerance,
            margin,
            passed: margin >= 0.0 && margin.is_finite(),
        }
    }

    /// Check that `lhs <= rhs + tolerance`.
    pub fn le(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let margin = rhs + tolerance - lhs;
        Check {
            name: name.into(),
            tolerance,
            margin,
            passed: margin >= 0.0 && margin.is_finite(),
        }
    }

    /// Check a boolean condition; `margin` carries a caller-chosen figure of
    /// merit (may be 0 for purely structural checks).
    pub fn holds(name: impl Into<String>, passed: bool, margin: f64) -> Self {
        Check {
            name: name.into(),
            tolerance: 0.0,
            margin,
            passed,
        }
    }
}

/// Serialized record of one experiment: input echo, named computed
/// quantities, and the list of asserted checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub id: String,
    pub inputs: serde_json::Value,
    pub quantities: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub wall_time_s: f64,
    pub version: String,
}

impl ExperimentReport {
    pub fn new(id: impl Into<String>, inputs: serde_json::Value) -> Self {
        ExperimentReport {
            id: id.into(),
            inputs,
            quantities: BTreeMap::new(),
            checks: Vec::new(),
            wall_time_s: 0.0,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn record(&mut self, name: impl Into<String>, value: f64) {
        self.quantities.insert(name.into(), value);
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    /// All checks passed (vacuously true only if the caller added none).
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// First failing check, if any.
    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)
            .map_err(|e| crate::error::Error::format(e.to_string()))?)
    }

    pub fn write_json(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(self.to_json()?.as_bytes())?;
        w.write_all(b"\n")?;
        Ok(())
    }
}

/// CSV row of a radius sweep of the ball eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallSweepRow {
    pub r: f64,
    pub lambda: f64,
    /// y = r sqrt(|lambda|).
    pub y: f64,
}

/// Write a ball sweep as CSV with columns `r,lambda,y`.
pub fn write_ball_sweep_csv(rows: &[BallSweepRow], w: &mut impl Write) -> Result<()> {
    writeln!(w, "r,lambda,y")?;
    for row in rows {
        writeln!(w, "{:.17e},{:.17e},{:.17e}", row.r, row.lambda, row.y)?;
    }
    Ok(())
}

/// CSV row of a level-set comparison table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSetRow {
    pub t: f64,
    pub m_omega: f64,
    pub m_ball: f64,
    /// Right-hand side of the measure inequality at this t.
    pub bound: f64,
    /// `bound - m_omega` (positive when the inequality holds).
    pub margin: f64,
}

/// Write a level-set table as CSV with columns `t,m_omega,m_ball,bound,margin`.
pub fn write_level_set_csv(rows: &[LevelSetRow], w: &mut impl Write) -> Result<()> {
    writeln!(w, "t,m_omega,m_ball,bound,margin")?;
    for row in rows {
        writeln!(
            w,
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            row.t, row.m_omega, row.m_ball, row.bound, row.margin
        )?;
    }
    Ok(())
}
