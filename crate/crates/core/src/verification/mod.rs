//! Seeded randomized suites checking the inequalities on generated
//! instances.
//!
//! Every check is an inequality `lhs ≤ rhs`, accepted when
//! `lhs − rhs ≤ tol·max(1, |rhs|)`. Trials run in parallel with seeds derived
//! from `(seed, suite, trial index)`, so reports do not depend on scheduling.

pub mod generators;
mod suites;

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

pub use generators::{
    autocorrelation, fejer_cos, fejer_extremal, gen_polydisc_schur, gen_re_bounded, gen_schur, polar, random_fejer,
    PolydiscPolynomial, ReBoundedSample, SchurOptions, SchurSample, Shape,
};
pub use suites::{
    bohr_h_suite, bohr_mh_suite, bohr_numrad_suite, bombieri_upper_suite, fejer_suite, harnack_factor, harnack_suite,
    landau_op_suite, landau_polydisc_suite, re_bridge_suite, wiener_suite,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub trials: usize,
    pub tol: f64,
    /// Extra levels above the polynomial degree in each factor.
    pub headroom: usize,
    /// Cap on `m·dim` of assembled operators; headroom shrinks to fit.
    pub dim_cap: usize,
    /// Largest degree for the Fejér suite.
    pub m_max: usize,
    /// Multiplies the constant 2 of the Landau operator bound. Values
    /// below one deliberately corrupt the inequality.
    pub constant_scale: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { seed: 42, trials: 500, tol: 1e-8, headroom: 4, dim_cap: 192, m_max: 8, constant_scale: 1.0 }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", self.tol)));
        }
        if !(self.constant_scale > 0.0 && self.constant_scale.is_finite()) {
            return Err(Error::InvalidParameter("constant scale must be positive".into()));
        }
        if self.dim_cap < 8 {
            return Err(Error::InvalidParameter("dimension cap below 8".into()));
        }
        Ok(())
    }

    pub(crate) fn schur_options(&self) -> generators::SchurOptions {
        generators::SchurOptions {
            headroom: self.headroom,
            dim_cap: self.dim_cap,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub trial: Option<usize>,
    pub seed: u64,
    pub params: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs − rhs`.
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub trials: usize,
    pub cases: usize,
    pub violations: Vec<Violation>,
    /// Largest `lhs − rhs` over all cases; negative when every check has room.
    pub max_slack_used: f64,
    pub tol: f64,
    pub pass: bool,
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<18} {:>6} trials {:>8} cases {:>5} violations  max slack {:>+.6e}  {}",
            self.name,
            self.trials,
            self.cases,
            self.violations.len(),
            self.max_slack_used,
            if self.pass { "PASS" } else { "FAIL" }
        )?;
        for v in self.violations.iter().take(5) {
            writeln!(
                f,
                "    trial {:?} seed {:#018x} {}: lhs {:.12e} > rhs {:.12e}",
                v.trial, v.seed, v.params, v.lhs, v.rhs
            )?;
        }
        if self.violations.len() > 5 {
            writeln!(f, "    ... {} more", self.violations.len() - 5)?;
        }
        Ok(())
    }
}

/// One inequality check `lhs ≤ rhs`.
#[derive(Clone, Debug)]
pub(crate) struct Case {
    pub params: String,
    pub lhs: f64,
    pub rhs: f64,
}

impl Case {
    pub fn new(params: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self { params: params.into(), lhs, rhs }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of trial `index` of `suite`.
pub fn trial_seed(seed: u64, suite: &str, index: usize) -> u64 {
    let tag = suite.bytes().fold(0xCBF2_9CE4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01B3));
    splitmix64(splitmix64(seed ^ tag) ^ index as u64)
}

fn violates(c: &Case, tol: f64) -> bool {
    !(c.lhs - c.rhs <= tol * c.rhs.abs().max(1.0))
}

/// Runs `trials` seeded trials plus fixed probes and folds them into a report.
pub(crate) fn run_suite<F>(name: &str, cfg: &SuiteConfig, probes: Vec<Case>, trial: F) -> Result<SuiteReport>
where
    F: Fn(u64) -> Result<Vec<Case>> + Sync,
{
    cfg.validate()?;
    let outcomes: Vec<(usize, u64, Vec<Case>)> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let s = trial_seed(cfg.seed, name, i);
            trial(s).map(|cases| (i, s, cases))
        })
        .collect::<Result<_>>()?;
    let mut cases = 0;
    let mut max_slack = f64::NEG_INFINITY;
    let mut violations = Vec::new();
    let probe_iter = probes.into_iter().map(|c| (None, cfg.seed, c));
    let trial_iter = outcomes.into_iter().flat_map(|(i, s, cs)| cs.into_iter().map(move |c| (Some(i), s, c)));
    for (trial, seed, c) in probe_iter.chain(trial_iter) {
        cases += 1;
        let slack = c.lhs - c.rhs;
        if slack.is_nan() {
            max_slack = f64::NAN;
        } else if !max_slack.is_nan() {
            max_slack = max_slack.max(slack);
        }
        if violates(&c, cfg.tol) {
            violations.push(Violation { trial, seed, params: c.params, lhs: c.lhs, rhs: c.rhs, slack });
        }
    }
    Ok(SuiteReport {
        name: name.to_string(),
        trials: cfg.trials,
        cases,
        pass: violations.is_empty(),
        violations,
        max_slack_used: max_slack,
        tol: cfg.tol,
    })
}

pub const SUITE_NAMES: [&str; 10] = [
    "wiener",
    "bohr_mh",
    "bohr_h",
    "landau_op",
    "fejer",
    "bohr_numrad",
    "landau_polydisc",
    "harnack",
    "re_bridge",
    "bombieri_upper",
];

pub fn run_named(name: &str, cfg: &SuiteConfig) -> Result<SuiteReport> {
    match name {
        "wiener" => wiener_suite(cfg),
        "bohr_mh" => bohr_mh_suite(cfg),
        "bohr_h" => bohr_h_suite(cfg),
        "landau_op" => landau_op_suite(cfg),
        "fejer" => fejer_suite(cfg),
        "bohr_numrad" => bohr_numrad_suite(cfg),
        "landau_polydisc" => landau_polydisc_suite(cfg),
        "harnack" => harnack_suite(cfg),
        "re_bridge" => re_bridge_suite(cfg),
        "bombieri_upper" => bombieri_upper_suite(cfg),
        other => Err(Error::InvalidParameter(format!(
            "unknown suite {other:?}; expected one of {}",
            SUITE_NAMES.join(", ")
        ))),
    }
}

/// Runs every suite in order.
pub fn run_all(cfg: &SuiteConfig) -> Result<Vec<SuiteReport>> {
    SUITE_NAMES.iter().map(|n| run_named(n, cfg)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trial_seeds_differ() {
        assert_ne!(trial_seed(42, "wiener", 0), trial_seed(42, "wiener", 1));
        assert_ne!(trial_seed(42, "wiener", 0), trial_seed(42, "bohr_mh", 0));
        assert_eq!(trial_seed(7, "x", 3), trial_seed(7, "x", 3));
    }

    #[test]
    fn runner_counts_violations() {
        let cfg = SuiteConfig { trials: 10, ..Default::default() };
        let r = run_suite("t", &cfg, vec![Case::new("probe", 0.0, 1.0)], |s| {
            Ok(vec![Case::new("x", if s % 2 == 0 { 2.0 } else { 0.5 }, 1.0)])
        })
        .unwrap();
        assert_eq!(r.cases, 11);
        assert_eq!(r.pass, r.violations.is_empty());
        let evens = (0..10).filter(|&i| trial_seed(42, "t", i) % 2 == 0).count();
        assert_eq!(r.violations.len(), evens);
    }

    #[test]
    fn nan_is_a_violation() {
        let cfg = SuiteConfig { trials: 1, ..Default::default() };
        let r = run_suite("t", &cfg, vec![], |_| Ok(vec![Case::new("x", f64::NAN, 1.0)])).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(run_named("nope", &SuiteConfig::default()).is_err());
    }
}
