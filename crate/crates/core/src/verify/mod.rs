//! Named property checks with pass/fail verdicts and margins.
//!
//! Every check reports a *margin* per sample: how far the sample is from
//! violating the property, positive when it holds. A sample counts as a
//! violation when its margin is below `-tolerance`. Negative-control reports
//! run a deliberately broken instance and pass only when the check flags it.

mod checks;
pub mod controls;
mod dyn_checks;
pub mod instances;
mod suite;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dynamics::DynamicsParams;
use crate::exec::{map_chunks, task_rng};
use crate::horoballs::ApproachPolicy;

pub use checks::{
    axiom2star_sequence, check_a3prime, check_axiom2star, check_axiom2star_pairs, check_axiom5, check_condition_c, check_kobayashi_bound,
    check_kobayashi_on, check_shrink, check_star_shape, pair_sequences,
};
pub use dyn_checks::{
    attractor_inclusions_at, check_attractor_inclusions, check_axiom4, check_nonexpansive,
    check_semigroup_attractor_equality, check_step_monotone, check_wolff_denjoy, compare_attractors, DwTarget,
};
pub use suite::{run_suite, ExtraInstance, SuiteReport, SUITES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Inconclusive,
    Violation,
}

impl Verdict {
    /// Process exit status for a run ending in this verdict.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Violation => 1,
            Verdict::Inconclusive => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_name: String,
    pub instance: String,
    pub negative_control: bool,
    pub n_samples: usize,
    pub n_violations: usize,
    /// Smallest margin seen; `null` in JSON when there were no samples.
    pub worst_margin: f64,
    pub tolerance: f64,
    pub seed: u64,
    pub config_digest: String,
    pub verdict: Verdict,
    /// Why the property is expected on this instance, or what the control
    /// breaks.
    pub justification: String,
    pub details: BTreeMap<String, Value>,
}

/// Everything a check needs besides its instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyParams {
    pub n_condition_c: usize,
    pub n_axiom5: usize,
    pub n_kobayashi: usize,
    pub n_axiom2star: usize,
    pub n_a3prime: usize,
    pub n_nonexpansive: usize,
    pub n_seeds: usize,
    pub n_star_eta: usize,
    pub n_star_s: usize,
    pub condc_tol: f64,
    pub axiom5_tol: f64,
    pub kobayashi_slack: f64,
    /// Required growth of `D_k` for Axiom 2*.
    pub growth: f64,
    /// Threshold standing in for `-infinity` in the A3' premise.
    pub a3prime: f64,
    /// Halvings toward the interior point in the Axiom 2* and A3' sequences.
    pub sequence_steps: usize,
    pub face_tol: f64,
    pub ch_samples: usize,
    pub tol_star: f64,
    pub pull: f64,
    pub shrink_grid: usize,
    pub shrink_radii: Vec<f64>,
    pub shrink_final_max: f64,
    pub step_monotone_tol: f64,
    pub approach: ApproachPolicy,
    pub dynamics: DynamicsParams,
}

impl Default for VerifyParams {
    fn default() -> Self {
        Self {
            n_condition_c: 100_000,
            n_axiom5: 100_000,
            n_kobayashi: 10_000,
            n_axiom2star: 200,
            n_a3prime: 200,
            n_nonexpansive: 10_000,
            n_seeds: 100,
            n_star_eta: 100,
            n_star_s: 10,
            condc_tol: 1e-9,
            axiom5_tol: 1e-9,
            kobayashi_slack: 1e-12,
            growth: 5.0,
            a3prime: -10.0,
            sequence_steps: 40,
            face_tol: crate::geometry::DEFAULT_FACE_TOL,
            ch_samples: crate::geometry::DEFAULT_CH_SAMPLES,
            tol_star: crate::horoballs::DEFAULT_TOL_STAR,
            pull: crate::horoballs::DEFAULT_PULL_FACTOR,
            shrink_grid: 100,
            shrink_radii: vec![4.0, 2.0, 0.0, -2.0, -4.0, -8.0],
            shrink_final_max: 0.05,
            step_monotone_tol: 1e-9,
            approach: ApproachPolicy::default(),
            dynamics: DynamicsParams::default(),
        }
    }
}

/// Seed and digest stamped on every report.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckContext {
    pub seed: u64,
    pub config_digest: String,
    pub params: VerifyParams,
}

impl CheckContext {
    pub fn new(seed: u64, config_digest: impl Into<String>, params: VerifyParams) -> Self {
        Self { seed, config_digest: config_digest.into(), params }
    }
}

impl Default for CheckContext {
    fn default() -> Self {
        Self::new(0, "", VerifyParams::default())
    }
}

/// Running count of samples, violations and the smallest margin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Tally {
    pub n: usize,
    pub violations: usize,
    pub worst: f64,
    pub tol: f64,
}

impl Tally {
    pub fn new(tol: f64) -> Self {
        Self { n: 0, violations: 0, worst: f64::INFINITY, tol }
    }

    pub fn add(&mut self, margin: f64) {
        self.n += 1;
        self.worst = self.worst.min(margin);
        if margin < -self.tol || margin.is_nan() {
            self.violations += 1;
        }
    }

    pub fn merge(mut self, other: Tally) -> Tally {
        self.n += other.n;
        self.violations += other.violations;
        self.worst = self.worst.min(other.worst);
        self
    }
}

/// Draws `n` margins with one random stream per chunk and tallies them.
/// `sample` returns `None` for draws that do not apply.
pub(crate) fn sample_tally<F>(n: usize, seed: u64, tol: f64, sample: F) -> Tally
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> Option<f64> + Sync + Send,
{
    map_chunks(n, |task, _, len| {
        let mut rng = task_rng(seed, task as u64);
        let mut t = Tally::new(tol);
        for _ in 0..len {
            if let Some(m) = sample(&mut rng) {
                t.add(m);
            }
        }
        t
    })
    .into_iter()
    .fold(Tally::new(tol), Tally::merge)
}

/// Builder for [`CheckReport`].
pub(crate) struct ReportBuilder<'a> {
    ctx: &'a CheckContext,
    name: &'static str,
    instance: String,
    negative_control: bool,
    justification: String,
    details: BTreeMap<String, Value>,
}

impl<'a> ReportBuilder<'a> {
    pub fn new(ctx: &'a CheckContext, name: &'static str, instance: impl Into<String>) -> Self {
        Self {
            ctx,
            name,
            instance: instance.into(),
            negative_control: false,
            justification: String::new(),
            details: BTreeMap::new(),
        }
    }

    pub fn control(mut self, negative: bool) -> Self {
        self.negative_control = negative;
        self
    }

    pub fn because(mut self, text: impl Into<String>) -> Self {
        self.justification = text.into();
        self
    }

    pub fn detail(mut self, key: &str, value: impl Serialize) -> Self {
        self.details.insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    /// Verdict from the tally: clean tallies pass, and for negative controls
    /// the sense is reversed. An empty tally is inconclusive.
    pub fn finish(self, t: Tally) -> CheckReport {
        let verdict = match (t.n, self.negative_control, t.violations > 0) {
            (0, _, _) => Verdict::Inconclusive,
            (_, false, false) | (_, true, true) => Verdict::Pass,
            _ => Verdict::Violation,
        };
        self.finish_with(t, verdict)
    }

    pub fn inconclusive(self, reason: &str) -> CheckReport {
        let tol = 0.0;
        self.detail("inconclusive", reason).finish_with(Tally::new(tol), Verdict::Inconclusive)
    }

    fn finish_with(self, t: Tally, verdict: Verdict) -> CheckReport {
        CheckReport {
            check_name: self.name.to_string(),
            instance: self.instance,
            negative_control: self.negative_control,
            n_samples: t.n,
            n_violations: t.violations,
            worst_margin: t.worst,
            tolerance: t.tol,
            seed: self.ctx.seed,
            config_digest: self.ctx.config_digest.clone(),
            verdict,
            justification: self.justification,
            details: self.details,
        }
    }
}
