use std::fmt::Write as _;

use super::{BellFunctional, BellScenario, ScenarioError};
use crate::linalg::Party;

const NEGATIVITY_TOL: f64 = 1e-12;
const NORMALIZATION_TOL: f64 = 1e-9;
const RENORMALIZE_TOL: f64 = 1e-7;
const SIGNALING_TOL: f64 = 1e-6;

/// How single-party marginals are read off a joint table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MarginalPolicy {
    /// `P_A(a|x) = Σ_b P(ab|x,0)` and symmetrically for Bob.
    #[default]
    PartnerSettingZero,
    /// Average over all partner settings; rejects signaling tables.
    Average,
}

/// Conditional distribution `P(ab|xy)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTable {
    scenario: BellScenario,
    p: Vec<f64>,
    renormalized: bool,
}

impl ProbabilityTable {
    /// Validates non-negativity and per-setting normalization. Blocks off by
    /// less than 1e-7 are rescaled and [`Self::was_renormalized`] is set.
    pub fn new(scenario: BellScenario, mut p: Vec<f64>) -> Result<Self, ScenarioError> {
        if p.len() != scenario.joint_len() {
            return Err(ScenarioError::InvalidTable(format!(
                "expected {} entries, got {}",
                scenario.joint_len(),
                p.len()
            )));
        }
        if let Some((k, v)) = p
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < -NEGATIVITY_TOL)
        {
            let (x, y, a, b) = scenario.joint_indices().nth(k).expect("index in range");
            return Err(ScenarioError::InvalidTable(format!(
                "P({a} {b}|{x} {y}) = {v} is negative or not finite"
            )));
        }
        let mut renormalized = false;
        for x in 0..scenario.settings(Party::A) {
            for y in 0..scenario.settings(Party::B) {
                let start = scenario.joint_index(x, y, 0, 0);
                let len = scenario.outcomes_a()[x] * scenario.outcomes_b()[y];
                let block = &mut p[start..start + len];
                let total: f64 = block.iter().sum();
                let err = (total - 1.0).abs();
                if err <= NORMALIZATION_TOL {
                    continue;
                }
                if err <= RENORMALIZE_TOL {
                    block.iter_mut().for_each(|v| *v /= total);
                    renormalized = true;
                } else {
                    return Err(ScenarioError::InvalidTable(format!(
                        "entries for settings ({x},{y}) sum to {total}"
                    )));
                }
            }
        }
        Ok(Self {
            scenario,
            p,
            renormalized,
        })
    }

    pub fn uniform(scenario: BellScenario) -> Self {
        let p = scenario
            .joint_indices()
            .map(|(x, y, _, _)| 1.0 / (scenario.outcomes_a()[x] * scenario.outcomes_b()[y]) as f64)
            .collect();
        Self {
            scenario,
            p,
            renormalized: false,
        }
    }

    pub fn scenario(&self) -> &BellScenario {
        &self.scenario
    }

    pub fn get(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        self.p[self.scenario.joint_index(x, y, a, b)]
    }

    pub fn entries(&self) -> &[f64] {
        &self.p
    }

    pub fn was_renormalized(&self) -> bool {
        self.renormalized
    }

    /// Marginal of `party` for its `setting`/`outcome` given the partner setting.
    pub fn marginal_given(
        &self,
        party: Party,
        setting: usize,
        outcome: usize,
        partner: usize,
    ) -> f64 {
        match party {
            Party::A => (0..self.scenario.outcomes_b()[partner])
                .map(|b| self.get(setting, partner, outcome, b))
                .sum(),
            Party::B => (0..self.scenario.outcomes_a()[partner])
                .map(|a| self.get(partner, setting, a, outcome))
                .sum(),
        }
    }

    /// Largest change of any marginal across partner settings.
    pub fn signaling_deviation(&self) -> f64 {
        let mut dev = 0.0f64;
        for party in [Party::A, Party::B] {
            let partners = self.scenario.settings(party.other());
            for (s, &v) in self.scenario.outcomes(party).iter().enumerate() {
                for o in 0..v {
                    let m: Vec<f64> = (0..partners)
                        .map(|t| self.marginal_given(party, s, o, t))
                        .collect();
                    let lo = m.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = m.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    dev = dev.max(hi - lo);
                }
            }
        }
        dev
    }

    /// Reads the `x,y,a,b,p` CSV format. Every index of `scenario` must
    /// appear exactly once.
    pub fn from_csv(text: &str, scenario: &BellScenario) -> Result<Self, ScenarioError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| csv_error(&e))?.clone();
        let expected = ["x", "y", "a", "b", "p"];
        if headers.len() != expected.len() || headers.iter().zip(expected).any(|(h, e)| h != e) {
            return Err(ScenarioError::TableParse {
                line: 1,
                message: format!(
                    "expected header `x,y,a,b,p`, found `{}`",
                    headers.iter().collect::<Vec<_>>().join(",")
                ),
            });
        }
        let mut p = vec![f64::NAN; scenario.joint_len()];
        for record in reader.records() {
            let record = record.map_err(|e| csv_error(&e))?;
            let line = record.position().map(|pos| pos.line()).unwrap_or(0) as usize;
            let parse_index = |i: usize| -> Result<usize, ScenarioError> {
                record[i]
                    .parse::<usize>()
                    .map_err(|_| ScenarioError::TableParse {
                        line,
                        message: format!(
                            "column `{}` is not a non-negative integer: `{}`",
                            expected[i], &record[i]
                        ),
                    })
            };
            let (x, y, a, b) = (
                parse_index(0)?,
                parse_index(1)?,
                parse_index(2)?,
                parse_index(3)?,
            );
            let value: f64 = record[4].parse().map_err(|_| ScenarioError::TableParse {
                line,
                message: format!("column `p` is not a number: `{}`", &record[4]),
            })?;
            if !scenario.contains_joint(x, y, a, b) {
                return Err(ScenarioError::ScenarioMismatch(format!(
                    "line {line}: P({a} {b}|{x} {y}) is outside scenario {}",
                    scenario.describe()
                )));
            }
            let k = scenario.joint_index(x, y, a, b);
            if !p[k].is_nan() {
                return Err(ScenarioError::TableParse {
                    line,
                    message: format!("duplicate row for P({a} {b}|{x} {y})"),
                });
            }
            p[k] = value;
        }
        if let Some(k) = p.iter().position(|v| v.is_nan()) {
            let (x, y, a, b) = scenario.joint_indices().nth(k).expect("index in range");
            return Err(ScenarioError::InvalidTable(format!(
                "missing row for P({a} {b}|{x} {y})"
            )));
        }
        Self::new(scenario.clone(), p)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,a,b,p\n");
        for ((x, y, a, b), p) in self.scenario.joint_indices().zip(&self.p) {
            writeln!(out, "{x},{y},{a},{b},{p}").expect("writing to a String");
        }
        out
    }
}

fn csv_error(e: &csv::Error) -> ScenarioError {
    let line = e.position().map(|p| p.line()).unwrap_or(0) as usize;
    ScenarioError::TableParse {
        line,
        message: e.to_string(),
    }
}

/// Value of `f` on table `t`.
pub fn evaluate(
    f: &BellFunctional,
    t: &ProbabilityTable,
    policy: MarginalPolicy,
) -> Result<f64, ScenarioError> {
    f.scenario().ensure_same(t.scenario())?;
    if policy == MarginalPolicy::Average {
        let deviation = t.signaling_deviation();
        if deviation > SIGNALING_TOL {
            return Err(ScenarioError::SignalingDetected { deviation });
        }
    }
    let s = f.scenario();
    let mut value = 0.0;
    for (w, p) in f.joint_coefficients().iter().zip(t.entries()) {
        value += w * p;
    }
    for party in [Party::A, Party::B] {
        let partners = s.settings(party.other());
        for (setting, &v) in s.outcomes(party).iter().enumerate() {
            for outcome in 0..v {
                let marginal = match policy {
                    MarginalPolicy::PartnerSettingZero => {
                        t.marginal_given(party, setting, outcome, 0)
                    }
                    MarginalPolicy::Average => {
                        (0..partners)
                            .map(|q| t.marginal_given(party, setting, outcome, q))
                            .sum::<f64>()
                            / partners as f64
                    }
                };
                value += f.marginal(party, setting, outcome) * marginal;
            }
        }
    }
    Ok(value + f.constant())
}
