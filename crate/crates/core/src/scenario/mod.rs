//! Bell scenarios, linear functionals on probability tables, and their
//! evaluation on tables and on quantum models.

mod bounds;
mod model;
mod table;

pub use bounds::{BoundRecord, CertifiedBound};
pub use model::{bell_operator, model_value, table_of, Povm, QuantumModel};
pub use table::{evaluate, MarginalPolicy, ProbabilityTable};

use thiserror::Error;

use crate::linalg::{LinalgError, Party};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("scenario mismatch: {0}")]
    ScenarioMismatch(String),
    #[error("line {line}: {message}")]
    TableParse { line: usize, message: String },
    #[error("invalid probability table: {0}")]
    InvalidTable(String),
    #[error("signaling detected: marginals differ by {deviation:.3e} across partner settings")]
    SignalingDetected { deviation: f64 },
    #[error("invalid quantum model: {0}")]
    InvalidModel(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Two parties with a list of outcome counts per measurement setting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BellScenario {
    outcomes_a: Vec<usize>,
    outcomes_b: Vec<usize>,
    joint_offsets: Vec<usize>,
    joint_len: usize,
    marginal_offsets_a: Vec<usize>,
    marginal_offsets_b: Vec<usize>,
}

impl BellScenario {
    pub fn new(outcomes_a: Vec<usize>, outcomes_b: Vec<usize>) -> Result<Self, ScenarioError> {
        if outcomes_a.is_empty() || outcomes_b.is_empty() {
            return Err(ScenarioError::InvalidScenario(
                "each party needs at least one setting".into(),
            ));
        }
        if let Some(v) = outcomes_a.iter().chain(&outcomes_b).find(|&&v| v < 2) {
            return Err(ScenarioError::InvalidScenario(format!(
                "every setting needs at least 2 outcomes, got {v}"
            )));
        }
        let mut joint_offsets = Vec::with_capacity(outcomes_a.len() * outcomes_b.len());
        let mut joint_len = 0;
        for &va in &outcomes_a {
            for &vb in &outcomes_b {
                joint_offsets.push(joint_len);
                joint_len += va * vb;
            }
        }
        Ok(Self {
            marginal_offsets_a: prefix_offsets(&outcomes_a),
            marginal_offsets_b: prefix_offsets(&outcomes_b),
            outcomes_a,
            outcomes_b,
            joint_offsets,
            joint_len,
        })
    }

    /// Same outcome count `v` for `m` settings on each side.
    pub fn uniform(settings: usize, outcomes: usize) -> Result<Self, ScenarioError> {
        Self::new(vec![outcomes; settings], vec![outcomes; settings])
    }

    pub fn outcomes_a(&self) -> &[usize] {
        &self.outcomes_a
    }

    pub fn outcomes_b(&self) -> &[usize] {
        &self.outcomes_b
    }

    pub fn outcomes(&self, party: Party) -> &[usize] {
        match party {
            Party::A => &self.outcomes_a,
            Party::B => &self.outcomes_b,
        }
    }

    pub fn settings(&self, party: Party) -> usize {
        self.outcomes(party).len()
    }

    /// Flat index of `P(ab|xy)`; panics when out of range.
    pub fn joint_index(&self, x: usize, y: usize, a: usize, b: usize) -> usize {
        assert!(
            self.contains_joint(x, y, a, b),
            "joint index ({x},{y},{a},{b}) out of range"
        );
        self.joint_offsets[x * self.outcomes_b.len() + y] + a * self.outcomes_b[y] + b
    }

    pub fn contains_joint(&self, x: usize, y: usize, a: usize, b: usize) -> bool {
        x < self.outcomes_a.len()
            && y < self.outcomes_b.len()
            && a < self.outcomes_a[x]
            && b < self.outcomes_b[y]
    }

    pub fn contains_marginal(&self, party: Party, setting: usize, outcome: usize) -> bool {
        let v = self.outcomes(party);
        setting < v.len() && outcome < v[setting]
    }

    pub fn joint_len(&self) -> usize {
        self.joint_len
    }

    pub fn marginal_index(&self, party: Party, setting: usize, outcome: usize) -> usize {
        assert!(
            self.contains_marginal(party, setting, outcome),
            "marginal index ({party}: {setting},{outcome}) out of range"
        );
        let offsets = match party {
            Party::A => &self.marginal_offsets_a,
            Party::B => &self.marginal_offsets_b,
        };
        offsets[setting] + outcome
    }

    pub fn marginal_len(&self, party: Party) -> usize {
        self.outcomes(party).iter().sum()
    }

    /// All `(x, y, a, b)` in storage order.
    pub fn joint_indices(&self) -> impl Iterator<Item = (usize, usize, usize, usize)> + '_ {
        (0..self.outcomes_a.len()).flat_map(move |x| {
            (0..self.outcomes_b.len()).flat_map(move |y| {
                (0..self.outcomes_a[x])
                    .flat_map(move |a| (0..self.outcomes_b[y]).map(move |b| (x, y, a, b)))
            })
        })
    }

    /// Number of deterministic local strategies, saturating at `u128::MAX`.
    pub fn strategy_count(&self) -> u128 {
        self.outcomes_a
            .iter()
            .chain(&self.outcomes_b)
            .fold(1u128, |acc, &v| acc.saturating_mul(v as u128))
    }

    pub(crate) fn ensure_same(&self, other: &BellScenario) -> Result<(), ScenarioError> {
        if self == other {
            Ok(())
        } else {
            Err(ScenarioError::ScenarioMismatch(format!(
                "{} vs {}",
                self.describe(),
                other.describe()
            )))
        }
    }

    /// `A:3,3 B:3,3`
    pub fn describe(&self) -> String {
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        format!("A:{} B:{}", join(&self.outcomes_a), join(&self.outcomes_b))
    }
}

fn prefix_offsets(counts: &[usize]) -> Vec<usize> {
    counts
        .iter()
        .scan(0, |acc, &v| {
            let start = *acc;
            *acc += v;
            Some(start)
        })
        .collect()
}

/// `Σ w_abxy P(ab|xy) + Σ wA_xa P_A(a|x) + Σ wB_yb P_B(b|y) + w0`.
#[derive(Debug, Clone, PartialEq)]
pub struct BellFunctional {
    scenario: BellScenario,
    joint: Vec<f64>,
    marginal_a: Vec<f64>,
    marginal_b: Vec<f64>,
    constant: f64,
}

impl BellFunctional {
    pub fn zero(scenario: BellScenario) -> Self {
        Self {
            joint: vec![0.0; scenario.joint_len()],
            marginal_a: vec![0.0; scenario.marginal_len(Party::A)],
            marginal_b: vec![0.0; scenario.marginal_len(Party::B)],
            constant: 0.0,
            scenario,
        }
    }

    /// Build from flat coefficient arrays laid out as in [`BellScenario`].
    pub fn from_parts(
        scenario: BellScenario,
        joint: Vec<f64>,
        marginal_a: Vec<f64>,
        marginal_b: Vec<f64>,
        constant: f64,
    ) -> Result<Self, ScenarioError> {
        let expect = [
            ("joint", joint.len(), scenario.joint_len()),
            (
                "marginal A",
                marginal_a.len(),
                scenario.marginal_len(Party::A),
            ),
            (
                "marginal B",
                marginal_b.len(),
                scenario.marginal_len(Party::B),
            ),
        ];
        for (what, got, want) in expect {
            if got != want {
                return Err(ScenarioError::DimensionMismatch(format!(
                    "{what} coefficients: expected {want}, got {got}"
                )));
            }
        }
        Ok(Self {
            scenario,
            joint,
            marginal_a,
            marginal_b,
            constant,
        })
    }

    pub fn scenario(&self) -> &BellScenario {
        &self.scenario
    }

    pub fn joint(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        self.joint[self.scenario.joint_index(x, y, a, b)]
    }

    pub fn add_joint(&mut self, x: usize, y: usize, a: usize, b: usize, w: f64) {
        let i = self.scenario.joint_index(x, y, a, b);
        self.joint[i] += w;
    }

    pub fn marginal(&self, party: Party, setting: usize, outcome: usize) -> f64 {
        let i = self.scenario.marginal_index(party, setting, outcome);
        match party {
            Party::A => self.marginal_a[i],
            Party::B => self.marginal_b[i],
        }
    }

    pub fn add_marginal(&mut self, party: Party, setting: usize, outcome: usize, w: f64) {
        let i = self.scenario.marginal_index(party, setting, outcome);
        match party {
            Party::A => self.marginal_a[i] += w,
            Party::B => self.marginal_b[i] += w,
        }
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn set_constant(&mut self, w0: f64) {
        self.constant = w0;
    }

    pub fn joint_coefficients(&self) -> &[f64] {
        &self.joint
    }

    pub fn marginal_coefficients(&self, party: Party) -> &[f64] {
        match party {
            Party::A => &self.marginal_a,
            Party::B => &self.marginal_b,
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        let s = |v: &[f64]| v.iter().map(|w| w * k).collect();
        Self {
            scenario: self.scenario.clone(),
            joint: s(&self.joint),
            marginal_a: s(&self.marginal_a),
            marginal_b: s(&self.marginal_b),
            constant: self.constant * k,
        }
    }

    pub fn negated(&self) -> Self {
        self.scaled(-1.0)
    }

    /// Coefficient-wise sum; both functionals must share a scenario.
    pub fn try_add(&self, other: &BellFunctional) -> Result<Self, ScenarioError> {
        self.scenario.ensure_same(&other.scenario)?;
        let add = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + y).collect();
        Ok(Self {
            scenario: self.scenario.clone(),
            joint: add(&self.joint, &other.joint),
            marginal_a: add(&self.marginal_a, &other.marginal_a),
            marginal_b: add(&self.marginal_b, &other.marginal_b),
            constant: self.constant + other.constant,
        })
    }

    /// Sum of absolute values of all coefficients, constant included.
    pub fn abs_coefficient_sum(&self) -> f64 {
        self.joint
            .iter()
            .chain(&self.marginal_a)
            .chain(&self.marginal_b)
            .map(|w| w.abs())
            .sum::<f64>()
            + self.constant.abs()
    }

    /// Largest coefficient-wise difference, or infinity across scenarios.
    pub fn max_coefficient_diff(&self, other: &BellFunctional) -> f64 {
        if self.scenario != other.scenario {
            return f64::INFINITY;
        }
        self.joint
            .iter()
            .zip(&other.joint)
            .chain(self.marginal_a.iter().zip(&other.marginal_a))
            .chain(self.marginal_b.iter().zip(&other.marginal_b))
            .map(|(a, b)| (a - b).abs())
            .fold((self.constant - other.constant).abs(), f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_validation() {
        assert!(BellScenario::new(vec![], vec![2]).is_err());
        assert!(BellScenario::new(vec![2, 1], vec![2]).is_err());
        let s = BellScenario::new(vec![2, 3], vec![2, 2, 2]).unwrap();
        assert_eq!(s.joint_len(), 2 * 6 + 3 * 6);
        assert_eq!(s.marginal_len(Party::A), 5);
        assert_eq!(s.strategy_count(), 2 * 3 * 8);
        assert_eq!(s.describe(), "A:2,3 B:2,2,2");
    }

    #[test]
    fn joint_indices_match_storage_order() {
        let s = BellScenario::new(vec![2, 3], vec![3, 2]).unwrap();
        for (k, (x, y, a, b)) in s.joint_indices().enumerate() {
            assert_eq!(s.joint_index(x, y, a, b), k);
        }
        assert_eq!(s.joint_indices().count(), s.joint_len());
    }

    #[test]
    #[should_panic]
    fn out_of_range_joint_panics() {
        let s = BellScenario::uniform(2, 2).unwrap();
        s.joint_index(0, 0, 2, 0);
    }

    #[test]
    fn linear_operations() {
        let s = BellScenario::uniform(2, 2).unwrap();
        let mut f = BellFunctional::zero(s.clone());
        f.add_joint(0, 1, 1, 0, 2.0);
        f.add_marginal(Party::B, 1, 0, -1.0);
        f.set_constant(0.5);
        let g = f.try_add(&f.negated()).unwrap();
        assert_eq!(g, BellFunctional::zero(s.clone()));
        assert_eq!(f.scaled(2.0).joint(0, 1, 1, 0), 4.0);
        assert_eq!(f.abs_coefficient_sum(), 3.5);

        let other = BellFunctional::zero(BellScenario::uniform(2, 3).unwrap());
        assert!(matches!(
            f.try_add(&other),
            Err(ScenarioError::ScenarioMismatch(_))
        ));
    }

    #[test]
    fn from_parts_checks_shapes() {
        let s = BellScenario::uniform(2, 2).unwrap();
        assert!(BellFunctional::from_parts(
            s.clone(),
            vec![0.0; 16],
            vec![0.0; 4],
            vec![0.0; 4],
            0.0
        )
        .is_ok());
        assert!(
            BellFunctional::from_parts(s, vec![0.0; 15], vec![0.0; 4], vec![0.0; 4], 0.0).is_err()
        );
    }
}
