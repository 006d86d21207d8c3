use std::collections::BTreeMap;

/// Upper bound quoted from an external source, kept for soundness checks.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifiedBound {
    pub value: f64,
    pub provenance: String,
}

/// Local bound plus best values found at each local dimension.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoundRecord {
    pub local_bound: f64,
    best_by_dimension: BTreeMap<usize, f64>,
    certified_upper: BTreeMap<usize, CertifiedBound>,
}

impl BoundRecord {
    pub fn new(local_bound: f64) -> Self {
        Self {
            local_bound,
            ..Self::default()
        }
    }

    /// Keeps the larger of the stored and the new value for `dim`.
    pub fn record(&mut self, dim: usize, value: f64) {
        let slot = self.best_by_dimension.entry(dim).or_insert(value);
        if value > *slot {
            *slot = value;
        }
    }

    pub fn certify(&mut self, dim: usize, value: f64, provenance: impl Into<String>) {
        self.certified_upper.insert(
            dim,
            CertifiedBound {
                value,
                provenance: provenance.into(),
            },
        );
    }

    pub fn certified(&self, dim: usize) -> Option<&CertifiedBound> {
        self.certified_upper.get(&dim)
    }

    /// Raw values as recorded.
    pub fn raw(&self) -> &BTreeMap<usize, f64> {
        &self.best_by_dimension
    }

    /// Best values made non-decreasing in dimension: a model in dimension
    /// `d` embeds into every larger dimension.
    pub fn best_by_dimension(&self) -> BTreeMap<usize, f64> {
        let mut running = f64::NEG_INFINITY;
        self.best_by_dimension
            .iter()
            .map(|(&d, &v)| {
                running = running.max(v);
                (d, running)
            })
            .collect()
    }

    /// Dimensions whose best value exceeds the certified bound by more than `slack`.
    pub fn soundness_violations(&self, slack: f64) -> Vec<usize> {
        self.best_by_dimension()
            .into_iter()
            .filter(|(d, v)| {
                self.certified_upper
                    .get(d)
                    .is_some_and(|c| *v > c.value + slack)
            })
            .map(|(d, _)| d)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_is_monotone_in_dimension() {
        let mut r = BoundRecord::new(0.0);
        r.record(2, 0.2);
        r.record(3, 0.1);
        r.record(3, 0.05);
        r.record(4, 0.3);
        assert_eq!(r.raw()[&3], 0.1);
        let best = r.best_by_dimension();
        assert_eq!(best[&3], 0.2);
        assert_eq!(best[&4], 0.3);
    }

    #[test]
    fn soundness_against_certified_values() {
        let mut r = BoundRecord::new(0.0);
        r.certify(2, 0.2071, "reference");
        r.record(2, 0.20705);
        assert!(r.soundness_violations(1e-6).is_empty());
        r.record(2, 0.3);
        assert_eq!(r.soundness_violations(1e-6), vec![2]);
        assert_eq!(r.certified(2).unwrap().provenance, "reference");
    }
}
