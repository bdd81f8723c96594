//! Normalized probability tables over a subset of variables.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistError {
    #[error("table length {got} does not match scope size {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("negative entry {0} in probability table")]
    NegativeEntry(f64),
    #[error("table sums to {0}, not 1")]
    NotNormalized(f64),
    #[error("total mass is zero")]
    ZeroMass,
    #[error("unknown variable `{0}` in distribution scope")]
    UnknownVariable(String),
    #[error("duplicate variable `{0}` in scope")]
    DuplicateVariable(String),
    #[error("zero-probability conditioning context")]
    ZeroProbabilityContext,
}

/// Compensated (Kahan) summation, so normalization checks are not at the
/// mercy of naive accumulation error on large tables.
pub(crate) fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

/// A probability table over an ordered variable scope, row-major with the
/// last scope variable varying fastest. Entries are nonnegative and sum to 1
/// within 1e-12. Only serializable: reconstruction goes through the
/// validating constructors.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Distribution {
    scope: Vec<String>,
    cards: Vec<usize>,
    table: Vec<f64>,
}

impl Distribution {
    /// Wrap an already-normalized table, validating the invariants.
    pub fn new(scope: Vec<String>, cards: Vec<usize>, table: Vec<f64>) -> Result<Self, DistError> {
        let expected: usize = cards.iter().product();
        if scope.len() != cards.len() || table.len() != expected {
            return Err(DistError::LengthMismatch {
                expected,
                got: table.len(),
            });
        }
        for name in &scope {
            if scope.iter().filter(|n| *n == name).count() > 1 {
                return Err(DistError::DuplicateVariable(name.clone()));
            }
        }
        if let Some(&bad) = table.iter().find(|&&p| p < 0.0) {
            return Err(DistError::NegativeEntry(bad));
        }
        let total = kahan_sum(table.iter().copied());
        if (total - 1.0).abs() > 1e-12 {
            return Err(DistError::NotNormalized(total));
        }
        Ok(Self {
            scope,
            cards,
            table,
        })
    }

    /// Normalize nonnegative weights into a distribution.
    pub fn from_weights(
        scope: Vec<String>,
        cards: Vec<usize>,
        mut weights: Vec<f64>,
    ) -> Result<Self, DistError> {
        let expected: usize = cards.iter().product();
        if scope.len() != cards.len() || weights.len() != expected {
            return Err(DistError::LengthMismatch {
                expected,
                got: weights.len(),
            });
        }
        if let Some(&bad) = weights.iter().find(|&&p| p < 0.0) {
            return Err(DistError::NegativeEntry(bad));
        }
        let total = kahan_sum(weights.iter().copied());
        if total <= 0.0 {
            return Err(DistError::ZeroMass);
        }
        for w in &mut weights {
            *w /= total;
        }
        Self::new(scope, cards, weights)
    }

    pub fn scope(&self) -> &[String] {
        &self.scope
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn position(&self, var: &str) -> Result<usize, DistError> {
        self.scope
            .iter()
            .position(|n| n == var)
            .ok_or_else(|| DistError::UnknownVariable(var.to_owned()))
    }

    pub fn index_of(&self, assignment: &[usize]) -> usize {
        index_of(&self.cards, assignment)
    }

    pub fn prob(&self, assignment: &[usize]) -> f64 {
        self.table[self.index_of(assignment)]
    }

    /// Total mass of the event fixing the listed variables.
    pub fn prob_event(&self, fixed: &[(&str, usize)]) -> Result<f64, DistError> {
        let positions: Vec<(usize, usize)> = fixed
            .iter()
            .map(|&(name, state)| self.position(name).map(|p| (p, state)))
            .collect::<Result<_, _>>()?;
        let mut buf = vec![0usize; self.cards.len()];
        let mut mass = 0.0;
        for (idx, &p) in self.table.iter().enumerate() {
            decode_into(idx, &self.cards, &mut buf);
            if positions.iter().all(|&(pos, state)| buf[pos] == state) {
                mass += p;
            }
        }
        Ok(mass)
    }

    /// Marginal over `keep`, in the order given.
    pub fn marginal(&self, keep: &[&str]) -> Result<Distribution, DistError> {
        let positions: Vec<usize> = keep
            .iter()
            .map(|name| self.position(name))
            .collect::<Result<_, _>>()?;
        let out_cards: Vec<usize> = positions.iter().map(|&p| self.cards[p]).collect();
        let mut weights = vec![0.0; out_cards.iter().product()];
        let mut buf = vec![0usize; self.cards.len()];
        let mut out_buf = vec![0usize; positions.len()];
        for (idx, &p) in self.table.iter().enumerate() {
            decode_into(idx, &self.cards, &mut buf);
            for (slot, &pos) in out_buf.iter_mut().zip(&positions) {
                *slot = buf[pos];
            }
            weights[index_of(&out_cards, &out_buf)] += p;
        }
        Distribution::from_weights(
            keep.iter().map(|s| (*s).to_owned()).collect(),
            out_cards,
            weights,
        )
    }

    /// Conditional distribution over `targets` given fixed values for other
    /// scope variables. Fails on a zero-mass context.
    pub fn conditional(
        &self,
        targets: &[&str],
        given: &[(&str, usize)],
    ) -> Result<Distribution, DistError> {
        let target_pos: Vec<usize> = targets
            .iter()
            .map(|name| self.position(name))
            .collect::<Result<_, _>>()?;
        let given_pos: Vec<(usize, usize)> = given
            .iter()
            .map(|&(name, state)| self.position(name).map(|p| (p, state)))
            .collect::<Result<_, _>>()?;
        let out_cards: Vec<usize> = target_pos.iter().map(|&p| self.cards[p]).collect();
        let mut weights = vec![0.0; out_cards.iter().product()];
        let mut buf = vec![0usize; self.cards.len()];
        let mut out_buf = vec![0usize; target_pos.len()];
        for (idx, &p) in self.table.iter().enumerate() {
            decode_into(idx, &self.cards, &mut buf);
            if given_pos.iter().all(|&(pos, state)| buf[pos] == state) {
                for (slot, &pos) in out_buf.iter_mut().zip(&target_pos) {
                    *slot = buf[pos];
                }
                weights[index_of(&out_cards, &out_buf)] += p;
            }
        }
        Distribution::from_weights(
            targets.iter().map(|s| (*s).to_owned()).collect(),
            out_cards,
            weights,
        )
        .map_err(|e| match e {
            DistError::ZeroMass => DistError::ZeroProbabilityContext,
            other => other,
        })
    }

    /// Largest absolute difference between two tables over the same scope.
    pub fn max_abs_diff(&self, other: &Distribution) -> f64 {
        debug_assert_eq!(self.scope, other.scope);
        self.table
            .iter()
            .zip(&other.table)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Total variation distance to another distribution over the same scope.
    pub fn total_variation(&self, other: &Distribution) -> f64 {
        debug_assert_eq!(self.scope, other.scope);
        0.5 * self
            .table
            .iter()
            .zip(&other.table)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P({})", self.scope.join(","))?;
        write!(f, " = [")?;
        for (i, p) in self.table.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p:.6}")?;
        }
        write!(f, "]")
    }
}

/// Row-major index with the last coordinate varying fastest.
pub(crate) fn index_of(cards: &[usize], assignment: &[usize]) -> usize {
    debug_assert_eq!(cards.len(), assignment.len());
    let mut idx = 0;
    for (&card, &state) in cards.iter().zip(assignment) {
        debug_assert!(state < card);
        idx = idx * card + state;
    }
    idx
}

/// Inverse of [`index_of`].
pub(crate) fn decode_into(mut idx: usize, cards: &[usize], out: &mut [usize]) {
    for pos in (0..cards.len()).rev() {
        out[pos] = idx % cards[pos];
        idx /= cards[pos];
    }
}

/// Iterate all assignments of the given shape in table order.
#[cfg(test)]
pub(crate) fn assignments(cards: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let total: usize = cards.iter().product();
    (0..total).map(move |idx| {
        let mut out = vec![0usize; cards.len()];
        decode_into(idx, cards, &mut out);
        out
    })
}
