use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ConfidenceError;
use crate::argument::NodeId;
use crate::scalar::Scalar;

/// Likelihood terms recorded for a claim. Housed for analysts; no measure
/// beyond the diversity ratio is computed from them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Likelihoods<T> {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_e_given_c: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_e_given_not_c: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_e2_given_c_and_e1: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_e2_given_e1: Option<T>,
}

impl<T: Clone> Likelihoods<T> {
    pub fn fields(&self) -> [(&'static str, Option<T>); 4] {
        [
            ("p_e_given_c", self.p_e_given_c.clone()),
            ("p_e_given_not_c", self.p_e_given_not_c.clone()),
            ("p_e2_given_c_and_e1", self.p_e2_given_c_and_e1.clone()),
            ("p_e2_given_e1", self.p_e2_given_e1.clone()),
        ]
    }
}

/// Assigned probabilities: posteriors P(C|E) of evidence-backed claims and
/// confidences of warrants. Priors and likelihoods only feed the
/// weight-of-evidence measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafAssignments<T> {
    #[serde(default)]
    pub posterior: BTreeMap<NodeId, T>,
    #[serde(default)]
    pub warrant_conf: BTreeMap<NodeId, T>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub prior: BTreeMap<NodeId, T>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub likelihoods: BTreeMap<NodeId, Likelihoods<T>>,
}

impl<T> Default for LeafAssignments<T> {
    fn default() -> Self {
        LeafAssignments {
            posterior: BTreeMap::new(),
            warrant_conf: BTreeMap::new(),
            prior: BTreeMap::new(),
            likelihoods: BTreeMap::new(),
        }
    }
}

impl<T: Scalar> LeafAssignments<T> {
    /// The assigned value of a posterior-bearing claim or a warrant.
    pub fn get(&self, node: &NodeId) -> Option<&T> {
        self.posterior.get(node).or_else(|| self.warrant_conf.get(node))
    }

    /// Number of assigned values that propagation consumes.
    pub fn len(&self) -> usize {
        self.posterior.len() + self.warrant_conf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Replaces an existing assignment; fails if `node` is not assigned.
    pub fn set(&mut self, node: &NodeId, value: T) -> Result<(), ConfidenceError> {
        if !value.in_unit_interval() {
            return Err(ConfidenceError::OutOfRange { node: node.clone(), value: value.as_f64() });
        }
        let slot = self
            .posterior
            .get_mut(node)
            .or_else(|| self.warrant_conf.get_mut(node))
            .ok_or_else(|| ConfidenceError::UnknownOverride(node.clone()))?;
        *slot = value;
        Ok(())
    }

    /// Converts every value into another scalar type.
    pub fn convert<U: Scalar>(&self) -> Result<LeafAssignments<U>, ConfidenceError> {
        fn map<T: Scalar, U: Scalar>(m: &BTreeMap<NodeId, T>) -> Result<BTreeMap<NodeId, U>, ConfidenceError> {
            m.iter()
                .map(|(k, v)| Ok((k.clone(), convert_value(v)?)))
                .collect()
        }
        let likelihoods = self
            .likelihoods
            .iter()
            .map(|(k, l)| {
                let conv = |x: &Option<T>| x.as_ref().map(convert_value).transpose();
                Ok((
                    k.clone(),
                    Likelihoods {
                        p_e_given_c: conv(&l.p_e_given_c)?,
                        p_e_given_not_c: conv(&l.p_e_given_not_c)?,
                        p_e2_given_c_and_e1: conv(&l.p_e2_given_c_and_e1)?,
                        p_e2_given_e1: conv(&l.p_e2_given_e1)?,
                    },
                ))
            })
            .collect::<Result<_, ConfidenceError>>()?;
        Ok(LeafAssignments {
            posterior: map(&self.posterior)?,
            warrant_conf: map(&self.warrant_conf)?,
            prior: map(&self.prior)?,
            likelihoods,
        })
    }
}

fn convert_value<T: Scalar, U: Scalar>(v: &T) -> Result<U, ConfidenceError> {
    let x = v.as_f64();
    U::from_f64(x).ok_or(ConfidenceError::NotRepresentable(x))
}
