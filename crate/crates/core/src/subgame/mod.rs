//! Safe re-solving of subgames: ranges, opponent models, resolve gadgets.

pub mod hunl;
pub mod leduc;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;

/// Probability weights over a player's private hands.
#[derive(Clone, Debug, PartialEq)]
pub struct Range {
    pub weights: Vec<f64>,
}

impl Range {
    pub fn uniform(n: usize) -> Range {
        Range { weights: vec![1.0 / n as f64; n] }
    }

    pub fn from_weights(weights: Vec<f64>) -> Result<Range, Error> {
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidSpec("range weights must be finite and non-negative"));
        }
        let mut r = Range { weights };
        r.normalize()?;
        Ok(r)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn normalize(&mut self) -> Result<(), Error> {
        let t = self.total();
        if !(t > 0.0) {
            return Err(Error::ZeroPosterior);
        }
        self.weights.iter_mut().for_each(|w| *w /= t);
        Ok(())
    }

    /// Zeroes hands for which `blocked` holds, then renormalizes.
    pub fn block(&mut self, blocked: impl Fn(usize) -> bool) -> Result<(), Error> {
        for (h, w) in self.weights.iter_mut().enumerate() {
            if blocked(h) {
                *w = 0.0;
            }
        }
        self.normalize()
    }

    /// Uniform over hands not excluded by `blocked`.
    pub fn uniform_support(n: usize, blocked: impl Fn(usize) -> bool) -> Result<Range, Error> {
        Range::from_weights((0..n).map(|h| if blocked(h) { 0.0 } else { 1.0 }).collect())
    }

    /// Convex combination of ranges over the same hands.
    pub fn mix(parts: &[(f64, &Range)]) -> Result<Range, Error> {
        let n = parts.first().ok_or(Error::EmptyVector)?.1.len();
        let mut w = vec![0.0; n];
        for (p, r) in parts {
            for (x, y) in w.iter_mut().zip(&r.weights) {
                *x += p * y;
            }
        }
        Range::from_weights(w)
    }
}

/// Bayes update: posterior ∝ prior × P(observed action | hand).
pub fn update_range(prior: &Range, action_prob: &[f64]) -> Result<Range, Error> {
    if action_prob.len() != prior.len() {
        return Err(Error::InvalidSpec("action probabilities do not cover the range"));
    }
    let w = prior.weights.iter().zip(action_prob).map(|(a, b)| a * b).collect();
    Range::from_weights(w)
}

/// [`update_range`] falling back to uniform over the prior's support when
/// the observed action had probability zero. The flag reports the fallback.
pub fn update_range_or_uniform(prior: &Range, action_prob: &[f64]) -> Result<(Range, bool), Error> {
    match update_range(prior, action_prob) {
        Ok(r) => Ok((r, false)),
        Err(Error::ZeroPosterior) => Ok((Range::uniform_support(prior.len(), |h| prior.weights[h] == 0.0)?, true)),
        Err(e) => Err(e),
    }
}

/// Chance weights for entering a safe gadget: the range mixed half and half
/// with uniform over its support, so margins of rare hands still converge.
pub fn entry_weights(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    let support = weights.iter().filter(|&&w| w > 0.0).count();
    if total <= 0.0 {
        return weights.to_vec();
    }
    weights.iter().map(|&w| if w > 0.0 { 0.5 * w / total + 0.5 / support as f64 } else { 0.0 }).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RangeTransform {
    Identity,
    /// Weights squared, renormalized.
    Sharpen,
    /// Uniform over the support.
    Flatten,
}

impl RangeTransform {
    pub fn apply(self, r: &Range) -> Result<Range, Error> {
        let w = match self {
            RangeTransform::Identity => r.weights.clone(),
            RangeTransform::Sharpen => r.weights.iter().map(|w| w * w).collect(),
            RangeTransform::Flatten => r.weights.iter().map(|&w| if w > 0.0 { 1.0 } else { 0.0 }).collect(),
        };
        Range::from_weights(w)
    }
}

/// Coarse action classes used to bias continuation policies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ActionClass {
    Fold,
    Call,
    Raise,
}

/// Opponent play beyond a depth-limit leaf.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Continuation {
    Blueprint,
    Biased(ActionClass),
}

pub const CONTINUATION_SHIFT: f64 = 0.25;

impl Continuation {
    /// Adjusts a blueprint distribution whose actions have the given classes.
    pub fn apply(self, probs: &[f64], classes: &[ActionClass]) -> Vec<f64> {
        let Continuation::Biased(c) = self else { return probs.to_vec() };
        let hits = classes.iter().filter(|&&k| k == c).count();
        if hits == 0 {
            return probs.to_vec();
        }
        probs
            .iter()
            .zip(classes)
            .map(|(&p, &k)| (1.0 - CONTINUATION_SHIFT) * p + if k == c { CONTINUATION_SHIFT / hits as f64 } else { 0.0 })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OpponentModel {
    pub label: String,
    pub transform: RangeTransform,
    pub continuation: Continuation,
}

impl OpponentModel {
    pub fn new(label: &str, transform: RangeTransform, continuation: Continuation) -> OpponentModel {
        OpponentModel { label: label.into(), transform, continuation }
    }

    pub fn identity() -> OpponentModel {
        OpponentModel::new("blueprint", RangeTransform::Identity, Continuation::Blueprint)
    }

    /// Default diverse set: three range shapes and four continuation styles.
    pub fn default_set() -> Vec<OpponentModel> {
        vec![
            OpponentModel::identity(),
            OpponentModel::new("sharp", RangeTransform::Sharpen, Continuation::Biased(ActionClass::Fold)),
            OpponentModel::new("flat", RangeTransform::Flatten, Continuation::Biased(ActionClass::Call)),
            OpponentModel::new("aggressive", RangeTransform::Identity, Continuation::Biased(ActionClass::Raise)),
        ]
    }
}

/// Distinct range transforms and continuations of a model set, in first-seen order.
pub fn model_choices(models: &[OpponentModel]) -> Result<(Vec<RangeTransform>, Vec<Continuation>), Error> {
    if models.is_empty() {
        return Err(Error::EmptyModelSet);
    }
    let mut ts = Vec::new();
    let mut cs = Vec::new();
    for m in models {
        if !ts.contains(&m.transform) {
            ts.push(m.transform);
        }
        if !cs.contains(&m.continuation) {
            cs.push(m.continuation);
        }
    }
    Ok((ts, cs))
}

/// One row of a re-solve audit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuditRow {
    pub hand: usize,
    pub weight: f64,
    pub alt: f64,
    pub achieved: f64,
    pub margin: f64,
}
