//! Coherence vectors and the statistics that summarize them.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::bayes_maps::{ComplexMap2, SensitivityPair};
use crate::rtp::Matrix2;
use crate::{Error, Result};

/// Record probability times conditional coherence, split by the current
/// noise value. At `kappa = 0` it is the (unnormalized) Bayesian posterior.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherenceVector {
    pub plus: C64,
    pub minus: C64,
}

impl CoherenceVector {
    pub fn new(plus: C64, minus: C64) -> Self {
        Self { plus, minus }
    }

    pub fn from_probabilities(p: [f64; 2]) -> Self {
        Self::new(C64::new(p[0], 0.0), C64::new(p[1], 0.0))
    }

    pub fn as_array(&self) -> [C64; 2] {
        [self.plus, self.minus]
    }

    pub fn from_array(v: [C64; 2]) -> Self {
        Self::new(v[0], v[1])
    }

    /// `|plus| + |minus|`.
    pub fn one_norm(&self) -> f64 {
        self.plus.norm() + self.minus.norm()
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self::new(self.plus * c, self.minus * c)
    }

    /// Sign of `|plus| - |minus|`, with ties going to `+1`.
    pub fn sign(&self) -> f64 {
        if self.plus.norm() >= self.minus.norm() {
            1.0
        } else {
            -1.0
        }
    }

    /// Swaps and conjugates the components; the mirror image under `z -> -z`.
    pub fn reflected(&self) -> Self {
        Self::new(self.minus.conj(), self.plus.conj())
    }
}

/// `alpha`, `zeta`, `varphi`, `r` and `s = sign(zeta)` of a coherence vector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SufficientStats {
    pub alpha: f64,
    pub zeta: f64,
    pub varphi: f64,
    pub r: f64,
    pub s: f64,
}

/// `A' = F A`. A vanishing result means the record branch is impossible.
pub fn update_coherence(a: &CoherenceVector, f: &ComplexMap2) -> Result<CoherenceVector> {
    let out = CoherenceVector::from_array(f.apply(a.as_array()));
    if out.plus == C64::new(0.0, 0.0) && out.minus == C64::new(0.0, 0.0) {
        return Err(Error::DegenerateRecord);
    }
    Ok(out)
}

/// Record probability times the conditional complex coherence, `I^T A`.
pub fn complex_coherence(a: &CoherenceVector) -> C64 {
    a.plus + a.minus
}

pub fn zeta(a: &CoherenceVector) -> f64 {
    let (p, m) = (a.plus.norm(), a.minus.norm());
    (p - m) / (p + m)
}

/// Scaled phase difference between the two noise hypotheses. The phase is
/// taken in `(-pi, pi]`; physical records keep it well inside `pi / 2`.
pub fn alpha(a: &CoherenceVector, sens: &SensitivityPair) -> Result<f64> {
    if sens.kappa == 0.0 {
        return Err(Error::AlphaUndefined("kappa is zero"));
    }
    if a.plus == C64::new(0.0, 0.0) || a.minus == C64::new(0.0, 0.0) {
        return Err(Error::AlphaUndefined("a component is zero"));
    }
    Ok(sens.k_big / sens.kappa * (a.plus / a.minus).arg())
}

pub fn stats(a: &CoherenceVector, sens: &SensitivityPair) -> Result<SufficientStats> {
    Ok(SufficientStats {
        alpha: alpha(a, sens)?,
        zeta: zeta(a),
        varphi: complex_coherence(a).arg(),
        r: a.one_norm(),
        s: a.sign(),
    })
}

/// Real matrix applied to a probability-like vector.
pub fn apply_real(m: &Matrix2, p: [f64; 2]) -> [f64; 2] {
    [m[0][0] * p[0] + m[0][1] * p[1], m[1][0] * p[0] + m[1][1] * p[1]]
}

/// A coherence vector kept at unit one-norm, with the discarded scale
/// accumulated as a logarithm so long records cannot underflow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackedVector {
    pub vector: CoherenceVector,
    pub log_r: f64,
}

impl TrackedVector {
    pub fn new(a: CoherenceVector) -> Result<Self> {
        let r = a.one_norm();
        if r == 0.0 {
            return Err(Error::DegenerateRecord);
        }
        Ok(Self { vector: a.scaled(C64::new(1.0 / r, 0.0)), log_r: r.ln() })
    }

    pub fn update(&self, f: &ComplexMap2) -> Result<Self> {
        let next = update_coherence(&self.vector, f)?;
        let r = next.one_norm();
        Ok(Self { vector: next.scaled(C64::new(1.0 / r, 0.0)), log_r: self.log_r + r.ln() })
    }

    /// `|I^T A|` of the unnormalized vector.
    pub fn coherence_modulus(&self) -> f64 {
        complex_coherence(&self.vector).norm() * self.log_r.exp()
    }
}

/// A probability vector kept summing to one, with its total tracked as a
/// logarithm; the total is the record probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackedProbability {
    pub p: [f64; 2],
    pub log_total: f64,
}

impl TrackedProbability {
    pub fn new(p: [f64; 2]) -> Self {
        let total = p[0] + p[1];
        Self { p: [p[0] / total, p[1] / total], log_total: total.ln() }
    }

    /// Applies `m`; returns `None` when the branch has zero probability.
    pub fn update(&self, m: &Matrix2) -> Option<Self> {
        let next = apply_real(m, self.p);
        let total = next[0] + next[1];
        if !(total > 0.0) {
            return None;
        }
        Some(Self { p: [next[0] / total, next[1] / total], log_total: self.log_total + total.ln() })
    }

    pub fn probability(&self) -> f64 {
        self.log_total.exp()
    }
}
