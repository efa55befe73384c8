//! Shared verdict and evidence types produced by the exact one-dimensional
//! analysis and by the sampling-based estimator.

use serde::{Deserialize, Serialize};

/// Outcome of a boundedness decision for the root real parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// sup over xi of the spectral abscissa is finite.
    Bounded,
    /// Root real parts grow without bound (or some slice vanishes identically).
    Unbounded,
    /// The analysis could not decide within its depth or budget.
    Undetermined,
}

/// Which analysis produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictMethod {
    Exact1d,
    Numeric,
}

/// Extended-real value of the spectral bound. JSON cannot carry IEEE
/// infinities, so the two infinite cases are explicit variants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OmegaBound {
    Finite { value: f64 },
    MinusInfinity,
    PlusInfinity,
}

impl OmegaBound {
    /// Collapses onto the extended real line.
    pub fn as_f64(&self) -> f64 {
        match self {
            OmegaBound::Finite { value } => *value,
            OmegaBound::MinusInfinity => f64::NEG_INFINITY,
            OmegaBound::PlusInfinity => f64::INFINITY,
        }
    }

    /// Builds the appropriate variant from an extended-real number.
    pub fn from_f64(v: f64) -> Self {
        if v == f64::INFINITY {
            OmegaBound::PlusInfinity
        } else if v == f64::NEG_INFINITY {
            OmegaBound::MinusInfinity
        } else {
            OmegaBound::Finite { value: v }
        }
    }
}

/// One supporting record attached to a verdict. Everything needed to recheck
/// the decision independently is stored here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    /// Summary of one expanded root branch and its classification.
    BranchSummary {
        /// "+inf" or "-inf".
        direction: String,
        /// Exponents as exact rationals rendered "p/q".
        exponents: Vec<String>,
        /// Principal-sheet leading coefficient (re, im), if any term exists.
        leading_coeff: Option<(f64, f64)>,
        ramification: u32,
        multiplicity: u32,
        exact: bool,
        /// "bounded_above", "unbounded_above" or "needs_deeper".
        class: String,
        /// Witness sheet index when the branch is unbounded above.
        sheet: Option<u32>,
        /// Finite limit contribution when the branch is bounded above and the
        /// limit is not -infinity.
        limit: Option<f64>,
    },
    /// Best abscissa value found over the compact frequency region.
    FiniteSup {
        xi: Vec<f64>,
        value: f64,
        lambda_re: f64,
        lambda_im: f64,
    },
    /// A frequency at which the frozen slice vanishes identically.
    ZeroSlice { xi: Vec<f64> },
    /// Every slice is a nonzero constant; the symbol has no roots at all.
    NoRootsAnywhere,
    /// Work accounting for the sampling estimator.
    SamplerStats {
        root_evaluations: u64,
        seeds: u32,
        refinements: u32,
    },
    /// Fitted growth model of the constrained-supremum curve.
    GrowthModel {
        model: String,
        parameters: Vec<f64>,
        residual_rms: f64,
    },
    /// Abscissa witness produced by the sampling estimator.
    AbscissaWitness {
        xi: Vec<f64>,
        value: f64,
        lambda_re: f64,
        lambda_im: f64,
    },
}

/// Decision about boundedness of the root real parts, with evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PetrovskiiVerdict {
    pub classification: Classification,
    /// Present iff the classification is decided (bounded, or unbounded with
    /// a certificate).
    pub omega0: Option<OmegaBound>,
    pub method: VerdictMethod,
    pub evidence: Vec<Evidence>,
}

impl PetrovskiiVerdict {
    /// The spectral bound as an extended real; NaN when undetermined.
    pub fn omega0_f64(&self) -> f64 {
        self.omega0.map(|o| o.as_f64()).unwrap_or(f64::NAN)
    }
}
