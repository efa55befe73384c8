//! Well-posedness analysis and causal fundamental solutions for
//! constant-coefficient evolution operators P(d0, ..., dn).
//!
//! The crate decides whether the spectral bound
//! omega0 = sup { Re lambda : P(lambda, i xi) = 0, xi real } is finite,
//! computes it, and constructs the fundamental solution supported in
//! x0 >= 0 by inverting the symbol on a shifted line Re lambda = sigma > omega0.

pub mod asymptotics;
pub mod error;
pub mod fundsol;
pub mod numeric;
pub mod roots;
pub mod testfn;
pub mod symbol;
pub mod verdict;

pub use asymptotics::{
    classify_branch, exact_verdict_with_depth, newton_polygon, petrovskii_verdict_exact_1d,
    puiseux_branches, BranchClass, Direction, PolygonEdge, PuiseuxBranch, DEFAULT_DEPTH,
    DEPTH_CAP,
};
pub use error::{
    AsymptoticsError, GridError, NumericError, PairingError, ParseError, RootError, SymbolError,
};
pub use fundsol::{
    build_fundamental_solution, convolution_solve, convolution_solve_with_residual, decay_profile,
    min_modulus_scan, pair_with_expansion, pair_with_test, read_gfield, symbol_inverse_on_line,
    verify_decay, verify_delta_property, verify_sigma_independence, verify_support, write_gfield,
    FieldRole, GridField, GridSpec, PairingResult, QuadratureConfig, Window, MIN_MODULUS_REL,
};
pub use numeric::{
    check_log_region, estimate_omega0, fit_growth, sigma_curve, sigma_of_r, GrowthFit,
    GrowthModelKind, LogRegion, LogViolation, RootWitness, SamplerBudget, SigmaCurve,
    SigmaSample, DEFAULT_BUDGET,
};
pub use roots::{spectral_abscissa, AbscissaValue, RootSet};
pub use symbol::{parse_operator, LambdaPolynomial, OperatorSymbol, Term};
pub use testfn::{apply_operator, HermiteExpansion, TestFunction};
pub use verdict::{Classification, Evidence, OmegaBound, PetrovskiiVerdict, VerdictMethod};
