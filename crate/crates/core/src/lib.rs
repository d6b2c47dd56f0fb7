//! Selective and efficient quantum process tomography in arbitrary finite
//! dimension.
//!
//! Individual χ-matrix coefficients of a channel are estimated from
//! survival statistics of states drawn from a 2-design: the complete set
//! of mutually unbiased bases when the dimension is a prime power, a
//! tensor product of such sets over the prime-power factors, or a
//! weighted projection of a larger prime-power MUB set.

pub mod channel;
pub mod design;
pub mod dimension;
pub mod error;
pub mod estimator;
pub mod field;
pub mod linalg;
pub mod oracle;

pub use channel::{
    kraus_to_chi, weyl_basis, ChannelFile, ChiFile, ChiMatrix, KrausChannel, OperatorBasis, ProductOperatorBasis,
    StandardChannel,
};
pub use design::{
    build_mub, mub_to_design, projected_design, tensor_design, verify_design, DesignFile, MubSet, Scheme,
    SurvivalTag, WeightedDesign,
};
pub use dimension::{omega, prime_power, smallest_prime_power_above, DimensionFactorization};
pub use error::{Error, Result};
pub use estimator::{
    coefficient_c, combine_counts, estimate_chi_element, plan_shots, sample_input, simulate_shot, CountTable,
    EstimateOptions, EstimateResult, EstimatorScheme, Mode, Part, Protocol, ShotBound, ShotOutcome,
};
pub use field::{find_irreducible, FieldElement, FieldSpec};
pub use linalg::{CMatrix, CVector};
pub use num_complex::Complex64;
pub use oracle::{
    check_identity, exact_chi, exact_mean_fidelity, exact_reduced_fidelity, haar_quadratic_average, IdentityName,
    IdentityReport,
};
