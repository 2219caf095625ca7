//! Exact polynomial vector fields, density certificates and shear-automorphism
//! flows on affine space.

pub mod scalar;
pub mod poly;
pub mod linalg;
pub mod field;
pub mod sample;
pub mod density;
pub mod subvariety;
pub mod dynamics;

pub use num_complex::Complex64;
pub use poly::{binomial, parse, Exponent, ExactPoly, MonomialBasis, ParseError, Poly, PolyError};
pub use scalar::{GaussRat, Regime, Scalar};
pub use field::{
    flow_nilpotent, flow_semisimple, kernel_basis, nilpotency_report, parse_field, pushforward, ExactField,
    ExactMap, FieldError, NilpotencyReport, NilpotencyVerdict, PolyMap, VectorField,
};
pub use density::{
    check_compatibility, lie_closure, monomial_fields, shear_family, sl_demo, verify_compat_identity,
    verify_shear_identity, CompatibilityVerdict, ConditionI, ConditionII, DensityError, IdentityCheck,
    LieClosureCertificate, ReplayError, SlDemoReport,
};
pub use subvariety::{
    codim2_module_certificate, eliminate_direction, verify_codim2_identity, verify_local_identities, Codim2Certificate,
    SubvarietyError, SubvarietyInput,
};
pub use dynamics::{
    basin_sample, commutator_step, decompose_field, designated_map, trotter_compose, AutoSeq, BasinParams,
    CompletePrimitive, ConvergenceReport, DynamicsError, Elementary, GridSpec, PointClass, StepOptions, Time,
    TimeDependentField,
};
