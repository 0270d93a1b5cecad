//! Cardinal B-spline integrals in exact arithmetic and the Toeplitz±Hankel
//! structure of Galerkin matrices on optimal spline spaces.

pub mod assembly;
pub mod error;
pub mod exact;
pub mod io;
pub mod quadrature;
pub mod spectrum;
pub mod symbols;
pub mod tau;

pub use assembly::{
    assemble_closed_form, assemble_exact, assemble_quadrature, basis_eval, extraction_matrix, opt_breakpoints, Basis,
    BoundaryKind, ExtractionMatrix, ShiftScale, SpaceSpec,
};
pub use error::{Error, Result};
pub use exact::{alpha_coeffs, cardinal_eval, cardinal_eval_f64, cardinal_inner, Rational, SymbolCoeffs};
pub use spectrum::{
    exact_continuous_eigs, laplace_eigs_1d, outlier_report, tensor_eigs, tensor_residual_check, LaplaceEigs,
    OutlierReport, TensorEigs, TensorSpec,
};
pub use symbols::{error_bound_rhs, ratio_symbol, symbol_eval, RatioSymbol, SymbolFn};
pub use tau::{EigenSystem, HankelVariant, StructuredMatrix, TauAlgebra};
