//! Verification engine for the operator algebra: projection and
//! self-adjointness laws, semigroup membership, product/sum/difference of
//! projections, composition tables and minimality of the thresholding
//! family, the homomorphism property of plain truncation, and the
//! degeneracy of the discrete semi-norm.

mod checks;
mod operator;
mod suite;

pub use checks::{
    adjoint_residual, adjoint_residual_rel, best_approx_check, commutation_residual,
    difference_projection_check, filtered_not_idempotent_check, generalized_commutation_check,
    generalized_kernel_bound, generalized_negativity_witness, homomorphism_check,
    idempotency_residual, ideal_composition_check, lasso_not_idempotent_check,
    minimality_witness, nonnegativity_check, norm_bound_check, norm_one_check,
    pinned_polynomial, product_projection_check, projection_check, projection_residuals,
    pythagorean_check, pythagorean_residual, quadratic_form, quadratic_form_separation_check,
    semigroup_membership,
    seminorm_degeneracy_check, sum_projection_check, thresholding_not_self_adjoint_check,
    vanishing_witness, zero_operator_check, HomomorphismCase, Tolerances,
};
pub use operator::{
    apply_lenient, compose_ops, CoeffProjectionOp, ComposedOp, DiffOp, HyperOperator, SumOp,
};
pub use suite::{all_pass, run_suite, SuiteConfig};
