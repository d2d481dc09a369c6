"""Dedekind-zeta Dirichlet data for Q and quadratic fields.

Field invariants and Kronecker characters, ideal-count coefficients and their
Dirichlet inverses, inverse-Mellin kernel transforms (with the modified Bessel
function K0), critical-line zero scans of both zeta factors, assembly of the
alpha <-> beta kernel identity over the zeros, and Riesz-type decay scans tied
to a Mellin-transform cross-identity.
"""

from .coefficients import (CoefficientTable, b_via_prime_ideals, build_table,
                           dirichlet_inverse, ideal_counts, partial_sums)
from .fields import (FieldDescriptor, FieldInvariants, class_number_data,
                     field_to_json, kronecker_chi, make_field)
from .kernels import (KernelSpec, ResidueConstants, bessel_k0,
                      kernel_function, log_gamma_complex, residue_at_zero,
                      residue_calibrate, z_asymptotic_check, z_closed_form,
                      z_line_integral, z_tilde_closed_form)
from .lfunctions import (ExpansionData, ZeroList, argument_principle_count,
                         completed_lambda, dedekind_eval, expansion_data,
                         find_zeros, hurwitz_zeta, l_eval, zeta_K_prime_at,
                         zeta_eval)
from .modular import (RelationReport, lhs_sum, residue_term_s0,
                      residue_term_s1, verify_relation, zero_sum)
from .riesz import (RieszScan, decay_fit, m_k_decay_probe, main_term,
                    mellin_identity_check, p_eval, riesz_scan)

__version__ = "0.1.0"

__all__ = [
    "CoefficientTable", "ExpansionData", "FieldDescriptor", "FieldInvariants",
    "KernelSpec", "RelationReport", "ResidueConstants", "RieszScan", "ZeroList",
    "argument_principle_count", "b_via_prime_ideals", "bessel_k0",
    "build_table", "class_number_data", "completed_lambda", "decay_fit",
    "dedekind_eval", "dirichlet_inverse", "expansion_data", "field_to_json",
    "find_zeros", "hurwitz_zeta", "ideal_counts", "kernel_function",
    "kronecker_chi", "l_eval", "lhs_sum", "log_gamma_complex",
    "m_k_decay_probe", "main_term", "make_field", "mellin_identity_check",
    "p_eval", "partial_sums", "residue_at_zero", "residue_calibrate",
    "residue_term_s0", "residue_term_s1", "riesz_scan", "verify_relation",
    "z_asymptotic_check", "z_closed_form", "z_line_integral",
    "z_tilde_closed_form", "zero_sum", "zeta_K_prime_at", "zeta_eval",
]
