"""Canonical forms of linear control systems under feedback similarity."""
from .errors import (BudgetError, FeedcanonError, FieldError, FormatError, InvariantViolation,
                     PreconditionError, ShapeError, SingularMatrixError)
from .exactmat import (EXACT, FLOAT, GaussRat, Matrix, block_diag, direct_sum, exact_rank,
                       frobenius_norm, make_F, make_G, make_jordan, mat, nullspace_basis,
                       numeric_rank)
from .orbit import OrbitReport, orbit_dimension, pair_orbit_dimension, tangent_jacobian
from .pairs import (BrunovskyInvariants, MatrixPair, PairWitness, alpha_beta,
                    apply_pair_feedback, brunovsky_assemble, brunovsky_decompose,
                    canonical_pair_F, canonical_pair_H, endomorphism_from_params, make_H_block,
                    make_R_gamma, pair_stabilizer_dimension, pairs_feedback_similar)
from .reduction import (PerturbationBudget, ReductionTrace, budget_allowance, collapse_trace,
                        reduce_alpha_n, reduce_pair_generic, reduce_to_rigid,
                        reduce_triple_to_K)
from .triples import (FeedbackWitness, MatrixTriple, K_similar, apply_feedback, lift_L,
                      lift_L_iterated, make_K, poly_matrix, random_triple, rigid_canonical,
                      rigid_exists, strict_equiv_check, triple_norm, verify_witness,
                      witness_from_strict)

__version__ = "0.1.0"
