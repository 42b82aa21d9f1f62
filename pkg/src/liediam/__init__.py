"""Operator-norm geometry of compact matrix Lie groups.

Bi-invariant norms on SU(d), SO(d) and their products, the constants alpha
and beta, subspace angles under representations, quotient diameters, and a
gate-set universality tester.
"""

__version__ = "0.1.0"

from .constants import ALPHA, BETA, BetaSolution, contraction_constant, solve_beta
from .errors import BoundViolation, DomainError, NumericalError, ValidationError
from .groups import (
    AlgebraVector,
    GroupElement,
    GroupKind,
    distance,
    exp_map,
    haar_samples,
    log_map,
    make_algebra_vector,
    make_group_element,
    op_norm_algebra,
    op_norm_group,
    product,
    so,
    su,
)
from .subspaces import Subspace, angle_between, find_large_angle, schur_average
from .commutators import commutator, commutator_sequence, construct_witness_pair, witness_angle
from .quotient import SubgroupSample, coset_distance, diameter_lower_estimate, icosahedral_group
from .universality import GateSet, UniversalityConfig, generate_words, test_universality

__all__ = [name for name in dir() if not name.startswith("_")]
