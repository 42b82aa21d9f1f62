"""The universal constants alpha, beta and the commutator contraction factor C."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, NumericalError

ALPHA = math.acos(7 / 8)
SCAN_STEP = 1e-3


@dataclass(frozen=True)
class BetaSolution:
    alpha: float
    beta: float
    residual: float
    solver_tolerance: float


def beta_equation_residual(beta_candidate: float) -> float:
    """cos^2(a - b) + sin^2(a - b) sin(b) - cos(4 b) at b = beta_candidate."""
    b = beta_candidate
    if not 0 <= b < math.pi / 4:
        raise DomainError(f"candidate must lie in [0, pi/4), got {b}")
    return math.cos(ALPHA - b) ** 2 + math.sin(ALPHA - b) ** 2 * math.sin(b) - math.cos(4 * b)


def beta_equation_residual_cos_form(beta_candidate: float) -> float:
    """Same residual written with cos(pi/2 - b) in place of sin(b)."""
    b = beta_candidate
    return (
        math.cos(ALPHA - b) ** 2
        + math.sin(ALPHA - b) ** 2 * math.cos(math.pi / 2 - b)
        - math.cos(4 * b)
    )


def _bisect(f, lo: float, hi: float, tol: float) -> float:
    # stop once the bracket is narrower than tol and the residual is below tol
    flo = f(lo)
    while True:
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if (hi - lo <= tol and abs(fmid) <= tol) or mid in (lo, hi):
            return mid
        if (fmid < 0) == (flo < 0):
            lo, flo = mid, fmid
        else:
            hi = mid


def solve_beta(tolerance: float = 1e-12) -> BetaSolution:
    """Smallest positive root of the beta equation on (0, alpha).

    A sign scan with step 1e-3 brackets the root, then bisection narrows the
    bracket to ``tolerance``.
    """
    if not 0 < tolerance < 1e-6:
        raise DomainError("tolerance must lie in (0, 1e-6)")
    n = int(ALPHA / SCAN_STEP)
    lo, flo = 0.0, beta_equation_residual(0.0)
    for i in range(1, n + 1):
        hi = i * SCAN_STEP
        fhi = beta_equation_residual(hi)
        if fhi == 0:
            return BetaSolution(ALPHA, hi, 0.0, tolerance)
        if (fhi < 0) != (flo < 0):
            beta = _bisect(beta_equation_residual, lo, hi, tolerance)
            return BetaSolution(ALPHA, beta, abs(beta_equation_residual(beta)), tolerance)
        lo, flo = hi, fhi
    raise NumericalError("no sign change of the beta equation on (0, alpha)")


def contraction_constant(kappa: float) -> float:
    """C = 2 sqrt(2 - 2 cos kappa); C < 1 exactly when kappa < alpha."""
    if not 0 <= kappa <= math.pi:
        raise DomainError(f"kappa must lie in [0, pi], got {kappa}")
    return 2 * math.sqrt(max(2 - 2 * math.cos(kappa), 0.0))


BETA = solve_beta(1e-14).beta
