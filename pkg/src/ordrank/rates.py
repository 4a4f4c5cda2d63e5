"""Exponential decay rates of misranking events.

For a positively-oriented pair, the probability that a counting metric ranks
it wrongly decays like exp(-L * I) in the round count L, where I is the
Cramer rate at zero, i.e. the supremum over lam of -log E[exp(lam * sum)].
For binarized data the rate has the closed form log cosh(phi(gamma)); for
raw ordinal data it requires a one-dimensional convex minimization of the
log-MGF, and is strictly smaller whenever the magnitude law is
non-degenerate, which is what makes binarization win at large L.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .model import OrdinalModel, PatternDistribution
from .ranking import PreferenceVector

__all__ = [
    "RateResult",
    "rate_at_zero_binary",
    "rate_at_zero_ordinal",
    "rate_at_zero_nitem",
    "error_decay_prediction",
    "crossover_rounds",
]

_SIGN_PATTERN = PatternDistribution((1.0,))


@dataclass(frozen=True)
class RateResult:
    rate: float
    argmin_lambda: float
    iterations: int
    converged: bool
    boundary: bool = False  # gamma == 0: the event has probability ~1/2

    def to_dict(self) -> dict:
        return {
            "rate": self.rate,
            "argmin_lambda": self.argmin_lambda,
            "iterations": self.iterations,
            "converged": self.converged,
            "boundary": self.boundary,
        }


def _expand_bracket(f, lo: float, hi: float, max_expansions: int = 60):
    """Grow [lo, hi] until the convex objective slopes down at lo and up at
    hi, so the minimizer is interior."""
    h = 1e-6
    for _ in range(max_expansions):
        width = hi - lo
        if f(lo + h) - f(lo) >= 0:
            lo -= width
        elif f(hi) - f(hi - h) <= 0:
            hi += width
        else:
            return lo, hi, True
    return lo, hi, False


def _minimize_convex(f) -> tuple[float, float, int, bool]:
    """Bracketed golden-section/parabolic minimization of a convex scalar
    function; returns (argmin, minimum, iterations, converged)."""
    lo, hi, bracketed = _expand_bracket(f, *_initial_bracket(f))
    res = minimize_scalar(f, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-10, "maxiter": 200})
    iterations = int(getattr(res, "nit", res.nfev))
    return float(res.x), float(res.fun), iterations, bool(res.success and bracketed)


def _initial_bracket(f):
    # attribute set by callers that know the natural lambda scale
    span = getattr(f, "bracket_halfwidth", 5.0)
    return -span, span


def rate_at_zero_binary(model: OrdinalModel, gamma: float) -> RateResult:
    """Closed-form rate log cosh(phi(gamma)) for the binarized metric; the
    log-MGF minimum sits at lambda = -phi(gamma)."""
    phi = model.link(gamma)
    if gamma == 0:
        return RateResult(0.0, 0.0, 0, True, boundary=True)
    rate = float(np.logaddexp(phi, -phi) - math.log(2.0))
    return RateResult(rate, -phi, 0, True)


def rate_at_zero_ordinal(model: OrdinalModel, gamma: float) -> RateResult:
    """Rate for the raw ordinal metric: -inf over lambda of the log-MGF.

    Strictly between 0 and the binarized rate when the magnitude law has two
    or more support points.
    """
    if gamma == 0:
        return RateResult(0.0, 0.0, 0, True, boundary=True)
    phi = model.link(gamma)

    def objective(lam: float) -> float:
        return model.log_mgf(gamma, lam)

    objective.bracket_halfwidth = abs(phi) + 5.0
    lam, fmin, iters, ok = _minimize_convex(objective)
    return RateResult(-fmin, lam, iters, ok)


def rate_at_zero_nitem(model: OrdinalModel, theta: PreferenceVector,
                       i: int, j: int, binarized: bool) -> RateResult:
    """Rate of the event that item j out-scores item i in the n-item counting
    algorithm, for theta_i > theta_j (i and j are swapped otherwise).

    The score-difference summand is 2*y_ij plus the indirect terms
    y_ik + y_kj over all other items k; by independence its log-MGF is the
    sum of the per-comparison log-MGFs with the direct term taken at
    2*lambda.
    """
    if i == j:
        raise ValueError("need two distinct items")
    th = theta.theta
    if th[i] == th[j]:
        raise ValueError("tied preferences have no misranking rate")
    if th[i] < th[j]:
        i, j = j, i
    mdl = OrdinalModel(model.link, _SIGN_PATTERN) if binarized else model
    gamma_ij = th[i] - th[j]
    others = [k for k in range(theta.n) if k not in (i, j)]
    gammas_ik = np.array([th[i] - th[k] for k in others])
    gammas_kj = np.array([th[k] - th[j] for k in others])

    def objective(lam: float) -> float:
        total = mdl.log_mgf(gamma_ij, 2.0 * lam)
        for g_ik, g_kj in zip(gammas_ik, gammas_kj):
            total += mdl.log_mgf(g_ik, lam) + mdl.log_mgf(g_kj, lam)
        return total

    phis = np.abs(mdl.link(np.concatenate([[gamma_ij], gammas_ik, gammas_kj])))
    objective.bracket_halfwidth = float(np.max(phis)) + 5.0
    lam, fmin, iters, ok = _minimize_convex(objective)
    return RateResult(-fmin, lam, iters, ok)


def error_decay_prediction(rate: RateResult, L: int) -> float:
    """Leading-order misranking probability scale exp(-L * rate)."""
    if not rate.converged:
        raise ValueError("rate did not converge; no decay prediction")
    if L < 0:
        raise ValueError("L must be >= 0")
    return math.exp(-L * rate.rate)


def crossover_rounds(binary: RateResult, ordinal: RateResult,
                     factor: float = 10.0) -> int | None:
    """Heuristic smallest L at which the binarized error scale undercuts the
    ordinal one by ``factor``, from leading-order decay only.  None when the
    rates do not separate in the right direction."""
    if factor <= 1.0:
        raise ValueError("factor must exceed 1")
    gap = binary.rate - ordinal.rate
    if gap <= 0:
        return None
    return max(1, math.ceil(math.log(factor) / gap))
