"""Poisson photon-counting model: exposure policies, variances, sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidStateError
from .linalg import DensityMatrix, Ket
from .plans import ProtocolPlan, all_probabilities, promote

PER_SETTING = "per-setting-unit-time"
SPLIT_TOTAL = "split-total"
ALLOCATIONS = (PER_SETTING, SPLIT_TOTAL)


@dataclass(frozen=True)
class ShotPolicy:
    """Mean photon rate and how observation time is split across settings.

    ``per-setting-unit-time`` observes every setting for one time unit
    with mean rate n_t; ``split-total`` divides a single time unit
    equally across the plan's settings.
    """

    n_t: float
    allocation: str = PER_SETTING
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.n_t > 0:
            raise InvalidStateError(f"photon rate n_t={self.n_t!r} must be positive")
        if self.allocation not in ALLOCATIONS:
            raise InvalidStateError(f"unknown allocation {self.allocation!r}")

    def exposure(self, n_settings: int) -> float:
        """Observation time per setting."""
        return 1.0 if self.allocation == PER_SETTING else 1.0 / n_settings


def allocation_factor(allocation: str, n_settings: int) -> float:
    """Multiplier taking unit-exposure variances to the policy's variances."""
    if allocation == PER_SETTING:
        return 1.0
    if allocation == SPLIT_TOTAL:
        return float(n_settings)
    raise InvalidStateError(f"unknown allocation {allocation!r}")


def element_variance(
    plan: ProtocolPlan,
    rho: DensityMatrix | Ket,
    policy: ShotPolicy,
) -> tuple[float, float]:
    """Rate-normalized shot variances (n_t var Re, n_t var Im).

    Counts are independent Poisson per outcome, so each estimator part
    X = sum_o c_o n_o / (n_t T) has n_t Var(X) = sum_o c_o^2 p_o / T,
    summed over settings.  The result does not depend on n_t.
    """
    p = all_probabilities(plan, promote(rho))
    factor = allocation_factor(policy.allocation, plan.n_settings)
    var_re = factor * float(np.sum(plan.coeff_re ** 2 * p))
    var_im = factor * float(np.sum(plan.coeff_im ** 2 * p))
    return var_re, var_im


def predicted_stderr(plan: ProtocolPlan, rho: DensityMatrix | Ket, policy: ShotPolicy) -> tuple[float, float]:
    """Standard errors of the finite-statistics estimate at the policy's n_t."""
    var_re, var_im = element_variance(plan, rho, policy)
    return float(np.sqrt(var_re / policy.n_t)), float(np.sqrt(var_im / policy.n_t))


def simulate_shots(
    plan: ProtocolPlan,
    rho: DensityMatrix | Ket,
    policy: ShotPolicy,
    rng: np.random.Generator,
) -> complex:
    """One finite-statistics extraction from Poisson counts.

    Counts are normalized by the known exposure, which keeps the
    estimator exactly unbiased.
    """
    p = all_probabilities(plan, promote(rho))
    if p.min() < -1e-12:
        raise InvalidStateError(f"negative outcome probability {p.min():g}; cannot draw counts")
    p = np.clip(p, 0.0, None)
    exposure = policy.exposure(plan.n_settings)
    counts = rng.poisson(policy.n_t * exposure * p)
    rates = counts / (policy.n_t * exposure)
    re = float(np.sum(plan.coeff_re * rates))
    im = float(np.sum(plan.coeff_im * rates))
    return complex(re, im)
