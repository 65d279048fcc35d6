"""Cross-module invariant suite behind the ``validate`` command.

Each group re-checks one family of contracts at reduced sample counts.
An optional fault hook (test instrumentation) can transform plans
before checking, to confirm the suite actually catches corruption.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .elements import ElementIndex, all_offdiagonal_elements
from .plans import ProtocolPlan, functional_matrix
from .precision import SystemSpec, per_state_values
from .res import extract_element, plan_res
from .sampling import random_mixed_state, stream
from .seq import extract_element_seq, plan_seq
from .shots import ShotPolicy, element_variance, simulate_shots

FAULT_HOOK = Callable[[ProtocolPlan], ProtocolPlan]


@dataclass
class GroupResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _configs():
    for d in (2, 3, 4):
        for e in all_offdiagonal_elements((d,)):
            yield e
    for e in all_offdiagonal_elements((2, 2)):
        yield e


def check_exactness(fault: FAULT_HOOK | None = None) -> tuple[bool, str]:
    rng_seed = 7
    worst = 0.0
    for e in _configs():
        rho = random_mixed_state(e.dims, stream(rng_seed, f"validate/{e.label()}"))
        for g in (0.1, math.pi / 4, 1.2):
            plan = plan_res(e, g)
            if fault is not None:
                plan = fault(plan)
            got = extract_element(rho, plan)
            want = rho.entry(e.s_flat, e.s_prime_flat)
            worst = max(worst, abs(got - want))
    return worst <= 1e-10, f"max extraction error {worst:.3e} (bound 1e-10)"


def check_conjugate_pairs(fault: FAULT_HOOK | None = None) -> tuple[bool, str]:
    worst = 0.0
    for e in _configs():
        rho = random_mixed_state(e.dims, stream(3, f"validate-conj/{e.label()}"))
        fwd = extract_element(rho, plan_res(e, 0.6))
        rev = extract_element(rho, plan_res(e.conjugate(), 0.6))
        worst = max(worst, abs(fwd - np.conj(rev)))
    return worst <= 1e-10, f"max conjugate-pair mismatch {worst:.3e} (bound 1e-10)"


def check_unbiasedness(fault: FAULT_HOOK | None = None) -> tuple[bool, str]:
    worst = 0.0
    for e in _configs():
        for builder in (plan_res, plan_seq):
            plan = builder(e, 0.4)
            if fault is not None:
                plan = fault(plan)
            k = functional_matrix(plan)
            target = np.zeros_like(k)
            target[e.s_flat, e.s_prime_flat] = 1.0
            worst = max(worst, float(np.max(np.abs(k - target))))
    return worst <= 1e-8, f"max coefficient-functional deviation {worst:.3e} (bound 1e-8)"


def check_counts(fault: FAULT_HOOK | None = None) -> tuple[bool, str]:
    for e in _configs():
        l = e.n_couplings
        pr = plan_res(e, 0.5)
        if not (pr.n_meters == l and pr.n_settings == 2 ** l
                and pr.outcomes_per_setting == e.dim * 2 ** l):
            return False, f"res counts wrong for {e.label()}"
        ps = plan_seq(e, 0.5)
        if not (ps.n_meters == 2 * l and ps.n_settings == 2 ** (2 * l)
                and ps.outcomes_per_setting == e.dim * 2 ** (2 * l)):
            return False, f"seq counts wrong for {e.label()}"
    return True, "coupling/setting/outcome counts match 2^l and d^N 2^l"


def check_seq_unbiasedness(fault: FAULT_HOOK | None = None) -> tuple[bool, str]:
    worst = 0.0
    for e in _configs():
        rho = random_mixed_state(e.dims, stream(11, f"validate-seq/{e.label()}"))
        for g in (0.05, math.pi / 4, math.pi / 2):
            plan = plan_seq(e, g)
            if fault is not None:
                plan = fault(plan)
            got = extract_element_seq(rho, plan)
            want = rho.entry(e.s_flat, e.s_prime_flat)
            worst = max(worst, abs(got - want))
    return worst <= 1e-8, f"max sequential extraction error {worst:.3e} (bound 1e-8)"


def check_shot_model(fault: FAULT_HOOK | None = None) -> tuple[bool, str]:
    policy = ShotPolicy(n_t=2e4)
    reps = 3000
    worst = 0.0
    for e in (ElementIndex.create((3,), (0,), (1,)), ElementIndex.create((2, 2), (0, 0), (1, 1))):
        rho = random_mixed_state(e.dims, stream(5, f"validate-shots/{e.label()}"))
        plan = plan_res(e, math.pi / 4)
        var_re, var_im = element_variance(plan, rho, policy)
        draws = np.array([
            simulate_shots(plan, rho, policy, stream(5, f"validate-shots-draws/{e.label()}", i))
            for i in range(reps)
        ])
        emp_re = draws.real.var(ddof=1) * policy.n_t
        emp_im = draws.imag.var(ddof=1) * policy.n_t
        worst = max(worst, abs(emp_re - var_re) / var_re, abs(emp_im - var_im) / var_im)
    return worst <= 0.10, f"max empirical/analytic variance mismatch {worst:.1%} (bound 10%)"


def check_scaling(fault: FAULT_HOOK | None = None) -> tuple[bool, str]:
    grid = np.geomspace(1e-3, 1e-2, 4)
    system = SystemSpec(1, 3)
    ratios = []
    for g in grid:
        vs = per_state_values(system, "seq", g, 1, 200).mean()
        vr = per_state_values(system, "res", g, 1, 200).mean()
        ratios.append(vs / vr)
    slope = float(np.polyfit(np.log(grid), np.log(ratios), 1)[0])
    return abs(slope + 2.0) <= 0.2, f"qutrit variance-ratio slope {slope:.3f} (want -2.0 +- 0.2)"


def check_determinism(fault: FAULT_HOOK | None = None) -> tuple[bool, str]:
    system = SystemSpec(1, 3)
    a = per_state_values(system, "res", math.pi / 4, 9, 300, workers=1)
    b = per_state_values(system, "res", math.pi / 4, 9, 300, workers=2)
    same = bool(np.array_equal(a, b))
    return same, "per-state values bit-identical across worker counts" if same else "worker-count mismatch"


GROUPS = {
    "exactness": check_exactness,
    "conjugate": check_conjugate_pairs,
    "unbiasedness": check_unbiasedness,
    "counts": check_counts,
    "seq-unbiasedness": check_seq_unbiasedness,
    "shot-model": check_shot_model,
    "scaling": check_scaling,
    "determinism": check_determinism,
}


def run_validation(
    groups: list[str] | None = None,
    fault_hooks: dict[str, FAULT_HOOK] | None = None,
) -> list[GroupResult]:
    names = groups or list(GROUPS)
    results = []
    for name in names:
        if name not in GROUPS:
            raise KeyError(f"unknown validation group {name!r}")
        hook = (fault_hooks or {}).get(name)
        t0 = time.perf_counter()
        passed, detail = GROUPS[name](hook)
        results.append(GroupResult(name, passed, detail, time.perf_counter() - t0))
    return results
