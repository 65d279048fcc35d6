"""Operator constructions: swap involutions, subspace Hadamards, couplings."""

from __future__ import annotations

import numpy as np

from .errors import InvalidCouplingError, InvalidElementError
from .linalg import SIGMA_Y, Observable, UnitaryMatrix, check_joint_dim


def _check_pair(d: int, a: int, a_prime: int) -> None:
    if not (0 <= a < d and 0 <= a_prime < d):
        raise InvalidElementError(f"indices ({a},{a_prime}) out of range for dimension {d}")
    if a == a_prime:
        raise InvalidElementError(
            f"a = a' = {a}: the element is diagonal and has no swap observable"
        )


def make_involution(d: int, a: int, a_prime: int) -> Observable:
    """Hermitian involution swapping |a> and |a'>, fixing every other basis state."""
    _check_pair(d, a, a_prime)
    c = np.eye(d, dtype=complex)
    c[a, a] = 0.0
    c[a_prime, a_prime] = 0.0
    c[a, a_prime] = 1.0
    c[a_prime, a] = 1.0
    return Observable.create(c)


def make_subspace_hadamard(d: int, a: int, a_prime: int) -> UnitaryMatrix:
    """Hermitian unitary acting as the 2x2 Hadamard on span{|a>, |a'>}.

    Conjugating the reflection 1 - 2|a'><a'| with it yields
    ``make_involution(d, a, a_prime)``.
    """
    _check_pair(d, a, a_prime)
    h = np.eye(d, dtype=complex)
    r = 1.0 / np.sqrt(2.0)
    h[a, a] = r
    h[a, a_prime] = r
    h[a_prime, a] = r
    h[a_prime, a_prime] = -r
    return UnitaryMatrix.create(h)


def reflection(d: int, a_prime: int) -> Observable:
    """The ordinary observable 1 - 2|a'><a'|."""
    o = np.eye(d, dtype=complex)
    o[a_prime, a_prime] = -1.0
    return Observable.create(o)


def coupling_unitary(c: Observable | np.ndarray, g: float) -> UnitaryMatrix:
    """exp(-i g C (x) sigma_y) for an involution C, via the closed form.

    Only the integrated strength g enters; the closed form
    cos(g) 1 - i sin(g) C (x) sigma_y requires C^2 = 1.
    """
    mat = c.entries if isinstance(c, Observable) else np.asarray(c, dtype=complex)
    d = mat.shape[0]
    if np.max(np.abs(mat @ mat - np.eye(d))) > 1e-10:
        raise InvalidCouplingError("coupling operator is not an involution (C^2 != 1)")
    check_joint_dim(2 * d)
    u = np.cos(g) * np.eye(2 * d, dtype=complex) - 1j * np.sin(g) * np.kron(mat, SIGMA_Y)
    return UnitaryMatrix.create(u)


def projector_coupling_unitary(p: np.ndarray, g: float) -> UnitaryMatrix:
    """exp(-i g P (x) sigma_y) for a projector P.

    P^2 = P collapses the exponential to (1-P) (x) 1 + P (x) R(g) with
    R(g) the real rotation by g in the meter plane.
    """
    p = np.asarray(p, dtype=complex)
    d = p.shape[0]
    if np.max(np.abs(p @ p - p)) > 1e-10:
        raise InvalidCouplingError("coupling operator is not a projector (P^2 != P)")
    check_joint_dim(2 * d)
    rot = np.array([[np.cos(g), -np.sin(g)], [np.sin(g), np.cos(g)]], dtype=complex)
    u = np.kron(np.eye(d) - p, np.eye(2)) + np.kron(p, rot)
    return UnitaryMatrix.create(u)


def uniform_superposition_projector(d: int) -> np.ndarray:
    """|b><b| with |b> the uniform superposition of all basis states."""
    b = np.full(d, 1.0 / np.sqrt(d), dtype=complex)
    return np.outer(b, b.conj())


def meter_readout_basis(basis: str) -> np.ndarray:
    """Columns are the +1 and -1 eigenvectors of sigma_x or sigma_y."""
    if basis == "x":
        return np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)
    if basis == "y":
        return np.array([[1.0, 1.0], [1.0j, -1.0j]], dtype=complex) / np.sqrt(2.0)
    raise InvalidCouplingError(f"unknown meter basis {basis!r}")
