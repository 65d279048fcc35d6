"""Keyed random streams and Haar-distributed state sampling.

Streams are counter-based (Philox) and keyed by (seed, tag, index), so
any sample can be regenerated independently on any worker with
bit-identical results.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .linalg import DensityMatrix, Ket, UnitaryMatrix


def stream(seed: int, tag: str, index: int | None = None) -> np.random.Generator:
    """Independent generator for (seed, tag, index)."""
    payload = f"{seed}|{tag}|{'' if index is None else index}".encode()
    digest = hashlib.sha256(payload).digest()
    key = np.frombuffer(digest[:16], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def haar_unitary(d: int, rng: np.random.Generator) -> UnitaryMatrix:
    """Haar-distributed unitary via Ginibre QR with the phase-fix convention.

    Column phases are fixed so the triangular factor has a positive real
    diagonal, which makes the QR construction exactly Haar.
    """
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    q = q * (diag / np.abs(diag))
    return UnitaryMatrix.create(q)


def sample_single_qudit(
    d: int,
    rng: np.random.Generator,
    unitary: UnitaryMatrix | None = None,
) -> DensityMatrix:
    """Pure state V|0><0|V' with V Haar (or the supplied test unitary)."""
    v = (unitary or haar_unitary(d, rng)).entries
    col = v[:, 0]
    return DensityMatrix.create(np.outer(col, col.conj()), (d,))


def sample_entangled(
    n_qudits: int,
    d: int,
    rng: np.random.Generator,
    unitaries: list[UnitaryMatrix] | None = None,
) -> Ket:
    """Local Haar unitaries applied to the maximally entangled state.

    The reference state is (1/sqrt(d)) sum_m |m,...,m>; each qudit then
    evolves under its own independent Haar unitary.
    """
    if n_qudits < 2:
        raise ValueError("entangled sampling needs at least two qudits")
    dims = (d,) * n_qudits
    psi = np.zeros(dims, dtype=complex)
    for m in range(d):
        psi[(m,) * n_qudits] = 1.0 / np.sqrt(d)
    if unitaries is None:
        unitaries = [haar_unitary(d, rng) for _ in range(n_qudits)]
    for n, u in enumerate(unitaries):
        psi = np.moveaxis(np.tensordot(u.entries, psi, axes=(1, n)), 0, n)
    return Ket.create(psi.reshape(-1), dims)


def sample_precision_state(n_qudits: int, d: int, rng: np.random.Generator) -> DensityMatrix:
    """The state family entering the mean-precision integrals."""
    if n_qudits == 1:
        return sample_single_qudit(d, rng)
    return sample_entangled(n_qudits, d, rng).density()


def random_mixed_state(dims, rng: np.random.Generator) -> DensityMatrix:
    """Full-rank random density matrix (normalized Wishart), for tests."""
    if isinstance(dims, (int, np.integer)):
        dims = (int(dims),)
    dims = tuple(int(d) for d in dims)
    total = int(np.prod(dims))
    z = rng.standard_normal((total, total)) + 1j * rng.standard_normal((total, total))
    m = z @ z.conj().T
    return DensityMatrix.create(m / np.trace(m), dims)
