"""Parametric eigenstructure assignment for high-order linear closed loops.

For ``x^(m) + A_0 x + ... + A_{m-1} x^(m-1) = 0`` with ``x`` in R^r, choosing a
target matrix ``F`` and a free parameter ``Z`` gives

    V = [Z; Z F; ...; Z F^(m-1)],    A = -Z F^m V^-1,

and then the block companion matrix of ``A`` equals ``V F V^-1``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

# Reject |det V| below this times the product of V's row norms.
DET_V_RTOL = 1e-12


class SingularParameterizationError(ValueError):
    def __init__(self, message: str, Z=None, F=None):
        super().__init__(message)
        self.Z = Z
        self.F = F


@dataclass(frozen=True)
class ParametricDesign:
    Z: NDArray[np.float64]
    F: NDArray[np.float64]
    m: int
    r: int = 1

    def __post_init__(self):
        Z = np.atleast_2d(np.asarray(self.Z, dtype=float))
        F = np.atleast_2d(np.asarray(self.F, dtype=float))
        object.__setattr__(self, "Z", Z)
        object.__setattr__(self, "F", F)
        if self.m < 1 or self.r < 1:
            raise ValueError(f"order m and width r must be >= 1, got m={self.m}, r={self.r}")
        n = self.m * self.r
        if Z.shape != (self.r, n):
            raise ValueError(f"Z must be {self.r}x{n}, got {Z.shape}")
        if F.shape != (n, n):
            raise ValueError(f"F must be {n}x{n}, got {F.shape}")

    @classmethod
    def diagonal(cls, Z, poles) -> "ParametricDesign":
        """Scalar-channel design with ``F = diag(poles)``; order is ``len(poles)``."""
        poles = np.asarray(poles, dtype=float)
        return cls(Z=np.atleast_2d(Z), F=np.diag(poles), m=len(poles), r=1)


@dataclass(frozen=True)
class GainRow:
    A: NDArray[np.float64]
    design: ParametricDesign | None = field(default=None, compare=False)

    @property
    def m(self) -> int:
        A = np.atleast_2d(self.A)
        return A.shape[1] // A.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.A, dtype=dtype)


def build_V(design: ParametricDesign) -> NDArray[np.float64]:
    blocks = []
    ZF = design.Z
    for _ in range(design.m):
        blocks.append(ZF)
        ZF = ZF @ design.F
    return np.vstack(blocks)


def synthesize_gains(design: ParametricDesign) -> GainRow:
    V = build_V(design)
    scale = float(np.prod(np.linalg.norm(V, axis=1)))
    det = float(np.linalg.det(V))
    if scale == 0.0 or abs(det) < DET_V_RTOL * scale:
        raise SingularParameterizationError(
            f"V(Z, F) is singular (det={det:.3g}) for Z={design.Z.tolist()}, F={design.F.tolist()}",
            Z=design.Z,
            F=design.F,
        )
    ZFm = design.Z @ np.linalg.matrix_power(design.F, design.m)
    # A V = -Z F^m, solved as V^T A^T = -(Z F^m)^T
    A = np.linalg.solve(V.T, -ZFm.T).T
    if design.r == 1:
        A = A.ravel()
    return GainRow(A=A, design=design)


def companion(A) -> NDArray[np.float64]:
    """Block companion matrix with identity super-diagonal and last block row ``-A``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    r, n = A.shape
    U = np.zeros((n, n))
    U[: n - r, r:] = np.eye(n - r)
    U[n - r :, :] = -A
    return U


def characteristic_coefficients(A) -> NDArray[np.float64]:
    """Monic characteristic polynomial of a scalar-channel companion, ascending powers."""
    A = np.asarray(A, dtype=float).ravel()
    return np.append(A, 1.0)


def closed_loop_eigenvalues(A) -> NDArray[np.complex128]:
    A2 = np.atleast_2d(np.asarray(A, dtype=float))
    if A2.shape[0] == 1:
        return np.roots(characteristic_coefficients(A2)[::-1]).astype(complex)
    return np.linalg.eigvals(companion(A2)).astype(complex)


def _multiset_distance(a: NDArray[np.complex128], b: NDArray[np.complex128]) -> float:
    if len(a) != len(b):
        return float("inf")
    if len(a) <= 6:
        best = float("inf")
        for perm in itertools.permutations(range(len(b))):
            best = min(best, max(abs(a[i] - b[j]) for i, j in enumerate(perm)))
        return best
    a = np.sort_complex(a)
    b = np.sort_complex(b)
    return float(np.max(np.abs(a - b)))


def verify_spectrum(A, F) -> float:
    """Largest distance between the closed-loop eigenvalues and the diagonal of ``F``."""
    if isinstance(A, GainRow):
        A = A.A
    target = np.diag(np.atleast_2d(np.asarray(F, dtype=float))).astype(complex)
    return _multiset_distance(closed_loop_eigenvalues(A), target)


def block_diag_gains(*rows) -> NDArray[np.float64]:
    """Stack scalar-channel gain rows into the interleaved block form used by ``companion``.

    Each row ``[a_0 ... a_{m-1}]`` acts on one channel; the result acts on the
    stacked state ``[X, X', ..., X^(m-1)]``.
    """
    rows = [np.asarray(getattr(r, "A", r), dtype=float).ravel() for r in rows]
    m = len(rows[0])
    r = len(rows)
    out = np.zeros((r, m * r))
    for i, row in enumerate(rows):
        for k in range(m):
            out[i, k * r + i] = row[k]
    return out
