"""Linear maps on operators, in the column-stacking (Liouville) representation.

``vec(A rho B) = (B^T kron A) vec(rho)``, so a conjugation ``U rho U^dag``
has matrix ``conj(U) kron U``. Maps are not required to be completely
positive or trace preserving: signed combinations are first-class.
"""
from __future__ import annotations

from dataclasses import dataclass
from numbers import Number
from typing import Iterable

import numpy as np

from .linalg import DomainError, ShapeError, local, pauli, projector

X_OUTCOMES = (1, -1)
Y_OUTCOMES = (1j, -1j)


def vec(rho) -> np.ndarray:
    return np.asarray(rho, dtype=complex).reshape(-1, order="F")


def unvec(v, dim: int) -> np.ndarray:
    return np.asarray(v).reshape(dim, dim, order="F")


@dataclass(frozen=True, eq=False)
class LinearMap:
    """Linear map on ``dim x dim`` operators; ``matrix`` has side ``dim**2``.

    ``a @ b`` composes (``b`` acts first), ``+``/``-``/scalar ``*`` combine.
    """

    dim: int
    matrix: np.ndarray

    def __post_init__(self):
        if self.matrix.shape != (self.dim**2, self.dim**2):
            raise ShapeError(f"matrix shape {self.matrix.shape} does not fit dim {self.dim}")

    def _check(self, other: LinearMap):
        if not isinstance(other, LinearMap):
            raise TypeError(f"expected a LinearMap, got {type(other).__name__}")
        if other.dim != self.dim:
            raise ShapeError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __matmul__(self, other: LinearMap) -> LinearMap:
        self._check(other)
        return LinearMap(self.dim, self.matrix @ other.matrix)

    def __add__(self, other: LinearMap) -> LinearMap:
        self._check(other)
        return LinearMap(self.dim, self.matrix + other.matrix)

    def __sub__(self, other: LinearMap) -> LinearMap:
        self._check(other)
        return LinearMap(self.dim, self.matrix - other.matrix)

    def __mul__(self, c: Number) -> LinearMap:
        return LinearMap(self.dim, c * self.matrix)

    __rmul__ = __mul__

    def __neg__(self) -> LinearMap:
        return LinearMap(self.dim, -self.matrix)

    def __call__(self, rho) -> np.ndarray:
        return apply(self, rho)

    def distance(self, other: LinearMap) -> float:
        """Largest absolute entry difference of the two matrices."""
        self._check(other)
        return float(np.max(np.abs(self.matrix - other.matrix)))

    def choi(self) -> np.ndarray:
        d = self.dim
        c = np.zeros((d * d, d * d), dtype=complex)
        for i in range(d):
            for j in range(d):
                e = np.zeros((d, d), dtype=complex)
                e[i, j] = 1.0
                c += np.kron(e, apply(self, e))
        return c

    def is_completely_positive(self, tol: float = 1e-10) -> bool:
        c = self.choi()
        if np.linalg.norm(c - c.conj().T) > tol:
            return False
        return bool(np.linalg.eigvalsh(0.5 * (c + c.conj().T)).min() >= -tol)

    def is_trace_preserving(self, tol: float = 1e-12) -> bool:
        # vec(1)^dag M = vec(1)^dag  <=>  tr(L[rho]) = tr(rho)
        v = vec(np.eye(self.dim))
        return float(np.max(np.abs(v.conj() @ self.matrix - v.conj()))) <= tol

    def is_unital(self, tol: float = 1e-12) -> bool:
        v = vec(np.eye(self.dim))
        return float(np.max(np.abs(self.matrix @ v - v))) <= tol


def identity_map(dim: int) -> LinearMap:
    return LinearMap(dim, np.eye(dim * dim, dtype=complex))


def zero_map(dim: int) -> LinearMap:
    return LinearMap(dim, np.zeros((dim * dim, dim * dim), dtype=complex))


def sandwich_map(a, b) -> LinearMap:
    """The map ``rho -> a rho b``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    return LinearMap(a.shape[0], np.kron(b.T, a))


def conjugation_map(u) -> LinearMap:
    u = np.asarray(u, dtype=complex)
    return LinearMap(u.shape[0], np.kron(u.conj(), u))


def kraus_map(kraus: Iterable) -> LinearMap:
    kraus = [np.asarray(k, dtype=complex) for k in kraus]
    out = conjugation_map(kraus[0])
    for k in kraus[1:]:
        out = out + conjugation_map(k)
    return out


def compose(outer: LinearMap, inner: LinearMap) -> LinearMap:
    return outer @ inner


def compose_all(maps: Iterable[LinearMap]) -> LinearMap:
    """Compose maps given in order of application (first acts first)."""
    maps = list(maps)
    out = maps[0]
    for m in maps[1:]:
        out = m @ out
    return out


def lincomb(terms: Iterable[tuple[complex, LinearMap]]) -> LinearMap:
    terms = list(terms)
    if not terms:
        raise DomainError("lincomb needs at least one term")
    dim = terms[0][1].dim
    mat = np.zeros((dim * dim, dim * dim), dtype=complex)
    for c, m in terms:
        if m.dim != dim:
            raise ShapeError(f"dimension mismatch: {dim} vs {m.dim}")
        mat = mat + c * m.matrix
    return LinearMap(dim, mat)


def apply(lmap: LinearMap, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (lmap.dim, lmap.dim):
        raise ShapeError(f"operator shape {rho.shape} does not fit map dim {lmap.dim}")
    return unvec(lmap.matrix @ vec(rho), lmap.dim)


# -- local qubit operations, lifted to qubit (x) environment -----------------

def _axis(axis: str):
    if axis not in ("x", "y"):
        raise DomainError(f"measurement/pulse axis must be 'x' or 'y', got {axis!r}")


def outcome_eigenvalue(axis: str, m) -> int:
    """Pauli eigenvalue selected by outcome label ``m``.

    X outcomes are +1/-1; Y outcomes are labelled +i/-i, where +i selects
    the +1 eigenvector of sigma_y.
    """
    _axis(axis)
    if axis == "x":
        if m not in X_OUTCOMES:
            raise DomainError(f"X outcome must be +1 or -1, got {m!r}")
        return int(np.real(m))
    if m not in Y_OUTCOMES:
        raise DomainError(f"Y outcome must be +1j or -1j, got {m!r}")
    return int(round(np.imag(m)))


def outcomes_for(axis: str) -> tuple:
    _axis(axis)
    return X_OUTCOMES if axis == "x" else Y_OUTCOMES


def pulse_map(axis: str, env_dim: int = 1) -> LinearMap:
    """Instantaneous pi pulse ``(sigma (x) 1) rho (sigma (x) 1)``."""
    _axis(axis)
    return conjugation_map(local(pauli(axis), env_dim))


def projection_map(axis: str, m, env_dim: int = 1) -> LinearMap:
    p = local(projector(axis, outcome_eigenvalue(axis, m)), env_dim)
    return sandwich_map(p, p)


def anticommutator_map(axis: str, env_dim: int = 1) -> LinearMap:
    _axis(axis)
    s = local(pauli(axis), env_dim)
    one = np.eye(s.shape[0])
    return sandwich_map(s, one) + sandwich_map(one, s)


def nonselective_measurement(axis: str, env_dim: int = 1) -> LinearMap:
    return lincomb([(1, projection_map(axis, m, env_dim)) for m in outcomes_for(axis)])


def repreparation_map(env_dim: int) -> LinearMap:
    """``rho -> P_+ (x) tr_Q(rho)``: discard the qubit, re-prepare it in |+>."""
    d = 2 * env_dim
    plus = projector("x", 1)
    mat = np.zeros((d * d, d * d), dtype=complex)
    for col in range(d * d):
        e = np.zeros(d * d, dtype=complex)
        e[col] = 1.0
        rho = unvec(e, d).reshape(2, env_dim, 2, env_dim)
        env = np.einsum("aiaj->ij", rho)
        mat[:, col] = vec(np.kron(plus, env))
    return LinearMap(d, mat)


def pillar_errors(axis: str, env_dim: int = 1) -> dict:
    """Deviation of the pulse/projection relations for one axis.

    ``pulse``: ``A = 2 (P_+ + P_-) - I``; ``converse``: each projection equals
    ``(I + A + c D) / 4`` with ``c = m`` for x and ``c = -i m`` for y.
    """
    dim = 2 * env_dim
    ident = identity_map(dim)
    pulse = pulse_map(axis, env_dim)
    projs = {m: projection_map(axis, m, env_dim) for m in outcomes_for(axis)}
    anti = anticommutator_map(axis, env_dim)
    built = lincomb([(2, projs[m]) for m in projs] + [(-1, ident)])
    out = {"pulse": pulse.distance(built)}
    conv = 0.0
    for m, p in projs.items():
        c = m if axis == "x" else -1j * m
        conv = max(conv, p.distance(lincomb([(0.25, ident), (0.25, pulse), (0.25 * c, anti)])))
    out["converse"] = conv
    return out
