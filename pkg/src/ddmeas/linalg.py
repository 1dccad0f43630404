"""Dense linear algebra on the qubit (system) x environment Hilbert space.

Operators are plain complex ``numpy`` arrays. The factor ordering is always
system first, environment second, so ``tensor(a, b) == np.kron(a, b)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

HERM_TOL = 1e-12
PSD_TOL = -1e-10


class DomainError(ValueError):
    """Argument outside the domain an operation is defined on."""


class ShapeError(ValueError):
    """Array shapes or declared dimensions do not match."""


class InvariantError(RuntimeError):
    """A numerical invariant that must hold by construction was violated."""


@dataclass(frozen=True)
class HilbertDims:
    system_dim: int = 2
    env_dim: int = 1

    def __post_init__(self):
        if int(self.system_dim) < 1 or int(self.env_dim) < 1:
            raise DomainError(f"dimensions must be >= 1, got {self}")

    @property
    def total_dim(self) -> int:
        return self.system_dim * self.env_dim


# -- predicates -------------------------------------------------------------

def _fro(a) -> float:
    return float(np.linalg.norm(a))


def is_hermitian(a, tol: float = HERM_TOL) -> bool:
    a = np.asarray(a)
    return _fro(a - a.conj().T) <= tol * max(_fro(a), 1.0)


def is_unitary(u, tol: float = HERM_TOL) -> bool:
    u = np.asarray(u)
    return _fro(u.conj().T @ u - np.eye(u.shape[0])) <= tol * max(1.0, np.sqrt(u.shape[0]))


def is_projector(p, tol: float = HERM_TOL) -> bool:
    p = np.asarray(p)
    return _fro(p @ p - p) <= tol and is_hermitian(p, tol)


def check_state(rho, normalized: bool = True, tol: float = HERM_TOL) -> np.ndarray:
    """Validate a density matrix (or an unnormalized measurement branch)."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ShapeError(f"state must be square, got shape {rho.shape}")
    if not is_hermitian(rho, tol):
        raise DomainError("state is not Hermitian")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < PSD_TOL:
        raise DomainError("state is not positive semidefinite")
    tr = np.trace(rho).real
    if normalized and abs(tr - 1.0) > tol:
        raise DomainError(f"state trace {tr!r} != 1")
    if not normalized and not (-tol <= tr <= 1.0 + tol):
        raise DomainError(f"branch trace {tr!r} outside [0, 1]")
    return rho


# -- elementary operators ---------------------------------------------------

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli(axis: str) -> np.ndarray:
    try:
        return _PAULI[axis].copy()
    except KeyError:
        raise DomainError(f"unknown Pauli axis {axis!r}") from None


def projector(axis: str, m: int) -> np.ndarray:
    """Eigenprojector ``(1 + m sigma_axis) / 2`` for ``m = +1`` or ``-1``."""
    if axis not in ("x", "y", "z"):
        raise DomainError(f"unknown axis {axis!r}")
    if m not in (1, -1):
        raise DomainError(f"projector outcome must be +1 or -1, got {m!r}")
    return 0.5 * (np.eye(2, dtype=complex) + m * _PAULI[axis])


def tensor(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def local(op, env_dim: int) -> np.ndarray:
    """Lift a system operator to the full space as ``op (x) 1_E``."""
    return tensor(op, np.eye(env_dim))


def partial_trace_env(rho, dims: HilbertDims) -> np.ndarray:
    rho = np.asarray(rho)
    if rho.shape != (dims.total_dim, dims.total_dim):
        raise ShapeError(f"state of shape {rho.shape} does not match {dims}")
    d, e = dims.system_dim, dims.env_dim
    return np.einsum("iaja->ij", rho.reshape(d, e, d, e))


def partial_trace_sys(rho, dims: HilbertDims) -> np.ndarray:
    rho = np.asarray(rho)
    if rho.shape != (dims.total_dim, dims.total_dim):
        raise ShapeError(f"state of shape {rho.shape} does not match {dims}")
    d, e = dims.system_dim, dims.env_dim
    return np.einsum("aiaj->ij", rho.reshape(d, e, d, e))


def expm_hermitian(h, t: float = 1.0) -> np.ndarray:
    """``exp(-i t h)`` for Hermitian ``h`` via its eigendecomposition."""
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h):
        raise InvariantError("generator is not Hermitian")
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    return (v * np.exp(-1j * t * w)) @ v.conj().T


# -- random ensembles -------------------------------------------------------

def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    """GUE-style Hermitian matrix scaled to unit spectral norm."""
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = 0.5 * (a + a.conj().T)
    norm = np.linalg.norm(h, 2)
    return h / norm if norm > 0 else h


def random_density(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Full-rank density matrix from a Ginibre draw."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T + 1e-3 * np.eye(dim)
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    return expm_hermitian(random_hermitian(rng, dim), rng.uniform(0.5, 3.0))


# -- model ------------------------------------------------------------------

@dataclass(frozen=True)
class DephasingParams:
    """Pure-dephasing coupling ``a_z sz (x) V_z + a_1 1 (x) V_1``."""

    a_z: float
    a_1: float
    v_z: np.ndarray
    v_1: np.ndarray


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Qubit coupled to an environment.

    ``couplings`` maps a Pauli axis to the environment operator it multiplies.
    For pure-dephasing models the environment Hamiltonian is ``a_1 V_1`` and
    the only coupling is ``z -> a_z V_z``.
    """

    dims: HilbertDims
    qubit_hamiltonian: np.ndarray
    env_hamiltonian: np.ndarray
    couplings: Mapping[str, np.ndarray]
    env_initial: np.ndarray
    dephasing: DephasingParams | None = None
    seed: int | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        e = self.dims.env_dim
        if self.dims.system_dim != 2:
            raise DomainError("ModelSpec describes a qubit; system_dim must be 2")
        if np.shape(self.qubit_hamiltonian) != (2, 2):
            raise ShapeError("qubit Hamiltonian must be 2x2")
        ops = {"H_E": self.env_hamiltonian, **{f"V_{k}": v for k, v in self.couplings.items()}}
        for name, op in ops.items():
            if np.shape(op) != (e, e):
                raise ShapeError(f"{name} has shape {np.shape(op)}, expected {(e, e)}")
            if not is_hermitian(op):
                raise DomainError(f"{name} is not Hermitian")
        if not is_hermitian(self.qubit_hamiltonian):
            raise DomainError("qubit Hamiltonian is not Hermitian")
        for k in self.couplings:
            if k not in ("x", "y", "z"):
                raise DomainError(f"unknown coupling axis {k!r}")
        if np.shape(self.env_initial) != (e, e):
            raise ShapeError("environment initial state has the wrong shape")
        check_state(self.env_initial)
        if self.dephasing is not None:
            p = self.dephasing
            target = p.a_z * tensor(pauli("z"), p.v_z) + p.a_1 * tensor(np.eye(2), p.v_1)
            if np.linalg.norm(self.hamiltonian() - target) > HERM_TOL * max(1.0, np.linalg.norm(target)):
                raise InvariantError("dephasing parameters do not reproduce the Hamiltonian")

    @property
    def is_pure_dephasing(self) -> bool:
        return self.dephasing is not None

    def hamiltonian(self, kind: str = "composite") -> np.ndarray:
        e = self.dims.env_dim
        h = tensor(np.eye(2), self.env_hamiltonian)
        if kind == "env_only":
            return h
        if kind != "composite":
            raise DomainError(f"unknown segment kind {kind!r}")
        h = h + tensor(self.qubit_hamiltonian, np.eye(e))
        for axis, v in self.couplings.items():
            h = h + tensor(pauli(axis), v)
        return h

    def _eig(self, kind):
        if kind not in self._cache:
            h = self.hamiltonian(kind)
            if not is_hermitian(h):
                raise InvariantError("assembled Hamiltonian is not Hermitian")
            self._cache[kind] = np.linalg.eigh(0.5 * (h + h.conj().T))
        return self._cache[kind]


def evolution_unitary(model: ModelSpec, duration: float, kind: str = "composite") -> np.ndarray:
    if duration < 0:
        raise DomainError(f"duration must be >= 0, got {duration}")
    w, v = model._eig(kind)
    return (v * np.exp(-1j * duration * w)) @ v.conj().T


def general_model(h_q, h_e, couplings: Mapping[str, np.ndarray], env_initial, seed=None) -> ModelSpec:
    h_e = np.atleast_2d(np.asarray(h_e, dtype=complex))
    return ModelSpec(
        dims=HilbertDims(2, h_e.shape[0]),
        qubit_hamiltonian=np.asarray(h_q, dtype=complex),
        env_hamiltonian=h_e,
        couplings={k: np.atleast_2d(np.asarray(v, dtype=complex)) for k, v in couplings.items()},
        env_initial=np.atleast_2d(np.asarray(env_initial, dtype=complex)),
        seed=seed,
    )


def dephasing_model(a_z: float, a_1: float, v_z, v_1, env_initial=None, seed=None) -> ModelSpec:
    """Model with ``H = a_z sz (x) V_z + a_1 1 (x) V_1``; scalars allowed for env_dim 1."""
    v_z = np.atleast_2d(np.asarray(v_z, dtype=complex))
    v_1 = np.atleast_2d(np.asarray(v_1, dtype=complex))
    e = v_z.shape[0]
    if env_initial is None:
        env_initial = np.eye(e) / e
    return ModelSpec(
        dims=HilbertDims(2, e),
        qubit_hamiltonian=np.zeros((2, 2), dtype=complex),
        env_hamiltonian=a_1 * v_1,
        couplings={"z": a_z * v_z},
        env_initial=np.atleast_2d(np.asarray(env_initial, dtype=complex)),
        dephasing=DephasingParams(float(a_z), float(a_1), v_z, v_1),
        seed=seed,
    )


def random_model(dims: HilbertDims, kind: str = "general", seed: int = 0) -> ModelSpec:
    """Deterministic random qubit-environment model for the given seed."""
    if dims.system_dim != 2:
        raise DomainError("random_model builds qubit models (system_dim = 2)")
    rng = np.random.default_rng(seed)
    e = dims.env_dim
    if kind == "general":
        h_q = random_hermitian(rng, 2)
        h_e = random_hermitian(rng, e)
        couplings = {k: random_hermitian(rng, e) for k in ("x", "y", "z")}
        rho_e = random_density(rng, e)
        return general_model(h_q, h_e, couplings, rho_e, seed=seed)
    if kind == "pure_dephasing":
        a_z, a_1 = rng.uniform(0.3, 1.5, size=2)
        v_z = random_hermitian(rng, e)
        v_1 = random_hermitian(rng, e)
        rho_e = random_density(rng, e)
        return dephasing_model(a_z, a_1, v_z, v_1, rho_e, seed=seed)
    raise DomainError(f"unknown model kind {kind!r}")
