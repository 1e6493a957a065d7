"""Dense density-matrix algebra for one and two qubits.

Everything operates on small (2x2 or 4x4) complex Hermitian matrices.
Validity is enforced at construction: Hermiticity, unit trace, and
positive semidefiniteness within tolerance.  Entropic quantities use the
natural logarithm throughout, so all entropy-based distances are in nats.

Eigenvalue policy: eigenvalues in ``[-NEG_EIG_TOL, EIG_FLOOR]`` are
clamped to ``EIG_FLOOR`` before any logarithm; an eigenvalue below
``-NEG_EIG_TOL`` is a validity error.  Relative entropy returns
``math.inf`` when the first argument has weight above ``SUPPORT_TOL`` on
a clamped eigenvector of the second (support violation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EIG_FLOOR = 1e-12
NEG_EIG_TOL = 1e-9
SUPPORT_TOL = 1e-9
HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10


class StateValidityError(ValueError):
    """Raised when a matrix fails the density-matrix invariants."""


@dataclass(frozen=True)
class DensityMatrix:
    """Immutable d x d density operator (d = 2 or 4).

    The underlying array is copied and write-protected on construction.
    Use :meth:`from_array` for data that still needs hermitization and
    trace normalization (e.g. the raw output of an integrator step).
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in (2, 4):
            raise StateValidityError(f"expected a 2x2 or 4x4 matrix, got shape {m.shape}")
        if np.abs(m - m.conj().T).max() > HERMITICITY_TOL:
            raise StateValidityError("matrix is not Hermitian within 1e-12")
        tr = m.trace().real
        if abs(tr - 1.0) > TRACE_TOL:
            raise StateValidityError(f"trace {tr} deviates from 1 beyond 1e-10")
        lo = float(np.linalg.eigvalsh(m)[0])
        if lo < -NEG_EIG_TOL:
            raise StateValidityError(f"negative eigenvalue {lo} below tolerance -1e-9")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_array(cls, raw: np.ndarray) -> "DensityMatrix":
        """Hermitize and trace-normalize ``raw``, then validate.

        Renormalization is skipped when the trace already equals 1 to
        rounding, which makes the cleanup exactly idempotent.
        """
        m = np.asarray(raw, dtype=np.complex128)
        m = 0.5 * (m + m.conj().T)
        tr = m.trace().real
        if abs(tr - 1.0) > 1e-13:
            m = m / tr
        return cls(m)

    def eig(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues (ascending) and eigenvectors as columns."""
        return np.linalg.eigh(self.matrix)

    def expectation(self, op: np.ndarray) -> float:
        return float(np.trace(op @ self.matrix).real)

    def __eq__(self, other) -> bool:
        return isinstance(other, DensityMatrix) and np.array_equal(self.matrix, other.matrix)


@dataclass(frozen=True)
class BlochVector:
    """Cartesian Bloch coordinates of a qubit state, |r| <= 1."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        r2 = self.x * self.x + self.y * self.y + self.z * self.z
        if r2 > 1.0 + 1e-9:
            raise StateValidityError(f"Bloch vector length^2 = {r2} exceeds 1")

    def to_density_matrix(self) -> DensityMatrix:
        m = 0.5 * np.array(
            [[1.0 + self.z, self.x - 1j * self.y],
             [self.x + 1j * self.y, 1.0 - self.z]],
            dtype=np.complex128,
        )
        return DensityMatrix(m)

    @classmethod
    def from_density_matrix(cls, rho: DensityMatrix) -> "BlochVector":
        if rho.dim != 2:
            raise StateValidityError("Bloch coordinates are defined for 2x2 states only")
        m = rho.matrix
        return cls(
            x=float(2.0 * m[0, 1].real),
            y=float(-2.0 * m[0, 1].imag),
            z=float((m[0, 0] - m[1, 1]).real),
        )


# Pauli matrices and a few frequently used states.
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
IDENTITY2 = np.eye(2, dtype=np.complex128)


def left_state() -> DensityMatrix:
    """|L><L|, the +1 eigenprojector of sigma_z."""
    return DensityMatrix(np.diag([1.0, 0.0]).astype(np.complex128))


def right_state() -> DensityMatrix:
    return DensityMatrix(np.diag([0.0, 1.0]).astype(np.complex128))


def maximally_mixed(dim: int = 2) -> DensityMatrix:
    return DensityMatrix(np.eye(dim, dtype=np.complex128) / dim)


def bell_phi_plus() -> DensityMatrix:
    v = np.zeros(4, dtype=np.complex128)
    v[0] = v[3] = 1.0 / math.sqrt(2.0)
    return DensityMatrix(np.outer(v, v.conj()))


def tensor(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    return DensityMatrix(np.kron(a.matrix, b.matrix))


def purity(rho: DensityMatrix) -> float:
    """Tr(rho^2); equals 1 exactly for pure states."""
    m = rho.matrix
    return float(np.trace(m @ m).real)


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(m)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Uhlmann fidelity, the squared trace norm of (sigma^1/2 rho sigma^1/2)^1/2.

    Symmetric in its arguments and confined to [0, 1].
    """
    if rho.dim != sigma.dim:
        raise StateValidityError("fidelity requires equal dimensions")
    s = _psd_sqrt(sigma.matrix)
    inner = s @ rho.matrix @ s
    vals = np.clip(np.linalg.eigvalsh(inner), 0.0, None)
    f = float(np.sqrt(vals).sum() ** 2)
    return min(max(f, 0.0), 1.0)


def _clamped_spectrum(rho: DensityMatrix) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Eigen-decomposition with the clamping policy applied.

    Returns (clamped eigenvalues, eigenvectors, clamped-mask).
    """
    vals, vecs = np.linalg.eigh(rho.matrix)
    if vals[0] < -NEG_EIG_TOL:
        raise StateValidityError(f"negative eigenvalue {vals[0]} below tolerance")
    clamped = vals <= EIG_FLOOR
    out = np.where(clamped, EIG_FLOOR, vals)
    return out, vecs, clamped


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """S(rho) = -sum lambda ln lambda in nats, with 0 ln 0 = 0."""
    vals, _, clamped = _clamped_spectrum(rho)
    keep = ~clamped
    v = vals[keep]
    return float(-(v * np.log(v)).sum()) if v.size else 0.0


def relative_entropy(sigma: DensityMatrix, rho: DensityMatrix) -> float:
    """S(sigma||rho) = -Tr sigma ln rho - S(sigma), in nats.

    Asymmetric: the first argument sits inside the trace, the second
    inside the logarithm.  Returns ``math.inf`` when sigma has weight
    above the support tolerance outside the (clamped) support of rho.
    """
    if sigma.dim != rho.dim:
        raise StateValidityError("relative entropy requires equal dimensions")
    vals, vecs, clamped = _clamped_spectrum(rho)
    # weight of sigma along each eigenvector of rho
    weights = np.einsum("ij,jk,ki->i", vecs.conj().T, sigma.matrix, vecs).real
    weights = np.clip(weights, 0.0, None)
    if np.any(weights[clamped] > SUPPORT_TOL):
        return math.inf
    tr_sigma_ln_rho = float((weights * np.log(vals)).sum())
    return max(-tr_sigma_ln_rho - von_neumann_entropy(sigma), 0.0)


def partial_trace_system(rho: DensityMatrix, keep: str = "system") -> DensityMatrix:
    """Reduce a 4x4 state (tensor order system (x) apparatus) to one qubit.

    ``keep="system"`` traces out the apparatus, ``keep="apparatus"``
    traces out the system.
    """
    if rho.dim != 4:
        raise StateValidityError("partial trace expects a 4x4 bipartite state")
    m = rho.matrix.reshape(2, 2, 2, 2)
    if keep == "system":
        red = np.trace(m, axis1=1, axis2=3)
    elif keep == "apparatus":
        red = np.trace(m, axis1=0, axis2=2)
    else:
        raise ValueError(f"keep must be 'system' or 'apparatus', got {keep!r}")
    return DensityMatrix(red)


def random_qubit_state(rng: np.random.Generator) -> DensityMatrix:
    """Sample uniformly from the Bloch ball (boundary and interior)."""
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    radius = rng.uniform() ** (1.0 / 3.0)
    x, y, z = radius * direction
    return BlochVector(x, y, z).to_density_matrix()


def random_state(dim: int, rng: np.random.Generator) -> DensityMatrix:
    """Sample a full-rank random state: G G^dag / Tr, G complex Gaussian."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = g @ g.conj().T
    return DensityMatrix(m / m.trace().real)
