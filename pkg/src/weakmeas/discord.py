"""Projective-measurement confidence on a system-apparatus pair.

The apparatus qubit of a bipartite state (tensor order system (x) apparatus)
is measured in an orthonormal basis parameterized by Bloch angles.  The
entropy-based confidence of that measurement equals the entropy increase
S(post) - S(pre); minimizing it over the apparatus basis yields a
conservative lower bound on the confidence of any such measurement — the
discord of the state with respect to the apparatus.

The minimizer is a (theta, phi) grid scan followed by golden-section
refinement around the grid optimum, so the reported minimum is an upper
approximation of the true one and the bound check stays sound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qstate import (EIG_FLOOR, DensityMatrix, StateValidityError,
                     relative_entropy, von_neumann_entropy)

ROUTE_AGREEMENT_TOL = 1e-9
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class RouteDisagreementError(ValueError):
    """The two confidence routes disagree (signals a projector defect)."""


@dataclass(frozen=True)
class ApparatusBasis:
    """Orthonormal apparatus basis from polar/azimuthal Bloch angles."""

    theta: float
    phi: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError("theta must lie in [0, pi]")
        if not 0.0 <= self.phi < 2.0 * math.pi:
            raise ValueError("phi must lie in [0, 2 pi)")

    def unitary(self) -> np.ndarray:
        """Columns are the two basis vectors."""
        c = math.cos(self.theta / 2.0)
        s = math.sin(self.theta / 2.0)
        e = complex(math.cos(self.phi), math.sin(self.phi))
        return np.array([[c, -e.conjugate() * s], [e * s, c]], dtype=np.complex128)

    def projectors(self) -> tuple[np.ndarray, np.ndarray]:
        u = self.unitary()
        v0, v1 = u[:, 0], u[:, 1]
        return np.outer(v0, v0.conj()), np.outer(v1, v1.conj())


def computational_basis() -> ApparatusBasis:
    return ApparatusBasis(0.0, 0.0)


def random_basis(rng: np.random.Generator) -> ApparatusBasis:
    """Direction uniform on the sphere."""
    theta = math.acos(rng.uniform(-1.0, 1.0))
    phi = rng.uniform(0.0, 2.0 * math.pi)
    return ApparatusBasis(theta, phi % (2.0 * math.pi))


def post_measurement_state(rho: DensityMatrix, basis: ApparatusBasis) -> DensityMatrix:
    """Dephase the apparatus in the given basis: sum_j P_j rho P_j."""
    if rho.dim != 4:
        raise StateValidityError("expected a 4x4 system-apparatus state")
    eye = np.eye(2, dtype=np.complex128)
    out = np.zeros((4, 4), dtype=np.complex128)
    for p in basis.projectors():
        full = np.kron(eye, p)
        out += full @ rho.matrix @ full
    return DensityMatrix.from_array(out)


def povm_confidence(rho: DensityMatrix, basis: ApparatusBasis) -> float:
    """Confidence of the projective apparatus measurement, in nats.

    Evaluated both as the relative entropy of the pre-measurement state to
    the post-measurement state and as the entropy increase; the two must
    agree within tolerance for projectors.
    """
    rho_m = post_measurement_state(rho, basis)
    via_relent = relative_entropy(rho, rho_m)
    via_entropy = von_neumann_entropy(rho_m) - von_neumann_entropy(rho)
    if not math.isfinite(via_relent) or abs(via_relent - via_entropy) > ROUTE_AGREEMENT_TOL:
        raise RouteDisagreementError(
            f"confidence routes disagree: {via_relent} vs {via_entropy}")
    return max(via_entropy, 0.0)


def _block_entropy_grid(rho4: np.ndarray, thetas: np.ndarray,
                        phis: np.ndarray) -> np.ndarray:
    """S(post-measurement state) for every basis on the (theta, phi) grid.

    In the measurement frame the dephased state is block-diagonal in the
    apparatus index, so its spectrum is that of two 2x2 blocks.
    """
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    c = np.cos(tt / 2.0).ravel()
    s = np.sin(tt / 2.0).ravel()
    e = np.exp(1j * pp).ravel()
    g = c.size
    u = np.empty((g, 2, 2), dtype=np.complex128)
    u[:, 0, 0] = c
    u[:, 0, 1] = -np.conj(e) * s
    u[:, 1, 0] = e * s
    u[:, 1, 1] = c
    udag = np.conj(np.swapaxes(u, 1, 2))
    r = rho4.reshape(2, 2, 2, 2)
    # apparatus indices rotated into the measurement frame
    rt = np.einsum("gab,sbtc,gcd->gsatd", udag, r, u)
    ent = np.zeros(g)
    for j in range(2):
        blk = rt[:, :, j, :, j]
        tr = (blk[:, 0, 0] + blk[:, 1, 1]).real
        det_disc = np.sqrt(np.maximum(
            ((blk[:, 0, 0] - blk[:, 1, 1]).real * 0.5) ** 2
            + np.abs(blk[:, 0, 1]) ** 2, 0.0))
        for lam in (0.5 * tr + det_disc, 0.5 * tr - det_disc):
            keep = lam > EIG_FLOOR
            ent[keep] -= lam[keep] * np.log(lam[keep])
    return ent.reshape(len(thetas), len(phis))


def _confidence_fast(rho4: np.ndarray, s_pre: float, theta: float, phi: float) -> float:
    ent = _block_entropy_grid(rho4, np.array([theta]), np.array([phi]))[0, 0]
    return max(float(ent) - s_pre, 0.0)


def _golden_min(fun, lo: float, hi: float, iterations: int = 30) -> float:
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iterations):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fun(d)
    return 0.5 * (a + b)


def discord_lower_bound(rho: DensityMatrix, resolution: int = 64
                        ) -> tuple[float, ApparatusBasis]:
    """Minimize the projective confidence over apparatus bases.

    Grid scan at the given resolution plus golden-section refinement in
    each angle around the grid optimum.  The result is an upper
    approximation of the true minimum, so ``confidence >= bound`` checks
    remain conservative.
    """
    if resolution < 8:
        raise ValueError("resolution must be at least 8")
    if rho.dim != 4:
        raise StateValidityError("expected a 4x4 system-apparatus state")
    rho4 = rho.matrix
    s_pre = von_neumann_entropy(rho)
    thetas = np.linspace(0.0, math.pi, resolution)
    phis = np.linspace(0.0, 2.0 * math.pi, resolution, endpoint=False)
    grid = _block_entropy_grid(rho4, thetas, phis) - s_pre
    i, j = np.unravel_index(int(np.argmin(grid)), grid.shape)
    theta, phi = float(thetas[i]), float(phis[j])
    dth = thetas[1] - thetas[0]
    dph = phis[1] - phis[0]
    for _ in range(2):
        theta = _golden_min(
            lambda t: _confidence_fast(rho4, s_pre, min(max(t, 0.0), math.pi), phi),
            max(theta - dth, 0.0), min(theta + dth, math.pi))
        phi = _golden_min(
            lambda p: _confidence_fast(rho4, s_pre, theta, p % (2.0 * math.pi)),
            phi - dph, phi + dph)
        phi %= 2.0 * math.pi
    best = ApparatusBasis(theta, phi)
    return povm_confidence(rho, best), best
