"""Compiled inner loops for the time integrators.

States are carried as Bloch components (x, y, z); the measurement update is
the normalized Gaussian-measurement Kraus map exp(b * u * sigma_z) and the
Hamiltonian part is an exact rotation, so trace and positivity are preserved
at every step.  All kernels are scalar-arithmetic loops: results for a given
trajectory are bit-identical regardless of batching or thread count.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def trajectory_kernel(r0, e0, dW, dt, kappa, rot, stride, out_r, out_e, out_dy,
                      with_estimator):
    """Co-evolve the monitored system and its estimator, step-locked.

    r0, e0:  initial Bloch vectors (float64[3])
    dW:      Wiener increments, one per step
    rot:     precomputed one-step rotation matrix (float64[3,3])
    out_*:   decimated output buffers, index 0 holds the initial state
    """
    xr, yr, zr = r0[0], r0[1], r0[2]
    xe, ye, ze = e0[0], e0[1], e0[2]
    s8 = math.sqrt(8.0 * kappa)        # record drift coefficient
    b2 = 2.0 * math.sqrt(2.0 * kappa)  # doubled Kraus exponent coefficient
    out_r[0, 0], out_r[0, 1], out_r[0, 2] = xr, yr, zr
    out_e[0, 0], out_e[0, 1], out_e[0, 2] = xe, ye, ze
    out_dy[0] = 0.0
    k = 1
    n_steps = dW.shape[0]
    for i in range(n_steps):
        dy = s8 * zr * dt + dW[i]
        e = math.exp(b2 * dy)
        # conditioning map, applied with the same record to both states
        aa = e * (1.0 + zr)
        bb = (1.0 - zr) / e
        t = 0.5 * (aa + bb)
        zr = 0.5 * (aa - bb) / t
        xr = xr / t
        yr = yr / t
        if with_estimator:
            aa = e * (1.0 + ze)
            bb = (1.0 - ze) / e
            t = 0.5 * (aa + bb)
            ze = 0.5 * (aa - bb) / t
            xe = xe / t
            ye = ye / t
        # exact Rabi rotation
        xn = rot[0, 0] * xr + rot[0, 1] * yr + rot[0, 2] * zr
        yn = rot[1, 0] * xr + rot[1, 1] * yr + rot[1, 2] * zr
        zn = rot[2, 0] * xr + rot[2, 1] * yr + rot[2, 2] * zr
        xr, yr, zr = xn, yn, zn
        if with_estimator:
            xn = rot[0, 0] * xe + rot[0, 1] * ye + rot[0, 2] * ze
            yn = rot[1, 0] * xe + rot[1, 1] * ye + rot[1, 2] * ze
            zn = rot[2, 0] * xe + rot[2, 1] * ye + rot[2, 2] * ze
            xe, ye, ze = xn, yn, zn
        if (i + 1) % stride == 0:
            out_r[k, 0], out_r[k, 1], out_r[k, 2] = xr, yr, zr
            out_e[k, 0], out_e[k, 1], out_e[k, 2] = xe, ye, ze
            out_dy[k] = dy
            k += 1


@njit(cache=True, nogil=True)
def lindblad_kernel(r0, n_steps, substeps, decay, rot, stride, out):
    """Deterministic ensemble-mean evolution: exact dephasing + rotation."""
    x, y, z = r0[0], r0[1], r0[2]
    out[0, 0], out[0, 1], out[0, 2] = x, y, z
    k = 1
    for i in range(n_steps):
        for _ in range(substeps):
            x *= decay
            y *= decay
            xn = rot[0, 0] * x + rot[0, 1] * y + rot[0, 2] * z
            yn = rot[1, 0] * x + rot[1, 1] * y + rot[1, 2] * z
            zn = rot[2, 0] * x + rot[2, 1] * y + rot[2, 2] * z
            x, y, z = xn, yn, zn
        if (i + 1) % stride == 0:
            out[k, 0], out[k, 1], out[k, 2] = x, y, z
            k += 1


@njit(cache=True, nogil=True)
def ensemble_filter_kernel(rr0, re0, n_steps, substeps, h, decay, forcing, rot,
                           stride, out_r, out_e):
    """Co-integrate the ensemble mean and the nonstochastic estimator.

    The estimator is forced by ``forcing * (z_mean - z_est)`` through the
    record superoperator; its substep is explicit Euler in the forcing and
    exact in dephasing and rotation.  Returns the smallest eigenvalue seen
    on the estimator (positivity is not guaranteed by this equation).
    """
    xr, yr, zr = rr0[0], rr0[1], rr0[2]
    xe, ye, ze = re0[0], re0[1], re0[2]
    out_r[0, 0], out_r[0, 1], out_r[0, 2] = xr, yr, zr
    out_e[0, 0], out_e[0, 1], out_e[0, 2] = xe, ye, ze
    k = 1
    min_eig = 0.5 * (1.0 - math.sqrt(xe * xe + ye * ye + ze * ze))
    for i in range(n_steps):
        for _ in range(substeps):
            f = forcing * (zr - ze)
            xr *= decay
            yr *= decay
            xn = rot[0, 0] * xr + rot[0, 1] * yr + rot[0, 2] * zr
            yn = rot[1, 0] * xr + rot[1, 1] * yr + rot[1, 2] * zr
            zn = rot[2, 0] * xr + rot[2, 1] * yr + rot[2, 2] * zr
            xr, yr, zr = xn, yn, zn
            xe2 = xe * decay - 2.0 * ze * xe * f * h
            ye2 = ye * decay - 2.0 * ze * ye * f * h
            ze2 = ze + 2.0 * (1.0 - ze * ze) * f * h
            xn = rot[0, 0] * xe2 + rot[0, 1] * ye2 + rot[0, 2] * ze2
            yn = rot[1, 0] * xe2 + rot[1, 1] * ye2 + rot[1, 2] * ze2
            zn = rot[2, 0] * xe2 + rot[2, 1] * ye2 + rot[2, 2] * ze2
            xe, ye, ze = xn, yn, zn
            lam = 0.5 * (1.0 - math.sqrt(xe * xe + ye * ye + ze * ze))
            if lam < min_eig:
                min_eig = lam
        if (i + 1) % stride == 0:
            out_r[k, 0], out_r[k, 1], out_r[k, 2] = xr, yr, zr
            out_e[k, 0], out_e[k, 1], out_e[k, 2] = xe, ye, ze
            k += 1
    return min_eig


def warmup():
    """Trigger JIT compilation with tiny inputs (cached across sessions)."""
    rot = np.eye(3)
    out = np.zeros((2, 3))
    out2 = np.zeros((2, 3))
    dy = np.zeros(2)
    trajectory_kernel(np.array([0.0, 0.0, 1.0]), np.zeros(3), np.zeros(2),
                      1e-3, 0.005, rot, 2, out, out2, dy, True)
    lindblad_kernel(np.array([0.0, 0.0, 1.0]), 2, 2, 1.0, rot, 2, out)
    ensemble_filter_kernel(np.array([0.0, 0.0, 1.0]), np.zeros(3), 2, 2, 1e-3,
                           1.0, 0.02, rot, 2, out, out2)
