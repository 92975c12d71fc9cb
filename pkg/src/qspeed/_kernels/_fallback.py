"""Pure numpy implementation of the propagation kernels.

Conventions shared with the compiled kernel:

* ``h0``: (n, n) complex Hermitian drift.
* ``ops``: (K, n, n) complex Hermitian control operators.
* ``amps``: (S, K) real amplitudes; step ``s`` evolves under
  ``h0 + sum_k amps[s, k] * ops[k]`` for time ``dt``.
* The total propagator is ``U_S ... U_2 U_1`` (step 1 acts first).
"""

from __future__ import annotations

import numpy as np


def _step_eigs(h0, ops, amps):
    h = h0[None, :, :] + np.einsum("sk,kab->sab", amps, ops)
    return np.linalg.eigh(h)


def _step_unitaries(w, v, dt):
    return np.matmul(v * np.exp(-1j * w * dt)[:, None, :], np.conj(np.swapaxes(v, 1, 2)))


def propagate(h0, ops, amps, dt):
    n = h0.shape[0]
    if amps.shape[0] == 0:
        return np.eye(n, dtype=complex)
    w, v = _step_eigs(h0, ops, amps)
    us = _step_unitaries(w, v, dt)
    u = us[0]
    for s in range(1, us.shape[0]):
        u = us[s] @ u
    return u


def _phi(w, dt):
    """Divided-difference kernel of ``exp(-i w dt)`` in the eigenbasis."""
    wa = w[:, :, None]
    wb = w[:, None, :]
    x = 0.5 * dt * (wa - wb)
    return -1j * dt * np.exp(-0.5j * dt * (wa + wb)) * np.sinc(x / np.pi)


def propagate_with_gradient(h0, ops, amps, dt, a):
    """Return ``(U, dz)`` with ``dz[s, k] = d tr(a @ U) / d amps[s, k]``."""
    n = h0.shape[0]
    steps = amps.shape[0]
    if steps == 0:
        return np.eye(n, dtype=complex), np.zeros(amps.shape, dtype=complex)
    w, v = _step_eigs(h0, ops, amps)
    us = _step_unitaries(w, v, dt)

    # prefix[s] = U_s ... U_1 (prefix[-1] row holds the identity via index shift)
    prefix = np.empty((steps + 1, n, n), dtype=complex)
    prefix[0] = np.eye(n)
    for s in range(steps):
        prefix[s + 1] = us[s] @ prefix[s]
    # suffix[s] = a @ U_S ... U_{s+2}, i.e. everything left of step s+1
    suffix = np.empty((steps, n, n), dtype=complex)
    suffix[steps - 1] = a
    for s in range(steps - 1, 0, -1):
        suffix[s - 1] = suffix[s] @ us[s]

    b = np.matmul(prefix[:-1], suffix)
    vh = np.conj(np.swapaxes(v, 1, 2))
    bt = np.matmul(np.matmul(vh, b), v)
    c = np.swapaxes(bt, 1, 2) * _phi(w, dt)
    g = np.matmul(np.matmul(np.conj(v), c), np.swapaxes(v, 1, 2))
    dz = np.einsum("scd,kcd->sk", g, ops)
    return prefix[-1], dz
