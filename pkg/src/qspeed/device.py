"""Capacitively coupled transmon model and pulse-schedule propagation.

Two Hamiltonian families are built here:

* the idealized model, ``H0 + H1_m`` with independently addressable
  ``|j> <-> |j+1>`` drives (X and Y quadratures) on each qudit and no qudit
  self-energy, evolved over ``M`` piecewise-constant segments;
* the off-resonant-transition (ORT) model, in which each qudit is a
  truncated Duffing oscillator driven by one real signal on ``a + a^dagger``.

Amplitude layout for :class:`PulseSchedule` is ``(qudit, quadrature,
transition, segment)`` with quadrature index 0 = X, 1 = Y.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from . import _kernels
from .errors import ConfigError, SegmentOutOfRange, UnsupportedDimension
from .linalg import (
    SUPPORTED_SITE_DIMS,
    Quadrature,
    embed,
    kron,
    position,
    transition_operator,
)

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class DeviceParams:
    """Physical parameters; all rates in rad/s.

    Defaults are the two-transmon device used for the qutrit CZ study:
    ``g = 2 pi 2.7 MHz``, qudit frequencies ``2 pi (5.4, 4.86) GHz`` and
    anharmonicity ``2 pi 432 MHz`` on both qudits.
    """

    g: float = TWO_PI * 2.7e6
    omega: tuple[float, float] = (TWO_PI * 5.4e9, TWO_PI * 4.86e9)
    alpha: tuple[float, float] = (TWO_PI * 4.32e8, TWO_PI * 4.32e8)
    d_site: int = 3
    # extra oscillator levels kept above the computational space in the ORT model
    leakage_levels: int = 1

    def __post_init__(self):
        if not self.g > 0:
            raise ConfigError(f"coupling g must be positive, got {self.g}")
        if self.d_site not in SUPPORTED_SITE_DIMS:
            raise UnsupportedDimension(f"d_site must be one of {SUPPORTED_SITE_DIMS}")
        if self.leakage_levels < 0:
            raise ConfigError("leakage_levels must be >= 0")
        object.__setattr__(self, "omega", tuple(float(w) for w in self.omega))
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        if len(self.omega) != 2 or len(self.alpha) != 2:
            raise ConfigError("omega and alpha need one entry per qudit")

    @property
    def dim(self) -> int:
        return self.d_site**2

    @property
    def ort_levels(self) -> int:
        return self.d_site + self.leakage_levels

    @property
    def qubit_tmin(self) -> float:
        """Qubit CZ speed limit ``pi / (4 g)`` in seconds (the time unit of all sweeps)."""
        return np.pi / (4.0 * self.g)

    def with_(self, **changes) -> "DeviceParams":
        return replace(self, **changes)


@dataclass
class PulseSchedule:
    """Segmented drive amplitudes for the idealized model.

    ``amplitudes`` has shape ``(2, 2, d_site - 1, M)`` in rad/s.
    """

    total_time: float
    amplitudes: np.ndarray
    cap: float = np.inf

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=float)
        a = self.amplitudes
        if a.ndim != 4 or a.shape[0] != 2 or a.shape[1] != 2:
            raise ConfigError(f"amplitudes must have shape (2, 2, d-1, M), got {a.shape}")

    @property
    def segments(self) -> int:
        return self.amplitudes.shape[3]

    @property
    def d_site(self) -> int:
        return self.amplitudes.shape[2] + 1

    @classmethod
    def zeros(cls, d_site: int, segments: int, total_time: float, cap: float = np.inf):
        return cls(total_time, np.zeros((2, 2, d_site - 1, segments)), cap)

    def step_matrix(self) -> np.ndarray:
        """Amplitudes as a ``(M, K)`` matrix in :func:`control_operators` order."""
        return np.ascontiguousarray(self.amplitudes.reshape(-1, self.segments).T)

    @classmethod
    def from_step_matrix(cls, steps: np.ndarray, d_site: int, total_time: float, cap: float = np.inf):
        steps = np.asarray(steps, dtype=float)
        return cls(total_time, steps.T.reshape(2, 2, d_site - 1, steps.shape[0]).copy(), cap)


@dataclass
class OrtPulseSchedule:
    """One real drive envelope per qudit, ``envelope`` shape ``(2, N)`` in rad/s."""

    total_time: float
    envelope: np.ndarray
    cap: float = np.inf

    def __post_init__(self):
        self.envelope = np.asarray(self.envelope, dtype=float)
        if self.envelope.ndim != 2 or self.envelope.shape[0] != 2:
            raise ConfigError(f"envelope must have shape (2, N), got {self.envelope.shape}")

    @property
    def steps(self) -> int:
        return self.envelope.shape[1]

    def step_matrix(self) -> np.ndarray:
        return np.ascontiguousarray(self.envelope.T)


@lru_cache(maxsize=None)
def _control_operators(d_site: int) -> np.ndarray:
    ops = []
    for site in range(2):
        for quad in (Quadrature.X, Quadrature.Y):
            for j in range(d_site - 1):
                ops.append(embed(transition_operator(d_site, j, quad), site, (d_site, d_site)))
    out = np.stack(ops)
    out.setflags(write=False)
    return out


def control_operators(d_site: int) -> np.ndarray:
    """Stack of the ``4 (d_site - 1)`` drive operators, ordered (qudit, quadrature, transition)."""
    return _control_operators(d_site)


def coupling_hamiltonian(p: DeviceParams, levels: int | None = None) -> np.ndarray:
    """``g (a1 + a1^dagger) (x) (a2 + a2^dagger)`` truncated to ``levels`` per qudit."""
    n = p.d_site if levels is None else levels
    x = position(n)
    return p.g * kron(x, x)


def control_hamiltonian_segment(p: DeviceParams, s: PulseSchedule, m: int) -> np.ndarray:
    """Drive Hamiltonian of segment ``m`` (1-based)."""
    if not 1 <= m <= s.segments:
        raise SegmentOutOfRange(f"segment {m} outside 1..{s.segments}")
    if s.d_site != p.d_site:
        raise ConfigError("schedule and device disagree on d_site")
    amps = s.step_matrix()[m - 1]
    return np.einsum("k,kab->ab", amps, control_operators(p.d_site))


def propagate_segmented(p: DeviceParams, s: PulseSchedule) -> np.ndarray:
    """Total propagator ``U_M ... U_1`` of a segmented schedule."""
    if s.segments < 1 or not s.total_time > 0:
        raise ConfigError("schedule needs at least one segment and positive duration")
    if s.d_site != p.d_site:
        raise ConfigError("schedule and device disagree on d_site")
    return _kernels.propagate(
        coupling_hamiltonian(p), control_operators(p.d_site), s.step_matrix(), s.total_time / s.segments
    )


def duffing_term(levels: int, alpha: float, detuning: float = 0.0) -> np.ndarray:
    """Single-site ``detuning * n - (alpha / 2) n (n - 1)``."""
    n = np.arange(levels, dtype=float)
    return np.diag(detuning * n - 0.5 * alpha * n * (n - 1)).astype(complex)


def ort_static_hamiltonian(
    p: DeviceParams, detuning: tuple[float, float] = (0.0, 0.0), levels: int | None = None
) -> np.ndarray:
    """Drift of the ORT model in the frame rotating at each qudit's 0-1 frequency."""
    n = p.ort_levels if levels is None else levels
    h = coupling_hamiltonian(p, n)
    for site in range(2):
        h = h + embed(duffing_term(n, p.alpha[site], detuning[site]), site, (n, n))
    return h


@lru_cache(maxsize=None)
def _ort_drive_operators(levels: int) -> np.ndarray:
    x = position(levels)
    out = np.stack([embed(x, 0, (levels, levels)), embed(x, 1, (levels, levels))])
    out.setflags(write=False)
    return out


def ort_drive_operators(levels: int) -> np.ndarray:
    return _ort_drive_operators(levels)


def ort_hamiltonian(
    p: DeviceParams,
    drive=(0.0, 0.0),
    detuning: tuple[float, float] = (0.0, 0.0),
    levels: int | None = None,
) -> np.ndarray:
    """Full ORT Hamiltonian for instantaneous per-qudit drive amplitudes (rad/s)."""
    n = p.ort_levels if levels is None else levels
    drive = np.asarray(drive, dtype=float)
    return ort_static_hamiltonian(p, detuning, n) + np.einsum("k,kab->ab", drive, ort_drive_operators(n))


def propagate_ort(p: DeviceParams, s: OrtPulseSchedule, levels: int | None = None) -> np.ndarray:
    """Ordered product of per-step exponentials of the ORT Hamiltonian."""
    if s.steps < 1 or not s.total_time > 0:
        raise ConfigError("ORT schedule needs at least one step and positive duration")
    n = p.ort_levels if levels is None else levels
    return _kernels.propagate(
        ort_static_hamiltonian(p, levels=n), ort_drive_operators(n), s.step_matrix(), s.total_time / s.steps
    )

