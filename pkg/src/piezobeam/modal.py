"""Truncated modal state-space system and the residual-mode block.

Projecting the beam equation onto the first N eigenfunctions gives N
decoupled oscillators

    w_n'' + d_n w_n' + sigma_n^4 w_n = b_n V(t) + a2 f_n(t)

with d_n = a1 sigma_n^2 (structural damping) or a1 sigma_n^4 (Kelvin-Voigt)
and b_n = psi_n'(x2) - psi_n'(x1) from the patch edges.  Stacking the state
z = [w_1..w_N, w_1'..w_N'] yields the 2N x 2N system assembled here; modes
N+1..N+R form the uncontrolled residual block used for spillover studies.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .beam import SQRT2, cos_pi, mode_shape, sin_pi


class DampingModel(Enum):
    STRUCTURAL = "structural"
    KELVIN_VOIGT = "kelvin_voigt"


def damping_coefficients(params, modes, model=DampingModel.STRUCTURAL):
    """Per-mode damping d_n for the requested model (modes is an int array)."""
    s2 = (np.asarray(modes, dtype=float) * math.pi) ** 2
    if model is DampingModel.STRUCTURAL:
        return params.a1 * s2
    if model is DampingModel.KELVIN_VOIGT:
        return params.a1 * s2**2
    raise ValueError(f"unknown damping model {model!r}")


@dataclass(frozen=True)
class Placement:
    """Patch interval [x1, x2] and point-sensor location x0 with weights.

    The measured output is y = s1 * w(x0, t) + s2 * w_t(x0, t); the default
    (s1, s2) = (0, 1) is a pure velocity sensor.
    """

    x1: float
    x2: float
    x0: float
    s1: float = 0.0
    s2: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.x1 < self.x2 <= 1.0):
            raise ValueError(
                f"patch must satisfy 0 <= x1 < x2 <= 1, got ({self.x1}, {self.x2})"
            )
        if not (0.0 < self.x0 < 1.0):
            raise ValueError(f"sensor must satisfy 0 < x0 < 1, got {self.x0}")
        if self.s1 == 0.0 and self.s2 == 0.0:
            raise ValueError("sensor weights (s1, s2) must not both be zero")


def actuator_gain(n, placement):
    """Modal actuation gain psi_n'(x2) - psi_n'(x1) of the patch pair."""
    return SQRT2 * n * math.pi * (
        cos_pi(n * placement.x2) - cos_pi(n * placement.x1)
    )


def static_gain(params, n):
    """Steady modal amplitude per unit constant modal force: a2 / sigma_n^4."""
    if n < 1:
        raise ValueError(f"mode index must be >= 1, got {n}")
    return params.a2 / (n * math.pi) ** 4


@dataclass
class ModalSystem:
    """Truncated 2N-state model: z' = A z + B V + forcing, y = C z + eps.

    A = [[0, I], [-diag(sigma_n^4), -diag(d_n)]], B carries the patch gains
    in its velocity rows, C the sensor mode shapes.  Instances are immutable
    by convention; do not modify the arrays in place.
    """

    N: int
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    params: "BeamParams"
    placement: Placement
    damping_model: DampingModel

    @property
    def modes(self):
        return np.arange(1, self.N + 1)

    @property
    def sigma2(self):
        """sigma_n^2 = (n pi)^2 for n = 1..N."""
        return (self.modes * math.pi) ** 2

    def modal_energy(self, z):
        """Energy (1/2) sum(w_n'^2 + sigma_n^4 w_n^2) of state(s) z.

        Accepts a single 2N state or an array of states in the last axis
        convention (..., 2N).
        """
        z = np.asarray(z, dtype=float)
        w = z[..., : self.N]
        wd = z[..., self.N :]
        return 0.5 * (np.sum(wd**2, axis=-1) + np.sum(self.sigma2**2 * w**2, axis=-1))

    def dissipation(self, z):
        """Instantaneous dissipation sum(d_n w_n'^2) >= 0 of state(s) z."""
        z = np.asarray(z, dtype=float)
        wd = z[..., self.N :]
        d = damping_coefficients(self.params, self.modes, self.damping_model)
        return np.sum(d * wd**2, axis=-1)


def assemble(params, N, placement, damping_model=DampingModel.STRUCTURAL):
    """Build the truncated modal system for modes 1..N."""
    if int(N) != N or N < 1:
        raise ValueError(f"mode count N must be a positive integer, got {N}")
    N = int(N)
    modes = np.arange(1, N + 1)
    s2 = (modes * math.pi) ** 2
    d = damping_coefficients(params, modes, damping_model)

    A = np.zeros((2 * N, 2 * N))
    A[:N, N:] = np.eye(N)
    A[N:, :N] = -np.diag(s2**2)
    A[N:, N:] = -np.diag(d)

    B = np.zeros(2 * N)
    B[N:] = [actuator_gain(n, placement) for n in modes]

    psi = SQRT2 * sin_pi(modes * placement.x0)
    C = np.concatenate([placement.s1 * psi, placement.s2 * psi])

    return ModalSystem(
        N=N, A=A, B=B, C=C,
        params=params, placement=placement, damping_model=damping_model,
    )


@dataclass
class ResidualBlock:
    """Uncontrolled modes N+1..N+R retained for spillover studies.

    Each residual mode obeys w_k'' + d_k w_k' + sigma_k^4 w_k = a2 f_k
    (plus b_k V when control spillover is switched on).  ``C`` maps the
    stacked residual state to its contribution to the sensor reading.
    """

    first_mode: int
    R: int
    modes: np.ndarray
    sigma4: np.ndarray
    damping: np.ndarray
    gain: np.ndarray
    params: "BeamParams"
    placement: Placement
    damping_model: DampingModel
    A: np.ndarray = field(repr=False, default=None)
    B: np.ndarray = field(repr=False, default=None)
    C: np.ndarray = field(repr=False, default=None)


def residual_block(params, placement, N, R, damping_model=DampingModel.STRUCTURAL):
    """Build the residual block for modes N+1..N+R (R = 0 gives empty arrays)."""
    if R < 0 or int(R) != R:
        raise ValueError(f"residual mode count R must be an integer >= 0, got {R}")
    R = int(R)
    modes = np.arange(N + 1, N + R + 1)
    s2 = (modes * math.pi) ** 2
    d = damping_coefficients(params, modes, damping_model)
    gain = np.array([actuator_gain(k, placement) for k in modes])

    A = np.zeros((2 * R, 2 * R))
    A[:R, R:] = np.eye(R)
    A[R:, :R] = -np.diag(s2**2)
    A[R:, R:] = -np.diag(d)

    B = np.zeros(2 * R)
    B[R:] = gain

    psi = np.array([mode_shape(k, placement.x0) for k in modes])
    C = np.concatenate([placement.s1 * psi, placement.s2 * psi])

    return ResidualBlock(
        first_mode=N + 1, R=R, modes=modes, sigma4=s2**2, damping=d, gain=gain,
        params=params, placement=placement, damping_model=damping_model,
        A=A, B=B, C=C,
    )
