"""Disturbance, measurement-noise, and measurement-spillover signals.

The distributed load is represented by its modal coefficients f_n(t), each a
finite cosine sum with a declared amplitude bound.  Measurement noise is any
bounded deterministic-under-seed waveform; the default is a seeded
uniform-random value held constant over short intervals.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .beam import damped_frequency


@dataclass(frozen=True)
class Harmonic:
    amplitude: float
    omega: float
    phase: float = 0.0


@dataclass(frozen=True)
class DisturbanceSpec:
    """Per-mode harmonic content of the modal forcing.

    mode_harmonics[n-1] lists the cosine components of f_n(t); modes beyond
    ``driven_mode_count`` are unforced.  ``f_max`` is the declared per-mode
    amplitude bound: construction rescales every amplitude by a common
    factor so the largest per-mode amplitude sum equals ``f_max``.
    """

    mode_harmonics: tuple
    f_max: float

    def __post_init__(self):
        sums = [sum(abs(h.amplitude) for h in hs) for hs in self.mode_harmonics]
        worst = max(sums, default=0.0)
        if worst > self.f_max * (1.0 + 1e-12) and worst > 0.0:
            raise ValueError(
                f"mode amplitude sum {worst} exceeds declared bound {self.f_max}"
            )

    @property
    def driven_mode_count(self):
        return len(self.mode_harmonics)

    def mode_bound(self, n):
        """Amplitude-sum bound on sup_t |f_n(t)|."""
        if n > self.driven_mode_count:
            return 0.0
        return sum(abs(h.amplitude) for h in self.mode_harmonics[n - 1])

    def force_vector_bound(self, N, a2=1.0):
        """Bound on sup_t of the Euclidean norm of a2*(f_1..f_N)."""
        return a2 * math.sqrt(
            sum(self.mode_bound(n) ** 2 for n in range(1, N + 1))
        )


def _normalized(mode_harmonics, bound):
    """Rescale all amplitudes so the largest per-mode sum equals ``bound``."""
    sums = [sum(abs(a) for a, _, _ in hs) for hs in mode_harmonics]
    worst = max(sums, default=0.0)
    scale = bound / worst if worst > 0.0 else 0.0
    return tuple(
        tuple(Harmonic(a * scale, om, ph) for a, om, ph in hs)
        for hs in mode_harmonics
    )


def build_disturbance(mode_harmonics, bound=None):
    """DisturbanceSpec from raw (amplitude, omega, phase) triples per mode.

    With ``bound`` given, amplitudes are rescaled so the largest per-mode
    amplitude sum equals it; otherwise the bound is taken from the data.
    """
    raw = tuple(
        tuple((float(a), float(om), float(ph)) for a, om, ph in hs)
        for hs in mode_harmonics
    )
    if bound is None:
        bound = max(
            (sum(abs(a) for a, _, _ in hs) for hs in raw), default=0.0
        )
        return DisturbanceSpec(
            tuple(tuple(Harmonic(*h) for h in hs) for hs in raw), bound
        )
    return DisturbanceSpec(_normalized(raw, bound), float(bound))


def polyharmonic_disturbance(params, driven_modes=3, count=11, bound=11.0,
                             resonance=True):
    """Equal polyharmonic forcing on the first ``driven_modes`` modes.

    Each driven mode receives ``count`` equal-amplitude zero-phase cosines
    at frequencies j * omega_1 / 3 (j = 1..count) where omega_1 is the
    lowest damped vibration frequency, so j = 3 lands exactly on resonance.
    Amplitudes are normalized to sum to ``bound`` per mode.  With
    ``resonance=False`` the frequency comb is stretched by 5% so no
    component coincides with omega_1.
    """
    om1 = damped_frequency(params, 1)
    stretch = 1.0 if resonance else 1.05
    freqs = [j * om1 * stretch / 3.0 for j in range(1, count + 1)]
    per_mode = tuple((1.0, om, 0.0) for om in freqs)
    return build_disturbance([per_mode] * driven_modes, bound=bound)


def constant_disturbance(values):
    """Constant modal forces f_n(t) = values[n-1] (omega = 0 components)."""
    return build_disturbance([((v, 0.0, 0.0),) for v in values])


def tail_disturbance(params, f0, n_modes, regime="uniform"):
    """Single resonant cosine per mode with a k-dependent amplitude envelope.

    regime "uniform": amplitude f0 for every mode; "smooth": f0 / k^2, the
    envelope of a spatially smooth load.  Each mode is driven at its own
    damped frequency, the regime in which the per-mode response bound is
    tight, so simulated residual amplitudes track their predicted decay.
    """
    if regime not in ("uniform", "smooth"):
        raise ValueError(f"unknown tail regime {regime!r}")
    hs = []
    for k in range(1, n_modes + 1):
        amp = f0 if regime == "uniform" else f0 / k**2
        hs.append(((amp, damped_frequency(params, k), 0.0),))
    return build_disturbance(hs)


def modal_force(spec, n, t):
    """f_n(t); zero for modes beyond the driven count.  Vectorized in t."""
    t = np.asarray(t, dtype=float)
    if n > spec.driven_mode_count:
        out = np.zeros_like(t)
        return out if out.ndim else 0.0
    total = np.zeros_like(t)
    for h in spec.mode_harmonics[n - 1]:
        total = total + h.amplitude * np.cos(h.omega * t + h.phase)
    return total if total.ndim else float(total)


# ---------------------------------------------------------------------------
# Measurement noise
# ---------------------------------------------------------------------------

class NoiseWaveform(Enum):
    UNIFORM_HOLD = "uniform_hold"
    SINUSOIDAL = "sinusoidal"


@dataclass(frozen=True)
class NoiseSpec:
    """Bounded measurement noise xi(t) with |xi| <= bound.

    UNIFORM_HOLD draws an independent uniform value on [-bound, bound] per
    ``hold``-length interval, deterministically from (seed, interval index);
    SINUSOIDAL is bound * sin(frequency * t + phase).  hold = None defers
    the interval length to the simulator, which uses ten time steps.
    """

    bound: float
    seed: int = 0
    waveform: NoiseWaveform = NoiseWaveform.UNIFORM_HOLD
    hold: float = None
    frequency: float = 25.0
    phase: float = 0.0

    def __post_init__(self):
        if self.bound < 0.0:
            raise ValueError(f"noise bound must be >= 0, got {self.bound}")
        if self.hold is not None and self.hold <= 0.0:
            raise ValueError(f"noise hold interval must be > 0, got {self.hold}")


_MASK = 0xFFFFFFFFFFFFFFFF


def _splitmix64(x):
    """SplitMix64 finalizer; a cheap stateless integer hash."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def _hold_value(seed, index, bound):
    h = _splitmix64(((seed & _MASK) << 1) ^ _splitmix64(index & _MASK))
    u = (h >> 11) * (1.0 / (1 << 53))  # uniform in [0, 1)
    return (2.0 * u - 1.0) * bound


def noise_sample(spec, t):
    """xi(t): deterministic in (spec.seed, t), |xi| <= spec.bound."""
    if spec.bound == 0.0:
        return 0.0
    if spec.waveform is NoiseWaveform.SINUSOIDAL:
        return spec.bound * math.sin(spec.frequency * t + spec.phase)
    if spec.hold is None:
        raise ValueError("NoiseSpec.hold is unresolved; set it or simulate()")
    index = int(math.floor(t / spec.hold))
    return _hold_value(spec.seed, index, spec.bound)


def noise_samples(spec, times):
    """Vectorized noise_sample over an array of times."""
    times = np.asarray(times, dtype=float)
    if spec.bound == 0.0:
        return np.zeros_like(times)
    if spec.waveform is NoiseWaveform.SINUSOIDAL:
        return spec.bound * np.sin(spec.frequency * times + spec.phase)
    if spec.hold is None:
        raise ValueError("NoiseSpec.hold is unresolved; set it or simulate()")
    idx = np.floor(times / spec.hold).astype(np.int64)
    out = np.empty_like(times)
    flat_idx = idx.ravel()
    flat_out = out.ravel()
    cache = {}
    for j, i in enumerate(flat_idx):
        i = int(i)
        if i not in cache:
            cache[i] = _hold_value(spec.seed, i, spec.bound)
        flat_out[j] = cache[i]
    return out


# ---------------------------------------------------------------------------
# Measurement spillover
# ---------------------------------------------------------------------------

def residual_output(block, state):
    """Sensor contribution r(t) = sum_k (s1 w_k + s2 w_k') psi_k(x0)."""
    state = np.asarray(state, dtype=float)
    if not np.all(np.isfinite(state)):
        raise ValueError("residual state must be finite")
    if block.R == 0:
        return 0.0
    return float(block.C @ state)
