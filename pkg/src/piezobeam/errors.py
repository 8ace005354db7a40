"""Exception classes shared across the package.

The CLI maps these to distinct exit codes, so keep the hierarchy flat and
the classes specific.
"""


class ConfigError(ValueError):
    """A configuration file failed to parse or violated an invariant."""


class PlacementError(RuntimeError):
    """Sensor/actuator placement makes the requested design infeasible."""


class SingularControllabilityError(PlacementError):
    """Pole placement hit an uncontrollable (or unobservable) mode."""


class NoFeasibleGainError(PlacementError):
    """Gain tuning found no admissible candidate on the decay-rate grid."""


class UnstableMatrixError(RuntimeError):
    """An operation required a Hurwitz matrix and got one with Re(lambda) >= 0."""


class InternalConsistencyError(RuntimeError):
    """Closed-form and numeric placement tests disagreed outside the
    ill-conditioned band; indicates a bug rather than a bad input."""


class DivergenceError(RuntimeError):
    """Simulated state became non-finite."""

    def __init__(self, step, time):
        self.step = step
        self.time = time
        super().__init__(
            f"state became non-finite at step {step} (t = {time:.6g})"
        )
