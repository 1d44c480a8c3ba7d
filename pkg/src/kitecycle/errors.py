"""Exception types shared across the package.

The CLI maps ``ParseError``/``ValidationError`` to exit code 2 and every
other :class:`KitecycleError` to exit code 3.
"""


class KitecycleError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(KitecycleError):
    """Problems with configuration files or sweep specifications."""


class ParseError(ConfigError):
    """Input file is malformed or contains unknown keys (strict parse)."""


class ValidationError(ConfigError):
    """A value violates an invariant; the message names the invariant."""


class SolverError(KitecycleError):
    """Base class for failures of the physical solvers."""


class DomainError(SolverError):
    """An input is outside the model's domain of validity, e.g. an
    altitude below the roughness length where the log wind law is
    undefined."""


class NoTensionError(SolverError):
    """The reeling factor is too large for the tether to carry tension
    (f >= sin(theta)*cos(phi)); the tether cannot push."""


class NoSolutionError(SolverError):
    """The massless closed-form equations have no real solution for the
    given state (negative discriminant or negative tangential speed)."""


class SteadyStateError(SolverError):
    """The iterative kinematic-ratio procedure found no quasi-steady
    equilibrium: the iteration diverged, the kinematic ratio left its
    admissible range, or a force component turned imaginary."""


class TetherSagError(SolverError):
    """Half the tether weight exceeds the tension at the kite; the
    moderate-sagging force balance is outside its validity range."""


class SetpointUnreachableError(SolverError):
    """No reeling factor inside the search bracket produces the
    requested tether force."""


class PhaseError(SolverError):
    """A phase integration failed to terminate (e.g. the tether length
    stopped approaching the phase end condition)."""


class ConvergenceError(SolverError):
    """An asymptotic search exhausted its step budget."""


class EmptyPhaseError(KitecycleError):
    """A telemetry phase contains no valid samples to average."""
