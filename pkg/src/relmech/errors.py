"""Exception hierarchy shared by all relmech modules."""


class RelmechError(Exception):
    """Base class for every error raised by relmech."""


class SpeedNotSubluminal(RelmechError, ValueError):
    """A velocity with |v| >= c was supplied."""


class NotLorentz(RelmechError, ValueError):
    """A matrix fails to preserve the Minkowski metric."""


class NotTimelike(RelmechError, ValueError):
    """A quantity that must be timelike is null or spacelike."""


class NotNormalized(RelmechError, ValueError):
    """A 4-velocity does not satisfy g(U, U) = -c^2."""


class StepRejected(RelmechError, RuntimeError):
    """Adaptive integration could not meet its tolerance above the minimum step."""


class OrthogonalityViolated(RelmechError, ValueError):
    """A 4-force is not orthogonal to its 4-velocity."""


class WeakFieldViolated(RelmechError, ValueError):
    """A gravitational perturbation is too large for the linear theory."""


class SingularMetric(RelmechError, ValueError):
    """A metric is singular or has the wrong signature."""


class NotEquatorial(RelmechError, ValueError):
    """An orbit state leaves the equatorial plane."""


class InsufficientOrbits(RelmechError, ValueError):
    """Too few perihelion passages to measure a precession rate."""


class ZeroDensity(RelmechError, ValueError):
    """A fluid density vanishes where the dynamics divides by it."""


class ZeroInertia(RelmechError, ValueError):
    """The inertial density rho + p/c^2 vanishes."""


class SingularJacobian(RelmechError, ValueError):
    """A coordinate chart is singular at the requested point."""


class TriadNotOrthonormal(RelmechError, ValueError):
    """A frame triad is not orthonormal under the induced metric."""


class DegenerateScaleFactor(RelmechError, ValueError):
    """An orthogonal-coordinate scale factor vanishes."""


class ConfigError(RelmechError):
    """Base class for scenario configuration problems."""


class ParseError(ConfigError, ValueError):
    """A configuration line could not be parsed."""


class UnknownKey(ConfigError, KeyError):
    """A configuration key is not recognised."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class RangeError(ConfigError, ValueError):
    """A configuration value is outside its allowed range."""
