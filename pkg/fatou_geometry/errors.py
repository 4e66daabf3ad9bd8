"""
Exception hierarchy.

Validation errors map to CLI exit code 2, numerical failures to exit code 3.
"""


class FatouGeometryError(Exception):
    exit_code = 1

    def to_dict(self):
        return {"error": type(self).__name__, "message": str(self)}


class ValidationError(FatouGeometryError):
    exit_code = 2


class NumericalError(FatouGeometryError):
    exit_code = 3


# --- validation ---------------------------------------------------------------

class ConfigError(ValidationError):
    pass


class MapSyntaxError(ValidationError):
    pass


class InvalidMap(ValidationError):
    """Degree < 2, zero denominator, or numerically common roots."""


class DegenerateEndpoints(ValidationError):
    pass


class EndpointOffJulia(ValidationError):
    pass


# --- numerical ----------------------------------------------------------------

class NonConvergence(NumericalError):
    pass


class CriticalValueOnPath(NumericalError):
    pass


class LiftDiverged(NumericalError):
    pass


class InsufficientData(NumericalError):
    pass


class PathTouchesBoundary(NumericalError):
    pass


class Disconnected(NumericalError):
    pass


class NoAttractor(NumericalError):
    pass


class ComponentUnresolved(NumericalError):
    pass


class NoJuliaCriticalPoints(NumericalError):
    pass


class CriticalOrbitHitsCritical(NumericalError):
    pass
