class QuadnormError(Exception):
    pass


class SingularityError(QuadnormError):
    """Thrust direction too close to horizontal (cos(theta) cos(psi) below the guard)."""


class DegenerateB4Error(QuadnormError):
    """The normal-form input matrix is numerically singular."""


class NonFiniteStateError(QuadnormError):
    pass


class InvalidPoles(QuadnormError, ValueError):
    pass


class EigenvalueConditionError(QuadnormError, ValueError):
    """Observer polynomial has a complex or non-negative root."""


class ScenarioError(QuadnormError):
    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class ParseError(ScenarioError):
    pass


class ValidationError(ScenarioError, ValueError):
    pass


class UnknownKeyError(ScenarioError):
    pass
