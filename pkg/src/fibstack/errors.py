"""Exception hierarchy shared by every module."""


class FibstackError(Exception):
    """Base class for all library errors."""


class ValidationError(FibstackError):
    """A raw description does not define a valid structure.

    ``witness`` names the offending item (an arrow, a triple, a sieve).
    """

    kind = "invalid"

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness

    def report(self):
        return {"error": self.kind, "message": str(self), "witness": _plain(self.witness)}


class MissingComposite(ValidationError):
    kind = "MissingComposite"


class AssociativityViolation(ValidationError):
    kind = "AssociativityViolation"


class IdentityViolation(ValidationError):
    kind = "IdentityViolation"


class FunctorViolation(ValidationError):
    kind = "FunctorViolation"


class AxiomViolation(ValidationError):
    """A topology fails one of its axioms (``axiom`` is stability, transitivity, maximal or empty)."""

    kind = "AxiomViolation"

    def __init__(self, axiom, message, witness=None):
        super().__init__(message, witness)
        self.axiom = axiom

    def report(self):
        out = super().report()
        out["axiom"] = self.axiom
        return out


class UnknownObject(FibstackError, KeyError):
    pass


class SizeBudgetExceeded(FibstackError):
    """An enumeration went past the configured candidate budget."""


class NotOverBase(FibstackError):
    pass


class PreconditionViolated(FibstackError):
    pass


class FractionsNotSaturating(FibstackError):
    pass


class MissingPullback(FibstackError):
    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


def _plain(x):
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    if isinstance(x, (tuple, list)):
        return [_plain(e) for e in x]
    if isinstance(x, (set, frozenset)):
        return sorted((_plain(e) for e in x), key=repr)
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    return repr(x)
