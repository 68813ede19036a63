"""Exception hierarchy shared by every module.

Each class carries the CLI exit code it maps to.
"""


class LabError(Exception):
    exit_code = 1


class MalformedInputError(LabError, ValueError):
    exit_code = 2


class DomainError(LabError, ValueError):
    exit_code = 3


class PreconditionError(LabError):
    exit_code = 3


class NotInBallError(PreconditionError):
    """A map lies outside the certified ball around a pinned map."""


class CertificateError(LabError):
    exit_code = 4


class MalformedCertificateError(CertificateError):
    pass


class ResourceError(LabError):
    exit_code = 5


class ConstructionError(LabError):
    exit_code = 6


class DegenerateFixedSetError(ConstructionError):
    """A linear piece of f^K lies on the diagonal, so Fix(f^K) is not finite."""


class ApproximationError(ConstructionError):
    pass
