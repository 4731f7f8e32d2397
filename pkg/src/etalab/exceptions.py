"""Exception hierarchy shared by all computation modules."""


class EtaLabError(Exception):
    """Base class for domain errors raised by etalab."""


class ConvergenceFailure(EtaLabError):
    """A series or lattice sum cannot reach the requested tolerance within its cap."""


class PrecisionLoss(EtaLabError):
    """The requested accuracy is not attainable in double precision."""


class PolePoint(EtaLabError):
    """Evaluation requested exactly at a pole."""


class InvalidLambda(EtaLabError):
    """A Legendre parameter sits at a cusp (0 or 1)."""


class BranchPoint(EtaLabError):
    """Evaluation requested at a branch point or on a branch cut."""


class ContinuationFailure(EtaLabError):
    """Analytic continuation did not produce a stable integral matrix."""


class QuadratureFailure(EtaLabError):
    """Adaptive quadrature did not reach the requested tolerance."""


class SingularFit(EtaLabError):
    """Regression design matrix is rank deficient."""


class FitAmbiguous(EtaLabError):
    """Two competing growth models fit equally well."""


class DimensionMismatch(EtaLabError):
    pass


class MissingChernEntry(EtaLabError):
    pass
