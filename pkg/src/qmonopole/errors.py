"""Exception types raised by the engine."""


class QMonopoleError(Exception):
    """Base class for all engine errors."""


class DegenerateSpectrum(QMonopoleError):
    """Eigenvalues coincide, so eigenvectors are ill-defined."""


class DegeneratePoint(DegenerateSpectrum):
    """The parameter point sits on the degeneracy Delta = Omega = 0."""


class DegenerateNeighborhood(DegenerateSpectrum):
    """A finite-difference stencil touches a degeneracy."""


class DegenerateOnLoop(DegenerateSpectrum):
    """A Wilson loop passes through (or too close to) a degeneracy."""


class BoundaryDegeneracy(QMonopoleError):
    """|delta2| == |delta1|: the degeneracy lies on the manifold itself."""


class SingularMetric(QMonopoleError):
    """The metric determinant vanishes (coordinate pole)."""


class NormDrift(QMonopoleError):
    """State norm drifted beyond tolerance during propagation."""


class OriginSingularity(QMonopoleError):
    """Monopole field evaluated at the origin."""


class StringSingularity(QMonopoleError):
    """Patch potential evaluated on its excluded Dirac-string axis."""


class InvalidCharge(UserWarning):
    """Magnetic charge violates the Dirac condition (2g not integer)."""


class UsageError(QMonopoleError):
    """Bad command-line or configuration input."""


class OutputError(QMonopoleError):
    """Result could not be written."""
