"""Exception hierarchy shared by all modules."""


class DPWError(Exception):
    """Base class for every error raised by the package."""


# Laurent arithmetic
class SingularLoop(DPWError):
    """A loop is not invertible somewhere on the unit circle."""


class TruncationOverflow(DPWError):
    """A truncated series did not converge within the allowed degree."""


class EvaluationAtPole(DPWError):
    """A rational function was evaluated at (or numerically at) a pole."""


# groups and algebras
class NotInAlgebra(DPWError):
    """An element fails to lie in the requested Lie algebra."""


class AlreadyCompact(DPWError):
    """The compact dual of a compact real form was requested."""


# roots and gradings
class NonIntegralElement(DPWError):
    """ad(xi) has a non-integral eigenvalue (after dividing by i)."""


class NonQuantizedSpectrum(DPWError):
    """The vector representation spectrum of xi is not in i*Z/2."""


class HalfIntegerConvention(NonQuantizedSpectrum):
    """gamma_xi only exists in the adjoint form (half-integral spectrum)."""


# factorizations
class OutsideBigCell(DPWError):
    """The loop has no Birkhoff factorization (left the big cell)."""


class IwasawaCellBoundary(DPWError):
    """A non-compact Iwasawa split broke down (boundary of an open cell)."""


class NonGenericCell(DPWError):
    """The PR.Q split does not exist for this element."""


# potentials and frames
class GradingViolation(DPWError):
    """A potential coefficient has components outside the allowed grades."""


class ParityViolation(GradingViolation):
    """A coefficient has components of the wrong parity (even grades)."""


class PathThroughPole(DPWError):
    """Every integration path tried passes too close to a pole."""


class SupportOverflow(DPWError):
    """A solution has lambda support beyond the proven degree bound."""


class FitDegreeExceeded(DPWError):
    """No rational fit up to the degree cap reproduces the samples."""


class GridTooCoarse(DPWError):
    """Not enough lattice neighbours to form the finite differences."""


class BranchPoint(DPWError):
    """The surface is not immersed at the sample point."""


class NoMatch(DPWError):
    """A coefficient block matches none of the shapes in the classification."""


class ParseError(DPWError):
    """Malformed input file."""

    def __init__(self, message, line=None, column=None, source=None):
        loc = ""
        if source is not None and line is not None:
            loc = f"{source}:{line}:{column or 1}: "
        elif line is not None:
            loc = f"line {line}"
            if column is not None:
                loc += f", column {column}"
            loc += ": "
        super().__init__(loc + message)
        self.line = line
        self.column = column
        self.source = source
