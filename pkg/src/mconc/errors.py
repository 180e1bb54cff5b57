class ShapeError(ValueError):
    """Dimensions, subsets or vector lengths do not fit together."""


class SpecError(ValueError):
    """Invalid concurrence specification or a spec unsuitable for the requested path."""


class NumericalError(ArithmeticError):
    """A numerical invariant was broken beyond tolerance."""


class QuasiPureDenominatorError(NumericalError):
    """The dominant eigenvector has (numerically) vanishing pure-state concurrence."""
