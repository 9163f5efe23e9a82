"""Exception types raised across the package."""


class NonZeroResidual(AssertionError):
    """A symbolic identity did not reduce to zero.

    Carries the relation name and the offending residual so the failing
    polynomial can be inspected.
    """

    def __init__(self, relation, residual):
        self.relation = relation
        self.residual = residual
        super().__init__(f"{relation}: nonzero residual {residual}")


class DegenerateWeight(ValueError):
    """Weight exponent requested with beta + beta' = 0."""


class NonPhysical(ValueError):
    """Momentum-space parameters violate the physical-state condition."""


class NonPhysicalConfig(ValueError):
    """Oscillator configuration outside 0 <= beta_tilde < 1 or omega_tilde <= 0."""


class NoGroundNegative(ValueError):
    """The level (n, tau) = (0, -1) has no normalizable solution."""


class BadIndices(ValueError):
    """Generator requested with coinciding spacetime indices."""


class NoConvergence(ArithmeticError):
    """Adaptive quadrature exhausted its subdivision budget."""

    def __init__(self, message, value=None, error=None):
        self.value = value
        self.error = error
        super().__init__(message)
