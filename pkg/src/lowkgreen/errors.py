"""Exception hierarchy shared across the package.

Two broad families: ``UsageError`` for invalid requests (bad names,
parameters, orders beyond validity) and ``NumericalError`` for failures of
the numerical machinery itself.  The CLI maps them to exit codes 2 and 3.
"""


class LowkGreenError(Exception):
    pass


class UsageError(LowkGreenError):
    pass


class NumericalError(LowkGreenError):
    pass


# -- series arithmetic ------------------------------------------------------

class ZeroLeadingCoefficient(NumericalError):
    pass


class OddLeadingOrder(NumericalError):
    pass


class NegativeOrderExponent(NumericalError):
    pass


class UnreliableOrder(NumericalError):
    """A coefficient beyond the truncation order was requested."""


# -- potentials and validity ------------------------------------------------

class UnknownPotential(UsageError):
    pass


class BadParameter(UsageError):
    pass


class MissingDecayMetadata(UsageError):
    pass


class OrderExceedsValidity(UsageError):
    pass


# -- quadrature --------------------------------------------------------------

class InvalidSpec(UsageError):
    pass


class DivergentTail(NumericalError):
    pass


class ToleranceNotMet(NumericalError):
    pass


# -- assembly ----------------------------------------------------------------

class BranchAmbiguity(NumericalError):
    pass


class NoClosedForm(UsageError):
    pass


class ExceptionalCase(NumericalError):
    """Zero-energy solutions are proportional; the finite-limit route applies."""


class NegativeZeroMode(NumericalError):
    pass


# -- oracle ------------------------------------------------------------------

class NonconvergedODE(NumericalError):
    pass


class WronskianDegenerate(NumericalError):
    pass


class UnsupportedAsymptotics(UsageError):
    pass


class BesselNonconvergence(NumericalError):
    pass


class DegenerateFit(NumericalError):
    pass
