"""Exception types raised across the package."""


class MotError(Exception):
    """Base class for all library errors."""


class NegativeMass(MotError, ValueError):
    pass


class EmptyMeasure(MotError, ValueError):
    pass


class SplitInfeasible(MotError):
    """An endpoint share of a shared nu-atom came out negative."""


class InfiniteEndpoint(MotError, ValueError):
    pass


class NotIrreducible(MotError, ValueError):
    pass


class NotInOrder(MotError, ValueError):
    pass


class DomainMismatch(MotError, ValueError):
    pass


class NotMartingale(MotError, ValueError):
    pass


class AllInfinite(MotError, ValueError):
    pass


class ModeratorFailure(MotError, ValueError):
    pass


class NoAtom(MotError, ValueError):
    pass


class IterationLimit(MotError, RuntimeError):
    pass


class UnboundedReward(MotError):
    """The reward is +inf on a pair that some martingale coupling charges."""

    def __init__(self, pair, message=None):
        self.pair = pair
        super().__init__(message or f"reward is +inf at chargeable pair {pair}")


class BadParams(MotError, ValueError):
    pass


class ParseError(MotError, ValueError):
    pass


class PropertyViolation(MotError, AssertionError):
    """A scenario property check failed; ``clause`` names the violated clause."""

    def __init__(self, clause, detail=""):
        self.clause = clause
        super().__init__(f"{clause}: {detail}" if detail else clause)
