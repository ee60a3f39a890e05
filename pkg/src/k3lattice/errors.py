"""Exception hierarchy shared by all modules."""


class LatticeError(Exception):
    """Base class for library errors."""


class NotSymmetric(LatticeError):
    pass


class NotIntegral(LatticeError):
    pass


class ZeroScale(LatticeError):
    pass


class Degenerate(LatticeError):
    pass


class DegenerateSubspace(LatticeError):
    pass


class NotPositiveDefinite(LatticeError):
    pass


class NotNegativeDefinite(LatticeError):
    pass


class RankMismatch(LatticeError):
    pass


class GroupTooLarge(LatticeError):
    """A finite group exceeded the configured enumeration cap."""

    def __init__(self, size, cap):
        super().__init__(f"group of order {size} exceeds cap {cap}")
        self.size = size
        self.cap = cap


class TooLarge(LatticeError):
    """A search exceeded its configured budget."""


class NotSplitForm(LatticeError):
    pass


class ModulusTooSmall(LatticeError):
    pass


class RankTooSmall(LatticeError):
    pass


class TableMissing(LatticeError):
    pass


class MissingPriorRank(LatticeError):
    pass


class UnsupportedFamily(LatticeError):
    pass


class DslError(LatticeError):
    """Base class for lattice-notation errors."""


class DslSyntaxError(DslError):
    def __init__(self, position, expected, text=""):
        exp = ", ".join(sorted(expected))
        super().__init__(f"syntax error at position {position}: expected {exp}")
        self.position = position
        self.expected = set(expected)
        self.text = text


class BadIndex(DslError):
    pass


class BadTriangleCount(DslError):
    pass
