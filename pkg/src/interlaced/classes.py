"""Classical matrix classes A/B/C/D and their level bookkeeping."""

from dataclasses import dataclass

from .errors import DomainError

TAGS = ("A", "B", "C", "D")


@dataclass(frozen=True)
class MatrixClass:
    """Type tag of a classical Lie algebra together with its rank.

    ``ambient_dim`` is the size of the Hermitian matrices of the class:
    ``n`` for A, ``2n + 1`` for B and ``2n`` for C and D.
    """

    tag: str
    rank: int

    def __post_init__(self):
        tag = str(self.tag).upper()
        if tag not in TAGS:
            raise DomainError(f"unknown class tag {self.tag!r}")
        object.__setattr__(self, "tag", tag)
        if int(self.rank) != self.rank or self.rank < 0:
            raise DomainError(f"rank must be a nonnegative integer, got {self.rank!r}")
        object.__setattr__(self, "rank", int(self.rank))

    @property
    def ambient_dim(self):
        n = self.rank
        return {"A": n, "B": 2 * n + 1, "C": 2 * n, "D": 2 * n}[self.tag]

    # point-process layout -------------------------------------------------

    @property
    def num_levels(self):
        """Number of levels of the interlaced point process."""
        n = self.rank
        return {"A": n, "B": 2 * n, "C": n, "D": 2 * n - 1}[self.tag]

    def level_count(self, r):
        """Number of points at level ``r`` (1-based)."""
        self.check_level(r)
        if self.tag in ("A", "C"):
            return r
        return (r + 1) // 2

    def check_level(self, r):
        if int(r) != r or not 1 <= r <= self.num_levels:
            raise DomainError(f"level {r!r} out of range 1..{self.num_levels} for {self}")

    def levels(self):
        return range(1, self.num_levels + 1)

    def __str__(self):
        return f"{self.tag}{self.rank}"


def as_class(cls, rank=None):
    """Coerce a tag string or :class:`MatrixClass` into a :class:`MatrixClass`."""
    if isinstance(cls, MatrixClass):
        return cls
    if rank is None:
        raise DomainError("a rank is required when the class is given as a tag")
    return MatrixClass(cls, rank)


def chamber_violation(cls, v, tol=1e-10):
    """Describe how ``v`` fails to lie in the closed Weyl chamber, or None.

    A: v_1 >= ... >= v_n; B, C: additionally v_n >= 0;
    D: v_1 >= ... >= v_{n-1} >= |v_n|.
    """
    tag = cls.tag if isinstance(cls, MatrixClass) else str(cls).upper()
    v = [float(t) for t in v]
    n = len(v)
    if tag == "D" and n >= 1:
        body, last = v[:-1], abs(v[-1])
        seq = body + [last]
    else:
        seq = v
    for i in range(len(seq) - 1):
        if seq[i] < seq[i + 1] - tol:
            return f"entries {i + 1} and {i + 2} are not weakly decreasing"
    if tag in ("B", "C") and n and v[-1] < -tol:
        return "last entry is negative"
    return None


def in_closed_chamber(cls, v, tol=1e-10):
    return chamber_violation(cls, v, tol) is None
