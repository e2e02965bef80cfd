"""Exact conversions between points of [0,1], digit strings, and cylinder
intervals of a Cantor series expansion.

Everything here is integer/rational arithmetic; no floats are produced.
The greedy digit extraction picks the terminating expansion at points with
two representations, and the right endpoint 1 has no expansion at all.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .sequences import BasicSequence

# Rank cap keeps denominators (factorial-like products) from growing
# without bound by accident.
MAX_RANK = 10**6

# children() materializes a list; refuse branching factors that would not
# fit in memory (the counterexample sequence branches 10**10 ways at rank 10).
MAX_CHILDREN = 10**7


class CodecError(ValueError):
    """Digit out of range, point without an expansion, or oversize request."""


@dataclass(frozen=True)
class DigitString:
    """A finite digit prefix (a_1, ..., a_k) bound to its sequence."""

    seq: BasicSequence
    digits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "digits", tuple(int(d) for d in self.digits))
        if len(self.digits) > MAX_RANK:
            raise CodecError(f"rank {len(self.digits)} exceeds MAX_RANK = {MAX_RANK}")
        for i, d in enumerate(self.digits, 1):
            n = self.seq.term(i)
            if not 0 <= d <= n - 1:
                raise CodecError(f"digit {d} at rank {i} outside 0..{n - 1}")

    @property
    def rank(self) -> int:
        return len(self.digits)

    def truncate(self, k: int) -> "DigitString":
        if not 0 <= k <= self.rank:
            raise CodecError(f"cannot truncate rank-{self.rank} string to {k}")
        return DigitString(self.seq, self.digits[:k])

    def extend(self, digit: int) -> "DigitString":
        return DigitString(self.seq, self.digits + (int(digit),))

    def to_jsonable(self) -> dict:
        return {"sequence": self.seq.descriptor(), "digits": list(self.digits)}


@dataclass(frozen=True)
class Cylinder:
    """Closed interval of all points whose expansion starts with ``digits``.

    left = sum a_i / (n_1...n_i), length = 1 / (n_1...n_k), exact rationals.
    """

    digits: DigitString
    left: Fraction
    right: Fraction
    length: Fraction

    @property
    def rank(self) -> int:
        return self.digits.rank

    def to_jsonable(self) -> dict:
        return {
            "digits": self.digits.to_jsonable(),
            "left": f"{self.left.numerator}/{self.left.denominator}",
            "right": f"{self.right.numerator}/{self.right.denominator}",
            "length": f"{self.length.numerator}/{self.length.denominator}",
        }


def encode(x, seq: BasicSequence, k: int) -> DigitString:
    """Greedy digit extraction of x in [0,1) to rank k.

    a_i = floor(x_i * n_i), x_{i+1} = x_i * n_i - a_i.  The result is the
    rank-k cylinder whose half-open interval [left, left + length) contains x.
    """
    x = Fraction(x)
    if not 0 <= x < 1:
        raise CodecError(f"encode needs 0 <= x < 1, got {x}")
    if k < 0:
        raise CodecError(f"rank must be >= 0, got {k}")
    if k > MAX_RANK:
        raise CodecError(f"rank {k} exceeds MAX_RANK = {MAX_RANK}")
    digits = []
    for i in range(1, k + 1):
        x *= seq.term(i)
        a = int(x)  # floor for non-negative rationals
        digits.append(a)
        x -= a
    return DigitString(seq, tuple(digits))


def decode(d: DigitString) -> Fraction:
    """Exact value sum a_i / (n_1 ... n_i) of a digit string (its cylinder's
    left endpoint); the empty string decodes to 0."""
    num = 0
    den = 1
    for i, a in enumerate(d.digits, 1):
        n = d.seq.term(i)
        num = num * n + a
        den *= n
    return Fraction(num, den)


def cylinder(d: DigitString) -> Cylinder:
    """The cylinder interval of a digit string, with exact endpoints."""
    num = 0
    den = 1
    for i, a in enumerate(d.digits, 1):
        n = d.seq.term(i)
        num = num * n + a
        den *= n
    left = Fraction(num, den)
    length = Fraction(1, den)
    return Cylinder(digits=d, left=left, right=left + length, length=length)


def root_cylinder(seq: BasicSequence) -> Cylinder:
    return cylinder(DigitString(seq, ()))


def children(c: Cylinder) -> list[Cylinder]:
    """The rank-(k+1) sub-cylinders of c in left-to-right order; their
    union is c and their lengths sum to its length."""
    k = c.rank
    n = c.digits.seq.term(k + 1)
    if n > MAX_CHILDREN:
        raise CodecError(f"refusing to materialize {n} children (cap {MAX_CHILDREN})")
    out = []
    step = c.length / n
    for a in range(n):
        d = c.digits.extend(a)
        left = c.left + a * step
        out.append(Cylinder(digits=d, left=left, right=left + step, length=step))
    return out


def iter_digit_strings(seq: BasicSequence, k: int) -> Iterator[DigitString]:
    """All rank-k digit strings in lexicographic order (small ranks only)."""
    ranges = [range(seq.term(i)) for i in range(1, k + 1)]
    total = 1
    for r in ranges:
        total *= len(r)
        if total > MAX_CHILDREN:
            raise CodecError(f"rank-{k} enumeration would exceed {MAX_CHILDREN} strings")
    for combo in itertools.product(*ranges):
        yield DigitString(seq, combo)
