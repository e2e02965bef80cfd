"""Covering-based dimension estimation over cylinder families.

For sets defined by per-rank digit constraints the count of rank-k
cylinders meeting the set is an exact product, so no interval geometry is
involved.  The slope of ln(count) against ln(n_1...n_k) estimates the
dimension with respect to the cylinder family; that equals the
Hausdorff-Besicovitch dimension only when the family is faithful, which
the sequence diagnostic assesses separately.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from mpmath import mp, mpf

from .codec import DigitString
from .logreal import LogReal
from .precision import ln_int, resolve_dps, working_dps
from .sequences import BasicSequence, is_power_of_ten

FAMILY_NOTE = (
    "slope is the dimension w.r.t. the cylinder family; it equals the "
    "Hausdorff-Besicovitch dimension only when the family is faithful"
)


class EstimatorError(ValueError):
    """Invalid digit-set descriptors or degenerate regressions."""


@dataclass(frozen=True)
class DigitSetSpec:
    """Per-rank admissible digit sets describing the compact set of points
    whose digit at every rank k lies in admissible(k).

    ``mode`` is one of:
      "all"        -- every digit admissible at every rank
      "every_rank" -- the same explicit digit set at every rank
      "exceptions" -- all digits except at exception ranks, where an
                      explicit set applies (exception ranks are either the
                      powers of ten or an explicit list)
      "per_rank"   -- explicit digit lists up to a capped rank
    """

    seq: BasicSequence
    mode: str
    digits: tuple[int, ...] = ()
    exception_ranks: Optional[tuple[int, ...]] = None  # None => powers of ten
    per_rank: tuple[tuple[int, ...], ...] = ()

    # -- constructors ----------------------------------------------------

    @classmethod
    def full(cls, seq: BasicSequence) -> "DigitSetSpec":
        return cls(seq, "all")

    @classmethod
    def constant_digits(cls, seq: BasicSequence, digits: Sequence[int]) -> "DigitSetSpec":
        return cls(seq, "every_rank", digits=_digit_tuple(digits))

    @classmethod
    def with_exceptions(
        cls,
        seq: BasicSequence,
        digits_at_exception: Sequence[int],
        exception_ranks: Optional[Sequence[int]] = None,
    ) -> "DigitSetSpec":
        """All digits admissible except at the exception ranks (default:
        the powers of ten), where only ``digits_at_exception`` are."""
        return cls(
            seq,
            "exceptions",
            digits=_digit_tuple(digits_at_exception),
            exception_ranks=tuple(sorted(set(exception_ranks))) if exception_ranks else None,
        )

    @classmethod
    def from_table(cls, seq: BasicSequence, per_rank: Sequence[Sequence[int]]) -> "DigitSetSpec":
        table = tuple(_digit_tuple(r) for r in per_rank)
        if not table:
            raise EstimatorError("per-rank table must not be empty")
        return cls(seq, "per_rank", per_rank=table)

    @classmethod
    def from_descriptor(cls, seq: BasicSequence, spec) -> "DigitSetSpec":
        """JSON forms: "all" | {"every_rank": [...]} |
        {"except_ranks": "powers_of_10" | [ranks...], "digits_at_exception": [...]} |
        {"per_rank": [[...], ...]}, optionally wrapped as {"admissible": ...}."""
        if isinstance(spec, Mapping) and set(spec) == {"admissible"}:
            spec = spec["admissible"]
        if spec == "all":
            return cls.full(seq)
        if isinstance(spec, Mapping):
            if "every_rank" in spec:
                return cls.constant_digits(seq, spec["every_rank"])
            if "except_ranks" in spec:
                rule = spec["except_ranks"]
                digits = spec.get("digits_at_exception", [0])
                if rule == "powers_of_10":
                    return cls.with_exceptions(seq, digits)
                if isinstance(rule, Sequence) and not isinstance(rule, str):
                    return cls.with_exceptions(seq, digits, exception_ranks=rule)
                raise EstimatorError(f"unknown except_ranks rule {rule!r}")
            if "per_rank" in spec:
                return cls.from_table(seq, spec["per_rank"])
        raise EstimatorError(f"unknown digit-set descriptor {spec!r}")

    # -- queries -----------------------------------------------------------

    def _is_exception(self, k: int) -> bool:
        if self.exception_ranks is None:
            return is_power_of_ten(k)
        return k in self.exception_ranks

    def max_rank(self) -> Optional[int]:
        return len(self.per_rank) if self.mode == "per_rank" else None

    def admissible_count(self, k: int) -> int:
        """|admissible(k)|, validated against 0..n_k-1 without materializing
        the full digit range."""
        n = self.seq.term(k)
        if self.mode == "all":
            return n
        if self.mode == "every_rank":
            return self._validated_count(self.digits, n, k)
        if self.mode == "exceptions":
            if self._is_exception(k):
                return self._validated_count(self.digits, n, k)
            return n
        cap = len(self.per_rank)
        if k > cap:
            raise EstimatorError(f"rank {k} exceeds the {cap}-rank digit table")
        return self._validated_count(self.per_rank[k - 1], n, k)

    def admissible_digits(self, k: int) -> tuple[int, ...]:
        n = self.seq.term(k)
        if self.mode == "all" or (self.mode == "exceptions" and not self._is_exception(k)):
            return tuple(range(n))
        if self.mode == "per_rank":
            cap = len(self.per_rank)
            if k > cap:
                raise EstimatorError(f"rank {k} exceeds the {cap}-rank digit table")
            digits = self.per_rank[k - 1]
        else:
            digits = self.digits
        self._validated_count(digits, n, k)
        return digits

    def contains(self, d: DigitString) -> bool:
        if self.seq.descriptor() != d.seq.descriptor():
            raise EstimatorError("digit string bound to a different sequence")
        for k, a in enumerate(d.digits, 1):
            if self.mode == "all" or (self.mode == "exceptions" and not self._is_exception(k)):
                continue
            if a not in self.admissible_digits(k):
                return False
        return True

    @staticmethod
    def _validated_count(digits: tuple[int, ...], n: int, k: int) -> int:
        if not digits:
            raise EstimatorError(f"admissible set at rank {k} is empty")
        if digits[-1] > n - 1:
            raise EstimatorError(
                f"admissible digit {digits[-1]} at rank {k} outside 0..{n - 1}"
            )
        return len(digits)

    def descriptor(self) -> dict:
        if self.mode == "all":
            admissible = "all"
        elif self.mode == "every_rank":
            admissible = {"every_rank": list(self.digits)}
        elif self.mode == "exceptions":
            admissible = {
                "except_ranks": (
                    "powers_of_10" if self.exception_ranks is None else list(self.exception_ranks)
                ),
                "digits_at_exception": list(self.digits),
            }
        else:
            admissible = {"per_rank": [list(r) for r in self.per_rank]}
        return {"sequence": self.seq.descriptor(), "admissible": admissible}


def _digit_tuple(digits: Sequence[int]) -> tuple[int, ...]:
    out = tuple(sorted(set(int(d) for d in digits)))
    if out and out[0] < 0:
        raise EstimatorError(f"negative digit {out[0]} in admissible set")
    return out


# ---------------------------------------------------------------------------
# counting, premeasure, slope
# ---------------------------------------------------------------------------


def count_cylinders(E: DigitSetSpec, k: int) -> int:
    """Number of rank-k cylinders meeting the set: the exact product of the
    per-rank admissible counts."""
    if k < 1:
        raise EstimatorError(f"rank must be >= 1, got {k}")
    out = 1
    for i in range(1, k + 1):
        out *= E.admissible_count(i)
    return out


def _log_count_and_prefix(E: DigitSetSpec, k: int) -> tuple[mpf, mpf]:
    log_count = mpf(0)
    log_prefix = mpf(0)
    for i in range(1, k + 1):
        log_count += ln_int(E.admissible_count(i))
        log_prefix += E.seq.log_term(i)
    return log_count, log_prefix


def premeasure(E: DigitSetSpec, alpha, k: int, dps: int | None = None) -> mpf:
    """Sum over counted cylinders of length**alpha:
    N_k * (n_1...n_k)**(-alpha), an upper bound for the covering premeasure
    at mesh 1/(n_1...n_k)."""
    alpha = mpf(alpha)
    if not 0 <= alpha <= 1:
        raise EstimatorError(f"alpha must be in [0,1], got {alpha}")
    if k < 1:
        raise EstimatorError(f"rank must be >= 1, got {k}")
    with working_dps(dps):
        log_count, log_prefix = _log_count_and_prefix(E, k)
        return LogReal.from_log(log_count - alpha * log_prefix).to_mpf()


@dataclass
class BoxCountEstimate:
    """Least-squares slope of ln N_k against ln(n_1...n_k), with the RMS
    regression residual and the raw per-rank ratios (whose liminf structure
    a single slope can hide)."""

    slope: mpf
    residual: mpf
    points: list[tuple[int, mpf, mpf]]  # (k, x=ln prefix, y=ln count)
    dps: int
    set_descriptor: dict

    def ratios(self) -> list[tuple[int, mpf]]:
        return [(k, y / x) for k, x, y in self.points]

    def to_jsonable(self) -> dict:
        from mpmath import nstr

        n = self.dps
        return {
            "set": self.set_descriptor,
            "precision_dps": self.dps,
            "slope": nstr(self.slope, n),
            "residual": nstr(self.residual, n),
            "note": FAMILY_NOTE,
            "series": [[k, nstr(y / x, n)] for k, x, y in self.points],
        }

    def csv_rows(self):
        yield ("k", "ratio")
        from mpmath import nstr

        for k, x, y in self.points:
            yield (k, nstr(y / x, self.dps))


def box_dimension_estimate(E: DigitSetSpec, k_max: int, dps: int | None = None) -> BoxCountEstimate:
    """Regress ln N_k on ln(n_1...n_k) over ranks 2..k_max."""
    if k_max < 4:
        raise EstimatorError(f"box dimension estimate needs k_max >= 4, got {k_max}")
    cap = E.max_rank()
    if cap is not None and k_max > cap:
        raise EstimatorError(f"k_max {k_max} exceeds the {cap}-rank digit table")
    used = resolve_dps(dps)
    with working_dps(dps):
        points = []
        log_count = ln_int(E.admissible_count(1)) + mpf(0)
        log_prefix = E.seq.log_term(1) + mpf(0)
        for k in range(2, k_max + 1):
            log_count += ln_int(E.admissible_count(k))
            log_prefix += E.seq.log_term(k)
            points.append((k, log_prefix, log_count))
        m = len(points)
        mean_x = sum(x for _, x, _ in points) / m
        mean_y = sum(y for _, _, y in points) / m
        sxx = sum((x - mean_x) ** 2 for _, x, _ in points)
        if sxx == 0:
            raise EstimatorError("degenerate regression: all abscissae equal")
        sxy = sum((x - mean_x) * (y - mean_y) for _, x, y in points)
        slope = sxy / sxx
        intercept = mean_y - slope * mean_x
        ss_res = sum((y - (intercept + slope * x)) ** 2 for _, x, y in points)
        residual = mp.sqrt(ss_res / m)
        return BoxCountEstimate(
            slope=slope,
            residual=residual,
            points=points,
            dps=used,
            set_descriptor=E.descriptor(),
        )
