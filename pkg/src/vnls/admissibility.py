"""Exact exponent bookkeeping.

Every exponent is either a :class:`fractions.Fraction` or the sentinel
:data:`INF`.  Nothing in this module touches floating point; callers that
need a float use :func:`to_float` at the boundary.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import DegenerateExponent, InadmissiblePair, InvalidExponent


class _Infinity:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"

    def __reduce__(self):
        return (_Infinity, ())

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("vnls-infinity")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True


INF = _Infinity()

Exponent = Union[Fraction, _Infinity]


def as_exponent(value) -> Exponent:
    """Coerce ints, Fractions, decimal strings, ``"inf"`` or float infinity.

    Finite floats are accepted through their decimal ``repr`` so that ``0.5``
    becomes exactly ``1/2`` rather than its binary expansion.
    """
    if value is INF:
        return INF
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InvalidExponent(f"not an exponent: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "infinity", "+inf", "oo", "∞"):
            return INF
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError):
            raise InvalidExponent(f"not an exponent: {value!r}") from None
    if isinstance(value, float):
        if value == float("inf"):
            return INF
        if value != value or value == float("-inf"):
            raise InvalidExponent(f"not an exponent: {value!r}")
        return Fraction(repr(value))
    try:
        import numbers

        if isinstance(value, numbers.Integral):
            return Fraction(int(value))
        if isinstance(value, numbers.Real):
            return as_exponent(float(value))
    except (TypeError, ValueError):
        pass
    raise InvalidExponent(f"not an exponent: {value!r}")


def reciprocal(value) -> Fraction:
    """``1/x`` with ``1/inf = 0``."""
    x = as_exponent(value)
    if x is INF:
        return Fraction(0)
    if x == 0:
        raise InvalidExponent("reciprocal of zero exponent")
    return 1 / x


def from_reciprocal(value: Fraction) -> Exponent:
    return INF if value == 0 else 1 / value


def to_float(value) -> float:
    x = as_exponent(value)
    return float("inf") if x is INF else float(x)


def format_exponent(value) -> str:
    x = as_exponent(value)
    return "inf" if x is INF else str(x)


class PairKind(enum.Enum):
    INADMISSIBLE = "inadmissible"
    SHARP = "sharp"
    NONSHARP = "nonsharp"
    ENDPOINT = "endpoint"


@dataclass(frozen=True)
class PairClass:
    kind: PairKind
    reason: str = ""

    @property
    def admissible(self) -> bool:
        return self.kind is not PairKind.INADMISSIBLE


ADMISSIBILITY_RULE = "admissibility requires 2 <= q, r <= inf, 2/q + n/r <= n/2 and (n, q, r) != (2, 2, inf)"


def classify_pair(n: int, q, r) -> PairClass:
    """Classify a Strichartz exponent pair; an endpoint is reported as ENDPOINT."""
    if n < 1:
        raise InvalidExponent(f"dimension must be >= 1, got {n}")
    q, r = as_exponent(q), as_exponent(r)
    half = Fraction(1, 2)
    if q is not INF and q < 2:
        return PairClass(PairKind.INADMISSIBLE, f"q = {format_exponent(q)} < 2; {ADMISSIBILITY_RULE}")
    if r is not INF and r < 2:
        return PairClass(PairKind.INADMISSIBLE, f"r = {format_exponent(r)} < 2; {ADMISSIBILITY_RULE}")
    if n == 2 and q == 2 and r is INF:
        return PairClass(PairKind.INADMISSIBLE, f"(n, q, r) = (2, 2, inf) is excluded; {ADMISSIBILITY_RULE}")
    lhs = 2 * reciprocal(q) + n * reciprocal(r)
    rhs = Fraction(n) * half
    if lhs > rhs:
        return PairClass(PairKind.INADMISSIBLE, f"2/q + n/r = {lhs} > n/2 = {rhs}; {ADMISSIBILITY_RULE}")
    if lhs < rhs:
        return PairClass(PairKind.NONSHARP)
    if n > 2 and q == 2:
        return PairClass(PairKind.ENDPOINT)
    return PairClass(PairKind.SHARP)


@dataclass(frozen=True)
class AdmissiblePair:
    n: int
    q: Exponent
    r: Exponent
    kind: PairKind

    @property
    def q_float(self) -> float:
        return to_float(self.q)

    @property
    def r_float(self) -> float:
        return to_float(self.r)

    @property
    def is_endpoint(self) -> bool:
        return self.kind is PairKind.ENDPOINT

    def label(self) -> str:
        return f"({format_exponent(self.q)},{format_exponent(self.r)})"


def admissible_pair(n: int, q, r) -> AdmissiblePair:
    """Build a validated pair, raising :class:`InadmissiblePair` otherwise."""
    c = classify_pair(n, q, r)
    if not c.admissible:
        raise InadmissiblePair(c.reason)
    return AdmissiblePair(n, as_exponent(q), as_exponent(r), c.kind)


def endpoint_pair(n: int) -> AdmissiblePair:
    if n <= 2:
        raise InadmissiblePair(f"no endpoint pair exists for n = {n} <= 2")
    return admissible_pair(n, 2, Fraction(2 * n, n - 2))


def sharp_partner(n: int, q) -> Exponent:
    """The r with 2/q + n/r = n/2."""
    inv_r = Fraction(1, 2) - 2 * reciprocal(q) / n
    if inv_r < 0:
        raise InadmissiblePair(f"no sharp partner for q = {format_exponent(q)} in n = {n}")
    return from_reciprocal(inv_r)


def default_pairs(n: int) -> list[AdmissiblePair]:
    """Finite sample of sharp pairs used to approximate the S^0 norm.

    Uses q in {inf, 8, 4}; the n > 2 endpoint is left out on purpose.
    """
    return [admissible_pair(n, q, sharp_partner(n, q)) for q in (INF, Fraction(8), Fraction(4))]


def beta(n: int, r, r_tilde) -> Fraction:
    """``n/2 - 1 - (n/2)(1/r - 1/r~)``, exactly."""
    half_n = Fraction(n, 2)
    return half_n - 1 - half_n * (reciprocal(r) - reciprocal(r_tilde))


class Regularity(enum.Enum):
    CRITICAL = "critical"
    SUBCRITICAL = "subcritical"
    SUPERCRITICAL = "supercritical"


def _positive_power(p) -> Fraction:
    p = as_exponent(p)
    if p is INF or p <= 0:
        raise InvalidExponent(f"nonlinearity power must be a finite p > 0, got {format_exponent(p)}")
    return p


def critical_exponent(n: int, p) -> Fraction:
    """Scaling-critical regularity ``s_c = n/2 - 2/p``."""
    p = _positive_power(p)
    return Fraction(n, 2) - 2 / p


def classify_regularity(s, n: int, p) -> Regularity:
    s = as_exponent(s)
    sc = critical_exponent(n, p)
    if s == sc:
        return Regularity.CRITICAL
    return Regularity.SUBCRITICAL if s > sc else Regularity.SUPERCRITICAL


def mass_critical_power(n: int) -> Fraction:
    return Fraction(4, n)


def energy_critical_power(n: int) -> Fraction:
    if n <= 2:
        raise DegenerateExponent(f"energy-critical power exists only for n > 2, got n = {n}")
    return Fraction(4, n - 2)


def is_mass_critical(n: int, p) -> bool:
    return _positive_power(p) == mass_critical_power(n)


def is_energy_critical(n: int, p) -> bool:
    return n > 2 and _positive_power(p) == energy_critical_power(n)


def solver_exponents(n: int, p) -> tuple[Fraction, Fraction, Fraction]:
    """Lebesgue exponents ``(r, r1, sigma)`` of the small-data contraction.

    ``r = 2n(p+2) / (2(n-2) + np)`` is the sharp partner of ``q = p + 2``;
    ``r1 = 2n(p+2) / (2(n+2) + np)``; ``sigma`` equals ``r``.
    """
    p = _positive_power(p)
    denom = 2 * (n - 2) + n * p
    if denom <= 0:
        raise DegenerateExponent(f"2(n-2) + np = {denom} <= 0 for n = {n}, p = {p}")
    num = 2 * n * (p + 2)
    r = Fraction(num) / denom
    r1 = Fraction(num) / (2 * (n + 2) + n * p)
    return r, r1, r


def contraction_space_exponent(n: int, p) -> Exponent:
    """Spatial exponent of the Picard metric ``L_t^{p+2} L_x^r``.

    Same as ``solver_exponents(n, p)[0]`` when nondegenerate.  When
    ``2(n-2) + np == 0`` the sharp partner of ``q = p + 2`` is ``r = inf``
    (e.g. n = 1, p = 2) and that limit is returned instead of failing.
    """
    p = _positive_power(p)
    if 2 * (n - 2) + n * p == 0:
        return INF
    return solver_exponents(n, p)[0]


def dual_exponent(p) -> Exponent:
    """Hoelder conjugate: 1 <-> inf, 2 <-> 2."""
    p = as_exponent(p)
    if p is not INF and p < 1:
        raise InvalidExponent(f"dual exponent needs p >= 1, got {format_exponent(p)}")
    return from_reciprocal(1 - reciprocal(p))
