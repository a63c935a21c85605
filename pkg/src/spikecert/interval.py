"""Outward-rounded interval arithmetic on hardware doubles.

Containment is the only contract: every operation returns an interval that
contains the exact real result for all points of its operands.  Endpoints are
doubles; directed rounding is emulated with error-free transformations
(two-sum / Dekker product) so that exactly representable results keep exact
endpoints, with a one-ulp ``math.nextafter`` nudge otherwise.  Transcendental
functions call libm and widen by two ulps per endpoint, which covers any
faithfully rounded implementation.

A NaN endpoint never propagates silently: it collapses to the distinguished
EMPTY interval, which poisons everything computed from it.  Division by an
interval containing zero raises instead, since a certification pipeline must
not continue across a possible singularity.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation, localcontext

import numpy as np

__all__ = [
    "IntervalScalar",
    "IntervalMatrix",
    "LogMagnitude",
    "IntervalError",
    "SingularDivisionError",
    "IntervalOverflowError",
    "EMPTY",
    "make_interval",
    "arith",
    "exp_iv",
    "ln_iv",
    "sqrt_iv",
    "intpow_iv",
    "inf_norm",
    "log10_of_exp",
    "interval_from_decimal",
    "interval_from_mid_rad_decimal",
    "float_to_decimal_string",
    "PI",
    "LN10",
]

_INF = math.inf
_NAN = math.nan
_MAX = sys.float_info.max
_U = 2.0 ** -53  # unit roundoff for binary64


class IntervalError(ValueError):
    """Base for interval-domain violations."""


class SingularDivisionError(IntervalError):
    """Division by an interval containing zero."""


class IntervalOverflowError(IntervalError):
    """Result magnitude exceeds double range; use the log-magnitude path."""


def _down(x: float) -> float:
    return math.nextafter(x, -_INF)


def _up(x: float) -> float:
    return math.nextafter(x, _INF)


def _two_sum(a: float, b: float):
    # Knuth branch-free two-sum: a + b = s + e exactly (no overflow assumed).
    s = a + b
    t = s - a
    e = (a - (s - t)) + (b - t)
    return s, e


_SPLIT = 134217729.0  # 2**27 + 1, Veltkamp splitting constant

# Dekker's product is exact only away from over/underflow; outside this band
# we fall back to an unconditional one-ulp nudge.
_EFT_LO = 1e-290
_EFT_HI = 1e300


def _prod_err(a: float, b: float, p: float) -> float:
    c = _SPLIT * a
    ah = c - (c - a)
    al = a - ah
    c = _SPLIT * b
    bh = c - (c - b)
    bl = b - bh
    return ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _eft_ok(a: float, b: float, p: float) -> bool:
    return abs(a) < _EFT_HI and abs(b) < _EFT_HI and _EFT_LO < abs(p) < _EFT_HI


def _add_down(a: float, b: float) -> float:
    s = a + b
    if s != s:
        return -_INF
    if math.isinf(s):
        return s if s < 0 else _MAX
    _, e = _two_sum(a, b)
    return _down(s) if e < 0 else s


def _add_up(a: float, b: float) -> float:
    s = a + b
    if s != s:
        return _INF
    if math.isinf(s):
        return s if s > 0 else -_MAX
    _, e = _two_sum(a, b)
    return _up(s) if e > 0 else s


def _mul_down(a: float, b: float) -> float:
    if a == 0.0 or b == 0.0:
        return 0.0
    p = a * b
    if p != p:
        return -_INF
    if math.isinf(p):
        return p if p < 0 else _MAX
    if _eft_ok(a, b, p):
        e = _prod_err(a, b, p)
        return _down(p) if e < 0 else p
    if p == 0.0:  # full underflow: keep the sign of the true product
        return 0.0 if (a > 0) == (b > 0) else -5e-324
    return _down(p)


def _mul_up(a: float, b: float) -> float:
    if a == 0.0 or b == 0.0:
        return 0.0
    p = a * b
    if p != p:
        return _INF
    if math.isinf(p):
        return p if p > 0 else -_MAX
    if _eft_ok(a, b, p):
        e = _prod_err(a, b, p)
        return _up(p) if e > 0 else p
    if p == 0.0:
        return 5e-324 if (a > 0) == (b > 0) else 0.0
    return _up(p)


def _residual_sign(a: float, b: float, q: float) -> int:
    # Sign of a - q*b, exact: q*b = p + e by Dekker, a - p exact by Sterbenz
    # (p is within one rounding of a), and the sign of a float difference is
    # the sign of the real difference.
    p = q * b
    e = _prod_err(q, b, p)
    d = (a - p) - e
    return (d > 0) - (d < 0)


def _div_down(a: float, b: float) -> float:
    if a == 0.0:
        return 0.0
    q = a / b
    if q != q:
        return -_INF
    if math.isinf(q):
        return q if q < 0 else _MAX
    if _eft_ok(q, b, q * b):
        r = _residual_sign(a, b, q)
        if r == 0:
            return q
        # true quotient = q + r/b in sign
        return q if (r > 0) == (b > 0) else _down(q)
    if q == 0.0:
        return 0.0 if (a > 0) == (b > 0) else -5e-324
    return _down(q)


def _div_up(a: float, b: float) -> float:
    if a == 0.0:
        return 0.0
    q = a / b
    if q != q:
        return _INF
    if math.isinf(q):
        return q if q > 0 else -_MAX
    if _eft_ok(q, b, q * b):
        r = _residual_sign(a, b, q)
        if r == 0:
            return q
        return q if (r > 0) != (b > 0) else _up(q)
    if q == 0.0:
        return 5e-324 if (a > 0) == (b > 0) else 0.0
    return _up(q)


def _sqrt_down(x: float) -> float:
    if x == 0.0:
        return 0.0
    s = math.sqrt(x)
    if _eft_ok(s, s, s * s):
        p = s * s
        e = _prod_err(s, s, p)
        if p > x or (p == x and e > 0):
            return _down(s)
        return s
    return _down(s)


def _sqrt_up(x: float) -> float:
    if x == 0.0:
        return 0.0
    s = math.sqrt(x)
    if _eft_ok(s, s, s * s):
        p = s * s
        e = _prod_err(s, s, p)
        if p < x or (p == x and e < 0):
            return _up(s)
        return s
    return _up(s)


@dataclass(frozen=True)
class IntervalScalar:
    """Closed interval [lo, hi] of doubles; NaN endpoints mean EMPTY/poisoned."""

    lo: float
    hi: float

    def __post_init__(self):
        lo = float(self.lo)
        hi = float(self.hi)
        if lo != lo or hi != hi:
            object.__setattr__(self, "lo", _NAN)
            object.__setattr__(self, "hi", _NAN)
            return
        if lo > hi:
            raise IntervalError(f"inverted endpoints lo={lo!r} > hi={hi!r}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    # -- state ---------------------------------------------------------------

    @property
    def is_empty(self) -> bool:
        return self.lo != self.lo

    @property
    def mid(self) -> float:
        if self.is_empty:
            return _NAN
        return 0.5 * self.lo + 0.5 * self.hi

    @property
    def rad(self) -> float:
        if self.is_empty:
            return _NAN
        m = self.mid
        return _up(max(m - self.lo, self.hi - m))

    @property
    def width(self) -> float:
        if self.is_empty:
            return _NAN
        return _add_up(self.hi, -self.lo)

    def contains(self, x: float) -> bool:
        if self.is_empty:
            return False
        return self.lo <= x <= self.hi

    def encloses(self, other: "IntervalScalar") -> bool:
        if self.is_empty or other.is_empty:
            return False
        return self.lo <= other.lo and other.hi <= self.hi

    def mag(self) -> float:
        """Largest absolute value over the interval."""
        return max(abs(self.lo), abs(self.hi))

    def mig(self) -> float:
        """Smallest absolute value over the interval (0 if it spans zero)."""
        if self.lo <= 0.0 <= self.hi:
            return 0.0
        return min(abs(self.lo), abs(self.hi))

    # -- arithmetic ----------------------------------------------------------

    @staticmethod
    def _coerce(x) -> "IntervalScalar":
        if isinstance(x, IntervalScalar):
            return x
        if isinstance(x, (int, float)):
            f = float(x)
            if not math.isfinite(f):
                raise IntervalError(f"non-finite scalar operand {x!r}")
            return IntervalScalar(f, f)
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        if self.is_empty or b.is_empty:
            return EMPTY
        return IntervalScalar(_add_down(self.lo, b.lo), _add_up(self.hi, b.hi))

    __radd__ = __add__

    def __neg__(self):
        if self.is_empty:
            return EMPTY
        return IntervalScalar(-self.hi, -self.lo)

    def __sub__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        return self + (-b)

    def __rsub__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        return b + (-self)

    def __mul__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        if self.is_empty or b.is_empty:
            return EMPTY
        pairs = ((self.lo, b.lo), (self.lo, b.hi), (self.hi, b.lo), (self.hi, b.hi))
        return IntervalScalar(
            min(_mul_down(x, y) for x, y in pairs),
            max(_mul_up(x, y) for x, y in pairs),
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        if self.is_empty or b.is_empty:
            return EMPTY
        if b.lo <= 0.0 <= b.hi:
            raise SingularDivisionError(
                f"divisor {b} contains zero (possible singularity)"
            )
        pairs = ((self.lo, b.lo), (self.lo, b.hi), (self.hi, b.lo), (self.hi, b.hi))
        return IntervalScalar(
            min(_div_down(x, y) for x, y in pairs),
            max(_div_up(x, y) for x, y in pairs),
        )

    def __rtruediv__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        return b / self

    def __abs__(self):
        if self.is_empty:
            return EMPTY
        return IntervalScalar(self.mig(), self.mag())

    def hull(self, other: "IntervalScalar") -> "IntervalScalar":
        if self.is_empty:
            return other
        if other.is_empty:
            return self
        return IntervalScalar(min(self.lo, other.lo), max(self.hi, other.hi))

    def __repr__(self):
        if self.is_empty:
            return "IntervalScalar(EMPTY)"
        return f"IntervalScalar({self.lo!r}, {self.hi!r})"


EMPTY = IntervalScalar(_NAN, _NAN)
ZERO = IntervalScalar(0.0, 0.0)
ONE = IntervalScalar(1.0, 1.0)


def make_interval(mid: float, rad: float) -> IntervalScalar:
    """Interval [mid - rad, mid + rad] with outward rounding.

    A zero radius yields the degenerate point [mid, mid] exactly.
    """
    mid = float(mid)
    rad = float(rad)
    if not (math.isfinite(mid) and math.isfinite(rad)):
        raise IntervalError(
            f"non-finite midpoint/radius ({mid!r}, {rad!r}); corrupt certificate data?"
        )
    if rad < 0.0:
        raise IntervalError(f"negative radius {rad!r}")
    if rad == 0.0:
        return IntervalScalar(mid, mid)
    return IntervalScalar(_add_down(mid, -rad), _add_up(mid, rad))


def arith(op: str, a: IntervalScalar, b: IntervalScalar) -> IntervalScalar:
    """Dispatch one of the four basic operations by name."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise IntervalError(f"unknown operation {op!r}")


# -- elementary functions ----------------------------------------------------

_TINY_EXP_UP = 1e-320  # safe ceiling for a fully underflowed exp


def exp_iv(x: IntervalScalar) -> IntervalScalar:
    """Enclosure of exp over x.  Widens libm by 2 ulps per endpoint."""
    if x.is_empty:
        return EMPTY
    try:
        vlo = math.exp(x.lo)
        vhi = math.exp(x.hi)
    except OverflowError:
        raise IntervalOverflowError(
            f"exp({x}) exceeds double range; use the log-magnitude path"
        ) from None
    if vhi < 2.3e-308:
        # deep underflow band: keep a sound, deliberately slack enclosure
        hi = _TINY_EXP_UP if vhi == 0.0 else min(vhi * 4.0, _TINY_EXP_UP)
        return IntervalScalar(0.0 if vlo == 0.0 else vlo * 0.25, hi)
    lo = max(0.0, _down(_down(vlo)))
    hi = _up(_up(vhi))
    if vhi == 0.0:
        hi = _TINY_EXP_UP
    return IntervalScalar(lo, hi)


def ln_iv(x: IntervalScalar) -> IntervalScalar:
    """Enclosure of the natural log; requires x strictly positive."""
    if x.is_empty:
        return EMPTY
    if x.lo <= 0.0:
        raise IntervalError(f"ln of non-positive interval {x}")
    return IntervalScalar(_down(_down(math.log(x.lo))), _up(_up(math.log(x.hi))))


def sqrt_iv(x: IntervalScalar) -> IntervalScalar:
    if x.is_empty:
        return EMPTY
    if x.lo < 0.0:
        raise IntervalError(f"sqrt of partially negative interval {x}")
    return IntervalScalar(_sqrt_down(x.lo), _sqrt_up(x.hi))


def intpow_iv(x: IntervalScalar, n: int) -> IntervalScalar:
    """x**n for integer n >= 0 with per-step directed rounding."""
    if n < 0:
        raise IntervalError("negative exponent; divide explicitly")
    if x.is_empty:
        return EMPTY
    if n == 0:
        return ONE
    a = abs(x)

    def pow_pos(v: float, up: bool) -> float:
        acc = 1.0
        for _ in range(n):
            acc = _mul_up(acc, v) if up else _mul_down(acc, v)
        return acc

    if n % 2 == 0:
        return IntervalScalar(pow_pos(a.lo, False), pow_pos(a.hi, True))
    # odd powers are monotone
    def signed(v: float, up: bool) -> float:
        if v >= 0:
            return pow_pos(v, up)
        m = pow_pos(-v, not up)
        return -m

    return IntervalScalar(signed(x.lo, False), signed(x.hi, True))


def pow_seven_halves(k: int) -> IntervalScalar:
    """Enclosure of k**3.5 for a positive integer k (k**3 * sqrt(k))."""
    if k < 1:
        raise IntervalError(f"k**3.5 needs k >= 1, got {k}")
    kk = IntervalScalar(float(k), float(k))
    return intpow_iv(kk, 3) * sqrt_iv(kk)


def _const_interval(x: float, ulps: int = 1) -> IntervalScalar:
    lo, hi = x, x
    for _ in range(ulps):
        lo = _down(lo)
        hi = _up(hi)
    return IntervalScalar(lo, hi)


PI = _const_interval(math.pi)
LN10 = _const_interval(math.log(10.0), ulps=2)


# -- log-domain magnitudes ---------------------------------------------------


@dataclass(frozen=True)
class LogMagnitude:
    """Magnitude sign * 10**log10_value for quantities far below double range.

    ``log10_value`` is a certified upper bound on log10 of the magnitude, the
    conservative direction for the error bounds this type carries.  A zero
    sign denotes an exactly zero magnitude.
    """

    log10_value: float
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise IntervalError(f"sign must be -1, 0 or +1, got {self.sign!r}")
        if self.sign == 0:
            object.__setattr__(self, "log10_value", -_INF)
        elif self.log10_value != self.log10_value:
            raise IntervalError("NaN log10 magnitude")

    @staticmethod
    def zero() -> "LogMagnitude":
        return LogMagnitude(-_INF, 0)

    def scaled_by_log10(self, extra: float) -> "LogMagnitude":
        """Add ``extra`` (an upper bound in log10) to the magnitude."""
        if self.sign == 0:
            return self
        return LogMagnitude(_up(_up(self.log10_value + extra)), self.sign)

    def to_interval(self) -> IntervalScalar:
        """Promote to a linear-domain upper-bound interval [0, m].

        Magnitudes below the subnormal floor saturate to the smallest positive
        double, which is still a valid upper bound for them.
        """
        if self.sign == 0:
            return ZERO
        if self.log10_value > 308.0:
            raise IntervalOverflowError(
                f"magnitude 10**{self.log10_value} exceeds double range"
            )
        v = 10.0 ** max(self.log10_value, -323.0)
        v = _up(_up(v * (1.0 + 4e-16)))
        if v == 0.0:
            v = 5e-324
        return IntervalScalar(0.0, v)


def log10_of_exp(x) -> LogMagnitude:
    """Log-domain magnitude of exp(-x): log10_value is an upper bound on -x/ln 10."""
    xi = x if isinstance(x, IntervalScalar) else IntervalScalar(float(x), float(x))
    if xi.is_empty:
        raise IntervalError("poisoned exponent")
    v = (-xi) / LN10
    return LogMagnitude(v.hi, 1)


# -- decimal certificate endpoints -------------------------------------------

_DEC_PREC = 1200  # enough digits for exact arithmetic on double expansions


def _float_rounded_down(d: Decimal) -> float:
    try:
        f = float(d)
    except OverflowError:
        f = _INF if d > 0 else -_INF
    if math.isinf(f):
        if f > 0:
            return _MAX
        raise IntervalError(f"decimal {d} below double range")
    while Decimal(f) > d:
        f = _down(f)
    return f


def _float_rounded_up(d: Decimal) -> float:
    try:
        f = float(d)
    except OverflowError:
        f = _INF if d > 0 else -_INF
    if math.isinf(f):
        if f < 0:
            return -_MAX
        raise IntervalError(f"decimal {d} above double range")
    while Decimal(f) < d:
        f = _up(f)
    return f


def _parse_decimal(s: str, what: str) -> Decimal:
    try:
        d = Decimal(s)
    except InvalidOperation:
        raise IntervalError(f"unparseable decimal for {what}: {s!r}") from None
    if not d.is_finite():
        raise IntervalError(f"non-finite decimal for {what}: {s!r}")
    return d


def interval_from_decimal(s: str) -> IntervalScalar:
    """Tightest double interval containing the decimal value ``s``."""
    d = _parse_decimal(s, "value")
    return IntervalScalar(_float_rounded_down(d), _float_rounded_up(d))


def interval_from_mid_rad_decimal(mid: str, rad: str) -> IntervalScalar:
    """Outward-rounded enclosure of [mid - rad, mid + rad], decimals as strings.

    The endpoint arithmetic runs in exact decimal, so a certificate written by
    :func:`float_to_decimal_string` round-trips to identical double endpoints.
    """
    dm = _parse_decimal(mid, "midpoint")
    dr = _parse_decimal(rad, "radius")
    if dr < 0:
        raise IntervalError(f"negative radius {rad!r}")
    with localcontext() as ctx:
        ctx.prec = _DEC_PREC
        lo = dm - dr
        hi = dm + dr
    return IntervalScalar(_float_rounded_down(lo), _float_rounded_up(hi))


def float_to_decimal_string(f: float) -> str:
    """Exact decimal expansion of a double, suitable for lossless round-trips."""
    if not math.isfinite(f):
        raise IntervalError(f"non-finite value {f!r} cannot be serialized")
    return str(Decimal(f))


# -- dense interval matrices ---------------------------------------------------


def _np_down(a: np.ndarray, steps: int = 1) -> np.ndarray:
    for _ in range(steps):
        a = np.nextafter(a, -np.inf)
    return a


def _np_up(a: np.ndarray, steps: int = 1) -> np.ndarray:
    for _ in range(steps):
        a = np.nextafter(a, np.inf)
    return a


class IntervalMatrix:
    """Dense interval matrix as paired float64 endpoint arrays."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo: np.ndarray, hi: np.ndarray):
        lo = np.asarray(lo, dtype=np.float64)
        hi = np.asarray(hi, dtype=np.float64)
        if lo.shape != hi.shape or lo.ndim != 2:
            raise IntervalError(f"endpoint shape mismatch {lo.shape} vs {hi.shape}")
        if np.isnan(lo).any() or np.isnan(hi).any():
            raise IntervalError("NaN endpoint in interval matrix")
        if (lo > hi).any():
            raise IntervalError("inverted endpoints in interval matrix")
        self.lo = lo
        self.hi = hi

    @classmethod
    def from_point(cls, a: np.ndarray) -> "IntervalMatrix":
        a = np.asarray(a, dtype=np.float64)
        return cls(a.copy(), a.copy())

    @classmethod
    def from_scalars(cls, rows) -> "IntervalMatrix":
        lo = np.array([[e.lo for e in row] for row in rows], dtype=np.float64)
        hi = np.array([[e.hi for e in row] for row in rows], dtype=np.float64)
        return cls(lo, hi)

    @property
    def shape(self):
        return self.lo.shape

    def entry(self, i: int, j: int) -> IntervalScalar:
        return IntervalScalar(float(self.lo[i, j]), float(self.hi[i, j]))

    def midpoint(self) -> np.ndarray:
        return 0.5 * self.lo + 0.5 * self.hi

    def mag(self) -> np.ndarray:
        return np.maximum(np.abs(self.lo), np.abs(self.hi))

    def mig(self) -> np.ndarray:
        m = np.minimum(np.abs(self.lo), np.abs(self.hi))
        m[(self.lo <= 0.0) & (self.hi >= 0.0)] = 0.0
        return m


def _gamma_factor(n: int) -> float:
    # a priori dot-product rounding bound, padded
    g = (n + 2) * _U
    return 1.01 * g / (1.0 - g)


def point_times_interval(A: np.ndarray, B: IntervalMatrix) -> IntervalMatrix:
    """Enclosure of A @ B for a point matrix A, via midpoint-radius with an
    a priori rounding bound on the float64 matmuls."""
    A = np.asarray(A, dtype=np.float64)
    n = A.shape[1]
    if n != B.shape[0]:
        raise IntervalError(f"shape mismatch {A.shape} @ {B.shape}")
    Bm = 0.5 * B.lo + 0.5 * B.hi
    Br = _np_up(np.maximum(Bm - B.lo, B.hi - Bm), steps=2)
    g = _gamma_factor(n)
    absA = np.abs(A)
    P = A @ Bm
    scale = absA @ (np.abs(Bm) + Br)
    rad = (absA @ Br) + g * scale + n * 1e-300
    rad = _np_up(rad * (1.0 + 4e-16), steps=2)
    return IntervalMatrix(_np_down(P - rad, steps=2), _np_up(P + rad, steps=2))


def identity_minus(P: IntervalMatrix) -> IntervalMatrix:
    """Enclosure of I - P (one outward ulp absorbs the diagonal rounding)."""
    n, m = P.shape
    if n != m:
        raise IntervalError("identity_minus needs a square matrix")
    I = np.eye(n)
    return IntervalMatrix(_np_down(I - P.hi), _np_up(I - P.lo))


def inf_norm(m: IntervalMatrix) -> IntervalScalar:
    """Enclosure of the max-row-sum norm over all point matrices in m."""
    if not isinstance(m, IntervalMatrix):
        raise IntervalError("inf_norm expects an IntervalMatrix")
    n = m.shape[1]
    g = _gamma_factor(n)
    hi_rows = m.mag().sum(axis=1)
    hi = _up(_up(float(hi_rows.max()) * (1.0 + g)))
    lo_rows = m.mig().sum(axis=1)
    lo = max(0.0, _down(float(lo_rows.max()) * (1.0 - g)))
    return IntervalScalar(lo, hi)
