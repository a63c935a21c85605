"""Weighted analytic sequence norms and the profile-certificate file format.

A coefficient vector lives in a scale of Hilbert spaces with weights
(1+j^2)^s e^{2 tau j}.  Two members matter: the profile space (s=6,
tau=0.08) where candidate profiles live, and the source space (s=7,
tau=0.081) that receives the operator output.  Norm upper endpoints are
certified bounds; everything here rounds outward.

Certificates are JSON files whose numbers are decimal strings, so the
published 32-digit coefficient table survives byte-for-byte and a
load/save/load cycle reproduces identical double endpoints.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import Decimal, localcontext
from typing import Mapping, Optional

from .errors import CertificateError
from .interval import (
    LN10,
    IntervalScalar,
    LogMagnitude,
    _parse_decimal,
    exp_iv,
    float_to_decimal_string,
    interval_from_decimal,
    interval_from_mid_rad_decimal,
    intpow_iv,
    ln_iv,
    pow_seven_halves,
    sqrt_iv,
)

__all__ = [
    "WeightedSpace",
    "PROFILE_SPACE",
    "SOURCE_SPACE",
    "CoefficientVector",
    "ProfileCertificate",
    "weight_sq",
    "weight_sq_log10",
    "norm",
    "norm_ratio_multiplier",
    "load_certificate",
    "save_certificate",
    "CONSTANT_NAMES",
]

_ZERO = IntervalScalar(0.0, 0.0)


@dataclass(frozen=True)
class WeightedSpace:
    """Weight parameters: polynomial power s and analyticity radius tau."""

    s: float
    tau: float

    def __post_init__(self):
        if not (self.s >= 0.0):
            raise ValueError(f"polynomial power must be nonnegative, got {self.s!r}")
        if not (self.tau > 0.0):
            raise ValueError(f"analyticity radius must be positive, got {self.tau!r}")


PROFILE_SPACE = WeightedSpace(s=6.0, tau=0.08)
SOURCE_SPACE = WeightedSpace(s=7.0, tau=0.081)

# the bridge decay rate is the literal decimal 0.001 = 0.081 - 0.080, enclosed
# so results are sound for the exact decimal, not just its double rounding
_RATE_001 = interval_from_decimal("0.001")


def weight_sq(j: int, space: WeightedSpace) -> IntervalScalar:
    """Enclosure of the squared weight (1+j^2)^s e^{2 tau j}.

    Raises IntervalOverflowError once e^{2 tau j} leaves double range
    (j of order 4400 for tau=0.08); callers needing such modes should work
    with :func:`weight_sq_log10` instead.
    """
    if not isinstance(j, int) or j < 1:
        raise ValueError(f"mode index must be a positive integer, got {j!r}")
    jj = intpow_iv(IntervalScalar(float(j), float(j)), 2)
    base = jj + 1.0
    s = space.s
    if float(s).is_integer():
        poly = intpow_iv(base, int(s))
    else:
        poly = exp_iv(ln_iv(base) * s)
    rate = IntervalScalar(2.0 * space.tau, 2.0 * space.tau) * float(j)
    return poly * exp_iv(rate)


def weight_sq_log10(j: int, space: WeightedSpace) -> LogMagnitude:
    """Upper bound on log10 of the squared weight, for indices past overflow."""
    if not isinstance(j, int) or j < 1:
        raise ValueError(f"mode index must be a positive integer, got {j!r}")
    jj = intpow_iv(IntervalScalar(float(j), float(j)), 2)
    lnval = ln_iv(jj + 1.0) * space.s + IntervalScalar(
        2.0 * space.tau, 2.0 * space.tau
    ) * float(j)
    return LogMagnitude((lnval / LN10).hi, 1)


@dataclass(frozen=True)
class CoefficientVector:
    """Sparse mode-indexed coefficients; absent indices are exactly zero."""

    entries: tuple = ()
    max_mode: int = 0

    def __post_init__(self):
        raw = self.entries
        pairs = raw.items() if isinstance(raw, Mapping) else raw
        ent = []
        seen = set()
        for j, c in pairs:
            j = int(j)
            if j < 1:
                raise CertificateError(f"mode index must be >= 1, got {j}")
            if j in seen:
                raise CertificateError(f"duplicate mode index {j}")
            seen.add(j)
            if not isinstance(c, IntervalScalar):
                raise CertificateError(f"mode {j}: coefficient is not an interval")
            ent.append((j, c))
        ent = tuple(sorted(ent))
        top = max((j for j, _ in ent), default=0)
        m = self.max_mode if self.max_mode else top
        if m < top:
            raise CertificateError(f"max_mode {m} below largest index {top}")
        object.__setattr__(self, "entries", ent)
        object.__setattr__(self, "max_mode", m)

    @classmethod
    def from_dict(cls, d: Mapping[int, IntervalScalar], max_mode: int = 0):
        return cls(tuple(d.items()), max_mode)

    @property
    def support(self):
        return tuple(j for j, _ in self.entries)

    def get(self, j: int) -> IntervalScalar:
        for jj, c in self.entries:
            if jj == j:
                return c
        return _ZERO

    def items(self):
        return iter(self.entries)

    def is_poisoned(self) -> bool:
        return any(c.is_empty for _, c in self.entries)

    def scaled(self, lam) -> "CoefficientVector":
        return CoefficientVector(
            tuple((j, c * lam) for j, c in self.entries), self.max_mode
        )

    def __add__(self, other):
        if not isinstance(other, CoefficientVector):
            return NotImplemented
        d = dict(self.entries)
        for j, c in other.entries:
            d[j] = d[j] + c if j in d else c
        return CoefficientVector(
            tuple(d.items()), max(self.max_mode, other.max_mode)
        )

    def __len__(self):
        return len(self.entries)


def norm(c: CoefficientVector, space: WeightedSpace) -> IntervalScalar:
    """Enclosure of the weighted l2 norm sqrt(sum_j w^2(j) |c_j|^2).

    Terms accumulate in descending index order; interval soundness does not
    depend on the order, it just keeps the midpoints tighter.
    """
    acc = _ZERO
    for j, cj in sorted(c.entries, reverse=True):
        if cj.is_empty:
            return cj  # poison propagates to the norm
        a = abs(cj)
        acc = acc + weight_sq(j, space) * a * a
    return sqrt_iv(acc)


def norm_ratio_multiplier(k: int) -> IntervalScalar:
    """Enclosure of k^{7/2} (1+k^2)^{-1/2} e^{-0.001 k}.

    This is the product of the source-to-profile weight bridge and the
    recovery-kernel growth exponent; its supremum over integer k governs the
    recovery mapping constant.  For k deep in the underflow range the value
    is computed in log10 and returned as a saturated upper-bound interval.
    """
    if not isinstance(k, int) or k < 1:
        raise ValueError(f"mode index must be a positive integer, got {k!r}")
    kf = IntervalScalar(float(k), float(k))
    one_k2 = intpow_iv(kf, 2) + 1.0
    decay = _RATE_001 * float(k)
    if 0.001 * k <= 600.0:
        return pow_seven_halves(k) / sqrt_iv(one_k2) * exp_iv(-decay)
    lnval = ln_iv(kf) * 3.5 - ln_iv(one_k2) * 0.5 - decay
    return LogMagnitude((lnval / LN10).hi, 1).to_interval()


# -- certificate files ---------------------------------------------------------

CONSTANT_NAMES = (
    "delta",
    "M",
    "K",
    "gamma",
    "eps_T3",
    "C_prof",
    "C_rec_ker",
    "C_rec_map",
    "C_conv",
)

_FORMAT_VERSION = "1.0"


@dataclass(frozen=True)
class ProfileCertificate:
    """A candidate profile plus the constants its author claims for it."""

    coefficients: CoefficientVector
    nu: IntervalScalar
    sigma: float
    tau_audited: float
    constants: Optional[Mapping[str, IntervalScalar]] = None

    def __post_init__(self):
        if not (self.sigma > 0.0):
            raise CertificateError(f"sigma must be positive, got {self.sigma!r}")
        if self.constants is not None:
            for name, val in self.constants.items():
                if name not in CONSTANT_NAMES:
                    raise CertificateError(f"unknown constant name {name!r}")
                if val.is_empty or val.lo < 0.0:
                    raise CertificateError(
                        f"constant {name} must be a nonnegative interval, got {val}"
                    )
            object.__setattr__(self, "constants", dict(self.constants))

    def constant(self, name: str) -> Optional[IntervalScalar]:
        if self.constants is None:
            return None
        return self.constants.get(name)


def _require(obj: Mapping, key: str, where: str):
    if key not in obj:
        raise CertificateError(f"{where}: missing field {key!r}")
    return obj[key]


def _interval_field(obj, where: str) -> IntervalScalar:
    if not isinstance(obj, Mapping):
        raise CertificateError(f"{where}: expected an object with mid/rad strings")
    mid = _require(obj, "mid", where)
    rad = _require(obj, "rad", where)
    if not isinstance(mid, str) or not isinstance(rad, str):
        raise CertificateError(f"{where}: mid/rad must be decimal strings")
    try:
        return interval_from_mid_rad_decimal(mid, rad)
    except ValueError as exc:
        raise CertificateError(f"{where}: {exc}") from None


def _decimal_field(obj, where: str) -> float:
    if not isinstance(obj, str):
        raise CertificateError(f"{where}: expected a decimal string")
    try:
        return float(_parse_decimal(obj, where))
    except ValueError as exc:
        raise CertificateError(f"{where}: {exc}") from None


def load_certificate(path) -> ProfileCertificate:
    """Parse a certificate file; every malformation names its field."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise CertificateError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}")
    if not isinstance(doc, dict):
        raise CertificateError(f"{path}: top level must be an object")
    ver = _require(doc, "format_version", str(path))
    if ver != _FORMAT_VERSION:
        raise CertificateError(
            f"{path}: unsupported format_version {ver!r} (expected {_FORMAT_VERSION!r})"
        )
    nu = _interval_field(_require(doc, "nu", str(path)), "nu")
    sigma = _decimal_field(_require(doc, "sigma", str(path)), "sigma")
    tau = _decimal_field(_require(doc, "tau", str(path)), "tau")
    modes_raw = _require(doc, "modes", str(path))
    if not isinstance(modes_raw, list):
        raise CertificateError("modes: expected an array")
    entries = {}
    for i, row in enumerate(modes_raw):
        where = f"modes[{i}]"
        if not isinstance(row, Mapping):
            raise CertificateError(f"{where}: expected an object")
        j = _require(row, "j", where)
        if not isinstance(j, int) or isinstance(j, bool) or j < 1:
            raise CertificateError(f"{where}.j: expected a positive integer, got {j!r}")
        if j in entries:
            raise CertificateError(f"{where}.j: duplicate mode index {j}")
        entries[j] = _interval_field(row, where)
    constants = None
    if "constants" in doc and doc["constants"] is not None:
        raw = doc["constants"]
        if not isinstance(raw, Mapping):
            raise CertificateError("constants: expected an object")
        constants = {}
        for name, val in raw.items():
            if name not in CONSTANT_NAMES:
                raise CertificateError(f"constants.{name}: unknown constant name")
            constants[name] = _interval_field(val, f"constants.{name}")
    try:
        coeffs = CoefficientVector.from_dict(entries)
        return ProfileCertificate(
            coefficients=coeffs,
            nu=nu,
            sigma=sigma,
            tau_audited=tau,
            constants=constants,
        )
    except CertificateError:
        raise
    except ValueError as exc:
        raise CertificateError(f"{path}: {exc}") from None


def _interval_to_midrad(iv: IntervalScalar) -> dict:
    # exact decimal endpoint arithmetic, so loading reproduces lo/hi bit-for-bit
    with localcontext() as ctx:
        ctx.prec = 1200
        lo = Decimal(iv.lo)
        hi = Decimal(iv.hi)
        mid = (lo + hi) / 2
        rad = (hi - lo) / 2
    return {"mid": str(mid), "rad": str(rad)}


def save_certificate(cert: ProfileCertificate, path) -> None:
    doc = {
        "format_version": _FORMAT_VERSION,
        "nu": _interval_to_midrad(cert.nu),
        "sigma": float_to_decimal_string(cert.sigma),
        "tau": float_to_decimal_string(cert.tau_audited),
        "modes": [
            dict(j=j, **_interval_to_midrad(c)) for j, c in cert.coefficients.items()
        ],
    }
    if cert.constants is not None:
        doc["constants"] = {
            name: _interval_to_midrad(val) for name, val in sorted(cert.constants.items())
        }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
