"""Contraction products and the periodic transfer budget.

The final test is one multiplication: with residual delta, inverse
bound M and Lipschitz constant K, the scalar closure needs
2*delta*M*K < 1, and the periodic variant adds the transfer error
epsilon to delta.  Everything here is outward-rounded interval
arithmetic plus one genuinely delicate ingredient: the Gaussian image
overlap between periodic copies lives around 10^-1714, far below any
double, so overlap magnitudes travel in log10 form and only get
promoted (saturating upward at the subnormal floor) when they finally
meet delta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as iter_product
from typing import Optional

from .errors import CertificationError
from .interval import (
    LN10,
    PI,
    IntervalScalar,
    LogMagnitude,
    exp_iv,
    ln_iv,
    sqrt_iv,
)

_ZERO = IntervalScalar(0.0, 0.0)
_ONE = IntervalScalar(1.0, 1.0)
_TWO = IntervalScalar(2.0, 2.0)

# refuse lattice tails that need more terms than this before the
# geometric comparison kicks in (concentration scale too coarse)
_TAIL_LIMIT = 200_000


def _as_nonneg(x, what: str) -> IntervalScalar:
    if isinstance(x, IntervalScalar):
        iv = x
    else:
        iv = IntervalScalar(float(x), float(x))
    if iv.is_empty:
        raise CertificationError(f"{what} is poisoned")
    if iv.lo < 0.0:
        raise CertificationError(f"{what} must be nonnegative, got {iv}")
    return iv


@dataclass(frozen=True)
class ClosureReport:
    """One contraction product with its margin to 1."""

    product: IntervalScalar
    margin: IntervalScalar
    verdict: bool

    def __post_init__(self):
        want = (not self.product.is_empty) and self.product.hi < 1.0
        if self.verdict != want:
            raise CertificationError(
                f"verdict {self.verdict} contradicts product upper bound "
                f"{self.product.hi!r}"
            )


def _closure_report(product: IntervalScalar) -> ClosureReport:
    return ClosureReport(
        product=product, margin=_ONE - product, verdict=product.hi < 1.0
    )


def nk_closure(delta, M, K) -> ClosureReport:
    """Contraction test 2*delta*M*K < 1, outward rounded."""
    d = _as_nonneg(delta, "delta")
    m = _as_nonneg(M, "M")
    k = _as_nonneg(K, "K")
    return _closure_report(_TWO * d * m * k)


def torus_closure(delta, eps, M, K) -> ClosureReport:
    """Periodic contraction test 2*(delta+eps)*M*K < 1.

    ``eps`` may arrive as a log-domain magnitude, in which case it is
    promoted with upward saturation before joining delta.
    """
    d = _as_nonneg(delta, "delta")
    if isinstance(eps, LogMagnitude):
        e = eps.to_interval()
    else:
        e = _as_nonneg(eps, "eps")
    m = _as_nonneg(M, "M")
    k = _as_nonneg(K, "K")
    return _closure_report(_TWO * (d + e) * m * k)


def image_overlap_bound(
    sigma: float, lattice_radius: int = 3, nearest_only: bool = False
) -> LogMagnitude:
    """Log-domain bound on the Gaussian mass the periodic images overlap.

    Each image at lattice point n contributes at most
    exp(-pi^2 |n|^2 / sigma^2).  Images with |n| <= lattice_radius are
    enumerated shell by shell; beyond the radius the quadratic exponent
    is relaxed to a linear one (|n|^2 >= R|n|) and the remaining lattice
    sum is dominated by a geometric series over the l1 shells, whose
    counts grow only quadratically.  The whole computation runs relative
    to the nearest-image scale 10^L1 so nothing underflows before the
    final, certified-upward log10.

    ``nearest_only`` returns the single nearest-image bound, the scale
    the headline estimates quote.
    """
    sigma = float(sigma)
    if not (math.isfinite(sigma) and sigma > 0.0):
        raise CertificationError(f"concentration scale must be positive, got {sigma!r}")
    if not isinstance(lattice_radius, int) or isinstance(lattice_radius, bool):
        raise CertificationError(f"lattice_radius must be an integer, got {lattice_radius!r}")
    if lattice_radius < 0:
        raise CertificationError(f"lattice_radius must be >= 0, got {lattice_radius}")
    base = (PI * PI) / (IntervalScalar(sigma, sigma) * IntervalScalar(sigma, sigma))
    nearest_log10 = (-base) / LN10
    if nearest_only:
        return LogMagnitude(nearest_log10.hi, 1)
    if lattice_radius == 0:
        return LogMagnitude.zero()
    R = lattice_radius

    # shells inside the radius, scaled by the nearest-image weight
    counts = {}
    for n in iter_product(range(-R, R + 1), repeat=3):
        m = n[0] * n[0] + n[1] * n[1] + n[2] * n[2]
        if 0 < m <= R * R:
            counts[m] = counts.get(m, 0) + 1
    scaled = _ZERO
    for m in sorted(counts, reverse=True):
        term = exp_iv(-(base * float(m - 1))) * float(counts[m])
        scaled = scaled + term

    # l1-shell tail: |n| > R implies sum|n_i| >= R+1, and
    # exp(-pi^2 |n|^2 / sigma^2) <= exp(-c * sum|n_i|) with
    # c = pi^2 R / (sigma^2 sqrt(3)); shell count at l1-size t is 4t^2+2
    c = base * float(R) / sqrt_iv(IntervalScalar(3.0, 3.0))
    x = exp_iv(-c)
    tail = _ZERO
    t = R + 1
    while True:
        coeff = float(4 * t * t + 2)
        term = exp_iv(base - c * float(t)) * coeff
        tail = tail + term
        next_coeff = float(4 * (t + 1) * (t + 1) + 2)
        rho = x * (next_coeff / coeff)
        if rho.hi < 1.0 - 1e-6:
            tail = tail + term * (rho / (_ONE - rho))
            break
        t += 1
        if t - R > _TAIL_LIMIT:
            raise CertificationError(
                f"lattice tail at sigma={sigma!r} does not reach geometric "
                f"domination within {_TAIL_LIMIT} shells"
            )
    grand = scaled + tail
    total = nearest_log10 + ln_iv(grand) / LN10
    return LogMagnitude(total.hi, 1)


@dataclass(frozen=True)
class TransferReport:
    """Error budget for moving the certificate onto the periodic domain."""

    eps_ov: LogMagnitude
    eps_P: LogMagnitude
    eps_p: LogMagnitude
    eps_total: IntervalScalar
    computed_total: IntervalScalar


def _log10_of_upper(iv: IntervalScalar, what: str) -> float:
    if iv.hi <= 0.0:
        raise CertificationError(f"{what} upper bound must be positive")
    point = IntervalScalar(iv.hi, iv.hi)
    return (ln_iv(point) / LN10).hi


def transfer_error(
    sigma: float,
    projector_bound,
    pressure_factor,
    lattice_radius: int = 3,
    declared_total=None,
) -> TransferReport:
    """Assemble the three-part transfer budget at concentration sigma.

    eps_ov is the image-overlap bound; the projector and pressure pieces
    are scalar multiples of it, scaled in log domain.  The total is the
    promoted (saturating) sum.  A declared total replaces the computed
    one only when it certifiably dominates it; the computed value stays
    in the report so the gap between the two remains on record.
    """
    pb = _as_nonneg(projector_bound, "projector bound")
    if pb.lo < 1.0:
        raise CertificationError(
            f"projector bound must be at least 1, got lower endpoint {pb.lo!r}"
        )
    pf = _as_nonneg(pressure_factor, "pressure factor")
    eps_ov = image_overlap_bound(sigma, lattice_radius)
    if eps_ov.sign == 0:
        eps_P = LogMagnitude.zero()
    else:
        eps_P = eps_ov.scaled_by_log10(_log10_of_upper(pb, "projector bound"))
    if eps_ov.sign == 0 or pf.hi == 0.0:
        eps_p = LogMagnitude.zero()
    else:
        eps_p = eps_ov.scaled_by_log10(_log10_of_upper(pf, "pressure factor"))
    computed = eps_ov.to_interval() + eps_P.to_interval() + eps_p.to_interval()
    if declared_total is None:
        total = computed
    else:
        dec = _as_nonneg(declared_total, "declared transfer error")
        if dec.hi < computed.hi:
            raise CertificationError(
                f"declared transfer error {dec.hi!r} falls below the certified "
                f"bound {computed.hi!r}"
            )
        total = IntervalScalar(0.0, dec.hi)
    return TransferReport(
        eps_ov=eps_ov,
        eps_P=eps_P,
        eps_p=eps_p,
        eps_total=total,
        computed_total=computed,
    )
