"""Certified closure constants.

Three constants feed the final contraction test.  The recovery-mapping
constant is the supremum over integer modes of the norm-level multiplier
k^{7/2} (1+k^2)^{-1/2} e^{-(tau'-tau)k}; a finite scan covers it because
the one-step ratio drops below one past the stationary point and stays
there.  The convolution constant bounds the bilinear form between the
two weighted spaces through the elementary inequality
1+(k+l)^2 <= 2(1+k^2)(1+l^2) and the exponential buffer tau'-tau, which
turns the double sum into a product of one-dimensional sums.  The
Lipschitz constant is their outward-rounded product, optionally bumped
to a declared value.

A deliberate normalization wrinkle: the headline recovery constant is
the bare supremum, without the recovery-kernel prefactor, because that
is the value downstream audits compare against.  The full product path
(prefactor times supremum) is computed alongside and reported so the
mismatch stays visible instead of silently resolved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_CEILING, Decimal, localcontext
from typing import Mapping, Optional

from .basis import BasisModel
from .errors import CertificationError
from .interval import (
    IntervalScalar,
    _float_rounded_up,
    exp_iv,
    intpow_iv,
    ln_iv,
    pow_seven_halves,
    sqrt_iv,
)
from .spaces import WeightedSpace

_ZERO = IntervalScalar(0.0, 0.0)
_ONE = IntervalScalar(1.0, 1.0)
_TWO = IntervalScalar(2.0, 2.0)

# refuse scans that would walk more modes than this; the buffer is then
# too thin for the finite-scan strategy to make sense
_SCAN_LIMIT = 2_000_000


def _as_interval(x, what: str) -> IntervalScalar:
    if isinstance(x, IntervalScalar):
        iv = x
    else:
        iv = IntervalScalar(float(x), float(x))
    if iv.is_empty:
        raise CertificationError(f"{what} is poisoned")
    if iv.lo < 0.0:
        raise CertificationError(f"{what} must be nonnegative, got {iv}")
    return iv


def level_multiplier(k: int, rate: IntervalScalar) -> IntervalScalar:
    """Enclosure of k^{7/2} (1+k^2)^{-1/2} e^{-rate*k} for integer k >= 1."""
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise CertificationError(f"level index must be a positive integer, got {k!r}")
    one_plus = IntervalScalar(float(1 + k * k), float(1 + k * k))
    return pow_seven_halves(k) / sqrt_iv(one_plus) * exp_iv(-(rate * float(k)))


@dataclass(frozen=True)
class RecoveryMapResult:
    """Supremum of the level multiplier, in both normalizations.

    ``value`` is the bare supremum; ``with_kernel`` carries the kernel
    prefactor when one was supplied.  Unpacks as (value, argmax_k).
    """

    value: IntervalScalar
    argmax_k: int
    with_kernel: Optional[IntervalScalar] = None

    def __iter__(self):
        yield self.value
        yield self.argmax_k


def recovery_mapping_constant(
    tau: float, tau_prime: float, kernel_cap=None
) -> RecoveryMapResult:
    """Certified sup over integers k >= 1 of the norm-level multiplier.

    The scan runs to ceil(4.5/b) with b = tau' - tau, past the
    stationary point k* = 2.5/b.  Beyond the scan the one-step ratio
    bound e^{-b} ((k+1)/k)^{7/2} is certified below one once, at the
    scan end; it only decreases afterwards, so the tail contributes
    nothing new.
    """
    tau = float(tau)
    tau_prime = float(tau_prime)
    if not (math.isfinite(tau) and math.isfinite(tau_prime)):
        raise CertificationError("rates must be finite")
    if not tau_prime > tau:
        raise CertificationError(
            f"need tau_prime > tau for an exponential buffer, got "
            f"tau={tau!r}, tau_prime={tau_prime!r}"
        )
    b = IntervalScalar(tau_prime, tau_prime) - IntervalScalar(tau, tau)
    if b.lo <= 0.0:
        raise CertificationError(
            f"buffer tau_prime - tau = {b} is not certifiably positive"
        )
    k_end = int(math.ceil(4.5 / b.lo)) + 1
    if k_end > _SCAN_LIMIT:
        raise CertificationError(
            f"buffer {b.lo!r} needs a scan of {k_end} modes; refusing past "
            f"{_SCAN_LIMIT}"
        )
    best_hi = -1.0
    best_lo = -1.0
    argmax = 1
    for k in range(1, k_end + 1):
        m = level_multiplier(k, b)
        if m.hi > best_hi:
            best_hi = m.hi
            argmax = k
        if m.lo > best_lo:
            best_lo = m.lo
    step = IntervalScalar(float(k_end + 1), float(k_end + 1)) / IntervalScalar(
        float(k_end), float(k_end)
    )
    ratio = sqrt_iv(intpow_iv(step, 7)) * exp_iv(-b)
    if not ratio.hi < 1.0:
        raise CertificationError(
            f"monotone-decrease ratio test failed at k={k_end}: bound {ratio.hi!r}"
        )
    value = IntervalScalar(best_lo, best_hi)
    if kernel_cap is None:
        return RecoveryMapResult(value=value, argmax_k=argmax)
    cap = _as_interval(kernel_cap, "kernel_cap")
    return RecoveryMapResult(value=value, argmax_k=argmax, with_kernel=cap * value)


def convolution_constant(
    model: BasisModel, N: int, X: WeightedSpace, Y: WeightedSpace
) -> IntervalScalar:
    """Certified C with ||Q(u,v)||_X <= C ||u||_Y ||v||_Y on modes <= N.

    Route: for an output mode j <= k+l,

        w_X(j) <= 2^{s_X/2} [(1+k^2)^{s_X/2} e^{tau_X k}]
                           [(1+l^2)^{s_X/2} e^{tau_X l}] e^{-beta j} ...

    more precisely each factor is absorbed into the Y-norm of its input,
    leaving per-mode weights q_k = (1+k^2)^{-(s_Y-s_X)/2} e^{-beta k}
    with beta = (tau_Y - tau_X)/2, and a residual e^{-beta j} on the
    output mode that keeps the j-sum finite.  The constant is

        2^{s_X/2} * Cb * sqrt(sum_{j<=2N} e^{-2 beta j}) * (sum_{k<=N} q_k)^2.

    Needs tau_Y > tau_X and s_Y >= s_X; without that buffer this route
    does not close and the call is refused.
    """
    if not isinstance(N, int) or isinstance(N, bool) or N < 1:
        raise CertificationError(f"N must be a positive integer, got {N!r}")
    if not Y.tau > X.tau:
        raise CertificationError(
            f"need Y.tau > X.tau for the redistribution buffer, got "
            f"X.tau={X.tau!r}, Y.tau={Y.tau!r}"
        )
    if Y.s < X.s:
        raise CertificationError(
            f"need Y.s >= X.s for summable per-mode weights, got "
            f"X.s={X.s!r}, Y.s={Y.s!r}"
        )
    cb = model.interaction_bound
    if cb.is_empty or cb.lo < 0.0:
        raise CertificationError(f"interaction bound must be nonnegative, got {cb}")
    if cb.hi == 0.0:
        return _ZERO
    two_beta = IntervalScalar(Y.tau, Y.tau) - IntervalScalar(X.tau, X.tau)
    beta = two_beta * 0.5
    p = (Y.s - X.s) / 2.0

    s1 = _ZERO
    for k in range(N, 0, -1):
        one_plus = IntervalScalar(float(1 + k * k), float(1 + k * k))
        if p == 0.0:
            poly = _ONE
        elif p == 0.5:
            poly = _ONE / sqrt_iv(one_plus)
        else:
            poly = exp_iv(ln_iv(one_plus) * (-p))
        s1 = s1 + poly * exp_iv(-(beta * float(k)))

    geo = _ZERO
    for j in range(2 * N, 0, -1):
        geo = geo + exp_iv(-(two_beta * float(j)))

    s_half = X.s / 2.0
    if float(s_half).is_integer():
        pref = intpow_iv(_TWO, int(s_half))
    else:
        pref = exp_iv(ln_iv(_TWO) * s_half)
    return pref * cb * sqrt_iv(geo) * s1 * s1


def _ceil_two_significant(x: float) -> float:
    """Smallest float at or above x whose decimal form has two significant digits."""
    if x == 0.0:
        return 0.0
    if not math.isfinite(x) or x < 0.0:
        raise CertificationError(f"cannot round {x!r} to two significant digits")
    with localcontext() as ctx:
        ctx.prec = 60
        d = Decimal(x)
        q = d.quantize(Decimal(1).scaleb(d.adjusted() - 1), rounding=ROUND_CEILING)
    return _float_rounded_up(q)


def lipschitz_constant(C_rec_map, C_conv, declared=None) -> IntervalScalar:
    """Outward product of the two constants, presented as a headline bound.

    Without a declared value the upper endpoint is ceiled to two
    significant decimal digits, which is how the headline constant is
    quoted.  A declared value can only raise the upper endpoint, never
    lower it below the certified product.
    """
    a = _as_interval(C_rec_map, "C_rec_map")
    b = _as_interval(C_conv, "C_conv")
    product = a * b
    if declared is None:
        hi = _ceil_two_significant(product.hi)
    else:
        dec = _as_interval(declared, "declared Lipschitz constant")
        hi = max(product.hi, dec.hi)
    return IntervalScalar(product.lo, hi)


@dataclass(frozen=True)
class EnergySpectrum:
    """Finite nonnegative energies indexed by spectral level."""

    levels: tuple = ()

    def __post_init__(self):
        raw = self.levels
        pairs = raw.items() if isinstance(raw, Mapping) else raw
        ent = []
        seen = set()
        for j, e in pairs:
            j = int(j)
            if j < 1:
                raise CertificationError(f"spectral level must be >= 1, got {j}")
            if j in seen:
                raise CertificationError(f"duplicate spectral level {j}")
            seen.add(j)
            if not isinstance(e, IntervalScalar):
                raise CertificationError(f"level {j}: energy is not an interval")
            if e.is_empty or e.lo < 0.0:
                raise CertificationError(f"level {j}: energy must be nonnegative")
            ent.append((j, e))
        object.__setattr__(self, "levels", tuple(sorted(ent)))

    @classmethod
    def from_dict(cls, d: Mapping[int, IntervalScalar]) -> "EnergySpectrum":
        return cls(tuple(d.items()))

    def items(self):
        return iter(self.levels)

    def __len__(self):
        return len(self.levels)


def stretching_penalty(spectrum: EnergySpectrum, C) -> IntervalScalar:
    """Enclosure of C * sum_j j^{7/2} sqrt(E_j)."""
    if not isinstance(spectrum, EnergySpectrum):
        raise CertificationError("stretching_penalty expects an EnergySpectrum")
    c = _as_interval(C, "penalty constant")
    total = _ZERO
    for j, e in sorted(spectrum.levels, reverse=True):
        total = total + pow_seven_halves(j) * sqrt_iv(e)
    return c * total


@dataclass(frozen=True)
class ConstantsReport:
    """The three closure constants with the product consistency invariant."""

    C_rec_map: IntervalScalar
    argmax_k: int
    C_conv: IntervalScalar
    K: IntervalScalar

    def __post_init__(self):
        product = self.C_rec_map * self.C_conv
        if not self.K.hi >= product.hi:
            raise CertificationError(
                f"Lipschitz constant upper bound {self.K.hi!r} falls below the "
                f"product bound {product.hi!r}"
            )


def certify_constants(
    tau: float,
    tau_prime: float,
    model: BasisModel,
    N: int,
    X: WeightedSpace,
    Y: WeightedSpace,
    kernel_cap=None,
    declared_K=None,
    declared_C_conv=None,
) -> ConstantsReport:
    """Assemble the constants block, preferring declared values where policy allows.

    A declared convolution constant is passed through untouched (its
    derivation needs structure this model does not carry); a declared
    Lipschitz constant can only round the product upward.
    """
    rec = recovery_mapping_constant(tau, tau_prime, kernel_cap)
    if declared_C_conv is not None:
        c_conv = _as_interval(declared_C_conv, "declared convolution constant")
    else:
        c_conv = convolution_constant(model, N, X, Y)
    k_const = lipschitz_constant(rec.value, c_conv, declared_K)
    return ConstantsReport(
        C_rec_map=rec.value, argmax_k=rec.argmax_k, C_conv=c_conv, K=k_const
    )
