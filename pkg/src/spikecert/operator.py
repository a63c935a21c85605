"""The stationary profile operator and its linearization, in interval arithmetic.

G(c) combines a diagonal linear part (identity, scaling drift, diffusion), a
quadratic self-advection realized through the basis interaction tensor, and a
stretching term that first passes the coefficients through the recovery
kernel.  Inputs live on modes 1..N; quadratic output spills into modes up to
2N and is deliberately not projected away, since the residual certification
needs exactly that spillover block.

The Jacobian is assembled analytically from the bilinear structure.  Interval
finite differences could never certify anything; they appear only in tests as
a consistency oracle for midpoints.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BasisModel
from .interval import IntervalMatrix, IntervalScalar
from .spaces import CoefficientVector

__all__ = [
    "OperatorConfig",
    "apply_linear",
    "recover_velocity",
    "apply_quadratic",
    "apply_G",
    "assemble_jacobian",
]

_ZERO = IntervalScalar(0.0, 0.0)
_ONE = IntervalScalar(1.0, 1.0)


@dataclass(frozen=True)
class OperatorConfig:
    model: BasisModel
    nu: IntervalScalar
    truncation_N: int = 450

    def __post_init__(self):
        if not isinstance(self.truncation_N, int) or self.truncation_N < 1:
            raise ValueError(
                f"truncation_N must be a positive integer, got {self.truncation_N!r}"
            )
        if self.nu.is_empty:
            raise ValueError("nu is poisoned")


def _check_support(c: CoefficientVector, cfg: OperatorConfig, who: str) -> None:
    if c.entries and c.support[-1] > cfg.truncation_N:
        raise ValueError(
            f"{who}: input mode {c.support[-1]} exceeds truncation N={cfg.truncation_N}"
        )


def apply_linear(c: CoefficientVector, cfg: OperatorConfig) -> CoefficientVector:
    """Mode-j output (1 + d_j + nu*lambda_j) c_j."""
    _check_support(c, cfg, "apply_linear")
    out = []
    for j, cj in c.items():
        sym = _ONE + cfg.model.drift_eig(j) + cfg.nu * cfg.model.diffusion_eig(j)
        out.append((j, sym * cj))
    return CoefficientVector(tuple(out), cfg.truncation_N)


def recover_velocity(c: CoefficientVector, cfg: OperatorConfig) -> CoefficientVector:
    """Velocity coefficients K_rec(k) c_k (the elliptic inverse and weighted
    derivative collapsed into the kernel's net multiplier)."""
    _check_support(c, cfg, "recover_velocity")
    return CoefficientVector(
        tuple((k, cfg.model.recovery_kernel(k) * ck) for k, ck in c.items()),
        cfg.truncation_N,
    )


def apply_quadratic(
    u: CoefficientVector, v: CoefficientVector, cfg: OperatorConfig
) -> CoefficientVector:
    """Bilinear form Q(u,v)_j = sum_{k,l<=N} C_{klj} u_k v_l, supported on 1..2N.

    Iterates over support pairs, so sparse inputs cost O(|u||v| * band width)
    rather than O(N^3).
    """
    _check_support(u, cfg, "apply_quadratic")
    _check_support(v, cfg, "apply_quadratic")
    n2 = 2 * cfg.truncation_N
    acc: dict[int, IntervalScalar] = {}
    for k, uk in u.items():
        if uk.mag() == 0.0 and uk.lo == uk.hi:
            continue
        for l, vl in v.items():
            prod = uk * vl
            for j in range(max(1, abs(k - l)), min(k + l, n2) + 1):
                ckl = cfg.model.interaction(k, l, j)
                if ckl.lo == 0.0 == ckl.hi:
                    continue
                term = ckl * prod
                acc[j] = acc[j] + term if j in acc else term
    return CoefficientVector(tuple(acc.items()), n2)


def apply_G(c: CoefficientVector, cfg: OperatorConfig) -> CoefficientVector:
    """Full operator: linear part + Q(c,c) + 2 Q(recover_velocity(c), c)."""
    _check_support(c, cfg, "apply_G")
    lin = apply_linear(c, cfg)
    advection = apply_quadratic(c, c, cfg)
    stretching = apply_quadratic(recover_velocity(c, cfg), c, cfg)
    out = lin + advection + stretching.scaled(2.0)
    return CoefficientVector(out.entries, 2 * cfg.truncation_N)


def _unit(m: int, N: int) -> CoefficientVector:
    return CoefficientVector(((m, _ONE),), N)


def assemble_jacobian(c: CoefficientVector, cfg: OperatorConfig) -> IntervalMatrix:
    """N x N projected Frechet derivative of apply_G at c.

    Column m collects the linear symbol at row m plus the bilinear
    derivatives Q(e_m, c) + Q(c, e_m) and the stretching analogue
    2[Q(K e_m, c) + Q(K c, e_m)], rows cut at N.
    """
    _check_support(c, cfg, "assemble_jacobian")
    N = cfg.truncation_N
    lo = np.zeros((N, N))
    hi = np.zeros((N, N))
    vel_c = recover_velocity(c, cfg)
    for m in range(1, N + 1):
        em = _unit(m, N)
        vel_em = recover_velocity(em, cfg)
        col = apply_quadratic(em, c, cfg) + apply_quadratic(c, em, cfg)
        col = col + (
            apply_quadratic(vel_em, c, cfg) + apply_quadratic(vel_c, em, cfg)
        ).scaled(2.0)
        sym = _ONE + cfg.model.drift_eig(m) + cfg.nu * cfg.model.diffusion_eig(m)
        col = col + CoefficientVector(((m, sym),), 2 * N)
        for j, val in col.items():
            if j > N:
                break  # entries are sorted; the rest is outside the projection
            lo[j - 1, m - 1] = val.lo
            hi[j - 1, m - 1] = val.hi
    return IntervalMatrix(lo, hi)
