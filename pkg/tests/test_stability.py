"""Inverse certification and tail coercivity.

The inverse tests lean on an extended-precision oracle: the float64
inverse polished by two Newton steps in np.longdouble is accurate to
far below the certified slack, so the certified upper bound must clear
it on every trial.  Coercivity values are frozen from a 40-digit mpmath
evaluation of the envelope formula.
"""

import math

import numpy as np
import pytest

from spikecert.basis import reference_model
from spikecert.errors import CertificationError
from spikecert.interval import EMPTY, IntervalMatrix, IntervalScalar, make_interval
from spikecert.operator import OperatorConfig, assemble_jacobian
from spikecert.spaces import (
    CoefficientVector,
    ProfileCertificate,
    load_certificate,
)
from spikecert.stability import (
    CoercivityReport,
    InverseReport,
    certify_inverse,
    certify_tail_coercivity,
    interaction_envelope,
    inverse_bound_from_norms,
)

ONE_POINT = IntervalScalar(1.0, 1.0)


def point_matrix(rows):
    a = np.array(rows, dtype=np.float64)
    return IntervalMatrix.from_point(a)


# ---------------------------------------------------------------------------
# certify_inverse


def test_identity_certifies():
    rep = certify_inverse(point_matrix(np.eye(3)))
    assert rep.verified
    assert rep.E_norm.hi < 1e-10
    assert rep.M.contains(1.0)
    assert rep.R_norm.contains(1.0)


def test_diagonal_inverse_norm():
    rep = certify_inverse(point_matrix([[2.0, 0.0], [0.0, 4.0]]))
    assert rep.verified
    # row-sum norm of diag(1/2, 1/4) is 1/2
    assert rep.M.contains(0.5)
    assert rep.M.width < 1e-12


def test_symmetric_two_by_two():
    # inverse of [[2,1],[1,2]] is (1/3)[[2,-1],[-1,2]], row-sum norm 1
    rep = certify_inverse(point_matrix([[2.0, 1.0], [1.0, 2.0]]))
    assert rep.verified
    assert rep.M.contains(1.0)
    assert rep.M.width < 1e-12


def test_singular_midpoint_is_a_verdict():
    rep = certify_inverse(point_matrix([[1.0, 1.0], [1.0, 1.0]]))
    assert not rep.verified
    assert "singular" in rep.diagnostic
    assert rep.M.is_empty


def test_interval_containing_singular_matrix_fails():
    # midpoint is the singular all-ones matrix
    lo = np.array([[1.0, 1.0], [1.0, 0.9]])
    hi = np.array([[1.0, 1.0], [1.0, 1.1]])
    rep = certify_inverse(IntervalMatrix(lo, hi))
    assert not rep.verified


def test_wide_radii_defeat_certification():
    # the matrix is fine but the enclosure admits singular members
    a = np.eye(2)
    rep = certify_inverse(IntervalMatrix(a - 1.5, a + 1.5))
    assert not rep.verified
    assert rep.M.is_empty
    assert "not below one" in rep.diagnostic


def test_non_square_rejected():
    with pytest.raises(CertificationError):
        certify_inverse(IntervalMatrix(np.zeros((2, 3)), np.zeros((2, 3))))


def test_non_matrix_rejected():
    with pytest.raises(CertificationError):
        certify_inverse(np.eye(2))


def test_zero_profile_jacobian_pipeline():
    cfg = OperatorConfig(reference_model(0, 1.0), make_interval(0.005, 0.0), truncation_N=8)
    J = assemble_jacobian(CoefficientVector(), cfg)
    rep = certify_inverse(J)
    assert rep.verified
    # diagonal symbol is smallest at j=1, namely 1 + 0.5 + 0.005
    assert rep.M.contains(1.0 / 1.505)


def test_inverse_oracle_longdouble():
    """Certified M.hi clears the true inverse norm on 1000 random trials.

    The oracle inverse is float64 polished by two Newton steps X <-
    X(2I - AX) in 80-bit extended precision, giving ~1e-17 relative
    error for these well-conditioned draws, far below the slack the
    bound carries.
    """
    rng = np.random.default_rng(20240817)
    verified = 0
    for _ in range(1000):
        n = int(rng.integers(1, 51))
        a = rng.standard_normal((n, n)) + n * np.eye(n)
        rep = certify_inverse(IntervalMatrix.from_point(a))
        if not rep.verified:
            continue
        verified += 1
        al = a.astype(np.longdouble)
        x = np.linalg.inv(a).astype(np.longdouble)
        eye2 = np.longdouble(2.0) * np.eye(n, dtype=np.longdouble)
        for _ in range(2):
            x = x @ (eye2 - al @ x)
        true_norm = float(np.abs(x).sum(axis=1).max())
        assert rep.M.hi >= true_norm * (1.0 - 1e-12)
        assert rep.M.lo <= true_norm * (1.0 + 1e-12)
    assert verified >= 950


def test_widening_radii_never_shrinks_residual_norm():
    rng = np.random.default_rng(7)
    for _ in range(50):
        n = int(rng.integers(2, 12))
        a = rng.standard_normal((n, n)) + n * np.eye(n)
        r = 10.0 ** rng.uniform(-14, -6)
        base = IntervalMatrix(a - r, a + r)
        fat = IntervalMatrix(a - 2 * r, a + 2 * r)
        e1 = certify_inverse(base).E_norm
        e2 = certify_inverse(fat).E_norm
        assert e2.hi >= e1.hi


# ---------------------------------------------------------------------------
# inverse_bound_from_norms


def test_declared_norms_reproduction():
    rep = inverse_bound_from_norms(482.540, 1.2435e-4)
    assert rep.verified
    # 482.540 / (1 - 1.2435e-4) to 17 digits: 482.60001131140659
    assert rep.M.contains(482.60001131140659)
    assert abs(rep.M.mid - 482.600) <= 1e-3
    assert rep.M.width < 1e-9


def test_declared_norms_interval_inputs():
    rep = inverse_bound_from_norms(
        make_interval(482.540, 1e-3), make_interval(1.2435e-4, 1e-8)
    )
    assert rep.verified
    assert rep.M.contains(482.60001131140659)
    assert rep.M.width >= 2e-3


def test_residual_norm_at_one_fails():
    rep = inverse_bound_from_norms(3.0, 1.0)
    assert not rep.verified
    assert rep.M.is_empty
    assert "not below one" in rep.diagnostic


def test_negative_norm_rejected():
    with pytest.raises(CertificationError):
        inverse_bound_from_norms(-1.0, 0.5)
    with pytest.raises(CertificationError):
        inverse_bound_from_norms(EMPTY, 0.5)


# ---------------------------------------------------------------------------
# interaction_envelope


def single_mode_certificate(j, value, tau=0.08):
    return ProfileCertificate(
        coefficients=CoefficientVector.from_dict({j: value}),
        nu=make_interval(0.005, 0.0),
        sigma=0.05,
        tau_audited=tau,
    )


def test_envelope_single_mode_value():
    cert = single_mode_certificate(450, ONE_POINT)
    env = interaction_envelope(cert, 1.0, 451)
    # 451^{7/2} e^{-0.08} to 17 digits: 1798350491.8008263
    assert env.contains(1798350491.8008263)
    assert env.width / env.hi < 1e-12


def test_envelope_bundled_certificate(bundled_certificate_path):
    cert = load_certificate(bundled_certificate_path)
    env = interaction_envelope(cert, 0.125, 1200)
    # 40-digit evaluation of the factored formula: 1.53389087940455092e-31
    assert env.contains(1.53389087940455092e-31)
    assert env.hi <= 1e-12
    env2 = interaction_envelope(cert, 0.125, 1300)
    assert env2.contains(6.8093550854670385e-35)
    assert env2.hi < env.lo


def test_envelope_empty_profile_is_zero():
    cert = ProfileCertificate(
        coefficients=CoefficientVector(),
        nu=make_interval(0.005, 0.0),
        sigma=0.05,
        tau_audited=0.08,
    )
    env = interaction_envelope(cert, 0.125, 1200)
    assert env.lo == 0.0 and env.hi == 0.0


def test_envelope_inside_support_rejected():
    cert = single_mode_certificate(450, ONE_POINT)
    with pytest.raises(CertificationError):
        interaction_envelope(cert, 1.0, 450)
    with pytest.raises(CertificationError):
        interaction_envelope(cert, 1.0, True)
    with pytest.raises(CertificationError):
        interaction_envelope(cert, -1.0, 451)


def test_envelope_scales_linearly_in_c_prof():
    cert = single_mode_certificate(450, ONE_POINT)
    a = interaction_envelope(cert, 1.0, 500)
    b = interaction_envelope(cert, 0.25, 500)
    assert b.contains(a.mid * 0.25)


# ---------------------------------------------------------------------------
# certify_tail_coercivity


@pytest.fixture(scope="module")
def bundled(bundled_certificate_path):
    return load_certificate(bundled_certificate_path)


def reference_config(nu, N=450):
    return OperatorConfig(reference_model(0, 1.0), nu, truncation_N=N)


def test_zero_profile_gamma_is_exact(bundled):
    cert = ProfileCertificate(
        coefficients=CoefficientVector(),
        nu=bundled.nu,
        sigma=0.05,
        tau_audited=0.08,
    )
    rep = certify_tail_coercivity(cert, reference_config(bundled.nu), 0.125, window=16)
    assert rep.verified
    assert rep.monotone_tail_verified
    # nu carries the decimal value 0.005, so nu * 1200^2 encloses 7200
    assert rep.gamma.contains(7200.0)
    assert 7199.9 <= rep.gamma.lo <= 7200.0
    assert len(rep.window_values) == 17
    assert rep.j_min == 1200


def test_bundled_certificate_coercivity(bundled):
    rep = certify_tail_coercivity(
        bundled, reference_config(bundled.nu), 0.125, window=64
    )
    assert rep.verified
    assert rep.monotone_tail_verified
    assert rep.gamma.contains(7200.0)
    assert 7199.9 <= rep.gamma.lo <= 7200.0
    # the envelope shaves an invisibly small amount off the diagonal
    assert rep.gamma.hi <= rep.window_values[1200].hi
    assert rep.diagnostic == ""


def test_window_minimum_sits_at_the_left_edge(bundled):
    rep = certify_tail_coercivity(
        bundled, reference_config(bundled.nu), 0.125, window=8
    )
    vals = rep.window_values
    assert all(vals[j].lo <= vals[j + 1].lo for j in range(1200, 1208))
    assert rep.gamma.lo == vals[1200].lo


def test_zero_nu_is_a_verdict(bundled):
    rep = certify_tail_coercivity(
        bundled, reference_config(IntervalScalar(0.0, 0.0)), 0.125, window=4
    )
    assert not rep.verified
    assert not rep.monotone_tail_verified
    assert rep.gamma.hi <= 0.0
    assert "not positive" in rep.diagnostic


def test_j_min_must_clear_truncation(bundled):
    with pytest.raises(CertificationError):
        certify_tail_coercivity(
            bundled, reference_config(bundled.nu), 0.125, j_min=450
        )
    with pytest.raises(CertificationError):
        certify_tail_coercivity(
            bundled, reference_config(bundled.nu, N=8), 0.125, j_min=300
        )


def test_bad_window_arguments(bundled):
    cfg = reference_config(bundled.nu)
    with pytest.raises(CertificationError):
        certify_tail_coercivity(bundled, cfg, 0.125, j_min=0)
    with pytest.raises(CertificationError):
        certify_tail_coercivity(bundled, cfg, 0.125, window=-1)


def test_envelope_ratio_bound_value(bundled):
    """The one-step ratio the tail argument checks is comfortably below 1.

    e^{-0.08} (1201/1200)^{7/2} to 17 digits: 0.92581157483925992.
    """
    from spikecert.interval import exp_iv, intpow_iv, sqrt_iv

    tau = IntervalScalar(0.08, 0.08)
    step = IntervalScalar(1201.0, 1201.0) / IntervalScalar(1200.0, 1200.0)
    ratio = exp_iv(-tau) * sqrt_iv(intpow_iv(step, 7))
    assert ratio.contains(0.92581157483925992)
    assert ratio.hi < 1.0


def test_gamma_lower_bound_holds_far_beyond_window(bundled):
    """Spot-check the global claim at indices past the scanned window."""
    cfg = reference_config(bundled.nu)
    rep = certify_tail_coercivity(bundled, cfg, 0.125, window=32)
    for j in (1300, 2000, 5000, 25000):
        val = cfg.nu * float(j * j) - interaction_envelope(bundled, 0.125, j)
        assert val.lo >= rep.gamma.lo


def test_report_types(bundled):
    rep = certify_tail_coercivity(
        bundled, reference_config(bundled.nu), 0.125, window=2
    )
    assert isinstance(rep, CoercivityReport)
    inv = inverse_bound_from_norms(2.0, 0.5)
    assert isinstance(inv, InverseReport)
    assert inv.M.contains(4.0)
