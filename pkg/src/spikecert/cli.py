"""Command line front end.

One subcommand per pipeline stage plus the end-to-end audit driver and
a deterministic test-certificate generator.  Options can also come from
a plain-text config file (`key = value` per line, `#` comments); flags
given on the command line win over the file, the file wins over
defaults.  Exit codes follow the audit contract: 0 verified, 1 a check
failed, 2 unusable input or usage error.
"""

from __future__ import annotations

import argparse
import math
import random
import sys
from typing import Dict, List, Optional

from .audit import AuditConfig, run_audit
from .basis import reference_model
from .closure import nk_closure, torus_closure
from .constants import certify_constants
from .errors import CertificateError, CertificationError
from .interval import IntervalScalar, interval_from_decimal
from .operator import OperatorConfig, assemble_jacobian
from .oracle import MeridionalGrid, standard_checks
from .residual import certify_residual
from .spaces import (
    PROFILE_SPACE,
    SOURCE_SPACE,
    CoefficientVector,
    ProfileCertificate,
    load_certificate,
    save_certificate,
)
from .stability import certify_inverse, certify_tail_coercivity, inverse_bound_from_norms

_INT_KEYS = {"modes", "seed", "precision", "j_min", "window", "grid", "lattice_radius"}
_FLOAT_KEYS = {"coupling", "coupling_rec", "tau", "tau_prime", "sigma", "amplitude"}
# decimal-string keys (nu, delta, M, K, eps, r_norm, e_norm) stay strings so
# the exact decimal reaches interval_from_decimal unrounded


def _read_config(path: str) -> Dict[str, str]:
    values: Dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, val = line.split("=", 1)
            key = key.strip().replace("-", "_")
            val = val.strip()
            if not key or not val:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            values[key] = val
    return values


def _convert_config(values: Dict[str, str]) -> Dict[str, object]:
    out: Dict[str, object] = {}
    for key, val in values.items():
        if key in _INT_KEYS:
            out[key] = int(val)
        elif key in _FLOAT_KEYS:
            out[key] = float(val)
        else:
            out[key] = val
    return out


def _iv(x: IntervalScalar) -> str:
    return f"[{x.lo:.6e}, {x.hi:.6e}]"


def _emit(text: str, out: Optional[str]) -> None:
    sys.stdout.write(text)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="spikecert",
        description="interval certification pipeline for spectral blowup profiles",
    )
    parser.add_argument(
        "--config", help="plain-text config file, key = value per line"
    )
    sub = parser.add_subparsers(dest="command")
    registry = {}
    _add = sub.add_parser

    def add_parser(name, **kw):
        p = _add(name, **kw)
        registry[name] = p
        return p

    sub.add_parser = add_parser

    def common(p, *names):
        if "profile" in names:
            p.add_argument("--profile", help="certificate JSON path")
        if "model" in names:
            p.add_argument("--model", default="reference", help="basis model name")
            p.add_argument("--coupling", type=float, default=1.0)
            p.add_argument("--coupling-rec", type=float, default=None)
            p.add_argument("--seed", type=int, default=0)
        if "modes" in names:
            p.add_argument("--modes", type=int, default=450, help="truncation level")
        if "out" in names:
            p.add_argument("--out", help="also write the output to this path")
        if "precision" in names:
            p.add_argument("--precision", type=int, default=53)

    p = sub.add_parser("audit", help="full pipeline, tagged log, exit code")
    common(p, "profile", "model", "modes", "out", "precision")
    p.add_argument("--tau-prime", type=float, default=SOURCE_SPACE.tau)
    p.add_argument("--j-min", type=int, default=1200)
    p.add_argument("--window", type=int, default=2048)
    p.add_argument("--lattice-radius", type=int, default=3)

    p = sub.add_parser("residual", help="certified residual norm of a profile")
    common(p, "profile", "model", "modes", "out")
    p.add_argument("--nu", help="override the certificate viscosity (decimal)")

    p = sub.add_parser("inverse", help="verified inverse bound M")
    common(p, "profile", "model", "modes", "out")
    p.add_argument("--r-norm", help="declared candidate-inverse norm (decimal)")
    p.add_argument("--e-norm", help="declared residual-matrix norm (decimal)")

    p = sub.add_parser("tail", help="tail coercivity constant gamma")
    common(p, "profile", "model", "modes", "out")
    p.add_argument("--j-min", type=int, default=1200)
    p.add_argument("--window", type=int, default=2048)
    p.add_argument("--c-prof", help="profile envelope constant (decimal)")

    p = sub.add_parser("constants", help="recovery, convolution and K constants")
    common(p, "model", "modes", "out")
    p.add_argument("--tau", type=float, default=PROFILE_SPACE.tau)
    p.add_argument("--tau-prime", type=float, default=SOURCE_SPACE.tau)
    p.add_argument("--kernel-cap", type=float, default=None)

    p = sub.add_parser("closure", help="scalar closure verdict from constants")
    common(p, "out")
    p.add_argument("--delta", required=True, help="residual bound (decimal)")
    p.add_argument("--M", required=True, help="inverse bound (decimal)")
    p.add_argument("--K", required=True, help="lipschitz bound (decimal)")
    p.add_argument("--eps", help="transfer error for the torus variant (decimal)")

    p = sub.add_parser("oracle", help="grid falsification battery")
    p.add_argument(
        "suite",
        nargs="?",
        default="all",
        choices=["all", "conjugation", "divergence", "axis", "reconstruction"],
    )
    p.add_argument("--grid", type=int, default=256, help="nodes per direction")
    common(p, "out")

    p = sub.add_parser("gen-profile", help="deterministic random test certificate")
    common(p, "modes", "out")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nu", default="0.005")
    p.add_argument("--tau", type=float, default=PROFILE_SPACE.tau)
    p.add_argument("--sigma", type=float, default=0.05)
    p.add_argument("--amplitude", type=float, default=1.0)
    return parser, registry


def _require_profile(args) -> str:
    if not getattr(args, "profile", None):
        raise SystemExit2("--profile is required for this subcommand")
    return args.profile


class SystemExit2(Exception):
    """Usage-level failure: message printed, exit code 2."""


def _model(args):
    if args.model != "reference":
        raise SystemExit2(f"unknown model {args.model!r}; only 'reference' exists")
    return reference_model(args.seed, args.coupling, args.coupling_rec)


def _op_config(args, cert) -> OperatorConfig:
    nu = cert.nu
    if getattr(args, "nu", None):
        nu = interval_from_decimal(args.nu)
    return OperatorConfig(model=_model(args), nu=nu, truncation_N=args.modes)


def _cmd_audit(args) -> int:
    path = _require_profile(args)
    cfg = AuditConfig(
        coupling=args.coupling,
        coupling_rec=args.coupling_rec,
        truncation_N=args.modes,
        tau_prime=args.tau_prime,
        j_min=args.j_min,
        window=args.window,
        lattice_radius=args.lattice_radius,
        precision=args.precision,
        seed=args.seed,
    )
    result = run_audit(path, cfg)
    _emit(result.log.render(), args.out)
    return result.exit_code


def _cmd_residual(args) -> int:
    cert = load_certificate(_require_profile(args))
    rep = certify_residual(cert, _op_config(args, cert), PROFILE_SPACE)
    text = (
        f"delta_fin  = {_iv(rep.delta_fin)}\n"
        f"delta_tail = {_iv(rep.delta_tail)}\n"
        f"delta      = {_iv(rep.delta)}\n"
    )
    _emit(text, args.out)
    return 0


def _cmd_inverse(args) -> int:
    if args.r_norm or args.e_norm:
        if not (args.r_norm and args.e_norm):
            raise SystemExit2("--r-norm and --e-norm must be given together")
        rep = inverse_bound_from_norms(
            interval_from_decimal(args.r_norm), interval_from_decimal(args.e_norm)
        )
    else:
        cert = load_certificate(_require_profile(args))
        rep = certify_inverse(assemble_jacobian(cert.coefficients, _op_config(args, cert)))
    lines = [
        f"R_norm = {_iv(rep.R_norm)}",
        f"E_norm = {_iv(rep.E_norm)}",
        f"M      = {_iv(rep.M)}" if rep.verified else "M      = (not certified)",
        f"verified = {rep.verified}",
    ]
    if rep.diagnostic:
        lines.append(f"diagnostic = {rep.diagnostic}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0 if rep.verified else 1


def _cmd_tail(args) -> int:
    cert = load_certificate(_require_profile(args))
    if args.c_prof:
        c_prof = interval_from_decimal(args.c_prof)
    else:
        c_prof = cert.constant("C_prof") or interval_from_decimal("0.125")
    rep = certify_tail_coercivity(
        cert, _op_config(args, cert), c_prof, j_min=args.j_min, window=args.window
    )
    text = (
        f"gamma = {_iv(rep.gamma)}\n"
        f"j_min = {rep.j_min}\n"
        f"monotone_tail_verified = {rep.monotone_tail_verified}\n"
        f"verified = {rep.verified}\n"
    )
    if rep.diagnostic:
        text += f"diagnostic = {rep.diagnostic}\n"
    _emit(text, args.out)
    return 0 if rep.verified else 1


def _cmd_constants(args) -> int:
    rep = certify_constants(
        args.tau,
        args.tau_prime,
        _model(args),
        args.modes,
        PROFILE_SPACE,
        SOURCE_SPACE,
        kernel_cap=args.kernel_cap,
    )
    text = (
        f"C_rec_map = {_iv(rep.C_rec_map)} (argmax k = {rep.argmax_k})\n"
        f"C_conv    = {_iv(rep.C_conv)}\n"
        f"K         = {_iv(rep.K)}\n"
    )
    _emit(text, args.out)
    return 0


def _cmd_closure(args) -> int:
    delta = interval_from_decimal(args.delta)
    m = interval_from_decimal(args.M)
    k = interval_from_decimal(args.K)
    local = nk_closure(delta, m, k)
    lines = [
        f"local product 2 delta M K = {_iv(local.product)}",
        f"local verdict = {local.verdict}",
    ]
    verdict = local.verdict
    if args.eps:
        torus = torus_closure(delta, interval_from_decimal(args.eps), m, k)
        lines.append(f"torus product 2 (delta + eps) M K = {_iv(torus.product)}")
        lines.append(f"torus verdict = {torus.verdict}")
        verdict = verdict and torus.verdict
    _emit("\n".join(lines) + "\n", args.out)
    return 0 if verdict else 1


_SUITE_PREFIX = {
    "conjugation": "conjugation",
    "divergence": "divergence",
    "axis": "axis",
    "reconstruction": "blowup",
}


def _cmd_oracle(args) -> int:
    grid = MeridionalGrid(n_rho=args.grid, n_zeta=args.grid)
    rows = standard_checks(grid)
    if args.suite != "all":
        prefix = _SUITE_PREFIX[args.suite]
        rows = [r for r in rows if r["check"].startswith(prefix)]
    width = max(len(r["check"]) for r in rows)
    lines = [
        f"{r['check']:<{width}}  {r['value']:>14.6e}  "
        f"{r['criterion']:<28} {'pass' if r['passed'] else 'FAIL'}"
        for r in rows
    ]
    _emit("\n".join(lines) + "\n", args.out)
    return 0 if all(r["passed"] for r in rows) else 1


def _cmd_gen_profile(args) -> int:
    if not args.out:
        raise SystemExit2("gen-profile needs --out for the certificate path")
    if args.modes < 1:
        raise SystemExit2("--modes must be at least 1")
    rng = random.Random(args.seed)
    entries = {}
    for j in range(1, args.modes + 1):
        u = 0.1 + 0.9 * rng.random()
        sign = 1.0 if rng.random() < 0.5 else -1.0
        c = sign * args.amplitude * math.exp(-args.tau * j) * u
        entries[j] = IntervalScalar(c, c)
    cert = ProfileCertificate(
        coefficients=CoefficientVector.from_dict(entries, max_mode=args.modes),
        nu=interval_from_decimal(args.nu),
        sigma=args.sigma,
        tau_audited=args.tau,
        constants=None,
    )
    save_certificate(cert, args.out)
    sys.stdout.write(
        f"wrote {args.modes}-mode certificate (seed {args.seed}) to {args.out}\n"
    )
    return 0


_HANDLERS = {
    "audit": _cmd_audit,
    "residual": _cmd_residual,
    "inverse": _cmd_inverse,
    "tail": _cmd_tail,
    "constants": _cmd_constants,
    "closure": _cmd_closure,
    "oracle": _cmd_oracle,
    "gen-profile": _cmd_gen_profile,
}


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, registry = _build_parser()

    # pull --config early so its values become parser defaults that
    # explicit flags then override
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config")
    known, _ = probe.parse_known_args(argv)
    if known.config:
        try:
            overrides = _convert_config(_read_config(known.config))
        except (OSError, ValueError) as exc:
            sys.stderr.write(f"spikecert: bad config file: {exc}\n")
            return 2
        for subparser in registry.values():
            subparser.set_defaults(
                **{
                    k: v
                    for k, v in overrides.items()
                    if any(a.dest == k for a in subparser._actions)
                }
            )

    args = parser.parse_args(argv)
    if not args.command:
        parser.print_usage(sys.stderr)
        return 2
    try:
        return _HANDLERS[args.command](args)
    except SystemExit2 as exc:
        sys.stderr.write(f"spikecert: {exc}\n")
        return 2
    except (CertificateError, OSError) as exc:
        sys.stderr.write(f"spikecert: unreadable input: {exc}\n")
        return 2
    except (CertificationError, ValueError) as exc:
        sys.stderr.write(f"spikecert: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
