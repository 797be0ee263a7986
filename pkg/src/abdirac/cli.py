"""Command-line interface: ``abdirac <command> [options]``.

Commands: classify, spectrum, gfunction, eigenfunction, sweep, verify.

Parameters come from flags, optionally layered over a ``key=value`` file given
with ``--config`` (flags win). Give either a dimensionless ``--m`` or a
physical ``--mass`` together with ``--omega`` (Omega = eB/2). Gamma accepts
radians or the tokens ``gamma0`` (2 arctan m) and ``pi``.

Exit codes: 0 success, 1 a row or verification failed, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, replace
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from .channel import (
    ChannelSpec,
    DomainError,
    PhysicalConfig,
    beta_of_gamma,
    classify,
    g_of_lambda,
    gamma0,
)
from .eigenfunction import build, default_grid
from .oracle import Thresholds, boundary_estimates, origin_estimates, verify_line
from .spectrum import Bracket, BracketKind, SpectralLine, Source, SpectrumError, channel_spectrum

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2

SPECTRUM_COLUMNS = ["l", "N", "lambda", "E_physical", "bracket_lo", "bracket_hi", "residual", "source", "status"]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    m: Optional[float] = None
    mass: Optional[float] = None
    field_omega: Optional[float] = None
    flux_kappa: float = 0.25
    gamma: str = "pi"
    l_min: int = -2
    l_max: int = 2
    lambda_max: float = 10.0
    tol: float = 1e-10
    output_format: str = "csv"
    output_path: Optional[str] = None

    def validate(self) -> "RunConfig":
        direct = self.m is not None
        physical = self.mass is not None or self.field_omega is not None
        if direct == physical:
            raise ConfigError("give either --m, or both --mass and --omega")
        if physical and (self.mass is None or self.field_omega is None):
            raise ConfigError("--mass and --omega must be given together")
        if physical and not self.field_omega > 0:
            raise ConfigError("--omega must be positive")
        if direct and self.m < 0:
            raise ConfigError("--m must be non-negative")
        if self.l_min > self.l_max:
            raise ConfigError(f"l_min={self.l_min} exceeds l_max={self.l_max}")
        if not self.lambda_max >= 0:
            raise ConfigError("--lambda-max must be non-negative")
        if not self.tol > 0:
            raise ConfigError("--tol must be positive")
        if self.output_format not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.output_format!r}")
        self.gamma_value()
        return self

    @property
    def physical(self) -> PhysicalConfig:
        if self.m is not None:
            # direct dimensionless input: Omega = 1, so E = lambda
            return PhysicalConfig(self.m, 2.0, self.flux_kappa)
        return PhysicalConfig(self.mass, 2.0 * self.field_omega, self.flux_kappa)

    @property
    def dimensionless_m(self) -> float:
        cfg = self.physical
        return abs(cfg.mass) / cfg.energy_scale

    def channel(self, l: int) -> ChannelSpec:
        return ChannelSpec(self.dimensionless_m, self.flux_kappa, l)

    def gamma_value(self, token: Optional[str] = None) -> float:
        return parse_gamma(self.gamma if token is None else token, self.dimensionless_m)

    def l_range(self) -> range:
        return range(self.l_min, self.l_max + 1)

    def critical_channel(self) -> ChannelSpec:
        ch = self.channel(math.floor(self.flux_kappa))
        if not ch.is_critical:
            raise ConfigError(f"kappa={self.flux_kappa} is an integer: no channel has self-adjoint extensions")
        return ch


def parse_gamma(token: Any, m: float) -> float:
    s = str(token).strip().lower()
    if s == "gamma0":
        return gamma0(m)
    if s == "pi":
        return math.pi
    try:
        g = float(s)
    except ValueError:
        raise ConfigError(f"gamma must be a number, 'gamma0' or 'pi' (got {token!r})") from None
    if not -math.pi < g <= math.pi:
        raise ConfigError(f"gamma={g} outside (-pi, pi]")
    return g


# ---------------------------------------------------------------------------
# formatting
# ---------------------------------------------------------------------------


def fmt(v: Any) -> str:
    """CSV cell: 17 significant digits for floats, 'inf'/'-inf' sentinels."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return f"{v:.17g}"
    return str(v)


def jsonable(v: Any) -> Any:
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, dict):
        return {k: jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    return v


def render(rows: Sequence[dict], columns: Sequence[str], output_format: str) -> str:
    if output_format == "json":
        return json.dumps([jsonable({c: r.get(c) for c in columns}) for r in rows], indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def emit(text: str, path: Optional[str], stdout) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_classify(cfg: RunConfig) -> tuple[list[dict], int]:
    rows = []
    for l in cfg.l_range():
        ch = cfg.channel(l)
        c = classify(ch)
        rows.append({"l": l, "alpha": ch.alpha, "classification": c.kind.value, "n_plus": c.n_plus, "n_minus": c.n_minus})
    return rows, EXIT_OK


def _line_row(cfg: RunConfig, ln: SpectralLine) -> dict:
    br = ln.bracket
    return {
        "l": ln.channel.l,
        "N": ln.index,
        "lambda": ln.lam,
        "E_physical": cfg.physical.energy_scale * ln.lam,
        "bracket_lo": br.lo if br else None,
        "bracket_hi": br.hi if br else None,
        "residual": ln.residual,
        "source": ln.source.value,
        "status": "ok",
    }


def spectrum_lines(cfg: RunConfig) -> tuple[list[SpectralLine], list[dict]]:
    """Lines over the configured channels, plus one error row per failed channel."""
    gamma = cfg.gamma_value()
    lines, failed = [], []
    for l in cfg.l_range():
        ch = cfg.channel(l)
        try:
            lines.extend(channel_spectrum(ch, gamma if ch.is_critical else None, cfg.lambda_max, cfg.tol))
        except (SpectrumError, DomainError, ArithmeticError) as exc:
            failed.append({"l": l, "status": f"error: {exc}"})
    key = lambda ln: (ln.lam, ln.channel.l, ln.index)
    return sorted(lines, key=key), failed


def cmd_spectrum(cfg: RunConfig) -> tuple[list[dict], int]:
    lines, failed = spectrum_lines(cfg)
    rows = [_line_row(cfg, ln) for ln in lines] + failed
    return rows, EXIT_FAILED if failed else EXIT_OK


def cmd_gfunction(cfg: RunConfig, lambdas: Iterable[float]) -> tuple[list[dict], int]:
    ch = cfg.critical_channel()
    beta = beta_of_gamma(ch, cfg.gamma_value())
    rows = [{"lambda": float(lam), "G": g_of_lambda(ch, float(lam)), "beta": beta} for lam in lambdas]
    return rows, EXIT_OK


def _find_line(cfg: RunConfig, l: int, n: int) -> SpectralLine:
    ch = cfg.channel(l)
    gamma = cfg.gamma_value() if ch.is_critical else None
    for ln in channel_spectrum(ch, gamma, cfg.lambda_max, cfg.tol):
        if ln.index == n:
            return ln
    raise ConfigError(f"no line with l={l}, N={n} below lambda_max={cfg.lambda_max}")


def cmd_eigenfunction(cfg: RunConfig, l: int, n: int) -> tuple[list[dict], dict, int]:
    ln = _find_line(cfg, l, n)
    psi = build(ln.channel, ln.lam, default_grid())
    rows = [{"x": x, "phi": p, "chi": c} for x, p, c in zip(psi.grid, psi.phi_values, psi.chi_values)]
    sx = psi.smallx
    meta = {
        "l": l,
        "N": n,
        "lambda": psi.lam,
        "form": psi.form.value,
        "norm": psi.norm,
        "smallx": {"c_phi": sx.c_phi, "p_phi": sx.p_phi, "c_chi": sx.c_chi, "p_chi": sx.p_chi},
    }
    if psi.channel.is_critical:
        _, w_raw, w_lim = boundary_estimates(psi, cfg.gamma_value())
    else:
        _, w_raw, w_lim = origin_estimates(psi)
    meta["boundary_limit_estimate"] = w_raw
    meta["boundary_limit_extrapolated"] = w_lim
    return rows, meta, EXIT_OK


def cmd_sweep(cfg: RunConfig, gammas: Sequence[str]) -> tuple[list[dict], int]:
    ch = cfg.critical_channel()
    rows = []
    status = EXIT_OK
    for token in gammas:
        g = cfg.gamma_value(token)
        beta = beta_of_gamma(ch, g)
        try:
            for ln in channel_spectrum(ch, g, cfg.lambda_max, cfg.tol):
                rows.append({"gamma": g, "beta": beta, "N": ln.index, "lambda": ln.lam, "status": "ok"})
        except (SpectrumError, ArithmeticError) as exc:
            rows.append({"gamma": g, "beta": beta, "status": f"error: {exc}"})
            status = EXIT_FAILED
    return rows, status


def _lines_from_csv(cfg: RunConfig, path: str) -> list[SpectralLine]:
    """Rebuild spectral lines from ``spectrum`` CSV output."""
    gamma = cfg.gamma_value()
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for r in csv.DictReader(fh):
            if r.get("status", "ok") != "ok":
                continue
            ch = cfg.channel(int(r["l"]))
            br = None
            if r["bracket_lo"]:
                lo, hi = float(r["bracket_lo"]), float(r["bracket_hi"])
                kind = BracketKind.AT_ZERO if lo == hi else BracketKind.ZERO_TO_POLE
                br = Bracket(lo, hi, kind, int(r["N"]))
            out.append(
                SpectralLine(
                    float(r["lambda"]),
                    ch,
                    int(r["N"]),
                    Source(r["source"]),
                    float(r["residual"]),
                    gamma if ch.is_critical else None,
                    br,
                )
            )
    return out


def cmd_verify(
    cfg: RunConfig,
    thresholds: Thresholds = Thresholds(),
    *,
    perturb: float = 0.0,
    lines_path: Optional[str] = None,
) -> tuple[list[dict], int]:
    if lines_path:
        lines, failed = _lines_from_csv(cfg, lines_path), []
    else:
        lines, failed = spectrum_lines(cfg)
    gamma = cfg.gamma_value()
    reports = []
    for ln in lines:
        rep = verify_line(ln, gamma if ln.channel.is_critical else None, perturb=perturb, thresholds=thresholds)
        d = rep.to_dict()
        d.update(N=ln.index, source=ln.source.value)
        reports.append(d)
    ok = not failed and all(r["passed"] for r in reports)
    return reports + failed, EXIT_OK if ok else EXIT_FAILED


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

_CONFIG_KEYS = {
    "m": ("m", float),
    "mass": ("mass", float),
    "omega": ("field_omega", float),
    "field_omega": ("field_omega", float),
    "kappa": ("flux_kappa", float),
    "flux_kappa": ("flux_kappa", float),
    "gamma": ("gamma", str),
    "l_min": ("l_min", int),
    "l_max": ("l_max", int),
    "lambda_max": ("lambda_max", float),
    "tol": ("tol", float),
    "format": ("output_format", str),
    "output_format": ("output_format", str),
    "out": ("output_path", str),
    "output_path": ("output_path", str),
}


def read_config_file(path: str) -> dict:
    """Plain ``key = value`` lines; '#' starts a comment; dashes and underscores are interchangeable."""
    values: dict[str, Any] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, val = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_").lower()
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            field_name, conv = _CONFIG_KEYS[key]
            try:
                values[field_name] = conv(val)
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: bad value {val!r} for {key}") from None
    return values


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value file; flags override it")
    p.add_argument("--m", type=float, help="dimensionless mass |M|/sqrt(Omega)")
    p.add_argument("--mass", type=float, help="physical mass M (needs --omega)")
    p.add_argument("--omega", type=float, dest="field_omega", help="Omega = eB/2")
    p.add_argument("--kappa", type=float, dest="flux_kappa", help="flux parameter kappa")
    p.add_argument("--gamma", help="extension angle in radians, or gamma0 / pi")
    p.add_argument("--l-min", type=int, dest="l_min")
    p.add_argument("--l-max", type=int, dest="l_max")
    p.add_argument("--lambda-max", type=float, dest="lambda_max")
    p.add_argument("--tol", type=float)
    p.add_argument("--format", dest="output_format", choices=["csv", "json"])
    p.add_argument("--out", dest="output_path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="abdirac", description="Dirac-Landau spectra with an Aharonov-Bohm flux")
    sub = parser.add_subparsers(dest="command", required=True)

    _common(sub.add_parser("classify", help="deficiency indices per channel"))
    _common(sub.add_parser("spectrum", help="eigenvalues over a range of channels"))

    p = sub.add_parser("gfunction", help="G(lambda) samples and the beta(gamma) level")
    _common(p)
    p.add_argument("--lambdas", help="comma-separated lambda values (overrides the grid)")
    p.add_argument("--points", type=int, default=401, help="grid points on [-lambda_max, lambda_max]")

    p = sub.add_parser("eigenfunction", help="sampled normalised spinor of one line")
    _common(p)
    p.add_argument("--l", type=int, required=True, dest="line_l")
    p.add_argument("--n", type=int, required=True, dest="line_n", help="line index N as printed by spectrum")
    p.add_argument("--sidecar", help="path of the JSON metadata (default: <out>.meta.json, or stderr)")

    p = sub.add_parser("sweep", help="critical-channel levels against gamma")
    _common(p)
    p.add_argument("--gammas", help="comma-separated gammas (numbers, gamma0, pi)")
    p.add_argument("--gamma-points", type=int, default=25, help="uniform grid on (-pi, pi] when --gammas is absent")

    p = sub.add_parser("verify", help="oracle checks of every line; exit 0 iff all pass")
    _common(p)
    p.add_argument("--lines", help="verify the rows of a spectrum CSV instead of recomputing")
    p.add_argument("--residual-tol", type=float, default=Thresholds.residual)
    p.add_argument("--derivative-tol", type=float, default=Thresholds.derivative)
    p.add_argument("--shooting-tol", type=float, default=Thresholds.shooting)
    p.add_argument("--boundary-tol", type=float, default=Thresholds.boundary)
    p.add_argument("--normalization-tol", type=float, default=Thresholds.normalization)
    p.add_argument("--boundary-mode", choices=["extrapolated", "raw"], default=Thresholds.boundary_mode)
    p.add_argument("--perturb", type=float, default=0.0, help=argparse.SUPPRESS)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values: dict[str, Any] = {}
    if args.config:
        values.update(read_config_file(args.config))
    for name in ("m", "mass", "field_omega", "flux_kappa", "gamma", "l_min", "l_max", "lambda_max", "tol", "output_format", "output_path"):
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    return RunConfig(**values).validate()


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"bad number list {text!r}") from None


def _gamma_grid(n: int) -> list[str]:
    if n < 1:
        raise ConfigError("--gamma-points must be >= 1")
    return [repr(-math.pi + 2.0 * math.pi * (k + 1) / n) if k + 1 < n else "pi" for k in range(n)]


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = config_from_args(args)
        cmd = args.command
        if cmd == "classify":
            rows, code = cmd_classify(cfg)
            cols = ["l", "alpha", "classification", "n_plus", "n_minus"]
        elif cmd == "spectrum":
            rows, code = cmd_spectrum(cfg)
            cols = SPECTRUM_COLUMNS
        elif cmd == "gfunction":
            lams = _float_list(args.lambdas) if args.lambdas else np.linspace(-cfg.lambda_max, cfg.lambda_max, args.points)
            rows, code = cmd_gfunction(cfg, lams)
            cols = ["lambda", "G", "beta"]
        elif cmd == "eigenfunction":
            rows, meta, code = cmd_eigenfunction(cfg, args.line_l, args.line_n)
            cols = ["x", "phi", "chi"]
            side = json.dumps(jsonable(meta), indent=1) + "\n"
            side_path = args.sidecar or (cfg.output_path + ".meta.json" if cfg.output_path else None)
            if side_path:
                emit(side, side_path, stdout)
            else:
                stderr.write(side)
        elif cmd == "sweep":
            tokens = [t.strip() for t in args.gammas.split(",")] if args.gammas else _gamma_grid(args.gamma_points)
            rows, code = cmd_sweep(cfg, tokens)
            cols = ["gamma", "beta", "N", "lambda", "status"]
        else:
            th = Thresholds(
                residual=args.residual_tol,
                derivative=args.derivative_tol,
                shooting=args.shooting_tol,
                boundary=args.boundary_tol,
                normalization=args.normalization_tol,
                boundary_mode=args.boundary_mode,
            )
            rows, code = cmd_verify(cfg, th, perturb=args.perturb, lines_path=args.lines)
            # reports are nested records: always JSON
            emit(json.dumps(jsonable(rows), indent=1) + "\n", cfg.output_path, stdout)
            return code
    except (ConfigError, DomainError, OSError) as exc:
        stderr.write(f"abdirac: configuration error: {exc}\n")
        return EXIT_CONFIG
    emit(render(rows, cols, cfg.output_format), cfg.output_path, stdout)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
