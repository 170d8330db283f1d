"""Command-line front end.

Every command reads a JSON config (``--config``); flags override the
config's seed, grid, output path and format.  Output is written once,
atomically, at the end of the run.

Exit status: 0 success, 1 disagreement (a failed ``expect`` or a
verify-paper claim that does not agree), 2 invalid configuration.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from typing import Any

from .catalog import TestFunction
from .inclusion import TheoremId, check_theorem, verify_paper
from .modulus import classify, log_grid, modulus_curve
from .scale import ScaleFunction, check_conditions
from .spaces import SpaceSpec, norm

COMMANDS = ("psi-check", "modulus", "norm", "classify", "inclusion", "verify-paper")
MIN_POINTS = 8

_NEEDS = {
    "psi-check": ("scale",),
    "modulus": ("function", "p", "scale"),
    "norm": ("function", "space"),
    "classify": ("function", "p", "scale"),
    "inclusion": ("theorem",),
    "verify-paper": (),
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    params: dict[str, Any] = field(default_factory=dict)
    grid: tuple[float, float, int] | None = None
    seed: int = 0
    out: str | None = None
    fmt: str = "json"

    def grid_values(self):
        if self.grid is None:
            return log_grid()
        return log_grid(*self.grid)


def _parse_grid(value) -> tuple[float, float, int]:
    if isinstance(value, str):
        parts = value.split(",")
        if len(parts) != 3:
            raise ConfigError("grid must be r_min,r_max,points")
        value = {"r_min": parts[0], "r_max": parts[1], "points": parts[2]}
    try:
        r_min, r_max = float(value["r_min"]), float(value["r_max"])
        pts = int(value["points"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad grid: {exc}") from exc
    if not (0 < r_min < r_max and math.isfinite(r_max)):
        raise ConfigError("grid needs 0 < r_min < r_max")
    if pts < MIN_POINTS:
        raise ConfigError(f"grid needs at least {MIN_POINTS} points")
    return r_min, r_max, pts


def build_config(args: argparse.Namespace) -> RunConfig:
    raw: dict[str, Any] = {}
    if args.config:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
    command = args.command
    if raw.get("command", command) != command:
        raise ConfigError(f"config is for {raw['command']!r}, not {command!r}")
    params = {k: v for k, v in raw.items() if k not in ("command", "grid", "seed", "output")}
    missing = [k for k in _NEEDS[command] if k not in params and not (k == "scale" and "alpha" in params)]
    if missing:
        raise ConfigError("missing parameter(s): " + ", ".join(missing))

    grid = raw.get("grid")
    if args.grid is not None:
        grid = args.grid
    grid = _parse_grid(grid) if grid is not None else None

    output = raw.get("output") or {}
    seed = args.seed if args.seed is not None else raw.get("seed", 0)
    try:
        seed = int(seed)
    except (TypeError, ValueError) as exc:
        raise ConfigError("seed must be an integer") from exc
    if seed < 0:
        raise ConfigError("seed must be non-negative")
    fmt = args.format or output.get("format") or ("csv" if command == "modulus" else "json")
    if fmt not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    out = args.out or output.get("path")
    return RunConfig(command, params, grid, seed, out, fmt)


# --------------------------------------------------------------------------
# descriptors
# --------------------------------------------------------------------------

def _function(cfg: RunConfig) -> TestFunction:
    return TestFunction.from_dict(cfg.params["function"])


def _scale(cfg: RunConfig, key: str = "scale") -> ScaleFunction:
    if key in cfg.params:
        return ScaleFunction.from_dict(cfg.params[key])
    return ScaleFunction.pure_power(float(cfg.params["alpha"]))


def _theorem_params(cfg: RunConfig) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for k, v in cfg.params.items():
        if k in ("theorem", "expect"):
            continue
        if k in ("psi", "psi1", "psi2"):
            out[k] = ScaleFunction.from_dict(v)
        elif k == "function":
            out["f"] = TestFunction.from_dict(v)
        elif k == "lambda":
            out["lam"] = float(v)
        else:
            out[k] = v
    if cfg.grid is not None:
        out["grid"] = cfg.grid_values()
    return out


def _num(x) -> Any:
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return x


# --------------------------------------------------------------------------
# commands; each returns (payload, csv rows or None, ok)
# --------------------------------------------------------------------------

def _run_psi_check(cfg):
    psi = _scale(cfg)
    rep = check_conditions(psi, int(cfg.params.get("n", 1)))
    payload = {"scale": psi.to_dict(), "conditions": rep.to_dict()}
    rows = [("condition", "status")] + [(k, rep.to_dict()[k]) for k in
                                        ("integrability", "doubling", "almost_decreasing", "right_doubling")]
    return payload, rows, True


def _run_modulus(cfg):
    f, psi, p = _function(cfg), _scale(cfg), float(cfg.params["p"])
    curve = modulus_curve(f, p, psi, cfg.grid_values(), cfg.seed)
    rows = [("r", "eta", "status")] + [(r, v, s) for r, v, s in curve.rows()]
    payload = {"function": f.to_dict(), "p": p, "scale": psi.to_dict(), "seed": cfg.seed,
               "rows": [{"r": r, "eta": _num(v), "status": s} for r, v, s in curve.rows()]}
    return payload, rows, True


def _run_norm(cfg):
    f = _function(cfg)
    spec_d = dict(cfg.params["space"])
    spec_d.setdefault("n", f.n)
    spec = SpaceSpec.from_dict(spec_d)
    rep = norm(f, spec)
    payload = {"function": f.to_dict(), **rep.to_dict()}
    rows = [("family", "value"), (spec.family, rep.value)]
    return payload, rows, _expect_ok(cfg, "finite" if rep.finite else "infinite")


def _run_classify(cfg):
    f, psi, p = _function(cfg), _scale(cfg), float(cfg.params["p"])
    s, b = classify(f, p, psi, cfg.grid_values(), cfg.seed)
    payload = {"function": f.to_dict(), "p": p, "scale": psi.to_dict(), "seed": cfg.seed,
               "vanishing": s.to_dict(), "bounded": b.to_dict()}
    rows = [("space", "status"), ("vanishing", s.status), ("bounded", b.status)]
    expect = cfg.params.get("expect")
    ok = True
    if isinstance(expect, dict):
        ok = all(expect.get(k, v) == v for k, v in (("vanishing", s.status), ("bounded", b.status)))
    return payload, rows, ok


def _run_inclusion(cfg):
    try:
        thm = TheoremId[str(cfg.params["theorem"]).upper()]
    except KeyError as exc:
        raise ConfigError(f"unknown theorem {cfg.params['theorem']!r}") from exc
    chk = check_theorem(thm, _theorem_params(cfg))
    rows = [("description", "status")] + [(i.description, i.status) for i in chk.items]
    rows.append(("conclusion", chk.conclusion))
    return chk.to_dict(), rows, _expect_ok(cfg, chk.conclusion)


def _run_verify_paper(cfg):
    grid = cfg.grid_values() if cfg.grid is not None else None
    rep = verify_paper(grid)
    payload = {"all_agree": rep.all_agree, "flagged": [r.claim_id for r in rep.flagged],
               "rows": [_deep_num(r.to_dict()) for r in rep.rows]}
    rows = [("claim_id", "agrees", "flagged")] + [(r.claim_id, r.agrees, r.flagged) for r in rep.rows]
    return payload, rows, rep.all_agree


def _expect_ok(cfg, got) -> bool:
    expect = cfg.params.get("expect")
    return expect is None or expect == got


def _deep_num(x):
    if isinstance(x, dict):
        return {k: _deep_num(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_deep_num(v) for v in x]
    if isinstance(x, float):
        return "inf" if math.isinf(x) else (None if math.isnan(x) else x)
    if hasattr(x, "item"):
        return _deep_num(x.item())
    return x


_RUNNERS = {
    "psi-check": _run_psi_check, "modulus": _run_modulus, "norm": _run_norm,
    "classify": _run_classify, "inclusion": _run_inclusion, "verify-paper": _run_verify_paper,
}


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------

def _fmt_cell(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return "%.17g" % x
    if isinstance(x, int):
        return str(x)
    return str(x)


def render(payload, rows, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_deep_num(payload), indent=2, sort_keys=True, allow_nan=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in rows:
        w.writerow([_fmt_cell(c) for c in row])
    return buf.getvalue()


def write_atomic(path: str, text: str) -> None:
    target = os.path.abspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(target), prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(cfg: RunConfig) -> int:
    try:
        payload, rows, ok = _RUNNERS[cfg.command](cfg)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{type(exc).__name__}: {exc}") from exc
    text = render(payload, rows, cfg.fmt)
    if cfg.out:
        write_atomic(cfg.out, text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stummel", description="Stummel-class moduli, Morrey and Lorentz norms.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="RNG seed (overrides config)")
    common.add_argument("--out", help="output path; stdout when absent")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--grid", help="r_min,r_max,points")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return run(build_config(args))
    except ConfigError as exc:
        print(f"stummel: invalid config: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
