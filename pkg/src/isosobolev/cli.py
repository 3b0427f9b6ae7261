"""Command-line front end.

    isosobolev constants  --profile euclidean --N 3 --p 2
    isosobolev verify     --profile product:m=1,k=3 --inequality hardy --family random
    isosobolev bliss      --profile euclidean --N 4 --p 2 --measures sobolev --budget 200
    isosobolev rearrange  --input u.csv
    isosobolev hyperbolic --profile euclidean --N 3 --p 2

Settings come from an INI file (``--config`` or ``$ISOSOBOLEV_CONFIG``) with
sections ``[run]``, ``[profile]`` and ``[geometry]``; flags override it.
Exit codes: 0 ok, 1 configuration error, 2 divergence / not hyperbolic,
3 an inequality check failed (or the numerics gave up).
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction

from . import __version__
from .bliss import FAMILIES as BLISS_FAMILIES
from .bliss import bracket_optimal_constant, measures_for_hardy, measures_for_sobolev
from .constants import SCHEMA_VERSION, compute_constants
from .errors import AccuracyError, DivergenceError, DomainError, EvaluationError
from .profile import (GEOMETRIES, PRESETS, geometry_preset, is_p_hyperbolic, preset,
                      profile_from_geometry)
from .rearrange import PiecewiseFunction, check_cavalieri, decreasing_rearrangement
from .specfn import unit_ball_volume
from .verify import VERIFY_FAMILIES, family_functions, verify_hardy, verify_hardy_sobolev, verify_sobolev

CONFIG_ENV = "ISOSOBOLEV_CONFIG"
EXIT_OK, EXIT_CONFIG, EXIT_DIVERGENT, EXIT_FAIL = 0, 1, 2, 3
COMMANDS = ("constants", "verify", "bliss", "rearrange", "hyperbolic")
INEQUALITIES = ("sobolev", "hardy", "hardy-sobolev")

_RUN_KEYS = {"N", "p", "q", "tol", "family", "budget", "seed", "out", "format",
             "inequality", "measures", "input", "kind"}
_PROFILE_KEYS = {
    "euclidean": {"N", "C_N"},
    "product": {"m", "k", "a", "b", "C_N"},
    "paraboloid": {"N", "beta", "a", "b", "C_N"},
    "bounded_geometry": {"N", "nu", "theta", "v0", "C_N"},
    "power_log": {"gamma", "k", "z", "N", "C_N"},
    "induced": {"C_N"},
}
_GEOMETRY_KEYS = {"euclidean": {"N"}, "product_model": {"m", "k", "cross_volume", "matching_ratio"}}
_INT_KEYS = {"N", "m", "k", "budget", "seed"}


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    N: int | None = None
    p: float = 2.0
    q: float | None = None
    tol: float = 1e-8
    family: str | None = None
    budget: int = 20
    seed: int | None = None
    out: str | None = None
    format: str = "json"
    inequality: str = "sobolev"
    measures: str = "sobolev"
    input: str | None = None
    kind: str = "step"
    profile: dict = field(default_factory=dict)
    geometry: dict = field(default_factory=dict)

    def echo(self):
        d = {k: v for k, v in self.__dict__.items() if k not in ("out",)}
        return d


def _number(key, text):
    text = str(text).strip()
    try:
        if key in _INT_KEYS:
            v = float(text)
            if v != int(v):
                raise ValueError
            return int(v)
        return float(text)
    except ValueError:
        raise ConfigError(f"{key} = {text!r} is not a valid {'integer' if key in _INT_KEYS else 'number'}") from None


def _parse_spec(text, allowed_families, what):
    """``name`` or ``name:key=value,key=value``."""
    name, _, rest = str(text).partition(":")
    spec = {"family": name.strip()}
    if rest.strip():
        for item in rest.split(","):
            k, eq, v = item.partition("=")
            if not eq:
                raise ConfigError(f"bad {what} parameter {item!r}; expected key=value")
            spec[k.strip()] = v.strip()
    if spec["family"] not in allowed_families:
        raise ConfigError(f"unknown {what} {spec['family']!r}; choose from {sorted(allowed_families)}")
    return spec


def _read_config(path):
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None
    out = {"run": {}, "profile": {}, "geometry": {}}
    for section in cp.sections():
        if section not in out:
            raise ConfigError(f"unknown config section [{section}]")
        out[section] = dict(cp[section])
    unknown = set(out["run"]) - _RUN_KEYS
    if unknown:
        raise ConfigError(f"unknown key(s) in [run]: {sorted(unknown)}")
    return out


def _check_keys(spec, table, what):
    fam = spec.get("family")
    if fam is None:
        raise ConfigError(f"[{what}] needs a family")
    if fam not in table:
        raise ConfigError(f"unknown {what} {fam!r}; choose from {sorted(table)}")
    unknown = set(spec) - {"family"} - table[fam]
    if unknown:
        raise ConfigError(f"unknown {what} parameter(s) for {fam}: {sorted(unknown)}")
    return {k: (v if k == "family" else _number(k, v)) for k, v in spec.items()}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"INI config (default: ${CONFIG_ENV})")
    common.add_argument("--profile", help="family[:key=value,...], e.g. product:m=1,k=3,a=1,b=1")
    common.add_argument("--geometry", help="family[:key=value,...], e.g. product_model:m=1,k=3,cross_volume=6.28")
    common.add_argument("--N", type=str)
    common.add_argument("--p", type=str)
    common.add_argument("--q", type=str)
    common.add_argument("--family")
    common.add_argument("--budget", type=str)
    common.add_argument("--seed", type=str)
    common.add_argument("--tol", type=str)
    common.add_argument("--out")
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--inequality", choices=INEQUALITIES)
    common.add_argument("--measures", choices=("sobolev", "hardy"))
    common.add_argument("--input", help="CSV with header x,value (rearrange)")
    common.add_argument("--kind", choices=("step", "linear"))
    parser = argparse.ArgumentParser(prog="isosobolev", description=__doc__.splitlines()[0],
                                     parents=[])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def resolve_config(args, environ=os.environ) -> RunConfig:
    path = args.config or environ.get(CONFIG_ENV)
    file_cfg = _read_config(path) if path else {"run": {}, "profile": {}, "geometry": {}}
    run = dict(file_cfg["run"])
    for key in _RUN_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            run[key] = val
    cfg = RunConfig(args.command)
    for key, val in run.items():
        if key in ("N", "p", "q", "tol", "budget", "seed"):
            setattr(cfg, key, _number(key, val))
        else:
            setattr(cfg, key, val)
    if cfg.format not in ("json", "csv"):
        raise ConfigError(f"format must be json or csv, got {cfg.format!r}")
    if cfg.inequality not in INEQUALITIES:
        raise ConfigError(f"inequality must be one of {INEQUALITIES}")
    if cfg.measures not in ("sobolev", "hardy"):
        raise ConfigError("measures must be sobolev or hardy")
    if cfg.kind not in ("step", "linear"):
        raise ConfigError("kind must be step or linear")
    if not cfg.tol > 0:
        raise ConfigError("tol must be positive")
    if cfg.budget < 1:
        raise ConfigError("budget must be positive")

    prof = dict(file_cfg["profile"])
    if args.profile:
        prof = _parse_spec(args.profile, set(_PROFILE_KEYS), "profile")
    geom = dict(file_cfg["geometry"])
    if args.geometry:
        geom = _parse_spec(args.geometry, set(_GEOMETRY_KEYS), "geometry")
    if cfg.command != "rearrange":
        if not prof:
            raise ConfigError("no profile given (--profile or a [profile] section)")
        cfg.profile = _check_keys(prof, _PROFILE_KEYS, "profile")
        if geom:
            cfg.geometry = _check_keys(geom, _GEOMETRY_KEYS, "geometry")
        _fill_dimensions(cfg)
    elif not cfg.input:
        raise ConfigError("rearrange needs --input")
    if cfg.command == "verify" and cfg.inequality == "hardy-sobolev":
        if cfg.q is None:
            raise ConfigError("hardy-sobolev needs q")
        if not cfg.q < cfg.p:
            raise ConfigError(f"hardy-sobolev needs q < p, got q={cfg.q}, p={cfg.p}")
    if cfg.q is not None and cfg.command == "constants" and not cfg.q < cfg.p:
        raise ConfigError(f"the Hardy-Sobolev exponent needs q < p, got q={cfg.q}, p={cfg.p}")
    if not cfg.p > 1.0:
        raise ConfigError(f"p must exceed 1, got {cfg.p}")
    return cfg


def _fill_dimensions(cfg):
    prof, geom = cfg.profile, cfg.geometry
    fam = prof["family"]
    if fam == "product":
        n_prof = prof.get("m", 0) + prof.get("k", 0)
        if "m" not in prof or "k" not in prof:
            raise ConfigError("product profile needs m and k")
    elif fam == "induced":
        if not geom:
            raise ConfigError("the induced profile needs a geometry")
        n_prof = geom.get("N") if geom["family"] == "euclidean" else geom.get("m", 0) + geom.get("k", 0)
    else:
        n_prof = prof.get("N", cfg.N)
        if n_prof is None:
            raise ConfigError(f"{fam} profile needs N")
        prof["N"] = n_prof
    if cfg.N is None:
        cfg.N = n_prof
    elif cfg.N != n_prof:
        raise ConfigError(f"N={cfg.N} disagrees with the profile's dimension {n_prof}")
    if geom:
        if geom["family"] == "euclidean":
            geom.setdefault("N", cfg.N)
            n_geom = geom["N"]
        else:
            n_geom = geom.get("m", 0) + geom.get("k", 0)
        if n_geom != cfg.N:
            raise ConfigError(f"geometry dimension {n_geom} disagrees with N={cfg.N}")


def build_objects(cfg: RunConfig):
    """Profile and geometry from a resolved config (geometry may be None)."""
    geom = None
    if cfg.geometry:
        params = {k: v for k, v in cfg.geometry.items() if k != "family"}
        geom = geometry_preset(cfg.geometry["family"], **params)
    fam = cfg.profile["family"]
    params = {k: v for k, v in cfg.profile.items() if k != "family"}
    if fam == "induced":
        prof = profile_from_geometry(geom, **params)
    else:
        prof = preset(fam, **params)
    if geom is None:
        geom = _default_geometry(cfg)
    return prof, geom


def _default_geometry(cfg):
    fam = cfg.profile["family"]
    if fam == "euclidean" and "C_N" not in cfg.profile:
        return geometry_preset("euclidean", N=cfg.N)
    if fam == "product":
        # the cylinder factor whose large-volume coefficient is b
        k = cfg.profile["k"]
        b = cfg.profile.get("b", 1.0)
        H = (b / k) ** k / unit_ball_volume(k)
        return geometry_preset("product_model", m=cfg.profile["m"], k=k, cross_volume=H)
    return None


def _clean(x):
    if isinstance(x, float):
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(x, Fraction):
        return float(x)
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if hasattr(x, "item") and not isinstance(x, (str, bytes)):
        return _clean(x.item())
    return x


def _envelope(cfg, result, status):
    return {
        "schema": SCHEMA_VERSION,
        "command": cfg.command,
        "status": status,
        "config": _clean(cfg.echo()),
        "result": _clean(result),
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


_ENVELOPE_KEYS = {"schema", "command", "status", "config", "result", "timestamp"}
_RESULT_KEYS = {
    "constants": {"profile", "N", "p", "hyperbolic", "B1", "B1_attained_at", "B2", "C1", "C2",
                  "k_pstar_p", "tolerances"},
    "verify": {"inequality", "family", "constant", "max_ratio", "all_pass", "rows"},
    "bliss": {"observed_sup", "B_tilde", "upper", "within_bracket", "family", "budget"},
    "rearrange": {"rearranged", "cavalieri", "nonincreasing"},
    "hyperbolic": {"profile", "p", "hyperbolic", "integral"},
}


def validate_report(report):
    """Check a (re-parsed) JSON report against the schema; raises ``ValueError``."""
    if not isinstance(report, dict):
        raise ValueError("report must be a JSON object")
    missing = _ENVELOPE_KEYS - set(report)
    if missing:
        raise ValueError(f"report lacks {sorted(missing)}")
    if report["schema"] != SCHEMA_VERSION:
        raise ValueError(f"unknown schema {report['schema']!r}")
    if report["command"] not in COMMANDS:
        raise ValueError(f"unknown command {report['command']!r}")
    if report["status"] not in ("ok", "divergent", "failed"):
        raise ValueError(f"unknown status {report['status']!r}")
    res = report["result"]
    if not isinstance(res, dict):
        raise ValueError("result must be an object")
    if "error" in res or (res.get("hyperbolic") is False and report["command"] != "hyperbolic"):
        return report
    need = _RESULT_KEYS[report["command"]] - set(res)
    if need:
        raise ValueError(f"{report['command']} result lacks {sorted(need)}")
    return report


def _rows_for_csv(report):
    res = report["result"]
    if isinstance(res, dict) and isinstance(res.get("rows"), list):
        rows = []
        for r in res["rows"]:
            flat = dict(r)
            fn = flat.pop("function", {})
            flat["function"] = json.dumps(fn, sort_keys=True) if isinstance(fn, dict) else fn
            rows.append(flat)
        return rows
    rows = []

    def walk(prefix, v):
        if isinstance(v, dict):
            for k in sorted(v):
                walk(f"{prefix}.{k}" if prefix else k, v[k])
        elif isinstance(v, list):
            rows.append({"key": prefix, "value": json.dumps(v)})
        else:
            rows.append({"key": prefix, "value": v})

    walk("", {"schema": report["schema"], "status": report["status"], **res})
    return rows


def render(report, fmt):
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"
    rows = _rows_for_csv(report)
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


def _emit(cfg, report):
    text = render(report, cfg.format)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands

def cmd_constants(cfg):
    prof, geom = build_objects(cfg)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rep = compute_constants(prof, cfg.p, geom, cfg.q, cfg.tol)
    result = rep.as_dict()
    result.pop("schema", None)
    result["warnings"] = sorted({str(w.message) for w in caught})
    if not rep.hyperbolic:
        result["divergent_integral"] = "tail"
        return result, EXIT_DIVERGENT
    return result, EXIT_OK


def _constants_for(cfg, prof, geom):
    if geom is None:
        raise ConfigError(f"profile {prof.name!r} has no default geometry; pass --geometry")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rep = compute_constants(prof, cfg.p, geom, cfg.q if cfg.inequality == "hardy-sobolev" else None,
                                cfg.tol)
    return rep, sorted({str(w.message) for w in caught})


def cmd_verify(cfg):
    prof, geom = build_objects(cfg)
    rep, warns = _constants_for(cfg, prof, geom)
    if not rep.hyperbolic:
        return {"hyperbolic": False, "divergent_integral": "tail"}, EXIT_DIVERGENT
    family = cfg.family or ("talenti" if cfg.inequality != "hardy" else "power_cutoff")
    if family not in VERIFY_FAMILIES:
        raise ConfigError(f"unknown verify family {family!r}; choose from {VERIFY_FAMILIES}")
    rows = []
    for phi in family_functions(geom, cfg.p, family, cfg.budget, cfg.seed):
        if cfg.inequality == "sobolev":
            chk = verify_sobolev(prof, geom, cfg.p, phi, 1e-6, constants=rep)
        elif cfg.inequality == "hardy":
            chk = verify_hardy(prof, geom, cfg.p, phi, 1e-6, constants=rep)
        else:
            chk = verify_hardy_sobolev(prof, geom, cfg.p, cfg.q, phi, 1e-6, constants=rep)
        rows.append(chk.as_row())
    ok = all(r["pass"] for r in rows)
    const = {"sobolev": rep.C1, "hardy": rep.C2, "hardy-sobolev": rep.hardy_sobolev_constant}[cfg.inequality]
    result = {
        "inequality": cfg.inequality,
        "family": family,
        "seed": cfg.seed,
        "constant": const,
        "max_ratio": max(r["ratio"] for r in rows),
        "all_pass": ok,
        "geometry": geom.describe(),
        "profile": prof.describe(),
        "warnings": warns,
        "rows": rows,
    }
    return result, EXIT_OK if ok else EXIT_FAIL


def cmd_bliss(cfg):
    prof, geom = build_objects(cfg)
    hyp = is_p_hyperbolic(prof, cfg.p)
    if not hyp.hyperbolic:
        return {"hyperbolic": False, "divergent_integral": "tail"}, EXIT_DIVERGENT
    if cfg.measures == "sobolev":
        nu, mu, q = measures_for_sobolev(prof, cfg.N, cfg.p)
    else:
        if geom is None:
            raise ConfigError("hardy measures need a geometry")
        nu, mu, q = measures_for_hardy(prof, geom, cfg.p)
    family = cfg.family or "indicators"
    if family not in BLISS_FAMILIES:
        raise ConfigError(f"unknown bliss family {family!r}; choose from {BLISS_FAMILIES}")
    res = bracket_optimal_constant(nu, mu, cfg.p, q, family, cfg.budget, cfg.seed, cfg.tol)
    result = {"measures": cfg.measures, "q": q, "profile": prof.describe(), **res.as_dict()}
    return result, EXIT_OK if res.within_bracket else EXIT_FAIL


def read_function_csv(path, kind="step"):
    """Parse ``x,value`` rows into an exact ``PiecewiseFunction``.

    Step data: the value on row i holds on ``[x_i, x_{i+1})``; the last row
    only closes the domain and its value may be left empty.
    """
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["x", "value"]:
            raise ConfigError(f"{path}:1: header must be 'x,value'")
        xs, vs = [], []
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise ConfigError(f"{path}:{line}: expected 2 fields, got {len(row)}")
            try:
                x = Fraction(row[0].strip())
                v = Fraction(row[1].strip()) if row[1].strip() else None
            except (ValueError, ZeroDivisionError):
                raise ConfigError(f"{path}:{line}: not a number: {row!r}") from None
            if xs and not x > xs[-1]:
                raise ConfigError(f"{path}:{line}: x must be strictly increasing")
            if x < 0:
                raise ConfigError(f"{path}:{line}: x must be nonnegative")
            xs.append(x)
            vs.append((v, line))
    if len(xs) < 2:
        raise ConfigError(f"{path}: need at least two rows")
    body = vs[:-1] if kind == "step" else vs
    for v, line in body:
        if v is None:
            raise ConfigError(f"{path}:{line}: missing value")
    vals = [v for v, _ in body]
    if kind == "step":
        return PiecewiseFunction.step(xs, vals)
    return PiecewiseFunction.linear([float(x) for x in xs], [float(v) for v in vals])


def _exact_str(v):
    return str(v) if isinstance(v, Fraction) else repr(float(v))


def cmd_rearrange(cfg):
    u = read_function_csv(cfg.input, cfg.kind)
    us = decreasing_rearrangement(u)
    p = cfg.p
    p_used = int(p) if float(p).is_integer() else p
    lhs, rhs, residual = check_cavalieri(u, p_used)
    vals = us.values
    monotone = all(b <= a for a, b in zip(vals, vals[1:]))
    result = {
        "kind": u.kind,
        "p": p,
        "exact": u.exact,
        "rearranged": {"breakpoints": [float(x) for x in us.breakpoints],
                       "values": [float(v) for v in us.values],
                       "breakpoints_exact": [_exact_str(x) for x in us.breakpoints],
                       "values_exact": [_exact_str(v) for v in us.values]},
        "cavalieri": {"lhs": float(lhs), "rhs": float(rhs), "residual": float(residual),
                      "residual_exact": _exact_str(residual)},
        "nonincreasing": monotone,
    }
    return result, EXIT_OK


def cmd_hyperbolic(cfg):
    prof, _ = build_objects(cfg)
    hyp = is_p_hyperbolic(prof, cfg.p)
    return {"profile": prof.describe(), "p": cfg.p, **hyp.as_dict()}, EXIT_OK


_DISPATCH = {
    "constants": cmd_constants,
    "verify": cmd_verify,
    "bliss": cmd_bliss,
    "rearrange": cmd_rearrange,
    "hyperbolic": cmd_hyperbolic,
}


def run(argv=None, environ=os.environ):
    """Entry point returning the exit code (``main`` wraps it for scripts)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    cfg = None
    try:
        cfg = resolve_config(args, environ)
        result, code = _DISPATCH[cfg.command](cfg)
        status = {EXIT_OK: "ok", EXIT_DIVERGENT: "divergent", EXIT_FAIL: "failed"}[code]
    except (ConfigError, DomainError) as exc:
        print(f"isosobolev: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as exc:
        result, code, status = {"error": str(exc)}, EXIT_DIVERGENT, "divergent"
    except (AccuracyError, EvaluationError) as exc:
        result, code, status = {"error": str(exc)}, EXIT_FAIL, "failed"
    _emit(cfg, _envelope(cfg, result, status))
    if code == EXIT_DIVERGENT:
        print(f"isosobolev: divergent: {result.get('error', 'profile is not p-hyperbolic')}",
              file=sys.stderr)
    return code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
