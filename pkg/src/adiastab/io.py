"""Experiment configuration, deterministic JSON and RFC-4180 CSV output."""

import csv
import io as _io
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from ._validation import DEFAULT_TOL
from .exceptions import AdiastabError, ConfigError
from .generators import GENERATORS, build, ensemble_seeds
from .graded import family_from_json

COMMANDS = ("spectra", "verify", "sweep", "mincut")
KNOWN_KEYS = {
    "family", "grading", "T", "s_grid", "tolerances", "seed", "out", "bounds_only", "q_matrix",
    "self_check", "stoquastic", "cut", "max_dim", "ensemble", "cut_grid", "dump_unitaries",
}


# -- JSON ----------------------------------------------------------------------------

def to_plain(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats to JSON-safe values.

    Non-finite floats become the strings ``"inf"``, ``"-inf"`` and ``"nan"``;
    complex numbers become ``[re, im]``.
    """
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_plain(obj.real), to_plain(obj.imag)]
    return obj


def dumps(obj):
    """Canonical JSON: sorted keys, shortest round-trip floats, trailing newline."""
    return json.dumps(to_plain(obj), sort_keys=True, indent=1, allow_nan=False) + "\n"


def write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(obj))


def _cell(x):
    x = to_plain(x)
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, list):
        return json.dumps(x)
    return str(x)


def csv_text(header, rows):
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text(header, rows))


# -- configuration ---------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    family: dict
    grading: object = None
    T: list = field(default_factory=lambda: [10.0])
    s_grid: object = 257
    tolerances: dict = field(default_factory=dict)
    seed: int = 0
    out: str = None
    bounds_only: bool = False
    q_matrix: str = "full"
    self_check: bool = True
    stoquastic: object = "auto"
    cut: list = None
    max_dim: int = 16
    ensemble: int = None
    cut_grid: int = 17
    dump_unitaries: bool = False
    base_dir: str = "."

    @property
    def tol(self):
        return DEFAULT_TOL.updated(**self.tolerances)

    @property
    def n_report(self):
        return int(self.s_grid) if np.isscalar(self.s_grid) else len(self.s_grid)

    def families(self):
        """Build the family (or ensemble members), regraded when a grading is configured."""
        fams = _build_families(self)
        if isinstance(self.grading, list):
            fams = [f.regrade(self.grading) for f in fams]
        tol = self.tol
        for f in fams:
            f.tol = tol
        return fams


def _fail(field_name, msg):
    raise ConfigError(field_name, msg)


def _bool(obj, key, default):
    v = obj.get(key, default)
    if not isinstance(v, bool):
        _fail(key, f"expected true/false, got {v!r}")
    return v


def _int(obj, key, default, lo=None, hi=None):
    v = obj.get(key, default)
    if v is None:
        return None
    if isinstance(v, bool) or not isinstance(v, int):
        _fail(key, f"expected an integer, got {v!r}")
    if (lo is not None and v < lo) or (hi is not None and v > hi):
        _fail(key, f"value {v} out of range [{lo}, {hi}]")
    return v


def _T_list(v):
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        v = [v]
    if isinstance(v, dict):
        if set(v) != {"logspace"}:
            _fail("T", "object form must be {\"logspace\": [a, b, n]}")
        ls = v["logspace"]
        if not (isinstance(ls, list) and len(ls) == 3 and all(isinstance(x, (int, float)) for x in ls)):
            _fail("T.logspace", "expected [a, b, n] with T = 10**linspace(a, b, n)")
        a, b, n = ls
        if int(n) != n or n < 1:
            _fail("T.logspace", "n must be a positive integer")
        v = np.logspace(a, b, int(n)).tolist()
    if not isinstance(v, list) or not v:
        _fail("T", "expected a positive number, a list or {\"logspace\": [a, b, n]}")
    out = []
    for i, t in enumerate(v):
        if isinstance(t, bool) or not isinstance(t, (int, float)) or not (t > 0 and math.isfinite(t)):
            _fail(f"T[{i}]", f"T values must be positive and finite, got {t!r}")
        out.append(float(t))
    return out


def _s_grid(v):
    if isinstance(v, int) and not isinstance(v, bool):
        if v < 2:
            _fail("s_grid", "need at least 2 points")
        return v
    if isinstance(v, list) and len(v) >= 2 and all(isinstance(x, (int, float)) for x in v):
        if any(not 0 <= x <= 1 for x in v):
            _fail("s_grid", "values must lie in [0, 1]")
        if v[0] != 0 or v[-1] != 1 or any(b <= a for a, b in zip(v, v[1:])):
            _fail("s_grid", "an explicit grid must increase from 0 to 1")
        return [float(x) for x in v]
    _fail("s_grid", f"expected a point count or a list of s values, got {v!r}")


def _index_list(v, key):
    if not isinstance(v, list) or not v or not all(isinstance(i, int) and not isinstance(i, bool) for i in v):
        _fail(key, f"expected a nonempty list of integer indices, got {v!r}")
    return sorted(set(v))


def parse_config(obj, base_dir="."):
    """Validate a decoded config object; raises ConfigError naming the offending field."""
    if not isinstance(obj, dict):
        _fail("<root>", "config must be a JSON object")
    unknown = sorted(set(obj) - KNOWN_KEYS)
    if unknown:
        _fail(unknown[0], "unknown config key")
    fam = obj.get("family")
    if not isinstance(fam, dict):
        _fail("family", "required object with \"generator\" (+ \"params\") or \"file\"")
    if ("generator" in fam) == ("file" in fam):
        _fail("family", "give exactly one of \"generator\" and \"file\"")
    if "generator" in fam:
        if fam["generator"] not in GENERATORS:
            _fail("family.generator", f"unknown generator {fam['generator']!r}; choose from {sorted(GENERATORS)}")
        if not isinstance(fam.get("params", {}), dict):
            _fail("family.params", "expected an object")
        extra = set(fam) - {"generator", "params"}
    else:
        if not isinstance(fam["file"], str):
            _fail("family.file", "expected a path string")
        extra = set(fam) - {"file"}
    if extra:
        _fail(f"family.{sorted(extra)[0]}", "unknown key")
    grading = obj.get("grading")
    if grading is not None and grading != "search":
        grading = _index_list(grading, "grading")
    tols = obj.get("tolerances", {})
    if not isinstance(tols, dict):
        _fail("tolerances", "expected an object")
    for k, v in tols.items():
        if k not in DEFAULT_TOL.__dataclass_fields__:
            _fail(f"tolerances.{k}", "unknown tolerance")
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
            _fail(f"tolerances.{k}", f"expected a positive number, got {v!r}")
    q = obj.get("q_matrix", "full")
    if q not in ("full", "block"):
        _fail("q_matrix", f"expected \"full\" or \"block\", got {q!r}")
    stoq = obj.get("stoquastic", "auto")
    if stoq not in ("auto", True, False):
        _fail("stoquastic", "expected \"auto\", true or false")
    out = obj.get("out")
    if out is not None and not isinstance(out, str):
        _fail("out", "expected a directory path string")
    cut = obj.get("cut")
    if cut is not None:
        cut = _index_list(cut, "cut")
    seed = _int(obj, "seed", 0, 0, 2 ** 64 - 1)
    return ExperimentConfig(
        family=fam,
        grading=grading,
        T=_T_list(obj.get("T", [10.0])),
        s_grid=_s_grid(obj.get("s_grid", 257)),
        tolerances={k: float(v) for k, v in tols.items()},
        seed=seed,
        out=out,
        bounds_only=_bool(obj, "bounds_only", False),
        q_matrix=q,
        self_check=_bool(obj, "self_check", True),
        stoquastic=stoq,
        cut=cut,
        max_dim=_int(obj, "max_dim", 16, 2, 24),
        ensemble=_int(obj, "ensemble", None, 1),
        cut_grid=_int(obj, "cut_grid", 17, 2),
        dump_unitaries=_bool(obj, "dump_unitaries", False),
        base_dir=base_dir,
    )


def load_config(path):
    """Read and validate a JSON config file."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError("--config", f"cannot read {path}: {e.strerror}") from e
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError("<json>", f"line {e.lineno} column {e.colno}: {e.msg}") from e
    return parse_config(obj, base_dir=os.path.dirname(os.path.abspath(path)))


def _build_families(cfg):
    spec = cfg.family
    if "file" in spec:
        path = spec["file"]
        if not os.path.isabs(path):
            path = os.path.join(cfg.base_dir, path)
        try:
            with open(path, encoding="utf-8") as fh:
                obj = json.load(fh)
        except OSError as e:
            raise ConfigError("family.file", f"cannot read {path}: {e.strerror}") from e
        except json.JSONDecodeError as e:
            raise ConfigError("family.file", f"line {e.lineno} column {e.colno}: {e.msg}") from e
        try:
            return [family_from_json(obj, name=os.path.basename(path))]
        except KeyError as e:
            raise ConfigError(f"family.file.{e.args[0]}", "missing field") from e
        except (AdiastabError, ValueError, TypeError) as e:
            raise ConfigError("family.file", f"{type(e).__name__}: {e}") from e
    name = spec["generator"]
    params = dict(spec.get("params", {}))
    try:
        if cfg.ensemble:
            if name != "random-graded":
                raise ConfigError("ensemble", "only the random-graded generator supports ensembles")
            return [build(name, dict(params, seed=child)) for child in ensemble_seeds(cfg.seed, cfg.ensemble)]
        return [build(name, params, seed=cfg.seed)]
    except ConfigError:
        raise
    except AdiastabError as e:
        raise ConfigError("family.params", f"{type(e).__name__}: {e}") from e
    except TypeError as e:
        raise ConfigError("family.params", str(e)) from e
    except ValueError as e:
        raise ConfigError("family.params", str(e)) from e


__all__ = [
    "COMMANDS",
    "ExperimentConfig",
    "csv_text",
    "dumps",
    "load_config",
    "parse_config",
    "to_plain",
    "write_csv",
    "write_json",
]
