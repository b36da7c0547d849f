"""Experiment harness: the ``circlecover`` command.

Ten subcommands drive the six library modules with deterministic seeding and
machine-readable outputs:

== ============== ==========================================================
 1 shepp           series classification for a length family
 2 cover-sim       Monte Carlo random-arc covering trials
 3 tree-run        colored dyadic-tree percolation trials
 4 dim-estimate    box-count dimension of a shrinking-target limsup set
 5 cassels-search  two-form product minima / uniform-delta sweeps
 6 bohr-check      exact Bohr-set counts against their bracket
 7 gcdsum-check    pairwise gcd sums against a bounded-ratio hypothesis
 8 local-count     weighted local solution counts against the exact cap
 9 psi-regime      covering-regime classification of a length rule
10 gap-profile     growth/gap diagnostics of an integer sequence
== ============== ==========================================================

Global flags on every subcommand: ``--seed``, ``--precision-bits``,
``--trials``, ``--out``, ``--format {csv,json}``, ``--workers`` and
``--config FILE``.  The config file is a flat YAML key/value tree mirroring
the flags (optionally nested one level under the subcommand name);
command-line flags override file values, which override built-in defaults.

Every run writes ``<out>/<command>.json`` (resolved config echo, summary,
wall clock, library version), the record table (``<command>.csv`` or
embedded in the JSON, per ``--format``), and a ``<command>.meta.json``
sidecar which is the only artifact carrying timestamps.  Rerunning an
identical configuration reproduces every record bit for bit and the CSV
bodies byte for byte.  Trial ``k`` always derives its generator from
``(seed, k)``, so enlarging ``--trials`` never reshuffles earlier trials,
and worker pools only change scheduling, never results.
"""

from __future__ import annotations

import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Mapping, Optional, Union

import click
import yaml

from . import __version__
from ._report import RunReport, json_scalar, render_csv, write_report
from ._seeding import trial_rng
from .arith import (
    BohrPreconditionError,
    BohrQuery,
    PrecisionError,
    QuadraticSurd,
    UnitPoint,
    bohr_bracket,
    bohr_count,
    golden_ratio,
)
from .cassels import (
    CasselsInstance,
    PsiFamily,
    product_minima,
    psi_regime,
    uniform_delta_check,
)
from .coverset import (
    LengthSequence,
    dvoretzky_trial,
    expected_uncovered,
    explicit_lengths,
    harmonic,
    shepp_critical,
    shepp_terms,
)
from .limsupdim import (
    DigitSet,
    LimsupConfig,
    default_scales,
    estimate_dimension,
    resolvability_band,
)
from .sequences import (
    GcdSumHypothesis,
    GeometricReal,
    LocalCountInstance,
    PiatetskiShapiro,
    Polynomial,
    PrimePower,
    gap_profile,
    gcd_sum,
    gcd_sum_verdict,
    generate,
    load_explicit,
    local_count_sum,
)
from .tree import (
    BitStreamPoints,
    ColoringRecord,
    CoveringSchedule,
    IIDPoints,
    SequencePoints,
    iid_event_bound,
    run_tree,
    thick_survival_trial,
    uncolored_path_exists,
)

__all__ = [
    "ExperimentConfig",
    "RunReport",
    "SchemaError",
    "run",
    "emit_plotdata",
    "parse_config",
    "serialize_config",
    "main",
]


class SchemaError(ValueError):
    """A configuration value violates the command's schema."""


# ---------------------------------------------------------------------------
# Value parsers.  Each one takes a raw scalar from flags or a config file and
# returns the *normalized* scalar stored in the config echo; runners rebuild
# rich objects from the normalized form, so serialize(parse(...)) is stable.
# ---------------------------------------------------------------------------


def _as_int(raw: object) -> int:
    if isinstance(raw, bool):
        raise SchemaError(f"expected an integer, got {raw!r}")
    if isinstance(raw, int):
        return raw
    if isinstance(raw, float):
        if raw != int(raw):
            raise SchemaError(f"expected an integer, got {raw!r}")
        return int(raw)
    return int(str(raw).strip())


def _int_min(lo: int) -> Callable[[object], int]:
    def parse(raw: object) -> int:
        v = _as_int(raw)
        if v < lo:
            raise SchemaError(f"must be >= {lo}, got {v}")
        return v

    return parse


def _as_float(raw: object) -> float:
    if isinstance(raw, bool):
        raise SchemaError(f"expected a number, got {raw!r}")
    return float(raw)


def _as_bool(raw: object) -> bool:
    if isinstance(raw, bool):
        return raw
    s = str(raw).strip().lower()
    if s in ("true", "1", "yes", "on"):
        return True
    if s in ("false", "0", "no", "off"):
        return False
    raise SchemaError(f"expected a boolean, got {raw!r}")


def _as_str(raw: object) -> str:
    return str(raw)


def _frac(raw: object) -> Fraction:
    """Exact rational from int/str ('p/q' or decimal) or float (as decimal)."""
    if isinstance(raw, bool):
        raise SchemaError(f"expected a rational, got {raw!r}")
    if isinstance(raw, Fraction):
        return raw
    if isinstance(raw, int):
        return Fraction(raw)
    if isinstance(raw, float):
        return Fraction(str(raw))
    return Fraction(str(raw).strip())


def _frac_str(raw: object) -> str:
    return str(_frac(raw))


def _pos_frac_str(raw: object) -> str:
    f = _frac(raw)
    if f <= 0:
        raise SchemaError(f"must be positive, got {f}")
    return str(f)


def _as_range(raw: object) -> str:
    """Normalize an inclusive integer range 'a..b'."""
    s = str(raw).strip()
    parts = s.split("..")
    if len(parts) != 2:
        raise SchemaError(f"expected a range 'a..b', got {raw!r}")
    try:
        a, b = (int(p) for p in parts)
    except ValueError:
        raise SchemaError(f"expected a range 'a..b', got {raw!r}") from None
    if a > b:
        raise SchemaError(f"range start {a} exceeds end {b}")
    return f"{a}..{b}"


def _range_pair(norm: str) -> tuple[int, int]:
    a, b = norm.split("..")
    return int(a), int(b)


def _choice(*values: str) -> Callable[[object], str]:
    def parse(raw: object) -> str:
        s = str(raw).strip().lower()
        if s not in values:
            raise SchemaError(f"expected one of {values}, got {raw!r}")
        return s

    return parse


def _grid_str(raw: object) -> str:
    """Normalize a grid: 'a..b' (powers of two 2^a..2^b) or 'n1,n2,...'."""
    s = str(raw).strip()
    if ".." in s:
        return _as_range(s)
    try:
        vals = sorted({int(p) for p in s.split(",") if p.strip()})
    except ValueError as e:
        raise SchemaError(f"bad grid {raw!r}: {e}") from None
    if not vals or vals[0] < 2:
        raise SchemaError(f"grid values must be integers >= 2, got {raw!r}")
    return ",".join(str(v) for v in vals)


def _grid_values(norm: str) -> tuple[int, ...]:
    if ".." in norm:
        a, b = _range_pair(norm)
        return tuple(1 << k for k in range(a, b + 1))
    return tuple(int(p) for p in norm.split(","))


def _point_spec(raw: object) -> str:
    """Normalize a point on the circle: named surd or exact rational."""
    s = str(raw).strip().lower()
    if s in ("golden", "sqrt2m1"):
        return s
    if s.startswith("sqrt:"):
        try:
            d = int(s.split(":", 1)[1])
        except ValueError:
            raise SchemaError(f"bad point spec {raw!r}") from None
        if d < 2:
            raise SchemaError("sqrt:D needs D >= 2")
        return f"sqrt:{d}"
    return str(_frac(raw))


def _point(norm: str):
    if norm == "golden":
        return golden_ratio()
    if norm == "sqrt2m1":
        return QuadraticSurd(-1, 1, 2, 1)
    if norm.startswith("sqrt:"):
        return QuadraticSurd(0, 1, int(norm.split(":", 1)[1]), 1)
    return Fraction(norm)


def _seq_spec(raw: object) -> str:
    """Normalize a sequence spec; parsing it validates the form."""
    s = str(raw).strip()
    _seq_variant(s)  # raises on malformed specs
    return s


def _seq_variant(spec: str):
    s = spec.strip()
    low = s.lower()
    if low == "pow2":
        return GeometricReal(Fraction(2), Fraction(2))
    if low == "pow10":
        return GeometricReal(Fraction(10), Fraction(10))
    if low == "squares":
        return Polynomial((0, 0, 1))
    try:
        if low.startswith("geom:"):
            parts = s.split(":")
            if len(parts) != 3:
                raise SchemaError("geom spec is geom:Q0:R")
            return GeometricReal(_frac(parts[1]), _frac(parts[2]))
        if low.startswith("poly:"):
            coeffs = tuple(int(c) for c in s.split(":", 1)[1].split(","))
            return Polynomial(coeffs)
        if low.startswith("primepower:"):
            return PrimePower(int(s.split(":", 1)[1]))
        if low.startswith("ps:"):
            return PiatetskiShapiro(_frac(s.split(":", 1)[1]))
    except (ValueError, TypeError) as e:
        raise SchemaError(f"bad sequence spec {spec!r}: {e}") from None
    if low.startswith("explicit:"):
        path = s.split(":", 1)[1]
        if not Path(path).is_file():
            raise SchemaError(f"explicit sequence file not found: {path}")
        return load_explicit(path)
    raise SchemaError(
        f"unknown sequence spec {spec!r}; use pow2, pow10, squares, "
        "geom:Q0:R, poly:c0,c1,..., primepower:D, ps:C or explicit:PATH"
    )


def _digit_set_spec(raw: object) -> str:
    s = str(raw).strip().lower()
    if s in ("full", "full:2", "cantor"):
        return "cantor" if s == "cantor" else "full"
    if s.startswith("full:"):
        try:
            b = int(s.split(":", 1)[1])
        except ValueError:
            raise SchemaError(f"bad grid spec {raw!r}") from None
        if b < 2:
            raise SchemaError("full:B needs base B >= 2")
        return f"full:{b}"
    raise SchemaError(f"grid must be full, full:B or cantor, got {raw!r}")


def _digit_set(norm: str) -> DigitSet:
    if norm == "cantor":
        return DigitSet.cantor_middle_thirds()
    if norm == "full":
        return DigitSet.full(2)
    return DigitSet.full(int(norm.split(":", 1)[1]))


def _family_spec(raw: object) -> str:
    return _choice("harmonic", "shepp-critical", "explicit")(raw)


def _lengths_from(cfg: Mapping[str, object]) -> LengthSequence:
    family = cfg["family"]
    if family == "harmonic":
        return harmonic(_frac(cfg["c"]))
    if family == "shepp-critical":
        return shepp_critical(float(cfg["c"]))
    path = cfg.get("lengths_file")
    if not path:
        raise SchemaError("family=explicit needs --lengths-file")
    values = []
    for line in Path(str(path)).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            values.append(Fraction(line))
    if not values:
        raise SchemaError(f"no length values in {path}")
    return explicit_lengths(values)


def _psi_name(raw: object) -> str:
    return _choice("one", "log2sq")(raw)


def _named_psi(norm: str) -> Optional[Callable[[float], float]]:
    if norm == "log2sq":
        return lambda x: math.log2(x) ** 2
    return None  # "one": keep the hypothesis default


# ---------------------------------------------------------------------------
# Command schemas.
# ---------------------------------------------------------------------------

_REQUIRED = object()


@dataclass(frozen=True)
class _Field:
    parse: Callable[[object], object]
    default: object = _REQUIRED


def _common_fields(
    *, trials: Optional[int], precision: int = 64
) -> dict[str, _Field]:
    return {
        "seed": _Field(_int_min(0), 0),
        "precision_bits": _Field(_int_min(16), precision),
        "trials": _Field(_int_min(1), 1 if trials is None else trials),
        "out": _Field(_as_str, None),
        "format": _Field(_choice("csv", "json"), "csv"),
        "workers": _Field(_int_min(1), 1),
    }


_SCHEMAS: dict[str, dict[str, _Field]] = {
    "shepp": {
        **_common_fields(trials=None),
        "family": _Field(_family_spec, "harmonic"),
        "c": _Field(_frac_str, "1"),
        "n": _Field(_int_min(100), 100000),
        "lengths_file": _Field(_as_str, None),
        "max_rows": _Field(_int_min(1), 4096),
    },
    "cover-sim": {
        **_common_fields(trials=100),
        "family": _Field(_family_spec, "harmonic"),
        "c": _Field(_frac_str, "1"),
        "n_arcs": _Field(_int_min(1), 1000),
        "lengths_file": _Field(_as_str, None),
    },
    "tree-run": {
        **_common_fields(trials=100),
        "source": _Field(_choice("iid", "seq", "bits"), "iid"),
        "L": _Field(_pos_frac_str, _REQUIRED),
        "nu": _Field(_pos_frac_str, "1"),
        "mode": _Field(_choice("plain", "thick"), "plain"),
        "levels": _Field(_as_range, _REQUIRED),
        "threshold_base": _Field(_pos_frac_str, None),
        "threshold_log2": _Field(_frac_str, None),
        "buffer_eps": _Field(_pos_frac_str, None),
        "path_R": _Field(_int_min(1), None),
        "seq": _Field(_seq_spec, "pow2"),
        "x": _Field(_frac_str, None),
        "dump_coloring": _Field(_as_bool, False),
    },
    "dim-estimate": {
        **_common_fields(trials=None),
        "seq": _Field(_seq_spec, "pow2"),
        "nu": _Field(_pos_frac_str, "1"),
        "G": _Field(_digit_set_spec, "full"),
        "depths": _Field(_as_range, None),
        "tail": _Field(_as_range, "16..16384"),
        "seeds": _Field(_int_min(5), 8),
    },
    "cassels-search": {
        **_common_fields(trials=20, precision=192),
        "mode": _Field(_choice("uniform", "minima"), "uniform"),
        "alpha": _Field(_point_spec, "golden"),
        "beta": _Field(_as_str, "random"),
        "gamma": _Field(_point_spec, "0"),
        "delta": _Field(_point_spec, "0"),
        "n": _Field(_int_min(2), 1000000),
        "C": _Field(_as_float, 10.0),
        "delta_grid": _Field(_int_min(1), 1000),
    },
    "bohr-check": {
        **_common_fields(trials=None),
        "alpha": _Field(_point_spec, "golden"),
        "n": _Field(_int_min(1), 1000),
        "eps": _Field(_pos_frac_str, "1/25"),
        "gamma": _Field(_point_spec, "0"),
        "b": _Field(_int_min(2), 300),
    },
    "gcdsum-check": {
        **_common_fields(trials=None),
        "seq": _Field(_seq_spec, "primepower:2"),
        "nu": _Field(_pos_frac_str, "2"),
        "eps": _Field(_pos_frac_str, "1/2"),
        "psi": _Field(_psi_name, "one"),
        "grid": _Field(_grid_str, "4..7"),
    },
    "local-count": {
        **_common_fields(trials=None),
        "j": _Field(_int_min(1), _REQUIRED),
        "L": _Field(_pos_frac_str, "1000"),
        "B": _Field(_frac_str, "0"),
        "b_grid": _Field(_int_min(1), None),
        "seq": _Field(_seq_spec, "pow10"),
        "count": _Field(_int_min(1), 40),
        "budget": _Field(_int_min(1), 10000000),
    },
    "psi-regime": {
        **_common_fields(trials=None, precision=128),
        "k": _Field(_int_min(0), 2),
        "power": _Field(_as_float, 1.0),
        "scale": _Field(_as_float, 1.0),
        "alpha": _Field(_point_spec, "golden"),
        "gamma": _Field(_point_spec, "0"),
        "b": _Field(_int_min(2), 2),
        "L": _Field(_int_min(1), 4),
        "C": _Field(_as_float, 8.0),
        "eps": _Field(_as_float, 0.125),
        "horizon": _Field(_int_min(2), 1000000),
        "snap": _Field(_as_bool, False),
    },
    "gap-profile": {
        **_common_fields(trials=None),
        "seq": _Field(_seq_spec, "pow2"),
        "count": _Field(_int_min(3), 64),
        "eps": _Field(_pos_frac_str, "1/10"),
    },
}


def _validate(command: str, raw: Mapping[str, object]) -> dict:
    if command not in _SCHEMAS:
        raise SchemaError(
            f"unknown command {command!r}; expected one of {sorted(_SCHEMAS)}"
        )
    schema = _SCHEMAS[command]
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise SchemaError(f"{command}: unknown parameter(s) {unknown}")
    resolved: dict[str, object] = {}
    for key, field in schema.items():
        if key in raw and raw[key] is not None:
            try:
                resolved[key] = field.parse(raw[key])
            except SchemaError as e:
                raise SchemaError(f"{command}.{key}: {e}") from None
            except (ValueError, TypeError, ZeroDivisionError) as e:
                raise SchemaError(f"{command}.{key}: {e}") from None
        elif field.default is _REQUIRED:
            raise SchemaError(f"{command}: missing required parameter {key!r}")
        else:
            resolved[key] = field.default
    return resolved


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated command configuration: the command name plus the fully
    resolved flat parameter record (every value a plain scalar)."""

    command: str
    params: Mapping[str, object]

    @classmethod
    def resolve(
        cls, command: str, raw: Optional[Mapping[str, object]] = None
    ) -> "ExperimentConfig":
        return cls(command, _validate(command, dict(raw or {})))


# ---------------------------------------------------------------------------
# Shared runner helpers.
# ---------------------------------------------------------------------------


def _map_trials(fn: Callable[[int], object], n: int, workers: int) -> list:
    """Ordered per-trial results; the pool changes scheduling, not output."""
    if workers <= 1:
        return [fn(k) for k in range(n)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n)))


def _mean_stderr(values: list[float]) -> tuple[float, float]:
    n = len(values)
    mean = math.fsum(values) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var / n)


Extras = list[tuple[str, tuple[str, ...], list[tuple]]]
RunnerOut = tuple[tuple[str, ...], list[tuple], dict, Extras]


# ---------------------------------------------------------------------------
# Runners.  Each returns (columns, records, summary, extra_tables) with every
# cell already a plain scalar; exact rationals ride along as 'p/q' strings.
# ---------------------------------------------------------------------------


def _run_shepp(cfg: dict) -> RunnerOut:
    lengths = _lengths_from(cfg)
    n = int(cfg["n"])
    rep = shepp_terms(lengths, n)
    stride = max(1, -(-n // int(cfg["max_rows"])))
    records = [(k + 1, float(rep.log_terms[k])) for k in range(0, n, stride)]
    summary = {
        "family": cfg["family"],
        "c": cfg["c"],
        "n_terms": rep.n_terms,
        "fitted_exponent": float(rep.fitted_exponent),
        "numeric_verdict": rep.numeric_verdict.name,
        "closed_form_verdict": (
            rep.closed_form.name if rep.closed_form is not None else None
        ),
        "verdict": rep.verdict.name,
        "row_stride": stride,
    }
    return ("n", "log_term"), records, summary, []


def _run_cover_sim(cfg: dict) -> RunnerOut:
    lengths = _lengths_from(cfg)
    n_arcs = int(cfg["n_arcs"])
    trials = int(cfg["trials"])
    seed = int(cfg["seed"])
    precision = int(cfg["precision_bits"])

    def one(k: int):
        return dvoretzky_trial(lengths, n_arcs, trial_rng(seed, k), precision)

    results = _map_trials(one, trials, int(cfg["workers"]))
    records = [
        (k, n_arcs, float(r.uncovered_measure), str(r.uncovered_measure),
         r.components)
        for k, r in enumerate(results)
    ]
    mean, stderr = _mean_stderr([float(r.uncovered_measure) for r in results])
    exact_mean = (
        sum((r.uncovered_measure for r in results), Fraction(0)) / trials
    )
    expected = float(expected_uncovered(lengths, n_arcs))
    summary = {
        "trials": trials,
        "n_arcs": n_arcs,
        "mean_uncovered": mean,
        "mean_uncovered_exact": str(exact_mean),
        "stderr": stderr,
        "expected_uncovered": expected,
        "abs_z": abs(mean - expected) / stderr if stderr > 0 else None,
        "covered_fraction": (
            sum(1 for r in results if r.uncovered_measure == 0) / trials
        ),
    }
    columns = ("trial", "n_arcs", "uncovered_measure", "uncovered_exact",
               "components")
    return columns, records, summary, []


def _tree_schedule(cfg: dict) -> CoveringSchedule:
    return CoveringSchedule(
        mass=Fraction(str(cfg["L"])),
        nu=Fraction(str(cfg["nu"])),
        buffer_eps=(
            Fraction(str(cfg["buffer_eps"])) if cfg["buffer_eps"] else None
        ),
    )


def _tree_source_factory(cfg: dict, n_max: int) -> Callable[[int], object]:
    """Per-trial point-source constructor for the configured source kind."""
    kind = cfg["source"]
    seed = int(cfg["seed"])
    if kind == "iid":
        return lambda k: IIDPoints(trial_rng(seed, k))
    if kind == "bits":
        return lambda k: BitStreamPoints(trial_rng(seed, k))

    needed = _tree_schedule(cfg).cumulative(n_max)
    if needed > 10**7:
        raise SchemaError(
            f"sequence source needs {needed} points through level {n_max}; "
            "reduce --levels or --L (limit 10^7)"
        )
    terms = generate(_seq_variant(str(cfg["seq"])), max(int(needed), 1))
    ints = []
    for t in terms:
        frac = Fraction(t)
        if frac.denominator != 1:
            raise SchemaError("sequence source needs integer terms")
        ints.append(frac.numerator)
    qbits = max(1, ints[-1].bit_length())
    xbits = max(int(cfg["precision_bits"]), qbits + n_max + 64)
    fixed_x = cfg["x"]

    def make(k: int):
        if fixed_x is not None:
            x = UnitPoint.from_real(Fraction(str(fixed_x)), xbits)
        else:
            x = UnitPoint.random(trial_rng(seed, k), bits=xbits)
        return SequencePoints(q=lambda i: ints[i - 1], x=x)

    return make


def _run_tree(cfg: dict) -> RunnerOut:
    n0, n_max = _range_pair(str(cfg["levels"]))
    mode = str(cfg["mode"])
    trials = int(cfg["trials"])
    schedule = _tree_schedule(cfg)
    t_base = (
        Fraction(str(cfg["threshold_base"])) if cfg["threshold_base"] else None
    )
    t_log2 = (
        Fraction(str(cfg["threshold_log2"]))
        if cfg["threshold_log2"] is not None else None
    )
    path_R = cfg["path_R"]
    R = int(path_R) if path_R is not None else n_max - n0
    if mode == "plain" and n0 + R > n_max:
        raise SchemaError(
            f"path length R={R} needs levels through {n0 + R}, got {n_max}"
        )
    make_source = _tree_source_factory(cfg, n_max)
    dump = bool(cfg["dump_coloring"])

    def one(k: int):
        source = make_source(k)
        if mode == "thick":
            survived, stats = thick_survival_trial(
                source, schedule, n0, n_max,
                threshold_base=t_base, threshold_log2=t_log2,
            )
            return survived, stats, None
        record = ColoringRecord()
        stats = run_tree(
            source, schedule, n0, n_max, mode="plain",
            threshold_base=t_base, threshold_log2=t_log2, record=record,
        )
        event = uncolored_path_exists(record, n0, R)
        runs = record.to_runs() if dump else None
        return event, stats, runs

    results = _map_trials(one, trials, int(cfg["workers"]))
    records: list[tuple] = []
    coloring_rows: list[tuple] = []
    hits = 0
    for k, (flag, stats, runs) in enumerate(results):
        hits += bool(flag)
        for s in stats:
            records.append(
                (k, s.level, s.survivor_count, s.colored_hits,
                 s.threshold_met)
            )
        if runs is not None:
            for level in sorted(runs):
                packed = ";".join(f"{a}:{b}" for a, b in runs[level])
                coloring_rows.append((k, level, packed))

    summary: dict[str, object] = {
        "trials": trials,
        "mode": mode,
        "source": cfg["source"],
        "levels": cfg["levels"],
        "L": cfg["L"],
    }
    if mode == "thick":
        summary["survivals"] = hits
        summary["survival_frequency"] = hits / trials
    else:
        summary["path_R"] = R
        summary["path_events"] = hits
        summary["path_frequency"] = hits / trials
        if cfg["source"] == "iid":
            summary["iid_event_bound"] = iid_event_bound(
                n0, R, Fraction(str(cfg["L"]))
            )
    extras: Extras = []
    if dump:
        extras.append(("coloring", ("trial", "level", "runs"), coloring_rows))
    columns = ("trial", "level", "survivors", "colored_hits", "threshold_met")
    return columns, records, summary, extras


def _feasible_depths(
    requested: tuple[int, int],
    nu: Fraction,
    tail: tuple[int, int],
    base: int,
) -> tuple[int, int]:
    """Clip a requested depth range to scales whose resolvability window
    meets the tail (the estimator rejects depths whose arcs are all far
    from the cell size)."""
    n0, n1 = tail
    ok = []
    for j in range(requested[0], requested[1] + 1):
        lo, hi = resolvability_band(j, nu, base)
        if min(n1, hi) > max(n0, lo - 1):
            ok.append(j)
    if len(ok) < 3:
        raise SchemaError(
            f"fewer than 3 of the requested depths {requested[0]}.."
            f"{requested[1]} are resolvable for tail {n0}..{n1}; widen the "
            "tail or move the depth range"
        )
    return ok[0], ok[-1]


def _run_dim_estimate(cfg: dict) -> RunnerOut:
    variant = _seq_variant(str(cfg["seq"]))
    nu = Fraction(str(cfg["nu"]))
    digits = _digit_set(str(cfg["G"]))
    tail = _range_pair(str(cfg["tail"]))
    if cfg["depths"] is None:
        scales = default_scales(nu, tail, digits.base)
        requested = scales
    else:
        requested = _range_pair(str(cfg["depths"]))
        scales = _feasible_depths(requested, nu, tail, digits.base)
    est = estimate_dimension(
        LimsupConfig(variant, nu, tail, scales),
        digits,
        seeds=int(cfg["seeds"]),
        master_seed=int(cfg["seed"]),
    )
    records = [tuple(row) for row in est.counts]
    summary = {
        "slope": est.slope,
        "intercept": est.intercept,
        "residual": est.residual,
        "slope_spread": est.slope_spread,
        "per_seed_slopes": list(est.per_seed_slopes),
        "verdict": est.verdict,
        "grid_base": est.grid_base,
        "depths_requested": f"{requested[0]}..{requested[1]}",
        "depths_used": f"{scales[0]}..{scales[1]}",
        "depths_clamped": scales != requested,
        "tail": cfg["tail"],
        "seeds": int(cfg["seeds"]),
    }
    return ("seed", "j", "count"), records, summary, []


def _run_cassels(cfg: dict) -> RunnerOut:
    alpha = _point(str(cfg["alpha"]))
    gamma = _point(str(cfg["gamma"]))
    N = int(cfg["n"])
    if cfg["mode"] == "minima":
        beta_spec = str(cfg["beta"])
        if beta_spec == "random":
            raise SchemaError("mode=minima needs an explicit --beta")
        inst = CasselsInstance(
            alpha, _point(_point_spec(beta_spec)), gamma,
            _point(str(cfg["delta"])), N,
        )
        rep = product_minima(inst, bits=int(cfg["precision_bits"]))
        records = [
            (r.n, r.dist_alpha, r.dist_beta, r.normalized)
            for r in rep.records
        ]
        summary = {
            "mode": "minima",
            "N": N,
            "bits": rep.bits,
            "minimum": rep.minimum,
            "n_records": len(records),
        }
        columns = ("n", "dist_alpha", "dist_beta", "normalized")
        return columns, records, summary, []

    C = float(cfg["C"])
    m = int(cfg["delta_grid"])
    seed = int(cfg["seed"])
    beta_spec = str(cfg["beta"])
    trials = int(cfg["trials"]) if beta_spec == "random" else 1

    def one(k: int):
        if beta_spec == "random":
            beta = float(trial_rng(seed, k).random())
        else:
            beta = _point(_point_spec(beta_spec))
        return beta, uniform_delta_check(alpha, gamma, beta, N, C, m)

    results = _map_trials(one, trials, int(cfg["workers"]))
    records = []
    passes = 0
    for k, (beta, rep) in enumerate(results):
        passes += rep.all_pass
        beta_str = repr(beta) if isinstance(beta, float) else str(beta)
        records.append(
            (k, beta_str, rep.all_pass, rep.fail_count, str(rep.worst_delta),
             rep.worst_least_n)
        )
    summary = {
        "mode": "uniform",
        "N": N,
        "C": C,
        "delta_grid": m,
        "n_beta": trials,
        "n_pass": passes,
        "pass_fraction": passes / trials,
    }
    columns = ("trial", "beta", "all_pass", "fail_count", "worst_delta",
               "worst_least_n")
    return columns, records, summary, []


def _run_bohr(cfg: dict) -> RunnerOut:
    alpha = _point(str(cfg["alpha"]))
    gamma = _point(str(cfg["gamma"]))
    N = int(cfg["n"])
    eps = Fraction(str(cfg["eps"]))
    bits = int(cfg["precision_bits"])
    bval = int(cfg["b"])

    count = bohr_count(
        BohrQuery(alpha=alpha, N=N, eps=eps, gamma=gamma, b=bval,
                  precision=bits)
    )
    hom = bohr_count(
        BohrQuery(alpha=alpha, N=N, eps=eps, b=bval, precision=bits)
    )
    double = bohr_count(
        BohrQuery(alpha=alpha, N=N, eps=2 * eps, b=bval, precision=bits)
    )
    note = None
    try:
        lower, upper = bohr_bracket(
            BohrQuery(alpha=alpha, N=N, eps=eps, b=bval, precision=bits)
        )
        in_bracket = bool(lower <= hom <= upper)
    except BohrPreconditionError as e:
        lower = upper = in_bracket = None
        note = str(e)
    shift_ok = count <= double + 1

    row = (
        cfg["alpha"], N, cfg["eps"], cfg["gamma"], count, hom,
        lower, str(upper) if upper is not None else None,
        in_bracket, double, shift_ok,
    )
    summary = {
        "count": count,
        "homogeneous_count": hom,
        "bracket_lower": lower,
        "bracket_upper": upper,
        "in_bracket": in_bracket,
        "double_eps_count": double,
        "shift_ok": shift_ok,
        "precondition_ok": note is None,
    }
    if note is not None:
        summary["precondition_error"] = note
    columns = ("alpha", "N", "eps", "gamma", "count", "hom_count",
               "bracket_lower", "bracket_upper", "in_bracket",
               "double_eps_count", "shift_ok")
    return columns, [row], summary, []


def _run_gcdsum(cfg: dict) -> RunnerOut:
    variant = _seq_variant(str(cfg["seq"]))
    hyp_kwargs: dict = {
        "nu": Fraction(str(cfg["nu"])),
        "eps": Fraction(str(cfg["eps"])),
    }
    psi = _named_psi(str(cfg["psi"]))
    if psi is not None:
        hyp_kwargs["psi"] = psi
    hyp = GcdSumHypothesis(**hyp_kwargs)
    grid = _grid_values(str(cfg["grid"]))
    terms = generate(variant, 2 * max(grid))
    records = []
    for N in grid:
        r = gcd_sum(terms, hyp, N)
        lo, hi = r.density_ratio
        records.append(
            (N, float(r.value), str(r.value), float(r.rhs), float(r.ratio),
             float(lo), float(hi))
        )
    trend = gcd_sum_verdict(terms, hyp, grid)
    ratios = [float(x) for x in trend.ratios]
    summary = {
        "verdict": trend.verdict.name,
        "grid": list(grid),
        "ratios": ratios,
        "band": max(ratios) / min(ratios) if min(ratios) > 0 else None,
    }
    columns = ("N", "value", "value_exact", "rhs", "ratio",
               "density_lo", "density_hi")
    return columns, records, summary, []


def _run_local_count(cfg: dict) -> RunnerOut:
    variant = _seq_variant(str(cfg["seq"]))
    terms = generate(variant, int(cfg["count"]))
    schedule = CoveringSchedule(mass=Fraction(str(cfg["L"])))
    j = int(cfg["j"])
    if cfg["b_grid"] is not None:
        g = int(cfg["b_grid"])
        shifts = [Fraction(t, g) for t in range(g)]
    else:
        shifts = [Fraction(str(cfg["B"]))]
    records = []
    all_ok = True
    for B in shifts:
        inst = LocalCountInstance(
            j=j, B=B, schedule=schedule, budget=int(cfg["budget"])
        )
        res = local_count_sum(inst, terms)
        all_ok &= res.within_bound
        records.append(
            (j, str(B), float(res.value), str(res.value), str(res.bound),
             res.within_bound, len(res.solutions),
             res.block[0], res.block[1])
        )
    summary = {
        "j": j,
        "L": cfg["L"],
        "n_instances": len(shifts),
        "all_within_bound": bool(all_ok),
    }
    columns = ("j", "B", "value", "value_exact", "bound", "within_bound",
               "n_solutions", "block_lo", "block_hi")
    return columns, records, summary, []


def _run_psi_regime(cfg: dict) -> RunnerOut:
    psi = PsiFamily(
        int(cfg["k"]), power=float(cfg["power"]), scale=float(cfg["scale"])
    )
    diag = psi_regime(
        _point(str(cfg["alpha"])),
        _point(str(cfg["gamma"])),
        psi,
        int(cfg["b"]),
        int(cfg["L"]),
        C=float(cfg["C"]),
        eps=float(cfg["eps"]),
        horizon=int(cfg["horizon"]),
        snap_badic=bool(cfg["snap"]),
        bits=int(cfg["precision_bits"]),
    )
    records = [
        (i, w.log2_start, w.lower, w.upper)
        for i, w in enumerate(diag.windows)
    ]
    summary = {
        "classification": diag.classification.value,
        "T1": diag.T1,
        "T2": str(diag.T2),
        "S_ell_sizes": list(diag.S_ell_sizes),
        "b": diag.b,
        "L": diag.L,
        "C": diag.C,
        "eps": diag.eps,
        "horizon": diag.horizon,
        "capped": diag.capped,
        "snapped": diag.snapped,
        "analytic": diag.analytic,
        "below_threshold": diag.below_threshold,
        "below_from": diag.below_from,
        "first_exceeding": diag.first_exceeding,
        "first_below": diag.first_below,
        "n_windows": len(diag.windows),
    }
    columns = ("window", "log2_start", "lower", "upper")
    return columns, records, summary, []


def _run_gap_profile(cfg: dict) -> RunnerOut:
    terms = generate(_seq_variant(str(cfg["seq"])), int(cfg["count"]))
    prof = gap_profile(terms, eps=Fraction(str(cfg["eps"])))
    records = [
        (i + 1, float(prof.ratios[i]), float(prof.phi[i]))
        for i in range(len(prof.ratios))
    ]
    summary = {
        "eps": cfg["eps"],
        "count": int(cfg["count"]),
        "min_normalized_gap": float(prof.min_normalized_gap),
        "tail_min_normalized_gap": float(prof.tail_min_normalized_gap),
        "phi_fitted_exponent": float(prof.phi_fitted_exponent),
        "satisfies_power_gap": bool(prof.satisfies_power_gap),
        "phi_increasing": bool(prof.phi_increasing),
        "phi_subpolynomial": bool(prof.phi_subpolynomial),
    }
    return ("n", "ratio", "phi"), records, summary, []


_RUNNERS: dict[str, Callable[[dict], RunnerOut]] = {
    "shepp": _run_shepp,
    "cover-sim": _run_cover_sim,
    "tree-run": _run_tree,
    "dim-estimate": _run_dim_estimate,
    "cassels-search": _run_cassels,
    "bohr-check": _run_bohr,
    "gcdsum-check": _run_gcdsum,
    "local-count": _run_local_count,
    "psi-regime": _run_psi_regime,
    "gap-profile": _run_gap_profile,
}


def _run_with_extras(
    command: str,
    config: Union[Mapping[str, object], ExperimentConfig, None],
) -> tuple[RunReport, tuple]:
    if isinstance(config, ExperimentConfig):
        if config.command != command:
            raise SchemaError(
                f"config is for {config.command!r}, not {command!r}"
            )
        resolved = _validate(command, config.params)
    else:
        resolved = _validate(command, dict(config or {}))
    t0 = time.perf_counter()
    columns, records, summary, extras = _RUNNERS[command](resolved)
    wall = time.perf_counter() - t0
    report = RunReport(
        command=command,
        config=resolved,
        columns=tuple(columns),
        records=tuple(tuple(r) for r in records),
        summary=summary,
        wall_clock_seconds=wall,
        version=__version__,
    )
    extra_tables = tuple(
        (name, tuple(cols), tuple(tuple(r) for r in rows))
        for name, cols, rows in extras
    )
    return report, extra_tables


def run(
    command: str,
    config: Union[Mapping[str, object], ExperimentConfig, None] = None,
) -> RunReport:
    """Validate the config, execute the command, and return its report."""
    report, _ = _run_with_extras(command, config)
    return report


# ---------------------------------------------------------------------------
# Plot data.
# ---------------------------------------------------------------------------

_PLOT_KINDS = {
    "shepp": "decay",
    "tree-run": "survival",
    "dim-estimate": "dimension",
}


def _plot_rows(report: RunReport, kind: str):
    if kind == "dimension":
        base = int(report.summary.get("grid_base", 2))
        slope = report.summary.get("slope")
        intercept = report.summary.get("intercept")
        rows = [
            (seed, j, j * math.log2(base), math.log2(count), slope, intercept)
            for seed, j, count in report.records
            if count > 0
        ]
        return ("seed", "depth", "log2_scale", "log2_count", "slope",
                "intercept"), rows
    if kind == "survival":
        by_level: dict[int, list] = {}
        for _, level, survivors, _, met in report.records:
            by_level.setdefault(level, []).append((survivors, met))
        rows = []
        for level in sorted(by_level):
            entries = by_level[level]
            mean_surv = math.fsum(s for s, _ in entries) / len(entries)
            met_vals = [m for _, m in entries if m is not None]
            met_frac = (
                sum(bool(m) for m in met_vals) / len(met_vals)
                if met_vals else None
            )
            rows.append((level, mean_surv, met_frac, len(entries)))
        return ("level", "mean_survivors", "threshold_met_fraction",
                "trials"), rows
    # decay
    fitted = report.summary.get("fitted_exponent")
    rows = [(n, lt, fitted) for n, lt in report.records]
    return ("n", "log_term", "fitted_exponent"), rows


def emit_plotdata(
    report: RunReport,
    kind: str,
    out_dir: Union[str, Path, None] = None,
) -> list[Path]:
    """Write plot artifacts for a matching report: a CSV always, plus an SVG
    when matplotlib is importable.  ``kind`` is one of ``decay`` (shepp),
    ``survival`` (tree-run) or ``dimension`` (dim-estimate) and must match
    the report's command; an empty report yields a header-only CSV."""
    expected = _PLOT_KINDS.get(report.command)
    if kind not in _PLOT_KINDS.values():
        raise ValueError(
            f"unknown plot kind {kind!r}; expected one of "
            f"{sorted(set(_PLOT_KINDS.values()))}"
        )
    if expected != kind:
        raise ValueError(
            f"kind mismatch: a {report.command!r} report cannot render "
            f"{kind!r} plots"
        )
    if out_dir is None:
        out_dir = report.config.get("out")
    if out_dir is None:
        raise ValueError("no output directory: pass out_dir or set 'out'")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    columns, rows = _plot_rows(report, kind)
    csv_path = out / f"{report.command}.plot.csv"
    csv_path.write_bytes(render_csv(columns, rows).encode("utf-8"))
    written = [csv_path]

    try:
        import matplotlib
    except ImportError:
        return written
    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "circlecover"
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if kind == "dimension" and rows:
        xs = [r[2] for r in rows]
        ys = [r[3] for r in rows]
        ax.scatter(xs, ys, s=12, alpha=0.7, label="box counts")
        slope = report.summary.get("slope")
        intercept = report.summary.get("intercept")
        if slope is not None and intercept is not None:
            ax.plot(
                [min(xs), max(xs)],
                [slope * min(xs) + intercept, slope * max(xs) + intercept],
                "r-", label=f"fit slope {slope:.3f}",
            )
        ax.set_xlabel("log2 scale")
        ax.set_ylabel("log2 count")
        ax.legend()
    elif kind == "survival" and rows:
        xs = [r[0] for r in rows]
        ax.plot(xs, [r[1] for r in rows], "o-", label="mean survivors")
        ax.set_yscale("log")
        met = [(x, r[2]) for x, r in zip(xs, rows) if r[2] is not None]
        if met:
            ax2 = ax.twinx()
            ax2.plot([m[0] for m in met], [m[1] for m in met], "s--",
                     color="tab:red", label="threshold met")
            ax2.set_ylim(-0.05, 1.05)
            ax2.set_ylabel("threshold-met fraction")
        ax.set_xlabel("level")
        ax.set_ylabel("survivors")
        ax.legend(loc="upper left")
    elif rows:
        ax.plot([r[0] for r in rows], [r[1] for r in rows], lw=0.8)
        ax.set_xlabel("n")
        ax.set_ylabel("log term")
    ax.set_title(f"{report.command} ({kind})")
    fig.tight_layout()
    svg_path = out / f"{report.command}.plot.svg"
    fig.savefig(svg_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    written.append(svg_path)
    return written


# ---------------------------------------------------------------------------
# Config files.
# ---------------------------------------------------------------------------


def parse_config(text: str, command: Optional[str] = None) -> dict:
    """Parse a YAML key/value tree into a flat normalized mapping.

    Keys are flag names with ``-`` normalized to ``_``.  A nested mapping
    under a command name is merged over the top-level scalars when that
    command is requested."""
    loaded = yaml.safe_load(text) or {}
    if not isinstance(loaded, dict):
        raise SchemaError("config file must be a key/value mapping")
    flat: dict[str, object] = {}
    nested: dict[str, dict] = {}
    for key, value in loaded.items():
        if isinstance(value, dict):
            nested[str(key)] = {
                str(k).replace("-", "_"): v for k, v in value.items()
            }
        else:
            flat[str(key).replace("-", "_")] = value
    if command is not None:
        for name in (command, command.replace("-", "_")):
            if name in nested:
                flat.update(nested[name])
                break
    else:
        for sub in nested.values():
            flat.update(sub)
    return flat


def serialize_config(config: Mapping[str, object]) -> str:
    """Canonical YAML for a flat config mapping (sorted keys)."""
    return yaml.safe_dump(
        {str(k): v for k, v in config.items()},
        sort_keys=True,
        default_flow_style=False,
    )


def _config_from_file(path: Optional[str], command: str) -> dict:
    if not path:
        return {}
    return parse_config(Path(path).read_text(encoding="utf-8"), command)


# ---------------------------------------------------------------------------
# The click command tree.
# ---------------------------------------------------------------------------

# click parameter names that differ from schema keys (capitalized flags).
_PARAM_TO_KEY = {
    "l": "L",
    "g": "G",
    "c_big": "C",
    "b_shift": "B",
    "path_r": "path_R",
}

_HEADLINE: dict[str, tuple[str, ...]] = {
    "shepp": ("verdict", "fitted_exponent"),
    "cover-sim": ("mean_uncovered", "expected_uncovered", "abs_z"),
    "tree-run": ("path_frequency", "survival_frequency"),
    "dim-estimate": ("slope", "slope_spread", "depths_used"),
    "cassels-search": ("pass_fraction", "minimum"),
    "bohr-check": ("count", "in_bracket", "shift_ok"),
    "gcdsum-check": ("verdict", "band"),
    "local-count": ("all_within_bound", "n_instances"),
    "psi-regime": ("classification", "T1", "T2"),
    "gap-profile": ("min_normalized_gap", "satisfies_power_gap"),
}


def _global_flags(f):
    options = [
        click.option("--seed", type=int, default=None,
                     help="Master seed; trial k uses stream (seed, k)."),
        click.option("--precision-bits", type=int, default=None,
                     help="Fixed-point bits for exact circle arithmetic."),
        click.option("--trials", type=int, default=None,
                     help="Number of Monte Carlo trials (where applicable)."),
        click.option("--out", type=click.Path(file_okay=False), default=None,
                     help="Output directory for report artifacts."),
        click.option("--format", type=click.Choice(["csv", "json"]),
                     default=None, help="Record table carrier."),
        click.option("--workers", type=int, default=None,
                     help="Worker pool size; results never depend on it."),
        click.option("--config", "config_path",
                     type=click.Path(exists=True, dir_okay=False),
                     default=None,
                     help="YAML config mirroring the flags; flags override."),
    ]
    for opt in reversed(options):
        f = opt(f)
    return f


def _dispatch(ctx: click.Context, command: str, params: dict) -> None:
    """Resolve flags over config file over defaults, run, write artifacts."""
    config_path = params.pop("config_path", None)
    want_plot = params.pop("plot", False)
    file_cfg = _config_from_file(config_path, command)
    unknown = set(file_cfg) - set(_SCHEMAS[command])
    if unknown:
        raise SchemaError(
            f"{command}: unknown parameter(s) {sorted(unknown)} in config "
            "file"
        )

    raw: dict[str, object] = {}
    for pname, value in params.items():
        key = _PARAM_TO_KEY.get(pname, pname)
        source = ctx.get_parameter_source(pname)
        if source is not None and source.name == "COMMANDLINE":
            raw[key] = value
        elif key in file_cfg:
            raw[key] = file_cfg[key]
        elif value is not None:
            raw[key] = value

    report, extra_tables = _run_with_extras(command, raw)

    out = report.config.get("out")
    if out:
        write_report(report, str(out), str(report.config["format"]))
        for name, cols, rows in extra_tables:
            extra_path = Path(str(out)) / f"{command}.{name}.csv"
            extra_path.write_bytes(render_csv(cols, rows).encode("utf-8"))
        if want_plot and command in _PLOT_KINDS:
            emit_plotdata(report, _PLOT_KINDS[command], str(out))
    else:
        doc = report.to_jsonable(embed_records=True)
        click.echo(json.dumps(doc, sort_keys=True, indent=2))

    bits = []
    for key in _HEADLINE.get(command, ()):
        value = report.summary.get(key)
        if value is not None:
            bits.append(f"{key}={json_scalar(value)}")
    if bits:
        # keep stdout pure JSON when no --out was given
        click.echo(f"{command}: " + "  ".join(bits), err=not out)


@click.group(name="circlecover")
@click.version_option(version=__version__, prog_name="circlecover")
def cli() -> None:
    """Desk-scale experiments on random coverings of the circle."""


def _register(name: str, extra_options: list, help_text: str):
    """Create a subcommand: global flags plus the command's own options."""

    @cli.command(name=name, help=help_text)
    @_global_flags
    @click.pass_context
    def _cmd(ctx: click.Context, **params):
        _dispatch(ctx, name, params)

    for opt in reversed(extra_options):
        _cmd = opt(_cmd)
    return _cmd


_FAMILY_OPTS = [
    click.option("--family",
                 type=click.Choice(["harmonic", "shepp-critical",
                                    "explicit"]),
                 default=None,
                 help="Length family (default harmonic)."),
    click.option("--c", type=str, default=None,
                 help="Family parameter: scale for harmonic, exponent for "
                      "shepp-critical."),
    click.option("--lengths-file",
                 type=click.Path(exists=True, dir_okay=False), default=None,
                 help="Newline-delimited lengths for family=explicit."),
]

_register("shepp", _FAMILY_OPTS + [
    click.option("--n", type=int, default=None,
                 help="Number of series terms (default 100000)."),
    click.option("--max-rows", type=int, default=None,
                 help="Record-table row cap; rows use a fixed stride."),
    click.option("--plot", is_flag=True,
                 help="Also write term-decay plot artifacts."),
], "Classify a length family's covering series (closed form + numeric).")

_register("cover-sim", _FAMILY_OPTS + [
    click.option("--n-arcs", type=int, default=None,
                 help="Arcs per trial (default 1000)."),
], "Monte Carlo random-arc covering trials with exact uncovered sets.")

_register("tree-run", [
    click.option("--source", type=click.Choice(["iid", "seq", "bits"]),
                 default=None, help="Point source (default iid)."),
    click.option("--L", "l", type=str, default=None,
                 help="Coloring mass, an exact rational like 1013 or "
                      "1/4096."),
    click.option("--nu", type=str, default=None,
                 help="Level-density exponent (default 1)."),
    click.option("--mode", type=click.Choice(["plain", "thick"]),
                 default=None, help="Coloring mode (default plain)."),
    click.option("--levels", type=str, default=None,
                 help="Inclusive level range a..b."),
    click.option("--threshold-base", type=str, default=None,
                 help="Thick-survival growth base in (1,2)."),
    click.option("--threshold-log2", type=str, default=None,
                 help="Alternative threshold: survivors >= 2^(rate*n)."),
    click.option("--buffer-eps", type=str, default=None,
                 help="Per-level buffer fraction for thick mode."),
    click.option("--path-R", "path_r", type=int, default=None,
                 help="Uncolored-path length checked in plain mode "
                      "(default: the full level range)."),
    click.option("--seq", type=str, default=None,
                 help="Sequence spec for source=seq (default pow2)."),
    click.option("--x", type=str, default=None,
                 help="Fixed sample point for source=seq (exact rational); "
                      "omitted = fresh random point per trial."),
    click.option("--dump-coloring", is_flag=True,
                 help="Also write run-length colored-set dumps."),
    click.option("--plot", is_flag=True,
                 help="Also write survival-curve plot artifacts."),
], "Colored dyadic-tree percolation trials (plain or thick mode).")

_register("dim-estimate", [
    click.option("--seq", type=str, default=None,
                 help="Sequence spec (default pow2)."),
    click.option("--nu", type=str, default=None,
                 help="Shrinking-target exponent (default 1)."),
    click.option("--G", "g", type=str, default=None,
                 help="Grid digits: full, full:B or cantor."),
    click.option("--depths", type=str, default=None,
                 help="Requested depth range a..b; clipped to resolvable "
                      "depths for the tail."),
    click.option("--tail", type=str, default=None,
                 help="Sequence-index window a..b (default 16..16384)."),
    click.option("--seeds", type=int, default=None,
                 help="Sample points per estimate (default 8)."),
    click.option("--plot", is_flag=True,
                 help="Also write log-log scatter plot artifacts."),
], "Box-count dimension estimate of a shrinking-target limsup set.")

_register("cassels-search", [
    click.option("--mode", type=click.Choice(["uniform", "minima"]),
                 default=None,
                 help="uniform: delta-grid check over beta; minima: "
                      "product-minima records."),
    click.option("--alpha", type=str, default=None,
                 help="Rotation number (golden, sqrt2m1, sqrt:D or p/q)."),
    click.option("--beta", type=str, default=None,
                 help="Second rotation ('random' draws one per trial)."),
    click.option("--gamma", type=str, default=None,
                 help="Inhomogeneous shift for alpha (default 0)."),
    click.option("--delta", type=str, default=None,
                 help="Inhomogeneous shift for beta (minima mode)."),
    click.option("--n", type=int, default=None,
                 help="Index horizon N (default 1000000)."),
    click.option("--C", "c_big", type=float, default=None,
                 help="Pass threshold constant (default 10)."),
    click.option("--delta-grid", type=int, default=None,
                 help="Grid points for the delta sweep (default 1000)."),
], "Inhomogeneous two-form product minima and uniform-delta sweeps.")

_register("bohr-check", [
    click.option("--alpha", type=str, default=None,
                 help="Rotation number (default golden)."),
    click.option("--n", type=int, default=None,
                 help="Count horizon N (default 1000)."),
    click.option("--eps", type=str, default=None,
                 help="Bohr radius, exact rational (default 1/25)."),
    click.option("--gamma", type=str, default=None,
                 help="Inhomogeneous shift (default 0)."),
    click.option("--b", type=int, default=None,
                 help="Annulus ratio parameter (default 300)."),
], "Exact Bohr-set count with its bracket and shift inequality.")

_register("gcdsum-check", [
    click.option("--seq", type=str, default=None,
                 help="Sequence spec (default primepower:2)."),
    click.option("--nu", type=str, default=None,
                 help="Hypothesis exponent (default 2)."),
    click.option("--eps", type=str, default=None,
                 help="Hypothesis epsilon (default 1/2)."),
    click.option("--psi", type=click.Choice(["one", "log2sq"]),
                 default=None, help="Normalizing weight."),
    click.option("--grid", type=str, default=None,
                 help="Evaluation points: exponent range a..b (powers of "
                      "two) or comma-separated N values."),
], "Pairwise gcd sums against the bounded-ratio hypothesis.")

_register("local-count", [
    click.option("--j", type=int, default=None, help="Frequency scale j."),
    click.option("--L", "l", type=str, default=None,
                 help="Schedule mass override (default 1000)."),
    click.option("--B", "b_shift", type=str, default=None,
                 help="Block shift B (default 0)."),
    click.option("--b-grid", type=int, default=None,
                 help="Check B = t/G for t = 0..G-1 instead of a single B."),
    click.option("--seq", type=str, default=None,
                 help="Sequence spec (default pow10)."),
    click.option("--count", type=int, default=None,
                 help="Sequence terms to materialize (default 40)."),
    click.option("--budget", type=int, default=None,
                 help="Enumeration budget (default 10^7)."),
], "Weighted local solution counts against the exact frequency cap.")

_register("psi-regime", [
    click.option("--k", type=int, default=None,
                 help="Iterated-log family depth (default 2)."),
    click.option("--power", type=float, default=None,
                 help="Exponent on the last log factor (default 1)."),
    click.option("--scale", type=float, default=None,
                 help="Length-rule scale factor (default 1)."),
    click.option("--alpha", type=str, default=None,
                 help="Rotation number (default golden)."),
    click.option("--gamma", type=str, default=None,
                 help="Inhomogeneous shift (default 0)."),
    click.option("--b", type=int, default=None,
                 help="Block base (default 2)."),
    click.option("--L", "l", type=int, default=None,
                 help="Bucket count (default 4)."),
    click.option("--C", "c_big", type=float, default=None,
                 help="Covering threshold (default 8)."),
    click.option("--eps", type=float, default=None,
                 help="Noncovering threshold (default 0.125)."),
    click.option("--horizon", type=int, default=None,
                 help="Direct-scan horizon (default 10^6)."),
    click.option("--snap", is_flag=True,
                 help="Snap block boundaries to powers of b."),
], "Classify a length rule as covering-like or noncovering-like.")

_register("gap-profile", [
    click.option("--seq", type=str, default=None,
                 help="Sequence spec (default pow2)."),
    click.option("--count", type=int, default=None,
                 help="Terms to profile (default 64)."),
    click.option("--eps", type=str, default=None,
                 help="Gap tolerance (default 1/10)."),
], "Growth-ratio and normalized-gap diagnostics for a sequence.")


def _emit_error(kind: str, message: str) -> None:
    payload = {"error": {"type": kind, "message": message}}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)


def main(argv: Optional[list[str]] = None) -> int:
    """Console entry point: exit 0 on success, 2 on schema/precondition
    violations, 3 on precision exhaustion, 1 on anything unexpected."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as e:
        return int(e.exit_code)
    except click.Abort:
        return 130
    except click.UsageError as e:
        _emit_error("schema", e.format_message())
        return 2
    except SchemaError as e:
        _emit_error("schema", str(e))
        return 2
    except BohrPreconditionError as e:
        _emit_error("precondition", str(e))
        return 2
    except PrecisionError as e:
        _emit_error("precision", str(e))
        return 3
    except ValueError as e:
        _emit_error("schema", str(e))
        return 2
    except Exception as e:  # pragma: no cover - defensive
        _emit_error("internal", f"{type(e).__name__}: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
