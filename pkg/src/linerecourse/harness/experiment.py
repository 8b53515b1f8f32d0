"""Experiment configs, sweeps and CSV / plot-data emission."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import statistics
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Optional, Sequence

from linerecourse.harness.generators import RNG_NAME, RNG_VERSION, generate
from linerecourse.harness.metrics import RunMetrics, run_algorithm
from linerecourse.line_model import format_rat


@dataclass
class ExperimentConfig:
    """A generator family crossed with seeds and one algorithm.

    Any generator parameter given as a list is swept (cartesian product).
    Run ``rep`` of grid point ``p`` uses the seed ``[seed, p, rep]``.
    """

    generator: str
    params: dict
    algorithm: str = "recourse"
    t: Any = 3
    eps: Any = None
    k: Optional[int] = None
    seed: int = 0
    repetitions: int = 1
    csv_path: Optional[str] = None
    plot_path: Optional[str] = None
    rng: dict = field(default_factory=lambda: {"name": RNG_NAME, "version": RNG_VERSION})

    @classmethod
    def from_json_obj(cls, obj: dict) -> "ExperimentConfig":
        gen = obj.get("generator")
        if isinstance(gen, dict):
            name, params = gen["name"], dict(gen.get("params", {}))
        else:
            name, params = gen, dict(obj.get("params", {}))
        alg = obj.get("algorithm", "recourse")
        if isinstance(alg, dict):
            a = alg
        else:
            a = {"name": alg, "t": obj.get("t", 3), "eps": obj.get("eps"), "k": obj.get("k")}
        out = obj.get("outputs", {})
        rng = obj.get("rng", {"name": RNG_NAME, "version": RNG_VERSION})
        if rng.get("name") != RNG_NAME:
            raise ValueError(f"unsupported rng {rng.get('name')!r}; this build provides {RNG_NAME}")
        return cls(name, params, a["name"], a.get("t", 3), a.get("eps"), a.get("k"),
                   int(obj.get("seed", 0)), int(obj.get("repetitions", 1)),
                   out.get("csv"), out.get("plot"), rng)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_json_obj(json.load(fh))

    def grid(self) -> list[dict]:
        keys = sorted(self.params)
        values = [v if isinstance(v, list) else [v] for v in (self.params[k] for k in keys)]
        return [dict(zip(keys, combo)) for combo in itertools.product(*values)]


@dataclass
class RunRow:
    run_id: str
    generator: str
    params: dict
    seed: list[int]
    metrics: RunMetrics


def run_experiment(cfg: ExperimentConfig, check_reference: bool = False) -> list[RunRow]:
    rows = []
    t = Fraction(cfg.t) if cfg.t is not None else None
    eps = Fraction(cfg.eps) if cfg.eps is not None else None
    for p, params in enumerate(cfg.grid()):
        for rep in range(cfg.repetitions):
            seed = [cfg.seed, p, rep]
            inst = generate(cfg.generator, params, seed)
            out = run_algorithm(inst, cfg.algorithm, t=t, eps=eps, k=cfg.k,
                                check_reference=check_reference)
            rows.append(RunRow(f"{p:04d}-{rep:04d}", cfg.generator, params, seed, out.metrics))
    rows.sort(key=lambda r: r.run_id)
    return rows


CSV_COLUMNS = [
    "run_id", "generator", "params", "seed", "algo", "n", "m",
    "cost", "cost_float", "opt", "opt_float", "ratio", "ratio_float",
    "total_reassign", "recourse_per_nlogn", "max_reassign", "freezes", "unfreezes",
    "repairs", "snaps", "sweeps", "recourse_steps", "max_level", "level_span",
    "delta", "delta_float",
]


def _rat(x: Optional[Fraction]) -> str:
    if x is None:
        return ""
    v = format_rat(x)
    return str(v)


def _flt(x) -> str:
    return "" if x is None else repr(float(x))


def recourse_per_nlogn(m: RunMetrics) -> Optional[float]:
    if m.n < 2:
        return None
    return m.total_reassign / (m.n * math.log2(m.n))


def row_dict(row: RunRow) -> dict:
    m = row.metrics
    return {
        "run_id": row.run_id,
        "generator": row.generator,
        "params": json.dumps(row.params, sort_keys=True),
        "seed": "-".join(str(s) for s in row.seed),
        "algo": m.algo,
        "n": m.n,
        "m": m.m,
        "cost": _rat(m.cost),
        "cost_float": _flt(m.cost),
        "opt": _rat(m.opt),
        "opt_float": _flt(m.opt),
        "ratio": _rat(m.ratio),
        "ratio_float": _flt(m.ratio),
        "total_reassign": m.total_reassign,
        "recourse_per_nlogn": _flt(recourse_per_nlogn(m)),
        "max_reassign": m.max_reassign,
        "freezes": m.freezes,
        "unfreezes": m.unfreezes,
        "repairs": m.repairs,
        "snaps": m.snaps,
        "sweeps": m.sweeps,
        "recourse_steps": m.recourse_steps,
        "max_level": "" if m.max_level is None else m.max_level,
        "level_span": repr(float(m.level_span)),
        "delta": _rat(m.delta),
        "delta_float": _flt(m.delta),
    }


def csv_text(rows: Iterable[RunRow]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow(row_dict(row))
    return buf.getvalue()


def emit_csv(rows: Iterable[RunRow], path) -> None:
    try:
        with open(path, "w", newline="") as fh:
            fh.write(csv_text(rows))
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


def _median_by(rows: Sequence[RunRow], key, value) -> list[list[float]]:
    groups: dict = {}
    for r in rows:
        v = value(r.metrics)
        if v is None:
            continue
        groups.setdefault(key(r), []).append(float(v))
    return [[float(k), statistics.median(vs)] for k, vs in sorted(groups.items())]


def plot_data(rows: Sequence[RunRow]) -> dict:
    """Median series: n vs ratio, n vs recourse/(n log2 n), log2 delta vs ratio."""
    series = {
        "n_vs_ratio": _median_by(rows, lambda r: r.metrics.n, lambda m: m.ratio),
        "n_vs_recourse_per_nlogn": _median_by(rows, lambda r: r.metrics.n, recourse_per_nlogn),
    }
    with_delta = [r for r in rows if r.metrics.delta is not None]
    if with_delta:
        series["log2delta_vs_ratio"] = _median_by(
            with_delta, lambda r: round(math.log2(r.metrics.delta)), lambda m: m.ratio)
    return {"series": series}


def emit_plot_data(rows: Sequence[RunRow], path) -> None:
    try:
        with open(path, "w") as fh:
            json.dump(plot_data(rows), fh, indent=1, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write plot data to {path}: {exc}") from exc


def config_dict(cfg: ExperimentConfig) -> dict:
    return asdict(cfg)
