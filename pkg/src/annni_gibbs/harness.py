"""Parameter sweeps over (J2 x energy scale x sampler setting) and the data
reductions behind the TVD-vs-J and TVD-vs-beta summaries.

Every cell samples the *scaled* model ``scale * H`` and is fitted against the
unit-scale ANNNI model, so reported betas are comparable across scales
(a Gibbs sampler at ``beta`` on ``scale * H`` fits to ``scale * beta``).
"""

from __future__ import annotations

import csv
import logging
import math
import xml.etree.ElementTree as ET
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import yaml

from .fitting import FitResult, fit_beta
from .ising import AnnniModel, scale as scale_model
from .sampling import SamplerSpec

__all__ = [
    "CONFIG_VERSION",
    "SweepConfig",
    "CellResult",
    "MinRow",
    "load_config",
    "run_sweep",
    "reduce_min_tvd",
    "best_overall",
    "emit_outputs",
    "read_results_csv",
    "read_min_csv",
    "RESULTS_COLUMNS",
    "MIN_COLUMNS",
]

log = logging.getLogger(__name__)

CONFIG_VERSION = 1
RESULTS_COLUMNS = ("j2", "scale", "sampler_kind", "sampler_param", "num_samples",
                   "tvd_min", "beta_best", "beta_lo", "beta_hi", "wide_range")
MIN_COLUMNS = ("j2", "scale", "tvd_min", "beta_best", "beta_lo", "beta_hi")

_GRID_PARAM = {"exact-gibbs": "beta", "metropolis": "sweeps", "noisy-wrapper": "p"}


@dataclass(frozen=True)
class SweepConfig:
    """One sweep: model grid, scale grid, sampler family and its parameter grid.

    ``sampler_params`` holds the fixed parameters of the family (e.g. the
    Metropolis ``beta``); ``grid`` holds the values of the swept parameter
    (``sweeps`` for Metropolis, ``beta`` for exact Gibbs, ``p`` for the
    noisy wrapper).  Each cell draws ``jobs * per_job`` samples.
    """

    j2: tuple[float, ...]
    scales: tuple[float, ...]
    grid: tuple[Any, ...]
    sampler: str = "metropolis"
    sampler_params: dict = field(default_factory=dict)
    n: int = 12
    j1: float = 1.0
    jobs: int = 1
    per_job: int = 1000
    seed: int = 0
    workers: int = 1
    svg: bool = False
    config_version: int = CONFIG_VERSION

    def __post_init__(self):
        if self.config_version != CONFIG_VERSION:
            raise ValueError(f"unsupported config_version {self.config_version}; expected {CONFIG_VERSION}")
        for name in ("j2", "scales", "grid"):
            values = tuple(getattr(self, name))
            if not values:
                raise ValueError(f"sweep grid {name!r} is empty")
            object.__setattr__(self, name, values)
        if self.sampler not in _GRID_PARAM:
            raise ValueError(f"sweeps support samplers {sorted(_GRID_PARAM)}, got {self.sampler!r}")
        if any(not (0 < s) for s in self.scales):
            raise ValueError("scales must be positive")
        if self.jobs < 1 or self.per_job < 1:
            raise ValueError("jobs and per_job must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        AnnniModel(self.n, min(self.j2), self.j1)
        for value in self.grid:
            self.spec_for(value, seed=0)

    @property
    def grid_param(self) -> str:
        return _GRID_PARAM[self.sampler]

    @property
    def samples_per_cell(self) -> int:
        return self.jobs * self.per_job

    def spec_for(self, value, seed) -> SamplerSpec:
        params = dict(self.sampler_params)
        params[self.grid_param] = value
        return SamplerSpec(self.sampler, params, seed)

    def cells(self) -> list[tuple[float, float, Any]]:
        return [(j2, s, v) for j2 in self.j2 for s in self.scales for v in self.grid]

    @classmethod
    def from_dict(cls, doc: dict) -> "SweepConfig":
        doc = dict(doc)
        model = doc.pop("model", {})
        sampler = doc.pop("sampler", {})
        split = doc.pop("samples", {})
        for key, section in (("model.j2", model), ("sampler.grid", sampler)):
            if key.split(".")[1] not in section:
                raise ValueError(f"config is missing {key}")
        if "scales" not in doc:
            raise ValueError("config is missing scales")
        unknown = set(doc) - {"scales", "seed", "workers", "svg", "config_version"}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {
            "n": model.get("n", 12),
            "j1": model.get("j1", 1.0),
            "j2": model["j2"],
            "scales": doc.pop("scales"),
            "sampler": sampler.get("kind", "metropolis"),
            "sampler_params": dict(sampler.get("params", {})),
            "grid": sampler["grid"],
            "jobs": split.get("jobs", 1),
            "per_job": split.get("per_job", 1000),
        }
        kwargs.update(doc)
        return cls(**kwargs)


def load_config(path: str | Path) -> SweepConfig:
    """Load a YAML (or JSON) sweep config.  See ``configs/sweep.yaml``."""
    doc = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: config must be a mapping")
    return SweepConfig.from_dict(doc)


@dataclass(frozen=True)
class CellResult:
    j2: float
    scale: float
    sampler_kind: str
    sampler_param: Any
    num_samples: int
    fit: FitResult | None
    jobs: int = field(default=1, compare=False)
    per_job: int = field(default=0, compare=False)
    error: str | None = field(default=None, compare=False)

    @property
    def ok(self) -> bool:
        return self.fit is not None

    @property
    def tvd_min(self) -> float:
        return self.fit.tvd_min if self.fit else math.nan

    @property
    def beta_best(self) -> float:
        return self.fit.beta_best if self.fit else math.nan


@dataclass(frozen=True)
class MinRow:
    j2: float
    scale: float
    tvd_min: float
    beta_best: float
    beta_lo: float
    beta_hi: float
    sampler_param: Any = field(default=None, compare=False)


def _key_int(x) -> int:
    return int(round(float(x) * 1_000_000))


def _cell_seed(seed: int, j2: float, s: float, value) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed), _key_int(j2), _key_int(s), _key_int(value)])


def _run_cell(config: SweepConfig, j2: float, s: float, value) -> CellResult:
    unit = AnnniModel(config.n, j2, config.j1)
    target = unit if s == 1 else scale_model(unit, s)
    base = _cell_seed(config.seed, j2, s, value)
    try:
        pooled = None
        for job in base.spawn(config.jobs):
            job_seed = int(job.generate_state(1, np.uint64)[0])
            sampler = config.spec_for(value, seed=job_seed).build()
            part = sampler.sample(target, config.per_job)
            pooled = part if pooled is None else pooled + part
        fit = fit_beta(pooled, unit)
    except Exception as exc:  # noqa: BLE001 - recorded per cell
        log.error("cell j2=%s scale=%s %s=%s failed: %s", j2, s, config.grid_param, value, exc)
        return CellResult(j2, s, config.sampler, value, 0, None, config.jobs, config.per_job, str(exc))
    return CellResult(j2, s, config.sampler, value, pooled.total, fit, config.jobs, config.per_job)


def _run_cell_args(args):
    return _run_cell(*args)


def run_sweep(config: SweepConfig, workers: int | None = None) -> list[CellResult]:
    """Sample and fit every grid cell; results come back in grid order.

    Cell seeds depend only on ``(seed, j2, scale, value)``, so reordering the
    grid or changing the worker count leaves every cell unchanged.
    """
    workers = config.workers if workers is None else workers
    jobs = [(config, j2, s, v) for j2, s, v in config.cells()]
    if workers <= 1:
        return [_run_cell_args(a) for a in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_cell_args, jobs))


def _param_order(value):
    try:
        return (0, float(value))
    except (TypeError, ValueError):
        return (1, str(value))


def reduce_min_tvd(results: Sequence[CellResult]) -> list[MinRow]:
    """Minimum TVD over the sampler grid for every (j2, scale).

    Ties go to the smaller sampler parameter.  Failed cells are skipped.
    """
    if not results:
        raise ValueError("no results to reduce")
    best: dict[tuple[float, float], CellResult] = {}
    for r in results:
        if not r.ok:
            continue
        key = (r.j2, r.scale)
        cur = best.get(key)
        if cur is None or (r.tvd_min, _param_order(r.sampler_param)) < (cur.tvd_min, _param_order(cur.sampler_param)):
            best[key] = r
    return [
        MinRow(r.j2, r.scale, r.fit.tvd_min, r.fit.beta_best, r.fit.beta_lo, r.fit.beta_hi, r.sampler_param)
        for _, r in sorted(best.items())
    ]


def best_overall(results: Sequence[CellResult]) -> list[CellResult]:
    """Single lowest-TVD cell per j2; ties by smaller scale, then smaller parameter."""
    if not results:
        raise ValueError("no results to reduce")
    best: dict[float, CellResult] = {}
    for r in results:
        if not r.ok:
            continue
        key = (r.tvd_min, r.scale, _param_order(r.sampler_param))
        cur = best.get(r.j2)
        if cur is None or key < (cur.tvd_min, cur.scale, _param_order(cur.sampler_param)):
            best[r.j2] = r
    return [best[j2] for j2 in sorted(best)]


# -- outputs ------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _parse_scalar(text: str):
    try:
        return int(text)
    except ValueError:
        return float(text)


def _result_row(r: CellResult) -> list[str]:
    f = r.fit
    fit_cols = [f.tvd_min, f.beta_best, f.beta_lo, f.beta_hi, f.wide_range] if f else [math.nan] * 4 + [False]
    return [_fmt(v) for v in [r.j2, r.scale, r.sampler_kind, r.sampler_param, r.num_samples, *fit_cols]]


def emit_outputs(results: Sequence[CellResult], results_csv: str | Path, min_csv: str | Path | None = None,
                 svg: str | Path | None = None) -> None:
    """Write the per-cell CSV, the min-over-sampler-grid CSV and an optional SVG."""
    with open(results_csv, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(RESULTS_COLUMNS)
        for r in results:
            w.writerow(_result_row(r))
    if min_csv is not None:
        rows = reduce_min_tvd(results) if any(r.ok for r in results) else []
        with open(min_csv, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(MIN_COLUMNS)
            for m in rows:
                w.writerow([_fmt(v) for v in (m.j2, m.scale, m.tvd_min, m.beta_best, m.beta_lo, m.beta_hi)])
    if svg is not None:
        write_scatter_svg(results, svg)


def read_results_csv(path: str | Path) -> list[CellResult]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != RESULTS_COLUMNS:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        for row in reader:
            tvd_min = float(row["tvd_min"])
            fit = None
            if not math.isnan(tvd_min):
                fit = FitResult(tvd_min, float(row["beta_best"]), float(row["beta_lo"]), float(row["beta_hi"]),
                                row["wide_range"] == "true", int(row["num_samples"]))
            out.append(CellResult(float(row["j2"]), float(row["scale"]), row["sampler_kind"],
                                  _parse_scalar(row["sampler_param"]), int(row["num_samples"]), fit))
    return out


def read_min_csv(path: str | Path) -> list[MinRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != MIN_COLUMNS:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [MinRow(*(float(row[c]) for c in MIN_COLUMNS)) for row in reader]


def _colors(values: Sequence[float]) -> list[str]:
    try:
        from matplotlib import colormaps
        from matplotlib.colors import LogNorm, to_hex
    except ImportError:
        return ["#555555"] * len(values)
    positive = [v for v in values if v > 0]
    if not positive:
        return ["#555555"] * len(values)
    lo, hi = min(positive), max(positive)
    norm = LogNorm(vmin=lo, vmax=hi if hi > lo else lo * 10)
    cmap = colormaps["viridis"]
    return [to_hex(cmap(norm(v))) if v > 0 else "#555555" for v in values]


def write_scatter_svg(results: Sequence[CellResult], path: str | Path) -> None:
    """TVD vs beta scatter, one panel per (j2, scale), one circle per fitted cell.

    Marker colour encodes the sampler parameter on a log scale; cells whose
    tied beta range exceeds 0.1 get a horizontal error bar.
    """
    ok = [r for r in results if r.ok]
    panels = sorted({(r.j2, r.scale) for r in ok})
    ncols = max(1, min(5, len(panels)))
    nrows = max(1, math.ceil(len(panels) / ncols))
    pw, ph, pad = 220, 170, 40
    svg = ET.Element("svg", xmlns="http://www.w3.org/2000/svg",
                     width=str(ncols * pw), height=str(nrows * ph), version="1.1")
    params = [float(r.sampler_param) if _param_order(r.sampler_param)[0] == 0 else 0.0 for r in ok]
    colors = dict(zip(map(id, ok), _colors(params)))

    def bx(beta, lo, hi):
        b = math.log10(max(beta, 1e-3))
        return (b - lo) / (hi - lo) if hi > lo else 0.5

    for p, (j2, s) in enumerate(panels):
        cells = [r for r in ok if (r.j2, r.scale) == (j2, s)]
        x0, y0 = (p % ncols) * pw, (p // ncols) * ph
        g = ET.SubElement(svg, "g", {"class": "panel", "transform": f"translate({x0},{y0})"})
        ET.SubElement(g, "text", x="10", y="15", style="font-size:11px").text = f"J2={j2:g}, scale={s:g}"
        ET.SubElement(g, "rect", x=str(pad), y="22", width=str(pw - pad - 10), height=str(ph - 50),
                      fill="none", stroke="#999")
        logs = [math.log10(max(v, 1e-3)) for r in cells for v in (r.fit.beta_lo, r.fit.beta_hi)]
        lo, hi = min(logs), max(logs)
        tmax = max(r.tvd_min for r in cells) or 1.0
        for r in cells:
            cx = pad + bx(r.fit.beta_best, lo, hi) * (pw - pad - 10)
            cy = 22 + (1 - r.tvd_min / tmax) * (ph - 50)
            if r.fit.wide_range:
                xa = pad + bx(r.fit.beta_lo, lo, hi) * (pw - pad - 10)
                xb = pad + bx(r.fit.beta_hi, lo, hi) * (pw - pad - 10)
                ET.SubElement(g, "line", x1=f"{xa:.2f}", x2=f"{xb:.2f}", y1=f"{cy:.2f}", y2=f"{cy:.2f}",
                              stroke=colors[id(r)])
            c = ET.SubElement(g, "circle", {"class": "cell", "cx": f"{cx:.2f}", "cy": f"{cy:.2f}", "r": "3",
                                            "fill": colors[id(r)]})
            ET.SubElement(c, "title").text = (f"{r.sampler_kind} {r.sampler_param}: "
                                              f"TVD={r.tvd_min:g}, beta={r.beta_best:g}")
    ET.ElementTree(svg).write(path, encoding="utf-8", xml_declaration=True)
