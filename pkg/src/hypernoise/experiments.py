"""Figure runners, CSV output and plot-script generation."""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from ._accel import backend_name
from .channels import KINDS, noisy_state
from .matcore import make_state, polarization_part
from .measures import (
    COARSE_RESOLUTION,
    GENERATOR,
    GridResult,
    chsh_grid,
    chsh_max,
    negativity,
    witness_expectation,
)
from .stinespring import evolve_and_reduce

DEFAULT_POINTS = 101
HEATMAP_P = 0.5
HEATMAP_ANGLES = (math.pi / 4, math.pi / 2)
MAX_S_ANGLES = (math.pi / 2, math.pi / 4)
STATES = ("e", "he")
_STATE_NAMES = {"e": "entangled", "he": "hyper"}


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    noise: str | None = None
    states: tuple[str, ...] = STATES
    start: float = 0.0
    stop: float = 1.0
    points: int = DEFAULT_POINTS
    include_stop: bool = True
    p: float | None = None
    theta: float | None = None
    delta: float | None = None
    resolution: int = COARSE_RESOLUTION
    seed: int | None = None
    dof: str | None = None

    def __post_init__(self):
        if self.points < 2:
            raise ValueError("a p grid needs at least 2 points")
        if not 0.0 <= self.start <= self.stop <= 1.0:
            raise ValueError(f"p grid [{self.start}, {self.stop}] must lie within [0, 1]")
        if self.resolution < 2:
            raise ValueError("angle grid resolution must be at least 2")
        if self.noise is not None and self.noise not in KINDS:
            raise ValueError(f"unknown noise kind {self.noise!r}")

    def p_grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points, endpoint=self.include_stop)

    def echo(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))


@dataclass(eq=False)
class CurveResult:
    columns: list[str]
    rows: list[tuple]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for r in self.rows:
            if len(r) != len(self.columns):
                raise ValueError(f"row arity {len(r)} != {len(self.columns)} columns")
            if not all(math.isfinite(v) for v in r):
                raise ValueError(f"non-finite value in row {r}")

    def column(self, name) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows])


# ------------------------------------------------------------------ helpers


def _threads() -> int:
    raw = os.environ.get("HYPERNOISE_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        raise ValueError("HYPERNOISE_THREADS must be a positive integer")
    return n


def parallel_map(fn, items):
    """Ordered map, threaded when HYPERNOISE_THREADS > 1."""
    items = list(items)
    n = _threads()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


_BASE_STATES = {}


def base_state(kind):
    if kind not in _BASE_STATES:
        _BASE_STATES[kind] = make_state("entangled" if kind == "e" else "hyperentangled")
    return _BASE_STATES[kind]


def reduced_output(noise, p, state):
    """Polarization state after controlled noise, path factors traced out."""
    return polarization_part(noisy_state(noise, p, base_state(state)))


def _meta(spec: ExperimentSpec, **extra) -> dict:
    meta = {
        "artifact": f"hypernoise {__version__}",
        "backend": backend_name(),
        "experiment": spec.name,
        "spec": spec.echo(),
        "generator": GENERATOR,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    meta.update({k: str(v) for k, v in extra.items()})
    return meta


# ------------------------------------------------------------------ runners


def run_negativity(spec):
    def row(p):
        return (p,) + tuple(
            negativity(reduced_output(spec.noise, p, s), "pol1") for s in spec.states
        )

    cols = ["p"] + [f"negativity_{_STATE_NAMES[s]}" for s in spec.states]
    return {spec.name: CurveResult(cols, parallel_map(row, spec.p_grid()), _meta(spec))}


def run_witness(spec):
    def row(p):
        return (p,) + tuple(
            witness_expectation(reduced_output(spec.noise, p, s)) for s in spec.states
        )

    cols = ["p"] + [f"witness_{_STATE_NAMES[s]}" for s in spec.states]
    return {spec.name: CurveResult(cols, parallel_map(row, spec.p_grid()), _meta(spec))}


def run_max_s(spec):
    theta, delta = _angles(spec, MAX_S_ANGLES)

    def row(p):
        vals, angles = [], []
        for s in spec.states:
            v, tp, dp = chsh_max(reduced_output(spec.noise, p, s), theta, delta, spec.resolution)
            vals.append(v)
            angles += [tp, dp]
        return (p, *vals, *angles)

    cols = ["p"] + [f"max_s_{_STATE_NAMES[s]}" for s in spec.states]
    for s in spec.states:
        cols += [f"theta_p_{_STATE_NAMES[s]}", f"delta_p_{_STATE_NAMES[s]}"]
    return {spec.name: CurveResult(cols, parallel_map(row, spec.p_grid()), _meta(spec))}


def run_heatmap(spec):
    theta, delta = _angles(spec, HEATMAP_ANGLES)
    p = HEATMAP_P if spec.p is None else spec.p
    out = {}
    for s in spec.states:
        if spec.noise is None:
            rho = polarization_part(base_state(s))
        else:
            rho = reduced_output(spec.noise, p, s)
        g = chsh_grid(rho, theta, delta, spec.resolution)
        g = replace(g, noise=spec.noise, p=None if spec.noise is None else p, state=s)
        stem = spec.name if len(spec.states) == 1 else f"{spec.name}_{s}"
        out[stem] = g
    return out


def run_stinespring(spec):
    dof = spec.dof or "pol"
    labels = {"pol": ("pol1", "pol2"), "path": ("path1", "path2")}
    if dof not in labels:
        raise ValueError(f"unknown degree of freedom {dof!r}; expected 'pol' or 'path'")

    def row(p):
        vals = []
        for s in spec.states:
            pol, path = evolve_and_reduce(base_state(s), p)
            vals.append(negativity(pol if dof == "pol" else path, labels[dof][0]))
        return (p, *vals)

    cols = ["p"] + [f"{dof}_neg_{_STATE_NAMES[s]}" for s in spec.states]
    return {spec.name: CurveResult(cols, parallel_map(row, spec.p_grid()), _meta(spec))}


def _angles(spec, default):
    return (
        default[0] if spec.theta is None else spec.theta,
        default[1] if spec.delta is None else spec.delta,
    )


# name -> (runner, default spec fields, figure alias)
REGISTRY = {
    "noiseless-heatmap": (run_heatmap, dict(states=("e",)), "fig1"),
    "bitflip-negativity": (run_negativity, dict(noise="bitflip"), "fig2"),
    "bitflip-witness": (
        run_witness,
        dict(noise="bitflip", stop=0.5, include_stop=False),
        "fig3",
    ),
    "bitflip-heatmap": (run_heatmap, dict(noise="bitflip"), "fig4"),
    "bitflip-max-s": (run_max_s, dict(noise="bitflip"), "fig5"),
    "depolarizing-negativity": (run_negativity, dict(noise="depolarizing"), "fig6"),
    "depolarizing-witness": (run_witness, dict(noise="depolarizing"), "fig7"),
    "depolarizing-heatmap": (run_heatmap, dict(noise="depolarizing"), "fig8"),
    "depolarizing-max-s": (run_max_s, dict(noise="depolarizing"), "fig9"),
    "phasedamping-negativity": (run_negativity, dict(noise="phasedamping"), "fig10"),
    "phasedamping-witness": (run_witness, dict(noise="phasedamping"), "fig11"),
    "phasedamping-heatmap": (run_heatmap, dict(noise="phasedamping"), "fig11-heatmap"),
    "phasedamping-max-s": (run_max_s, dict(noise="phasedamping"), "fig11-curve"),
    "stinespring-polarization": (run_stinespring, dict(dof="pol"), "fig12"),
    "stinespring-path": (run_stinespring, dict(dof="path"), "fig13"),
}
ALIASES = {alias: name for name, (_, _, alias) in REGISTRY.items()}


def resolve(figure_id: str) -> str:
    if figure_id in REGISTRY:
        return figure_id
    try:
        return ALIASES[figure_id]
    except KeyError:
        known = sorted(ALIASES) + sorted(REGISTRY)
        raise KeyError(f"unknown figure id {figure_id!r}; known: {', '.join(known)}") from None


def default_spec(figure_id: str, **overrides) -> ExperimentSpec:
    name = resolve(figure_id)
    fields = dict(REGISTRY[name][1])
    fields.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentSpec(name=name, **fields)


def run_experiment(spec: ExperimentSpec) -> dict:
    """Run one registered experiment; returns {file stem: CurveResult | GridResult}."""
    runner = REGISTRY[resolve(spec.name)][0]
    return runner(spec)


# ------------------------------------------------------------------ output


def _fmt(x) -> str:
    s = format(float(x), ".12g")
    return "0" if s == "-0" else s


def grid_to_curve(g: GridResult, meta=None) -> CurveResult:
    s_best, tp, dp = g.argmax()
    i, j = np.unravel_index(np.argmin(g.s_values), g.s_values.shape)
    m = dict(meta or {})
    m.update(
        theta=_fmt(g.theta),
        delta=_fmt(g.delta),
        noise=str(g.noise),
        p=str(g.p),
        state=str(g.state),
        max_s=_fmt(s_best),
        argmax=f"{_fmt(tp)} {_fmt(dp)}",
        min_s=_fmt(g.s_values[i, j]),
        argmin=f"{_fmt(g.theta_p_axis[i])} {_fmt(g.delta_p_axis[j])}",
        resolution=str(len(g.theta_p_axis)),
    )
    rows = [
        (float(a), float(b), float(g.s_values[ii, jj]))
        for ii, a in enumerate(g.theta_p_axis)
        for jj, b in enumerate(g.delta_p_axis)
    ]
    return CurveResult(["theta_p", "delta_p", "s"], rows, m)


def write_csv(result, path) -> None:
    if isinstance(result, GridResult):
        result = grid_to_curve(result, result.meta)
    path = Path(path)
    lines = [f"# {k}: {v}" for k, v in result.metadata.items()]
    lines.append(",".join(result.columns))
    lines += [",".join(_fmt(v) for v in row) for row in result.rows]
    try:
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc.strerror or exc}") from exc


def read_csv(path) -> CurveResult:
    meta, header, rows = {}, None, []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition(": ")
                meta[k] = v
            elif header is None:
                header = line.split(",")
            elif line:
                rows.append(tuple(float(x) for x in line.split(",")))
    return CurveResult(header or [], rows, meta)


_CURVE_SCRIPT = '''\
import csv
from pathlib import Path

import matplotlib.pyplot as plt

HERE = Path(__file__).resolve().parent
CSV = HERE / "{csv}"

with open(CSV) as fh:
    rows = [r for r in fh if not r.startswith("#")]
reader = csv.reader(rows)
header = next(reader)
data = [[float(x) for x in r] for r in reader]
cols = list(zip(*data)) if data else [[] for _ in header]

fig, ax = plt.subplots(figsize=(5, 3.5))
for name in {series!r}:
    ax.plot(cols[0], cols[header.index(name)], label=name)
ax.set_xlabel("noise level p")
ax.set_ylabel({ylabel!r})
ax.legend()
fig.tight_layout()
fig.savefig(HERE / "{png}", dpi=150)
'''

_GRID_SCRIPT = '''\
from pathlib import Path

import numpy as np
import matplotlib.pyplot as plt

HERE = Path(__file__).resolve().parent
CSV = HERE / "{csv}"

with open(CSV) as fh:
    body = [r for r in fh if not r.startswith("#")][1:]
data = np.loadtxt(body, delimiter=",", ndmin=2)
n = {n}
tp = data[:, 0].reshape(n, n)
dp = data[:, 1].reshape(n, n)
s = data[:, 2].reshape(n, n)

fig, ax = plt.subplots(figsize=(5, 4))
mesh = ax.pcolormesh(tp, dp, s, shading="auto", cmap="viridis")
fig.colorbar(mesh, ax=ax, label="S")
ax.set_xlim(0, np.pi)
ax.set_ylim(0, np.pi)
ax.set_xlabel("theta'")
ax.set_ylabel("delta'")
fig.tight_layout()
fig.savefig(HERE / "{png}", dpi=150)
'''

_YLABELS = {"negativity": "negativity N", "witness": "<W>", "max_s": "max S"}


def emit_plot_script(result, path, csv_name=None) -> None:
    """Write a matplotlib script that renders the CSV stored next to ``path``."""
    path = Path(path)
    csv_name = csv_name or path.with_suffix(".csv").name
    png = path.with_suffix(".png").name
    if isinstance(result, GridResult):
        text = _GRID_SCRIPT.format(csv=csv_name, png=png, n=len(result.theta_p_axis))
    else:
        series = [
            c for c in result.columns[1:] if not c.startswith(("theta_p", "delta_p"))
        ]
        prefix = series[0].rsplit("_", 1)[0] if series else ""
        ylabel = _YLABELS.get(prefix, prefix.replace("_", " "))
        text = _CURVE_SCRIPT.format(csv=csv_name, png=png, series=series, ylabel=ylabel)
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write plot script to {path}: {exc.strerror or exc}") from exc


def reproduce(figure_id: str, out_dir, **overrides) -> list[Path]:
    """Run one figure and write ``<id>.csv`` plus ``<id>_plot.py`` per output.

    Files are named after ``figure_id`` as given (alias or runner name);
    two-panel heatmaps get ``_e`` / ``_he`` suffixes.
    """
    spec = default_spec(figure_id, **overrides)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for stem, res in run_experiment(spec).items():
        stem = stem.replace(spec.name, figure_id, 1)
        if isinstance(res, GridResult):
            res = replace(res, meta=_meta(spec))
        csv_path = out_dir / f"{stem}.csv"
        script = out_dir / f"{stem}_plot.py"
        write_csv(res, csv_path)
        emit_plot_script(res, script, csv_path.name)
        written += [csv_path, script]
    return written
