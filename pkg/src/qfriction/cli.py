"""Command-line driver: parameter sweeps written as CSV tables.

Subcommands
-----------
force-sweep        friction force against velocity, one column triplet per beta
decoherence-sweep  decoherence time against velocity
resonance-sweep    decoherence time against plate frequency
point              force and decoherence time at a single velocity

Parameters come from ``--config FILE`` (flat ``key = value`` lines, ``#``
comments) and from flags, flags winning.  ``beta`` is a comma list in which
``inf`` means zero temperature.  The force is in natural units with
``hbar = c = k_B = 1``; decoherence times are in units of the global factor
``4/(g^2 q0^2 (1 - cos delta))`` times the separation ``a``.

Exit status is 0 when every point converged, 2 when some did not (or an
oracle check disagreed), 1 on usage or configuration errors.
"""
from __future__ import annotations

import argparse
import dataclasses
import functools
import logging
import math
import os
import sys

import numpy as np

from . import __version__
from .decoherence import PerturbativeBreakdown, decoherence_time
from .friction import f1_window_is_open, friction_force
from .kernels import ZERO_TEMPERATURE, ModelParams
from .quadrature import DEFAULT_TOLERANCE, Tolerance
from .sweep import SweepTable, parallel_map

log = logging.getLogger("qfriction")

SUBCOMMANDS = ("force-sweep", "decoherence-sweep", "resonance-sweep", "point")

# key -> (type name, default); None defaults mean "derived or per subcommand"
KEYS = {
    "v": ("float", None),
    "w_tilde": ("float", 0.03),
    "o_tilde": ("float", 0.01),
    "beta": ("betas", None),
    "a": ("float", 1e-6),
    "lambda": ("float", None),
    "plate_coupling": ("float", 0.01),
    "g": ("float", 1.0),
    "q0": ("float", 1.0),
    "delta": ("float", math.pi / 2),
    "grid": ("grid", None),
    "tol_abs": ("float", DEFAULT_TOLERANCE.abs_tol),
    "tol_rel": ("float", DEFAULT_TOLERANCE.rel_tol),
    "max_evals": ("int", DEFAULT_TOLERANCE.max_evaluations),
    "jobs": ("int", None),
    "out": ("str", None),
    "emit_plot": ("bool", False),
    "oracle_check": ("bool", False),
    "expansion": ("str", "consistent"),
    "s3_convention": ("str", "continuous"),
}

SUBCOMMAND_DEFAULTS = {
    "force-sweep": {"grid": "0.05:0.9:50", "beta": "inf,1,0.1", "v": 0.1},
    "decoherence-sweep": {"grid": "0:0.95:20", "beta": "inf,1,0.1", "v": 0.1},
    "resonance-sweep": {"grid": "0.005:0.06:41", "beta": "1,10", "v": 0.01},
    "point": {"grid": None, "beta": "inf", "v": 0.1},
}


class ConfigError(ValueError):
    """Bad configuration; the message names the offending key."""


@dataclasses.dataclass(frozen=True)
class RunConfig:
    subcommand: str
    params: ModelParams
    axis: str
    grid: tuple
    betas: tuple
    tol: Tolerance
    out: str
    jobs: int | None
    emit_plot: bool
    oracle_check: bool
    expansion: str
    s3_convention: str
    sources: dict = dataclasses.field(default_factory=dict, compare=False)


def parse_beta_list(text):
    out = []
    for item in str(text).split(","):
        item = item.strip()
        if item.lower() in ("inf", "infinity"):
            out.append(ZERO_TEMPERATURE)
            continue
        b = float(item)
        if not (b > 0 and math.isfinite(b)):
            raise ValueError(f"beta must be > 0 or inf, got {item!r}")
        out.append(b)
    if not out:
        raise ValueError("empty beta list")
    return tuple(out)


def parse_grid(text):
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ValueError(f"grid must be lo:hi:count, got {text!r}")
    lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 1:
        raise ValueError("grid count must be >= 1")
    if count > 1 and not lo < hi:
        raise ValueError("grid needs lo < hi")
    return tuple(float(x) for x in np.linspace(lo, hi, count))


def _convert(key, raw):
    kind = KEYS[key][0]
    try:
        if kind == "float":
            return float(raw)
        if kind == "int":
            return int(raw)
        if kind == "bool":
            if isinstance(raw, bool):
                return raw
            text = str(raw).strip().lower()
            if text in ("1", "true", "yes", "on"):
                return True
            if text in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if kind == "betas":
            return parse_beta_list(raw)
        if kind == "grid":
            return parse_grid(raw)
        return str(raw)
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from None


def read_config_file(path):
    """Flat ``key = value`` file; ``#`` starts a comment."""
    values = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from None
    with fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if not sep:
                raise ConfigError(f"config line {lineno}: expected key = value")
            if key == "subcommand":
                values[key] = value.strip()
                continue
            if key not in KEYS:
                raise ConfigError(f"{key}: unknown key (config line {lineno})")
            values[key] = value.strip()
    return values


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="qfriction", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"qfriction {__version__}")
    p.add_argument("subcommand", nargs="?", choices=SUBCOMMANDS,
                   help="what to compute (may also come from the config file)")
    p.add_argument("--config", metavar="PATH", help="flat key = value file")
    p.add_argument("--out", metavar="PATH", help="CSV output path (default: <subcommand>.csv)")
    p.add_argument("--jobs", type=int, metavar="N", help="worker processes (default: all cores)")
    p.add_argument("--tol-abs", dest="tol_abs", metavar="X")
    p.add_argument("--tol-rel", dest="tol_rel", metavar="X")
    p.add_argument("--max-evals", dest="max_evals", metavar="N",
                   help="integrand evaluations allowed per integral")
    p.add_argument("--emit-plot", dest="emit_plot", action="store_const", const=True,
                   help="also write a matplotlib script that plots the CSV")
    p.add_argument("--oracle-check", dest="oracle_check", action="store_const", const=True,
                   help="certify one point per beta against the slow oracles")
    p.add_argument("--v", metavar="X", help="velocity in units of c")
    p.add_argument("--w-tilde", dest="w_tilde", metavar="X", help="a * particle frequency")
    p.add_argument("--o-tilde", dest="o_tilde", metavar="X", help="a * plate frequency")
    p.add_argument("--beta", metavar="LIST", help="inverse temperatures over a, e.g. inf,1,0.1")
    p.add_argument("--a", metavar="METERS", help="particle-plate separation")
    p.add_argument("--lambda", dest="lambda", metavar="X", help="plate coupling lambda")
    p.add_argument("--plate-coupling", dest="plate_coupling", metavar="X",
                   help="dimensionless a^1.5 * lambda (ignored when --lambda is set)")
    p.add_argument("--g", metavar="X", help="particle-field coupling")
    p.add_argument("--q0", metavar="X", help="trajectory amplitude")
    p.add_argument("--delta", metavar="X", help="trajectory phase offset")
    p.add_argument("--grid", metavar="LO:HI:COUNT", help="sweep axis grid")
    p.add_argument("--expansion", choices=("consistent", "printed"),
                   help="thermal v^2 weight of the vacuum term")
    p.add_argument("--s3-convention", dest="s3_convention", choices=("continuous", "printed"),
                   help="sign of the zeta_- tail of the plate term S3")
    p.add_argument("--log-level", default="INFO", help="logging level (default INFO)")
    return p


def parse_config(argv=None):
    """Merge file and flags into a :class:`RunConfig`.

    Raises
    ------
    ConfigError
        With the offending key first in the message.
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.INFO),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    raw = read_config_file(args.config) if args.config else {}
    sources = {k: "file" for k in raw}
    for key in list(KEYS) + ["subcommand"]:
        value = getattr(args, key, None)
        if value is not None:
            raw[key] = value
            sources[key] = "flag"
    sub = raw.get("subcommand")
    if sub not in SUBCOMMANDS:
        raise ConfigError(f"subcommand: expected one of {', '.join(SUBCOMMANDS)}, got {sub!r}")

    values = {}
    for key, (_, default) in KEYS.items():
        if key in raw:
            values[key] = _convert(key, raw[key])
            continue
        default = SUBCOMMAND_DEFAULTS[sub].get(key, default)
        if default is not None:
            values[key] = _convert(key, default)
            log.info("default %s = %s", key, default)
            sources[key] = "default"
        else:
            values[key] = None

    if values["expansion"] not in ("consistent", "printed"):
        raise ConfigError(f"expansion: expected consistent or printed, got {values['expansion']!r}")
    if values["s3_convention"] not in ("continuous", "printed"):
        raise ConfigError(f"s3_convention: expected continuous or printed, got {values['s3_convention']!r}")
    try:
        tol = Tolerance(values["tol_abs"], values["tol_rel"], values["max_evals"])
    except ValueError as exc:
        raise ConfigError(f"tol_abs/tol_rel/max_evals: {exc}") from None
    if values["jobs"] is not None and values["jobs"] < 1:
        raise ConfigError("jobs: must be >= 1")

    a = values["a"]
    if not (a > 0 and math.isfinite(a)):
        raise ConfigError(f"a: must be finite and > 0, got {a!r}")
    lam = values["lambda"]
    if lam is None:
        lam = values["plate_coupling"] / a**1.5
    fields = dict(w_tilde=values["w_tilde"], o_tilde=values["o_tilde"], v=values["v"],
                  beta=values["beta"][0], a=a, lambda_c=lam, g_c=values["g"],
                  q0=values["q0"], delta=values["delta"])
    try:
        params = ModelParams(**fields)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    axis = "o_tilde" if sub == "resonance-sweep" else "v"
    grid = values["grid"] if sub != "point" else (values["v"],)
    if grid is None:
        raise ConfigError("grid: required")
    for x in grid:
        try:
            params.replace(**{axis: x})
        except ValueError as exc:
            raise ConfigError(f"grid: {exc}") from None
    for b in values["beta"]:
        params.replace(beta=b)

    out = values["out"] or f"{sub}.csv"
    return RunConfig(
        subcommand=sub, params=params, axis=axis, grid=tuple(grid), betas=values["beta"],
        tol=tol, out=out, jobs=values["jobs"], emit_plot=values["emit_plot"],
        oracle_check=values["oracle_check"], expansion=values["expansion"],
        s3_convention=values["s3_convention"], sources=sources,
    )


def beta_label(b):
    return "inf" if b == ZERO_TEMPERATURE else repr(float(b))


# ----------------------------------------------------------------- workers

def _force_task(params, tol, task):
    beta, x = task
    fb = friction_force(params.replace(beta=beta, v=x), tol)
    return fb.total, fb.error_estimate, fb.converged


def _td_task(params, tol, axis, options, task):
    beta, x = task
    try:
        bd = decoherence_time(params.replace(beta=beta, **{axis: x}), tol, **options)
    except PerturbativeBreakdown as exc:
        log.warning("beta=%s %s=%r: %s", beta_label(beta), axis, x, exc)
        return math.nan, math.nan, False
    return bd.t_d, bd.error_estimate, bd.converged


def _run_tasks(fn, cfg):
    tasks = [(b, x) for b in cfg.betas for x in cfg.grid]
    results = parallel_map(fn, tasks, cfg.jobs)
    table = {}
    for task, (res, error) in zip(tasks, results):
        if res is None:
            log.warning("beta=%s %s=%r failed: %s", beta_label(task[0]), cfg.axis, task[1], error)
            res = (math.nan, math.nan, False)
        table[task] = res
    return table


def _assemble(cfg, names, blocks):
    """Columns: axis, then for each beta one group of ``names`` per block."""
    columns = [cfg.axis]
    for b in cfg.betas:
        for block_names in names:
            columns += [f"{n}@beta={beta_label(b)}" for n in block_names]
    rows = []
    for x in cfg.grid:
        row = [x]
        for b in cfg.betas:
            for block in blocks:
                v, e, ok = block[(b, x)]
                row += [float(v), float(e), bool(ok)]
        rows.append(row)
    return columns, rows


def _metadata(cfg):
    p = cfg.params
    meta = {"tool": "qfriction", "tool_version": __version__, "subcommand": cfg.subcommand}
    for f in dataclasses.fields(p):
        if f.name in (cfg.axis, "beta"):
            continue
        meta[f.name] = getattr(p, f.name)
    meta["plate_coupling"] = p.plate_coupling
    meta["beta"] = ",".join(beta_label(b) for b in cfg.betas)
    meta["axis"] = cfg.axis
    meta["grid_count"] = len(cfg.grid)
    meta["tol_abs"] = cfg.tol.abs_tol
    meta["tol_rel"] = cfg.tol.rel_tol
    meta["max_evals"] = cfg.tol.max_evaluations
    if cfg.subcommand != "force-sweep":
        meta["expansion"] = cfg.expansion
        meta["s3_convention"] = cfg.s3_convention
    meta["units"] = ("force: natural units hbar=c=k_B=1; "
                     "t_d: a * 4/(g^2 q0^2 (1-cos delta))")
    return meta


def build_table(cfg):
    options = {"expansion": cfg.expansion, "s3_convention": cfg.s3_convention}
    td_fn = functools.partial(_td_task, cfg.params, cfg.tol, cfg.axis, options)
    force_fn = functools.partial(_force_task, cfg.params, cfg.tol)
    if cfg.subcommand == "force-sweep":
        cols, rows = _assemble(cfg, [("force_total", "force_err", "converged")],
                               [_run_tasks(force_fn, cfg)])
    elif cfg.subcommand == "point":
        cols, rows = _assemble(
            cfg,
            [("force_total", "force_err", "force_converged"), ("t_d", "t_d_err", "t_d_converged")],
            [_run_tasks(force_fn, cfg), _run_tasks(td_fn, cfg)])
    else:
        cols, rows = _assemble(cfg, [("t_d", "t_d_err", "converged")], [_run_tasks(td_fn, cfg)])
    table = SweepTable(cols, rows, _metadata(cfg))
    if cfg.subcommand == "resonance-sweep":
        for b in cfg.betas:
            i = table.argmin(f"t_d@beta={beta_label(b)}")
            table.metadata[f"argmin_o_tilde@beta={beta_label(b)}"] = (
                cfg.grid[i] if i is not None else math.nan)
    return table


def all_converged(table):
    return all(bool(x) for c in table.columns if "converged" in c for x in table.column(c))


# ----------------------------------------------------------------- oracle

def oracle_check(cfg):
    """Compare one mid-grid point per beta against the oracles; True if all agree."""
    from .decoherence import plate_term_s2, plate_term_s3
    from .friction import force_term_f2, force_term_f3
    from .oracle import OracleConfig, oracle_f2, oracle_f3, oracle_s2, oracle_s3

    ocfg = OracleConfig()
    x = cfg.grid[len(cfg.grid) // 2]
    ok = True
    for b in cfg.betas:
        p = cfg.params.replace(beta=b, **{cfg.axis: x})
        if p.v == 0 or f1_window_is_open(p)[0]:
            log.info("oracle check skipped at beta=%s (v = 0 or window open)", beta_label(b))
            continue
        if cfg.subcommand in ("force-sweep", "point"):
            pairs = [("F2", force_term_f2(p, cfg.tol).value, oracle_f2(p, ocfg)),
                     ("F3", force_term_f3(p, cfg.tol).value, (oracle_f3(p, ocfg), 0.0))]
        else:
            pairs = [("S2", plate_term_s2(p, cfg.tol).value, oracle_s2(p, ocfg)),
                     ("S3", plate_term_s3(p, cfg.tol, cfg.s3_convention).value,
                      (oracle_s3(p, ocfg, cfg.s3_convention), 0.0))]
        for name, prod, (ref, se) in pairs:
            good = abs(prod - ref) <= 3 * se + 1e-4 * abs(ref)
            ok = ok and good
            log.log(logging.INFO if good else logging.ERROR,
                    "oracle %s at beta=%s %s=%r: production %.12g oracle %.12g (se %.3g) %s",
                    name, beta_label(b), cfg.axis, x, prod, ref, se, "ok" if good else "MISMATCH")
    return ok


# ----------------------------------------------------------------- plots

PLOT_TEMPLATE = '''"""Plot {csv_name}; generated alongside it and reads nothing else."""
import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
path = os.path.join(here, {csv_name!r})
with open(path, newline="") as fh:
    lines = [ln for ln in fh if not ln.startswith("#")]
rows = list(csv.reader(lines))
header, data = rows[0], rows[1:]
x = [float(r[0]) for r in data]

fig, ax = plt.subplots(figsize=(6, 4))
for j, name in enumerate(header):
    if not name.startswith({quantity!r} + "@"):
        continue
    y = [abs(float(r[j])) for r in data]
    ax.plot(x, y, label=name.split("@", 1)[1])
ax.set_xlabel({xlabel!r})
ax.set_ylabel({ylabel!r})
ax.set_yscale("log")
ax.legend()
fig.tight_layout()
fig.savefig(os.path.splitext(path)[0] + ".png", dpi=150)
'''


def write_plot_script(cfg, csv_path):
    quantity = "force_total" if cfg.subcommand in ("force-sweep", "point") else "t_d"
    xlabel = "v" if cfg.axis == "v" else "plate frequency (a Omega)"
    ylabel = "|F| (natural units)" if quantity == "force_total" else "t_d (A-units)"
    script = os.path.splitext(csv_path)[0] + "_plot.py"
    with open(script, "w", encoding="utf-8") as fh:
        fh.write(PLOT_TEMPLATE.format(csv_name=os.path.basename(csv_path), quantity=quantity,
                                      xlabel=xlabel, ylabel=ylabel))
    return script


def run(cfg):
    """Execute a parsed configuration; returns the exit status."""
    table = build_table(cfg)
    try:
        table.write_csv(cfg.out)
    except OSError as exc:
        print(f"qfriction: cannot write {cfg.out}: {exc}", file=sys.stderr)
        return 1
    log.info("wrote %s (%d rows)", cfg.out, len(table))
    if cfg.emit_plot:
        try:
            log.info("wrote %s", write_plot_script(cfg, cfg.out))
        except OSError as exc:
            print(f"qfriction: cannot write plot script: {exc}", file=sys.stderr)
            return 1
    status = 0 if all_converged(table) else 2
    if cfg.oracle_check and not oracle_check(cfg):
        status = 2
    return status


def main(argv=None):
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"qfriction: error: {exc}", file=sys.stderr)
        return 1
    out_dir = os.path.dirname(os.path.abspath(cfg.out))
    if not os.access(out_dir, os.W_OK):
        print(f"qfriction: error: out: directory {out_dir} is not writable", file=sys.stderr)
        return 1
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
