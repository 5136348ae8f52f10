"""Command-line driver: scenario files, figure reproduction and oracle checks.

Scenario files are flat ``key = value`` text with ``#`` comments, one
scenario per file.  ``dt_over_tauc`` may hold a comma-separated list, in
which case one run per value is made.  Numeric values accept simple
arithmetic, e.g. ``tau_c = 0.4*2*pi`` or ``dt_over_tauc = 2^-3, 2^-4``.

Subcommands::

    tclpulse simulate <config>
    tclpulse reproduce <figure-id> <outdir>
    tclpulse oracle {dephasing,golden_rule,few_mode} <config>

Exit codes: 0 success, 1 oracle comparison failed, 2 configuration error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import ast
import csv
import dataclasses
import logging
import math
import operator
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .evolve import QubitState, Trajectory, evolve
from .model import PhysicalParams, PulseSchedule, make_bb, make_bp, params_from_tau
from .quadrature import QuadratureError, QuadratureSpec

log = logging.getLogger("tclpulse")

COLUMNS = ("t", "t/tau_c", "rho11", "re_rho10", "im_rho10", "abs_rho10", "delta_theta",
           "gamma11", "eta11", "gamma10_re", "gamma10_im")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    pass


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_NAMES = {"pi": math.pi, "inf": math.inf, "e": math.e}


def parse_number(text: str) -> float:
    """Evaluate a numeric literal or a small arithmetic expression."""
    src = text.strip().replace("^", "**")
    try:
        node = ast.parse(src, mode="eval").body
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse number {text!r}") from exc

    def ev(n):
        if isinstance(n, ast.Constant) and isinstance(n.value, (int, float)):
            return float(n.value)
        if isinstance(n, ast.Name) and n.id.lower() in _NAMES:
            return _NAMES[n.id.lower()]
        if isinstance(n, ast.UnaryOp) and isinstance(n.op, (ast.USub, ast.UAdd)):
            v = ev(n.operand)
            return -v if isinstance(n.op, ast.USub) else v
        if isinstance(n, ast.BinOp) and type(n.op) in _BINOPS:
            return _BINOPS[type(n.op)](ev(n.left), ev(n.right))
        raise ConfigError(f"unsupported expression {text!r}")
    return ev(node)


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


@dataclass
class ScenarioConfig:
    tau_c: float = 0.4 * 2 * math.pi
    ratio: float = 2.0
    omega0: float = 0.1
    temperature: float = 0.001
    dt_over_tauc: tuple = (2.0**-3,)
    sequence: str = "none"
    initial_state: str = "plus_i"
    rho11: float = 0.5
    re_rho10: float = 0.0
    im_rho10: float = 0.5
    t_max_over_tauc: float = 10.0
    steps_per_interval: int = 16
    max_step: float = 0.1
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    omega_max: float = 40.0
    frequency_shift: bool = True
    output: str = "trajectory.csv"
    base_dir: Path = field(default=Path("."), repr=False, compare=False)

    def validate(self):
        for name in ("tau_c", "ratio", "omega0", "temperature", "t_max_over_tauc",
                     "max_step", "rel_tol", "abs_tol", "omega_max"):
            v = getattr(self, name)
            if not (isinstance(v, float) and v > 0 and not math.isnan(v)):
                raise ConfigError(f"{name} must be positive, got {v}")
        if not self.dt_over_tauc or any(not d > 0 for d in self.dt_over_tauc):
            raise ConfigError("dt_over_tauc must be positive")
        n = self.steps_per_interval
        if n < 4 or n & (n - 1):
            raise ConfigError("steps_per_interval must be a power of two >= 4")
        seq = self.sequence
        if seq not in ("none", "bb", "bp") and not seq.startswith("custom:"):
            raise ConfigError(f"unknown sequence {seq!r}")
        try:
            self.initial()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return self

    @property
    def beta(self) -> float:
        return 1 / self.temperature

    @property
    def t_max(self) -> float:
        return self.t_max_over_tauc * self.tau_c

    def params(self) -> PhysicalParams:
        return params_from_tau(self.tau_c, self.ratio, self.omega0, self.beta)

    def quad(self) -> QuadratureSpec:
        return QuadratureSpec(self.rel_tol, self.abs_tol, self.omega_max)

    def initial(self) -> QubitState:
        if self.initial_state == "plus":
            return QubitState(0.5, 0.5)
        if self.initial_state == "plus_i":
            return QubitState(0.5, 0.5j)
        if self.initial_state == "custom":
            return QubitState(self.rho11, complex(self.re_rho10, self.im_rho10))
        raise ValueError(f"unknown initial_state {self.initial_state!r}")

    def schedule(self, dt_over_tauc: float | None = None) -> PulseSchedule:
        dt = (dt_over_tauc if dt_over_tauc is not None else self.dt_over_tauc[0]) * self.tau_c
        if self.sequence == "none":
            return PulseSchedule()
        if self.sequence == "bb":
            return make_bb(dt, self.t_max)
        if self.sequence == "bp":
            return make_bp(dt, self.t_max)
        path = Path(self.sequence.split(":", 1)[1])
        if not path.is_absolute():
            path = self.base_dir / path
        return read_schedule(path, self.tau_c)

    def expand(self) -> list["ScenarioConfig"]:
        """One config per ``dt_over_tauc`` value; outputs get a suffix."""
        if len(self.dt_over_tauc) == 1:
            return [self]
        out = []
        stem, ext = os.path.splitext(self.output)
        for d in self.dt_over_tauc:
            tag = f"{math.log2(d):+g}".replace("+", "p").replace("-", "m")
            out.append(dataclasses.replace(self, dt_over_tauc=(d,),
                                           output=f"{stem}_dt2{tag}{ext or '.csv'}"))
        return out

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            if f.name == "base_dir":
                continue
            v = getattr(self, f.name)
            if f.name == "dt_over_tauc":
                v = ", ".join(repr(float(d)) for d in v)
            lines.append(f"{f.name} = {_fmt(v)}")
        return "\n".join(lines) + "\n"


_FLOAT_KEYS = {"tau_c", "ratio", "omega0", "temperature", "rho11", "re_rho10", "im_rho10",
               "t_max_over_tauc", "max_step", "rel_tol", "abs_tol", "omega_max"}
_BOOL = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}


def parse_config(text: str, base_dir: Path | str = ".") -> ScenarioConfig:
    cfg = ScenarioConfig(base_dir=Path(base_dir))
    known = {f.name for f in fields(ScenarioConfig)} - {"base_dir"}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in _FLOAT_KEYS:
            val = parse_number(value)
        elif key == "steps_per_interval":
            val = parse_number(value)
            if val != int(val):
                raise ConfigError("steps_per_interval must be an integer")
            val = int(val)
        elif key == "dt_over_tauc":
            val = tuple(parse_number(v) for v in value.split(",") if v.strip())
        elif key == "frequency_shift":
            if value.lower() not in _BOOL:
                raise ConfigError(f"line {lineno}: expected a boolean")
            val = _BOOL[value.lower()]
        else:
            val = value
        setattr(cfg, key, val)
    return cfg.validate()


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return parse_config(text, path.parent)


def read_schedule(path: Path, tau_c: float) -> PulseSchedule:
    """Custom schedule file: one ``<time/tau_c> <X|Z>`` pair per line."""
    events = []
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read schedule {path}: {exc}") from exc
    for raw in lines:
        line = raw.split("#", 1)[0].split()
        if not line:
            continue
        if len(line) != 2:
            raise ConfigError(f"bad schedule line {raw!r}")
        events.append((parse_number(line[0]) * tau_c, line[1]))
    try:
        return PulseSchedule(tuple(events))
    except ValueError as exc:
        raise ConfigError(f"invalid schedule {path}: {exc}") from exc


def simulate(cfg: ScenarioConfig) -> Trajectory:
    """Run one (already expanded) scenario and return its trajectory."""
    params = cfg.params()
    try:
        return evolve(params, cfg.schedule(), cfg.initial(), cfg.t_max,
                      steps_per_interval=cfg.steps_per_interval, quad=cfg.quad(),
                      max_step=cfg.max_step, frequency_shift=cfg.frequency_shift)
    except QuadratureError as exc:
        raise NumericalFailure(str(exc)) from exc
    except ValueError as exc:
        raise NumericalFailure(str(exc)) from exc


def write_csv(traj: Trajectory, path, tau_c: float):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    dth = traj.delta_theta
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for i in range(len(traj.t)):
            z = traj.rho10[i]
            row = (traj.t[i], traj.t[i] / tau_c, traj.rho11[i], z.real, z.imag, abs(z),
                   dth[i], *traj.rates[i])
            w.writerow([format(float(v), ".17g") for v in row])


def run_simulate(cfg: ScenarioConfig, outdir: Path | None = None) -> list[Path]:
    written = []
    for sub in cfg.expand():
        t0 = time.perf_counter()
        traj = simulate(sub)
        out = Path(sub.output)
        if not out.is_absolute():
            out = (outdir or sub.base_dir) / out
        write_csv(traj, out, sub.tau_c)
        log.info("wrote %s (%d samples, %.1f s)", out, len(traj.t), time.perf_counter() - t0)
        written.append(out)
    return written


# figure id -> (ratio, dt exponents, observable column)
FIGURES = {
    "1a": (2.0, (3,), "rho11"),
    "1b": (2.0, (4,), "rho11"),
    "2a": (2.0, (2, 3, 4), "abs_rho10"),
    "2b": (5.0, (2, 3, 4), "abs_rho10"),
    "2c": (50.0, (2, 3, 4), "abs_rho10"),
    "3a": (2.0, (3,), "delta_theta"),
    "3b": (2.0, (4,), "delta_theta"),
}


def figure_curves(figure: str, base: ScenarioConfig | None = None) -> list[ScenarioConfig]:
    """Scenarios behind one figure: the pulse-free reference then bb/bp per interval."""
    if figure not in FIGURES:
        raise ConfigError(f"unknown figure {figure!r}; choose from {', '.join(FIGURES)}")
    ratio, exps, _ = FIGURES[figure]
    base = base or ScenarioConfig()
    base = dataclasses.replace(base, ratio=ratio, initial_state="plus_i")
    # the reference run still needs an interval for step control only
    curves = [dataclasses.replace(base, sequence="none", dt_over_tauc=(2.0**-exps[-1],),
                                  output=f"fig{figure}_none.csv")]
    for e in exps:
        for seq in ("bb", "bp"):
            curves.append(dataclasses.replace(base, sequence=seq, dt_over_tauc=(2.0**-e,),
                                              output=f"fig{figure}_{seq}_dt2m{e}.csv"))
    return curves


def _run_one(args):
    cfg, outdir = args
    return run_simulate(cfg, outdir)[0]


_PLOT_TEMPLATE = '''"""Plot figure {figure} from the CSV files next to this script."""
import csv
from pathlib import Path

import matplotlib.pyplot as plt

HERE = Path(__file__).parent
COLUMN = "{column}"
CURVES = {curves!r}


def load(name):
    with open(HERE / name, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [float(r["t/tau_c"]) for r in rows], [float(r[COLUMN]) for r in rows]


fig, ax = plt.subplots(figsize=(5, 4))
for name, label in CURVES:
    x, y = load(name)
    style = "--" if "_none" in name else (":" if "_bp_" in name else "-")
    ax.plot(x, y, style, label=label)
ax.set_xlabel("t / tau_c")
ax.set_ylabel(COLUMN)
ax.set_title("ratio = {ratio:g}")
ax.legend(fontsize="small")
fig.tight_layout()
fig.savefig(HERE / "fig{figure}.png", dpi=150)
'''


def run_reproduce(figure: str, outdir, jobs: int = 1,
                  base: ScenarioConfig | None = None) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    curves = figure_curves(figure, base)
    tasks = [(c, outdir) for c in curves]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            paths = list(pool.map(_run_one, tasks))
    else:
        paths = [_run_one(t) for t in tasks]
    ratio, _, column = FIGURES[figure]
    labels = []
    for c in curves:
        if c.sequence == "none":
            labels.append((Path(c.output).name, "no pulses"))
        else:
            e = -math.log2(c.dt_over_tauc[0])
            labels.append((Path(c.output).name, f"{c.sequence}, dt/tau_c = 2^-{e:g}"))
    script = outdir / f"plot_fig{figure}.py"
    script.write_text(_PLOT_TEMPLATE.format(figure=figure, column=column, curves=labels,
                                            ratio=ratio), encoding="utf-8")
    return paths + [script]


def run_oracle(kind: str, cfg: ScenarioConfig) -> dict:
    """Compare the engine against an independent reference; returns a report."""
    from . import oracle
    from .rates import gamma11

    params = cfg.params()
    if kind == "dephasing":
        if params.g_lambda != 0:
            raise ConfigError("dephasing oracle needs ratio = inf (no decay coupling)")
        sched = cfg.schedule()
        if sched.has_z:
            raise ConfigError("dephasing oracle needs a schedule without phase flips")
        traj = simulate(cfg)
        idx = np.unique(np.linspace(0, len(traj.t) - 1, 41).astype(int))
        r0 = abs(traj.rho10[0])
        exact = np.array([r0 * math.exp(-oracle.exact_dephasing_gamma(
            traj.t[i], sched, params.g_theta, params.beta, cfg.quad())) for i in idx])
        dev = float(np.max(np.abs(traj.abs_rho10[idx] - exact) / exact))
        threshold = 1e-4 if len(sched) == 0 else 1e-3
    elif kind == "golden_rule":
        if params.g_lambda == 0:
            raise ConfigError("golden-rule oracle needs a decay coupling")
        t = 50.0
        try:
            value = gamma11(t, params, PulseSchedule(), cfg.quad())
        except QuadratureError as exc:
            raise NumericalFailure(f"gamma11 at t={t}: {exc}") from exc
        ref = oracle.golden_rule_rate(params)
        dev = abs(value / ref - 1)
        threshold = 0.01
    elif kind == "few_mode":
        return _few_mode_report(cfg)
    else:
        raise ConfigError(f"unknown oracle kind {kind!r}")
    return {"kind": kind, "max_rel_deviation": dev, "threshold": threshold,
            "passed": bool(dev < threshold)}


FEW_MODE_BAND = (0.02, 0.5)


def few_mode_comparison(params: PhysicalParams, dt: float, window: float | None = None,
                        n_modes: int = 5, n_max: int = 2, scale: float = 0.1):
    """bb versus no pulses in the few-mode model, inside the recurrence window.

    Returns ``(times, |rho10| without pulses, |rho10| with bb, window)``,
    sampled once per pulse interval.
    """
    from .oracle import FewModeBath, few_mode_evolve, recurrence_time
    from .evolve import PLUS_I

    bath = FewModeBath.from_params(params, n_modes=n_modes, n_max=n_max, band=FEW_MODE_BAND,
                                   scale=scale)
    t_rec = recurrence_time(bath)
    window = t_rec if window is None else min(window, t_rec)
    step = dt / 4
    ref = few_mode_evolve(bath, params, None, PLUS_I, window, step)
    bb = few_mode_evolve(bath, params, make_bb(dt, window), PLUS_I, window, step)
    times = np.arange(1, int(window / dt * (1 + 1e-12)) + 1) * dt
    c_ref = np.array([ref.abs_rho10[ref.at(t)] for t in times])
    c_bb = np.array([bb.abs_rho10[bb.at(t)] for t in times])
    return times, c_ref, c_bb, window


def few_mode_verdict(times, c_ref, c_bb, dt) -> tuple[bool, float]:
    """bb must stay above the reference after the second interval."""
    later = times > 2 * dt
    gain = c_bb[later] - c_ref[later]
    return bool(np.all(gain > 0)), float(gain.min())


def _few_mode_report(cfg: ScenarioConfig) -> dict:
    params = cfg.params()
    dt = cfg.dt_over_tauc[0] * cfg.tau_c
    times, c_ref, c_bb, window = few_mode_comparison(params, dt)
    passed, gain = few_mode_verdict(times, c_ref, c_bb, dt)
    return {"kind": "few_mode", "window": window, "min_gain": gain, "passed": passed}


def _apply_overrides(cfg: ScenarioConfig, args) -> ScenarioConfig:
    if getattr(args, "quad_tol", None) is not None:
        cfg = dataclasses.replace(cfg, rel_tol=args.quad_tol)
    if getattr(args, "steps_per_interval", None) is not None:
        cfg = dataclasses.replace(cfg, steps_per_interval=args.steps_per_interval)
    return cfg.validate()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tclpulse", description=__doc__.splitlines()[0])
    parser.add_argument("--jobs", type=int, default=1, help="parallel runs")
    parser.add_argument("--quad-tol", type=float, default=None, help="relative quadrature tolerance")
    parser.add_argument("--steps-per-interval", type=int, default=None)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("simulate", help="run one scenario file")
    p.add_argument("config")
    p = sub.add_parser("reproduce", help="recompute the curves of one figure")
    p.add_argument("figure", choices=sorted(FIGURES))
    p.add_argument("outdir")
    p = sub.add_parser("oracle", help="compare against an independent reference")
    p.add_argument("kind", choices=("dephasing", "golden_rule", "few_mode"))
    p.add_argument("config")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "simulate":
            cfg = _apply_overrides(load_config(args.config), args)
            subs = cfg.expand()
            if args.jobs > 1 and len(subs) > 1:
                with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                    paths = list(pool.map(_run_one, [(s, None) for s in subs]))
            else:
                paths = run_simulate(cfg)
            for p in paths:
                print(p)
        elif args.command == "reproduce":
            base = _apply_overrides(ScenarioConfig(), args)
            for p in run_reproduce(args.figure, args.outdir, args.jobs, base):
                print(p)
        else:
            cfg = _apply_overrides(load_config(args.config), args)
            report = run_oracle(args.kind, cfg)
            for k, v in report.items():
                print(f"{k}: {v}")
            print("PASS" if report["passed"] else "FAIL")
            return EXIT_OK if report["passed"] else EXIT_FAIL
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
