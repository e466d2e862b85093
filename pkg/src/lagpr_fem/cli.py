"""Command-line front-end: ``generate``, ``fit-eval``, ``solve`` and ``report``.

Every command writes the validated :class:`RunConfig` to
``<out>/run_config.json`` next to its results. Exit codes: 0 ok,
2 non-convergence, 3 configuration error, 4 I/O error.
"""

import argparse
import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
import json
import logging
from pathlib import Path
import sys
import time

import numpy as np

from . import __version__, backend_name
from .baselines import knn1_evaluate, mean_stress_error, normalized_component_mse
from .dataset import build_training_set, design_strains, load_csv, save_csv
from .errors import IoError, LagprFemError, LinearSolveFailure, SchemaMismatch
from .lagpr import DEFAULT_N_LOCAL, MIN_N_LOCAL, build_index, evaluate, local_fit
from .mechanics import ORACLES
from .sampling import hypercube_layers, lhs_sample

log = logging.getLogger("lagpr_fem")

EXIT_OK = 0
EXIT_NONCONVERGED = 2
EXIT_CONFIG = 3
EXIT_IO = 4

CONFIG_NAME = "run_config.json"
TRAIN_NAME = "train.csv"
ERRORS_NAME = "errors.csv"
TIMING_NAME = "timing.csv"
REPORT_NAME = "report.csv"
SUMMARY_NAME = "summary.csv"

BACKENDS = ("oracle", "lagpr", "knn1")
METHODS = ("lagpr", "knn1")


class ConfigError(LagprFemError):
    pass


@dataclass
class RunConfig:
    """Everything a command needs; saved verbatim into the output directory."""

    command: str
    out: str
    oracle: str = None
    delta_T: float = 0.175
    n_h: int = 20
    n_local: int = DEFAULT_N_LOCAL
    freeze: bool = True
    freeze_theta: bool = False
    share_theta: bool = False
    c_tol: float = 0.01
    g_tol: float = 1e-8
    max_iter: int = 12
    seed: int = 0
    workers: int = 1
    data: str = None
    n_test: int = 1000
    methods: tuple = METHODS
    problem: str = None
    backend: str = "lagpr"
    magnitude: float = None
    load_steps: int = 1
    runs: tuple = ()
    version: str = __version__

    def validate(self):
        from .fem.benchmarks import PROBLEMS

        if self.oracle is not None and self.oracle not in ORACLES:
            raise ConfigError(f"unknown oracle {self.oracle!r}")
        if not (np.isfinite(self.delta_T) and 0 < self.delta_T < 1):
            raise ConfigError(f"--domain must lie in (0, 1), got {self.delta_T}")
        if self.n_h < 1:
            raise ConfigError("--layers must be positive")
        if self.n_local < MIN_N_LOCAL:
            raise ConfigError(f"--n-local must be at least {MIN_N_LOCAL}")
        if not (self.c_tol > 0 and self.g_tol > 0):
            raise ConfigError("--c-tol and --g-tol must be positive")
        if self.max_iter < 1 or self.load_steps < 1:
            raise ConfigError("--max-iter and --load-steps must be at least one")
        if self.workers < 1:
            raise ConfigError("--workers must be at least one")
        if self.command == "fit-eval":
            if self.n_test < 1:
                raise ConfigError("--n-test must be at least one")
            bad = set(self.methods) - set(METHODS)
            if bad or not self.methods:
                raise ConfigError(f"--methods must be a subset of {METHODS}")
        if self.command == "solve":
            if self.problem not in PROBLEMS:
                raise ConfigError(f"--problem must be one of {PROBLEMS}")
            if self.backend not in BACKENDS:
                raise ConfigError(f"--backend must be one of {BACKENDS}")
        if self.command == "report" and not self.runs:
            raise ConfigError("report needs at least one run directory")
        return self

    def to_json(self):
        d = asdict(self)
        d["methods"] = list(self.methods)
        d["runs"] = list(self.runs)
        return json.dumps(d, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        known = {f.name for f in fields(cls)}
        cfg = cls(**{k: v for k, v in d.items() if k in known})
        cfg.methods = tuple(cfg.methods)
        cfg.runs = tuple(cfg.runs)
        return cfg

    def save(self, directory):
        _write_text(Path(directory) / CONFIG_NAME, self.to_json())


def _out_dir(path):
    out = Path(path)
    if not out.is_dir():
        raise IoError(f"output directory does not exist: {out}")
    return out


def _write_text(path, text):
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _write_rows(path, header, rows):
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _fmt(x):
    return format(float(x), ".17g")


# -- generate ---------------------------------------------------------------


def cmd_generate(cfg: RunConfig):
    out = _out_dir(cfg.out)
    design = hypercube_layers(cfg.delta_T, cfg.n_h)
    ts = build_training_set(design, cfg.oracle or "trans-iso")
    save_csv(ts, out / TRAIN_NAME)
    cfg.save(out)
    print(f"wrote {len(ts)} rows to {out / TRAIN_NAME}")
    return EXIT_OK


# -- fit-eval ---------------------------------------------------------------


def _load_training(cfg):
    """Training set from ``--data`` or, if absent, generated in memory from the
    shared design flags."""
    if cfg.data:
        ts = load_csv(cfg.data)
        if not ts.meta:
            raise SchemaMismatch(f"{cfg.data} has no descriptor; the oracle is unknown")
        if cfg.oracle is not None and ts.meta.get("oracle") != cfg.oracle:
            raise ConfigError(f"--oracle {cfg.oracle} disagrees with the data ({ts.meta.get('oracle')})")
        return ts
    return build_training_set(hypercube_layers(cfg.delta_T, cfg.n_h), cfg.oracle or "trans-iso")


def lagpr_predict(ts, idx, queries, n_local=DEFAULT_N_LOCAL, freeze_theta=False, share_theta=False, workers=1):
    """Stress predictions of one fresh local GP per query row."""

    def one(c):
        ls = local_fit(idx, ts, c, n_local=n_local, optimize=not freeze_theta, share_theta=share_theta)
        return evaluate(ls, c)[0]

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(one, queries))
    else:
        rows = [one(c) for c in queries]
    return np.array(rows)


def fit_eval(cfg: RunConfig, ts=None):
    """Run the LHS error study; returns ``(error_rows, timing_rows)``."""
    ts = ts if ts is not None else _load_training(cfg)
    oracle = ts.oracle
    delta_T = float(ts.meta.get("delta_T", cfg.delta_T))
    test_c = design_strains(lhs_sample(delta_T, cfg.n_test, cfg.seed).points)
    truth = oracle.stress(test_c)
    idx = build_index(ts)
    errors, timing = [], []
    for method in cfg.methods:
        t0 = time.perf_counter()
        if method == "lagpr":
            pred = lagpr_predict(ts, idx, test_c, cfg.n_local, cfg.freeze_theta, cfg.share_theta, cfg.workers)
        else:
            pred = knn1_evaluate(idx, ts, test_c)[0]
        wall = time.perf_counter() - t0
        e_s = mean_stress_error(pred, truth)
        mse = normalized_component_mse(pred, truth)
        errors.append([method, len(ts), _fmt(e_s), *map(_fmt, mse)])
        timing.append([method, len(ts), f"{wall:.3f}"])
        log.info("%s n_train=%d E_S=%.6e (%.1fs)", method, len(ts), e_s, wall)
    return errors, timing


ERRORS_HEADER = ["method", "n_train", "E_S"] + [f"nmse_s{i}" for i in range(1, 7)]
TIMING_HEADER = ["method", "n_train", "wall_time"]
REPORT_HEADER = ["method", "n_train", "E_S", "wall_time"]


def cmd_fit_eval(cfg: RunConfig):
    out = _out_dir(cfg.out)
    errors, timing = fit_eval(cfg)
    # timings live in their own file so errors.csv is reproducible byte for byte
    _write_rows(out / ERRORS_NAME, ERRORS_HEADER, errors)
    _write_rows(out / TIMING_NAME, TIMING_HEADER, timing)
    _write_rows(out / REPORT_NAME, REPORT_HEADER, [e[:3] + t[2:] for e, t in zip(errors, timing)])
    cfg.save(out)
    for e, t in zip(errors, timing):
        print(f"{e[0]:6s} n_train={e[1]} E_S={float(e[2]):.6e} wall={t[2]}s")
    return EXIT_OK


# -- solve ------------------------------------------------------------------


def default_oracle(problem):
    return "trans-iso" if problem.startswith("cube") else "neo-hooke"


def cmd_solve(cfg: RunConfig):
    from .fem import apply_benchmark, make_backend, solve_modified_nr, write_fields, write_trace
    from .fem.solver import NrConfig
    from .mechanics import make_oracle

    out = _out_dir(cfg.out)
    if cfg.oracle is None:
        cfg.oracle = default_oracle(cfg.problem)
    mesh, bcs = apply_benchmark(cfg.problem, cfg.magnitude)
    if cfg.backend == "oracle":
        backend = make_backend("oracle", oracle=make_oracle(cfg.oracle))
    else:
        ts = _load_training(cfg)
        kw = {}
        if cfg.backend == "lagpr":
            kw = dict(n_local=cfg.n_local, freeze_theta=cfg.freeze_theta, share_theta=cfg.share_theta, workers=cfg.workers)
        backend = make_backend(cfg.backend, ts, **kw)
    nr = NrConfig(c_tol=cfg.c_tol, g_tol=cfg.g_tol, max_iter=cfg.max_iter, freeze_enabled=cfg.freeze, load_steps=cfg.load_steps)
    cfg.save(out)
    t0 = time.perf_counter()
    result = solve_modified_nr(mesh, bcs, backend, nr)
    wall = time.perf_counter() - t0
    write_trace(out / "trace.csv", result.trace)
    write_fields(out / "nodes.csv", out / "gauss.csv", mesh, result)
    summary = [
        ("problem", cfg.problem),
        ("backend", cfg.backend),
        ("status", result.status),
        ("n_iter", result.n_iter),
        ("final_res_rel", _fmt(result.final_res_rel)),
        ("max_abs_F", _fmt(result.max_abs_F())),
        ("max_abs_F12", _fmt(result.max_abs_F(0, 1))),
        ("n_fits", getattr(backend, "n_fits", 0)),
        ("n_extrapolated", getattr(backend, "n_extrapolated", 0)),
        ("wall_time", f"{wall:.3f}"),
    ]
    _write_rows(out / SUMMARY_NAME, ["key", "value"], summary)
    for row in result.trace:
        print(f"iter {row.iter:2d}  res_rel {row.res_rel:.3e}  refit {row.n_refit:5d}  frozen {row.n_frozen:5d}")
    print(f"{cfg.problem}: {result.status} after {result.n_iter} iterations, max|F12| = {result.max_abs_F(0, 1):.4f}")
    n_extra = getattr(backend, "n_extrapolated", 0)
    if n_extra:
        print(f"warning: {n_extra} local fits queried outside the trained domain")
    return EXIT_OK if result.converged else EXIT_NONCONVERGED


# -- report -----------------------------------------------------------------


def _read_csv(path):
    try:
        with open(path, newline="") as fh:
            return list(csv.DictReader(fh))
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc


def cmd_report(cfg: RunConfig):
    """Join ``errors.csv`` and ``timing.csv`` of fit-eval runs into one table
    sorted by method then training-set size."""
    out = _out_dir(cfg.out)
    rows = []
    for run in cfg.runs:
        run = Path(run)
        err = _read_csv(run / ERRORS_NAME)
        tim = {(r["method"], r["n_train"]): r["wall_time"] for r in _read_csv(run / TIMING_NAME)}
        for r in err:
            rows.append([r["method"], int(r["n_train"]), r["E_S"], tim.get((r["method"], r["n_train"]), "")])
    rows.sort(key=lambda r: (r[0], r[1]))
    _write_rows(out / REPORT_NAME, REPORT_HEADER, rows)
    cfg.save(out)
    for r in rows:
        print(f"{r[0]:6s} {r[1]:6d}  E_S={float(r[2]):.6e}  wall={r[3]}")
    return EXIT_OK


COMMANDS = {"generate": cmd_generate, "fit-eval": cmd_fit_eval, "solve": cmd_solve, "report": cmd_report}


# -- argument parsing -------------------------------------------------------


def _on_off(text):
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return text == "on"


def _shared(p):
    p.add_argument("--domain", type=float, default=0.175, dest="delta_T", help="half-width of the stretch domain")
    p.add_argument("--layers", type=int, default=20, dest="n_h", help="number of hypercube layers")
    p.add_argument("--oracle", choices=ORACLES, default=None)
    p.add_argument("--n-local", type=int, default=DEFAULT_N_LOCAL)
    p.add_argument("--freeze", type=_on_off, default=True, metavar="{on,off}")
    p.add_argument("--freeze-theta", action="store_true", help="never optimise length scales")
    p.add_argument("--share-theta", action="store_true", help="one length-scale set for stress, one for tangent")
    p.add_argument("--c-tol", type=float, default=0.01)
    p.add_argument("--g-tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=12)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=".")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(prog="lagpr-fem", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({backend_name()} kernels)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a nested-hypercube training set")
    _shared(p)

    p = sub.add_parser("fit-eval", help="laGPR and 1-NN stress errors on an LHS test set")
    _shared(p)
    p.add_argument("--data", help="training CSV (default: generate from the design flags)")
    p.add_argument("--n-test", type=int, default=1000)
    p.add_argument("--methods", nargs="+", default=list(METHODS))

    p = sub.add_parser("solve", help="run a finite-element benchmark")
    _shared(p)
    p.add_argument("--problem", required=True)
    p.add_argument("--backend", default="lagpr")
    p.add_argument("--data", help="training CSV (default: generate from the design flags)")
    p.add_argument("--magnitude", type=float, default=None, help="override the prescribed displacement")
    p.add_argument("--load-steps", type=int, default=1)

    p = sub.add_parser("report", help="join fit-eval runs into report.csv")
    p.add_argument("runs", nargs="+", help="fit-eval output directories")
    p.add_argument("--out", default=".")
    p.add_argument("-v", "--verbose", action="store_true")
    return parser


def config_from_args(args):
    d = vars(args).copy()
    d.pop("verbose", None)
    known = {f.name for f in fields(RunConfig)}
    d = {k: v for k, v in d.items() if k in known}
    for key in ("methods", "runs"):
        if key in d:
            d[key] = tuple(d[key])
    return RunConfig(**d)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on bad usage; that code is reserved for non-convergence
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(args).validate()
        return COMMANDS[cfg.command](cfg)
    except LinearSolveFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except (IoError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, SchemaMismatch, LagprFemError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
