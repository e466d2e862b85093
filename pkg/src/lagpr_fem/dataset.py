"""Training sets of (c, s, d) rows: construction from an oracle and CSV persistence.

A set is written as two files: ``<name>.csv`` holding the 48 numeric
columns ``c1..c6,s1..s6,d1..d36`` and ``<name>.desc`` holding ``key=value``
metadata lines.
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidArgs, IoError, SchemaMismatch, SingularC
from .mechanics import Oracle, compose_F, make_oracle, right_cauchy_green
from .sampling import HypercubeDesign, LhsDesign

SCHEMA_VERSION = 1
HEADER = [f"c{i}" for i in range(1, 7)] + [f"s{i}" for i in range(1, 7)] + [f"d{i}" for i in range(1, 37)]
DESCRIPTOR_SUFFIX = ".desc"


@dataclass
class TrainingSet:
    c: np.ndarray  # (N, 6)
    s: np.ndarray  # (N, 6)
    d: np.ndarray  # (N, 36)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.c = np.ascontiguousarray(self.c, dtype=float)
        self.s = np.ascontiguousarray(self.s, dtype=float)
        self.d = np.ascontiguousarray(self.d, dtype=float)
        n = len(self.c)
        if n < 1:
            raise InvalidArgs("a training set needs at least one row")
        if self.c.shape != (n, 6) or self.s.shape != (n, 6) or self.d.shape != (n, 36):
            raise InvalidArgs("inconsistent training set shapes")

    def __len__(self):
        return len(self.c)

    @property
    def y(self):
        """The 42-wide GP target matrix ``[s | d]``."""
        return np.hstack([self.s, self.d])

    def table(self):
        return np.hstack([self.c, self.s, self.d])

    @property
    def oracle(self):
        return Oracle.from_descriptor(self.meta)

    @property
    def spacing(self):
        """Layer spacing of a hypercube design, ``None`` for other designs."""
        if "n_h" in self.meta:
            return float(self.meta["delta_T"]) / int(self.meta["n_h"])
        return None


def design_strains(points):
    return right_cauchy_green(compose_F(points))


def build_training_set(design, oracle, params=None):
    """Evaluate ``oracle`` on every design point (rows keep design order)."""
    if isinstance(oracle, str):
        oracle = make_oracle(oracle, params)
    points = design.points
    c = design_strains(points)
    try:
        s = oracle.stress(c)
        d = oracle.tangent(c)
    except SingularC:
        det = np.linalg.det(compose_F(points))
        bad = int(np.flatnonzero(det ** 2 <= 1e-12)[0])
        raise SingularC(f"singular C at design index {bad}", index=bad) from None
    meta = dict(oracle.descriptor())
    meta["delta_T"] = repr(float(design.delta_T))
    if isinstance(design, HypercubeDesign):
        meta["n_h"] = str(design.n_h)
    elif isinstance(design, LhsDesign):
        meta["lhs_seed"] = str(design.seed)
    meta["schema"] = str(SCHEMA_VERSION)
    return TrainingSet(c, s, d, meta)


def descriptor_path(path):
    path = Path(path)
    return path.with_suffix(DESCRIPTOR_SUFFIX)


def _check_path(path):
    if path is None or str(path) == "":
        raise IoError("empty path")
    return Path(path)


def save_csv(ts: TrainingSet, path):
    path = _check_path(path)
    if not path.parent.is_dir():
        raise IoError(f"output directory does not exist: {path.parent}")
    lines = [",".join(HEADER)]
    lines.extend(",".join(format(x, ".17g") for x in row) for row in ts.table().tolist())
    try:
        with open(path, "w", newline="") as fh:
            fh.write("\n".join(lines) + "\n")
        with open(descriptor_path(path), "w", newline="") as fh:
            for key, value in ts.meta.items():
                fh.write(f"{key}={value}\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_descriptor(path):
    meta = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise SchemaMismatch(f"malformed descriptor line {line!r}")
            meta[key.strip()] = value.strip()
    return meta


def load_csv(path):
    path = _check_path(path)
    if not path.is_file():
        raise IoError(f"no such file: {path}")
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if header != HEADER:
            raise SchemaMismatch(f"unexpected header in {path} ({len(header)} columns)")
        try:
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise SchemaMismatch(f"bad numeric data in {path}: {exc}") from exc
    if data.shape[1] != len(HEADER):
        raise SchemaMismatch(f"expected {len(HEADER)} columns, found {data.shape[1]}")
    desc = descriptor_path(path)
    meta = read_descriptor(desc) if desc.is_file() else {}
    if meta and meta.get("schema") != str(SCHEMA_VERSION):
        raise SchemaMismatch(f"unsupported schema version {meta.get('schema')!r}")
    return TrainingSet(data[:, :6], data[:, 6:12], data[:, 12:], meta)

