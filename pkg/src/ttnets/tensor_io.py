"""Plain-text interchange files for tensors, factors and checkpoints.

All files are line-oriented ASCII.  Values are written one per line with
17 significant digits, which round-trips float64 exactly.  Arrays are
flattened row-major (last index fastest).

Dense tensor::

    shape: n1 n2 ... nd
    <prod(n) values>

Tensor train::

    tt: d
    core: r_prev n r_next        (d blocks, chained ranks, r_0 = r_d = 1)
    <values>

Separable sum::

    cp: d r
    factor: n r                  (d blocks)
    <values>

Tree format (d a power of two)::

    ht: d
    leaf: n r                    (d blocks, leaf order)
    <values>
    node: r_left r_right r_out   (bottom-up levels, left to right;
    <values>                      the root comes last with r_out = 1)

Network checkpoint::

    ttnets-checkpoint v1
    kind: tt | cp
    classes: C
    input: d n
    activation: relu | identity | sigmoid
    A: m n
    <values>
    b: m
    <values>
    then the weight blocks: for tt, d ``core:`` blocks whose last core is
    (r, m, C); for cp, d-1 ``factor:`` blocks plus one ``factor3: m r C``.
"""

from __future__ import annotations

import numpy as np

from .decompositions import CPTensor, HTTensor, TTTensor
from .networks import CPWeights, FeatureMap, ScoreNetwork, TTWeights

__all__ = [
    "load_checkpoint",
    "load_cp",
    "load_dense",
    "load_ht",
    "load_tt",
    "save_checkpoint",
    "save_cp",
    "save_dense",
    "save_ht",
    "save_tt",
]

CHECKPOINT_HEADER = "ttnets-checkpoint v1"


def _write_values(fh, arr: np.ndarray) -> None:
    for v in np.asarray(arr, dtype=np.float64).ravel():
        fh.write(f"{v:.17g}\n")


class _LineReader:
    def __init__(self, path):
        self.path = path
        with open(path) as fh:
            self.lines = [ln.strip() for ln in fh]
        self.lines = [ln for ln in self.lines if ln]
        self.pos = 0

    def next_line(self, what: str) -> str:
        if self.pos >= len(self.lines):
            raise ValueError(f"{self.path}: unexpected end of file, expected {what}")
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def header(self, tag: str) -> list[int]:
        line = self.next_line(f"'{tag}' header")
        if not line.startswith(tag):
            raise ValueError(f"{self.path}: expected '{tag}' header, got {line!r}")
        try:
            return [int(tok) for tok in line[len(tag):].split()]
        except ValueError:
            raise ValueError(f"{self.path}: malformed header {line!r}") from None

    def values(self, shape) -> np.ndarray:
        size = int(np.prod(shape))
        out = np.empty(size)
        for i in range(size):
            token = self.next_line("a value")
            try:
                out[i] = float(token)
            except ValueError:
                raise ValueError(f"{self.path}: expected a number, got {token!r}") from None
        return out.reshape(shape)

    def expect_end(self) -> None:
        if self.pos != len(self.lines):
            raise ValueError(f"{self.path}: trailing content at line {self.pos + 1}")


# ---------------------------------------------------------------------------
# dense tensors


def save_dense(path, x) -> None:
    x = np.asarray(x, dtype=np.float64)
    with open(path, "w") as fh:
        fh.write("shape: " + " ".join(str(n) for n in x.shape) + "\n")
        _write_values(fh, x)


def load_dense(path) -> np.ndarray:
    reader = _LineReader(path)
    shape = reader.header("shape:")
    if not shape or any(n < 1 for n in shape):
        raise ValueError(f"{path}: invalid shape {shape}")
    x = reader.values(shape)
    reader.expect_end()
    return x


# ---------------------------------------------------------------------------
# factorized formats


def save_tt(path, tt: TTTensor) -> None:
    with open(path, "w") as fh:
        fh.write(f"tt: {tt.ndim}\n")
        for core in tt.cores:
            fh.write("core: " + " ".join(str(n) for n in core.shape) + "\n")
            _write_values(fh, core)


def _read_tt_cores(reader: _LineReader, count: int) -> list[np.ndarray]:
    cores = []
    for _ in range(count):
        dims = reader.header("core:")
        if len(dims) != 3:
            raise ValueError(f"{reader.path}: core header needs 3 dims, got {dims}")
        cores.append(reader.values(dims))
    return cores


def load_tt(path) -> TTTensor:
    reader = _LineReader(path)
    (d,) = reader.header("tt:")
    cores = _read_tt_cores(reader, d)
    reader.expect_end()
    return TTTensor(tuple(cores))


def save_cp(path, cp: CPTensor) -> None:
    with open(path, "w") as fh:
        fh.write(f"cp: {cp.ndim} {cp.rank}\n")
        for factor in cp.factors:
            fh.write(f"factor: {factor.shape[0]} {factor.shape[1]}\n")
            _write_values(fh, factor)


def load_cp(path) -> CPTensor:
    reader = _LineReader(path)
    d, r = reader.header("cp:")
    factors = []
    for _ in range(d):
        dims = reader.header("factor:")
        if len(dims) != 2 or dims[1] != r:
            raise ValueError(f"{reader.path}: factor header {dims} inconsistent with rank {r}")
        factors.append(reader.values(dims))
    reader.expect_end()
    return CPTensor(tuple(factors))


def save_ht(path, ht: HTTensor) -> None:
    with open(path, "w") as fh:
        fh.write(f"ht: {ht.ndim}\n")
        for leaf in ht.leaves:
            fh.write(f"leaf: {leaf.shape[0]} {leaf.shape[1]}\n")
            _write_values(fh, leaf)
        for level in ht.transfer:
            for node in level:
                fh.write("node: " + " ".join(str(n) for n in node.shape) + "\n")
                _write_values(fh, node)


def load_ht(path) -> HTTensor:
    reader = _LineReader(path)
    (d,) = reader.header("ht:")
    if d < 2 or d & (d - 1):
        raise ValueError(f"{path}: leaf count must be a power of two, got {d}")
    leaves = []
    for _ in range(d):
        dims = reader.header("leaf:")
        if len(dims) != 2:
            raise ValueError(f"{reader.path}: leaf header needs 2 dims, got {dims}")
        leaves.append(reader.values(dims))
    transfer = []
    width = d // 2
    while width >= 1:
        level = []
        for _ in range(width):
            dims = reader.header("node:")
            if len(dims) != 3:
                raise ValueError(f"{reader.path}: node header needs 3 dims, got {dims}")
            level.append(reader.values(dims))
        transfer.append(tuple(level))
        width //= 2
    reader.expect_end()
    return HTTensor(tuple(leaves), tuple(transfer))


# ---------------------------------------------------------------------------
# network checkpoints


def save_checkpoint(path, net: ScoreNetwork, input_size: int | None = None) -> None:
    """Persist a trained shared-mode chain or separable-sum network."""
    if net.class_mode != "shared" or net.kind not in ("tt", "cp"):
        raise ValueError("checkpoints support shared-mode tt/cp networks")
    fm = net.feature_map
    n = fm.input_size if input_size is None else input_size
    with open(path, "w") as fh:
        fh.write(CHECKPOINT_HEADER + "\n")
        fh.write(f"kind: {net.kind}\n")
        fh.write(f"classes: {net.num_classes}\n")
        fh.write(f"input: {net.num_patches} {n}\n")
        fh.write(f"activation: {fm.activation}\n")
        fh.write(f"A: {fm.A.shape[0]} {fm.A.shape[1]}\n")
        _write_values(fh, fm.A)
        fh.write(f"b: {fm.b.shape[0]}\n")
        _write_values(fh, fm.b)
        if net.kind == "tt":
            for core in net.weights.cores:
                fh.write("core: " + " ".join(str(v) for v in core.shape) + "\n")
                _write_values(fh, core)
        else:
            for factor in net.weights.factors[:-1]:
                fh.write(f"factor: {factor.shape[0]} {factor.shape[1]}\n")
                _write_values(fh, factor)
            last = net.weights.factors[-1]
            fh.write("factor3: " + " ".join(str(v) for v in last.shape) + "\n")
            _write_values(fh, last)


def load_checkpoint(path) -> ScoreNetwork:
    reader = _LineReader(path)
    if reader.next_line("checkpoint header") != CHECKPOINT_HEADER:
        raise ValueError(f"{path}: not a {CHECKPOINT_HEADER!r} file")
    kind_line = reader.next_line("kind")
    if not kind_line.startswith("kind: "):
        raise ValueError(f"{path}: expected 'kind:' line")
    kind = kind_line.split()[1]
    (classes,) = reader.header("classes:")
    d, _n = reader.header("input:")
    act_line = reader.next_line("activation")
    if not act_line.startswith("activation: "):
        raise ValueError(f"{path}: expected 'activation:' line")
    activation = act_line.split()[1]
    a_dims = reader.header("A:")
    a = reader.values(a_dims)
    (b_dim,) = reader.header("b:")
    b = reader.values([b_dim])
    fm = FeatureMap(A=a, b=b, activation=activation)
    if kind == "tt":
        weights = TTWeights(_read_tt_cores(reader, d))
    elif kind == "cp":
        factors = []
        for _ in range(d - 1):
            dims = reader.header("factor:")
            factors.append(reader.values(dims))
        dims = reader.header("factor3:")
        if len(dims) != 3:
            raise ValueError(f"{path}: factor3 header needs 3 dims, got {dims}")
        factors.append(reader.values(dims))
        weights = CPWeights(factors)
    else:
        raise ValueError(f"{path}: unsupported network kind {kind!r}")
    reader.expect_end()
    return ScoreNetwork(feature_map=fm, weights=weights, num_classes=classes)
