"""CP, tensor-train and hierarchical (binary-tree) tensor formats.

All three formats store a d-dimensional tensor through small factors:

* ``CPTensor`` -- a sum of r separable (rank-1) terms, one factor matrix
  per mode.
* ``TTTensor`` -- a chain of 3-way cores ``G_k`` of shape
  ``(r_{k-1}, n_k, r_k)`` with ``r_0 = r_d = 1``; an entry is the product
  ``G_1[1, i_1, :] @ G_2[:, i_2, :] @ ... @ G_d[:, i_d, 1]``.
* ``HTTensor`` -- a perfect binary tree whose leaves carry matrices and
  whose internal nodes carry 3-way transfer tensors contracting the two
  child outputs; the root output has size 1.

Tensors are treated as immutable after construction.  Random sampling
uses numpy's PCG64 generator seeded explicitly, so every construction
is reproducible across platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .svd import DEFAULT_REL_TOL, jacobi_svd, numerical_rank
from .tensor import AxisSplit, as_dense, matricize

__all__ = [
    "CPTensor",
    "DENSE_CAP",
    "HTTensor",
    "TTTensor",
    "cp_entry",
    "cp_random",
    "cp_to_dense",
    "ht_entry",
    "ht_node_leaf_sets",
    "ht_random",
    "ht_to_dense",
    "ranks_from_dense",
    "tt_delta_example",
    "tt_entry",
    "tt_equal_cores_random",
    "tt_random",
    "tt_svd",
    "tt_to_dense",
]

# Guardrail for dense reconstructions; experiments never need more.
DENSE_CAP = 10**7


def _as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _check_cap(shape, cap):
    size = math.prod(shape)
    if size > cap:
        raise ValueError(
            f"dense reconstruction of shape {tuple(shape)} has {size} entries, "
            f"exceeding the cap of {cap}"
        )


@dataclass(frozen=True)
class TTTensor:
    """Tensor-train format: a chain of 3-way cores."""

    cores: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.cores) < 1:
            raise ValueError("a TT tensor needs at least one core")
        object.__setattr__(self, "cores", tuple(np.asarray(c, dtype=np.float64) for c in self.cores))
        for k, core in enumerate(self.cores):
            if core.ndim != 3:
                raise ValueError(f"core {k + 1} must be 3-way, got shape {core.shape}")
        if self.cores[0].shape[0] != 1 or self.cores[-1].shape[2] != 1:
            raise ValueError("boundary ranks r_0 and r_d must equal 1")
        for k in range(len(self.cores) - 1):
            if self.cores[k].shape[2] != self.cores[k + 1].shape[0]:
                raise ValueError(
                    f"rank mismatch between cores {k + 1} and {k + 2}: "
                    f"{self.cores[k].shape[2]} vs {self.cores[k + 1].shape[0]}"
                )

    @property
    def ndim(self) -> int:
        return len(self.cores)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(c.shape[1] for c in self.cores)

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(c.shape[2] for c in self.cores[:-1])


@dataclass(frozen=True)
class CPTensor:
    """Separable-sum format: one (n_k, r) factor matrix per mode."""

    factors: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.factors) < 1:
            raise ValueError("a CP tensor needs at least one factor")
        object.__setattr__(
            self, "factors", tuple(np.asarray(f, dtype=np.float64) for f in self.factors)
        )
        ranks = {f.shape[1] for f in self.factors}
        if any(f.ndim != 2 for f in self.factors) or len(ranks) != 1:
            raise ValueError("all CP factors must be matrices sharing one width r")

    @property
    def ndim(self) -> int:
        return len(self.factors)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(f.shape[0] for f in self.factors)

    @property
    def rank(self) -> int:
        return self.factors[0].shape[1]


@dataclass(frozen=True)
class HTTensor:
    """Perfect-binary-tree format: leaf matrices plus transfer tensors.

    ``transfer[j]`` holds the internal nodes whose subtrees cover
    ``2**(j+1)`` leaves each, ordered left to right; the last level is
    the root, whose output size must be 1.  Node ``transfer[j][i]`` has
    shape ``(r_left, r_right, r_out)`` where the children are the nodes
    (or leaves) covering the two halves of ``leaves[i*2**(j+1) : (i+1)*2**(j+1)]``.
    """

    leaves: tuple[np.ndarray, ...]
    transfer: tuple[tuple[np.ndarray, ...], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "leaves", tuple(np.asarray(m, dtype=np.float64) for m in self.leaves)
        )
        object.__setattr__(
            self,
            "transfer",
            tuple(tuple(np.asarray(b, dtype=np.float64) for b in level) for level in self.transfer),
        )
        d = len(self.leaves)
        if d < 2 or d & (d - 1):
            raise ValueError(f"number of leaves must be a power of two >= 2, got {d}")
        depth = d.bit_length() - 1
        if len(self.transfer) != depth:
            raise ValueError(f"expected {depth} transfer levels, got {len(self.transfer)}")
        child_ranks = [m.shape[1] for m in self.leaves]
        for j, level in enumerate(self.transfer):
            if len(level) != d >> (j + 1):
                raise ValueError(f"level {j} must hold {d >> (j + 1)} nodes")
            out_ranks = []
            for i, b in enumerate(level):
                if b.ndim != 3:
                    raise ValueError("transfer tensors must be 3-way")
                if b.shape[0] != child_ranks[2 * i] or b.shape[1] != child_ranks[2 * i + 1]:
                    raise ValueError(
                        f"node {i} at level {j} expects child ranks "
                        f"({child_ranks[2 * i]}, {child_ranks[2 * i + 1]}), got {b.shape[:2]}"
                    )
                out_ranks.append(b.shape[2])
            child_ranks = out_ranks
        if child_ranks != [1]:
            raise ValueError("root output size must be 1")

    @property
    def ndim(self) -> int:
        return len(self.leaves)

    @property
    def depth(self) -> int:
        return len(self.transfer)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(m.shape[0] for m in self.leaves)

    @property
    def node_ranks(self) -> tuple[int, ...]:
        """Output sizes of all non-root nodes: leaves first, then bottom-up."""
        ranks = [m.shape[1] for m in self.leaves]
        for level in self.transfer[:-1]:
            ranks.extend(b.shape[2] for b in level)
        return tuple(ranks)


def _check_index(shape, idx):
    idx = tuple(int(i) for i in idx)
    if len(idx) != len(shape):
        raise IndexError(f"index has {len(idx)} entries for a {len(shape)}-way tensor")
    for k, (i, n) in enumerate(zip(idx, shape)):
        if not 0 <= i < n:
            raise IndexError(f"index {i} out of range for mode {k + 1} of size {n}")
    return idx


def tt_entry(tt: TTTensor, idx) -> float:
    """Evaluate one entry as the chained product of core slices."""
    idx = _check_index(tt.shape, idx)
    vec = tt.cores[0][0, idx[0], :]
    for core, i in zip(tt.cores[1:], idx[1:]):
        vec = vec @ core[:, i, :]
    return float(vec[0])


def tt_to_dense(tt: TTTensor, cap: int = DENSE_CAP) -> np.ndarray:
    """Contract all cores into the dense tensor."""
    _check_cap(tt.shape, cap)
    out = tt.cores[0][0]  # (n_1, r_1)
    for core in tt.cores[1:]:
        r_prev, n_k, r_k = core.shape
        out = out @ core.reshape(r_prev, n_k * r_k)
        out = out.reshape(-1, r_k)
    return np.ascontiguousarray(out.reshape(tt.shape))


def tt_svd(x, max_ranks=None, rel_tol: float = 1e-12) -> TTTensor:
    """Tensor-train construction by sweeping singular value decompositions.

    Walks the modes left to right; at step k the remainder is reshaped to
    ``(r_{k-1} * n_k, rest)``, factorized, and singular values at or below
    ``rel_tol * sigma_max`` are dropped (additionally capped by
    ``max_ranks[k]`` when given).  With no cap and rel_tol at machine
    level the reconstruction is exact to ~1e-10 relative and the returned
    ranks equal the numerical ranks of the prefix matricizations.
    """
    x = as_dense(x)
    shape = x.shape
    d = x.ndim
    if max_ranks is not None:
        max_ranks = [int(r) for r in max_ranks]
        if len(max_ranks) != d - 1:
            raise ValueError(f"max_ranks needs {d - 1} entries, got {len(max_ranks)}")
        if any(r < 1 for r in max_ranks):
            raise ValueError("max_ranks entries must be positive")
    cores = []
    remainder = x.reshape(1, -1)
    r_prev = 1
    for k in range(d - 1):
        mat = remainder.reshape(r_prev * shape[k], -1)
        u, s, vt = jacobi_svd(mat)
        if s.size == 0 or s[0] == 0.0:
            rank = 1  # zero remainder: keep a zero core to preserve the chain
        else:
            rank = int(np.count_nonzero(s > rel_tol * s[0]))
            rank = max(rank, 1)
        if max_ranks is not None:
            rank = min(rank, max_ranks[k])
        cores.append(u[:, :rank].reshape(r_prev, shape[k], rank))
        remainder = s[:rank, None] * vt[:rank]
        r_prev = rank
    cores.append(remainder.reshape(r_prev, shape[-1], 1))
    return TTTensor(tuple(cores))


def tt_random(shape, ranks, seed) -> TTTensor:
    """TT tensor with i.i.d. standard Gaussian cores."""
    shape = tuple(int(n) for n in shape)
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != len(shape) - 1:
        raise ValueError(f"need {len(shape) - 1} ranks for {len(shape)} modes, got {len(ranks)}")
    if any(r < 1 for r in ranks):
        raise ValueError("ranks must be positive")
    rng = _as_generator(seed)
    bounds = (1, *ranks, 1)
    cores = tuple(
        rng.standard_normal((bounds[k], shape[k], bounds[k + 1]))
        for k in range(len(shape))
    )
    return TTTensor(cores)


def tt_delta_example(d: int, n: int, r: int) -> TTTensor:
    """The explicit Kronecker-delta chain whose paired-mode matricization
    is a 0/1 diagonal of full rank ``q**(d/2)`` with ``q = min(n, r)``.

    Cores alternate between ``(1, n, r)`` selectors ``delta(i, alpha)``
    on odd positions and ``(r, n, 1)`` selectors on even positions; the
    deltas vanish whenever an index exceeds the other range, so entries
    with any ``i_k >= q`` in a mismatched pair are zero.
    """
    d, n, r = int(d), int(n), int(r)
    if d < 2 or d % 2:
        raise ValueError(f"number of modes must be even and >= 2, got {d}")
    if n < 1 or r < 1:
        raise ValueError("mode size and rank must be positive")
    q = min(n, r)
    up = np.zeros((1, n, r))
    down = np.zeros((r, n, 1))
    for i in range(q):
        up[0, i, i] = 1.0
        down[i, i, 0] = 1.0
    cores = []
    for k in range(1, d + 1):
        cores.append(up.copy() if k % 2 else down.copy())
    return TTTensor(tuple(cores))


def tt_equal_cores_random(d: int, n: int, r: int, seed) -> TTTensor:
    """Gaussian TT tensor whose interior cores 2..d-1 are one shared core."""
    d, n, r = int(d), int(n), int(r)
    if d < 3:
        raise ValueError(f"equal-core construction needs d >= 3, got {d}")
    rng = _as_generator(seed)
    first = rng.standard_normal((1, n, r))
    middle = rng.standard_normal((r, n, r))
    last = rng.standard_normal((r, n, 1))
    cores = [first] + [middle] * (d - 2) + [last]
    return TTTensor(tuple(cores))


def cp_entry(cp: CPTensor, idx) -> float:
    idx = _check_index(cp.shape, idx)
    prod = np.ones(cp.rank)
    for factor, i in zip(cp.factors, idx):
        prod = prod * factor[i]
    return float(prod.sum())


def cp_to_dense(cp: CPTensor, cap: int = DENSE_CAP) -> np.ndarray:
    _check_cap(cp.shape, cap)
    out = cp.factors[0]  # (n_1, r)
    for factor in cp.factors[1:]:
        out = (out[:, None, :] * factor[None, :, :]).reshape(-1, cp.rank)
    return np.ascontiguousarray(out.sum(axis=1).reshape(cp.shape))


def cp_random(shape, r: int, seed) -> CPTensor:
    """CP tensor with i.i.d. standard Gaussian factors."""
    shape = tuple(int(n) for n in shape)
    r = int(r)
    if r < 1:
        raise ValueError("rank must be positive")
    rng = _as_generator(seed)
    return CPTensor(tuple(rng.standard_normal((n, r)) for n in shape))


def ht_node_leaf_sets(d: int) -> list[tuple[int, ...]]:
    """1-based leaf sets of all non-root tree nodes, leaves first then bottom-up.

    Matches the ordering of :attr:`HTTensor.node_ranks` and of the
    ``node_ranks`` argument accepted by :func:`ht_random`.
    """
    if d < 2 or d & (d - 1):
        raise ValueError(f"tree size must be a power of two >= 2, got {d}")
    sets = [(k,) for k in range(1, d + 1)]
    width = 2
    while width < d:
        for start in range(1, d + 1, width):
            sets.append(tuple(range(start, start + width)))
        width *= 2
    return sets


def _ht_ranks_per_level(d: int, node_ranks) -> list[list[int]]:
    """Normalize node_ranks (scalar or flat non-root list) to per-level lists."""
    depth = d.bit_length() - 1
    counts = [d >> j for j in range(depth)]  # leaves, then internal levels sans root
    if np.isscalar(node_ranks):
        return [[int(node_ranks)] * c for c in counts]
    flat = [int(r) for r in node_ranks]
    if len(flat) != sum(counts):
        raise ValueError(
            f"node_ranks must have {sum(counts)} entries "
            f"(leaves then bottom-up internal nodes, root excluded), got {len(flat)}"
        )
    levels, pos = [], 0
    for c in counts:
        levels.append(flat[pos : pos + c])
        pos += c
    return levels


def ht_random(shape, node_ranks, seed) -> HTTensor:
    """Hierarchical tensor with i.i.d. standard Gaussian leaves and transfers.

    ``node_ranks`` is a single int applied to every non-root node, or a
    flat list in :func:`ht_node_leaf_sets` order.
    """
    shape = tuple(int(n) for n in shape)
    d = len(shape)
    levels = _ht_ranks_per_level(d, node_ranks)
    if any(r < 1 for level in levels for r in level):
        raise ValueError("node ranks must be positive")
    rng = _as_generator(seed)
    leaves = tuple(rng.standard_normal((n, r)) for n, r in zip(shape, levels[0]))
    transfer = []
    child = levels[0]
    for j in range(1, len(levels) + 1):
        out = levels[j] if j < len(levels) else [1]
        transfer.append(
            tuple(
                rng.standard_normal((child[2 * i], child[2 * i + 1], out[i]))
                for i in range(len(out))
            )
        )
        child = out
    return HTTensor(leaves, tuple(transfer))


def ht_entry(ht: HTTensor, idx) -> float:
    idx = _check_index(ht.shape, idx)
    vecs = [leaf[i] for leaf, i in zip(ht.leaves, idx)]
    for level in ht.transfer:
        vecs = [
            np.einsum("a,b,abo->o", vecs[2 * i], vecs[2 * i + 1], b)
            for i, b in enumerate(level)
        ]
    return float(vecs[0][0])


def ht_to_dense(ht: HTTensor, cap: int = DENSE_CAP) -> np.ndarray:
    """Contract the tree bottom-up into the dense tensor."""
    _check_cap(ht.shape, cap)
    # Each partial result is (prod of covered mode sizes, r_out), flattened row-major.
    parts = list(ht.leaves)
    for level in ht.transfer:
        merged = []
        for i, b in enumerate(level):
            left, right = parts[2 * i], parts[2 * i + 1]
            combo = np.einsum("xa,yb,abo->xyo", left, right, b)
            merged.append(combo.reshape(left.shape[0] * right.shape[0], -1))
        parts = merged
    return np.ascontiguousarray(parts[0][:, 0].reshape(ht.shape))


def ranks_from_dense(x, which: str = "tt", rel_tol: float = DEFAULT_REL_TOL) -> np.ndarray:
    """Numerical ranks of the matricizations that define a format's ranks.

    ``which='tt'``: ranks of the prefix splits ``{1..k}`` for k = 1..d-1.
    ``which='ht'``: ranks of every non-root tree node's leaf-set split,
    in :func:`ht_node_leaf_sets` order (d must be a power of two).
    """
    x = as_dense(x)
    d = x.ndim
    if which == "tt":
        splits = [tuple(range(1, k + 1)) for k in range(1, d)]
    elif which == "ht":
        splits = ht_node_leaf_sets(d)
    else:
        raise ValueError(f"unknown rank family {which!r}; expected 'tt' or 'ht'")
    return np.array(
        [numerical_rank(matricize(x, AxisSplit.from_row_axes(d, s)), rel_tol) for s in splits],
        dtype=np.int64,
    )
