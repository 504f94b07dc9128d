"""Lattice environment and last-passage dynamic programming.

Site weights are never stored. Each weight is rebuilt from a keyed hash of
(seed, i, j), so weights at different scales n and under different fields
share one Exp(1) realisation:

    tau(i, j) = -log(U(seed, i, j)) / c(i / n, j / n),   U in (0, 1].

The recursion G(i, j) = tau(i, j) + max(G(i-1, j), G(i, j-1)) is evaluated
row by row (j outer, i inner) inside numba kernels. Every cell does one
compare and one add, so the result does not depend on how rows are blocked.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numba
import numpy as np

from .errors import DomainError, MemoryBudgetError, OutputError
from .speed_field import SpeedField, as_field

DEFAULT_MAX_CELLS = 64_000_000
_RATE_BLOCK = 256

# direction codes stored while recording paths
_FROM_NONE = np.uint8(0)
_FROM_LEFT = np.uint8(1)  # predecessor (i-1, j)
_FROM_DOWN = np.uint8(2)  # predecessor (i, j-1)

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_INV53 = 2.0**-53
_U64 = 1 << 64


@numba.njit(inline="always", cache=True)
def _mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@numba.njit(inline="always", cache=True)
def _exp1(seed, i, j):
    h = _mix(seed ^ _GOLDEN)
    h = _mix(h + np.uint64(i) * _GOLDEN)
    h = _mix(h + np.uint64(j) * _GOLDEN)
    u = np.float64((h >> _S11) + _ONE) * _INV53
    return -math.log(u)


@numba.njit(cache=True, nogil=True)
def _exp1_row(seed, i0, i1, j):
    out = np.empty(i1 - i0 + 1)
    for k in range(i1 - i0 + 1):
        out[k] = _exp1(seed, i0 + k, j)
    return out


@numba.njit(cache=True, nogil=True)
def _dp_rows(seed, i0, j_first, first_global_row, rates, prev, dirs, record):
    """Advance the DP through ``rates.shape[0]`` rows starting at row j_first.

    ``prev`` holds the row below j_first (ignored when j_first is the first
    row of the rectangle, signalled by first_global_row). Returns the last row.
    When ``record`` is set, dirs[r, k] receives the predecessor code.
    """
    nrows, width = rates.shape
    cur = np.empty(width)
    for r in range(nrows):
        j = j_first + r
        for k in range(width):
            tau = _exp1(seed, i0 + k, j) / rates[r, k]
            has_left = k > 0
            has_down = not (first_global_row and r == 0)
            if has_left and has_down:
                left = cur[k - 1]
                down = prev[k]
                if left >= down:
                    cur[k] = tau + left
                    code = 1
                else:
                    cur[k] = tau + down
                    code = 2
            elif has_left:
                cur[k] = tau + cur[k - 1]
                code = 1
            elif has_down:
                cur[k] = tau + prev[k]
                code = 2
            else:
                cur[k] = tau
                code = 0
            if record:
                dirs[r, k] = code
        prev = cur.copy()
    return prev


@numba.njit(cache=True, nogil=True)
def _backtrack(dirs, k, r, i0, j0_block, out, pos):
    """Walk predecessors inside one block; returns (k, r, pos, done)."""
    while True:
        out[pos, 0] = i0 + k
        out[pos, 1] = j0_block + r
        pos -= 1
        code = dirs[r, k]
        if code == 1:
            k -= 1
        elif code == 2:
            if r == 0:
                return k, -1, pos, False
            r -= 1
        else:
            return k, r, pos, True


def splitmix_uniform(seed: int, i: int, j: int) -> float:
    """Pure-Python reference for the uniform draw U(seed, i, j) in (0, 1]."""
    mask = _U64 - 1

    def mix(z):
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
        return z ^ (z >> 31)

    g = 0x9E3779B97F4A7C15
    h = mix((seed & mask) ^ g)
    h = mix((h + i * g) & mask)
    h = mix((h + j * g) & mask)
    return float((h >> 11) + 1) * _INV53


@dataclass(frozen=True)
class EnvironmentSpec:
    field: SpeedField
    n: int
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "field", as_field(self.field))
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"scale n must be a positive integer, got {self.n}")
        if not 0 <= int(self.seed) < _U64:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def _seed64(self):
        return np.uint64(self.seed)

    def rate_block(self, i0: int, i1: int, j0: int, j1: int) -> np.ndarray:
        """c(i/n, j/n) for rows j0..j1 and columns i0..i1."""
        n = self.n
        xs = np.arange(i0, i1 + 1, dtype=float) / n
        ys = np.arange(j0, j1 + 1, dtype=float) / n
        return np.ascontiguousarray(self.field.rates(xs[None, :], ys[:, None]), dtype=float)


@dataclass(frozen=True)
class PassageResult:
    value: float
    start: tuple[int, int]
    target: tuple[int, int]
    path: Optional[np.ndarray] = None  # (m, 2) int64 lattice points, start first


def _lattice_point(p) -> tuple[int, int]:
    i, j = p
    if int(i) != i or int(j) != j:
        raise DomainError(f"lattice point must have integer coordinates, got {p}")
    return int(i), int(j)


def _check_rectangle(env: EnvironmentSpec, start, target):
    start, target = _lattice_point(start), _lattice_point(target)
    if start[0] < 0 or start[1] < 0:
        raise DomainError(f"start {start} has a negative coordinate")
    if start[0] > target[0] or start[1] > target[1]:
        raise DomainError(f"start {start} is not <= target {target} coordinatewise")
    x0, y0, x1, y1 = env.field.bbox
    n = env.n
    for i, j in (start, target):
        if not (x0 * n - 1e-9 <= i <= x1 * n + 1e-9 and y0 * n - 1e-9 <= j <= y1 * n + 1e-9):
            raise DomainError(f"lattice point ({i}, {j}) at n={n} lies outside field bbox {env.field.bbox}")
    return start, target


def weight(env: EnvironmentSpec, i: int, j: int) -> float:
    """tau(i, j) = -log U(seed, i, j) / c(i/n, j/n)."""
    i, j = _lattice_point((i, j))
    if i < 0 or j < 0:
        raise DomainError(f"lattice point ({i}, {j}) has a negative coordinate")
    rate = env.field.evaluate(i / env.n, j / env.n)
    return float(_exp1_row(env._seed64, i, i, j)[0] / rate)


def exp1_draws(seed: int, i0: int, i1: int, j: int) -> np.ndarray:
    """The Exp(1) draws for sites (i0..i1, j); independent of n and of the field."""
    return _exp1_row(np.uint64(seed), int(i0), int(i1), int(j))


def _sweep(env, start, target, first_row, last_row, prev, dirs=None):
    i0, i1 = start[0], target[0]
    width = i1 - i0 + 1
    record = dirs is not None
    row = 0
    j = first_row
    if prev is None:
        prev = np.zeros(width)
    while j <= last_row:
        j_end = min(j + _RATE_BLOCK - 1, last_row)
        rates = env.rate_block(i0, i1, j, j_end)
        d = dirs[row:row + (j_end - j + 1)] if record else np.empty((0, 0), dtype=np.uint8)
        prev = _dp_rows(env._seed64, i0, j, j == start[1], rates, prev, d, record)
        row += j_end - j + 1
        j = j_end + 1
    return prev


def last_passage(
    env: EnvironmentSpec,
    start=(0, 0),
    target=(0, 0),
    want_path: bool = False,
    max_cells: int = DEFAULT_MAX_CELLS,
) -> PassageResult:
    """Maximal summed weight over up-right lattice paths from start to target.

    Both endpoints' weights are included. When ``want_path`` is set, the
    argmax path is backtracked with ties going to the horizontal predecessor.
    """
    start, target = _check_rectangle(env, start, target)
    width = target[0] - start[0] + 1
    height = target[1] - start[1] + 1
    if not want_path:
        last = _sweep(env, start, target, start[1], target[1], None)
        return PassageResult(float(last[-1]), start, target)
    if width * height > max_cells:
        raise MemoryBudgetError(
            f"path storage needs {width * height} cells > budget {max_cells}; use last_passage_checkpointed"
        )
    dirs = np.empty((height, width), dtype=np.uint8)
    last = _sweep(env, start, target, start[1], target[1], None, dirs)
    path = np.empty((width + height - 1, 2), dtype=np.int64)
    k, r, pos, done = _backtrack(dirs, width - 1, height - 1, start[0], start[1], path, width + height - 2)
    assert done and pos == -1
    return PassageResult(float(last[-1]), start, target, path)


def last_passage_checkpointed(
    env: EnvironmentSpec,
    start=(0, 0),
    target=(0, 0),
    block_rows: int = 256,
) -> PassageResult:
    """Same value and path as :func:`last_passage`, storing only row checkpoints.

    A forward sweep keeps the DP row just below each block of ``block_rows``
    rows. Backtracking then recomputes one block at a time (top block first)
    to recover its direction bits.
    """
    start, target = _check_rectangle(env, start, target)
    block_rows = int(block_rows)
    if block_rows < 1:
        raise DomainError(f"block_rows must be >= 1, got {block_rows}")
    width = target[0] - start[0] + 1
    height = target[1] - start[1] + 1
    starts = list(range(start[1], target[1] + 1, block_rows))
    checkpoints: list[Optional[np.ndarray]] = [None]
    prev = None
    for b, j in enumerate(starts):
        j_end = min(j + block_rows - 1, target[1])
        prev = _sweep(env, start, target, j, j_end, prev)
        if b + 1 < len(starts):
            checkpoints.append(prev)
    value = float(prev[-1])

    path = np.empty((width + height - 1, 2), dtype=np.int64)
    pos = width + height - 2
    k = width - 1
    for b in range(len(starts) - 1, -1, -1):
        j = starts[b]
        j_end = min(j + block_rows - 1, target[1])
        dirs = np.empty((j_end - j + 1, width), dtype=np.uint8)
        _sweep(env, start, target, j, j_end, checkpoints[b], dirs)
        k, r, pos, done = _backtrack(dirs, k, j_end - j, start[0], j, path, pos)
        if done:
            break
    assert pos == -1
    return PassageResult(value, start, target, path)


def scaled_lattice_target(n: int, x: float, y: float) -> tuple[int, int]:
    """(floor(n x), floor(n y)), with a 1e-9 guard against representation error."""
    if x < 0 or y < 0 or not (math.isfinite(x) and math.isfinite(y)):
        raise DomainError(f"macroscopic target must be finite and >= 0, got ({x}, {y})")
    return int(math.floor(n * x + 1e-9)), int(math.floor(n * y + 1e-9))


def scaled_passage(env: EnvironmentSpec, x: float, y: float) -> float:
    """n^-1 G((0, 0) -> (floor(nx), floor(ny)))."""
    target = scaled_lattice_target(env.n, x, y)
    return last_passage(env, (0, 0), target).value / env.n


def path_is_valid(res: PassageResult, env: Optional[EnvironmentSpec] = None, rtol: float = 1e-9) -> bool:
    """Check endpoints, unit up/right steps and (given env) the weight sum."""
    p = res.path
    if p is None or len(p) == 0:
        return False
    if tuple(p[0]) != tuple(res.start) or tuple(p[-1]) != tuple(res.target):
        return False
    steps = np.diff(p, axis=0)
    if len(steps) and not np.all((steps.sum(axis=1) == 1) & (steps.min(axis=1) == 0)):
        return False
    if env is not None:
        total = sum(weight(env, int(i), int(j)) for i, j in p)
        if abs(total - res.value) > rtol * max(abs(res.value), 1e-300):
            return False
    return True


# -- debug row dumps ----------------------------------------------------------
# Layout: little-endian uint64 row index, uint64 count, then count float64.


def dump_row(path, row_index: int, values) -> None:
    values = np.asarray(values, dtype="<f8")
    try:
        with open(path, "wb") as fh:
            fh.write(struct.pack("<QQ", int(row_index), values.size))
            fh.write(values.tobytes())
    except OSError as exc:
        raise OutputError(f"cannot write row dump {path}: {exc}") from exc


def load_row(path) -> tuple[int, np.ndarray]:
    data = Path(path).read_bytes()
    row_index, count = struct.unpack_from("<QQ", data, 0)
    values = np.frombuffer(data, dtype="<f8", count=count, offset=16)
    return int(row_index), values.astype(float)


def passage_row(env: EnvironmentSpec, start, target) -> np.ndarray:
    """The final DP row G(start -> (i, target_j)) for i in start_i..target_i."""
    start, target = _check_rectangle(env, start, target)
    return _sweep(env, start, target, start[1], target[1], None).copy()
