"""Ising problem representation, energies, Gset I/O and the exhaustive oracle.

Energies use the full double sum ``E(s) = sum_{i,j} J_ij s_i s_j + h.s + offset``
so every edge is counted twice; edge quantities (``edge_sum``, cuts) use the
``i < j`` half.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DimensionError, FieldError, FormatError, SizeGuardError, UnsupportedError

BRUTE_FORCE_MAX_N = 24
_CHUNK_BITS = 14


class IsingInstance:
    """Symmetric, zero-diagonal coupling matrix plus optional field and offset.

    Instances are immutable: the arrays are copied and flagged read-only.
    Any diagonal entries passed in are folded into ``offset`` (``s_i**2 == 1``),
    so the energy of every configuration is preserved. An all-zero field is
    stored as ``None``.
    """

    __slots__ = ("_J", "_h", "_offset", "_name")

    def __init__(self, J, h=None, offset: float = 0.0, name: str = ""):
        J = np.array(J, dtype=np.float64)
        if J.ndim != 2 or J.shape[0] != J.shape[1] or J.shape[0] < 1:
            raise DimensionError(f"J must be a non-empty square matrix, got shape {J.shape}")
        if not np.all(np.isfinite(J)):
            raise ValueError("J has non-finite entries")
        if not np.array_equal(J, J.T):
            raise ValueError("J must be symmetric")
        diag = np.diag(J).copy()
        offset = float(offset) + float(diag.sum())
        np.fill_diagonal(J, 0.0)
        if h is not None:
            h = np.array(h, dtype=np.float64).reshape(-1)
            if h.shape[0] != J.shape[0]:
                raise DimensionError(f"h has length {h.shape[0]}, expected {J.shape[0]}")
            if not np.any(h):
                h = None
            else:
                h.flags.writeable = False
        J.flags.writeable = False
        self._J = J
        self._h = h
        self._offset = offset
        self._name = str(name)

    @property
    def J(self) -> np.ndarray:
        return self._J

    @property
    def h(self) -> Optional[np.ndarray]:
        return self._h

    @property
    def offset(self) -> float:
        return self._offset

    @property
    def name(self) -> str:
        return self._name

    @property
    def n(self) -> int:
        return self._J.shape[0]

    @property
    def has_field(self) -> bool:
        return self._h is not None

    def edges(self) -> list[tuple[int, int, float]]:
        """Nonzero couplings as ``(i, j, w)`` with ``i < j``, row-major order."""
        iu, ju = np.nonzero(np.triu(self._J, 1))
        return [(int(i), int(j), float(self._J[i, j])) for i, j in zip(iu, ju)]

    @property
    def total_weight(self) -> float:
        """``W = sum_{i<j} J_ij``."""
        return float(np.triu(self._J, 1).sum())

    def with_name(self, name: str) -> "IsingInstance":
        return IsingInstance(self._J, self._h, self._offset, name)

    def __eq__(self, other):
        if not isinstance(other, IsingInstance):
            return NotImplemented
        if (self._h is None) != (other._h is None):
            return False
        return (
            self._name == other._name
            and self._offset == other._offset
            and np.array_equal(self._J, other._J)
            and (self._h is None or np.array_equal(self._h, other._h))
        )

    def __hash__(self):
        return hash((self._name, self.n, self._offset, self._J.tobytes()))

    def __repr__(self):
        field = "" if self._h is None else ", field"
        return f"IsingInstance(name={self._name!r}, n={self.n}, edges={len(self.edges())}{field})"


@dataclass(frozen=True)
class EnergyReport:
    energy: float
    edge_sum: float
    cut: Optional[float]
    offset_included: bool = True


def as_spins(s, n: Optional[int] = None) -> np.ndarray:
    """Validate a ``{-1, +1}`` vector and return it as an int8 array."""
    arr = np.asarray(s)
    if arr.ndim != 1:
        raise DimensionError(f"spin configuration must be 1-D, got shape {arr.shape}")
    if not np.all((arr == 1) | (arr == -1)):
        raise ValueError("spin entries must be exactly -1 or +1")
    if n is not None and arr.shape[0] != n:
        raise DimensionError(f"spin configuration has length {arr.shape[0]}, expected {n}")
    return arr.astype(np.int8)


def energy(inst: IsingInstance, s) -> EnergyReport:
    s = as_spins(s, inst.n).astype(np.float64)
    quad = float(s @ inst.J @ s)
    edge_sum = quad / 2.0
    e = quad + inst.offset
    if inst.h is not None:
        e += float(inst.h @ s)
        cut = None
    else:
        cut = (inst.total_weight - edge_sum) / 2.0
    return EnergyReport(energy=e, edge_sum=edge_sum, cut=cut)


def cut_value(inst: IsingInstance, s) -> float:
    """Max-Cut value ``sum_{i<j} J_ij (1 - s_i s_j) / 2`` of a field-free instance."""
    if inst.h is not None:
        raise UnsupportedError("cut value is undefined for instances with a field")
    s = as_spins(s, inst.n).astype(np.float64)
    upper = np.triu(inst.J, 1)
    return float(np.sum(upper * (1.0 - np.outer(s, s))) / 2.0)


def absorb_field(inst: IsingInstance) -> IsingInstance:
    """Trade the linear field for couplings to an ancilla spin at index 0.

    For any configuration with ancilla ``+1`` the energy is unchanged; the
    result is invariant under a global flip, so the ancilla can be gauge-fixed
    after solving.
    """
    if inst.h is None:
        raise FieldError("instance has no field to absorb")
    n = inst.n
    J = np.zeros((n + 1, n + 1))
    J[1:, 1:] = inst.J
    J[0, 1:] = J[1:, 0] = inst.h / 2.0
    return IsingInstance(J, None, inst.offset, inst.name)


def _spin_block(start: int, count: int, n: int) -> np.ndarray:
    # Row k holds configuration index start+k; spin 0 is the most significant bit, bit 0 -> -1.
    idx = np.arange(start, start + count, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    bits = (idx[:, None] >> shifts[None, :]) & 1
    return (2 * bits - 1).astype(np.float64)


def brute_force_ground(inst: IsingInstance) -> tuple[np.ndarray, float]:
    """Exhaustive minimum over all ``2**n`` configurations.

    Ties go to the lexicographically smallest configuration with ``-1 < +1``.
    Field-free instances enumerate only the half with ``s_0 = -1``, which holds
    the lexicographically smaller member of every flip pair.
    """
    n = inst.n
    if n > BRUTE_FORCE_MAX_N:
        raise SizeGuardError(f"brute force limited to n <= {BRUTE_FORCE_MAX_N}, got n={n}")
    total = 1 << (n - 1) if inst.h is None else 1 << n
    chunk = 1 << _CHUNK_BITS
    best_e = np.inf
    best_idx = 0
    for start in range(0, total, chunk):
        count = min(chunk, total - start)
        S = _spin_block(start, count, n)
        E = np.einsum("ki,ki->k", S @ inst.J, S)
        if inst.h is not None:
            E += S @ inst.h
        k = int(np.argmin(E))
        if E[k] < best_e:
            best_e = float(E[k])
            best_idx = start + k
    s = _spin_block(best_idx, 1, n)[0].astype(np.int8)
    return s, best_e + inst.offset


def round_to_spins(state, phase: bool = False) -> np.ndarray:
    """Sign readout; zero rounds to ``+1``.

    Complex states use the real part. With ``phase=True`` the state is a
    vector of angles and the sign of ``cos(phi)`` is taken.
    """
    x = np.asarray(state)
    if phase:
        x = np.cos(np.real(x))
    elif np.iscomplexobj(x):
        x = x.real
    return np.where(x < 0, -1, 1).astype(np.int8)


def random_instance(
    n: int,
    density: float,
    weights: Sequence[float] = (-1.0, 1.0),
    seed: int = 0,
    name: str = "",
) -> IsingInstance:
    """Erdos-Renyi couplings with weights drawn uniformly from a finite set."""
    if not 0.0 <= density <= 1.0:
        raise ValueError(f"density must lie in [0, 1], got {density}")
    weights = np.asarray(list(weights), dtype=np.float64)
    if weights.size == 0:
        raise ValueError("weight set must be nonempty")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, 1)
    present = rng.random(iu.size) < density
    w = rng.choice(weights, size=iu.size)
    J = np.zeros((n, n))
    J[iu, ju] = np.where(present, w, 0.0)
    J = J + J.T
    return IsingInstance(J, name=name or f"random-n{n}-d{density:g}-s{seed}")


# ---------------------------------------------------------------- Gset I/O


def _number(tok: str, lineno: int) -> float:
    try:
        return float(int(tok))
    except ValueError:
        try:
            return float(tok)
        except ValueError:
            raise FormatError(f"line {lineno}: cannot parse number {tok!r}") from None


def parse_gset(text: str, name: str = "") -> IsingInstance:
    """Parse Gset text: a header ``n m`` then ``m`` lines ``u v w`` (1-based).

    Blank lines and ``#`` comments are ignored. Self-loops, duplicate edges,
    out-of-range indices and an edge count different from ``m`` are errors.
    """
    lines = [
        (k, ln.split())
        for k, ln in enumerate(text.splitlines(), 1)
        if ln.strip() and not ln.lstrip().startswith("#")
    ]
    if not lines:
        raise FormatError("empty Gset document")
    lineno, head = lines[0]
    if len(head) != 2:
        raise FormatError(f"line {lineno}: header must be 'n m'")
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError:
        raise FormatError(f"line {lineno}: header must hold two integers") from None
    if n < 1 or m < 0:
        raise FormatError(f"line {lineno}: invalid header n={n} m={m}")
    body = lines[1:]
    if len(body) != m:
        raise FormatError(f"header declares {m} edges but {len(body)} edge lines follow")
    J = np.zeros((n, n))
    seen = set()
    for lineno, tok in body:
        if len(tok) != 3:
            raise FormatError(f"line {lineno}: expected 'u v w'")
        try:
            u, v = int(tok[0]), int(tok[1])
        except ValueError:
            raise FormatError(f"line {lineno}: vertex indices must be integers") from None
        w = _number(tok[2], lineno)
        if not (1 <= u <= n and 1 <= v <= n):
            raise FormatError(f"line {lineno}: vertex index out of range 1..{n}")
        if u == v:
            raise FormatError(f"line {lineno}: self-loop on vertex {u}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise FormatError(f"line {lineno}: duplicate edge ({u}, {v})")
        seen.add(key)
        J[u - 1, v - 1] = J[v - 1, u - 1] = w
    return IsingInstance(J, name=name)


def _fmt_weight(w: float) -> str:
    return str(int(w)) if float(w).is_integer() else repr(float(w))


def to_gset(inst: IsingInstance) -> str:
    if inst.h is not None or inst.offset != 0.0:
        raise UnsupportedError("Gset cannot carry a field or an energy offset")
    edges = inst.edges()
    out = [f"{inst.n} {len(edges)}"]
    out.extend(f"{i + 1} {j + 1} {_fmt_weight(w)}" for i, j, w in edges)
    return "\n".join(out) + "\n"


def to_json_dict(inst: IsingInstance) -> dict:
    d = {
        "name": inst.name,
        "n": inst.n,
        "edges": [[i, j, w] for i, j, w in inst.edges()],
        "offset": inst.offset,
    }
    if inst.h is not None:
        d["h"] = inst.h.tolist()
    return d


def from_json_dict(d: dict) -> IsingInstance:
    try:
        n = int(d["n"])
        J = np.zeros((n, n))
        for i, j, w in d["edges"]:
            i, j = int(i), int(j)
            if not (0 <= i < j < n):
                raise FormatError(f"edge ({i}, {j}) must satisfy 0 <= i < j < n")
            J[i, j] = J[j, i] = float(w)
        return IsingInstance(J, d.get("h"), float(d.get("offset", 0.0)), d.get("name", ""))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"invalid instance JSON: {exc}") from exc


def load_instance(path) -> IsingInstance:
    """Read a ``.json`` instance or a Gset text file."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json":
        try:
            return from_json_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: {exc}") from exc
    return parse_gset(text, name=path.stem)


def save_instance(inst: IsingInstance, path) -> None:
    path = Path(path)
    if path.suffix.lower() == ".json":
        path.write_text(json.dumps(to_json_dict(inst), indent=1) + "\n")
    else:
        path.write_text(to_gset(inst))


def all_configs(n: int) -> Iterable[np.ndarray]:
    """All ``2**n`` configurations in lexicographic order (``-1 < +1``)."""
    block = _spin_block(0, 1 << n, n).astype(np.int8)
    return iter(block)
