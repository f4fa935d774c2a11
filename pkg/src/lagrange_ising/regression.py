"""Least-squares regression compiled to an Ising instance.

Each weight is a signed-digit number ``w_j = sum_m s_{j,m} 2**m`` with spins
``s in {-1, +1}``, so a ``B``-digit weight ranges over the odd lattice
``{-(2**B - 1), ..., -1, 1, ..., 2**B - 1}`` scaled by ``2**(msb_power - B + 1)``.
Expanding ``||X w - y||**2`` over the digits gives couplings, a field and a
constant; the field is moved onto an ancilla spin so unmodified solvers apply.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionError, FormatError
from .ising import IsingInstance, absorb_field

TIKHONOV = 1e-12


@dataclass(frozen=True)
class RegressionProblem:
    X: np.ndarray
    y: np.ndarray
    bits: int = 2
    msb_power: Optional[int] = None

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=np.float64))
        y = np.asarray(self.y, dtype=np.float64).reshape(-1)
        if X.shape[0] != y.shape[0]:
            raise DimensionError(f"X has {X.shape[0]} rows but y has {y.shape[0]} entries")
        if X.shape[0] < 1 or X.shape[1] < 1:
            raise DimensionError("need at least one observation and one feature")
        if self.bits < 1:
            raise ValueError("bits must be >= 1")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if self.msb_power is None:
            object.__setattr__(self, "msb_power", self.bits - 1)

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def powers(self) -> list[int]:
        return list(range(self.msb_power, self.msb_power - self.bits, -1))


@dataclass(frozen=True)
class BitEncoding:
    """Spin ``k`` (after the ancilla, if any) carries digit ``2**power`` of weight ``weight``."""

    digits: tuple  # ((weight index, power), ...) in spin order
    d: int
    ancilla: bool = True

    @property
    def n_spins(self) -> int:
        return len(self.digits) + int(self.ancilla)


def encode(prob: RegressionProblem) -> BitEncoding:
    digits = tuple((j, m) for j in range(prob.d) for m in prob.powers)
    return BitEncoding(digits, prob.d, ancilla=True)


def build_regression_instance(prob: RegressionProblem) -> tuple[IsingInstance, BitEncoding]:
    """Ising instance whose energy (with ancilla ``+1``) equals ``||X w - y||**2``."""
    enc = encode(prob)
    Q = prob.X.T @ prob.X
    q = -2.0 * prob.X.T @ prob.y
    const = float(prob.y @ prob.y)
    j_idx = np.array([j for j, _ in enc.digits])
    scale = np.array([2.0**m for _, m in enc.digits])
    C = Q[np.ix_(j_idx, j_idx)] * np.outer(scale, scale)
    # Same-spin terms C_aa s_a^2 = C_aa are constants; IsingInstance folds the diagonal into offset.
    h = q[j_idx] * scale
    inst = IsingInstance(C, h, const, name="regression")
    if inst.has_field:
        return absorb_field(inst), enc
    # y orthogonal to every column: keep the ancilla for a uniform spin layout.
    J = np.zeros((inst.n + 1, inst.n + 1))
    J[1:, 1:] = inst.J
    return IsingInstance(J, None, inst.offset, inst.name), enc


def decode_weights(enc: BitEncoding, s) -> np.ndarray:
    """``w_j = sum_m s_{j,m} 2**m`` after gauge-fixing the ancilla to ``+1``."""
    s = np.asarray(s, dtype=np.int64).reshape(-1)
    if s.shape[0] < enc.n_spins:
        raise DimensionError(f"need {enc.n_spins} spins, got {s.shape[0]}")
    if enc.ancilla:
        if s[0] < 0:
            s = -s
        s = s[1:]
    w = np.zeros(enc.d)
    for (j, m), sk in zip(enc.digits, s):
        w[j] += sk * 2.0**m
    return w


def encode_weights(enc: BitEncoding, w) -> np.ndarray:
    """Spin configuration (ancilla ``+1``) representing lattice weights ``w``."""
    w = np.asarray(w, dtype=np.float64)
    spins = [1] if enc.ancilla else []
    rest = w.copy()
    for j, m in enc.digits:
        bit = 1 if rest[j] > 0 else -1
        spins.append(bit)
        rest[j] -= bit * 2.0**m
    if np.any(rest != 0):
        raise ValueError(f"weights {w.tolist()} are not on the signed-digit lattice")
    return np.array(spins, dtype=np.int8)


def lattice(prob: RegressionProblem) -> np.ndarray:
    """Every decodable weight vector, shape ``(2**(d*B), d)``."""
    per = sorted({sum(b * 2.0**m for b, m in zip(bits, prob.powers))
                  for bits in itertools.product((-1, 1), repeat=prob.bits)})
    return np.array(list(itertools.product(per, repeat=prob.d)))


def residual(prob: RegressionProblem, w) -> float:
    r = prob.X @ np.asarray(w, dtype=np.float64) - prob.y
    return float(r @ r)


def least_squares_oracle(prob: RegressionProblem) -> tuple[np.ndarray, float]:
    """Normal equations by Cholesky, with ``1e-12`` ridge fallback on singular ``X'X``."""
    Q = prob.X.T @ prob.X
    b = prob.X.T @ prob.y
    try:
        L = np.linalg.cholesky(Q)
    except np.linalg.LinAlgError:
        L = np.linalg.cholesky(Q + TIKHONOV * np.eye(prob.d))
    w = np.linalg.solve(L.T, np.linalg.solve(L, b))
    return w, residual(prob, w)


def read_csv(text: str) -> tuple[np.ndarray, np.ndarray]:
    """Rows are observations; the last column is ``y``. A non-numeric first row is a header."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise FormatError("empty CSV")

    def numeric(row):
        try:
            return [float(c) for c in row]
        except ValueError:
            return None

    if numeric(rows[0]) is None:
        rows = rows[1:]
    data = []
    for k, row in enumerate(rows, 1):
        vals = numeric(row)
        if vals is None:
            raise FormatError(f"row {k}: non-numeric entry")
        data.append(vals)
    if not data:
        raise FormatError("CSV has no data rows")
    width = {len(r) for r in data}
    if len(width) != 1:
        raise FormatError("rows have differing numbers of columns")
    if width.pop() < 2:
        raise FormatError("need at least one feature column and the y column")
    arr = np.array(data)
    return arr[:, :-1], arr[:, -1]
