"""Domain primitives for non-adaptive pooled (group) testing.

A population of n elements is screened by m pooled tests.  Pool membership is
a binary m-by-n matrix: entry (i, l) is 1 when element l contributes to test
i.  With defectivity vector x, the noiseless outcome of test i is the OR of
the x bits in its pool (the "syndrome").  Observed outcomes may additionally
pass through a memoryless noisy channel, binary symmetric by default.

Everything in this module is immutable and shared by the trellis, inference,
oracle, and simulation layers.
"""

from __future__ import annotations

import dataclasses
import math
from functools import cached_property
from typing import Callable

import numpy as np

#: Hard ceiling on the number of tests accepted by trellis-based code paths.
#: State spaces grow like 2**m; beyond this we refuse rather than thrash.
MAX_TESTS = 24


class NotASyndromeError(ValueError):
    """Observed outcome vector lies outside the OR-channel image of the matrix."""


class SizeLimitError(ValueError):
    """A construction or enumeration would exceed its configured resource guard."""


class MatrixFormatError(ValueError):
    """Matrix text does not follow the ``m n`` header plus 0/1 rows layout."""


def as_bit_vector(bits, length=None, name="vector"):
    """Validate and return a 1-D uint8 array of 0/1 entries.

    Raises ValueError on wrong dimensionality, non-binary entries, or (when
    `length` is given) wrong size.
    """
    arr = np.asarray(bits)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.dtype == bool:
        arr = arr.astype(np.uint8)
    if not np.issubdtype(arr.dtype, np.integer):
        raise ValueError(f"{name} must hold integer 0/1 entries, got dtype {arr.dtype}")
    if arr.size and (arr.min() < 0 or arr.max() > 1):
        raise ValueError(f"{name} entries must be 0 or 1")
    if length is not None and arr.size != length:
        raise ValueError(f"{name} must have length {length}, got {arr.size}")
    return arr.astype(np.uint8)


@dataclasses.dataclass(frozen=True, eq=False)
class TestMatrix:
    """Binary pool-assignment matrix; rows are tests, columns are elements."""

    __test__ = False  # not a test case, despite the domain name

    entries: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.entries)
        if arr.ndim != 2:
            raise ValueError(f"matrix must be two-dimensional, got shape {arr.shape}")
        m, n = arr.shape
        if m < 1 or n < 1:
            raise ValueError(f"matrix must have at least one row and one column, got {m}x{n}")
        if arr.dtype == bool:
            arr = arr.astype(np.uint8)
        if not np.issubdtype(arr.dtype, np.integer):
            raise ValueError(f"matrix entries must be integers, got dtype {arr.dtype}")
        if arr.min() < 0 or arr.max() > 1:
            raise ValueError("matrix entries must be 0 or 1")
        arr = np.ascontiguousarray(arr, dtype=np.uint8)
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def m(self):
        """Number of tests (rows)."""
        return self.entries.shape[0]

    @property
    def n(self):
        """Number of elements (columns)."""
        return self.entries.shape[1]

    def column(self, ell):
        """Pool-membership column of element `ell` as a uint8 vector."""
        return self.entries[:, ell]

    def row(self, i):
        """Membership row of test `i` as a uint8 vector."""
        return self.entries[i, :]

    @cached_property
    def column_masks(self):
        """Columns packed as integers, bit i set when the element joins test i."""
        if self.m > 63:
            raise SizeLimitError(f"cannot pack {self.m} test bits into int64 masks")
        weights = (np.int64(1) << np.arange(self.m, dtype=np.int64))
        return self.entries.T.astype(np.int64) @ weights


@dataclasses.dataclass(frozen=True)
class Prior:
    """I.i.d. Bernoulli prior: each element is defective with probability delta."""

    delta: float

    def __post_init__(self):
        if not (0.0 < self.delta < 1.0):
            raise ValueError(f"prevalence must lie strictly inside (0, 1), got {self.delta}")


def compute_syndrome(matrix, x):
    """Noiseless OR-channel outcome of defectivity vector `x` under `matrix`.

    Test i fires iff its pool contains at least one defective element.
    """
    xv = as_bit_vector(x, matrix.n, "defectivity vector")
    hits = matrix.entries.astype(np.int64) @ xv.astype(np.int64)
    return (hits > 0).astype(np.uint8)


def bits_to_index(bits):
    """Pack a binary vector into an integer, entry i contributing 2**i."""
    arr = as_bit_vector(bits, None, "bit vector")
    if arr.size > 63:
        raise SizeLimitError(f"cannot pack {arr.size} bits into an int64 index")
    weights = (np.int64(1) << np.arange(arr.size, dtype=np.int64))
    return int(arr.astype(np.int64) @ weights)


def index_to_bits(index, m):
    """Inverse of bits_to_index: unpack `index` into an m-entry 0/1 vector."""
    if m < 0 or m > 63:
        raise SizeLimitError(f"bit count must lie in [0, 63], got {m}")
    index = int(index)
    if index < 0 or index >> m:
        raise ValueError(f"index {index} does not fit in {m} bits")
    return ((index >> np.arange(m, dtype=np.int64)) & 1).astype(np.uint8)


def _pack_rows(rows, m):
    """Pack a (K, m) binary array row-wise into int64 indices."""
    arr = np.asarray(rows)
    if arr.ndim != 2 or arr.shape[1] != m:
        raise ValueError(f"expected a (K, {m}) array of outcomes, got shape {arr.shape}")
    weights = (np.int64(1) << np.arange(m, dtype=np.int64))
    return arr.astype(np.int64) @ weights


def bsc_likelihood(t, s, epsilon):
    """Probability of observing `t` when `s` crosses a binary symmetric channel.

    Each bit flips independently with probability `epsilon`; the result is
    epsilon**d * (1-epsilon)**(m-d) with d the Hamming distance.  epsilon = 0
    degenerates to the 0/1 indicator of equality.
    """
    if not (0.0 <= epsilon < 0.5):
        raise ValueError(f"crossover probability must lie in [0, 0.5), got {epsilon}")
    tv = as_bit_vector(t, None, "observed vector")
    sv = as_bit_vector(s, tv.size, "syndrome vector")
    d = int(np.count_nonzero(tv != sv))
    return epsilon**d * (1.0 - epsilon) ** (tv.size - d)


class NoiseModel:
    """Observation channel between the noiseless syndrome and the test outcome.

    Subclasses supply the likelihood Q(t | s) of observing outcome `t` given
    syndrome `s`, both as a scalar and batched over packed syndrome indices.
    """

    def likelihood(self, t, s):
        """Scalar Q(t | s) for bit vectors t and s."""
        raise NotImplementedError

    def likelihood_packed(self, t, state_indices, m):
        """Vector of Q(t | s) over syndromes given as packed integer states."""
        raise NotImplementedError

    def likelihood_table(self, outcomes, state_indices, m):
        """Matrix of Q(t_k | s_j): rows follow `state_indices`, columns `outcomes`.

        `outcomes` is a (K, m) binary array.  The default implementation loops
        over outcome rows; structured channels override it with vector code.
        """
        rows = np.asarray(outcomes)
        return np.stack(
            [self.likelihood_packed(rows[k], state_indices, m) for k in range(rows.shape[0])],
            axis=1,
        )


@dataclasses.dataclass(frozen=True)
class Noiseless(NoiseModel):
    """Identity channel: the outcome equals the syndrome."""

    def likelihood(self, t, s):
        tv = as_bit_vector(t, None, "observed vector")
        sv = as_bit_vector(s, tv.size, "syndrome vector")
        return 1.0 if np.array_equal(tv, sv) else 0.0

    def likelihood_packed(self, t, state_indices, m):
        target = bits_to_index(as_bit_vector(t, m, "observed vector"))
        states = np.asarray(state_indices, dtype=np.int64)
        return (states == target).astype(np.float64)

    def likelihood_table(self, outcomes, state_indices, m):
        targets = _pack_rows(outcomes, m)
        states = np.asarray(state_indices, dtype=np.int64)
        return (states[:, None] == targets[None, :]).astype(np.float64)


@dataclasses.dataclass(frozen=True)
class Bsc(NoiseModel):
    """Binary symmetric channel flipping each outcome bit with probability epsilon."""

    epsilon: float

    def __post_init__(self):
        if not (0.0 <= self.epsilon < 0.5):
            raise ValueError(f"crossover probability must lie in [0, 0.5), got {self.epsilon}")

    def likelihood(self, t, s):
        return bsc_likelihood(t, s, self.epsilon)

    def likelihood_packed(self, t, state_indices, m):
        target = bits_to_index(as_bit_vector(t, m, "observed vector"))
        states = np.asarray(state_indices, dtype=np.int64)
        d = np.bitwise_count(states ^ np.int64(target)).astype(np.int64)
        return self.epsilon**d * (1.0 - self.epsilon) ** (m - d)

    def likelihood_table(self, outcomes, state_indices, m):
        targets = _pack_rows(outcomes, m)
        states = np.asarray(state_indices, dtype=np.int64)
        d = np.bitwise_count(states[:, None] ^ targets[None, :]).astype(np.int64)
        return self.epsilon**d * (1.0 - self.epsilon) ** (m - d)


@dataclasses.dataclass(frozen=True, eq=False)
class CustomNoise(NoiseModel):
    """Arbitrary memoryless observation channel given as a callable Q(t, s).

    `q` maps two uint8 bit vectors (observed, syndrome) to a probability.
    Batched evaluation falls back to a Python loop, so trellis inference with
    a custom channel is guarded to small m by the caller.
    """

    q: Callable[[np.ndarray, np.ndarray], float]

    def likelihood(self, t, s):
        tv = as_bit_vector(t, None, "observed vector")
        sv = as_bit_vector(s, tv.size, "syndrome vector")
        value = float(self.q(tv, sv))
        if value < 0.0 or not math.isfinite(value):
            raise ValueError(f"likelihood must be finite and non-negative, got {value}")
        return value

    def likelihood_packed(self, t, state_indices, m):
        tv = as_bit_vector(t, m, "observed vector")
        states = np.asarray(state_indices, dtype=np.int64)
        out = np.empty(states.size, dtype=np.float64)
        for pos, s in enumerate(states):
            out[pos] = self.likelihood(tv, index_to_bits(s, m))
        return out
