"""Generator matrices, code enumeration, minimum distance and code bounds.

Column ``i`` of a generator matrix is the processing rule of receive node
``i``: the node forwards ``a_hat . g_i`` where ``a_hat`` is its hard
decision written as a length-K vector over GF(2^B).
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .gf import FieldSpec, GFVector, default_field, hamming_distance

MAX_MESSAGE_BITS = 24


class CodeConstructionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GeneratorMatrix:
    """K x N generator matrix over GF(2^B).

    Set ``strict`` to reject all-zero columns instead of warning about them
    (the built-in families always construct strictly).
    """

    entries: np.ndarray
    spec: FieldSpec
    strict: bool = field(default=False, repr=False)

    def __post_init__(self):
        G = np.array(self.entries, dtype=np.int64)
        if G.ndim != 2 or G.size == 0:
            raise CodeConstructionError("generator must be a non-empty 2-D matrix")
        if G.min() < 0 or G.max() >= self.spec.q:
            raise CodeConstructionError(f"entries must lie in [0, {self.spec.q})")
        zero_cols = np.flatnonzero(~G.any(axis=0))
        if zero_cols.size:
            msg = f"all-zero generator columns at nodes {zero_cols.tolist()}"
            if self.strict:
                raise CodeConstructionError(msg)
            warnings.warn(msg + "; those nodes carry no information", stacklevel=3)
        G.setflags(write=False)
        object.__setattr__(self, "entries", G)

    @property
    def K(self) -> int:
        return self.entries.shape[0]

    @property
    def N(self) -> int:
        return self.entries.shape[1]

    def column(self, i: int) -> GFVector:
        return GFVector(tuple(int(v) for v in self.entries[:, i]), self.spec)

    def __eq__(self, other):
        return (
            isinstance(other, GeneratorMatrix)
            and self.spec == other.spec
            and np.array_equal(self.entries, other.entries)
        )

    def __hash__(self):
        return hash((self.spec, self.entries.tobytes(), self.entries.shape))

    def to_text(self) -> str:
        lines = [f"{self.K} {self.N} {self.spec.B} {self.spec.primitive_polynomial:#x}"]
        lines += [" ".join(str(int(v)) for v in row) for row in self.entries]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "GeneratorMatrix":
        rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if not rows or len(rows[0]) != 4:
            raise CodeConstructionError("header must be 'K N B poly'")
        K, N, B = (int(x) for x in rows[0][:3])
        poly = int(rows[0][3], 0)
        body = rows[1:]
        if len(body) != K or any(len(r) != N for r in body):
            raise CodeConstructionError(f"expected {K} rows of {N} integers")
        return cls(np.array([[int(v) for v in r] for r in body]), FieldSpec(B, poly))

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path) -> "GeneratorMatrix":
        return cls.from_text(Path(path).read_text())


@dataclass(frozen=True, eq=False)
class Code:
    """A code with one codeword per message.

    ``codewords[j]`` is the codeword of the message whose KB-bit
    representation (MSB first) is the integer ``j``.  ``generator`` is None
    for non-linear codes given directly as a list of rows.
    """

    codewords: np.ndarray
    spec: FieldSpec
    generator: GeneratorMatrix | None = None
    d_min: int = field(init=False)

    def __post_init__(self):
        C = np.array(self.codewords, dtype=np.int64)
        C.setflags(write=False)
        object.__setattr__(self, "codewords", C)
        object.__setattr__(self, "d_min", min_distance(self))

    @property
    def M(self) -> int:
        return self.codewords.shape[0]

    @property
    def N(self) -> int:
        return self.codewords.shape[1]

    @property
    def is_linear(self) -> bool:
        return self.generator is not None

    def codeword(self, j: int) -> GFVector:
        return GFVector(tuple(int(v) for v in self.codewords[j]), self.spec)


def message_vectors(K: int, spec: FieldSpec) -> np.ndarray:
    """All q^K messages as rows, in increasing MSB-first integer order."""
    q = spec.q
    idx = np.arange(q**K)
    shifts = spec.B * np.arange(K - 1, -1, -1)
    return (idx[:, None] >> shifts) & (q - 1)


def _simplex_columns(K: int, spec: FieldSpec) -> np.ndarray:
    if K * spec.B > MAX_MESSAGE_BITS:
        raise CodeConstructionError(f"K*B = {K * spec.B} exceeds {MAX_MESSAGE_BITS}")
    msgs = message_vectors(K, spec)[1:]
    first_nz = msgs[np.arange(len(msgs)), (msgs != 0).argmax(axis=1)]
    return msgs[first_nz == 1].T


def simplex_generator(K: int, spec: FieldSpec | None = None) -> GeneratorMatrix:
    """q-ary simplex code, columns in lexicographic order (top row most significant)."""
    spec = spec or default_field(1)
    if K < 1:
        raise CodeConstructionError("K must be >= 1")
    return GeneratorMatrix(_simplex_columns(K, spec), spec, strict=True)


def rm1_generator(K: int, spec: FieldSpec | None = None) -> GeneratorMatrix:
    """First-order Reed-Muller code: a row of ones above all of GF(q)^(K-1)."""
    spec = spec or default_field(1)
    if K < 2:
        raise CodeConstructionError("first-order Reed-Muller needs K >= 2")
    body = message_vectors(K - 1, spec).T
    G = np.vstack([np.ones((1, body.shape[1]), dtype=np.int64), body])
    return GeneratorMatrix(G, spec, strict=True)


def scrs_parameters(N: int, K: int, spec: FieldSpec) -> tuple[int, int, int]:
    """Return ``(N_out, N_in, N_shortened)`` for the SCRS construction."""
    q = spec.q
    n_out = (q**K - 1) // (q - 1)
    n_in = -(-N * (q - 1) // (q**K - 1))
    return n_out, n_in, n_out * n_in - N


def scrs_generator(N: int, K: int, spec: FieldSpec | None = None) -> GeneratorMatrix:
    """Shortened concatenated repetition-simplex generator of length N.

    The simplex generator is tiled ``N_in`` times and the trailing
    ``N_out * N_in - N`` columns are dropped.
    """
    spec = spec or default_field(1)
    if K < 1 or N < K:
        raise CodeConstructionError(f"SCRS needs N >= K >= 1, got N={N}, K={K}")
    n_out, n_in, _ = scrs_parameters(N, K, spec)
    G = np.tile(_simplex_columns(K, spec), n_in)[:, :N]
    # lexicographic order puts non-unit columns early for K >= 3
    if N < n_out and _rank(G, spec) < K:
        raise CodeConstructionError(
            f"the first {N} simplex columns do not span GF({spec.q})^{K}; use N >= {n_out}"
        )
    return GeneratorMatrix(G, spec, strict=True)


def naive_generator() -> GeneratorMatrix:
    """Three binary nodes: real bit, imaginary bit, real bit again."""
    return GeneratorMatrix(np.array([[1, 0, 1], [0, 1, 0]]), default_field(1), strict=True)


def _rank(G: np.ndarray, spec: FieldSpec) -> int:
    A = np.array(G, dtype=np.int64)
    rank = 0
    rows, cols = A.shape
    for c in range(cols):
        pivot = next((r for r in range(rank, rows) if A[r, c]), None)
        if pivot is None:
            continue
        A[[rank, pivot]] = A[[pivot, rank]]
        A[rank] = spec.mul(int(spec.inv(A[rank, c])), A[rank])
        for r in range(rows):
            if r != rank and A[r, c]:
                A[r] ^= spec.mul(int(A[r, c]), A[rank])
        rank += 1
        if rank == rows:
            break
    return rank


def build_code(G: GeneratorMatrix) -> Code:
    """Encode every message ``a`` as ``a G``."""
    if G.K * G.spec.B > MAX_MESSAGE_BITS:
        raise CodeConstructionError(
            f"K*B = {G.K * G.spec.B} exceeds {MAX_MESSAGE_BITS}; enumeration too large"
        )
    msgs = message_vectors(G.K, G.spec)
    return Code(G.spec.matmul(msgs, G.entries), G.spec, G)


def code_from_rows(rows, spec: FieldSpec | None = None) -> Code:
    """Wrap an explicit (possibly non-linear) codeword list as a :class:`Code`."""
    rows = np.asarray(rows, dtype=np.int64)
    M = rows.shape[0]
    if M & (M - 1) or M < 2:
        raise CodeConstructionError("number of codewords must be a power of two >= 2")
    return Code(rows, spec or default_field(1), None)


def _pairwise_min(C: np.ndarray) -> int:
    best = C.shape[1]
    for j in range(C.shape[0] - 1):
        d = (C[j + 1 :] != C[j]).sum(axis=1)
        best = min(best, int(d.min()))
    return best


def min_distance(code: Code) -> int:
    """Minimum distance; minimum nonzero weight for linear codes."""
    C = code.codewords
    if code.generator is not None:
        return int((C[1:] != 0).sum(axis=1).min())
    return _pairwise_min(C)


def min_distance_pairwise(code: Code) -> int:
    """Full pairwise minimum, valid for any code."""
    return _pairwise_min(code.codewords)


def min_distance_bruteforce(code: Code) -> int:
    """Reference oracle built on :func:`gf.hamming_distance` over every pair."""
    words = [code.codeword(j) for j in range(code.M)]
    return min(hamming_distance(u, v) for u, v in itertools.combinations(words, 2))


# ---------------------------------------------------------------------------
# bounds


def ball_volume(N: int, t: int, q: int) -> int:
    """Number of words within Hamming distance ``t`` of a fixed word in GF(q)^N."""
    if t < 0:
        return 0
    return sum(math.comb(N, i) * (q - 1) ** i for i in range(min(t, N) + 1))


def griesmer_length(K: int, B: int, d: int) -> int:
    q = 1 << B
    return sum(-(-d // q**i) for i in range(K))


def griesmer_max_distance(N: int, K: int, B: int) -> int:
    """Largest d whose Griesmer length does not exceed N."""
    d = 0
    while griesmer_length(K, B, d + 1) <= N:
        d += 1
    return d


@dataclass(frozen=True)
class BoundReport:
    K: int
    B: int
    N: int
    d: int
    griesmer_min_length: int
    griesmer_equality: bool
    griesmer_max_d: int
    attains_griesmer_max_d: bool
    dmin_upper_bound: Fraction
    sphere_packing_ok: bool
    gilbert_varshamov_exists: bool
    sphere_packing_ok_binary_rhs: bool
    gilbert_varshamov_exists_binary_rhs: bool

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["dmin_upper_bound"] = str(self.dmin_upper_bound)
        return d

    def to_text(self) -> str:
        rows = [
            ("K", self.K),
            ("B", self.B),
            ("N", self.N),
            ("d_min", self.d),
            ("griesmer_min_length", self.griesmer_min_length),
            ("griesmer_equality", self.griesmer_equality),
            ("griesmer_max_d_at_N", self.griesmer_max_d),
            ("attains_max_d_at_N", self.attains_griesmer_max_d),
            ("dmin_upper_bound", f"{self.dmin_upper_bound} (~{float(self.dmin_upper_bound):.4f})"),
            ("sphere_packing_ok (q^N)", self.sphere_packing_ok),
            ("gilbert_varshamov_exists (q^N)", self.gilbert_varshamov_exists),
            ("sphere_packing_ok (2^N literal)", self.sphere_packing_ok_binary_rhs),
            ("gilbert_varshamov_exists (2^N literal)", self.gilbert_varshamov_exists_binary_rhs),
        ]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows) + "\n"


def griesmer_report(K: int, spec: FieldSpec, d: int, N: int | None = None) -> BoundReport:
    """Evaluate the Griesmer, sphere-packing and Gilbert-Varshamov bounds.

    Parameters
    ----------
    K : int
        Message length over GF(2^B).
    spec : FieldSpec
    d : int
        Minimum distance to test.
    N : int, optional
        Code length.  Defaults to the Griesmer minimum length for ``d``.

    Notes
    -----
    The metric-ball bounds are evaluated with the q-ary space size ``q^N``.
    The ``*_binary_rhs`` fields repeat them with ``2^N`` on the right-hand
    side, which only coincides with the q-ary form when B = 1.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    B, q = spec.B, spec.q
    n_min = griesmer_length(K, B, d)
    N = n_min if N is None else N
    M = q**K
    sp = M * ball_volume(N, (d - 1) // 2, q)
    gv = M * ball_volume(N - 1, d - 2, q)
    max_d = griesmer_max_distance(N, K, B)
    return BoundReport(
        K=K,
        B=B,
        N=N,
        d=d,
        griesmer_min_length=n_min,
        griesmer_equality=(N == n_min),
        griesmer_max_d=max_d,
        attains_griesmer_max_d=(d == max_d),
        dmin_upper_bound=Fraction(N * q ** (K - 1), sum(q**i for i in range(K))),
        sphere_packing_ok=sp <= q**N,
        gilbert_varshamov_exists=gv <= q**N,
        sphere_packing_ok_binary_rhs=sp <= 2**N,
        gilbert_varshamov_exists_binary_rhs=gv <= 2**N,
    )


def scrs_dmin_formula(N: int, K: int, spec: FieldSpec) -> int:
    """Closed-form SCRS minimum distance.

    For K = 2 returns ``alpha q + r - 1`` with ``N = alpha (q + 1) + r``,
    except ``alpha q`` when ``r = 0``.  For other K returns the lower bound
    ``floor(N (q - 1) / (q^K - 1)) q^(K-1)``.
    """
    q = spec.q
    if K == 2:
        alpha, r = divmod(N, q + 1)
        return alpha * q if r == 0 else alpha * q + r - 1
    return (N * (q - 1) // (q**K - 1)) * q ** (K - 1)


def simplex_dmin(K: int, B: int) -> int:
    return 2 ** ((K - 1) * B)


def rm1_dmin(K: int, B: int) -> int:
    return 2 ** ((K - 2) * B) * (2**B - 1)


# ---------------------------------------------------------------------------
# prior-art codeword-set matrix (one integer per node, LSB = first point)

PRIOR_ART_QPSK_N10 = (6, 12, 4, 9, 12, 9, 12, 6, 1, 3)


def codeword_set_rows(columns, M: int) -> np.ndarray:
    """Expand column integers into an (M, N) binary matrix, row 0 = LSB."""
    cols = np.asarray(columns, dtype=np.int64)
    if np.any(cols < 0) or np.any(cols >= 1 << M):
        raise CodeConstructionError(f"column integers must fit in {M} bits")
    return (cols[None, :] >> np.arange(M)[:, None]) & 1
