"""Arithmetic over GF(2^B) and fixed-length vectors over it.

Elements are stored as integers in ``[0, 2^B)``; bit ``k`` is the
coefficient of ``x^k`` in the polynomial basis.  Multiplication goes
through log/antilog tables built once per :class:`FieldSpec`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

# bit k <-> coefficient of x^k, x^B term included
DEFAULT_PRIMITIVE_POLYS = {
    1: 0b11,  # x + 1
    2: 0b111,  # x^2 + x + 1
    3: 0b1011,  # x^3 + x + 1
    4: 0b10011,  # x^4 + x + 1
    5: 0b100101,  # x^5 + x^2 + 1
    6: 0b1000011,  # x^6 + x + 1
    7: 0b10000011,  # x^7 + x + 1
    8: 0b100011101,  # x^8 + x^4 + x^3 + x^2 + 1
}


class FieldMismatchError(ValueError):
    """Operands belong to different fields."""


def _polymulmod(a: int, b: int, poly: int, B: int) -> int:
    result = 0
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        a <<= 1
        if a >> B & 1:
            a ^= poly
    return result


class FieldSpec:
    """The field GF(2^B) defined by a primitive polynomial.

    Parameters
    ----------
    B : int
        Bits per symbol, ``1 <= B <= 8``.
    primitive_polynomial : int, optional
        Bitmask of a degree-``B`` primitive polynomial over GF(2).  Defaults
        to :data:`DEFAULT_PRIMITIVE_POLYS`.

    Raises
    ------
    ValueError
        If ``B`` is out of range or the polynomial is not primitive of
        degree ``B``.
    """

    __slots__ = ("B", "q", "primitive_polynomial", "exp_table", "log_table", "_mul", "_inv")

    def __init__(self, B: int, primitive_polynomial: int | None = None):
        if not 1 <= B <= 8:
            raise ValueError(f"B must be in [1, 8], got {B}")
        poly = DEFAULT_PRIMITIVE_POLYS[B] if primitive_polynomial is None else int(primitive_polynomial)
        if poly.bit_length() - 1 != B:
            raise ValueError(f"polynomial {poly:#x} does not have degree {B}")
        q = 1 << B
        order = q - 1

        # antilog table: alpha^k for alpha = x (reduced)
        exp = np.zeros(2 * order, dtype=np.int64)
        x = _polymulmod(1, 0b10, poly, B) if B > 1 else 1
        v = 1
        for k in range(order):
            exp[k] = v
            v = _polymulmod(v, x, poly, B)
            if v == 1 and k + 1 < order:
                raise ValueError(
                    f"polynomial {poly:#x} is not primitive: x has order {k + 1} < {order}"
                )
        if v != 1:
            raise ValueError(f"polynomial {poly:#x} is not primitive (not irreducible)")
        exp[order:] = exp[:order]
        log = np.full(q, -1, dtype=np.int64)
        log[exp[:order]] = np.arange(order)

        a = np.arange(q)
        la, lb = np.meshgrid(log, log, indexing="ij")
        mul = exp[(la + lb) % order]
        mul[(a[:, None] == 0) | (a[None, :] == 0)] = 0
        inv = np.zeros(q, dtype=np.int64)
        inv[1:] = exp[(order - log[1:]) % order]

        object.__setattr__(self, "B", B)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "primitive_polynomial", poly)
        for name, arr in (("exp_table", exp), ("log_table", log), ("_mul", mul), ("_inv", inv)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __setattr__(self, name, value):
        raise AttributeError("FieldSpec is immutable")

    def __eq__(self, other):
        return (
            isinstance(other, FieldSpec)
            and self.B == other.B
            and self.primitive_polynomial == other.primitive_polynomial
        )

    def __hash__(self):
        return hash((self.B, self.primitive_polynomial))

    def __repr__(self):
        return f"FieldSpec(B={self.B}, primitive_polynomial={self.primitive_polynomial:#x})"

    def __reduce__(self):
        return (FieldSpec, (self.B, self.primitive_polynomial))

    # array-level arithmetic, used by the encoders and the simulator
    def add(self, a, b):
        return np.bitwise_xor(a, b)

    def mul(self, a, b):
        return self._mul[a, b]

    def inv(self, a):
        a = np.asarray(a)
        if np.any(a == 0):
            raise ZeroDivisionError("0 has no multiplicative inverse")
        return self._inv[a]

    def matmul(self, a: np.ndarray, G: np.ndarray) -> np.ndarray:
        """Product of message rows ``a`` (..., K) with ``G`` (K, N) over the field."""
        a = np.asarray(a)
        G = np.asarray(G)
        out = np.zeros(a.shape[:-1] + (G.shape[1],), dtype=np.int64)
        for k in range(G.shape[0]):
            out ^= self._mul[a[..., k, None], G[k]]
        return out

    def element(self, value: int) -> "GFElement":
        return GFElement(int(value), self)

    def vector(self, values: Iterable[int]) -> "GFVector":
        return GFVector(tuple(int(v) for v in values), self)


@lru_cache(maxsize=None)
def default_field(B: int) -> FieldSpec:
    return FieldSpec(B)


def _check_same(a_spec: FieldSpec, b_spec: FieldSpec) -> None:
    if a_spec != b_spec:
        raise FieldMismatchError(f"{a_spec!r} vs {b_spec!r}")


@dataclass(frozen=True)
class GFElement:
    value: int
    spec: FieldSpec = field(repr=False)

    def __post_init__(self):
        if not 0 <= self.value < self.spec.q:
            raise ValueError(f"value {self.value} outside GF({self.spec.q})")

    def __add__(self, other: "GFElement") -> "GFElement":
        return gf_add(self, other)

    __sub__ = __add__

    def __mul__(self, other: "GFElement") -> "GFElement":
        return gf_mul(self, other)

    def inverse(self) -> "GFElement":
        return GFElement(int(self.spec.inv(self.value)), self.spec)

    def __int__(self):
        return self.value


@dataclass(frozen=True)
class GFVector:
    elements: tuple[int, ...]
    spec: FieldSpec = field(repr=False)

    def __post_init__(self):
        if len(self.elements) == 0:
            raise ValueError("GFVector must be non-empty")
        q = self.spec.q
        if any(not 0 <= v < q for v in self.elements):
            raise ValueError(f"entries must lie in [0, {q})")

    def __len__(self):
        return len(self.elements)

    def __getitem__(self, k) -> GFElement:
        return GFElement(self.elements[k], self.spec)

    def __iter__(self):
        return (GFElement(v, self.spec) for v in self.elements)

    def __add__(self, other: "GFVector") -> "GFVector":
        _check_same(self.spec, other.spec)
        _check_len(self, other)
        return GFVector(tuple(a ^ b for a, b in zip(self.elements, other.elements)), self.spec)

    @property
    def length(self) -> int:
        return len(self.elements)

    def to_array(self) -> np.ndarray:
        return np.array(self.elements, dtype=np.int64)

    def weight(self) -> int:
        return sum(1 for v in self.elements if v)


def _check_len(a: Sequence, b: Sequence) -> None:
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")


def gf_add(a: GFElement, b: GFElement) -> GFElement:
    """Characteristic-2 addition (XOR)."""
    _check_same(a.spec, b.spec)
    return GFElement(a.value ^ b.value, a.spec)


def gf_mul(a: GFElement, b: GFElement) -> GFElement:
    _check_same(a.spec, b.spec)
    return GFElement(int(a.spec.mul(a.value, b.value)), a.spec)


def gf_dot(a: GFVector, g: GFVector) -> GFElement:
    """Inner product ``sum_k a_k g_k`` over the field."""
    _check_same(a.spec, g.spec)
    _check_len(a, g)
    acc = 0
    for x, y in zip(a.elements, g.elements):
        acc ^= int(a.spec.mul(x, y))
    return GFElement(acc, a.spec)


def hamming_distance(u: GFVector, v: GFVector) -> int:
    """Number of symbol positions where ``u`` and ``v`` differ."""
    _check_len(u, v)
    return sum(1 for x, y in zip(u.elements, v.elements) if x != y)
