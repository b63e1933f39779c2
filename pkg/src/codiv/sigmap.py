"""Constellations, Gray labels, bit-to-field conversion and node quantizers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gf import FieldSpec, GFElement, GFVector, gf_dot

BUILTIN = {"BPSK": 2, "QPSK": 4, "8PSK": 8, "16QAM": 16}


class DegenerateChannelError(ValueError):
    """A node saw h = 0; coherent detection is undefined."""


@dataclass(frozen=True, eq=False)
class Constellation:
    """M points with bit labels, scaled so that E|s|^2 = rho.

    ``labels[m]`` is the log2(M)-bit label of ``points[m]``, first bit first.
    ``kind`` selects the closed-form region geometry used for exact
    transition probabilities: ``"grid"`` (rectangular Voronoi cells),
    ``"psk"`` (angular wedges) or ``None``.
    """

    name: str
    points: np.ndarray
    labels: np.ndarray
    energy: float
    kind: str | None = field(default=None, repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.complex128)
        lab = np.asarray(self.labels, dtype=np.int64)
        M = pts.size
        if M < 2 or M & (M - 1):
            raise ValueError(f"M must be a power of two >= 2, got {M}")
        if lab.shape != (M, M.bit_length() - 1):
            raise ValueError("labels must be an (M, log2 M) bit array")
        if len({tuple(r) for r in lab}) != M:
            raise ValueError("labels must be distinct")
        pts.setflags(write=False)
        lab.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", lab)

    @property
    def M(self) -> int:
        return self.points.size

    @property
    def bits(self) -> int:
        return self.labels.shape[1]

    @property
    def label_ints(self) -> np.ndarray:
        """Labels read as MSB-first integers."""
        return self.labels @ (1 << np.arange(self.bits - 1, -1, -1))

    def unit(self) -> np.ndarray:
        """Points rescaled to unit average energy."""
        return self.points / np.sqrt(self.energy) if self.energy > 0 else self.points * 0

    def scaled(self, rho: float) -> "Constellation":
        return Constellation(self.name, self.unit() * np.sqrt(rho), self.labels, rho, self.kind)


def _gray(n: int) -> int:
    return n ^ (n >> 1)


def _gray_bits(n: int, width: int) -> list[int]:
    g = _gray(n)
    return [(g >> (width - 1 - k)) & 1 for k in range(width)]


def make_constellation(name: str, M: int | None = None, rho: float = 1.0) -> Constellation:
    """Built-in constellation with average energy ``rho``.

    Labels: BPSK and QPSK set a bit to 1 on the non-negative half-axis
    (QPSK: first bit from Re, second from Im); 16QAM uses 2-bit Gray per
    axis (I bits first); 8PSK uses Gray labels in phase order.
    """
    key = name.upper()
    if key not in BUILTIN:
        raise ValueError(f"unsupported constellation {name!r}; choose from {sorted(BUILTIN)}")
    if M is not None and M != BUILTIN[key]:
        raise ValueError(f"{key} has M={BUILTIN[key]}, got M={M}")
    if rho < 0:
        raise ValueError("rho must be non-negative")
    if key == "BPSK":
        pts = np.array([1.0, -1.0], dtype=complex)
        labels = [[1], [0]]
        kind = "grid"
    elif key == "QPSK":
        pts = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2)
        labels = [[1, 1], [1, 0], [0, 1], [0, 0]]
        kind = "grid"
    elif key == "8PSK":
        pts = np.exp(2j * np.pi * np.arange(8) / 8)
        labels = [_gray_bits(k, 3) for k in range(8)]
        kind = "psk"
    else:
        levels = np.array([-3, -1, 1, 3])
        pts, labels = [], []
        for i in range(4):
            for q in range(4):
                pts.append(levels[i] + 1j * levels[q])
                labels.append(_gray_bits(i, 2) + _gray_bits(q, 2))
        pts = np.array(pts) / np.sqrt(10)
        kind = "grid"
    return Constellation(key, np.asarray(pts) * np.sqrt(rho), np.array(labels), float(rho), kind)


def custom_constellation(triples, rho: float = 1.0, name: str = "custom") -> Constellation:
    """Build from ``(re, im, label)`` triples, recentred and normalised to ``rho``.

    ``label`` may be a bit string such as ``"0110"``, a bit sequence or an
    integer (read MSB first).
    """
    triples = list(triples)
    M = len(triples)
    width = max(M.bit_length() - 1, 1)
    pts = np.array([complex(float(re), float(im)) for re, im, _ in triples])
    labels = []
    for _, _, lab in triples:
        if isinstance(lab, str):
            bits = [int(c) for c in lab.strip()]
        elif isinstance(lab, (int, np.integer)):
            bits = [(int(lab) >> (width - 1 - k)) & 1 for k in range(width)]
        else:
            bits = [int(b) for b in lab]
        labels.append(bits)
    pts = pts - pts.mean()
    e = np.mean(np.abs(pts) ** 2)
    if e == 0:
        raise ValueError("custom constellation has zero energy")
    return Constellation(name, pts / np.sqrt(e) * np.sqrt(rho), np.array(labels), float(rho), None)


def bits_to_gfvec(b, spec: FieldSpec) -> GFVector:
    """Group bits into B-bit field elements, first bit of each group most significant."""
    b = [int(x) for x in b]
    if len(b) == 0 or len(b) % spec.B:
        raise ValueError(f"bit length {len(b)} is not a positive multiple of B={spec.B}")
    vals = []
    for k in range(0, len(b), spec.B):
        v = 0
        for bit in b[k : k + spec.B]:
            v = (v << 1) | bit
        vals.append(v)
    return GFVector(tuple(vals), spec)


def bits_to_messages(labels: np.ndarray, B: int) -> np.ndarray:
    """Vectorised :func:`bits_to_gfvec` over the rows of ``labels``."""
    M, nbits = labels.shape
    if nbits % B:
        raise ValueError(f"log2(M)={nbits} is not a multiple of B={B}")
    weights = 1 << np.arange(B - 1, -1, -1)
    return labels.reshape(M, nbits // B, B) @ weights


def detect_batch(y, h, points: np.ndarray) -> np.ndarray:
    """Coherent nearest-point decisions ``argmin_m |y - h s_m|^2``, elementwise."""
    y = np.asarray(y)
    h = np.asarray(h)
    d = np.abs(y[..., None] - h[..., None] * points) ** 2
    return d.argmin(axis=-1)


def hard_detect(y: complex, h: complex, c: Constellation) -> int:
    """Index of the constellation point nearest to ``y`` after the channel ``h``.

    Ties go to the lowest index.
    """
    if h == 0:
        raise DegenerateChannelError("h = 0: node has no usable channel")
    return int(detect_batch(y, h, c.points))


@dataclass(frozen=True)
class NodeRule:
    """Processing rule of one node: a generator column ``g``."""

    g: GFVector

    @property
    def spec(self) -> FieldSpec:
        return self.g.spec

    @classmethod
    def from_generator(cls, G, i: int) -> "NodeRule":
        return cls(G.column(i))

    def outputs(self, c: Constellation) -> np.ndarray:
        """Node output for each constellation point when detection is correct."""
        msgs = bits_to_messages(c.labels, self.spec.B)
        if msgs.shape[1] != len(self.g):
            raise ValueError(f"rule length {len(self.g)} != K={msgs.shape[1]}")
        return self.spec.matmul(msgs, self.g.to_array()[:, None])[:, 0]


def quantize(y: complex, h: complex, c: Constellation, rule: NodeRule) -> GFElement:
    """Hard-detect, relabel as a field vector and project onto ``rule.g``."""
    m = hard_detect(y, h, c)
    a = bits_to_gfvec(c.labels[m], rule.spec)
    return gf_dot(a, rule.g)


def symbol_codewords(code, c: Constellation) -> np.ndarray:
    """(M, N) table of codewords indexed by constellation point."""
    if code.M != c.M:
        raise ValueError(f"code has {code.M} codewords but constellation has M={c.M}")
    return code.codewords[c.label_ints]
