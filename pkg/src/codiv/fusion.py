"""Fusion-center decoders and baseline receivers.

Every decoder breaks ties toward the lowest symbol index.  The scalar
functions take the library types; the ``*_batch`` functions work on
stacked numpy arrays and are what the Monte-Carlo harness calls.

Codebooks passed to the decoders are indexed by constellation point
(see :func:`codiv.sigmap.symbol_codewords`).  A bare :class:`~codiv.codes.Code`
is accepted too, in which case the returned index is the message index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import PROB_FLOOR, TransitionModel
from .codes import Code, code_from_rows
from .gf import FieldSpec, GFVector, default_field
from .sigmap import Constellation, detect_batch


class MissingCSIError(ValueError):
    pass


class PlanMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class FusionInput:
    u: GFVector
    h: np.ndarray | None = None
    tables: TransitionModel | None = None

    def __post_init__(self):
        if (self.h is None) != (self.tables is None):
            raise MissingCSIError("channel gains and transition tables must be given together")
        if self.h is not None:
            h = np.asarray(self.h, dtype=complex)
            if h.size != len(self.u) or self.tables.N != len(self.u):
                raise ValueError("u, h and tables must cover the same nodes")
            object.__setattr__(self, "h", h)


@dataclass(frozen=True)
class SubsetPlan:
    """Partition of the nodes into groups that share a processing rule."""

    groups: tuple[tuple[int, ...], ...]

    @property
    def L(self) -> int:
        return len(self.groups)

    @property
    def N(self) -> int:
        return sum(len(g) for g in self.groups)

    def is_stride(self) -> bool:
        L = self.L
        return all(g == tuple(range(g[0], self.N, L)) for g in self.groups)


def _codebook(code) -> np.ndarray:
    return np.asarray(code.codewords if isinstance(code, Code) else code)


def plan_from_codebook(code) -> SubsetPlan:
    """Group nodes whose codeword columns are identical, in order of first appearance."""
    C = _codebook(code)
    seen: dict[bytes, list[int]] = {}
    for i in range(C.shape[1]):
        seen.setdefault(C[:, i].tobytes(), []).append(i)
    return SubsetPlan(tuple(tuple(g) for g in seen.values()))


def check_plan(plan: SubsetPlan, code) -> None:
    C = _codebook(code)
    flat = sorted(i for g in plan.groups for i in g)
    if flat != list(range(C.shape[1])):
        raise PlanMismatchError("plan groups must partition the nodes")
    for g in plan.groups:
        if any(not np.array_equal(C[:, g[0]], C[:, k]) for k in g[1:]):
            raise PlanMismatchError(f"nodes {g} do not share one processing rule")


# ---------------------------------------------------------------------------
# batch kernels


def observed_loglik(conf: np.ndarray, outputs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """log Pr(u_i | s_m, h_i) for the observed outputs.

    Parameters
    ----------
    conf : (T, N, M, M) symbol confusion matrices per trial and node.
    outputs : (N, M) node output for each correctly detected point.
    u : (T, N) observed outputs.

    Returns
    -------
    (T, N, M) array.
    """
    mask = outputs[None, :, :] == u[:, :, None]
    lik = np.einsum("timk,tik->tim", conf, mask.astype(conf.dtype))
    return np.log(np.maximum(lik, PROB_FLOOR))


def ml_decode_batch(loglik: np.ndarray) -> np.ndarray:
    return loglik.sum(axis=1).argmax(axis=-1)


def select_nodes(gain2: np.ndarray, plan: SubsetPlan) -> np.ndarray:
    """(T, L) index of the strongest node in each group."""
    cols = []
    for g in plan.groups:
        idx = np.asarray(g)
        cols.append(idx[gain2[:, idx].argmax(axis=1)])
    return np.stack(cols, axis=1)


def subset_ml_decode_batch(loglik: np.ndarray, gain2: np.ndarray, plan: SubsetPlan) -> np.ndarray:
    sel = select_nodes(gain2, plan)
    picked = np.take_along_axis(loglik, sel[:, :, None], axis=1)
    return picked.sum(axis=1).argmax(axis=-1)


def hamming_decode_batch(u: np.ndarray, codebook: np.ndarray) -> np.ndarray:
    d = (u[:, None, :] != codebook[None, :, :]).sum(axis=-1)
    return d.argmin(axis=-1)


def mrc_batch(y: np.ndarray, h: np.ndarray, points: np.ndarray) -> np.ndarray:
    y_eq = (np.conj(h) * y).sum(axis=-1) / (np.abs(h) ** 2).sum(axis=-1)
    return detect_batch(y_eq, np.ones_like(y_eq), points)


def majority_batch(votes: np.ndarray, M: int) -> np.ndarray:
    counts = np.zeros((votes.shape[0], M), dtype=np.int64)
    np.add.at(counts, (np.arange(votes.shape[0])[:, None], votes), 1)
    return counts.argmax(axis=1)


# ---------------------------------------------------------------------------
# scalar API


def _u_array(u) -> np.ndarray:
    return u.to_array() if isinstance(u, GFVector) else np.asarray(u, dtype=np.int64)


def ml_decode(inp: FusionInput, code) -> int:
    """argmax_m sum_i log Pr(u_i | s_m, h_i)."""
    if inp.tables is None:
        raise MissingCSIError("ML decoding needs channel gains and transition tables")
    C = _codebook(code)
    u = _u_array(inp.u)
    if u.size != C.shape[1] or inp.tables.tables.shape[1] != C.shape[0]:
        raise ValueError("tables/code dimensions disagree with the forwarded outputs")
    ll = inp.tables.log_tables[np.arange(u.size), :, u]  # (N, M)
    return int(ll.sum(axis=0).argmax())


def subset_ml_decode(inp: FusionInput, code, plan: SubsetPlan | None = None) -> int:
    """Keep the strongest node of each rule group, then decode ML on those."""
    if inp.tables is None:
        raise MissingCSIError("subset ML decoding needs channel gains and transition tables")
    plan = plan_from_codebook(code) if plan is None else plan
    check_plan(plan, code)
    u = _u_array(inp.u)
    sel = select_nodes(np.abs(inp.h[None, :]) ** 2, plan)[0]
    ll = inp.tables.log_tables[sel, :, u[sel]]
    return int(ll.sum(axis=0).argmax())


def hamming_decode(u, code) -> int:
    """Nearest codeword in Hamming distance."""
    C = _codebook(code)
    u = _u_array(u)
    if u.size != C.shape[1]:
        raise ValueError(f"length mismatch: {u.size} vs {C.shape[1]}")
    return int(hamming_decode_batch(u[None, :], C)[0])


def centralized_mrc(y, h, c: Constellation) -> int:
    """Maximum-ratio combine all raw observations, then detect."""
    y = np.asarray(y, dtype=complex)
    h = np.asarray(h, dtype=complex)
    if not np.any(h):
        raise ValueError("all-zero channel vector")
    return int(mrc_batch(y[None, :], h[None, :], c.points)[0])


def uncoded_majority(symbol_votes, M: int | None = None) -> int:
    votes = np.asarray(symbol_votes, dtype=np.int64)
    M = int(votes.max()) + 1 if M is None else M
    return int(majority_batch(votes[None, :], M)[0])


def codeword_set_quantize(m_hat: int, column) -> int:
    """Bit forwarded by a node whose decision rule is one codeword-set column."""
    column = np.asarray(column)
    if not 0 <= m_hat < column.size:
        raise ValueError(f"symbol index {m_hat} outside column of length {column.size}")
    return int(column[m_hat])


def codeword_set_code(rows: np.ndarray, c: Constellation, spec: FieldSpec | None = None) -> Code:
    """Code whose codeword for constellation point ``m`` is ``rows[m]``.

    Rows are reordered into message order so that
    :func:`codiv.sigmap.symbol_codewords` recovers ``rows``.
    """
    rows = np.asarray(rows)
    if rows.shape[0] != c.M:
        raise ValueError(f"codeword set has {rows.shape[0]} rows, constellation M={c.M}")
    if len({r.tobytes() for r in rows}) != c.M:
        raise ValueError("codeword set rows must be distinct")
    by_msg = np.empty_like(rows)
    by_msg[c.label_ints] = rows
    return code_from_rows(by_msg, spec or default_field(1))
