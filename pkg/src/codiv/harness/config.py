"""Experiment configuration, validation and scheme construction."""

from __future__ import annotations

import hashlib
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from ..channel import ChannelModel, has_analytic
from ..codes import (
    PRIOR_ART_QPSK_N10,
    BoundReport,
    Code,
    CodeConstructionError,
    GeneratorMatrix,
    build_code,
    codeword_set_rows,
    griesmer_report,
    rm1_generator,
    scrs_generator,
    simplex_generator,
)
from ..fusion import SubsetPlan, codeword_set_code, plan_from_codebook
from ..gf import FieldSpec
from ..sigmap import BUILTIN, Constellation, custom_constellation, make_constellation, symbol_codewords

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

FAMILIES = ("simplex", "rm1", "scrs", "custom", "codeword_set", "naive")
DECODERS = ("ml", "subset_ml", "hamming", "mrc", "uncoded_majority")
CSI_DECODERS = ("ml", "subset_ml")


class ConfigError(ValueError):
    """Raised with every validation problem found, not just the first."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass
class ExperimentConfig:
    constellation: str = "QPSK"
    M: int | None = None
    B: int = 1
    N: int = 3
    family: str = "simplex"
    poly: int | None = None
    generator: list | None = None
    generator_file: str | None = None
    codeword_set: list | None = None
    custom_points: list | None = None
    channel: str = "iid_rayleigh"
    gains: list | None = None
    decoders: list = field(default_factory=lambda: ["ml"])
    snr_db: list = field(default_factory=lambda: [0.0, 5.0, 10.0])
    trials: int = 100_000
    seed: int = 0
    mc_samples: int = 100_000
    table_method: str = "auto"
    block_size: int = 8192
    workers: int = 1
    noise: bool = True
    label: str | None = None

    @property
    def K(self) -> int:
        return int(math.log2(self.constellation_M)) // self.B

    @property
    def constellation_M(self) -> int:
        if self.constellation.upper() in BUILTIN:
            return BUILTIN[self.constellation.upper()]
        return len(self.custom_points or []) or (self.M or 0)

    def to_dict(self) -> dict:
        return asdict(self)

    def hash(self) -> str:
        d = self.to_dict()
        d.pop("workers")
        blob = json.dumps(d, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)

    def validate(self) -> None:
        problems = []
        cname = self.constellation.upper()
        if cname not in BUILTIN and cname != "CUSTOM":
            problems.append(f"constellation {self.constellation!r} not in {sorted(BUILTIN)} or 'custom'")
        if cname == "CUSTOM" and not self.custom_points:
            problems.append("custom constellation needs custom_points")
        if cname in BUILTIN and self.M is not None and self.M != BUILTIN[cname]:
            problems.append(f"{cname} has M={BUILTIN[cname]}, config says M={self.M}")
        M = self.constellation_M
        if not isinstance(self.B, int) or not 1 <= self.B <= 8:
            problems.append(f"B must be an integer in [1, 8], got {self.B!r}")
        elif M and M & (M - 1) == 0 and M >= 2:
            bits = int(math.log2(M))
            if bits % self.B:
                problems.append(f"K = log2(M)/B = {bits}/{self.B} is not an integer")
        elif M:
            problems.append(f"M={M} is not a power of two")
        if not isinstance(self.N, int) or self.N < 1:
            problems.append(f"N must be a positive integer, got {self.N!r}")
        if self.family not in FAMILIES:
            problems.append(f"family {self.family!r} not in {FAMILIES}")
        if self.family == "custom" and self.generator is None and self.generator_file is None:
            problems.append("custom family needs generator or generator_file")
        if self.family == "codeword_set" and self.B != 1:
            problems.append("codeword_set schemes forward one bit per node (B=1)")
        if self.channel not in ("iid_rayleigh", "fixed_gain"):
            problems.append(f"channel {self.channel!r} not in ('iid_rayleigh', 'fixed_gain')")
        if self.channel == "fixed_gain":
            if not self.gains:
                problems.append("fixed_gain channel needs gains")
            elif len(self.gains) != self.N:
                problems.append(f"gains has {len(self.gains)} entries, N={self.N}")
            elif any(g <= 0 for g in self.gains):
                problems.append("gains must be positive (h = 0 makes a node degenerate)")
        bad = [d for d in self.decoders if d not in DECODERS]
        if bad:
            problems.append(f"unknown decoders {bad}; choose from {DECODERS}")
        if not self.decoders:
            problems.append("decoders must be non-empty")
        if not self.snr_db:
            problems.append("snr_db must be non-empty")
        if not isinstance(self.trials, int) or self.trials < 1:
            problems.append(f"trials must be a positive integer, got {self.trials!r}")
        if not isinstance(self.mc_samples, int) or self.mc_samples < 1:
            problems.append(f"mc_samples must be a positive integer, got {self.mc_samples!r}")
        if self.table_method not in ("auto", "analytic", "monte_carlo"):
            problems.append(f"table_method {self.table_method!r} not in (auto, analytic, monte_carlo)")
        if not isinstance(self.block_size, int) or self.block_size < 1:
            problems.append("block_size must be a positive integer")
        if not isinstance(self.workers, int) or self.workers < 1:
            problems.append("workers must be a positive integer")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            problems.append("seed must be an integer in [0, 2^64)")
        if problems:
            raise ConfigError(problems)
        # structural checks that need the code
        try:
            build_scheme(self)
        except (CodeConstructionError, ValueError) as exc:
            raise ConfigError([str(exc)]) from exc


def _coerce(cfg: dict) -> dict:
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(cfg) - known
    if unknown:
        raise ConfigError([f"unknown config keys {sorted(unknown)}"])
    return cfg


def load_config(path) -> ExperimentConfig:
    """Read a TOML config.

    Top-level keys map onto :class:`ExperimentConfig` fields; the optional
    ``[code]``, ``[channel]`` and ``[sim]`` sections are flattened first.
    """
    try:
        raw = tomllib.loads(Path(path).read_text())
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError([f"cannot read config {path}: {exc}"]) from exc
    flat = {}
    for key, val in raw.items():
        if key == "channel" and isinstance(val, dict):
            flat["channel"] = val.get("kind", "iid_rayleigh")
            if "gains" in val:
                flat["gains"] = val["gains"]
        elif key in ("code", "sim", "constellation") and isinstance(val, dict):
            if key == "constellation":
                flat["constellation"] = val.get("name", "QPSK")
                for k in ("M", "custom_points"):
                    if k in val:
                        flat[k] = val[k]
            else:
                flat.update(val)
        else:
            flat[key] = val
    return ExperimentConfig(**_coerce(flat))


# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Scheme:
    """Everything a sweep needs that is fixed for the whole experiment."""

    constellation: Constellation  # unit average energy
    code: Code
    codebook: np.ndarray  # (M, N), indexed by constellation point
    plan: SubsetPlan
    channel: ChannelModel
    analytic: bool

    @property
    def outputs(self) -> np.ndarray:
        return self.codebook.T

    @property
    def q(self) -> int:
        return self.code.spec.q

    def bound_report(self) -> BoundReport | None:
        if self.code.generator is None or self.code.d_min < 1:
            return None
        G = self.code.generator
        return griesmer_report(G.K, G.spec, self.code.d_min, G.N)


def cyclic_naive_generator(N: int, K: int, spec: FieldSpec) -> GeneratorMatrix:
    """Uncoded forwarding: node i reports message symbol i mod K."""
    G = np.zeros((K, N), dtype=np.int64)
    G[np.arange(N) % K, np.arange(N)] = 1
    return GeneratorMatrix(G, spec, strict=True)


def make_generator(cfg: ExperimentConfig, spec: FieldSpec, family: str | None = None) -> GeneratorMatrix:
    family = family or cfg.family
    K, N = cfg.K, cfg.N
    if family == "simplex":
        G = simplex_generator(K, spec)
    elif family == "rm1":
        G = rm1_generator(K, spec)
    elif family == "scrs":
        G = scrs_generator(N, K, spec)
    elif family == "naive":
        G = cyclic_naive_generator(N, K, spec)
    elif family == "custom":
        if cfg.generator_file:
            G = GeneratorMatrix.load(cfg.generator_file)
        else:
            G = GeneratorMatrix(np.asarray(cfg.generator), spec)
    else:
        raise ValueError(f"family {family!r} has no generator matrix")
    if G.N != N:
        raise CodeConstructionError(f"{family} generator has N={G.N} columns, config N={N}")
    if G.K != K:
        raise CodeConstructionError(f"{family} generator has K={G.K} rows, expected K={K}")
    return G


def build_scheme(cfg: ExperimentConfig) -> Scheme:
    if cfg.constellation.upper() == "CUSTOM":
        base = custom_constellation(cfg.custom_points, 1.0)
    else:
        base = make_constellation(cfg.constellation, cfg.M, 1.0)
    spec = FieldSpec(cfg.B, cfg.poly)
    if cfg.family == "codeword_set":
        columns = cfg.codeword_set if cfg.codeword_set is not None else PRIOR_ART_QPSK_N10
        rows = codeword_set_rows(columns, base.M)
        if rows.shape[1] != cfg.N:
            raise CodeConstructionError(f"codeword set has {rows.shape[1]} columns, config N={cfg.N}")
        code = codeword_set_code(rows, base, spec)
    else:
        code = build_code(make_generator(cfg, spec))
    codebook = symbol_codewords(code, base)
    model = ChannelModel(cfg.channel, cfg.N, tuple(cfg.gains) if cfg.gains else None)
    if cfg.table_method == "analytic" and not has_analytic(base):
        raise ValueError(f"no analytic transition model for constellation {base.name!r}")
    analytic = has_analytic(base) and cfg.table_method != "monte_carlo"
    return Scheme(base, code, codebook, plan_from_codebook(codebook), model, analytic)
