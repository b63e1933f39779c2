"""Coded distributed diversity reception: finite-field node quantizers,
fusion-center decoders and Monte-Carlo performance measurement."""

from .codes import (
    BoundReport,
    Code,
    GeneratorMatrix,
    build_code,
    griesmer_report,
    min_distance,
    rm1_generator,
    scrs_dmin_formula,
    scrs_generator,
    simplex_generator,
)
from .gf import FieldSpec, GFElement, GFVector, default_field, gf_add, gf_dot, gf_mul, hamming_distance
from .sigmap import Constellation, NodeRule, bits_to_gfvec, hard_detect, make_constellation, quantize

__version__ = "0.1.0"
