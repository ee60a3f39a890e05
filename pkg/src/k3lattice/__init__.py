"""Exact lattice machinery for deciding zero entropy of even hyperbolic lattices."""

from .errors import LatticeError
from .lattice import (Lattice, Signature, SublatticeBasis, determinant, direct_sum,
                      make_lattice, orthogonal_complement, saturate, signature, twist)
from .dsl import eval_expr, lattice, parse, to_string

__all__ = [
    "Lattice", "LatticeError", "Signature", "SublatticeBasis", "determinant",
    "direct_sum", "eval_expr", "lattice", "make_lattice", "orthogonal_complement",
    "parse", "saturate", "signature", "to_string", "twist",
]

__version__ = "0.1.0"
