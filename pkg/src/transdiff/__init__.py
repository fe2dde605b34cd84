"""Operators of transfinite order on polynomial rings in countably many variables."""
from .construct import build_D, verify_order_probes
from .errors import (
    InfiniteLocalOrder,
    MalformedTerm,
    NotCompatible,
    NotCoprime,
    NotLimit,
    OrderUnknown,
    TransdiffError,
    UnsupportedFamily,
    ZeroElement,
    ZeroOperator,
)
from .localize import LocalizedPoly, apply_local, extend, glue, hom_vanishing
from .order import classify, ordinal_order, r_order
from .ordinal import OMEGA, Ordinal, format_ordinal, parse_ordinal
from .parse import format_op, parse_op, parse_poly
from .ring import Poly, Variable, format_poly, var
from .stream import apply, proportional, theta, zero_test
from .torsion import PRESETS, TorsionSetup, classify_module, is_torsion_element, quite_rank, strong_level

__version__ = "0.1.0"
