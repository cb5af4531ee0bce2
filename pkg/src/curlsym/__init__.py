"""curlsym: symmetry analysis toolkit for curl-eigenfield systems.

Computes point symmetries of the first-order systems that say the curl of a
three-component field equals a scalar multiple of the field, with or without
the divergence-free side condition.  The package derives the determining
equations, solves polynomial coefficient ansatzes exactly, assembles the
symmetry algebra (structure constants, adjoint action, low-dimensional
subalgebras), applies the finite transformation families to known exact
fields, and runs the group-invariant reductions numerically.
"""

__version__ = "0.1.0"

from .expr import (  # noqa: F401
    EvalError,
    ExprError,
    NotPolynomial,
    ParseError,
    REGISTRY,
    S,
    parse,
    to_string,
)
