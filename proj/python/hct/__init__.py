"""Hausdorff-content Choquet toolkit.

Thin python surface over the C++ core: exact dyadic contents, Choquet
integrals, maximal-type operators, Calderon-Zygmund decompositions, Riesz
potentials, the input generators, and the experiment runner.
"""

from ._hct import *  # noqa: F401,F403
from ._hct import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"
