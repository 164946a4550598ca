"""Greedy subspace selection and width/Grothendieck bound certification."""

__version__ = "0.1.0"

SCHEMA_VERSION = "1"

from .spaces import CompactSet, DualExponent, NormedSpace  # noqa: F401
from .subspaces import Subspace, dist_to_subspace  # noqa: F401
