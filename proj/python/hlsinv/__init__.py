"""Grid-based checks of conformally invariant Riesz energies."""

from ._hls import *  # noqa: F401,F403
from ._hls import HlsError, InvalidArgument, DomainError, GridMismatch, NumericalFailure  # noqa: F401
