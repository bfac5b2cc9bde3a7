"""Minor processes of Gaussian Hermitian matrices of types A/B/C/D and their
determinantal correlation kernels."""

__version__ = "0.1.0"

from .classes import MatrixClass, as_class  # noqa: E402,F401
from .errors import (  # noqa: E402,F401
    ConfigError, DomainError, NumericError, SingularityError, StructuralError,
)
