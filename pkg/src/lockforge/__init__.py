"""Paper-to-code pipeline for logic locking with a deterministic verification harness."""

__version__ = "0.1.0"

from .bench import (  # noqa: F401
    Circuit,
    Gate,
    KeyAssignment,
    Latch,
    identify_key_inputs,
    parse_bench,
    validate,
    write_bench,
)
from .errors import DomainError, LockforgeError  # noqa: F401
