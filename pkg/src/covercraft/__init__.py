"""covercraft: covering-congruence construction, prime-window search, sieve diagnostics."""

__version__ = "0.1.0"

SCHEMA_VERSION = "1.0"
