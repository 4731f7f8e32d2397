import os

DEFAULT_MAX_TERMS = 10_000_000


def max_terms() -> int:
    """Lattice/series term cap, overridable through ``ETALAB_MAX_TERMS``."""
    raw = os.environ.get("ETALAB_MAX_TERMS")
    if raw is None:
        return DEFAULT_MAX_TERMS
    try:
        value = int(float(raw))
    except ValueError:
        return DEFAULT_MAX_TERMS
    return max(value, 1)
