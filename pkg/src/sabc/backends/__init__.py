"""Simulation backend selection.

The compiled Cython kernel is used when importable, otherwise the numpy
fallback. `SABC_BACKEND=python` or `SABC_BACKEND=compiled` in the environment
forces the choice; asking for the compiled kernel when it is not built is an
error rather than a silent downgrade.
"""

import os

from ..errors import ConfigError
from . import numpy_kernel

__all__ = ["get_backend", "available_backends", "default_backend_name"]

try:
    from . import _ckernel
except ImportError:
    _ckernel = None

_BACKENDS = {"python": numpy_kernel}
if _ckernel is not None:
    _BACKENDS["compiled"] = _ckernel


def available_backends():
    return sorted(_BACKENDS)


def default_backend_name() -> str:
    forced = os.environ.get("SABC_BACKEND", "").strip().lower()
    if forced:
        if forced not in ("python", "compiled"):
            raise ConfigError(f"SABC_BACKEND must be 'python' or 'compiled', got {forced!r}")
        if forced not in _BACKENDS:
            raise ConfigError("SABC_BACKEND=compiled but the extension is not built")
        return forced
    return "compiled" if _ckernel is not None else "python"


def get_backend(name: str | None = None):
    """Return the kernel module for `name` (default: best available)."""
    if name is None:
        name = default_backend_name()
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ConfigError(
            f"unknown backend {name!r}; available: {available_backends()}"
        ) from None
