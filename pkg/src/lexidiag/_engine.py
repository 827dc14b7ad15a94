"""Kernel engine selection: compiled extension if available, else pure Python.

Both engines produce bit-identical results; the compiled one is just fast.
Override with LEXIDIAG_ENGINE=python|compiled or the explicit `engine`
argument accepted by the functions that dispatch to kernels.
"""

from __future__ import annotations

import os

from lexidiag import _kernels_py
from lexidiag.errors import InvalidConfigError

try:
    from lexidiag import _kernels  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - depends on whether the ext was built
    _kernels = None

_ENGINES = {"python": _kernels_py}
if _kernels is not None:
    _ENGINES["compiled"] = _kernels


def available_engines() -> list[str]:
    return sorted(_ENGINES)


def default_engine_name() -> str:
    env = os.environ.get("LEXIDIAG_ENGINE")
    if env:
        if env not in _ENGINES:
            raise InvalidConfigError(
                f"LEXIDIAG_ENGINE={env!r} but available engines are {available_engines()}"
            )
        return env
    return "compiled" if "compiled" in _ENGINES else "python"


def get_kernels(name: str | None = None):
    """Resolve an engine name ('python', 'compiled', or None for the default)."""
    if name is None:
        name = default_engine_name()
    try:
        return _ENGINES[name]
    except KeyError:
        raise InvalidConfigError(
            f"unknown engine {name!r}; available: {available_engines()}"
        ) from None
