"""Select the compiled return-map kernel when it is built, else the Python one."""

from . import _core_py

try:
    from . import _core as _impl  # type: ignore[attr-defined]
except ImportError:  # extension not compiled
    _impl = _core_py

BACKEND = "cython" if _impl is not _core_py else "python"
OK, UNBOUNDED, NO_RETURN, UNDERFLOW = _core_py.OK, _core_py.UNBOUNDED, _core_py.NO_RETURN, _core_py.UNDERFLOW
horner = _impl.horner
return_map = _impl.return_map


def implementations() -> dict:
    """Every importable backend by name (the benchmark compares them)."""
    out = {"python": _core_py}
    if _impl is not _core_py:
        out["cython"] = _impl
    return out
