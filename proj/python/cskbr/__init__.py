"""Constraint-checked LLM prompting for commonsense KB triple classification.

Thin wrapper around the compiled _cskbr extension module.
"""

try:
    from ._cskbr import *  # noqa: F401,F403  (installed package layout)
    from . import _cskbr as _impl
except ImportError:  # in-tree builds put the module next to the package on sys.path
    from _cskbr import *  # noqa: F401,F403
    import _cskbr as _impl

__doc__ = _impl.__doc__
__all__ = [name for name in dir(_impl) if not name.startswith("_")]
