"""Backend selection for the hot kernels.

The compiled kernel is used when it was built; otherwise the numpy kernel.
Set ``TORUS_CLOSING_BACKEND=python`` to force the fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
eval_chain = _pykernels.eval_chain
polar_pullback = _pykernels.polar_pullback

if os.environ.get("TORUS_CLOSING_BACKEND", "").lower() != "python":
    try:
        from ._ckernels import eval_chain, polar_pullback  # noqa: F811
    except ImportError:
        pass
    else:
        BACKEND = "cython"

python_eval_chain = _pykernels.eval_chain
python_polar_pullback = _pykernels.polar_pullback


def compiled_eval_chain():
    """Return the compiled evaluator, or None when the extension is absent."""
    try:
        from ._ckernels import eval_chain as fn
    except ImportError:
        return None
    return fn


def compiled_polar_pullback():
    try:
        from ._ckernels import polar_pullback as fn
    except ImportError:
        return None
    return fn
