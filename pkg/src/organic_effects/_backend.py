"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the numpy
fallback.  Set ``ORGANIC_EFFECTS_BACKEND`` to ``python`` or ``compiled`` to
force one (``compiled`` raises if the extension is missing).
"""

import importlib
import os

from . import _kernels_py


def load(name):
    if name == "python":
        return _kernels_py
    if name == "compiled":
        return importlib.import_module(f"{__package__}._ckernels")
    raise ValueError(f"unknown backend {name!r}")


def available():
    names = ["python"]
    try:
        load("compiled")
    except ImportError:
        pass
    else:
        names.insert(0, "compiled")
    return names


_requested = os.environ.get("ORGANIC_EFFECTS_BACKEND", "auto")
if _requested == "auto":
    BACKEND = available()[0]
else:
    BACKEND = _requested
kernels = load(BACKEND)
