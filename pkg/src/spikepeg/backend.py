"""Kernel backend selection.

The hot paths (single-inference SNN execution, its fixed-point twin, and
the 1 kHz closed-loop integration window) exist twice: a Cython extension
and a numpy fallback with identical semantics. The extension is picked at
import time when available; set SPIKEPEG_BACKEND=python or =compiled to
force one side (useful for the paired benchmark and the parity tests).
"""

from __future__ import annotations

import os

_choice = os.environ.get("SPIKEPEG_BACKEND", "auto").lower()
if _choice not in ("auto", "compiled", "python"):
    raise RuntimeError(f"SPIKEPEG_BACKEND must be auto|compiled|python, got {_choice!r}")

COMPILED = False
if _choice in ("auto", "compiled"):
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        COMPILED = True
    except ImportError:
        if _choice == "compiled":
            raise
        from . import _kernels_py as _impl
else:
    from . import _kernels_py as _impl

NAME = "compiled" if COMPILED else "python"

snn_forward = _impl.snn_forward
snn_forward_quant = _impl.snn_forward_quant
run_segment = _impl.run_segment


def get_backends():
    """All importable kernel implementations, for benchmarking/parity tests."""
    from . import _kernels_py

    impls = {"python": _kernels_py}
    try:
        from . import _kernels  # type: ignore[attr-defined]

        impls["compiled"] = _kernels
    except ImportError:
        pass
    return impls
