"""Hot-kernel backend selection.

The compiled Cython module is preferred; the numpy fallback is used when
the extension was not built.  Set POLYCUBE_KERNELS=python or =compiled to
force a backend (the benchmark and parity tests do).
"""

import os

_forced = os.environ.get("POLYCUBE_KERNELS", "").strip().lower()

if _forced == "python":
    from . import _fallback as _impl
elif _forced == "compiled":
    from . import _native as _impl  # noqa: F401  (ImportError is the answer)
elif _forced:
    raise ImportError(f"POLYCUBE_KERNELS must be 'python' or 'compiled', not {_forced!r}")
else:
    try:
        from . import _native as _impl
    except ImportError:
        from . import _fallback as _impl

BACKEND = _impl.NAME
max_flow = _impl.max_flow
cg_solve = _impl.cg_solve
stretch_metrics = _impl.stretch_metrics
smooth_sweep = _impl.smooth_sweep
