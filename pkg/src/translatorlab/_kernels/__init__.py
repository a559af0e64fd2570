"""Stencil kernel backend selection.

The hot per-Newton-iteration loops (residual evaluation, Jacobian assembly)
exist twice: a compiled Cython extension and a vectorized numpy fallback.
The compiled module is used when importable; set TRANSLATORLAB_KERNELS to
"python" or "compiled" to force a backend (the latter raises if the extension
was not built).  See benchmarks/bench_kernels.py for the speed comparison.
"""

import os

from . import fallback

_requested = os.environ.get("TRANSLATORLAB_KERNELS", "auto").lower()

if _requested not in ("auto", "python", "compiled"):
    raise ValueError(
        f"TRANSLATORLAB_KERNELS={_requested!r}: expected auto, python or compiled"
    )

if _requested == "python":
    _impl = fallback
else:
    try:
        from . import _stencil as _impl  # type: ignore[attr-defined]
    except ImportError:
        if _requested == "compiled":
            raise ImportError(
                "compiled stencil kernels requested via TRANSLATORLAB_KERNELS "
                "but the extension is not built; run pip install -e . --no-build-isolation"
            )
        _impl = fallback

BACKEND = _impl.BACKEND_NAME
residual_interior = _impl.residual_interior
flux_residual_interior = _impl.flux_residual_interior
jacobian_triplets = _impl.jacobian_triplets


def available_backends():
    out = ["python"]
    try:
        from . import _stencil  # noqa: F401

        out.append("compiled")
    except ImportError:
        pass
    return out
