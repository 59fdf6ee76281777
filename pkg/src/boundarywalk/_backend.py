"""Select the sampling kernel at import: compiled Cython core if built, else numpy.

Both backends are bit-identical; the choice only affects speed.
``boundarywalk._backend.BACKEND`` reports which one is active.
"""

from __future__ import annotations

from . import _kernel_py

try:
    from . import _kernel as _impl  # type: ignore[attr-defined]

    BACKEND = "compiled"
except ImportError:  # pragma: no cover - depends on build environment
    _impl = _kernel_py
    BACKEND = "python"

stream_key = _impl.stream_key
uniform = _impl.uniform
fill_uniforms = _impl.fill_uniforms
sample_indices = _impl.sample_indices
