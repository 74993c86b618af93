"""Integer min-cost flow kernel, compiled when available.

``BACKEND`` is ``"compiled"`` if the Cython extension imported, else
``"python"``. Set ``SCHEDFLOW_PURE_PYTHON=1`` to force the fallback.
:func:`min_cost_flow` also falls back per call when the data would not fit
in 64-bit arithmetic.
"""

from __future__ import annotations

import os

from . import _kernel_py

_compiled = None
if not os.environ.get("SCHEDFLOW_PURE_PYTHON"):
    try:
        from . import _kernel as _compiled  # type: ignore[attr-defined]
    except ImportError:
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"

_SAFE = 2**62


def _fits_int64(n, caps, costs, max_amount) -> bool:
    if not caps:
        return True
    cmax = max(abs(c) for c in costs) if costs else 0
    flow_bound = min(max_amount, sum(caps))
    # distances and potentials stay below n * max cost; total cost below flow * n * max cost
    return max(caps) < _SAFE and max_amount < _SAFE and (cmax + 1) * (n + 1) * (flow_bound + 1) < _SAFE


def min_cost_flow(n, tails, heads, caps, costs, s, t, max_amount, backend: str | None = None):
    """Min-cost flow of value ``min(max_amount, max flow)`` on integer data.

    Returns ``(flow_value, total_cost, arc_flows)``.
    """
    if any(c < 0 for c in costs):
        raise ValueError("kernel requires nonnegative arc costs")
    if any(c < 0 for c in caps):
        raise ValueError("kernel requires nonnegative capacities")
    use = backend or BACKEND
    if use == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernel is not available")
        if _fits_int64(n, caps, costs, max_amount):
            return _compiled.min_cost_flow(n, tails, heads, caps, costs, s, t, max_amount)
    return _kernel_py.min_cost_flow(n, tails, heads, caps, costs, s, t, max_amount)
