"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the numpy
fallback.  Set ``QUASIDP_PURE_PYTHON=1`` to force the fallback (used by the
benchmark and by tests that exercise both backends).
"""

import os

from . import fallback

if os.environ.get("QUASIDP_PURE_PYTHON"):
    _impl = fallback
    BACKEND = "python"
else:
    try:
        from . import _core as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = fallback
        BACKEND = "python"

optimality_apply = _impl.optimality_apply
policy_apply = _impl.policy_apply
policy_power = _impl.policy_power
policy_series = _impl.policy_series
value_iterate = _impl.value_iterate
