"""Kernel dispatch: compiled int64 core when importable and safe, else Python.

Set ``LINERECOURSE_PURE=1`` to force the pure-Python kernels.  The compiled
kernels are only used when a conservative magnitude bound shows that no
intermediate value can leave the int64 range; otherwise the arbitrary
precision Python kernels run on the same data.
"""

from __future__ import annotations

import os

import numpy as np

from linerecourse import _pykernels
from linerecourse._pykernels import NegativeCycleError, PotentialError, hop_base

try:  # pragma: no cover - depends on the build
    if os.environ.get("LINERECOURSE_PURE"):
        raise ImportError("pure kernels requested")
    from linerecourse import _ckernels
except ImportError:  # pragma: no cover
    _ckernels = None

HAVE_COMPILED = _ckernels is not None
INT64_SAFE = 1 << 62

__all__ = [
    "HAVE_COMPILED",
    "NegativeCycleError",
    "PotentialError",
    "band_dp",
    "dijkstra_search",
    "hop_base",
    "spfa_search",
]


def backend_name() -> str:
    return "cython" if HAVE_COMPILED else "python"


def _as_i64(x):
    return x if isinstance(x, np.ndarray) and x.dtype == np.int64 else np.asarray(x, dtype=np.int64)


def _span(spos, rpos) -> int:
    lo = min(min(spos), min(rpos))
    hi = max(max(spos), max(rpos))
    return int(hi) - int(lo)


def dijkstra_fits(n: int, m: int, span: int, a: int, b: int, pot_max: int) -> bool:
    H = hop_base(n, m)
    arc = (a + b) * span + 2 * pot_max
    bound = ((2 * n + 2) * arc + 2 * pot_max + 1) * (H + 1)
    return bound < INT64_SAFE


def dijkstra_search(spos, rpos, pi_s, pi_r, s_match, r_match, s_alive, src, a, b, want_si,
                    force_python=False):
    """Dispatch to the compiled or Python Dijkstra kernel (see ``_pykernels``).

    When the compiled kernel runs, ``pi_s``/``pi_r`` must be int64 arrays
    (updated in place); Python lists are updated in place by the fallback.
    """
    if HAVE_COMPILED and not force_python and isinstance(pi_s, np.ndarray):
        return _ckernels.dijkstra_search(spos, rpos, pi_s, pi_r, s_match, r_match, s_alive,
                                         src, a, b, want_si)
    return _pykernels.dijkstra_search(spos, rpos, pi_s, pi_r, s_match, r_match, s_alive,
                                      src, a, b, want_si)


def spfa_search(spos, rpos, s_match, r_match, s_alive, src, a, b, force_python=False):
    n, m = len(rpos), len(spos)
    if HAVE_COMPILED and not force_python:
        H = hop_base(n, m)
        if (2 * n + 2) * (a + b) * _span(spos, rpos) * (H + 1) < INT64_SAFE:
            return _ckernels.spfa_search(_as_i64(spos), _as_i64(rpos), _as_i64(s_match),
                                         _as_i64(r_match), np.asarray(s_alive, dtype=np.uint8),
                                         src, a, b)
    return _pykernels.spfa_search(list(map(int, spos)), list(map(int, rpos)),
                                  list(map(int, s_match)), list(map(int, r_match)),
                                  list(map(int, s_alive)), src, a, b)


def band_dp(S, R, force_python=False):
    """Optimal non-crossing matching of sorted integer lists (see ``_pykernels``)."""
    if HAVE_COMPILED and not force_python and len(R) > 0:
        if len(R) * _span(S, R) < INT64_SAFE:
            return _ckernels.band_dp(_as_i64(S), _as_i64(R))
    return _pykernels.band_dp(list(S), list(R))
