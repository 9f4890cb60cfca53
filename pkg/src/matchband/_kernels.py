"""Compiled-kernel selection: prefer the Cython extension, fall back to pure.

Set MATCHBAND_NO_SPEEDUPS=1 to force the pure-numpy implementations.
"""
from __future__ import annotations

import os

pair_elim_kernel = None
escb_kernel = None
HAVE_SPEEDUPS = False

if not os.environ.get("MATCHBAND_NO_SPEEDUPS"):
    try:
        from ._speedups import escb_steps as escb_kernel
        from ._speedups import pair_elim_regret as pair_elim_kernel

        HAVE_SPEEDUPS = True
    except ImportError:
        pair_elim_kernel = None
        escb_kernel = None
        HAVE_SPEEDUPS = False
