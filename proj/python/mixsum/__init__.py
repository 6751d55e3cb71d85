"""Posterior summarization of Bayesian mixture models.

Thin python surface over the C++ core: posterior draw bundles, EM summary
fits, discrepancy-based dimension selection, posterior projection with
credible ribbons, cluster allocations with uncertainty, and scoring.
"""

from mixsum._core import *  # noqa: F401,F403
from mixsum._core import __version__  # noqa: F401
