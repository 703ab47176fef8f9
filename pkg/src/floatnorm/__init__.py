"""Floating-normalization toolkit for compact-model parameter extraction.

Trains cascaded forward/inverse dense networks under per-instance local
min-max normalization so device parameters can be extracted within
user-defined ranges, validated against a built-in analytic curve simulator.
"""

__version__ = "0.1.0"
