"""Figures and tables rendered from ekflow CSV/JSON outputs.

This package never recomputes physics: every figure is a pure function of
the delimited files a solver run leaves behind, so a plotting bug can never
corrupt science outputs.  Styles are fixed and image metadata carries no
timestamps, keeping renders reproducible byte for byte.
"""

__version__ = "0.1.0"
