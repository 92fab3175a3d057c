"""
Control landscape explorer: certificates of trap-free landscapes for nonlinear
single-input systems, the D-MORPH homotopy flow on controls, and batch studies
of random planar trig systems.
"""

__version__ = "1.0.0"
