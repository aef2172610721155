"""
Concentric ellipse fitting

Algebraic estimators (LS, O'Leary, Taubin, Semi-Hyper, Hyper) for K
ellipses sharing center and tilt, their second-order error analysis and a
Monte Carlo benchmark harness.
"""

__version__ = "1.0.0"
