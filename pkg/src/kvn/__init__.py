"""
Koopman–von Neumann laboratory: classical, quantum and hybrid dynamics on grids.
"""

__version__ = "0.1.0"
