"""hitlab: finite-horizon experiments on hitting times of topological dynamical systems"""

__version__ = "0.1.0"
