from . import fixtures, plot, run

__all__ = ["fixtures", "plot", "run"]
