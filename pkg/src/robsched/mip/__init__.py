"""Mixed-integer programming: model container, simplex, branch-and-bound, the adversary program."""
from .bnb import solve_mip
from .program import MipSolution, MixedIntegerProgram
from .simplex import solve_lp

__all__ = ["MixedIntegerProgram", "MipSolution", "solve_lp", "solve_mip"]
