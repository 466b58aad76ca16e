"""1D equilibrium band solver for nitride heterostructures."""

from .coupled import DesignAxis, SweepPoint, solve_self_consistent, sweep_design
from .materials import MaterialParams, MaterialTable
from .mesh import Mesh, discretize
from .poisson import BandSolution, charge_balance, solve_poisson_equilibrium
from .schrodinger import solve_schrodinger
from .stack import (LayerSpec, StackProblem, Statistics, default_stack, load_stack, save_stack,
                    stack_from_dict, stack_to_dict)

__all__ = [
    "BandSolution", "DesignAxis", "LayerSpec", "MaterialParams", "MaterialTable", "Mesh",
    "StackProblem", "Statistics", "SweepPoint", "charge_balance", "default_stack", "discretize",
    "load_stack", "save_stack", "solve_poisson_equilibrium", "solve_schrodinger",
    "solve_self_consistent", "stack_from_dict", "stack_to_dict", "sweep_design",
]
