"""Publication-style figures for swarm-defense CSV outputs."""

__version__ = "0.1.0"

from .figures import FigureSpec, SchemaError, render, render_hamiltonian, render_sweep, render_trajectory
