"""Dynamic information-flow policies checked over exhaustive trace tables."""
from .labels import Lattice, leq, flows_to
from .lang import run, try_run, parse_program, show_program

__version__ = "0.1.0"

__all__ = ["Lattice", "leq", "flows_to", "run", "try_run", "parse_program", "show_program", "__version__"]
