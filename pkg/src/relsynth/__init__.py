"""Symbolic controller synthesis with relational interfaces.

Finite abstractions of continuous control systems are encoded as
predicates over bit vectors, manipulated through a small interface
algebra (composition, hiding, refinement, coarsening), and fed to
reach/safe game solvers that produce winning regions and controllers.
"""

from relsynth.bdd import BDD, BddError, CapacityError

__version__ = "0.1.0"

__all__ = ["BDD", "BddError", "CapacityError", "__version__"]
