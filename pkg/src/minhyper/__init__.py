"""Periodic minimal hypersurfaces in R^n.

Exact rational geometry for the symmetry claims (:mod:`.polytope`,
:mod:`.isometry`), a finite-difference minimal surface equation solver
(:mod:`.msesolver`), catenoid barriers (:mod:`.catenoid`) and meshed
constructions of the P, D and Scherk type surfaces (:mod:`.surfaces`).
"""

__version__ = "0.1.0"
