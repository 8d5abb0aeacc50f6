"""knotforge: combinatorial knot diagrams, Reidemeister move search,
triangulation rewriting and exact move-count bookkeeping.

The package is pure Python and exact: all geometry runs on
fractions.Fraction, all searches are deterministic, and every numbered
size bound the constructions promise is asserted while they run.
"""

__version__ = "0.1.0"

from . import census  # noqa: F401
from . import diagram  # noqa: F401
from . import reidemeister  # noqa: F401
from . import towers  # noqa: F401
