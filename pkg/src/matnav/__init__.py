"""matnav: literature-driven screening of high-Debye-temperature materials.

Three-stage pipeline: evidence extraction from a text corpus, property-table
retrieval plus predictor training, and candidate generation with stability
filtering. See the pipeline subpackage for the CLI and HTTP service.
"""

__version__ = "0.1.0"

from .core import Composition, Lattice, Site, Structure, format_formula, parse_formula
from .errors import MatnavError

__all__ = [
    "__version__",
    "Composition",
    "Lattice",
    "Site",
    "Structure",
    "format_formula",
    "parse_formula",
    "MatnavError",
]
