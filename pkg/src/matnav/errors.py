"""Exception types raised across the package.

Everything derives from :class:`MatnavError` so callers can catch the whole
family at pipeline boundaries while tests assert on the precise class.
"""


class MatnavError(Exception):
    """Base class for all package errors."""


# --- composition / element data ---------------------------------------------

class UnknownElement(MatnavError):
    """A chemical symbol is not one of the 118 recognized elements."""


class MalformedFormula(MatnavError):
    """Formula text cannot be parsed (unbalanced parens, dangling digits, ...)."""


class MissingMass(MatnavError):
    """No tabulated atomic mass for an element required by a density calculation."""


class MissingRadius(MatnavError):
    """No tabulated covalent radius for an element in a distance check."""


class MissingOxidationStates(MatnavError):
    """No oxidation-state entry for an element in a charge-neutrality check."""


class MissingElementData(MatnavError):
    """A featurized property is untabulated for an element of the composition."""


# --- CIF ---------------------------------------------------------------------

class CifError(MatnavError):
    """Base class for CIF parse failures; the parser never raises anything else."""


class MissingCellTag(CifError):
    """A required _cell_* tag is absent."""


class MissingAtomLoop(CifError):
    """No atom-site loop with fractional coordinates was found."""


class NumericParse(CifError):
    """A tag or loop field expected to be numeric could not be parsed."""


class SymmetryUnsupported(CifError):
    """The file declares symmetry operators beyond the identity."""


# --- evidence ----------------------------------------------------------------

class InvalidWindow(MatnavError):
    """Chunking window/overlap combination is out of range."""


class EmptyCorpus(MatnavError):
    """Ranking was asked to score an empty chunk list."""


class SchemaViolation(MatnavError):
    """A property-record fragment does not match the record schema."""


class InsufficientData(MatnavError):
    """Too few records/values for a statistical operation."""


# --- fetcher -----------------------------------------------------------------

class NetworkError(MatnavError):
    """Transport-level failure or 5xx from the materials database."""


class AuthError(MatnavError):
    """Missing or rejected database credential."""


class DecodeError(MatnavError):
    """Database payload is not the documented shape."""


class Timeout(MatnavError):
    """A retrieval routine exceeded its wall-clock budget."""


class BudgetExhausted(MatnavError):
    """The generate/validate/repair loop ran out of retries.

    Carries the accumulated per-attempt diagnostics.
    """

    def __init__(self, message, diagnostics):
        super().__init__(message)
        self.diagnostics = list(diagnostics)


# --- elasticity --------------------------------------------------------------

class SingularTensor(MatnavError):
    """Stiffness matrix is not invertible to the required conditioning."""


class NonPositiveModulus(MatnavError):
    """A derived bulk or shear modulus is not strictly positive."""


class NonPositiveDensity(MatnavError):
    """Density input to a sound-velocity calculation is not positive."""


# --- prediction --------------------------------------------------------------

class DegenerateFeatures(MatnavError):
    """All feature columns have zero variance; nothing to regress on."""


class SchemaMismatch(MatnavError):
    """Model and feature vector disagree on the feature schema."""


class EmptyTestSet(MatnavError):
    """Evaluation was asked to score an empty dataset."""


# --- stability ---------------------------------------------------------------

class InfeasibleComposition(MatnavError):
    """Query composition lies outside the simplex spanned by the references."""


class MissingEnergy(MatnavError):
    """A candidate reached the hull filter without an assigned formation energy."""


# --- generation / pipeline ---------------------------------------------------

class NoPrototypes(MatnavError):
    """Candidate generation was invoked with an empty prototype list."""


class EmptySeries(MatnavError):
    """A distribution summary was asked for with no values in a series."""


class StageOrderError(MatnavError):
    """A pipeline stage was started before its predecessor finished."""


class StageBusy(MatnavError):
    """A stage is already running for this run."""


class NotReady(MatnavError):
    """A result was requested before the producing stage completed."""
