"""Event simulation, coincidence matching and tomography from event streams."""
from .analysis import (
    ConditionedHistogram,
    DegenerateFitError,
    FringeFit,
    MissingSettingsError,
    estimate_correlators,
    fit_fringes,
    grid_bins,
    histogram_conditioned,
)
from .events import (
    ALL_SETTINGS,
    DETECTORS,
    FORMAT_VERSION,
    DetectionEvent,
    EventFormatError,
    EventStream,
)
from .matching import (
    DEFAULT_WINDOW_PS,
    CoincidencePair,
    MatchResult,
    UnsortedStreamError,
    match_coincidences,
)
from .simulate import RunConfig, simulate_events
