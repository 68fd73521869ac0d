"""cyclonecast: two-stage tropical cyclone forecasting over HURDAT2 data.

Stage one regresses next-step cyclone features (wind, pressure, displacement
length and clockwise-from-north direction) with gradient boosting over
sliding windows; stage two classifies the storm status from the regressed
features with random forest, SVM, and MLP classifiers, with SMOTE balancing
the training labels.
"""

from .ensemble import GradientBoostingRegressor, RandomForestClassifier
from .hurdat2 import (
    Hurdat2ParseError,
    KNOWN_STATUS_CODES,
    StormHeader,
    StormTrack,
    TrackPoint,
    parse_coordinate,
    parse_data_line,
    parse_file,
    parse_path,
)
from .metrics import classification_report, confusion_matrix, mae, r_squared
from .mlp import MLPClassifier
from .preprocess import (
    ConstantFeatureError,
    Displacement,
    FixedMinMaxScaler,
    StandardScaler,
    angle_between,
    clean,
    displacement_from,
    minmax_normalize,
    standardize,
)
from .smote import SMOTE
from .svm import BinarySVM, OneVsRestSVM
from .tree import DecisionTreeClassifier, DecisionTreeRegressor
from .windows import (
    SplitConfig,
    build_classification_windows,
    build_regression_windows,
    holdout_storm,
    split_indices,
)

__version__ = "0.1.0"

__all__ = [
    "BinarySVM",
    "ConstantFeatureError",
    "DecisionTreeClassifier",
    "DecisionTreeRegressor",
    "Displacement",
    "FixedMinMaxScaler",
    "GradientBoostingRegressor",
    "Hurdat2ParseError",
    "KNOWN_STATUS_CODES",
    "MLPClassifier",
    "OneVsRestSVM",
    "RandomForestClassifier",
    "SMOTE",
    "SplitConfig",
    "StandardScaler",
    "StormHeader",
    "StormTrack",
    "TrackPoint",
    "angle_between",
    "build_classification_windows",
    "build_regression_windows",
    "classification_report",
    "clean",
    "confusion_matrix",
    "displacement_from",
    "holdout_storm",
    "mae",
    "minmax_normalize",
    "parse_coordinate",
    "parse_data_line",
    "parse_file",
    "parse_path",
    "r_squared",
    "split_indices",
    "standardize",
]
