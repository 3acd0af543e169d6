from __future__ import annotations

from enum import Enum

# Gravity added inside the rotation of the accelerometer model; a static, level
# sensor therefore reads +STANDARD_GRAVITY on its z axis.
STANDARD_GRAVITY = 9.81
GRAVITY_NORM_RANGE = (9.0, 10.5)

QUATERNION_NORM_TOL = 1e-9
TIME_TOL = 1e-9

# Maximum accepted gap between samples, in nominal sample periods
DEFAULT_MAX_GAP_FACTOR = 5.0

# DTW detection
DEFAULT_SLICE_LEN = 40
DEFAULT_TEMPLATE_LEN = 10
DEFAULT_TEMPLATE_COUNT = 10
DEFAULT_GYRO_WEIGHT = 1.0
CALIBRATION_MARGIN = 1.2
CALIBRATION_FLOOR = 1e-6
TEMPLATE_LIBRARY_VERSION = 1

# Relative error lengths in metres
DEFAULT_RELATIVE_LENGTHS = (7.0, 14.0, 21.0, 28.0, 35.0)

PIPELINE_SCHEMA_VERSION = 1

THREADS_ENV = "IMU_GUARD_THREADS"

IMU_ACC_COLUMNS = ("ax", "ay", "az")
IMU_GYRO_COLUMNS = ("gx", "gy", "gz")
TUM_COLUMNS = ("t", "x", "y", "z", "qx", "qy", "qz", "qw")

AXIS_INDEX = {"x": 0, "y": 1, "z": 2}


class IntegrationMethod(str, Enum):
    """Discretisation of the strapdown equations."""

    EULER = "euler"
    MIDPOINT = "midpoint"


class DetectorMode(str, Enum):
    """Glitch detector families."""

    NONE = "none"
    THRESHOLD = "threshold"
    DTW = "dtw"


class MitigationMode(str, Enum):
    """Replacement strategies for flagged measurements."""

    NONE = "none"
    CLAMP = "clamp"
    MOVING_AVERAGE = "moving_average"
    TEMPLATE_SUBSTITUTION = "template_substitution"


class AlignmentMode(str, Enum):
    """Trajectory alignment used before computing absolute errors."""

    SE3 = "se3"
    SIM3 = "sim3"
    POSYAW = "posyaw"
    NONE = "none"


class Verdict(str, Enum):
    """Per-record outcome of a detector."""

    NORMAL = "normal"
    ABNORMAL = "abnormal"
    UNPROCESSED = "unprocessed"


class TrajectoryShape(str, Enum):
    """Analytic paths available to the simulator."""

    ELLIPSE3D = "ellipse3d"
    LINE = "line"
    FIGURE_EIGHT = "figure_eight"
