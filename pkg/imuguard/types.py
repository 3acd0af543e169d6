from __future__ import annotations

import numpy as np
from jaxtyping import Bool, Float, Integer

Vector3 = Float[np.ndarray, "3"]
QuaternionArray = Float[np.ndarray, "4"]

Timestamps = Float[np.ndarray, " sample"]
AccelerationArray = Float[np.ndarray, "sample 3"]
AngularRateArray = Float[np.ndarray, "sample 3"]
PositionArray = Float[np.ndarray, "sample 3"]
QuaternionsArray = Float[np.ndarray, "sample 4"]
RotationMatrices = Float[np.ndarray, "sample 3 3"]

SeriesArray = Float[np.ndarray, "row channel"]
TemplateStack = Float[np.ndarray, "template row channel"]
CostMatrix = Float[np.ndarray, "row_p row_q"]

FaultMask = Bool[np.ndarray, " sample"]
IndexArray = Integer[np.ndarray, " index"]
