# datatypes.py

from __future__ import annotations

from typing import Callable
from typing import Union

import numpy as np
import numpy.typing as npt

from ldcross.models.kernels import BrownianMotion
from ldcross.models.kernels import OrnsteinUhlenbeck
from ldcross.models.kernels import Scaled
from ldcross.models.priors import Degenerate
from ldcross.models.priors import GaussianPerturbation
from ldcross.models.priors import UniformSupport

FloatArray = npt.NDArray[np.float64]

ArrayLike = Union[float, FloatArray]

BaseKernel = Union[BrownianMotion, OrnsteinUhlenbeck]

KernelModel = Union[BrownianMotion, OrnsteinUhlenbeck, Scaled]

PriorModel = Union[Degenerate, UniformSupport, GaussianPerturbation]

SpeedFunction = Callable[[int], float]
