"""Pattern-adapted wavelets and two-phase R-peak detection for ECG."""

from ._core import *  # noqa: F401,F403
from ._core import QrsAdaptError, __doc__  # noqa: F401

__version__ = "0.1.0"
