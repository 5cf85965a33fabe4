"""bodylink: desk-scale teleoperation workbench.

Rigid-transform algebra, a 7-DOF resolved-rate arm servo, three control modes
(joystick velocity, body-link position, hybrid dual), a reach-trial protocol
with deterministic event logs, scripted operators, metrics with rank
statistics, and a networked live-session service.
"""

__version__ = "0.1.0"

from .kernels import BACKEND as kernel_backend  # noqa: F401
