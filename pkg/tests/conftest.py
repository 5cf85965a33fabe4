import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bodylink import se3
from bodylink.arm import JointDescriptor, SerialArm
from bodylink.config import default_config_path, load_session_config
from bodylink.se3 import Transform


@pytest.fixture(scope="session")
def session_cfg():
    return load_session_config(default_config_path())


@pytest.fixture(scope="session")
def default_arm(session_cfg):
    return session_cfg.arm


@pytest.fixture(scope="session")
def servo_cfg(session_cfg):
    return session_cfg.servo


def _translation(z: float) -> Transform:
    return Transform(np.eye(3), np.array([0.0, 0.0, z]))


@pytest.fixture(scope="session")
def planar_arm():
    """7-joint arm whose first two z-joints form a planar 2-link pair in x-y;
    the remaining five joints sit at the effector with zero-length links."""
    z = np.array([0.0, 0.0, 1.0])
    l1, l2 = 0.5, 0.4
    joints = (
        JointDescriptor(se3.identity(), z, (-3.0, 3.0)),
        JointDescriptor(Transform(np.eye(3), np.array([l1, 0.0, 0.0])), z, (-3.0, 3.0)),
        JointDescriptor(Transform(np.eye(3), np.array([l2, 0.0, 0.0])), z, (-3.0, 3.0)),
        JointDescriptor(se3.identity(), z, (-3.0, 3.0)),
        JointDescriptor(se3.identity(), z, (-3.0, 3.0)),
        JointDescriptor(se3.identity(), z, (-3.0, 3.0)),
        JointDescriptor(se3.identity(), z, (-3.0, 3.0)),
    )
    return SerialArm(joints, se3.identity(), se3.identity(), joint_velocity_limit=5.0, name="planar2")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
