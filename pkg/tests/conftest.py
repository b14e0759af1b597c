import numpy as np
import pytest

from genmm.fixtures import fixture, humanoid_skeleton, walk_motion
from genmm.motion import Joint, Skeleton, to_features

FIVE_LENGTHS = (120, 150, 170, 200, 220)


@pytest.fixture(scope="session")
def walk():
    """The bundled 24-joint, 500-frame fixture as (skeleton, world motion, features)."""
    sk, w = fixture(24, 500, 1)
    return sk, w, to_features(w, sk)


@pytest.fixture(scope="session")
def short_walk():
    sk, w = fixture(24, 120, 3)
    return sk, w, to_features(w, sk)


@pytest.fixture(scope="session")
def five_exemplars():
    sk = humanoid_skeleton(24)
    feats = [to_features(walk_motion(sk, L, seed), sk)
             for seed, L in zip(range(1, 6), FIVE_LENGTHS)]
    return sk, feats


@pytest.fixture
def chain2():
    return Skeleton((Joint("root", None, (0.0, 0.0, 0.0)), Joint("tip", 0, (0.0, 1.0, 0.0))))


def random_quats(rng, n):
    q = rng.normal(size=(n, 4))
    return q / np.linalg.norm(q, axis=-1, keepdims=True)
