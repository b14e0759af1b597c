"""Example-based motion synthesis by generative patch matching."""

from .motion import Joint, MotionFeatures, Skeleton, WorldMotion, from_features, to_features
from .synthesis import SynthesisConfig, synthesize

__version__ = "0.1.0"
