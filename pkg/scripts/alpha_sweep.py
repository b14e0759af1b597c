"""Coverage and patch distance as the completeness knob varies, on the five-walk set."""

import argparse

import numpy as np

from genmm import metrics
from genmm.fixtures import humanoid_skeleton, walk_motion
from genmm.motion import to_features
from genmm.synthesis import SynthesisConfig, synthesize

LENGTHS = (120, 150, 170, 200, 220)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alphas", type=float, nargs="+", default=[0.001, 0.01, 0.1, 1.0, 10.0, 100.0])
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--length", type=int, default=400)
    args = ap.parse_args()

    sk = humanoid_skeleton(24)
    feats = [to_features(walk_motion(sk, L, s), sk) for s, L in zip(range(1, 6), LENGTHS)]
    print(f"{'alpha':>8} {'coverage':>9} {'local':>9} {'global':>9}")
    for alpha in args.alphas:
        cov, loc, glo = [], [], []
        for seed in range(args.seeds):
            out = synthesize(feats, sk, config=SynthesisConfig(alpha=alpha, length=args.length,
                                                               seed=seed))
            cov.append(metrics.coverage(out, feats))
            loc.append(metrics.patch_distance(out, feats))
            glo.append(metrics.patch_distance(out, feats, metrics.GLOBAL_WINDOW))
        print(f"{alpha:8.3g} {np.mean(cov):9.3f} {np.mean(loc):9.2e} {np.mean(glo):9.2e}")


if __name__ == "__main__":
    main()
