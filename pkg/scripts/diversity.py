"""Set diversity over seeded samples, against a frame-shuffled baseline's coverage."""

import argparse

from genmm import metrics
from genmm.fixtures import fixture
from genmm.motion import from_features, to_features
from genmm.synthesis import SynthesisConfig, synthesize


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=20)
    ap.add_argument("--frames", type=int, default=500)
    args = ap.parse_args()

    sk, w = fixture(24, args.frames, 1)
    f = to_features(w, sk)
    outs = [synthesize([f], sk, config=SynthesisConfig(seed=s)) for s in range(args.samples)]
    rep = metrics.evaluate(outs, [f], generated_world=[from_features(o, sk) for o in outs],
                           exemplar_world=w)
    shuffled = metrics.coverage(metrics.frame_shuffled(f, f.frames), [f])
    for k, v in rep.to_dict().items():
        print(f"{k}: {v}")
    print(f"shuffled-baseline coverage: {shuffled:.3f}")


if __name__ == "__main__":
    main()
