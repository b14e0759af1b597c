"""Time synthesis of 1000 frames from the 500-frame, 24-joint fixture."""

import argparse
import time

from genmm.fixtures import fixture
from genmm.motion import from_features, to_features
from genmm.synthesis import SynthesisConfig, synthesize


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--frames", type=int, default=500)
    ap.add_argument("--length", type=int, default=1000)
    ap.add_argument("--joints", type=int, default=24)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    sk, w = fixture(args.joints, args.frames, 1)
    times = []
    for seed in range(args.repeats):
        t0 = time.perf_counter()
        log = []
        out = synthesize([to_features(w, sk)], sk,
                         config=SynthesisConfig(length=args.length, seed=seed), log=log)
        from_features(out, sk)
        times.append(time.perf_counter() - t0)
    print(f"stages: {[r.frames for r in log]}")
    print(f"per-stage seconds (last run): {[round(r.seconds, 4) for r in log]}")
    print(f"wall clock over {args.repeats} runs: min {min(times):.3f}s  max {max(times):.3f}s")


if __name__ == "__main__":
    main()
