"""Write the bundled procedural BVH fixtures into a directory."""

import argparse
import pathlib

from genmm.fixtures import fixture_bvh

LENGTHS = (120, 150, 170, 200, 220)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out", nargs="?", default="fixtures")
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "walk.bvh").write_bytes(fixture_bvh(24, 500, 1))
    for seed, L in zip(range(1, 6), LENGTHS):
        (out / f"walk_{seed}.bvh").write_bytes(fixture_bvh(24, L, seed))
    print(f"wrote {len(LENGTHS) + 1} files to {out}")


if __name__ == "__main__":
    main()
