"""Command-line front end.

Exit codes: 0 ok, 2 usage, 3 data error, 4 internal error.
"""

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from dataclasses import asdict
from fractions import Fraction

from . import bvh, metrics
from .errors import GenMMError, InvalidInputError
from .fixtures import fixture_bvh
from .motion import from_features, to_features
from .patching import default_partition, load_partition
from .synthesis import (CompletionConstraint, KeyframeConstraint, LoopConstraint, SynthesisConfig,
                        schedule_for, synthesize, synthesize_reassembly)

log = logging.getLogger("genmm")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 2, 3, 4

SYNTH_COMMANDS = ("synth", "complete", "keyframe", "loop", "reassemble")


class UsageError(Exception):
    pass


def _ratio(text):
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a ratio: {text!r}") from None


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _load_json(path_or_text):
    if path_or_text is None:
        return None
    if os.path.exists(path_or_text):
        with open(path_or_text) as f:
            return json.load(f)
    try:
        return json.loads(path_or_text)
    except json.JSONDecodeError as e:
        raise InvalidInputError(f"cannot read JSON from {path_or_text!r}: {e}") from None


def parse_length(text, first_frames):
    text = str(text).strip()
    if text.endswith("x"):
        try:
            factor = float(text[:-1])
        except ValueError:
            raise UsageError(f"bad --length {text!r}") from None
        return int(round(factor * first_frames))
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"bad --length {text!r}") from None


def _add_synth_args(p):
    p.add_argument("--input", nargs="+", help="exemplar BVH file(s)")
    p.add_argument("--length", help="output frames, or Nx times the first input "
                   "(default: first input's length; the given motion's for completion)")
    p.add_argument("--patch-size", type=int, default=11)
    p.add_argument("--k", type=int, default=4, help="coarsest exemplar length in patch sizes")
    p.add_argument("--alpha", type=float, default=0.01, help="completeness knob")
    p.add_argument("--ratio", type=_ratio, default=4 / 3, help="pyramid ratio, e.g. 4/3")
    p.add_argument("--iters", type=int, default=5, help="matching iterations per stage")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-sigma", type=float, default=1.0)
    p.add_argument("--partition", help="JSON partition file")
    p.add_argument("--scale", type=float, default=1.0, help="multiply BVH lengths on load")
    p.add_argument("--weights", help="JSON channel-group weights")
    p.add_argument("--feet", nargs="*", help="contact joint names (default: *foot*/*toe*)")
    p.add_argument("--contact-threshold", type=float,
                   help="contact speed threshold per frame (default 0.2 leg lengths/s)")
    p.add_argument("--out", help="output BVH path")
    p.add_argument("--manifest", help="manifest JSON path (default <out>.manifest.json)")
    p.add_argument("--from-manifest", help="replay a previous run's manifest")
    p.add_argument("--given", help="completion: BVH holding the given partial motion")
    p.add_argument("--given-part", help="completion: partition part to keep fixed")
    p.add_argument("--keyframes", help="JSON {coarse_index: frame | {input, frame}}")
    p.add_argument("--loop", action="store_true", help="pin last pose to first pose")
    p.add_argument("--map", help="reassembly: JSON {part: input | {input, joints}}")


def build_parser():
    parser = argparse.ArgumentParser(prog="genmm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--threads", type=int, default=None,
                        help="cap numeric threads (0 = auto; env GENMM_THREADS)")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "synth": "synthesize novel motion from exemplars",
        "complete": "complete a partial-body motion",
        "keyframe": "synthesize through pinned key frames",
        "loop": "synthesize a seamlessly looping motion",
        "reassemble": "combine parts drawn from different exemplars",
    }
    for name in SYNTH_COMMANDS:
        _add_synth_args(sub.add_parser(name, help=helps[name]))

    m = sub.add_parser("metrics", help="evaluate generated motions against exemplars")
    m.add_argument("--generated", nargs="+", required=True)
    m.add_argument("--exemplar", nargs="+", required=True)
    m.add_argument("--local", type=int, default=metrics.LOCAL_WINDOW)
    m.add_argument("--global", dest="global_", type=int, default=metrics.GLOBAL_WINDOW)
    m.add_argument("--threshold", type=float, default=metrics.COVERAGE_THRESHOLD)
    m.add_argument("--scale", type=float, default=1.0)
    m.add_argument("--feet", nargs="*")
    m.add_argument("--contact-threshold", type=float)
    m.add_argument("--out")

    f = sub.add_parser("fixture", help="write a deterministic procedural BVH")
    f.add_argument("--joints", type=int, default=24)
    f.add_argument("--frames", type=int, default=500)
    f.add_argument("--seed", type=int, default=1)
    f.add_argument("--fps", type=float, default=30.0)
    f.add_argument("--out", help="output path (default stdout)")
    return parser


def _load_inputs(paths, scale, feet, threshold):
    loaded = []
    for path in paths:
        sk, w, fps = bvh.read_bvh(path, scale=scale, foot_names=feet)
        loaded.append((sk, to_features(w, sk, threshold, fps), fps))
    return loaded


def _resolve_keyframes(mapping, loaded):
    frames = {}
    for key, src in mapping.items():
        if isinstance(src, dict):
            i, f = int(src.get("input", 0)), int(src["frame"])
        else:
            i, f = 0, int(src)
        if not 0 <= i < len(loaded):
            raise InvalidInputError(f"keyframe {key}: no input {i}")
        feats = loaded[i][1]
        if not 0 <= f < feats.frames:
            raise InvalidInputError(f"keyframe {key}: frame {f} outside input {i}")
        frames[int(key)] = feats.rows[f].copy()
    return frames


def _run_synth(args, argv_record):
    mode = args.command
    if not args.input:
        raise UsageError("--input is required")
    if not args.out:
        raise UsageError("--out is required")
    loaded = _load_inputs(args.input, args.scale, args.feet, args.contact_threshold)
    skel, first, fps = loaded[0]
    given = None
    if mode == "complete" or args.given:
        if not args.given or not args.given_part:
            raise UsageError("completion needs --given and --given-part")
        given = bvh.read_bvh(args.given, scale=args.scale, foot_names=args.feet)
    if args.length is None:
        F = given[1].frames if given is not None else first.frames
    else:
        F = parse_length(args.length, first.frames)
    config = SynthesisConfig(patch_size=args.patch_size, K=args.k, alpha=args.alpha,
                             iterations=args.iters, ratio=args.ratio, length=F, seed=args.seed,
                             noise_sigma=args.noise_sigma, weights=_load_json(args.weights))
    partition = (load_partition(_load_json(args.partition), skel) if args.partition
                 else default_partition(skel))

    constraints = []
    if given is not None:
        gsk, gw, gfps = given
        if gsk.names != skel.names:
            raise InvalidInputError("--given skeleton differs from the first input's")
        try:
            part = partition.part(args.given_part)
        except KeyError:
            raise InvalidInputError(f"no part named {args.given_part!r} in the partition") from None
        constraints.append(CompletionConstraint(part, to_features(gw, gsk, args.contact_threshold, gfps)))
    if mode == "keyframe" or args.keyframes:
        if not args.keyframes:
            raise UsageError("keyframe mode needs --keyframes")
        constraints.append(KeyframeConstraint(_resolve_keyframes(_load_json(args.keyframes), loaded)))
    if mode == "loop" or args.loop:
        constraints.append(LoopConstraint())

    stages = []
    t0 = time.perf_counter()
    if mode == "reassemble" or args.map:
        if not args.map:
            raise UsageError("reassembly needs --map")
        part_map = _load_json(args.map)
        sources = [(sk, feats) for sk, feats, _ in loaded]
        result = synthesize_reassembly(sources, skel, partition, part_map, config, constraints,
                                       log=stages)
    else:
        for sk, _, _ in loaded[1:]:
            if sk.names != skel.names:
                raise InvalidInputError("all inputs must share one skeleton (use reassemble)")
        result = synthesize([feats for _, feats, _ in loaded], skel, partition, config,
                            constraints, log=stages)
    elapsed = time.perf_counter() - t0

    out_bytes = bvh.serialize_bvh(skel, from_features(result, skel), fps, scale=args.scale)
    with open(args.out, "wb") as f:
        f.write(out_bytes)

    manifest = {
        "command": mode,
        "args": argv_record,
        "inputs": [{"path": p, "sha256": _sha256(p)} for p in args.input],
        "seed": args.seed,
        "config": asdict(config),
        "schedule": asdict(schedule_for([feats for _, feats, _ in loaded], config)),
        "stages": [asdict(s) for s in stages],
        "seconds": elapsed,
        "output": args.out,
        "output_sha256": hashlib.sha256(out_bytes).hexdigest(),
    }
    manifest_path = args.manifest or args.out + ".manifest.json"
    with open(manifest_path, "w") as f:
        json.dump(manifest, f, indent=2)
    log.info("wrote %s (%d frames) in %.3fs", args.out, result.frames, elapsed)
    return EXIT_OK


def _replay(args, parser):
    with open(args.from_manifest) as f:
        manifest = json.load(f)
    for entry in manifest["inputs"]:
        if _sha256(entry["path"]) != entry["sha256"]:
            raise InvalidInputError(f"input {entry['path']} changed since the manifest was written")
    recorded = dict(manifest["args"])
    if args.out:
        recorded["out"] = args.out
        recorded["manifest"] = args.manifest
    ns = argparse.Namespace(**recorded)
    ns.command = manifest["command"]
    ns.from_manifest = None
    return _run_synth(ns, recorded)


def _run_metrics(args):
    gen = _load_inputs(args.generated, args.scale, args.feet, args.contact_threshold)
    ex = _load_inputs(args.exemplar, args.scale, args.feet, args.contact_threshold)
    gen_world = [from_features(feats, sk) for sk, feats, _ in gen]
    ex_world = from_features(ex[0][1], ex[0][0])
    same_shape = len({w.rotations.shape for w in gen_world}) == 1
    report = metrics.evaluate(
        [feats for _, feats, _ in gen], [feats for _, feats, _ in ex],
        local=args.local, global_=args.global_, threshold=args.threshold,
        generated_world=gen_world if same_shape else None, exemplar_world=ex_world)
    report.params["scale"] = args.scale
    text = json.dumps(report.to_dict(), indent=2)
    if args.out:
        with open(args.out, "w") as f:
            f.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


def _run_fixture(args):
    data = fixture_bvh(args.joints, args.frames, args.seed, args.fps)
    if args.out:
        with open(args.out, "wb") as f:
            f.write(data)
    else:
        sys.stdout.write(data.decode("ascii"))
    return EXIT_OK


def _thread_limit(value):
    if value is None:
        value = int(os.environ.get("GENMM_THREADS", "0") or 0)
    if value and value > 0:
        from threadpoolctl import threadpool_limits
        return threadpool_limits(limits=value)
    return None


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    limiter = None
    try:
        limiter = _thread_limit(args.threads)
        if args.command in SYNTH_COMMANDS:
            if args.from_manifest:
                return _replay(args, parser)
            record = {k: v for k, v in vars(args).items()
                      if k not in ("command", "from_manifest", "verbose", "threads")}
            return _run_synth(args, record)
        if args.command == "metrics":
            return _run_metrics(args)
        return _run_fixture(args)
    except UsageError as e:
        print(f"genmm: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (GenMMError, OSError, json.JSONDecodeError, KeyError) as e:
        print(f"genmm: error: {e}", file=sys.stderr)
        return EXIT_DATA
    except Exception as e:  # noqa: BLE001
        log.exception("internal error")
        print(f"genmm: internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    finally:
        if limiter is not None:
            limiter.restore_original_limits()


if __name__ == "__main__":
    sys.exit(main())
