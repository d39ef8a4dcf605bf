"""Command-line interface: ``svdlid <command> [options]``."""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys

from . import embedding, pipeline, synthcorpus
from .audio import read_wav
from .container import load_features, save_features
from .errors import LidError, PipelineError
from .segmentation import (GroundTruth, SegmentationTrace, concat_streams, frame_accuracy,
                           random_plan)


def _load_input(path, cfg):
    if not os.path.isfile(path):
        raise PipelineError(f"input not found: {path}", stage="input")
    if path.lower().endswith(".wav"):
        return pipeline._record_features(read_wav(path), cfg)
    return load_features(path)


def cmd_synth(a):
    if a.kind == "dynamics":
        langs = synthcorpus.make_dynamics_pair(seed=a.seed)
    else:
        langs = synthcorpus.make_languages(a.languages, separation=a.separation, seed=a.seed)
    spec = synthcorpus.CorpusSpec(tuple(langs), a.speakers, a.sessions, a.duration, seed=a.seed)
    n = pipeline.write_corpus_dir(a.out, synthcorpus.SyntheticCorpus(spec))
    print(f"wrote {n} sessions to {a.out}")
    if a.test_out:
        held = spec.held_out(a.test_speakers, 1, a.test_duration)
        m = pipeline.write_corpus_dir(a.test_out, synthcorpus.SyntheticCorpus(held))
        print(f"wrote {m} held-out sessions to {a.test_out}")
    if a.stream:
        held = spec.held_out(1, 1, 120.0, offset=2000)
        names = [l.id for l in langs]
        plan = random_plan(names, 3, 6, 30, seed=a.seed)
        stream, truth = concat_streams([(s.features, s.language) for s in
                                        synthcorpus.SyntheticCorpus(held)], plan)
        save_features(a.stream, stream)
        truth_path = a.truth or os.path.splitext(a.stream)[0] + "_truth.csv"
        truth.write(truth_path)
        print(f"wrote {stream.duration:.0f} s stream to {a.stream}, truth to {truth_path}")
    return 0


def _config(a):
    cfg = pipeline.PipelineConfig.read(a.config) if a.config else pipeline.PipelineConfig()
    over = {k: v for k, v in (("mixtures", a.mixtures), ("skip_k", a.skip),
                              ("energy_tau", a.energy), ("seed", a.seed)) if v is not None}
    return pipeline.with_config_values(cfg, **over)


def cmd_train(a):
    cfg = _config(a)
    if a.corpus:
        corpus = pipeline.CorpusDir(a.corpus)
    else:
        corpus = synthcorpus.SyntheticCorpus(synthcorpus.default_spec(cfg.seed))
    system = pipeline.train(corpus, a.scheme, cfg)
    pipeline.save(system, a.out)
    print(f"scheme {system.scheme}: {len(system.train_labels)} training vectors, "
          f"L = {system.space.rank}, classes {','.join(system.class_names)}")
    print(f"model written to {a.out}")
    return 0


def cmd_identify(a):
    system = pipeline.load(a.model)
    feats = _load_input(a.input, system.config)
    label, scores = pipeline.identify(system, feats, a.duration)
    print(label)
    for name, s in zip(system.class_names, scores):
        print(f"  {name}\t{s:.6f}")
    return 0


def cmd_segment(a):
    system = pipeline.load(a.model)
    stream = _load_input(a.stream, system.config)
    trace = pipeline.segment_stream(system, stream, a.window, a.shift)
    trace.write_csv(a.out)
    print(f"{len(trace.decisions)} windows written to {a.out}")
    if a.truth:
        acc = frame_accuracy(trace, GroundTruth.read(a.truth))
        print(f"frame accuracy {acc:.4f}")
    return 0


def cmd_eval(a):
    rows = []
    if a.traces:
        if not a.truth:
            raise PipelineError("--truth is required with --traces", stage="eval")
        truth = GroundTruth.read(a.truth)
        for path in a.traces:
            trace = SegmentationTrace.read_csv(path, truth.duration - truth.start)
            rows.append({"swd_s": trace.window_s, "shift_s": trace.shift_s,
                         "frame_accuracy": frame_accuracy(trace, truth)})
        rows.sort(key=lambda r: r["swd_s"])
    elif a.model and a.corpus:
        system = pipeline.load(a.model)
        corpus = pipeline.CorpusDir(a.corpus)
        for d in a.durations or [None]:
            res = pipeline.evaluate(system, corpus, d)
            row = {"duration_s": "full" if d is None else d}
            row.update(res["per_language"])
            row["overall"] = res["overall"]
            rows.append(row)
    else:
        raise PipelineError("give --traces with --truth, or --model with --corpus", stage="eval")
    out = open(a.out, "w", newline="") if a.out else sys.stdout
    try:
        w = csv.DictWriter(out, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    finally:
        if a.out:
            out.close()
    return 0


def cmd_export_embedding(a):
    system = pipeline.load(a.model)
    z = system.train_embedding
    with open(a.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["label", *[f"z{i + 1}" for i in range(z.shape[1])]])
        for lab, row in zip(system.train_labels, z):
            w.writerow([lab, *[repr(float(v)) for v in row]])
    print(f"{z.shape[0]} x {z.shape[1]} coordinates written to {a.out}")
    return 0


def cmd_energy_curve(a):
    system = pipeline.load(a.model)
    embedding.write_energy_curve(embedding.energy_curve(system.space), a.out)
    print(f"{system.space.spectrum.size} points written to {a.out} "
          f"(L = {system.space.rank} at tau = {system.space.energy_fraction})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="svdlid", description="SVD-embedded GMM language identification")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="generate a synthetic corpus directory")
    s.add_argument("--out", required=True)
    s.add_argument("--kind", choices=("separated", "dynamics"), default="separated")
    s.add_argument("--languages", type=int, default=4)
    s.add_argument("--speakers", type=int, default=4)
    s.add_argument("--sessions", type=int, default=2)
    s.add_argument("--duration", type=float, default=60.0, help="session length in seconds")
    s.add_argument("--separation", type=float, default=6.0)
    s.add_argument("--test-out", help="also write held-out speakers here")
    s.add_argument("--test-speakers", type=int, default=4)
    s.add_argument("--test-duration", type=float, default=30.0)
    s.add_argument("--stream", help="also write a mixed-language stream (feature file)")
    s.add_argument("--truth", help="ground-truth CSV for --stream")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_synth)

    t = sub.add_parser("train", help="train a system")
    t.add_argument("--scheme", type=int, choices=(1, 2), required=True)
    t.add_argument("--mixtures", type=int)
    t.add_argument("--skip", type=int)
    t.add_argument("--energy", type=float)
    t.add_argument("--corpus", help="corpus directory (default: built-in synthetic corpus)")
    t.add_argument("--config", help="key=value configuration file")
    t.add_argument("--out", default="model.svdc")
    t.add_argument("--seed", type=int)
    t.set_defaults(func=cmd_train)

    i = sub.add_parser("identify", help="identify the language of one utterance")
    i.add_argument("--model", required=True)
    i.add_argument("--input", required=True, help="WAV file or feature file")
    i.add_argument("--duration", type=float, help="use only the first seconds")
    i.add_argument("--seed", type=int, default=0)
    i.set_defaults(func=cmd_identify)

    g = sub.add_parser("segment", help="sliding-window segmentation of a stream")
    g.add_argument("--model", required=True)
    g.add_argument("--stream", required=True)
    g.add_argument("--window", type=float, default=5.0)
    g.add_argument("--shift", type=float, default=1.0)
    g.add_argument("--truth")
    g.add_argument("--out", default="trace.csv")
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=cmd_segment)

    e = sub.add_parser("eval", help="accuracy tables as CSV")
    e.add_argument("--traces", nargs="+", help="segmentation traces, one per window length")
    e.add_argument("--truth")
    e.add_argument("--model")
    e.add_argument("--corpus")
    e.add_argument("--durations", type=float, nargs="+")
    e.add_argument("--out")
    e.add_argument("--seed", type=int, default=0)
    e.set_defaults(func=cmd_eval)

    x = sub.add_parser("export-embedding", help="training coordinates as CSV")
    x.add_argument("--model", required=True)
    x.add_argument("--out", required=True)
    x.add_argument("--seed", type=int, default=0)
    x.set_defaults(func=cmd_export_embedding)

    c = sub.add_parser("energy-curve", help="cumulative singular-value energy as CSV")
    c.add_argument("--model", required=True)
    c.add_argument("--out", required=True)
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_energy_curve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except LidError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: [io] {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
