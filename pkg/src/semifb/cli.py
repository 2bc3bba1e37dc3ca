"""Command-line front end.

Exit codes: 0 success, 1 usage/parse/dimension errors, 2 empty lattice.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import _kernels, bench
from .errors import EmptyLatticeError, InfeasibleGraphError, SemifbError
from .fsm import random_graph, read_graph_file, save_graph
from .inference import forward_backward, viterbi
from .io import read_matrix, write_matrix
from .lfmmi import lfmmi
from .semiring import semiring_by_name

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_EMPTY = 2

_PRECISION = {"32": np.float32, "64": np.float64}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(x: float) -> str:
    return repr(float(x))


def cmd_fb(args) -> int:
    g = read_graph_file(args.graph)
    V = read_matrix(args.likelihoods).astype(np.float64)
    post, logZ = forward_backward(g, V, semiring_by_name(args.semiring))
    write_matrix(args.output, post.probs, _PRECISION[args.precision])
    print(_fmt(logZ))
    return EXIT_OK


def cmd_viterbi(args) -> int:
    g = read_graph_file(args.graph)
    V = read_matrix(args.likelihoods).astype(np.float64)
    path = viterbi(g, V)
    print(" ".join(map(str, path.states)))
    print(_fmt(path.score))
    return EXIT_OK


def cmd_lfmmi(args) -> int:
    num = read_graph_file(args.num)
    den = read_graph_file(args.den)
    Phi = read_matrix(args.likelihoods).astype(np.float64)
    res = lfmmi(num, den, Phi)
    write_matrix(args.grad_output, res.grad, _PRECISION[args.precision])
    print(_fmt(res.loss))
    return EXIT_OK


def cmd_gen(args) -> int:
    K0, A0 = bench.DEFAULT_SHAPES[args.kind]
    K = args.states or K0
    A = args.arcs or A0
    g = random_graph(K, A, args.seed, args.kind)
    with open(args.graph_out, "w", encoding="utf-8") as fh:
        fh.write(save_graph(g))
    if args.likelihoods_out:
        rng = np.random.default_rng((args.seed, 1))
        V = rng.uniform(args.ll_min, args.ll_max, (K, args.frames))
        write_matrix(args.likelihoods_out, V, _PRECISION[args.precision])
    return EXIT_OK


def cmd_bench(args) -> int:
    batches = [max(1, round(b * args.scale)) for b in args.batch]
    records = []
    for b in batches:
        try:
            rec = bench.run_bench(
                kind=args.kind,
                batch=b,
                frames=args.frames,
                reps=args.reps,
                states=args.states,
                arcs=args.arcs,
                seed=args.seed,
                max_memory=None if args.max_memory_gb is None else int(args.max_memory_gb * 2**30),
            )
        except bench.BenchMemoryError as exc:
            print(f"semifb bench: {exc}", file=sys.stderr)
            return EXIT_USAGE
        records.append(rec)
    out = bench.to_json(records) if args.json else bench.to_csv(records)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out if out.endswith("\n") else out + "\n")
    return EXIT_OK


def _batch_list(text: str) -> list[int]:
    try:
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError("batch sizes must be positive")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="semifb", description="Semiring forward-backward, Viterbi and LF-MMI on sparse graphs.")
    p.add_argument("--threads", type=int, default=None, help="kernel threads (default: all logical processors)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    fb = sub.add_parser("fb", help="state posteriors and log-marginal")
    fb.add_argument("graph")
    fb.add_argument("likelihoods")
    fb.add_argument("output", help="posterior container (probability domain)")
    fb.add_argument("--semiring", choices=["log", "prob"], default="log")
    fb.add_argument("--precision", choices=sorted(_PRECISION), default="64")
    fb.set_defaults(func=cmd_fb)

    vt = sub.add_parser("viterbi", help="best path and its score")
    vt.add_argument("graph")
    vt.add_argument("likelihoods")
    vt.set_defaults(func=cmd_viterbi)

    lf = sub.add_parser("lfmmi", help="LF-MMI loss and gradient")
    lf.add_argument("num")
    lf.add_argument("den")
    lf.add_argument("likelihoods")
    lf.add_argument("grad_output")
    lf.add_argument("--precision", choices=sorted(_PRECISION), default="64")
    lf.set_defaults(func=cmd_lfmmi)

    gen = sub.add_parser("gen", help="synthetic graph and likelihoods")
    gen.add_argument("--kind", choices=sorted(bench.DEFAULT_SHAPES), default="alignment")
    gen.add_argument("--states", type=int, default=None)
    gen.add_argument("--arcs", type=int, default=None)
    gen.add_argument("--frames", type=int, default=bench.DEFAULT_FRAMES)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--ll-min", type=float, default=-10.0)
    gen.add_argument("--ll-max", type=float, default=0.0)
    gen.add_argument("--precision", choices=sorted(_PRECISION), default="64")
    gen.add_argument("--graph-out", required=True)
    gen.add_argument("--likelihoods-out", default=None)
    gen.set_defaults(func=cmd_gen)

    bn = sub.add_parser("bench", help="time batched forward-backward on replicated graphs")
    bn.add_argument("--kind", choices=sorted(bench.DEFAULT_SHAPES), default="alignment")
    bn.add_argument("--batch", type=_batch_list, default=[bench.DEFAULT_BATCH],
                    help="batch size(s) before scaling, comma-separated (default 128)")
    bn.add_argument("--scale", type=float, default=1 / 16, help="batch multiplier (default 1/16: 128 -> 8)")
    bn.add_argument("--frames", type=int, default=bench.DEFAULT_FRAMES)
    bn.add_argument("--reps", type=int, default=5)
    bn.add_argument("--states", type=int, default=None)
    bn.add_argument("--arcs", type=int, default=None)
    bn.add_argument("--seed", type=int, default=0)
    bn.add_argument("--max-memory-gb", type=float, default=None)
    bn.add_argument("--output", default=None)
    fmt = bn.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true")
    fmt.add_argument("--csv", action="store_true", help="CSV with header (default)")
    bn.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _kernels.set_threads(args.threads)
    try:
        return args.func(args)
    except EmptyLatticeError as exc:
        print(f"semifb {args.command}: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except (SemifbError, InfeasibleGraphError, ValueError, OSError) as exc:
        print(f"semifb {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
