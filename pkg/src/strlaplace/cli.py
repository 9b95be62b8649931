"""Command-line front end: corpus ingestion, fitting, clustering,
sampling, sphere sizes, the median procedure, and a self-test harness.

Exit codes: 0 success, 1 validation error, 2 resource-cap error.
"""

from __future__ import annotations

import argparse
import csv
import json
import random
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, TextIO

from . import estimators, laplace, median_string, mixture, oracle
from .errors import CapExceededError, ParseError
from .spheres import SphereQuery, ball_size, sphere_size_ext_hamming, sphere_size_levenshtein
from .string_space import Alphabet, DistanceKind, Str, parse

__all__ = ["Corpus", "ModelFile", "ingest", "main"]

FORMAT_VERSION = 1


@dataclass
class Corpus:
    strings: list[Str]
    ids: list[str]

    def __post_init__(self):
        if not self.strings:
            raise ValueError("corpus is empty")
        if len(self.ids) != len(self.strings):
            raise ValueError("ids must match strings")
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("record ids must be unique")


def _read_lines(path: Path) -> list[tuple[str, str]]:
    text = path.read_text()
    if text.endswith("\n"):
        text = text[:-1]
    if text == "":
        raise ValueError(f"{path}: empty input")
    return [(str(i), line) for i, line in enumerate(text.split("\n"), start=1)]


def _read_fasta(path: Path) -> list[tuple[str, str]]:
    records: list[tuple[str, list[str]]] = []
    for raw in path.read_text().splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith(">"):
            records.append((line[1:].strip(), []))
        else:
            if not records:
                raise ValueError(f"{path}: sequence data before first FASTA header")
            records[-1][1].append(line)
    if not records:
        raise ValueError(f"{path}: empty input")
    return [(rid, "".join(chunks)) for rid, chunks in records]


def ingest(path: str | Path, format: str = "lines", alphabet: str = "infer") -> tuple[Corpus, Alphabet]:
    """Read a corpus from a line-per-string or FASTA file.

    ``alphabet`` is either an explicit letter string or "infer", which
    uses the sorted set of characters seen in the input.
    """
    path = Path(path)
    if format == "lines":
        records = _read_lines(path)
    elif format == "fasta":
        records = _read_fasta(path)
    else:
        raise ValueError(f"unknown format {format!r}")
    if alphabet == "infer":
        seen = sorted({ch for _, text in records for ch in text})
        if not seen:
            seen = ["a"]  # all-empty corpus still needs a letter
        ab = Alphabet(tuple(seen))
    else:
        ab = Alphabet.from_text(alphabet)
    strings = [parse(text, ab, record=rid) for rid, text in records]
    return Corpus(strings, [rid for rid, _ in records]), ab


@dataclass
class ModelFile:
    """On-disk mixture model; round-trips losslessly through JSON."""

    alphabet: Alphabet
    metric: DistanceKind
    params: mixture.MixtureParams
    epsilon: float
    seed: int
    restarts: int
    iters: int
    weighted_loglik: float
    format_version: int = FORMAT_VERSION

    def to_json(self) -> str:
        doc = {
            "format_version": self.format_version,
            "alphabet": list(self.alphabet.letters),
            "metric": self.metric.value,
            "k": self.params.k,
            "components": [
                {"pi": p, "lambda": str(loc), "rho": r}
                for p, loc, r in zip(
                    self.params.weights, self.params.locations, self.params.dispersions
                )
            ],
            "fit": {
                "epsilon": self.epsilon,
                "seed": self.seed,
                "restarts": self.restarts,
                "iters": self.iters,
                "weighted_loglik": self.weighted_loglik,
            },
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def from_json(cls, text: str) -> "ModelFile":
        doc = json.loads(text)
        if doc.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported model format_version {doc.get('format_version')}")
        ab = Alphabet(tuple(doc["alphabet"]))
        metric = DistanceKind(doc["metric"])
        comps = doc["components"]
        if len(comps) != doc["k"]:
            raise ValueError("component count does not match k")
        params = mixture.MixtureParams(
            tuple(c["pi"] for c in comps),
            tuple(parse(c["lambda"], ab) for c in comps),
            tuple(c["rho"] for c in comps),
        )
        fit_meta = doc["fit"]
        return cls(
            alphabet=ab,
            metric=metric,
            params=params,
            epsilon=fit_meta["epsilon"],
            seed=fit_meta["seed"],
            restarts=fit_meta["restarts"],
            iters=fit_meta["iters"],
            weighted_loglik=fit_meta["weighted_loglik"],
        )

    @classmethod
    def load(cls, path: str | Path) -> "ModelFile":
        return cls.from_json(Path(path).read_text())


def _write_assignments(
    out: TextIO, corpus: Corpus, assignments: list[tuple[int, tuple[float, ...]]], k: int
) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["id", "component"] + [f"posterior_{g}" for g in range(1, k + 1)])
    for rid, (comp, post) in zip(corpus.ids, assignments):
        writer.writerow([rid, comp + 1] + [repr(p) for p in post])


def _cmd_fit(args) -> int:
    corpus, ab = ingest(args.corpus, args.format, args.alphabet)
    metric = DistanceKind(args.distance)
    config = mixture.FitConfig(
        k=args.k,
        metric=metric,
        epsilon=args.epsilon,
        max_iters=args.max_iters,
        tol_weight=args.tol,
        tol_dispersion=args.tol,
        restarts=args.restarts,
        tau=args.tau,
        seed=args.seed,
    )
    result = mixture.fit(corpus.strings, config)
    model = ModelFile(
        alphabet=ab,
        metric=metric,
        params=result.params,
        epsilon=args.epsilon,
        seed=args.seed,
        restarts=args.restarts,
        iters=result.iters_used,
        weighted_loglik=result.weighted_loglik,
    )
    out = Path(args.out)
    model.save(out)
    assignments = mixture.map_cluster(corpus.strings, result.params, metric)
    assign_path = Path(args.assignments) if args.assignments else out.with_suffix("").with_name(
        out.with_suffix("").name + ".assignments.csv"
    )
    with open(assign_path, "w", newline="") as fh:
        _write_assignments(fh, corpus, assignments, result.params.k)
    print(f"wrote {out} and {assign_path}")
    return 0


def _cmd_cluster(args) -> int:
    model = ModelFile.load(args.model)
    corpus, _ = ingest(args.corpus, args.format, "".join(model.alphabet.letters))
    assignments = mixture.map_cluster(corpus.strings, model.params, model.metric)
    with open(args.out, "w", newline="") as fh:
        _write_assignments(fh, corpus, assignments, model.params.k)
    print(f"wrote {args.out}")
    return 0


def _cmd_sample(args) -> int:
    model = ModelFile.load(args.model)
    rng = random.Random(args.seed)
    weights = model.params.weights
    lines = []
    for _ in range(args.n):
        u = rng.random()
        acc = 0.0
        comp = len(weights) - 1
        for g, p in enumerate(weights):
            acc += p
            if u < acc:
                comp = g
                break
        params = laplace.LaplaceParams(
            model.params.locations[comp], model.params.dispersions[comp]
        )
        (s,) = laplace.sample_with_rng(params, model.metric, rng, 1)
        lines.append(str(s))
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_sphere(args) -> int:
    ab = Alphabet.from_text(args.alphabet)
    center = parse(args.center, ab)
    metric = DistanceKind(args.distance)
    if args.ball:
        print(ball_size(SphereQuery(center, args.radius, metric)))
    elif metric is DistanceKind.EXT_HAMMING:
        print(sphere_size_ext_hamming(len(center), args.radius, ab.size))
    else:
        print(sphere_size_levenshtein(center, args.radius))
    return 0


def _cmd_median(args) -> int:
    corpus, _ = ingest(args.corpus, args.format, args.alphabet)
    result = median_string.fit(corpus.strings)
    for i, step in enumerate(result.trace.steps):
        print(
            f"step {i}: location={step.location} dispersion={step.dispersion!r} "
            f"objective={step.objective!r}"
        )
    print(f"location={result.location} dispersion={result.dispersion!r}")
    return 0


def _a2_example_distribution() -> oracle.FiniteDistribution:
    ab = Alphabet.from_text("01")
    texts = ["", "0", "1", "00", "01", "10", "11"]
    probs = (0.2, 0.15, 0.15, 0.125, 0.125, 0.125, 0.125)
    return oracle.FiniteDistribution(tuple(parse(t, ab) for t in texts), probs)


def _cmd_selftest(args) -> int:
    checks: list[tuple[str, bool, str]] = []
    ab = Alphabet.from_text("01")
    center = parse("00", ab)
    lev = DistanceKind.LEVENSHTEIN

    sizes = [sphere_size_levenshtein(center, r) for r in range(3)]
    brute = [oracle.sphere_size_brute(center, r, lev) for r in range(3)]
    checks.append(
        (
            "levenshtein sphere sizes around 00",
            sizes == [1, 7, 17] and brute == sizes,
            f"got {sizes}, brute force {brute}, expected [1, 7, 17]",
        )
    )

    dist = _a2_example_distribution()
    devs = [
        dist.expected(lambda s, c=parse(t, ab): float(oracle.distance(s, c, lev)))
        for t in ["", "0", "00"]
    ]
    ok = all(abs(d - e) <= 1e-12 for d, e in zip(devs, [1.3, 0.975, 1.35]))
    checks.append(
        ("expected deviations around o, 0, 00", ok, f"got {devs}, expected [1.3, 0.975, 1.35]")
    )

    from .spheres import sphere_size

    sphere_means = [
        dist.expected(
            lambda s, c=parse(t, ab): float(sphere_size(c, oracle.distance(s, c, lev), lev))
        )
        for t in ["", "0", "00"]
    ]
    ok = all(abs(d - e) <= 1e-12 for d, e in zip(sphere_means, [2.8, 4.775, 11.0]))
    checks.append(
        (
            "expected sphere sizes around o, 0, 00",
            ok,
            f"got {sphere_means}, expected [2.8, 4.775, 11.0]",
        )
    )

    argmin = oracle.modified_median(dist, "sphere", lev)
    checks.append(
        ("size-aware median of the example distribution", len(argmin) == 0, f"got {argmin!r}")
    )

    grid_ok = True
    for a in (1, 2, 3):
        letters = "abc"[:a]
        gab = Alphabet.from_text(letters)
        c = parse(letters[0] * 2, gab)
        for r in range(4):
            if sphere_size_ext_hamming(2, r, a) != oracle.sphere_size_brute(
                c, r, DistanceKind.EXT_HAMMING
            ):
                grid_ok = False
    checks.append(("ext-hamming closed form vs brute force", grid_ok, "L=2, r<=3, a in 1..3"))

    failed = 0
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        failed += 0 if ok else 1
    return 0 if failed == 0 else 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; keep 2 for caps only
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="strlaplace", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_corpus_args(p):
        p.add_argument("corpus", help="input file")
        p.add_argument("--format", choices=["lines", "fasta"], default="lines")
        p.add_argument("--alphabet", default="infer", help="explicit letters or 'infer'")

    p = sub.add_parser("fit", help="fit a mixture or single distribution")
    add_corpus_args(p)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--distance", choices=[m.value for m in DistanceKind], default="ext-hamming")
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--tau", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="model.json")
    p.add_argument("--assignments", default=None, help="assignment CSV path")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("cluster", help="assign a corpus with a saved model")
    add_corpus_args(p)
    p.add_argument("--model", required=True)
    p.add_argument("--out", default="assignments.csv")
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser("sample", help="generate strings from a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("sphere", help="print a sphere or ball size")
    p.add_argument("--center", required=True)
    p.add_argument("--alphabet", required=True)
    p.add_argument("--distance", choices=[m.value for m in DistanceKind], default="ext-hamming")
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--ball", action="store_true", help="print the ball size instead")
    p.set_defaults(func=_cmd_sphere)

    p = sub.add_parser("median", help="approximate Levenshtein median with trace")
    add_corpus_args(p)
    p.set_defaults(func=_cmd_median)

    p = sub.add_parser("selftest", help="run the worked-example checks")
    p.set_defaults(func=_cmd_selftest)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
