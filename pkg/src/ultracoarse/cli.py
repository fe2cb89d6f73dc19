"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 a mathematical hypothesis does
not hold (or the question is left undecided), 3 a certificate or oracle
check failed.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import __version__
from .cardinal import CardinalSeq
from .classify import (classify_pair, coarse_embedding_pipeline, coarse_equivalence_pipeline,
                       homogeneous_model, invariants)
from .errors import HypothesisError, InvalidInput, UltraError, VerificationError
from .multimap import (MultiMap, check_coarse_embedding, check_coarse_equivalence, inverse,
                       oscillation, oscillation_bruteforce, oscillation_witness)
from .space import (FiniteUltraSpace, SequenceSpace, cov, exact, format_rational, load_space,
                    min_cover_bruteforce, random_ultrametric, subspace, truncate)
from .tower import ExplicitTower, LazyTower, canonical_tower, to_dot

EXIT_OK, EXIT_INPUT, EXIT_HYPOTHESIS, EXIT_VERIFY = 0, 1, 2, 3


def _read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path} is not valid JSON: {exc}") from exc


def _dump(obj, out) -> None:
    out.write(json.dumps(obj, indent=2) + "\n")


def _write(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        _dump(obj, fh)


def _space(path: str):
    data = _read_json(path)
    if not isinstance(data, dict):
        raise InvalidInput(f"{path}: expected a JSON object")
    return load_space(data)


def _degrees(path: str) -> CardinalSeq:
    data = _read_json(path)
    if isinstance(data, dict) and "degrees" in data:
        data = data["degrees"]
    if not isinstance(data, dict):
        raise InvalidInput(f"{path}: expected a degree sequence")
    return CardinalSeq.from_json(data)


def _scales(text: Optional[str]) -> Optional[list]:
    if text is None:
        return None
    try:
        return [exact(t) for t in text.split(",") if t.strip()]
    except InvalidInput as exc:
        raise InvalidInput(f"--scales: {exc}") from exc


# -- verbs -------------------------------------------------------------------

def cmd_invariants(args, out) -> int:
    if args.degrees:
        X = SequenceSpace(_degrees(args.degrees))
    elif args.space:
        X = _space(args.space)
    else:
        raise InvalidInput("invariants needs --degrees or --space")
    _dump(invariants(X).to_json(), out)
    return EXIT_OK


def _pipeline(args, out, run) -> int:
    X, Y = _space(args.x), _space(args.y)
    verdict = run(X, Y, depth=args.depth, seed=args.seed)
    data = verdict.to_json()
    if args.cert_out and verdict.certificate is not None:
        _write(args.cert_out, data)
    _dump(data, out)
    return EXIT_OK if verdict.relation != "undecided-here" else EXIT_HYPOTHESIS


def cmd_equiv(args, out) -> int:
    return _pipeline(args, out, coarse_equivalence_pipeline)


def cmd_embed(args, out) -> int:
    return _pipeline(args, out, coarse_embedding_pipeline)


def cmd_classify(args, out) -> int:
    X, Y = _space(args.x), _space(args.y)
    _dump(classify_pair(X, Y, depth=args.depth, seed=args.seed).to_json(), out)
    return EXIT_OK


def _restricted(space, raw_points, what: str):
    pts = []
    for raw in raw_points:
        try:
            pts.append(space.decode_point(raw))
        except InvalidInput as exc:
            raise VerificationError(f"{what} point {raw!r} is not in the space: {exc}",
                                    witness=raw) from exc
    return subspace(space, pts)


def _fraction_table(rows) -> dict:
    return {Fraction(s): Fraction(w) for s, w in rows}


def cmd_verify(args, out) -> int:
    data = _read_json(args.cert)
    cert = data.get("certificate", data) if isinstance(data, dict) else None
    if not isinstance(cert, dict) or "pairs" not in cert:
        raise InvalidInput(f"{args.cert} holds no certificate")
    X, Y = _space(args.x), _space(args.y)
    try:
        Xs = _restricted(X, cert["domain"], "domain")
        Ys = _restricted(Y, cert["codomain"], "codomain")
    except KeyError as exc:
        raise InvalidInput(f"certificate lacks {exc}") from exc
    try:
        rel = MultiMap.from_json(cert, Xs, Ys)
    except InvalidInput as exc:
        raise VerificationError(f"certificate pairs do not fit the spaces: {exc}") from exc
    recorded_f = _fraction_table(cert.get("forward", []))
    recorded_b = _fraction_table(cert.get("backward", []))
    scales = _scales(args.scales) or sorted(recorded_f)
    kind = cert.get("kind", "embedding")
    check = check_coarse_equivalence if kind == "equivalence" else check_coarse_embedding
    fresh = check(rel, scales)
    if not fresh.total:
        x = fresh.uncovered_source[0]
        raise VerificationError(f"point {Xs.encode_point(x)} has no image", witness=[Xs.encode_point(x)])
    if fresh.surjective is False:
        y = fresh.uncovered_target[0]
        raise VerificationError(f"point {Ys.encode_point(y)} has no preimage", witness=[Ys.encode_point(y)])
    for name, table, recorded, phi in (("forward", fresh.forward, recorded_f, rel),
                                       ("backward", fresh.backward, recorded_b, inverse(rel))):
        for s, w in table:
            if s in recorded and recorded[s] != w:
                pair_ = oscillation_witness(phi, s)
                enc = phi.source.encode_point
                witness = [enc(p) for p in pair_] if pair_ else None
                raise VerificationError(
                    f"{name} modulus at scale {format_rational(s)} is {format_rational(w)}, "
                    f"certificate claims {format_rational(recorded[s])}; pair {witness}",
                    witness=witness)
    _dump({"verified": True, "kind": kind,
           "forward": [[format_rational(s), format_rational(w)] for s, w in fresh.forward],
           "backward": [[format_rational(s), format_rational(w)] for s, w in fresh.backward]},
          out)
    return EXIT_OK


def cmd_model(args, out) -> int:
    model, pair_ = homogeneous_model(args.kappa)
    data = {"degrees": model.degrees.to_json(), "invariants": pair_.to_json()}
    if args.out:
        _write(args.out, data)
    _dump(data, out)
    return EXIT_OK


def _radii(text: Optional[str], X: FiniteUltraSpace) -> list:
    if text is None:
        return list(X.values) or [0]
    return _scales(text)


def cmd_canonical_tower(args, out) -> int:
    X = _space(args.space)
    if isinstance(X, SequenceSpace):
        X = truncate(X, args.depth, args.cap)
    T, cmap = canonical_tower(X, _radii(args.levels, X))
    if args.format == "dot":
        out.write(to_dot(T))
    else:
        data = T.to_json()
        data["canonical_map"] = {X.encode_point(p): v for p, v in cmap.items()}
        _dump(data, out)
    return EXIT_OK


def cmd_export_dot(args, out) -> int:
    if args.tower:
        T = ExplicitTower.from_json(_read_json(args.tower))
    elif args.degrees:
        T = LazyTower(_degrees(args.degrees)).truncate(args.depth, args.cap)
    else:
        raise InvalidInput("export-dot needs --tower or --degrees")
    out.write(to_dot(T))
    return EXIT_OK


def _oracle_space(X: FiniteUltraSpace, rng: random.Random) -> list:
    mismatches = []
    radii = list(X.values)
    for x in X.points:
        for e in radii:
            for d in radii:
                a, b = cov(X, x, e, d), min_cover_bruteforce(X, x, e, d)
                if a != b:
                    mismatches.append({"check": "cov", "point": X.encode_point(x),
                                       "eps": format_rational(e), "delta": format_rational(d),
                                       "fast": a, "brute": b})
    pairs = [(x, y) for x in X.points for y in X.points if rng.random() < 0.3]
    phi = MultiMap(X, X, pairs)
    for e in radii:
        a, b = oscillation(phi, e), oscillation_bruteforce(phi, e)
        if a != b:
            mismatches.append({"check": "oscillation", "eps": format_rational(e),
                               "fast": format_rational(a), "brute": format_rational(b)})
    return mismatches


def cmd_oracle(args, out) -> int:
    rng = random.Random(args.seed)
    if args.space:
        X = _space(args.space)
        if not isinstance(X, FiniteUltraSpace):
            X = truncate(X, args.depth, args.cap)
        spaces = [X]
    else:
        spaces = [random_ultrametric(rng, rng.randint(1, 8)) for _ in range(args.count)]
    mismatches = []
    for X in spaces:
        mismatches += _oracle_space(X, rng)
    _dump({"spaces": len(spaces), "mismatches": mismatches}, out)
    return EXIT_VERIFY if mismatches else EXIT_OK


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ultracoarse",
                                description="Coarse classification of ultrametric spaces.")
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--depth", type=int, default=6, help="truncation and search depth")
    common.add_argument("--seed", type=int, default=0, help="seed for sampled domains")
    common.add_argument("--format", choices=("json", "dot"), default="json")
    common.add_argument("--scales", help="comma-separated exact rationals")
    sub = p.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("invariants", parents=[common], help="flat and sharp invariants")
    s.add_argument("--degrees")
    s.add_argument("--space")
    s.set_defaults(run=cmd_invariants)

    for name, fn, text in (("equiv", cmd_equiv, "coarse equivalence pipeline"),
                           ("embed", cmd_embed, "coarse embedding pipeline"),
                           ("classify", cmd_classify, "classify two homogeneous spaces")):
        s = sub.add_parser(name, parents=[common], help=text)
        s.add_argument("--x", required=True)
        s.add_argument("--y", required=True)
        s.add_argument("--cert-out", help="write the verdict with its certificate here")
        s.set_defaults(run=fn)

    s = sub.add_parser("verify", parents=[common], help="re-check a certificate")
    s.add_argument("--cert", required=True)
    s.add_argument("--x", required=True)
    s.add_argument("--y", required=True)
    s.set_defaults(run=cmd_verify)

    s = sub.add_parser("model", parents=[common], help="homogeneous model of a cardinal")
    s.add_argument("kappa")
    s.add_argument("--out")
    s.set_defaults(run=cmd_model)

    s = sub.add_parser("canonical-tower", parents=[common], help="tower of balls of a space")
    s.add_argument("--space", required=True)
    s.add_argument("--levels", help="comma-separated radii (default: all realized distances)")
    s.add_argument("--cap", type=int, default=2, help="alphabet cap for sequence spaces")
    s.set_defaults(run=cmd_canonical_tower)

    s = sub.add_parser("oracle", parents=[common], help="brute-force cross-checks")
    s.add_argument("--space")
    s.add_argument("--count", type=int, default=20)
    s.add_argument("--cap", type=int, default=2)
    s.set_defaults(run=cmd_oracle)

    s = sub.add_parser("export-dot", parents=[common], help="render a tower as DOT")
    s.add_argument("--tower")
    s.add_argument("--degrees")
    s.add_argument("--cap", type=int, default=2)
    s.set_defaults(run=cmd_export_dot)
    return p


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.depth < 0:
        print("error: --depth must be non-negative", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.run(args, out)
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        if exc.witness is not None:
            print(f"witness: {json.dumps(exc.witness)}", file=sys.stderr)
        return EXIT_VERIFY
    except HypothesisError as exc:
        cite = f" [{exc.citation}]" if exc.citation else ""
        print(f"hypothesis failure{cite}: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (InvalidInput, UltraError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
