"""Command-line interface.

Subcommands
-----------
compute    D | s | g for a group given by invariant factors, with caching.
check      test a sequence file for a zero-sum subsequence of a given length.
verify-d0  exhaustive distinguished-element property verification (resumable).
verify-d   inverse-structure check of the extremal sequences of s.
cap        affine cap search / stored-cap verification in ternary space.
bound      knowledge-base bounds with derivation trace.
threshold  exact big-integer thresholds of the product theorem and its
           worked application cases.
conjecture consistency harnesses for the two stated conjectures.
compose-d0 demonstrate the constructive product step on a random instance.

Group arguments: ``compute`` and ``check`` take invariant factors
(``--group 3,3`` is C_3 + C_3); the homocyclic-only commands ``verify-d0``,
``verify-d`` and ``bound`` take ``n,r`` (``--group 3,3`` is C_3^3) with a
bare ``n`` meaning rank one.

Exit codes: 0 success/holds/consistent; 1 usage or parse error; 2 budget
exhausted or unknown; 3 negative result (no witness, counterexample,
inconsistent, failed verification).
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from . import __version__, bounds, propertyd, search
from .errors import SequenceFormatError, ZeroSumError
from .groups import GroupSpec, homocyclic_group, make_group
from .sequences import (
    GroupSequence,
    find_zero_sum_fixed_length,
    format_sequence,
    has_zero_sum_fixed_length,
    parse_sequence,
)
from .store import ResultsStore, default_store_path

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BUDGET = 2
EXIT_NEGATIVE = 3


def _parse_factors(text: str) -> GroupSpec:
    return make_group([int(p) for p in text.split(",")])


def _parse_homocyclic(text: str) -> GroupSpec:
    parts = [int(p) for p in text.split(",")]
    if len(parts) == 1:
        return homocyclic_group(parts[0], 1)
    if len(parts) == 2:
        return homocyclic_group(parts[0], parts[1])
    raise ValueError(f"expected n or n,r, got {text!r}")


def _budget(args) -> search.Budget:
    return search.Budget(max_nodes=args.budget_nodes, max_seconds=args.budget_seconds)


def _emit(args, payload: dict, text_lines: list[str]) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for line in text_lines:
            print(line)


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--json", action="store_true", help="emit JSON")
    p.add_argument("--store", help="results store path (or ZEROSUM_STORE env)")
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    p.add_argument("--budget-nodes", type=int, default=None, help="node limit")
    p.add_argument("--budget-seconds", type=float, default=None, help="time limit")
    p.add_argument("--force", action="store_true", help="ignore cached results")


def cmd_compute(args) -> int:
    try:
        G = _parse_factors(args.group)
    except (ValueError, ZeroSumError) as exc:
        print(f"error: invalid group: {exc}", file=sys.stderr)
        return EXIT_USAGE
    fn = {"D": search.davenport, "s": search.egz_constant, "g": search.g_constant}[
        args.invariant
    ]
    params = {"invariant": args.invariant, "group": G.key}

    def run():
        cert = fn(G, budget=_budget(args), workers=args.workers)
        return cert.to_json_dict(), cert.exhaustive

    with ResultsStore(default_store_path(args.store), __version__) as store:
        record, cached = store.get_or_run("compute", params, run, force=args.force)
    payload = dict(record["payload"])
    payload["cached"] = cached
    lines = [
        f"{args.invariant}({G}) = {payload['value']}"
        + ("" if payload["exhaustive"] else " (lower bound; budget exhausted)")
        + (" [cached]" if cached else ""),
        f"extremal sequences: {len(payload['extremal_sequences'])}"
        + ("" if payload["witnesses_complete"] else " (truncated list)"),
        f"nodes: {payload['nodes']}",
    ]
    _emit(args, payload, lines)
    return EXIT_OK if payload["exhaustive"] else EXIT_BUDGET


def cmd_check(args) -> int:
    try:
        text = Path(args.file).read_text()
        S = parse_sequence(text)
    except OSError as exc:
        print(f"error: cannot read {args.file}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SequenceFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    L = args.length if args.length is not None else S.group.exponent
    witness = find_zero_sum_fixed_length(S, L)
    if witness is None:
        _emit(
            args,
            {"schema": "zerosum.check/1", "length": L, "found": False},
            [f"no zero-sum subsequence of length {L}"],
        )
        return EXIT_NEGATIVE
    _emit(
        args,
        {
            "schema": "zerosum.check/1",
            "length": L,
            "found": True,
            "witness": format_sequence(witness),
        },
        [f"zero-sum subsequence of length {L}:", format_sequence(witness).rstrip()],
    )
    return EXIT_OK


def cmd_verify_d0(args) -> int:
    try:
        G = _parse_homocyclic(args.group)
    except (ValueError, ZeroSumError) as exc:
        print(f"error: invalid group: {exc}", file=sys.stderr)
        return EXIT_USAGE
    verdict = propertyd.verify_d0(
        G,
        args.c,
        budget=_budget(args),
        checkpoint=args.resume,
        checkpoint_path=args.checkpoint,
        workers=args.workers,
    )
    payload = verdict.to_json_dict()
    lines = [f"verify-d0 {G} c={args.c}: {verdict.outcome}"]
    if verdict.witness_t is not None:
        lines.append(f"counterexample g = {verdict.witness_g}, T = {verdict.witness_t}")
    lines.append(
        f"nodes: {verdict.nodes_explored}, orbits: {verdict.orbits_tested}, "
        f"elapsed: {verdict.elapsed:.2f}s"
    )
    if verdict.checkpoint_path:
        lines.append(f"checkpoint written: {verdict.checkpoint_path}")
    _emit(args, payload, lines)
    return {
        "holds": EXIT_OK,
        "counterexample": EXIT_NEGATIVE,
        "inconclusive": EXIT_BUDGET,
    }[verdict.outcome]


def cmd_verify_d(args) -> int:
    try:
        G = _parse_homocyclic(args.group)
    except (ValueError, ZeroSumError) as exc:
        print(f"error: invalid group: {exc}", file=sys.stderr)
        return EXIT_USAGE
    cert = search.egz_constant(
        G, budget=_budget(args), workers=args.workers, witness_cap=args.witness_cap
    )
    verdict = propertyd.verify_d(G, cert)
    payload = verdict.to_json_dict()
    payload["s_value"] = cert.value
    if verdict.holds:
        lines = [f"verify-d {G}: holds with c = {verdict.c} (s = {cert.value})"]
    else:
        lines = [f"verify-d {G}: FAILS; {len(verdict.violators)} violating classes"]
    _emit(args, payload, lines)
    return EXIT_OK if verdict.holds else EXIT_NEGATIVE


def _bundled_cap(r: int) -> list[int] | None:
    from importlib import resources

    name = f"cap_f3_r{r}.txt"
    try:
        text = (resources.files("zerosum") / "data" / name).read_text()
    except (FileNotFoundError, ModuleNotFoundError):
        return None
    return [int(tok) for tok in text.split()]


def cmd_cap(args) -> int:
    r = args.r
    mode = args.mode or ("exhaustive" if r <= 4 else "verify")
    if mode == "exhaustive":
        params = {"r": r}

        def run():
            res = search.max_cap(r, budget=_budget(args), workers=args.workers)
            return res.to_json_dict(), res.exhaustive

        with ResultsStore(default_store_path(args.store), __version__) as store:
            record, cached = store.get_or_run("cap", params, run, force=args.force)
        payload = dict(record["payload"])
        payload["cached"] = cached
        lines = [
            f"max cap in F_3^{r}: {payload['size']}"
            + ("" if payload["exhaustive"] else " (lower bound; budget exhausted)")
            + (" [cached]" if cached else "")
        ]
        _emit(args, payload, lines)
        return EXIT_OK if payload["exhaustive"] else EXIT_BUDGET
    # verification mode: check a stored cap and the cap identity against the KB
    if args.cap_file:
        points = [int(tok) for tok in Path(args.cap_file).read_text().split()]
    else:
        points = _bundled_cap(r)
        if points is None:
            print(f"error: no bundled cap for r={r}; pass --cap-file", file=sys.stderr)
            return EXIT_USAGE
    ok = search.is_cap(r, points)
    kb = bounds.KnowledgeBase()
    g_rec = kb.bound("g", homocyclic_group(3, r))
    s_rec = kb.bound("s", homocyclic_group(3, r))
    consistent = g_rec.exact and len(points) == g_rec.lower - 1
    identity = (
        s_rec.exact and g_rec.exact and s_rec.lower == 2 * g_rec.lower - 1
    )
    payload = {
        "schema": "zerosum.cap_verify/1",
        "r": r,
        "size": len(points),
        "is_cap": ok,
        "matches_knowledge_base": consistent,
        "cap_identity_consistent": identity,
    }
    lines = [
        f"stored cap in F_3^{r}: {len(points)} points; cap property: {ok}",
        f"knowledge base g - 1 = {g_rec.lower - 1 if g_rec.exact else 'unknown'}; "
        f"matches: {consistent}; s = 2g - 1 consistent: {identity}",
    ]
    _emit(args, payload, lines)
    return EXIT_OK if ok and consistent else EXIT_NEGATIVE


def cmd_bound(args) -> int:
    try:
        G = _parse_homocyclic(args.group)
    except (ValueError, ZeroSumError) as exc:
        print(f"error: invalid group: {exc}", file=sys.stderr)
        return EXIT_USAGE
    kb = bounds.KnowledgeBase(with_seeds=not args.no_seeds)
    rec = kb.bound(args.invariant, G)
    payload = rec.to_json_dict()
    lines = [
        f"{args.invariant}({G}): lower {rec.lower}, upper "
        f"{rec.upper if rec.upper is not None else 'unbounded'}"
        + (" (exact)" if rec.exact else ""),
        "trace:",
    ]
    lines += [f"  {t.rule}: {t.detail}" for t in rec.trace]
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_threshold(args) -> int:
    if args.theorem1:
        try:
            n, r, c = (int(p) for p in args.theorem1.split(","))
        except ValueError:
            print("error: --theorem1 wants n,r,c", file=sys.stderr)
            return EXIT_USAGE
        try:
            value, exact = bounds.theorem1_threshold_detail(n, r, c)
        except ZeroSumError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        payload = {
            "schema": "zerosum.threshold/1",
            "kind": "theorem1",
            "n": str(n),
            "r": r,
            "c": str(c),
            "threshold": str(value),
            "division_exact": exact,
        }
        _emit(args, payload, [str(value)])
        return EXIT_OK
    if args.app:
        try:
            value = bounds.application_threshold(args.app, args.n, args.r)
        except ZeroSumError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        payload = {
            "schema": "zerosum.threshold/1",
            "kind": f"application-{args.app}",
            "n": str(args.n),
            "threshold": str(value),
        }
        if args.app == 3:
            payload["r"] = args.r
            payload["note"] = (
                "source display of this case carries a stray trailing token; "
                "transcribed as displayed"
            )
        _emit(args, payload, [str(value)])
        return EXIT_OK
    print("error: pass --theorem1 n,r,c or --app K --n N", file=sys.stderr)
    return EXIT_USAGE


def cmd_conjecture(args) -> int:
    kb = bounds.KnowledgeBase()
    if args.c42:
        try:
            verdict = bounds.conjecture_42_check(args.n, args.r, args.g_c3r, kb=kb)
        except ZeroSumError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        payload = {
            "schema": "zerosum.conjecture/1",
            "conjecture": "odd-exponent-value",
            "n": args.n,
            "r": args.r,
            "verdict": verdict,
        }
        _emit(args, payload, [f"conjectured s(C_{args.n}^{args.r}): {verdict}"])
        return {"consistent": EXIT_OK, "unknown": EXIT_BUDGET, "inconsistent": EXIT_NEGATIVE}[
            verdict
        ]
    if args.c43:
        if args.a is None:
            print("error: --c43 needs --a", file=sys.stderr)
            return EXIT_USAGE
        try:
            rng = bounds.conjecture_43_alpha_range(args.n, args.r, args.a)
        except ZeroSumError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        payload = rng.to_json_dict()
        payload.update({"n": args.n, "r": args.r, "a": args.a})
        _emit(
            args,
            payload,
            [
                f"s(C_{{2^{args.a} * {args.n}}}^{args.r}) in "
                f"[{rng.lower}, {rng.upper}] (alpha_max = {rng.alpha_max})"
            ],
        )
        return EXIT_OK
    print("error: pass --c42 or --c43", file=sys.stderr)
    return EXIT_USAGE


def cmd_compose_d0(args) -> int:
    mn = args.m * args.n
    G = homocyclic_group(mn, args.r)
    if args.seq:
        try:
            S = parse_sequence(Path(args.seq).read_text())
        except (OSError, SequenceFormatError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
    else:
        rng = random.Random(args.seed)
        counts = {rng.randrange(G.order): 1}
        for _ in range(args.c):
            e = rng.randrange(G.order)
            counts[e] = counts.get(e, 0) + (mn - 1)
        S = GroupSequence.from_counts(G, counts.items())
    try:
        witness = propertyd.d0_compose(args.m, args.n, G, S)
    except ZeroSumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE
    ok = (
        witness.length == mn
        and witness.sum == G.identity()
        and witness.is_subsequence_of(S)
    )
    payload = {
        "schema": "zerosum.compose/1",
        "m": args.m,
        "n": args.n,
        "r": args.r,
        "input": format_sequence(S),
        "witness": format_sequence(witness),
        "verified": ok,
    }
    _emit(
        args,
        payload,
        [
            f"input: {S}",
            f"zero-sum subsequence of length {mn}: {witness}",
            f"verified: {ok}",
        ],
    )
    return EXIT_OK if ok else EXIT_NEGATIVE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zerosum",
        description="zero-sum invariants of finite abelian groups",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="compute D, s or g exhaustively")
    p.add_argument("invariant", choices=("D", "s", "g"))
    p.add_argument("--group", required=True, help="invariant factors, e.g. 3,3")
    _common_flags(p)
    p.set_defaults(fn=cmd_compute)

    p = sub.add_parser("check", help="zero-sum subsequence check on a sequence file")
    p.add_argument("file")
    p.add_argument("--length", "-L", type=int, default=None, help="target length (default exp)")
    _common_flags(p)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("verify-d0", help="distinguished-element property verification")
    p.add_argument("--group", required=True, help="homocyclic n,r (bare n = rank 1)")
    p.add_argument("--c", type=int, required=True)
    p.add_argument("--checkpoint", help="write checkpoints to this path")
    p.add_argument("--resume", help="resume from a checkpoint file")
    _common_flags(p)
    p.set_defaults(fn=cmd_verify_d0)

    p = sub.add_parser("verify-d", help="inverse-structure check of extremal sequences")
    p.add_argument("--group", required=True, help="homocyclic n,r")
    p.add_argument("--witness-cap", type=int, default=100000)
    _common_flags(p)
    p.set_defaults(fn=cmd_verify_d)

    p = sub.add_parser("cap", help="affine cap search / stored-cap verification")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--mode", choices=("exhaustive", "verify"))
    p.add_argument("--cap-file", help="whitespace-separated packed points")
    _common_flags(p)
    p.set_defaults(fn=cmd_cap)

    p = sub.add_parser("bound", help="knowledge-base bounds with trace")
    p.add_argument("--invariant", choices=("D", "s", "g"), required=True)
    p.add_argument("--group", required=True, help="homocyclic n,r")
    p.add_argument("--no-seeds", action="store_true", help="inference rules only")
    _common_flags(p)
    p.set_defaults(fn=cmd_bound)

    p = sub.add_parser("threshold", help="exact product-theorem thresholds")
    p.add_argument("--theorem1", help="n,r,c")
    p.add_argument("--app", type=int, choices=(1, 2, 3, 4))
    p.add_argument("--n", type=int)
    p.add_argument("--r", type=int, help="rank for application 3")
    _common_flags(p)
    p.set_defaults(fn=cmd_threshold)

    p = sub.add_parser("conjecture", help="conjecture consistency harnesses")
    p.add_argument("--c42", action="store_true")
    p.add_argument("--c43", action="store_true")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--a", type=int)
    p.add_argument("--g-c3r", type=int, default=None)
    _common_flags(p)
    p.set_defaults(fn=cmd_conjecture)

    p = sub.add_parser("compose-d0", help="constructive product-step demo")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--c", type=int, default=4, help="number of repeated elements")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seq", help="sequence file instead of a random instance")
    _common_flags(p)
    p.set_defaults(fn=cmd_compose_d0)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ZeroSumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
