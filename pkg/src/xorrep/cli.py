"""Command-line front end: ``analyze``, ``decay``, ``cheby`` and ``selftest``.

Game files are JSON objects with keys ``sigma``, ``gamma``, ``phi``
(lists of symbol strings), ``modulus`` and ``support`` (a list of
``{"x", "y", "z", "p": "num/den", "t"}`` entries).  Exit codes: 0 ok,
1 selftest failure, 2 bad input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from ._util import parse_fraction
from .config import BudgetExceeded, default_budget
from .game import (GameValidationError, Strategy, TripartiteDistribution, XorGame, crt_decompose,
                   exact_event_count, is_pairwise_connected, validate, value_exact, value_search)

GAME_KEYS = ("sigma", "gamma", "phi", "modulus", "support")
ENTRY_KEYS = ("x", "y", "z", "p", "t")
DECAY_COLUMNS = ("n", "exact_value", "search_value", "product_bound", "supermult_ok", "spectral_reference")


class InputError(ValueError):
    pass


# ---------------------------------------------------------------- game files

def _fraction_text(v: Fraction) -> str:
    return f"{v.numerator}/{v.denominator}"


def game_from_dict(doc) -> XorGame:
    if not isinstance(doc, dict):
        raise InputError("game file must be a JSON object")
    extra = sorted(set(doc) - set(GAME_KEYS))
    if extra:
        raise InputError(f"unknown game file key(s): {extra}")
    missing = [k for k in GAME_KEYS if k not in doc]
    if missing:
        raise InputError(f"missing game file key(s): {missing}")
    alphabets = []
    for key in ("sigma", "gamma", "phi"):
        al = doc[key]
        if not isinstance(al, list) or not all(isinstance(s, str) for s in al):
            raise InputError(f"{key} must be a list of strings")
        if len(set(al)) != len(al):
            raise InputError(f"{key} has repeated symbols")
        alphabets.append(al)
    m = doc["modulus"]
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        raise InputError("modulus must be a positive integer")
    if not isinstance(doc["support"], list) or not doc["support"]:
        raise InputError("support must be a non-empty list")
    index = [{s: i for i, s in enumerate(al)} for al in alphabets]
    support, probs, target = [], [], {}
    for n, entry in enumerate(doc["support"]):
        if not isinstance(entry, dict):
            raise InputError(f"support entry {n} must be an object")
        extra = sorted(set(entry) - set(ENTRY_KEYS))
        if extra:
            raise InputError(f"support entry {n}: unknown key(s) {extra}")
        missing = [k for k in ENTRY_KEYS if k not in entry]
        if missing:
            raise InputError(f"support entry {n}: missing key(s) {missing}")
        try:
            triple = tuple(index[a][entry[k]] for a, k in enumerate("xyz"))
        except (KeyError, TypeError):
            raise InputError(f"support entry {n}: symbol not in its alphabet") from None
        try:
            p = parse_fraction(entry["p"])
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"support entry {n}: bad probability {entry['p']!r} ({exc})") from None
        t = entry["t"]
        if not isinstance(t, int) or isinstance(t, bool):
            raise InputError(f"support entry {n}: target must be an integer")
        if triple in target:
            raise InputError(f"support entry {n}: duplicate support triple")
        support.append(triple)
        probs.append(p)
        target[triple] = t
    dist = TripartiteDistribution(*alphabets, tuple(support), tuple(probs))
    try:
        return validate(XorGame(dist, m, target))
    except GameValidationError as exc:
        raise InputError(str(exc)) from None


def game_to_dict(game: XorGame) -> dict:
    d = game.dist
    return {
        "sigma": list(map(str, d.sigma)),
        "gamma": list(map(str, d.gamma)),
        "phi": list(map(str, d.phi)),
        "modulus": game.modulus,
        "support": [
            {"x": str(d.sigma[x]), "y": str(d.gamma[y]), "z": str(d.phi[z]),
             "p": _fraction_text(p), "t": int(game.target[(x, y, z)]) % game.modulus}
            for (x, y, z), p in d.atoms()
        ],
    }


def dumps_game(game: XorGame) -> str:
    return json.dumps(game_to_dict(game), indent=2) + "\n"


def loads_game(text: str) -> XorGame:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from None
    return game_from_dict(doc)


def load_game(path) -> XorGame:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    return loads_game(text)


# ---------------------------------------------------------------- analyze

def _labels(al, values):
    return {str(s): int(v) for s, v in zip(al, values)}


def analyze(game: XorGame, r: int | None = None, j_max: int = 6, ns=(1,), budget: int | None = None,
            mode: str = "exact", seed: int = 0) -> dict:
    from .embed import certify_minimal, default_order_bound, has_nontrivial_z_embedding, master_embedding, minimal_N
    import warnings

    budget = default_budget() if budget is None else budget
    dist = game.dist
    report: dict = {"game": {"sizes": list(dist.sizes), "modulus": game.modulus, "atoms": len(dist.support)}}
    ok, comps = is_pairwise_connected(dist)
    report["connectivity"] = {
        "pairwise_connected": ok,
        "components": {k: [[list(map(str, a)), list(map(str, b))] for a, b in v] for k, v in comps.items()},
    }
    z, wit = has_nontrivial_z_embedding(dist)
    report["z_embedding"] = {
        "exists": z,
        "witness": None if wit is None else {
            "alpha": _labels(dist.sigma, wit.alpha), "beta": _labels(dist.gamma, wit.beta),
            "gamma": _labels(dist.phi, wit.gamma)},
    }
    r_used = default_order_bound(dist) if r is None else r
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            me = master_embedding(dist, r_used)
        report["master"] = {"r": r_used, "invariants": list(me.master_group.invariants),
                            "order": me.master_group.order, "description": me.master_group.describe(),
                            "embeddings": len(me.embeddings)}
    except BudgetExceeded as exc:
        report["master"] = {"r": r_used, "skipped": str(exc)}
    mins = []
    for part in crt_decompose(game):
        te = minimal_N(part, j_max=j_max)
        if te is None:
            mins.append({"modulus": part.modulus, "N": None, "j_max": j_max})
        else:
            mins.append({"modulus": part.modulus, "p": te.p, "k": te.k, "N": te.N,
                         "a": _labels(dist.sigma, te.a), "b": _labels(dist.gamma, te.b),
                         "c": _labels(dist.phi, te.c), "certified_minimal": certify_minimal(te)})
    report["minimal_N"] = mins
    if any(m["N"] is None for m in mins):
        cls = "nonembeddable over \U0001d53b (within bound)"
    elif all(m["N"] == 1 for m in mins):
        cls = "perfect strategy (N = 1)"
    else:
        cls = "embeddable"
    report["classification"] = cls
    values = []
    for n in ns:
        row: dict = {"n": n}
        if mode in ("exact", "both"):
            events = exact_event_count(game, n)
            if events > budget:
                row["exact"] = f"skipped: {events} events exceed the budget of {budget}"
            else:
                row["exact"] = _fraction_text(value_exact(game, n, budget=budget).value)
        if mode in ("search", "both"):
            rep = value_search(game, n, seed=seed)
            row["search"] = _fraction_text(rep.exact)
        values.append(row)
    report["values"] = values
    return report


# ---------------------------------------------------------------- decay

def _float(v: float) -> str:
    return f"{v:.12g}"


def decay_rows(game: XorGame, n_max: int, mode: str = "both", seed: int = 0, budget: int | None = None,
               iterations: int = 2000) -> list[dict]:
    """One row per ``n``; absent values are empty strings."""
    from .analytic import spectral_upper_bound

    budget = default_budget() if budget is None else budget
    best: dict[int, tuple[Fraction, Strategy]] = {}
    rows = []
    for n in range(1, n_max + 1):
        row = dict.fromkeys(DECAY_COLUMNS, "")
        row["n"] = str(n)
        split = None
        if n > 1:
            cands = [(best[a][0] * best[n - a][0], a) for a in range(1, n) if a in best and n - a in best]
            if cands:
                split = max(cands)
                row["product_bound"] = _fraction_text(split[0])
        known: list[tuple[Fraction, Strategy]] = []
        if mode in ("exact", "both") and exact_event_count(game, n) <= budget:
            rep = value_exact(game, n, budget=budget)
            row["exact_value"] = _fraction_text(rep.value)
            known.append((rep.value, rep.witness))
        if mode in ("search", "both"):
            init = None
            if split is not None:
                a = split[1]
                init = best[a][1].product(best[n - a][1])
            rep = value_search(game, n, seed=seed, iterations=iterations, initial=init)
            row["search_value"] = _float(rep.value)
            known.append((rep.exact, rep.witness))
        if known:
            best[n] = max(known, key=lambda kv: kv[0])
            if split is not None:
                row["supermult_ok"] = "true" if best[n][0] >= split[0] else "false"
        try:
            row["spectral_reference"] = _float(spectral_upper_bound(game, n))
        except ValueError:
            pass
        rows.append(row)
    return rows


def decay_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=DECAY_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------- entry point

def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("values must be positive integers")
    return vals


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xorrep", description="Exact and analytic tools for 3-player XOR games.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--budget", type=int, default=None, help="scored-event budget (env XORREP_BUDGET)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None, help="write output here instead of stdout")

    a = sub.add_parser("analyze", help="JSON report on a game file")
    a.add_argument("game")
    a.add_argument("--r", type=int, default=None, help="order bound for the master embedding")
    a.add_argument("--jmax", type=int, default=6)
    a.add_argument("--n", type=_int_list, default=[1], help="repetition counts, e.g. 1,2")
    a.add_argument("--mode", choices=("exact", "search", "both"), default="exact")
    common(a)

    d = sub.add_parser("decay", help="CSV of values against n")
    d.add_argument("game")
    d.add_argument("--n", type=int, default=2, help="largest n")
    d.add_argument("--mode", choices=("exact", "search", "both"), default="both")
    d.add_argument("--iterations", type=int, default=2000)
    common(d)

    c = sub.add_parser("cheby", help="nodes, weights and audits of the mixing coefficients")
    c.add_argument("--d", type=int, default=4)
    c.add_argument("--eps", type=str, default="1/16")
    c.add_argument("--out", default=None)

    s = sub.add_parser("selftest", help="run the built-in invariant checks")
    s.add_argument("--scope", action="append", default=None, help="restrict to a module (repeatable)")
    s.add_argument("--inject-fault", action="append", default=[], help="deliberately corrupt a component")
    s.add_argument("--out", default=None)
    return parser


def _cmd_cheby(args) -> int:
    from .cheby import audit, noise_mix_coefficients
    eps = float(parse_fraction(args.eps))
    co = noise_mix_coefficients(args.d, eps)
    lines = [f"d = {co.d}, eps = {eps:.12g}"]
    for j, (rho, c) in enumerate(zip(co.nodes, co.weights)):
        lines.append(f"node {j}: rho = {rho:.12g}, c = {c:.12g}")
    lines.append(f"sum |c| = {co.abs_sum:.12g}")
    for line in audit(co):
        lines.append(f"{'PASS' if line.ok else 'FAIL'} {line.name} -- {line.detail}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_selftest(args) -> int:
    from . import selftest
    results = selftest.run(args.scope, args.inject_fault)
    lines = [r.line() for r in results]
    failed = [r for r in results if not r.ok]
    lines.append(f"{len(results) - len(failed)} passed, {len(failed)} failed")
    _emit("\n".join(lines) + "\n", args.out)
    return 1 if failed else 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "analyze":
            game = load_game(args.game)
            rep = analyze(game, args.r, args.jmax, args.n, args.budget, args.mode, args.seed)
            _emit(json.dumps(rep, indent=2, ensure_ascii=False) + "\n", args.out)
            return 0
        if args.command == "decay":
            game = load_game(args.game)
            if args.n < 1:
                raise InputError("--n must be at least 1")
            rows = decay_rows(game, args.n, args.mode, args.seed, args.budget, args.iterations)
            _emit(decay_csv(rows), args.out)
            return 0
        if args.command == "cheby":
            return _cmd_cheby(args)
        return _cmd_selftest(args)
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
