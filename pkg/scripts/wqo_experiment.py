#!/usr/bin/env python3
"""How quickly does the homeomorphic embedding fire on random sequences?

The generalisation loop halts because ``embeds`` is a well-quasi-order
on terms over a finite alphabet: every infinite sequence contains an
earlier term embedded in a later one.  This script measures how soon
that happens in practice.  For each trial it draws a sequence of random
predicates and reports the first index j such that e_i ⊴ e_j for some
i < j.  Sequences that exhaust their length without an embedding are
logged, not treated as errors — the bound guarantees eventual embedding,
not embedding within 50 terms.

Usage: python3 scripts/wqo_experiment.py [--trials N] [--length N]
       [--depth N] [--seed N]
"""

import argparse
import random
import statistics

from loopinv.embedding import embeds
from loopinv.parser import pretty
from loopinv.terms import Num, Op, Var

VARS = "abc"
ARITH = ["+", "-", "*", "/"]
RELS = ["=", "<", "≤", ">", "≥", "≠"]


def rand_arith(rng: random.Random, depth: int):
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.5:
            return Var(rng.choice(VARS))
        return Num(rng.randrange(0, 4))
    return Op(rng.choice(ARITH), (rand_arith(rng, depth - 1), rand_arith(rng, depth - 1)))


def rand_predicate(rng: random.Random, depth: int):
    lhs = rand_arith(rng, depth)
    rhs = rand_arith(rng, depth)
    p = Op(rng.choice(RELS), (lhs, rhs))
    if rng.random() < 0.3:
        q = Op(rng.choice(RELS), (rand_arith(rng, depth), rand_arith(rng, depth)))
        p = Op(rng.choice(["∧", "∨", "⇒"]), (p, q))
    return p


def first_embedding(seq) -> int | None:
    """Index of the first term that embeds an earlier one, or None."""
    for j in range(1, len(seq)):
        if any(embeds(seq[i], seq[j]) for i in range(j)):
            return j
    return None


def run() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--length", type=int, default=50)
    ap.add_argument("--depth", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    hits: list[int] = []
    misses = 0
    for t in range(args.trials):
        seq = [rand_predicate(rng, args.depth) for _ in range(args.length)]
        j = first_embedding(seq)
        if j is None:
            misses += 1
            print(f"trial {t}: no embedding within {args.length} terms; first term: {pretty(seq[0])}")
        else:
            hits.append(j)

    print(f"\ntrials: {args.trials}  sequence length: {args.length}  depth: {args.depth}")
    if hits:
        print(
            f"embedding found in {len(hits)} trials; first hit at index "
            f"min={min(hits)} median={statistics.median(hits):g} "
            f"mean={statistics.fmean(hits):.2f} max={max(hits)}"
        )
    print(f"sequences with no embedding in range: {misses}")
    return 0


if __name__ == "__main__":
    raise SystemExit(run())
