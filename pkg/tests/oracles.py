"""Independent reference computations used as test oracles."""

from __future__ import annotations

import math
from itertools import product

from icmaus.alignment import Alignment
from icmaus.encoding import encode_alignment
from icmaus.engine import ScoredAlignment, admissible
from icmaus.errors import LegalityError


def token_frequencies(kb_rows, new_symbols):
    """f(s) and T by counting tokens directly."""
    f = {}
    for symbols, freq in kb_rows:
        for s in symbols:
            f[s] = f.get(s, 0) + freq
    for s in new_symbols:
        f[s] = f.get(s, 0) + 1
    return f, sum(f.values())


def cost(f, T, s):
    return -math.log2(f[s] / T)


def best_hit_sequences(driver, target, weight, gap=0.0):
    """Best order-preserving hit sequences by exhaustive enumeration.

    A sequence scores its summed symbol weights less ``gap`` for every
    skip in the driver between consecutive hits.
    """
    pairs = [(i, j) for i, a in enumerate(driver) for j, b in enumerate(target) if a == b]
    chains = []

    def grow(chain, start):
        chains.append(chain)
        for k in range(start, len(pairs)):
            if not chain or (pairs[k][0] > pairs[chain[-1]][0] and pairs[k][1] > pairs[chain[-1]][1]):
                grow(chain + (k,), k + 1)

    grow((), 0)
    # same order as trying combinations by size
    chains.sort(key=lambda c: (len(c), c))
    best, best_score = [], -1.0
    for chain in chains[1:]:
        combo = tuple(pairs[k] for k in chain)
        score = sum(weight(driver[i]) for i, _ in combo)
        score -= gap * sum(b[0] != a[0] + 1 for a, b in zip(combo, combo[1:]))
        if score > best_score + 1e-12:
            best, best_score = [combo], score
        elif abs(score - best_score) <= 1e-12:
            best.append(combo)
    return best, best_score


def _placements(a: Alignment, p):
    """Every way to hit ``p`` onto existing columns (at least one hit)."""
    options = []
    for j in range(len(p)):
        opts = [None]
        for c, cells in enumerate(a.columns):
            if a.symbol(c) != p[j]:
                continue
            if any(a.rows[r].id == p.id and pos == j for r, pos in cells):
                continue
            opts.append(c)
        options.append(opts)
    for choice in product(*options):
        hits = [(c, j) for j, c in enumerate(choice) if c is not None]
        if not hits or len({c for c, _ in hits}) < len(hits):
            continue
        # a later hit that already precedes an earlier one closes a cycle
        if any(a.precedes(c2, c1) for i, (c1, _) in enumerate(hits) for c2, _ in hits[i + 1:]):
            continue
        yield hits


def all_alignments(new, kb, max_old_rows=2, legal_only=True):
    """Every alignment with up to ``max_old_rows`` connected Old rows."""
    out = {}
    frontier = [Alignment.single(new)]
    for _ in range(max_old_rows):
        nxt = []
        for a in frontier:
            for p in kb.patterns:
                for hits in _placements(a, p):
                    try:
                        b = a.extend(p, hits)
                    except LegalityError:
                        continue
                    k = (b.key(), b.provenance)
                    if k in out or (legal_only and b.illegal_pairs()):
                        continue
                    out[k] = b
                    nxt.append(b)
        frontier = nxt
    return list(out.values())


def brute_best_cd(new, kb, table, max_old_rows=2):
    best = None
    for a in all_alignments(new, kb, max_old_rows):
        if not a.matched_new_positions():
            continue
        sa = ScoredAlignment(a, encode_alignment(a, kb, table))
        if not admissible(sa, kb, table):
            continue
        cd = sa.CD
        best = cd if best is None else max(best, cd)
    return best


def staged_search_reference(pairs, weights, down, gap, beam, alts):
    """The staged kernel with plain full sorts and copied hit tuples."""
    def key(e):
        return (-e[0], tuple(h[0] for h in e[1]), tuple(h[1] for h in e[1]))

    groups = {}
    for i, j in pairs:
        groups[(i, j)] = [(weights[i], ((i, j),), i, j, 0 if down is None else down[i])]
    out = []
    while groups:
        states = []
        for entries in groups.values():
            states.append(sorted(entries, key=key)[:alts])
        states = sorted(states, key=lambda es: key(es[0]))[:beam]
        nxt = {}
        for entries in states:
            for e in entries:
                out.append(e)
                score, hits, li, lj, mask = e
                for i, j in pairs:
                    if j <= lj:
                        continue
                    if (i <= li) if down is None else (mask >> i) & 1:
                        continue
                    s = score + weights[i] - (gap if i != li + 1 else 0.0)
                    m = 0 if down is None else mask | down[i]
                    nxt.setdefault((i, j), []).append((s, hits + ((i, j),), i, j, m))
        groups = nxt
    return [(e[0], e[1]) for e in out]
