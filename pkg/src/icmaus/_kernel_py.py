"""Pure-Python staged hit-sequence search.

Reference implementation of the kernel; ``_ckernel.pyx`` mirrors it
operation for operation so both backends return identical results.

A search state is keyed by its last hit ``(i, j)``.  Each state keeps up to
``alts`` entries ``(score, node, last_i, last_j, mask)`` where ``mask`` is
the union of the down-sets of the driver positions already hit and ``node``
is ``(hit, parent_node)``, so extending a sequence does not copy it.  A driver
position may be hit next only if it is outside ``mask`` and the target
position increases.
"""

from bisect import bisect_right
from operator import itemgetter

_score = itemgetter(0)


def hits_of(node) -> tuple:
    out = []
    while node is not None:
        out.append(node[0])
        node = node[1]
    out.reverse()
    return tuple(out)


def _entry_key(e):
    hits = hits_of(e[1])
    return (-e[0], tuple(h[0] for h in hits), tuple(h[1] for h in hits))


def _first(items, n, score, key):
    """The first ``n`` of ``items`` under ``key``, which orders by -score first."""
    if len(items) > n:
        # only items scoring at least the n-th best can make the cut
        items.sort(key=score, reverse=True)
        cut = score(items[n - 1])
        k = n
        while k < len(items) and score(items[k]) == cut:
            k += 1
        del items[k:]
    if len(items) > 1:
        items.sort(key=key)
    del items[n:]
    return items


def _bucket_score(entries):
    return entries[0][0]


def _bucket_key(entries):
    return _entry_key(entries[0])


def _retain(groups, beam, alts):
    states = [_first(entries, alts, _score, _entry_key) for entries in groups.values()]
    return _first(states, beam, _bucket_score, _bucket_key)


def staged_search(pairs, weights, down, gap, beam, alts):
    """Collect every retained hit sequence from every stage.

    pairs   -- allowed (i, j) hits, sorted by (j, i)
    weights -- score of a hit on driver position i
    down    -- per driver position, bitmask of positions at or before it;
               None means the driver is a plain sequence
    """
    js = [p[1] for p in pairs]
    linear = down is None
    groups = {}
    for i, j in pairs:
        mask = 0 if linear else down[i]
        groups[(i, j)] = [(weights[i], ((i, j), None), i, j, mask)]
    out = []
    while groups:
        states = _retain(groups, beam, alts)
        nxt = {}
        for entries in states:
            for e in entries:
                out.append(e)
                score, node, li, lj, mask = e
                for k in range(bisect_right(js, lj), len(pairs)):
                    i, j = pairs[k]
                    if linear:
                        if i <= li:
                            continue
                    elif (mask >> i) & 1:
                        continue
                    s = score + weights[i]
                    if i != li + 1:
                        s -= gap
                    m = 0 if linear else mask | down[i]
                    bucket = nxt.get((i, j))
                    if bucket is None:
                        nxt[(i, j)] = [(s, ((i, j), node), i, j, m)]
                    else:
                        bucket.append((s, ((i, j), node), i, j, m))
        groups = nxt
    return [(e[0], hits_of(e[1])) for e in out]
