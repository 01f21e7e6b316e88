# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled staged hit-sequence search.

Mirrors ``_kernel_py.staged_search`` step for step, including the order of
floating-point operations, so both backends return identical results.
Down-set masks are arrays of 64-bit words; a state's mask is held in a
``bytes`` object so testing a position costs one word lookup at any driver
length.
"""

from cpython.bytes cimport PyBytes_AS_STRING, PyBytes_FromStringAndSize
from libc.stdlib cimport free, malloc
from libc.string cimport memcpy

from ._kernel_py import hits_of

ctypedef unsigned long long mask_t


cdef Py_ssize_t _first_after(int *pj, Py_ssize_t n, int lj):
    # first k with pj[k] > lj; pj is sorted
    cdef Py_ssize_t lo = 0, hi = n, mid
    while lo < hi:
        mid = (lo + hi) // 2
        if pj[mid] <= lj:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef tuple _entry_key(tuple e):
    cdef list ii = [], jj = []
    node = e[1]
    while node is not None:
        hit = node[0]
        ii.append(hit[0])
        jj.append(hit[1])
        node = node[1]
    ii.reverse()
    jj.reverse()
    return (-<double> e[0], tuple(ii), tuple(jj))


cdef list _first(list items, Py_ssize_t n, bint buckets):
    # the first n under the entry key, which orders by -score first
    cdef Py_ssize_t k, m = len(items)
    cdef double cut
    if m > n:
        if buckets:
            items.sort(key=_bucket_score_py, reverse=True)
            cut = (<tuple> (<list> items[n - 1])[0])[0]
            k = n
            while k < m and (<tuple> (<list> items[k])[0])[0] == cut:
                k += 1
        else:
            items.sort(key=_score_py, reverse=True)
            cut = (<tuple> items[n - 1])[0]
            k = n
            while k < m and (<tuple> items[k])[0] == cut:
                k += 1
        del items[k:]
    if len(items) > 1:
        items.sort(key=_bucket_key_py if buckets else _entry_key_py)
    del items[n:]
    return items


def _score_py(e):
    return e[0]


def _entry_key_py(e):
    return _entry_key(e)


def _bucket_score_py(es):
    return es[0][0]


def _bucket_key_py(es):
    return _entry_key(es[0])


cdef list _retain(dict groups, Py_ssize_t beam, Py_ssize_t alts):
    cdef list states = [_first(entries, alts, False) for entries in groups.values()]
    return _first(states, beam, True)


cdef bytes _row_mask(mask_t *dn, Py_ssize_t i, Py_ssize_t words):
    cdef bytes out = PyBytes_FromStringAndSize(NULL, words * sizeof(mask_t))
    memcpy(PyBytes_AS_STRING(out), dn + i * words, words * sizeof(mask_t))
    return out


cdef bytes _or_mask(bytes m, mask_t *dn, Py_ssize_t i, Py_ssize_t words):
    cdef bytes out = PyBytes_FromStringAndSize(NULL, words * sizeof(mask_t))
    cdef mask_t *o = <mask_t *> PyBytes_AS_STRING(out)
    cdef const mask_t *a = <const mask_t *> PyBytes_AS_STRING(m)
    cdef const mask_t *b = dn + i * words
    cdef Py_ssize_t w
    for w in range(words):
        o[w] = a[w] | b[w]
    return out


def staged_search(pairs, weights, down, double gap, int beam, int alts):
    cdef bint linear = down is None
    cdef Py_ssize_t n = len(pairs), nw = len(weights), k, w
    cdef Py_ssize_t nd = 0 if linear else len(down)
    cdef Py_ssize_t words = max((nd + 63) // 64, 1)
    cdef int *pi = <int *> malloc(max(n, 1) * sizeof(int))
    cdef int *pj = <int *> malloc(max(n, 1) * sizeof(int))
    cdef double *wt = <double *> malloc(max(nw, 1) * sizeof(double))
    cdef mask_t *dn = <mask_t *> malloc(max(nd, 1) * words * sizeof(mask_t))
    cdef int i, j, li, lj
    cdef double s, score
    cdef const mask_t *mp
    cdef bytes m
    if not (pi and pj and wt and dn):
        free(pi); free(pj); free(wt); free(dn)
        raise MemoryError()
    try:
        for k in range(n):
            pi[k] = pairs[k][0]
            pj[k] = pairs[k][1]
        for k in range(nw):
            wt[k] = weights[k]
        for k in range(nd):
            big = down[k]
            for w in range(words):
                dn[k * words + w] = (big >> (64 * w)) & 0xFFFFFFFFFFFFFFFF
        groups = {}
        for k in range(n):
            i = pi[k]
            j = pj[k]
            groups[(i, j)] = [(wt[i], ((i, j), None), i, j, None if linear else _row_mask(dn, i, words))]
        out = []
        while groups:
            states = _retain(groups, beam, alts)
            nxt = {}
            for entries in states:
                for e in entries:
                    out.append(e)
                    score = e[0]
                    node = e[1]
                    li = e[2]
                    lj = e[3]
                    if not linear:
                        m = e[4]
                        mp = <const mask_t *> PyBytes_AS_STRING(m)
                    for k in range(_first_after(pj, n, lj), n):
                        i = pi[k]
                        if linear:
                            if i <= li:
                                continue
                        elif (mp[i >> 6] >> (i & 63)) & 1:
                            continue
                        s = score + wt[i]
                        if i != li + 1:
                            s -= gap
                        key = (i, pj[k])
                        entry = (s, (key, node), i, pj[k],
                                 None if linear else _or_mask(m, dn, i, words))
                        bucket = nxt.get(key)
                        if bucket is None:
                            nxt[key] = [entry]
                        else:
                            bucket.append(entry)
            groups = nxt
        return [(e[0], hits_of(e[1])) for e in out]
    finally:
        free(pi)
        free(pj)
        free(wt)
        free(dn)
