# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled trial loop for the SI diffusion step.

Must stay behaviourally identical to ``_pykernel``; both walk the active
nodes in list order and their neighbors in CSR order, consuming one uniform
per live trial.
"""

from libc.stdint cimport int32_t, int64_t


def count_trials(
    const int64_t[::1] indptr,
    const int32_t[::1] indices,
    const double[::1] probs,
    const int32_t[::1] time,
    int32_t[::1] active,
    Py_ssize_t n_active,
):
    """Drop exhausted nodes from ``active`` (in place, order kept).

    Returns ``(n_trials, n_active)``: live (infector, susceptible) pairs with
    p > 0, and the compacted active length.
    """
    cdef Py_ssize_t a, keep = 0, trials = 0, live
    cdef int64_t e
    cdef int32_t i
    for a in range(n_active):
        i = active[a]
        live = 0
        for e in range(indptr[i], indptr[i + 1]):
            if time[indices[e]] < 0 and probs[e] > 0.0:
                live += 1
        if live:
            active[keep] = i
            keep += 1
            trials += live
    return trials, keep


def apply_trials(
    const int64_t[::1] indptr,
    const int32_t[::1] indices,
    const int64_t[::1] csr_eid,
    const double[::1] probs,
    const int32_t[::1] time,
    int32_t[::1] parent,
    int64_t[::1] parent_edge,
    double[::1] best,
    int32_t[::1] active,
    Py_ssize_t n_active,
    const double[::1] uniforms,
):
    """Run one step of Bernoulli trials.

    A trial succeeds when ``u < p``. Among several successful infectors of the
    same node, the one with the smallest ``u / p`` wins; conditioned on
    success that ratio is uniform, so the winner is uniform among successes.
    Newly hit nodes are appended after ``active[n_active - 1]`` in first-hit
    order. Returns the number of new nodes.
    """
    cdef Py_ssize_t a, k = 0, n_new = 0
    cdef int64_t e
    cdef int32_t i, s
    cdef double p, u, ratio
    for a in range(n_active):
        i = active[a]
        for e in range(indptr[i], indptr[i + 1]):
            s = indices[e]
            if time[s] >= 0:
                continue
            p = probs[e]
            if p <= 0.0:
                continue
            u = uniforms[k]
            k += 1
            if u < p:
                ratio = u / p
                if best[s] < 0.0:
                    active[n_active + n_new] = s
                    n_new += 1
                    best[s] = ratio
                    parent[s] = i
                    parent_edge[s] = csr_eid[e]
                elif ratio < best[s]:
                    best[s] = ratio
                    parent[s] = i
                    parent_edge[s] = csr_eid[e]
    return n_new
