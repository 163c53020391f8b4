"""Pure-Python trial loop; reference semantics for the compiled kernel."""


def count_trials(indptr, indices, probs, time, active, n_active):
    keep = 0
    trials = 0
    for a in range(n_active):
        i = int(active[a])
        live = 0
        for e in range(int(indptr[i]), int(indptr[i + 1])):
            if time[indices[e]] < 0 and probs[e] > 0.0:
                live += 1
        if live:
            active[keep] = i
            keep += 1
            trials += live
    return trials, keep


def apply_trials(indptr, indices, csr_eid, probs, time, parent, parent_edge, best, active, n_active, uniforms):
    k = 0
    n_new = 0
    for a in range(n_active):
        i = int(active[a])
        for e in range(int(indptr[i]), int(indptr[i + 1])):
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
                elif ratio >= best[s]:
                    continue
                best[s] = ratio
                parent[s] = i
                parent_edge[s] = csr_eid[e]
    return n_new
