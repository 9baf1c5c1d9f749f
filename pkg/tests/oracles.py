"""Independent brute-force oracles the tests check the fast paths against.

Everything here is deliberately written the slow, obvious way and shares no
code with the library implementations.
"""

from __future__ import annotations


def otsu_bruteforce(hist) -> int:
    """Exhaustive search over all 256 thresholds, lowest wins ties.

    Classes are {v < t} and {v >= t}; the score is w0*w1*(mu0-mu1)^2.
    """
    best_t, best_score = 0, -1.0
    for t in range(256):
        w0 = sum(int(hist[v]) for v in range(t))
        w1 = sum(int(hist[v]) for v in range(t, 256))
        if w0 == 0 or w1 == 0:
            score = 0.0
        else:
            mu0 = sum(v * int(hist[v]) for v in range(t)) / w0
            mu1 = sum(v * int(hist[v]) for v in range(t, 256)) / w1
            d = mu0 - mu1
            score = (w0 * w1) * (d * d)
        if score > best_score:
            best_score, best_t = score, t
    return best_t


def trie_minimal_states(words) -> int:
    """State count of the minimal acyclic automaton, via explicit trie
    construction followed by bottom-up equivalence merging."""
    trie: list[dict] = [{}]
    final = [False]
    for word in set(words):
        node = 0
        for glyph in word:
            nxt = trie[node].get(glyph)
            if nxt is None:
                nxt = len(trie)
                trie.append({})
                final.append(False)
                trie[node][glyph] = nxt
            node = nxt
        final[node] = True

    canon: dict[tuple, int] = {}
    canon_id = [None] * len(trie)

    def visit(node: int) -> int:
        if canon_id[node] is not None:
            return canon_id[node]
        sig = (final[node], tuple((g, visit(t)) for g, t in sorted(trie[node].items())))
        if sig not in canon:
            canon[sig] = len(canon)
        canon_id[node] = canon[sig]
        return canon_id[node]

    visit(0)
    return len(canon)


def cluster_intervals_bruteforce(intervals, gap_min) -> list[set[int]]:
    """Transitive closure of 'overlaps or gap < gap_min' over y-intervals.

    Returns the partition as sets of input indices, ordered top to bottom
    (by descending highest edge).
    """
    n = len(intervals)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for i in range(n):
        for j in range(i + 1, n):
            lo_i, hi_i = intervals[i]
            lo_j, hi_j = intervals[j]
            gap = max(lo_i - hi_j, lo_j - hi_i, 0)
            if lo_i <= hi_j and lo_j <= hi_i:
                gap = 0
            if gap < gap_min:
                parent[find(i)] = find(j)
    groups: dict[int, set[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), set()).add(i)
    return sorted(
        groups.values(), key=lambda g: -max(intervals[i][1] for i in g)
    )


def lloyd_reference(points, centers, max_iter=100):
    """Plain-python Lloyd iteration (no empty-cluster handling needed for
    well-separated planted data)."""
    import numpy as np

    points = np.asarray(points, dtype=np.float64)
    centers = np.asarray(centers, dtype=np.float64).copy()
    labels = None
    for _ in range(max_iter):
        new_labels = []
        for p in points:
            dists = [float(((p - c) ** 2).sum()) for c in centers]
            new_labels.append(dists.index(min(dists)))
        new_labels = np.array(new_labels)
        if labels is not None and (new_labels == labels).all():
            break
        labels = new_labels
        for k in range(len(centers)):
            members = points[labels == k]
            if len(members):
                centers[k] = members.mean(axis=0)
    return centers, labels
