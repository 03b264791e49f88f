"""METEOR with exact-match and Porter-stem alignment stages.

Stage 1 pairs identical tokens; stage 2 pairs Porter stems among the
tokens stage 1 left unmatched. Each stage commits the maximum-cardinality
one-to-one matching that minimizes the chunk count of the cumulative
alignment, breaking ties toward the leftmost pairing. The score combines
a recall-weighted harmonic mean (alpha) with the fragmentation penalty
gamma * (chunks / matches) ** beta.

Chunk minimization is exact: a greedy warm start bounds a memoized
branch-and-bound search. Cost grows with the number of repeated tokens
that are ambiguous between the two sides; ordinary sentences resolve in
linear-ish time.
"""

from __future__ import annotations

import sys

from .stemmer import porter_stem

ALPHA = 0.9
BETA = 3.0
GAMMA = 0.5

Pair = tuple[int, int]


def meteor(candidate: list[str], reference: list[str]) -> float:
    if not candidate or not reference:
        return 0.0
    pairs = align(candidate, reference)
    m = len(pairs)
    if m == 0:
        return 0.0
    precision = m / len(candidate)
    recall = m / len(reference)
    fmean = (precision * recall) / (ALPHA * precision + (1.0 - ALPHA) * recall)
    chunks = _chunk_count(pairs)
    penalty = GAMMA * (chunks / m) ** BETA
    return fmean * (1.0 - penalty)


def align(candidate: list[str], reference: list[str]) -> tuple[Pair, ...]:
    """Two-stage alignment as (candidate index, reference index) pairs."""
    pairs = _stage_match(list(candidate), list(reference), ())
    stems_c = [porter_stem(t) for t in candidate]
    stems_r = [porter_stem(t) for t in reference]
    return _stage_match(stems_c, stems_r, pairs)


def _chunk_count(pairs: tuple[Pair, ...]) -> int:
    """Maximal runs of pairs contiguous on both sides; pairs sorted by candidate."""
    count = 0
    prev = None
    for ci, rj in pairs:
        if prev is None or ci - 1 != prev[0] or rj - 1 != prev[1]:
            count += 1
        prev = (ci, rj)
    return count


def _stage_match(
    cand_keys: list[str],
    ref_keys: list[str],
    fixed: tuple[Pair, ...],
) -> tuple[Pair, ...]:
    """Extend `fixed` with a min-chunk maximum matching on equal keys."""
    fixed_by_cand = dict(fixed)
    fixed_refs = {rj for _, rj in fixed}

    free_refs_by_key: dict[str, list[int]] = {}
    for j, key in enumerate(ref_keys):
        if j not in fixed_refs:
            free_refs_by_key.setdefault(key, []).append(j)

    free_cands_by_key: dict[str, list[int]] = {}
    for i, key in enumerate(cand_keys):
        if i not in fixed_by_cand:
            free_cands_by_key.setdefault(key, []).append(i)

    need = {
        key: min(len(cands), len(free_refs_by_key.get(key, ())))
        for key, cands in free_cands_by_key.items()
        if free_refs_by_key.get(key)
    }
    need = {k: v for k, v in need.items() if v > 0}
    if not need:
        return tuple(sorted(fixed))

    # how many free candidate slots of each key remain strictly after position i
    slots_after: dict[int, int] = {}
    for key in need:
        positions = free_cands_by_key[key]
        for rank, i in enumerate(positions):
            slots_after[i] = len(positions) - rank - 1

    n_cand = len(cand_keys)

    def decided_pair(i: int) -> Pair | None:
        return (i, fixed_by_cand[i]) if i in fixed_by_cand else None

    def greedy() -> tuple[dict[int, int], int]:
        chosen: dict[int, int] = {}
        used: set[int] = set()
        remaining = dict(need)
        chunks = 0
        prev: Pair | None = None
        for i in range(n_cand):
            pair = decided_pair(i)
            if pair is None:
                key = cand_keys[i]
                if remaining.get(key, 0) > 0:
                    refs = [j for j in free_refs_by_key[key] if j not in used]
                    j = refs[0]
                    if prev is not None and prev[0] == i - 1:
                        cont = prev[1] + 1
                        if cont not in used and cont in free_refs_by_key[key]:
                            j = cont
                    chosen[i] = j
                    used.add(j)
                    remaining[key] -= 1
                    pair = (i, j)
            if pair is not None:
                if prev is None or pair[0] - 1 != prev[0] or pair[1] - 1 != prev[1]:
                    chunks += 1
                prev = pair
        return chosen, chunks

    warm_chosen, warm_chunks = greedy()

    limit = 2 * n_cand + 100
    if sys.getrecursionlimit() < limit:
        sys.setrecursionlimit(limit)

    best_chosen: dict[int, int] = warm_chosen
    best_chunks = warm_chunks + 1  # admit equal-cost branches for the lex tie-break
    memo: dict[tuple, int] = {}

    chosen: dict[int, int] = {}
    used: set[int] = set()
    remaining = dict(need)

    def dfs(i: int, chunks: int, prev: Pair | None) -> None:
        nonlocal best_chosen, best_chunks
        if chunks >= best_chunks:
            return
        if i == n_cand:
            best_chosen = dict(chosen)
            best_chunks = chunks
            return
        pair = decided_pair(i)
        if pair is not None:
            extra = 0 if (prev and pair[0] - 1 == prev[0] and pair[1] - 1 == prev[1]) else 1
            dfs(i + 1, chunks + extra, pair)
            return
        key = cand_keys[i]
        if remaining.get(key, 0) <= 0:
            dfs(i + 1, chunks, prev)
            return
        state = (i, frozenset(used), prev)
        seen = memo.get(state)
        if seen is not None and seen <= chunks:
            return
        memo[state] = chunks
        for j in free_refs_by_key[key]:
            if j in used:
                continue
            extra = 0 if (prev and i - 1 == prev[0] and j - 1 == prev[1]) else 1
            chosen[i] = j
            used.add(j)
            remaining[key] -= 1
            dfs(i + 1, chunks + extra, (i, j))
            del chosen[i]
            used.remove(j)
            remaining[key] += 1
        if slots_after[i] >= remaining[key]:
            dfs(i + 1, chunks, prev)

    dfs(0, 0, None)
    return tuple(sorted(list(fixed) + list(best_chosen.items())))
