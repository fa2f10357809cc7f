"""Canonical storage of correlation coefficient tensors.

An entry F(g; i_1..i_n | j_1..j_2m) is symmetric in the bosonic indices i
and antisymmetric in the fermionic indices j. Entries are stored under the
canonical key (bosonic sorted ascending, fermionic strictly ascending) and
retrieval/storage with permuted index lists applies the sign of the
fermionic sorting permutation.
"""

from __future__ import annotations


class ParityError(Exception):
    """A nonzero entry with an even bosonic or odd fermionic index."""


class StabilityError(Exception):
    """Key below the stability bound 2g + n + 2m > 2."""


class IndexBoundError(Exception):
    """An index exceeding the level bound B(chi) = epsilon*(chi - 2)."""


def index_bound(chi, epsilon=3):
    """Largest index that can appear in an entry at level chi.

    Each level step can raise the reachable index by at most the leading
    exponent epsilon (seeded by index epsilon at level 3); the bound is
    attained, e.g. by the genus-two one-point coefficient at index 9,
    level 5, and by the genus-one two-fermion coefficient at index 6,
    level 4, both on the cubic one-parameter curve.
    """
    return epsilon * (chi - 2)


def _sort_with_sign(seq):
    """Sort a sequence, returning (sorted tuple, permutation sign).

    Returns sign 0 if the sequence has a repeated element.
    """
    items = list(seq)
    sign = 1
    # insertion sort; fine at these sizes and counts inversions exactly
    for i in range(1, len(items)):
        j = i
        while j > 0 and items[j - 1] > items[j]:
            items[j - 1], items[j] = items[j], items[j - 1]
            sign = -sign
            j -= 1
    for a, b in zip(items, items[1:]):
        if a == b:
            return tuple(items), 0
    return tuple(items), sign


def partition_sign(whole, part1, part2):
    """Sign of the permutation rearranging `whole` into part1 + part2.

    part1 and part2 must be positioned sub-sequences that interleave to
    `whole` (elements taken in order, disjoint positions).
    """
    positions1, positions2 = [], []
    it1, it2 = 0, 0
    for pos, value in enumerate(whole):
        if it1 < len(part1) and part1[it1] == value:
            positions1.append(pos)
            it1 += 1
        elif it2 < len(part2) and part2[it2] == value:
            positions2.append(pos)
            it2 += 1
        else:
            raise ValueError(f"{part1}, {part2} do not interleave to {whole}")
    if it1 != len(part1) or it2 != len(part2):
        raise ValueError(f"{part1}, {part2} do not interleave to {whole}")
    inversions = sum(1 for p1 in positions1 for p2 in positions2 if p1 > p2)
    return -1 if inversions % 2 else 1


def iter_partitions(seq):
    """All ways to split seq into two positioned sub-sequences.

    Yields (part1, part2, sign) with sign = partition_sign(seq, p1, p2).
    """
    n = len(seq)
    for mask in range(1 << n):
        part1, part2 = [], []
        positions1, positions2 = [], []
        for pos in range(n):
            if mask >> pos & 1:
                part1.append(seq[pos])
                positions1.append(pos)
            else:
                part2.append(seq[pos])
                positions2.append(pos)
        inversions = sum(
            1 for p1 in positions1 for p2 in positions2 if p1 > p2)
        yield tuple(part1), tuple(part2), (-1 if inversions % 2 else 1)


class CorrTensor:
    """Map from canonical keys (g, bos, fer) to scalar values."""

    def __init__(self, ring, chi_max, epsilon=3):
        self.ring = ring
        self.chi_max = chi_max
        self.epsilon = epsilon
        self.entries = {}

    @staticmethod
    def chi(g, bos, fer):
        return 2 * g + len(bos) + len(fer)

    def get(self, g, bos, fer):
        bos = tuple(sorted(bos))
        fer, sign = _sort_with_sign(fer)
        if sign == 0:
            return self.ring.zero()
        value = self.entries.get((g, bos, fer))
        if value is None:
            return self.ring.zero()
        return value if sign == 1 else -value

    def set(self, g, bos, fer, value):
        bos_sorted = tuple(sorted(bos))
        fer_sorted, sign = _sort_with_sign(fer)
        chi = self.chi(g, bos_sorted, fer_sorted)
        if chi <= 2:
            raise StabilityError(f"unstable key g={g}, {bos}, {fer}")
        if sign == 0:
            if value:
                raise ParityError(
                    f"nonzero value at repeated fermionic index {fer}")
            return
        if len(fer_sorted) % 2:
            raise ParityError(f"odd number of fermionic slots: {fer}")
        if value:
            if any(i % 2 == 0 for i in bos_sorted):
                raise ParityError(f"even bosonic index in {bos}")
            if any(j % 2 for j in fer_sorted):
                raise ParityError(f"odd fermionic index in {fer}")
            bound = index_bound(chi, self.epsilon)
            if any(i > bound for i in bos_sorted) or \
                    any(j > bound for j in fer_sorted):
                raise IndexBoundError(
                    f"index beyond bound {bound} at level {chi}: "
                    f"{bos}, {fer}")
        key = (g, bos_sorted, fer_sorted)
        stored = value if sign == 1 else -value
        if stored:
            self.entries[key] = stored
        else:
            self.entries.pop(key, None)

    def keys_at_chi(self, chi):
        return sorted(key for key in self.entries
                      if self.chi(*key) == chi)

    def sorted_keys(self):
        return sorted(self.entries, key=lambda k: (self.chi(*k),) + k)

    def nonzero_equal(self, other):
        return self.entries == other.entries
