"""Permutations of eigenvalue labels and the groups they generate.

Labels are 1-based in cycle notation and 0-based internally.  ``(132)``
sends 1 to 3, 3 to 2 and 2 to 1.  ``p2 * p1`` applies ``p1`` first.
"""

import re
from dataclasses import dataclass
from itertools import combinations
from math import lcm

from .errors import SizeMismatch


@dataclass(frozen=True)
class Permutation:
    images: tuple

    def __post_init__(self):
        images = tuple(int(k) for k in self.images)
        if sorted(images) != list(range(len(images))):
            raise ValueError(f"not a bijection on 0..{len(images) - 1}: {images}")
        object.__setattr__(self, "images", images)

    @classmethod
    def identity(cls, n):
        return cls(tuple(range(n)))

    @classmethod
    def from_cycles(cls, text, n):
        """Parse cycle notation such as ``"(132)"``, ``"(1 3)(2 4)"`` or ``"()"``."""
        text = text.strip()
        if re.sub(r"\([^()]*\)", "", text).strip():
            raise ValueError(f"malformed cycle notation {text!r}")
        images = list(range(n))
        used = set()
        for cycle in re.findall(r"\(([^()]*)\)", text):
            tokens = [t for t in re.split(r"[\s,]+", cycle.strip()) if t]
            if not all(t.isdigit() for t in tokens):
                raise ValueError(f"bad cycle {cycle!r}")
            if len(tokens) == 1 and n < 10:
                labels = [int(ch) for ch in tokens[0]]
            else:
                labels = [int(t) for t in tokens]
            if any(not 1 <= k <= n for k in labels) or len(set(labels)) != len(labels) or used & set(labels):
                raise ValueError(f"bad or overlapping cycle {cycle!r} for n={n}")
            used |= set(labels)
            for a, b in zip(labels, labels[1:] + labels[:1]):
                images[a - 1] = b - 1
        return cls(tuple(images))

    def __len__(self):
        return len(self.images)

    def __call__(self, k):
        return self.images[k]

    def __mul__(self, other):
        return compose(self, other)

    def inverse(self):
        inv = [0] * len(self.images)
        for k, v in enumerate(self.images):
            inv[v] = k
        return Permutation(tuple(inv))

    def is_identity(self):
        return all(k == v for k, v in enumerate(self.images))

    def cycles(self):
        seen, out = set(), []
        for start in range(len(self.images)):
            if start in seen:
                continue
            cyc, k = [start], self.images[start]
            seen.add(start)
            while k != start:
                cyc.append(k)
                seen.add(k)
                k = self.images[k]
            if len(cyc) > 1:
                out.append(tuple(cyc))
        return out

    def cycle_type(self):
        """Sorted lengths of the non-trivial cycles, e.g. ``(3,)`` for a 3-cycle."""
        return tuple(sorted((len(c) for c in self.cycles()), reverse=True))

    def order(self):
        return lcm(*self.cycle_type()) if self.cycle_type() else 1

    def __str__(self):
        cyc = self.cycles()
        if not cyc:
            return "()"
        sep = "" if len(self.images) < 10 else " "
        return "".join("(" + sep.join(str(k + 1) for k in c) + ")" for c in cyc)

    def __repr__(self):
        return f"Permutation({self})"


def compose(p2, p1):
    """``p2 o p1``: apply ``p1`` first."""
    if len(p2) != len(p1):
        raise SizeMismatch(f"cannot compose permutations of sizes {len(p2)} and {len(p1)}")
    return Permutation(tuple(p2.images[k] for k in p1.images))


def inverse(p):
    return p.inverse()


def conjugate(p, q):
    """``q^-1 o p o q``."""
    return q.inverse() * p * q


@dataclass(frozen=True)
class LambdaGroup:
    elements: frozenset
    generators: tuple

    @property
    def order(self):
        return len(self.elements)

    def __contains__(self, p):
        return p in self.elements

    def commutation_witness(self):
        """A non-commuting pair, generators tried first, or None."""
        pools = [self.generators, sorted(self.elements, key=lambda p: p.images)]
        for pool in pools:
            for a, b in combinations(pool, 2):
                if a * b != b * a:
                    return a, b
        return None


def lambda_group(generators, n=None):
    gens = tuple(generators)
    if not gens and n is None:
        raise ValueError("need at least one generator or an explicit size")
    size = len(gens[0]) if gens else n
    if any(len(g) != size for g in gens):
        raise SizeMismatch("generators have different sizes")
    ident = Permutation.identity(size)
    elements = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for p in frontier:
            for g in gens:
                q = g * p
                if q not in elements:
                    elements.add(q)
                    nxt.append(q)
        frontier = nxt
    return LambdaGroup(frozenset(elements), gens)


def is_abelian(group):
    return group.commutation_witness() is None
