"""Probability measures with exact rational arithmetic.

All probabilities are fractions.Fraction values, so every identity checked
by this package (additivity, independence products, almost-sure equality)
is an exact equation rather than a floating-point approximation.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

from .space import SpaceSchema, atoms_of

ZERO = Fraction(0)
ONE = Fraction(1)


class ConditioningUndefinedError(ValueError):
    """Conditioning on an event of probability zero is undefined."""


class Measure:
    """A probability measure on the full outcome space.

    Weights are stored sparsely; outcomes absent from the table have weight
    zero.  The weights must be nonnegative and sum to exactly one.
    """

    __slots__ = ("schema", "_w")

    def __init__(self, schema: SpaceSchema, weights: Mapping, *, _trusted: bool = False):
        self.schema = schema
        w: dict = {}
        total = ZERO
        for outcome, q in weights.items():
            q = q if isinstance(q, Fraction) else Fraction(q)
            if q < 0:
                raise ValueError(f"negative weight {q} at {outcome!r}")
            if q == 0:
                continue
            outcome = tuple(outcome)
            if not _trusted:
                schema.require_outcome(outcome)
            if outcome in w:
                raise ValueError(f"duplicate weight entry for {outcome!r}")
            w[outcome] = q
            total += q
        if total != 1:
            raise ValueError(f"weights sum to {total}, not 1")
        self._w = w

    @classmethod
    def uniform(cls, schema: SpaceSchema) -> "Measure":
        q = Fraction(1, schema.n_outcomes)
        return cls(schema, {o: q for o in schema.outcomes()}, _trusted=True)

    @classmethod
    def dirac(cls, schema: SpaceSchema, outcome) -> "Measure":
        return cls(schema, {tuple(outcome): ONE})

    @classmethod
    def mixture(cls, schema: SpaceSchema, parts: Iterable[tuple[Fraction, "Measure"]]) -> "Measure":
        """The convex combination sum_i q_i * P_i (weights must sum to 1)."""
        w: dict = {}
        for q, part in parts:
            if q == 0:
                continue
            for outcome, p in part._w.items():
                w[outcome] = w.get(outcome, ZERO) + q * p
        return cls(schema, w, _trusted=True)

    def weight(self, outcome) -> Fraction:
        return self._w.get(tuple(outcome), ZERO)

    def prob(self, A) -> Fraction:
        """Total weight of an event (exact, finitely additive)."""
        self.schema.require_event(A)
        if len(self._w) <= len(A):
            return sum((q for o, q in self._w.items() if o in A), ZERO)
        return sum((self._w[o] for o in A if o in self._w), ZERO)

    def support(self) -> frozenset:
        return frozenset(self._w)

    def items(self):
        """Nonzero (outcome, weight) pairs in canonical outcome order."""
        return sorted(self._w.items())

    def as_dict(self) -> dict:
        return dict(self._w)

    def condition(self, G) -> "Measure":
        """The conditional measure given G; undefined when G is null."""
        pg = self.prob(G)
        if pg == 0:
            raise ConditioningUndefinedError("conditioning event has probability zero")
        w = {o: q / pg for o, q in self._w.items() if o in G}
        return Measure(self.schema, w, _trusted=True)

    def marginal(self, S) -> "Margin":
        """Pushforward onto the coordinates in S."""
        on = tuple(sorted(self.schema.positions(S)))
        w: dict = {}
        for outcome, q in self._w.items():
            row = tuple(outcome[i] for i in on)
            w[row] = w.get(row, ZERO) + q
        return Margin(self.schema, on, w, _trusted=True)

    def __eq__(self, other):
        return (
            isinstance(other, Measure)
            and self.schema == other.schema
            and self._w == other._w
        )

    def __hash__(self):
        return hash((self.schema, frozenset(self._w.items())))

    def __repr__(self):
        return f"Measure({len(self._w)} atoms on {self.schema!r})"


class Margin:
    """A probability measure on a projection of the outcome space.

    Rows are tuples of label indices over the ascending positions in `on`.
    Used for intervention measures and marginals; the empty projection
    carries the single row () with weight one.
    """

    __slots__ = ("schema", "on", "_w")

    def __init__(self, schema: SpaceSchema, on, weights: Mapping, *, _trusted: bool = False):
        self.schema = schema
        self.on = tuple(sorted(schema.positions(on)))
        w: dict = {}
        total = ZERO
        for row, q in weights.items():
            q = q if isinstance(q, Fraction) else Fraction(q)
            if q < 0:
                raise ValueError(f"negative weight {q} at {row!r}")
            if q == 0:
                continue
            row = tuple(row)
            if not _trusted:
                if len(row) != len(self.on):
                    raise ValueError(f"row {row!r} does not match projection {self.on}")
                for pos, v in zip(self.on, row):
                    if not 0 <= v < len(schema.coords[pos].labels):
                        raise ValueError(f"row {row!r} has an out-of-range value")
            if row in w:
                raise ValueError(f"duplicate weight entry for {row!r}")
            w[row] = q
            total += q
        if total != 1:
            raise ValueError(f"weights sum to {total}, not 1")
        self._w = w

    @classmethod
    def point(cls, schema: SpaceSchema, assignment: Mapping) -> "Margin":
        """Dirac measure on the projection named by the assignment keys."""
        fixed = {schema.position(ref): lab for ref, lab in assignment.items()}
        on = tuple(sorted(fixed))
        row = tuple(schema.label_index(p, fixed[p]) for p in on)
        return cls(schema, on, {row: ONE})

    @classmethod
    def uniform(cls, schema: SpaceSchema, S) -> "Margin":
        on = tuple(sorted(schema.positions(S)))
        n = 1
        for p in on:
            n *= len(schema.coords[p].labels)
        q = Fraction(1, n)
        rows = _all_rows(schema, on)
        return cls(schema, on, {r: q for r in rows}, _trusted=True)

    def weight(self, row) -> Fraction:
        return self._w.get(tuple(row), ZERO)

    def rows(self):
        """Nonzero (row, weight) pairs in ascending row order."""
        return sorted(self._w.items())

    def support(self) -> frozenset:
        return frozenset(self._w)

    def marginal(self, S) -> "Margin":
        sub = tuple(sorted(self.schema.positions(S)))
        if not set(sub) <= set(self.on):
            raise ValueError(f"positions {sub} are not within the projection {self.on}")
        index = {p: i for i, p in enumerate(self.on)}
        w: dict = {}
        for row, q in self._w.items():
            r = tuple(row[index[p]] for p in sub)
            w[r] = w.get(r, ZERO) + q
        return Margin(self.schema, sub, w, _trusted=True)

    def is_product(self, S1, S2) -> bool:
        """Whether the measure factorizes across two disjoint position sets."""
        a = tuple(sorted(self.schema.positions(S1)))
        b = tuple(sorted(self.schema.positions(S2)))
        if set(a) & set(b) or set(a) | set(b) != set(self.on):
            raise ValueError("factorization check needs a partition of the projection")
        ma, mb = self.marginal(a), self.marginal(b)
        index = {p: i for i, p in enumerate(self.on)}
        for ra in ma.support():
            for rb in mb.support():
                joint = [0] * len(self.on)
                for p, v in zip(a, ra):
                    joint[index[p]] = v
                for p, v in zip(b, rb):
                    joint[index[p]] = v
                if self.weight(tuple(joint)) != ma.weight(ra) * mb.weight(rb):
                    return False
        return True

    def __eq__(self, other):
        return (
            isinstance(other, Margin)
            and self.schema == other.schema
            and self.on == other.on
            and self._w == other._w
        )

    def __hash__(self):
        return hash((self.schema, self.on, frozenset(self._w.items())))

    def __repr__(self):
        return f"Margin(on={self.on}, {len(self._w)} rows)"


def _all_rows(schema: SpaceSchema, on) -> list[tuple]:
    import itertools

    ranges = [range(len(schema.coords[p].labels)) for p in sorted(on)]
    return list(itertools.product(*ranges))


def dirac(schema: SpaceSchema, outcome):
    """Point mass at an outcome, or at a partial outcome given as a mapping.

    A full outcome yields a Measure on the whole space; a mapping of
    coordinate references to labels yields the point Margin on those
    coordinates (the usual way to build an intervention measure).
    """
    if isinstance(outcome, Mapping):
        return Margin.point(schema, outcome)
    return Measure.dirac(schema, outcome)


def prob(P: Measure, A) -> Fraction:
    return P.prob(A)


def condition_event(P: Measure, G) -> Measure:
    return P.condition(G)


def resolve_partition(schema: SpaceSchema, sigma) -> tuple[frozenset, ...]:
    """Normalize a sub-sigma-algebra spec to its generating partition.

    Accepts a coordinate set (positions or references) or an explicit
    iterable of events; explicit partitions must be disjoint and cover the
    outcome space.  Finite sigma-algebras are atomic, so a partition is a
    complete representation.
    """
    if isinstance(sigma, (frozenset, set, tuple, list)) and sigma and all(
        isinstance(b, (frozenset, set)) for b in sigma
    ):
        blocks = tuple(frozenset(b) for b in sigma)
        seen: set = set()
        for b in blocks:
            if not b:
                raise ValueError("partition blocks must be nonempty")
            if b & seen:
                raise ValueError("partition blocks overlap")
            seen |= b
        if seen != schema.outcome_set():
            raise ValueError("partition does not cover the outcome space")
        return blocks
    return atoms_of(schema, sigma)


class AtomConditional:
    """Conditional probability given a sigma-algebra, tabulated per atom.

    Atoms of positive measure map to the event-conditional measure; null
    atoms keep the unconditioned base measure (any version agrees with it up
    to null events) and are flagged in `null_atoms`.
    """

    def __init__(self, base: Measure, atoms, table, null_atoms):
        self.base = base
        self.atoms = tuple(atoms)
        self.table = dict(table)
        self.null_atoms = tuple(null_atoms)

    def at(self, outcome) -> Measure:
        """The conditional measure for the atom containing an outcome."""
        self.base.schema.require_outcome(outcome)
        for block in self.atoms:
            if tuple(outcome) in block:
                return self.table[block]
        raise AssertionError("atoms do not cover the outcome space")

    def value(self, outcome, A) -> Fraction:
        return self.at(outcome).prob(A)


def condition_sigma(P: Measure, sigma) -> AtomConditional:
    blocks = resolve_partition(P.schema, sigma)
    table = {}
    null_atoms = []
    for block in blocks:
        if P.prob(block) > 0:
            table[block] = P.condition(block)
        else:
            table[block] = P
            null_atoms.append(block)
    return AtomConditional(P, blocks, table, null_atoms)


# -- independence and almost-sure equality ---------------------------------


def independent(P: Measure, A, B) -> bool:
    return P.prob(frozenset(A) & frozenset(B)) == P.prob(A) * P.prob(B)


def independent_given(P: Measure, G, A, B) -> bool:
    return independent(P.condition(G), A, B)


def independent_given_sigma(P: Measure, sigma, A, B) -> bool:
    """Conditional independence given a sigma-algebra (positive atoms only)."""
    cond = condition_sigma(P, sigma)
    for block in cond.atoms:
        if block in set(cond.null_atoms):
            continue
        if not independent(cond.table[block], A, B):
            return False
    return True


def independent_sigmas(P: Measure, S1, S2) -> bool:
    """Independence of two coordinate sigma-algebras.

    Checking all pairs of generator atoms suffices: both sides of the
    product identity are additive in each argument, so it extends to
    arbitrary unions of atoms.
    """
    for a in atoms_of(P.schema, S1):
        pa = P.prob(a)
        for b in atoms_of(P.schema, S2):
            if P.prob(a & b) != pa * P.prob(b):
                return False
    return True


def independent_sigmas_given(P: Measure, G, S1, S2) -> bool:
    return independent_sigmas(P.condition(G), S1, S2)


def independent_sigmas_given_sigma(P: Measure, sigma, S1, S2) -> bool:
    cond = condition_sigma(P, sigma)
    nulls = set(cond.null_atoms)
    return all(
        independent_sigmas(cond.table[block], S1, S2)
        for block in cond.atoms
        if block not in nulls
    )


def as_equal(P: Measure, A, B) -> bool:
    """Almost-sure equality: the symmetric difference is null."""
    A, B = frozenset(A), frozenset(B)
    return P.prob(A ^ B) == 0


def as_equal_given(P: Measure, G, A, B) -> bool:
    return as_equal(P.condition(G), A, B)


def support_trace(P: Measure, S) -> frozenset:
    """The partition of the support induced by the atoms of sigma(S)."""
    supp = P.support()
    return frozenset(block & supp for block in atoms_of(P.schema, S) if block & supp)


def synchronized(P: Measure, S1, S2) -> bool:
    """Maximal information share between two coordinate sigma-algebras.

    True iff the atom partitions of S1 and S2, restricted to the support of
    P with null blocks dropped, induce the same partition of the support.
    For finite atomic sigma-algebras this is equivalent to the definitional
    check that every event of one algebra is almost surely equal to some
    event of the other, and vice versa.
    """
    return support_trace(P, S1) == support_trace(P, S2)
