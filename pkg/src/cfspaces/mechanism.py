"""Causal kernels, mechanisms, axiom checks, interventions, effects, sources.

A causal kernel on a coordinate set S maps each partial outcome on S to a
full-space measure describing the post-intervention state; it must
concentrate on outcomes agreeing with its argument (interventional
determinism).  A mechanism is a family of kernels keyed by coordinate sets
and always contains the empty key, whose single row is the observational
measure.

Mechanisms may be partial, both in which coordinate sets carry a kernel and
in which rows of a kernel are specified; the worked fixtures bundled with
this package specify only a handful of kernels each.  Operations that need
absent data either raise MissingKernelError or return an undetermined
verdict carrying the blocking keys, rather than inventing a completion.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .measure import Margin, Measure, condition_event
from .space import SpaceSchema, atoms_of, project, restrict_row


class MissingKernelError(LookupError):
    """An operation required a causal kernel, or a kernel row, that is absent."""


class Kernel:
    """A (possibly row-partial) causal kernel on the coordinates in `on`."""

    __slots__ = ("schema", "on", "rows")

    def __init__(self, schema: SpaceSchema, on, rows: Mapping):
        self.schema = schema
        self.on = schema.positions(on)
        pos = sorted(self.on)
        table: dict = {}
        for row, measure in rows.items():
            row = tuple(row)
            if len(row) != len(pos):
                raise ValueError(f"row {row!r} does not match coordinate set {pos}")
            for p, v in zip(pos, row):
                if not 0 <= v < len(schema.coords[p].labels):
                    raise ValueError(f"row {row!r} has an out-of-range value")
            if not isinstance(measure, Measure) or measure.schema != schema:
                raise ValueError("kernel rows must map to measures on the same schema")
            table[row] = measure
        if not table:
            raise ValueError("kernel has no rows")
        self.rows = table

    def has_row(self, row) -> bool:
        return tuple(row) in self.rows

    def measure(self, row) -> Measure:
        try:
            return self.rows[tuple(row)]
        except KeyError:
            raise MissingKernelError(
                f"kernel on {sorted(self.on)} has no row {tuple(row)!r}"
            ) from None

    def value(self, row, A) -> Fraction:
        return self.measure(row).prob(A)

    def row_domain(self) -> tuple[tuple, ...]:
        ranges = [range(len(self.schema.coords[p].labels)) for p in sorted(self.on)]
        return tuple(itertools.product(*ranges))

    def is_total(self) -> bool:
        return len(self.rows) == len(self.row_domain())

    def missing_rows(self) -> tuple[tuple, ...]:
        return tuple(r for r in self.row_domain() if r not in self.rows)

    def __repr__(self):
        return f"Kernel(on={sorted(self.on)}, rows={len(self.rows)})"


class Mechanism:
    """A partial family of causal kernels; always contains the empty key."""

    def __init__(self, schema: SpaceSchema, P: Measure, kernels: Iterable[Kernel] = ()):
        self.schema = schema
        table: dict = {}
        for k in kernels:
            if k.schema != schema:
                raise ValueError("kernel schema does not match the mechanism schema")
            if k.on in table:
                raise ValueError(f"duplicate kernel for coordinate set {sorted(k.on)}")
            table[k.on] = k
        if frozenset() not in table:
            table[frozenset()] = Kernel(schema, (), {(): P})
        self._k = table

    def __contains__(self, S) -> bool:
        return self.schema.positions(S) in self._k

    def get(self, S) -> Kernel:
        S = self.schema.positions(S)
        try:
            return self._k[S]
        except KeyError:
            raise MissingKernelError(f"no kernel for coordinate set {sorted(S)}") from None

    def keys(self) -> tuple[frozenset, ...]:
        return tuple(sorted(self._k, key=lambda s: (len(s), sorted(s))))

    def kernels(self) -> tuple[Kernel, ...]:
        return tuple(self._k[k] for k in self.keys())

    def is_total(self) -> bool:
        n = len(self.schema.coords)
        if len(self._k) != 1 << n:
            return False
        return all(k.is_total() for k in self._k.values())

    def __repr__(self):
        return f"Mechanism({len(self._k)} kernels)"


@dataclass(frozen=True)
class DerivationNote:
    """One kernel (or kernel row) that an intervention could not derive."""

    S: frozenset
    row: tuple | None
    needs: frozenset


@dataclass(frozen=True)
class DerivationReport:
    derived: tuple[frozenset, ...]
    dropped: tuple[DerivationNote, ...]


class CfSpace:
    """A finite probability space, optionally equipped with a causal mechanism.

    Coordinates carry world labels, so the same object models plain causal
    spaces (one world), two-world counterfactual spaces and N-way spaces.
    Instances are immutable; interventions and marginalisation return new
    spaces.
    """

    def __init__(self, schema: SpaceSchema, P: Measure, mech: Mechanism | None = None,
                 derivation: DerivationReport | None = None):
        if P.schema != schema:
            raise ValueError("measure schema does not match the space schema")
        if mech is not None and mech.schema != schema:
            raise ValueError("mechanism schema does not match the space schema")
        self.schema = schema
        self.P = P
        self.mech = mech
        self.derivation = derivation

    @property
    def worlds(self) -> tuple[str, ...]:
        return self.schema.worlds

    def kernel(self, S) -> Kernel:
        if self.mech is None:
            raise MissingKernelError("space has no causal mechanism")
        return self.mech.get(S)

    def __repr__(self):
        mech = "no mechanism" if self.mech is None else repr(self.mech)
        return f"CfSpace({self.schema!r}, {mech})"


# -- axiom checking ---------------------------------------------------------


@dataclass(frozen=True)
class AxiomViolation:
    axiom: str  # "trivial-intervention" or "interventional-determinism"
    S: frozenset
    row: tuple
    outcome: tuple
    detail: str


class AxiomReport:
    def __init__(self, violations):
        self.violations = tuple(violations)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __repr__(self):
        return f"AxiomReport(ok={self.ok}, violations={len(self.violations)})"


def check_axioms(space: CfSpace) -> AxiomReport:
    """Verify the causal-space axioms on every kernel present.

    Axiom "trivial-intervention": the empty kernel equals the observational
    measure.  Axiom "interventional-determinism": each row's measure
    assigns zero mass to outcomes whose projection disagrees with the row
    (the finite equivalent of the quantified product axiom; the equivalence
    is exercised by the brute-force oracle tests).  Violations are data,
    not errors.
    """
    if space.mech is None:
        return AxiomReport(())
    violations = []
    empty = space.mech.get(())
    base = empty.rows.get(())
    if base is None:
        violations.append(AxiomViolation(
            "trivial-intervention", frozenset(), (), (),
            "empty kernel has no row ()"))
    elif base != space.P:
        for outcome in space.schema.outcomes():
            if base.weight(outcome) != space.P.weight(outcome):
                violations.append(AxiomViolation(
                    "trivial-intervention", frozenset(), (), outcome,
                    f"K_empty({outcome}) = {base.weight(outcome)} "
                    f"!= P({outcome}) = {space.P.weight(outcome)}"))
                break
    for S in space.mech.keys():
        kernel = space.mech.get(S)
        for row in sorted(kernel.rows):
            measure = kernel.rows[row]
            for outcome in sorted(measure.support()):
                if project(outcome, S) != row:
                    violations.append(AxiomViolation(
                        "interventional-determinism", S, row, outcome,
                        f"mass {measure.weight(outcome)} on outcome disagreeing with the row"))
    return AxiomReport(violations)


# -- interventions ----------------------------------------------------------


def _merge_rows(S, row_s, S2, row_s2) -> tuple:
    """Combine rows on disjoint position sets into a row on their union."""
    values = dict(zip(sorted(S), row_s))
    values.update(zip(sorted(S2), row_s2))
    return tuple(values[p] for p in sorted(values))


def intervene(space: CfSpace, U, Q: Margin) -> CfSpace:
    """Intervene on the coordinates in U with the measure Q.

    The new measure mixes the rows of the kernel on U by Q.  Each new
    kernel on S is derived from the present kernel on S | U by integrating
    the Q-marginal over U \\ S; kernels whose prerequisite is absent are
    omitted and recorded in the derivation report attached to the result.
    Interventions compose by repeated application.
    """
    schema = space.schema
    U = schema.positions(U)
    if space.mech is None:
        raise MissingKernelError("space has no causal mechanism")
    if Q.schema != schema or set(Q.on) != set(U):
        raise ValueError("intervention measure is not a measure on the intervened coordinates")
    k_u = space.mech.get(U)
    missing = [row for row, _ in Q.rows() if not k_u.has_row(row)]
    if missing:
        raise MissingKernelError(
            f"kernel on {sorted(U)} lacks rows {missing} needed by the intervention measure")
    new_p = Measure.mixture(schema, ((q, k_u.rows[row]) for row, q in Q.rows()))

    new_kernels = []
    derived = []
    dropped = []
    for W in space.mech.keys():
        if not U <= W:
            if space.mech.schema.positions(W | U) not in space.mech._k:
                dropped.append(DerivationNote(W, None, W | U))
            continue
        k_w = space.mech.get(W)
        # Every S with S | U == W, i.e. S = (W \ U) | X for X within W & U.
        overlap = sorted(W & U)
        for r in range(len(overlap) + 1):
            for extra in itertools.combinations(overlap, r):
                S = (W - U) | frozenset(extra)
                rest = U - S
                q_rest = Q.marginal(rest)
                rows: dict = {}
                seen_rows = sorted({restrict_row(W, row, S) for row in k_w.rows})
                for row_s in seen_rows:
                    parts = []
                    complete = True
                    for row_rest, q in q_rest.rows():
                        full = _merge_rows(S, row_s, rest, row_rest)
                        if not k_w.has_row(full):
                            complete = False
                            break
                        parts.append((q, k_w.rows[full]))
                    if complete:
                        rows[row_s] = Measure.mixture(schema, parts)
                    else:
                        dropped.append(DerivationNote(S, row_s, W))
                if rows:
                    new_kernels.append(Kernel(schema, S, rows))
                    derived.append(S)
                else:
                    dropped.append(DerivationNote(S, None, W))
    report = DerivationReport(tuple(sorted(derived, key=lambda s: (len(s), sorted(s)))),
                              tuple(dropped))
    mech = Mechanism(schema, new_p, new_kernels)
    return CfSpace(schema, new_p, mech, derivation=report)


# -- causal effect taxonomy ---------------------------------------------------


@dataclass(frozen=True)
class EffectWitness:
    S: frozenset
    row: tuple
    value: Fraction
    reference: Fraction
    against: frozenset | None = None  # the S \ U side of a dormant witness


@dataclass(frozen=True)
class EffectVerdict:
    tag: str  # "no_effect" | "active" | "dormant" | "undetermined"
    witness: EffectWitness | None = None
    missing: tuple = ()


def _missing_required_keys(space: CfSpace, U, cap: int = 8) -> list[frozenset]:
    """Find kernel keys blocking a no-effect certificate, a few at most."""
    mech = space.mech
    found = []
    positions = sorted(space.schema.all_positions)
    budget = 100000
    for size in range(len(positions) + 1):
        for combo in itertools.combinations(positions, size):
            budget -= 1
            if budget <= 0:
                return found
            S = frozenset(combo)
            if not S & U:
                continue
            for side in (S, S - U):
                if side not in mech._k:
                    if side not in found:
                        found.append(side)
                elif not mech._k[side].is_total():
                    if side not in found:
                        found.append(side)
            if len(found) >= cap:
                return found
    return found


def classify_effect(space: CfSpace, U, A) -> EffectVerdict:
    """Classify the causal effect of the coordinates in U on the event A.

    Active: some kernel row on U moves the probability of A away from the
    observational value.  No effect: intervening jointly with U never
    differs from intervening without it, certified over every pair of
    kernels, which needs a total mechanism (the empty U is vacuously
    certified).  Dormant: not active, but some present pair disagrees.
    Verdicts that absent kernels or rows block are undetermined and carry
    the blocking keys.
    """
    schema = space.schema
    U = schema.positions(U)
    A = frozenset(A)
    schema.require_event(A)
    if space.mech is None or U not in space.mech:
        return EffectVerdict("undetermined", missing=(U,))
    mech = space.mech
    k_u = mech.get(U)
    p_a = space.P.prob(A)
    for row in sorted(k_u.rows):
        v = k_u.rows[row].prob(A)
        if v != p_a:
            return EffectVerdict("active", EffectWitness(U, row, v, p_a))
    if not k_u.is_total():
        # Activity cannot be ruled out, so neither dormant nor no-effect
        # can be certified.
        return EffectVerdict("undetermined", missing=(U,))

    dormant_witness = None
    for S in mech.keys():
        if not S & U:
            continue
        partner = S - U
        if partner not in mech:
            continue
        k_s, k_p = mech.get(S), mech.get(partner)
        for row in sorted(k_s.rows):
            sub = restrict_row(S, row, partner)
            if not k_p.has_row(sub):
                continue
            v, w = k_s.rows[row].prob(A), k_p.rows[sub].prob(A)
            if v != w:
                dormant_witness = EffectWitness(S, row, v, w, against=partner)
                break
        if dormant_witness:
            break
    if dormant_witness is not None:
        return EffectVerdict("dormant", dormant_witness)
    required = [S for S in mech.keys() if S & U]
    n = len(schema.coords)
    fully_covered = (
        len(required) == (1 << n) - (1 << (n - len(U))) if U else True
    ) and all(
        mech.get(S).is_total() and (S - U) in mech and mech.get(S - U).is_total()
        for S in required
    )
    if fully_covered:
        return EffectVerdict("no_effect")
    missing = _missing_required_keys(space, U)
    if not missing:
        # the scan is budgeted; at minimum the full joint kernel family is
        # what a certificate would need
        missing = [schema.all_positions]
    return EffectVerdict("undetermined", missing=tuple(missing))


@dataclass(frozen=True)
class ConditionalEffectVerdict:
    """Outcome of a conditional causal-effect query.

    `values` maps each available kernel row to the post-intervention
    conditional probability of the event (None where the row gives the
    conditioning event mass zero); `baseline` is the observational
    conditional probability.
    """

    tag: str  # "active" | "inactive" | "undetermined"
    baseline: Fraction
    values: tuple
    witness: tuple | None = None
    missing_rows: tuple = ()

    def value(self, row) -> Fraction | None:
        for r, v in self.values:
            if r == tuple(row):
                return v
        raise MissingKernelError(f"no kernel row {tuple(row)!r} in the verdict")


def conditional_active_effect(space: CfSpace, U, A, G) -> ConditionalEffectVerdict:
    """Does intervening on U change the conditional probability of A given G?

    A row is a witness when it gives G positive mass and its conditional
    value differs from the observational conditional.  With row-partial
    kernels and no witness among present rows, the verdict is undetermined.
    """
    schema = space.schema
    U = schema.positions(U)
    A, G = frozenset(A), frozenset(G)
    k_u = space.kernel(U)
    baseline = condition_event(space.P, G).prob(A)
    values = []
    witness = None
    for row in sorted(k_u.rows):
        mass = k_u.rows[row].prob(G)
        if mass == 0:
            values.append((row, None))
            continue
        v = k_u.rows[row].prob(G & A) / mass
        values.append((row, v))
        if witness is None and v != baseline:
            witness = (row, v)
    if witness is not None:
        return ConditionalEffectVerdict("active", baseline, tuple(values), witness)
    missing = k_u.missing_rows()
    if missing:
        return ConditionalEffectVerdict(
            "undetermined", baseline, tuple(values), missing_rows=missing)
    return ConditionalEffectVerdict("inactive", baseline, tuple(values))


# -- causal independence, equality, synchronisation --------------------------


def _total_kernel(space: CfSpace, U) -> Kernel:
    k = space.kernel(U)
    missing = k.missing_rows()
    if missing:
        raise MissingKernelError(
            f"kernel on {sorted(k.on)} lacks rows {list(missing)}; "
            "the query quantifies over all rows")
    return k


def causal_independent(space: CfSpace, U, A, B) -> bool:
    """Causal independence of two events on the kernel for U.

    The product identity must hold at every row, not just P-positive ones:
    an intervention may give mass to previously null rows.
    """
    A, B = frozenset(A), frozenset(B)
    k = _total_kernel(space, space.schema.positions(U))
    return all(
        m.prob(A & B) == m.prob(A) * m.prob(B) for m in k.rows.values()
    )


def causally_equal(space: CfSpace, U, A, B) -> bool:
    """Whether every row of the kernel on U nullifies the symmetric difference."""
    delta = frozenset(A) ^ frozenset(B)
    k = _total_kernel(space, space.schema.positions(U))
    return all(m.prob(delta) == 0 for m in k.rows.values())


def causal_sync(space: CfSpace, U, S1, S2) -> bool:
    """Causal synchronisation of two coordinate sigma-algebras on U.

    The definition requires, for each event of one algebra, a single
    partner event of the other whose symmetric difference every kernel row
    nullifies.  That holds iff the two atom partitions induce the same
    trace on the union of the row supports.
    """
    schema = space.schema
    k = _total_kernel(space, schema.positions(U))
    supp: set = set()
    for m in k.rows.values():
        supp |= m.support()
    trace1 = frozenset(b & supp for b in atoms_of(schema, S1) if b & supp)
    trace2 = frozenset(b & supp for b in atoms_of(schema, S2) if b & supp)
    return trace1 == trace2


# -- sources ------------------------------------------------------------------


def _positive_atoms(space: CfSpace, U):
    """(row, block) pairs for the P-positive atoms of sigma(U)."""
    out = []
    for block in atoms_of(space.schema, U):
        if space.P.prob(block) > 0:
            row = project(next(iter(sorted(block))), U)
            out.append((row, block))
    return out


def is_source(space: CfSpace, U, target) -> bool:
    """Whether the kernel on U is a version of conditioning on sigma(U).

    `target` is an event or a coordinate set (checked on the atoms of its
    sigma-algebra).  Only P-positive atoms are quantified; null atoms are
    exempt.  A definite mismatch answers False even if other rows are
    absent; an absence that blocks certification raises MissingKernelError.
    """
    schema = space.schema
    U = schema.positions(U)
    if isinstance(target, (frozenset, set)) and all(isinstance(x, tuple) for x in target):
        events = [frozenset(target)]
    else:
        events = list(atoms_of(schema, target))
    k = space.kernel(U)
    blocked = []
    for row, block in _positive_atoms(space, U):
        if not k.has_row(row):
            blocked.append(row)
            continue
        p_block = space.P.prob(block)
        for A in events:
            if k.rows[row].prob(A) != space.P.prob(A & block) / p_block:
                return False
    if blocked:
        raise MissingKernelError(
            f"kernel on {sorted(U)} lacks rows {blocked} at P-positive atoms")
    return True


def global_source(space: CfSpace, U) -> bool:
    """Whether the kernel on U matches conditioning on sigma(U) everywhere."""
    schema = space.schema
    U = schema.positions(U)
    k = space.kernel(U)
    blocked = []
    for row, block in _positive_atoms(space, U):
        if not k.has_row(row):
            blocked.append(row)
            continue
        if k.rows[row] != condition_event(space.P, block):
            return False
    if blocked:
        raise MissingKernelError(
            f"kernel on {sorted(U)} lacks rows {blocked} at P-positive atoms")
    return True


@dataclass(frozen=True)
class FundamentalReport:
    """Outcome of checking the fundamental source property of an intervention."""

    ok: bool
    kernel_mismatches: tuple
    source_mismatches: tuple


def verify_fundamental(space: CfSpace, U, Q: Margin) -> FundamentalReport:
    """Check that intervening on U leaves its kernel fixed and makes it a source.

    (i) the derived kernel on U equals the original kernel as a table, and
    (ii) in the intervened space that kernel is a version of conditioning
    on sigma(U) at every positive atom.
    """
    schema = space.schema
    U = schema.positions(U)
    old = space.kernel(U)
    new_space = intervene(space, U, Q)
    new = new_space.kernel(U)
    kernel_mismatches = []
    for row in sorted(set(old.rows) | set(new.rows)):
        if old.rows.get(row) != new.rows.get(row):
            kernel_mismatches.append(row)
    source_mismatches = []
    for row, block in _positive_atoms(new_space, U):
        if not new.has_row(row) or new.rows[row] != condition_event(new_space.P, block):
            source_mismatches.append(row)
    ok = not kernel_mismatches and not source_mismatches
    return FundamentalReport(ok, tuple(kernel_mismatches), tuple(source_mismatches))
