"""Sparse pure states over registers of heterogeneous dimensions.

A state is a mapping from basis-label tuples (one integer label per
register site) to complex amplitudes. Protocol-level operations are
either small local unitaries or basis permutations, both of which keep
the stored term count low, so networks whose dense Hilbert space would
be astronomically large stay cheap to simulate as long as the actual
superposition involves only a handful of branches.

States are immutable: every operation returns a new ``SparseState``.
Amplitudes with modulus below :data:`PRUNE_THRESHOLD` are dropped, and
all public operations keep the squared norm within
:data:`NORM_TOLERANCE` of one.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Callable, Hashable, Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimMismatch,
    InvalidLabel,
    InvalidPermutation,
    LayoutMismatch,
    NotUnitary,
    SiteClash,
    UnknownSite,
    ZeroState,
)

SiteId = Hashable
Labels = tuple[int, ...]

PRUNE_THRESHOLD = 1e-12
NORM_TOLERANCE = 1e-9

LOCAL_UNITARY = "local-unitary"
BASIS_PERMUTATION = "basis-permutation"


@dataclass(frozen=True)
class RegisterLayout:
    """Ordered register sites, each an (opaque id, dimension >= 2) pair."""

    sites: tuple[tuple[SiteId, int], ...]

    def __post_init__(self):
        sites = tuple((sid, int(dim)) for sid, dim in self.sites)
        object.__setattr__(self, "sites", sites)
        positions: dict[SiteId, int] = {}
        for index, (sid, dim) in enumerate(sites):
            if sid in positions:
                raise SiteClash(f"duplicate site id {sid!r}")
            if dim < 2:
                raise DimMismatch(f"site {sid!r} has dimension {dim}, need >= 2")
            positions[sid] = index
        object.__setattr__(self, "_positions", positions)

    def __len__(self) -> int:
        return len(self.sites)

    @property
    def site_ids(self) -> tuple[SiteId, ...]:
        return tuple(sid for sid, _ in self.sites)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.sites)

    def position(self, site_id: SiteId) -> int:
        try:
            return self._positions[site_id]
        except KeyError:
            raise UnknownSite(f"no site {site_id!r} in layout") from None

    def dim_of(self, site_id: SiteId) -> int:
        return self.sites[self.position(site_id)][1]

    def total_dimension(self) -> int:
        return math.prod(self.dims) if self.sites else 1

    def without(self, site_ids: Iterable[SiteId]) -> "RegisterLayout":
        drop = {self.position(s) for s in site_ids}
        return RegisterLayout(
            tuple(p for i, p in enumerate(self.sites) if i not in drop)
        )

    def merged(self, other: "RegisterLayout") -> "RegisterLayout":
        overlap = set(self.site_ids) & set(other.site_ids)
        if overlap:
            raise SiteClash(f"site ids shared by both layouts: {sorted(map(repr, overlap))}")
        return RegisterLayout(self.sites + other.sites)


@dataclass(frozen=True, eq=False)
class SparseState:
    """Amplitude map over a register layout.

    ``terms`` maps one basis-label tuple per site to a complex amplitude.
    Treat instances as immutable; fidelity is the intended comparator
    (states are only defined up to a global phase).
    """

    layout: RegisterLayout
    terms: dict[Labels, complex]

    def __post_init__(self):
        dims = self.layout.dims
        nsites = len(dims)
        clean: dict[Labels, complex] = {}
        for labels, amp in self.terms.items():
            labels = tuple(int(v) for v in labels)
            if len(labels) != nsites:
                raise InvalidLabel(
                    f"label tuple {labels} has {len(labels)} entries, layout has {nsites}"
                )
            for v, d in zip(labels, dims):
                if not 0 <= v < d:
                    raise InvalidLabel(f"label {v} out of range for dimension {d}")
            clean[labels] = complex(amp)
        object.__setattr__(self, "terms", clean)

    def amplitude(self, labels: Sequence[int]) -> complex:
        return self.terms.get(tuple(labels), 0j)

    def norm_sq(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.terms.values()))

    def __repr__(self) -> str:
        return f"SparseState({len(self.terms)} terms over {len(self.layout)} sites)"


@dataclass(frozen=True, eq=False)
class GateSpec:
    """A local unitary (dense matrix) or basis permutation over target sites."""

    kind: str
    targets: tuple[SiteId, ...]
    matrix: np.ndarray | None = None
    mapping: Callable[[Labels], Labels] | None = None

    @classmethod
    def local_unitary(cls, matrix: np.ndarray, targets: Sequence[SiteId]) -> "GateSpec":
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise NotUnitary(f"expected a square matrix, got shape {m.shape}")
        eye = np.eye(m.shape[0])
        if not np.allclose(m @ m.conj().T, eye, atol=NORM_TOLERANCE):
            raise NotUnitary("matrix is not unitary within 1e-9")
        return cls(LOCAL_UNITARY, tuple(targets), matrix=m)

    @classmethod
    def basis_permutation(
        cls, mapping: Callable[[Labels], Labels], targets: Sequence[SiteId]
    ) -> "GateSpec":
        return cls(BASIS_PERMUTATION, tuple(targets), mapping=mapping)


def _ravel(labels: Labels, dims: Sequence[int]) -> int:
    index = 0
    for v, d in zip(labels, dims):
        index = index * d + v
    return index


def _unravel(index: int, dims: Sequence[int]) -> Labels:
    out = [0] * len(dims)
    for i in range(len(dims) - 1, -1, -1):
        index, out[i] = divmod(index, dims[i])
    return tuple(out)


def _prune(terms: dict[Labels, complex]) -> dict[Labels, complex]:
    return {k: v for k, v in terms.items() if abs(v) >= PRUNE_THRESHOLD}


def _check_bijection(gate: GateSpec, dims: tuple[int, ...]) -> None:
    """Verify (once per gate instance and dims) that the mapping permutes labels."""
    seen: set = getattr(gate, "_verified_dims", set())
    if dims in seen:
        return
    image: set[Labels] = set()
    for labels in itertools.product(*(range(d) for d in dims)):
        out = gate.mapping(labels)
        if len(out) != len(dims) or any(not 0 <= v < d for v, d in zip(out, dims)):
            raise InvalidPermutation(f"mapping sends {labels} to invalid {out}")
        image.add(tuple(out))
    if len(image) != math.prod(dims):
        raise InvalidPermutation("mapping is not a bijection on the target label space")
    object.__setattr__(gate, "_verified_dims", seen | {dims})


def make_basis_state(layout: RegisterLayout, labels: Sequence[int]) -> SparseState:
    """Single-term computational-basis state with amplitude one."""
    return SparseState(layout, {tuple(labels): 1.0 + 0j})


def superpose(
    layout: RegisterLayout, terms: Iterable[tuple[complex, Sequence[int]]]
) -> SparseState:
    """Weighted superposition, normalized; coincident labels are summed."""
    acc: dict[Labels, complex] = {}
    for weight, labels in terms:
        key = tuple(int(v) for v in labels)
        acc[key] = acc.get(key, 0j) + complex(weight)
    norm = math.sqrt(sum(abs(a) ** 2 for a in acc.values()))
    if norm < PRUNE_THRESHOLD:
        raise ZeroState("all weights vanish; nothing to normalize")
    scaled = {k: v / norm for k, v in acc.items()}
    return SparseState(layout, _prune(scaled))


def apply_gate(state: SparseState, gate: GateSpec) -> SparseState:
    """Apply a local unitary or basis permutation to the targeted sites."""
    layout = state.layout
    positions = [layout.position(s) for s in gate.targets]
    dims = tuple(layout.dims[p] for p in positions)

    if gate.kind == LOCAL_UNITARY:
        span = math.prod(dims)
        if gate.matrix.shape != (span, span):
            raise DimMismatch(
                f"matrix spans {gate.matrix.shape[0]} basis states, targets span {span}"
            )
        new_terms: dict[Labels, complex] = {}
        columns: dict[int, list[tuple[int, complex]]] = {}
        for labels, amp in state.terms.items():
            col_index = _ravel(tuple(labels[p] for p in positions), dims)
            column = columns.get(col_index)
            if column is None:
                raw = gate.matrix[:, col_index]
                column = [(r, complex(raw[r])) for r in np.flatnonzero(raw != 0)]
                columns[col_index] = column
            base = list(labels)
            for row_index, entry in column:
                for p, v in zip(positions, _unravel(row_index, dims)):
                    base[p] = v
                key = tuple(base)
                new_terms[key] = new_terms.get(key, 0j) + amp * entry
        return SparseState(layout, _prune(new_terms))

    if gate.kind == BASIS_PERMUTATION:
        _check_bijection(gate, dims)
        new_terms = {}
        for labels, amp in state.terms.items():
            sub = gate.mapping(tuple(labels[p] for p in positions))
            base = list(labels)
            for p, v in zip(positions, sub):
                base[p] = v
            key = tuple(base)
            new_terms[key] = new_terms.get(key, 0j) + amp
        return SparseState(layout, _prune(new_terms))

    raise ValueError(f"unknown gate kind {gate.kind!r}")


def apply_controlled(
    state: SparseState,
    control_sites: Sequence[SiteId],
    control_labels: Sequence[int],
    gate: GateSpec,
) -> SparseState:
    """Apply ``gate`` exactly on terms whose control sites carry the given labels.

    Control and target sites must be disjoint; terms whose control labels
    differ pass through untouched.
    """
    layout = state.layout
    if set(control_sites) & set(gate.targets):
        raise SiteClash("control sites overlap gate targets")
    if len(control_sites) != len(control_labels):
        raise InvalidLabel("control_labels must match control_sites in length")
    pairs = []
    for site, label in zip(control_sites, control_labels):
        pos = layout.position(site)
        if not 0 <= int(label) < layout.dims[pos]:
            raise InvalidLabel(f"control label {label} out of range at site {site!r}")
        pairs.append((pos, int(label)))

    matched: dict[Labels, complex] = {}
    untouched: dict[Labels, complex] = {}
    for labels, amp in state.terms.items():
        if all(labels[p] == v for p, v in pairs):
            matched[labels] = amp
        else:
            untouched[labels] = amp
    if not matched:
        return state
    rotated = apply_gate(SparseState(layout, matched), gate)
    merged = dict(untouched)
    for labels, amp in rotated.terms.items():
        merged[labels] = merged.get(labels, 0j) + amp
    return SparseState(layout, _prune(merged))


def xor_add(state: SparseState, src_site: SiteId, dst_site: SiteId) -> SparseState:
    """Generalized CNOT: label(dst) becomes label(dst) XOR label(src).

    Both sites must share the same power-of-two dimension. Self-inverse.
    """
    if src_site == dst_site:
        raise SiteClash("source and destination sites must differ")
    d_src = state.layout.dim_of(src_site)
    d_dst = state.layout.dim_of(dst_site)
    if d_src != d_dst or d_src & (d_src - 1):
        raise DimMismatch(
            f"xor_add needs equal power-of-two dimensions, got {d_src} and {d_dst}"
        )
    gate = _xor_gate(src_site, dst_site)
    return apply_gate(state, gate)


_XOR_GATES: dict[tuple[SiteId, SiteId], GateSpec] = {}


def _xor_gate(src_site: SiteId, dst_site: SiteId) -> GateSpec:
    # Cached so repeated XORs on the same site pair reuse one verified gate.
    key = (src_site, dst_site)
    gate = _XOR_GATES.get(key)
    if gate is None:
        gate = GateSpec.basis_permutation(
            lambda sub: (sub[0], sub[1] ^ sub[0]), (src_site, dst_site)
        )
        _XOR_GATES[key] = gate
    return gate


def _as_generator(rng) -> np.random.Generator:
    """Accept a seed or a generator-like object exposing ``random()``."""
    if hasattr(rng, "random"):
        return rng
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(rng))))


def measure_sites(
    state: SparseState, sites: Sequence[SiteId], rng
) -> tuple[Labels, SparseState, float]:
    """Projectively measure the given sites in the computational basis.

    The outcome is sampled from the marginal distribution using a
    counter-based generator seeded by ``rng`` (an int seed or an existing
    generator), so identical seeds reproduce identical runs. Returns
    ``(outcome_labels, post_state, probability)`` where the post state is
    renormalized and no longer contains the measured sites.
    """
    if not sites:
        raise ValueError("sites must be a nonempty subset of the layout")
    layout = state.layout
    positions = [layout.position(s) for s in sites]
    gen = _as_generator(rng)

    probs: dict[Labels, float] = {}
    for labels, amp in state.terms.items():
        key = tuple(labels[p] for p in positions)
        probs[key] = probs.get(key, 0.0) + abs(amp) ** 2

    outcomes = sorted(probs)
    u = gen.random()
    cumulative = 0.0
    chosen = outcomes[-1]
    for outcome in outcomes:
        cumulative += probs[outcome]
        if u < cumulative:
            chosen = outcome
            break
    post, probability = _project(state, positions, chosen)
    return chosen, post, probability


def project_sites(
    state: SparseState, sites: Sequence[SiteId], labels: Sequence[int]
) -> tuple[SparseState, float]:
    """Project onto the given labels for ``sites`` and renormalize.

    Returns the post state (measured sites removed) and the probability
    of that outcome. Raises :class:`ZeroState` if the probability vanishes.
    """
    positions = [state.layout.position(s) for s in sites]
    return _project(state, positions, tuple(int(v) for v in labels))


def _project(
    state: SparseState, positions: Sequence[int], outcome: Labels
) -> tuple[SparseState, float]:
    keep = set(positions)
    probability = 0.0
    reduced: dict[Labels, complex] = {}
    for labels, amp in state.terms.items():
        if tuple(labels[p] for p in positions) != outcome:
            continue
        probability += abs(amp) ** 2
        key = tuple(v for i, v in enumerate(labels) if i not in keep)
        reduced[key] = reduced.get(key, 0j) + amp
    if probability < PRUNE_THRESHOLD:
        raise ZeroState(f"outcome {outcome} has zero probability")
    scale = 1.0 / math.sqrt(probability)
    post_layout = RegisterLayout(
        tuple(p for i, p in enumerate(state.layout.sites) if i not in keep)
    )
    post = SparseState(post_layout, _prune({k: v * scale for k, v in reduced.items()}))
    return post, float(probability)


def fidelity(a: SparseState, b: SparseState) -> float:
    """Squared overlap |<a|b>|^2; one iff equal up to a global phase."""
    if a.layout.sites != b.layout.sites:
        raise LayoutMismatch("states live on different register layouts")
    small, large = (a.terms, b.terms) if len(a.terms) <= len(b.terms) else (b.terms, a.terms)
    overlap = 0j
    for labels, amp in small.items():
        other = large.get(labels)
        if other is not None:
            if small is a.terms:
                overlap += amp.conjugate() * other
            else:
                overlap += other.conjugate() * amp
    value = abs(overlap) ** 2
    return float(min(1.0, value))


def merge_layouts(a: SparseState, b: SparseState) -> SparseState:
    """Tensor product of two states over disjoint site ids."""
    layout = a.layout.merged(b.layout)
    terms: dict[Labels, complex] = {}
    for la, va in a.terms.items():
        for lb, vb in b.terms.items():
            terms[la + lb] = va * vb
    return SparseState(layout, _prune(terms))
