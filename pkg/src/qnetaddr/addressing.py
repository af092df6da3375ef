"""Coherent device addressing and controlled task execution.

Devices hold address registers whose joint state may be a product (one
fixed logical address per device) or an entangled superposition of
address assignments. A request travels as a quantum state holding target
addresses and, in the quantum encoding, per-slot operation codes.
Selecting a device XORs the request address into the device's address
register, so a register reading zero marks the addressed device; tasks
are then applied as controlled unitaries on that zero marker and finally
the XOR is undone.

Address values live in [1, n]. Value 0 is reserved as the XOR match
marker and value n + 1 as the padding label, which is why address
registers have dimension ``2 ** ceil(log2(n + 2))`` (XOR needs a
power-of-two alphabet).
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import BadAssignment, DuplicateTarget, UnknownDevice, UnknownOp
from .statevec import (
    GateSpec,
    RegisterLayout,
    SparseState,
    apply_controlled,
    make_basis_state,
    merge_layouts,
    superpose,
    xor_add,
)

CLASSICAL = "classical"
QUANTUM = "quantum"

_SQ = 1.0 / math.sqrt(2.0)

#: Work-qubit gate catalog indexed by operation code. Code 0 doubles as the
#: padding value for programs of unequal length.
GATE_CATALOG: dict[int, np.ndarray] = {
    0: np.eye(2, dtype=complex),
    1: np.array([[0, 1], [1, 0]], dtype=complex),
    2: np.array([[1, 0], [0, -1]], dtype=complex),
    3: np.array([[_SQ, _SQ], [_SQ, -_SQ]], dtype=complex),
    4: np.array([[1, 0], [0, 1j]], dtype=complex),
}

GATE_NAMES = {0: "I", 1: "X", 2: "Z", 3: "H", 4: "S"}
OP_CODES = {name: code for code, name in GATE_NAMES.items()}


def address_dimension(n: int) -> int:
    """Register dimension for n devices: fits 0 (marker), 1..n, n+1 (padding)."""
    if n < 1:
        raise ValueError(f"need at least one device, got {n}")
    return 1 << math.ceil(math.log2(n + 2))


def req_addr_site() -> tuple:
    return ("req", "addr")


def op_site(slot: int) -> tuple:
    return ("req", "op", slot)


def addr_site(device: int) -> tuple:
    return ("addr", device)


def work_site(device: int) -> tuple:
    return ("work", device)


def work_layout(devices: Sequence[int]) -> RegisterLayout:
    """Layout of the per-device work qubits, in ascending device order."""
    return RegisterLayout(tuple((work_site(d), 2) for d in sorted(devices)))


@dataclass(frozen=True)
class AddressBook:
    """Logical address assignment for ``n`` devices.

    ``assignment`` is either a mapping device -> address (product state) or
    a sequence of ``(weight, permutation)`` branches where the k-th entry
    of each permutation of 1..n is the address of the k-th device in
    ascending id order (entangled state).
    """

    n: int
    assignment: Mapping[int, int] | tuple[tuple[complex, tuple[int, ...]], ...]
    devices: tuple[int, ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise BadAssignment(f"need at least one device, got n={self.n}")
        devices = tuple(sorted(self.devices)) if self.devices else tuple(range(1, self.n + 1))
        if len(devices) != self.n:
            raise BadAssignment(f"{len(devices)} device ids for n={self.n}")
        object.__setattr__(self, "devices", devices)
        if self.is_product:
            assignment = dict(self.assignment)
            if set(assignment) != set(devices):
                raise BadAssignment("product assignment must cover exactly the devices")
            for device, value in assignment.items():
                if not 1 <= value <= self.n:
                    raise BadAssignment(
                        f"address {value} for device {device} outside [1, {self.n}]"
                    )
            object.__setattr__(self, "assignment", assignment)
        else:
            branches = tuple((complex(w), tuple(perm)) for w, perm in self.assignment)
            if not branches:
                raise BadAssignment("entangled assignment needs at least one branch")
            seen = set()
            for weight, perm in branches:
                if abs(weight) == 0:
                    raise BadAssignment("entangled branch weights must be nonzero")
                if sorted(perm) != list(range(1, self.n + 1)):
                    raise BadAssignment(f"{perm} is not a permutation of 1..{self.n}")
                if perm in seen:
                    raise BadAssignment(f"duplicate permutation {perm}")
                seen.add(perm)
            object.__setattr__(self, "assignment", branches)

    @property
    def is_product(self) -> bool:
        return isinstance(self.assignment, Mapping)

    @property
    def addr_dim(self) -> int:
        return address_dimension(self.n)

    def branches(self) -> tuple[tuple[complex, dict[int, int]], ...]:
        """Address branches as (weight, device -> address) pairs, normalized."""
        if self.is_product:
            return ((1.0 + 0j, dict(self.assignment)),)
        norm = math.sqrt(sum(abs(w) ** 2 for w, _ in self.assignment))
        return tuple(
            (w / norm, dict(zip(self.devices, perm))) for w, perm in self.assignment
        )


@dataclass(frozen=True)
class Request:
    """Target addresses with per-target operation programs.

    Programs of unequal length are padded with code 0 (identity) so that
    every term spans the same number of slots.
    """

    terms: tuple[tuple[complex, int, tuple[int, ...]], ...]
    encoding: str = CLASSICAL

    def __post_init__(self):
        if self.encoding not in (CLASSICAL, QUANTUM):
            raise ValueError(f"unknown encoding {self.encoding!r}")
        width = max((len(prog) for _, _, prog in self.terms), default=0)
        clean = []
        seen = set()
        for weight, target, program in self.terms:
            target = int(target)
            if target < 1:
                raise BadAssignment(f"target address {target} must be >= 1")
            if target in seen:
                raise DuplicateTarget(f"target address {target} listed twice")
            seen.add(target)
            program = tuple(int(code) for code in program)
            for code in program:
                if code not in GATE_CATALOG:
                    raise UnknownOp(f"operation code {code} not in catalog")
            program += (0,) * (width - len(program))
            clean.append((complex(weight), target, program))
        object.__setattr__(self, "terms", tuple(clean))

    @property
    def k_slots(self) -> int:
        return len(self.terms[0][2]) if self.terms else 0


def build_address_state(book: AddressBook) -> SparseState:
    """State of the per-device address registers described by ``book``."""
    dim = book.addr_dim
    layout = RegisterLayout(tuple((addr_site(d), dim) for d in book.devices))
    weighted = [
        (weight, tuple(branch[d] for d in book.devices))
        for weight, branch in book.branches()
    ]
    return superpose(layout, weighted)


def build_request_state(request: Request, n: int | None = None) -> SparseState:
    """Request state: target addresses plus op-code slots when quantum-encoded.

    ``n`` fixes the address-register dimension so the request composes with
    an n-device address book; it defaults to the largest target address.
    """
    if not request.terms:
        raise DuplicateTarget("request has no terms")
    max_target = max(target for _, target, _ in request.terms)
    if n is None:
        n = max_target
    elif max_target > n:
        raise BadAssignment(f"target {max_target} exceeds device count {n}")
    dim = address_dimension(n)
    sites: list[tuple] = [(req_addr_site(), dim)]
    if request.encoding == QUANTUM:
        sites += [(op_site(k), len(GATE_CATALOG)) for k in range(1, request.k_slots + 1)]
    layout = RegisterLayout(tuple(sites))
    weighted = []
    for weight, target, program in request.terms:
        labels = (target,) + (program if request.encoding == QUANTUM else ())
        weighted.append((weight, labels))
    return superpose(layout, weighted)


class NetworkUnderTest:
    """Global state of an addressed network while it processes one request.

    Holds the request registers, one address register per device and one
    work qubit per device (the network state the request operates on).
    Mutated sequentially by the protocol steps; create one instance per
    run.
    """

    def __init__(
        self,
        book: AddressBook,
        request: Request,
        network_state: SparseState | None = None,
    ):
        self.book = book
        self.request = request
        self.devices = book.devices

        parts = []
        if request.terms:
            parts.append(build_request_state(request, n=book.n))
        parts.append(build_address_state(book))
        if network_state is None:
            network_state = make_basis_state(
                work_layout(self.devices), (0,) * len(self.devices)
            )
        expected = work_layout(self.devices).sites
        if network_state.layout.sites != expected:
            raise BadAssignment("network state must live on the work-qubit layout")
        parts.append(network_state)

        state = parts[0]
        for part in parts[1:]:
            state = merge_layouts(state, part)
        self.state = state

    def _addr_site(self, device: int) -> tuple:
        if device not in self.devices:
            raise UnknownDevice(f"device {device} not in network")
        return addr_site(device)

    def select_device(self, device: int) -> None:
        """XOR the request address into the device's address register.

        Branches whose target address equals the device's address now read
        zero there; a second application undoes the first.
        """
        site = self._addr_site(device)
        if not self.request.terms:
            return
        self.state = xor_add(self.state, req_addr_site(), site)

    def deselect_device(self, device: int) -> None:
        """Undo a prior selection (the XOR is its own inverse)."""
        self.select_device(device)

    def apply_controlled_task_classical(self, device: int, op_code: int) -> None:
        """Apply one catalog unitary to the device's work qubit, controlled
        on the device's address register reading zero (device selected)."""
        matrix = GATE_CATALOG.get(int(op_code))
        if matrix is None:
            raise UnknownOp(f"operation code {op_code} not in catalog")
        self.state = apply_controlled(
            self.state,
            [self._addr_site(device)],
            [0],
            GateSpec.local_unitary(matrix, [work_site(device)]),
        )

    def apply_controlled_task_quantum(self, device: int) -> None:
        """Execute the quantum-encoded program slots on the device's work qubit.

        For every slot and every catalog code, the code's unitary fires on
        terms where the device is selected and the slot register holds that
        code, so each branch runs exactly its own program in slot order.
        """
        site = self._addr_site(device)
        target = work_site(device)
        for slot in range(1, self.request.k_slots + 1):
            for code, matrix in sorted(GATE_CATALOG.items()):
                if code == 0:
                    continue  # padding encodes the identity
                self.state = apply_controlled(
                    self.state,
                    [site, op_site(slot)],
                    [0, code],
                    GateSpec.local_unitary(matrix, [target]),
                )

    def _apply_task_classical(self, device: int) -> None:
        # Per-term conditioning on the request address keeps distinct
        # programs apart even when entangled addresses make the matching
        # device branch-dependent; for product addresses this reduces to
        # a single zero-controlled unitary per device.
        site = self._addr_site(device)
        target = work_site(device)
        for _, term_target, program in self.request.terms:
            for code in program:
                if code == 0:
                    continue
                self.state = apply_controlled(
                    self.state,
                    [req_addr_site(), site],
                    [term_target, 0],
                    GateSpec.local_unitary(GATE_CATALOG[code], [target]),
                )

    def process_request(self, order: Sequence[int] | None = None) -> SparseState:
        """Run select / apply-task / deselect for every device in ``order``.

        Returns the final global state; the request and device address
        registers are restored to their pre-protocol content.
        """
        if order is None:
            order = self.devices
        if sorted(order) != sorted(self.devices):
            raise UnknownDevice(f"order {list(order)} is not a permutation of devices")
        if not self.request.terms:
            return self.state
        for device in order:
            self.select_device(device)
            if self.request.encoding == QUANTUM:
                self.apply_controlled_task_quantum(device)
            else:
                self._apply_task_classical(device)
            self.deselect_device(device)
        return self.state
