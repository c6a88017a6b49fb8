"""Exact algebra for n-qubit Pauli strings and real Pauli-sum Hamiltonians.

Conventions used throughout the package:

- A Pauli string is stored as a pair of bitmasks. Bit i of ``x_mask`` is set
  iff qubit i carries X or Y; bit i of ``z_mask`` is set iff qubit i carries
  Z or Y. Per qubit: (x, z) = (0,0) -> I, (1,0) -> X, (1,1) -> Y, (0,1) -> Z.
- Qubit 0 is the least significant bit of computational-basis labels. In
  text labels ("XZY...") qubit 0 is the leftmost character.
- The canonical form of a string is P(x, z) = i^{|x & z|} X^x Z^z, so the
  product of two strings is another string times an exact fourth root of
  unity. Phases are enumerated, never stored as approximate floats.
- Hamiltonians carry real coefficients only (in Hartree). Conjugating a
  real Pauli sum by exp(-i tau P / 2) keeps coefficients real, which the
  dressing routine exploits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

__all__ = [
    "PauliString",
    "PhasedPauli",
    "QubitHamiltonian",
    "multiply",
    "commutes",
    "flip_index",
    "partition_by_flip_index",
    "dress",
    "dress_sequence",
    "DEFAULT_PRUNE",
]

# Dressed terms with |coefficient| below this are dropped so floating-point
# dust does not inflate the term count.
DEFAULT_PRUNE = 1e-12

_PHASES = (1 + 0j, 1j, -1 + 0j, -1j)  # i**k for k = 0..3
_LETTER_OF = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_MASKS_OF = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


@dataclass(frozen=True, slots=True)
class PauliString:
    """Tensor product of single-qubit Paulis in symplectic bitmask form."""

    n_qubits: int
    x_mask: int = 0
    z_mask: int = 0

    def __post_init__(self) -> None:
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be positive, got {self.n_qubits}")
        full = (1 << self.n_qubits) - 1
        if self.x_mask & ~full or self.z_mask & ~full:
            raise ValueError(
                f"mask bits set beyond qubit {self.n_qubits - 1}: "
                f"x={self.x_mask:#x} z={self.z_mask:#x}"
            )

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(n_qubits, 0, 0)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Build from a text label, qubit 0 leftmost (e.g. "XZY")."""
        if not label:
            raise ValueError("empty Pauli label")
        x = z = 0
        for i, ch in enumerate(label):
            try:
                xb, zb = _MASKS_OF[ch]
            except KeyError:
                raise ValueError(f"invalid Pauli letter {ch!r} in {label!r}") from None
            x |= xb << i
            z |= zb << i
        return cls(len(label), x, z)

    def to_label(self) -> str:
        return "".join(self.letter(i) for i in range(self.n_qubits))

    def letter(self, qubit: int) -> str:
        return _LETTER_OF[(self.x_mask >> qubit) & 1, (self.z_mask >> qubit) & 1]

    @property
    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    @property
    def is_diagonal(self) -> bool:
        """True iff the string contains only I and Z letters."""
        return self.x_mask == 0

    @property
    def support(self) -> int:
        """Mask of qubits where the string acts nontrivially."""
        return self.x_mask | self.z_mask

    @property
    def weight(self) -> int:
        return self.support.bit_count()

    def key(self) -> tuple[int, int]:
        """Canonical sort key shared by all modules."""
        return (self.x_mask, self.z_mask)

    def __repr__(self) -> str:
        return f"PauliString({self.to_label()!r})"


@dataclass(frozen=True, slots=True)
class PhasedPauli:
    """A Pauli string times an exact fourth root of unity."""

    phase: complex
    string: PauliString

    def __post_init__(self) -> None:
        if self.phase not in _PHASES:
            raise ValueError(f"phase must be a fourth root of unity, got {self.phase}")


def _check_same_qubits(p: PauliString, q: PauliString) -> None:
    if p.n_qubits != q.n_qubits:
        raise ValueError(f"qubit-count mismatch: {p.n_qubits} vs {q.n_qubits}")


def multiply(p: PauliString, q: PauliString) -> PhasedPauli:
    """Exact product p*q.

    The result masks are the XOR of the inputs; the accumulated phase is
    i**k with k tracked mod 4 from the per-qubit letter products.
    """
    _check_same_qubits(p, q)
    x = p.x_mask ^ q.x_mask
    z = p.z_mask ^ q.z_mask
    k = (
        (p.x_mask & p.z_mask).bit_count()
        + (q.x_mask & q.z_mask).bit_count()
        + 2 * (p.z_mask & q.x_mask).bit_count()
        - (x & z).bit_count()
    ) % 4
    return PhasedPauli(_PHASES[k], PauliString(p.n_qubits, x, z))


def commutes(p: PauliString, q: PauliString) -> bool:
    """True iff pq = qp (parity of the symplectic form)."""
    _check_same_qubits(p, q)
    return ((p.x_mask & q.z_mask).bit_count() + (p.z_mask & q.x_mask).bit_count()) % 2 == 0


def flip_index(p: PauliString) -> frozenset[int]:
    """Set of qubit positions carrying X or Y (the set bits of x_mask)."""
    return frozenset(i for i in range(p.n_qubits) if (p.x_mask >> i) & 1)


class QubitHamiltonian:
    """Weighted sum of Pauli strings with real coefficients (Hartree).

    Terms are stored in canonical (x_mask, z_mask) order so iteration,
    grouping, and gradient tie-breaking are deterministic. Instances are
    treated as immutable; all operations return new objects.
    """

    __slots__ = ("n_qubits", "_terms")

    def __init__(
        self,
        n_qubits: int,
        terms: Mapping[PauliString, float],
        prune: float = DEFAULT_PRUNE,
    ) -> None:
        if n_qubits < 1:
            raise ValueError(f"n_qubits must be positive, got {n_qubits}")
        clean: dict[PauliString, float] = {}
        for p, c in sorted(terms.items(), key=lambda kv: kv[0].key()):
            if p.n_qubits != n_qubits:
                raise ValueError(f"term {p!r} does not act on {n_qubits} qubits")
            c = float(c)
            if not math.isfinite(c):
                raise ValueError(f"non-finite coefficient for {p!r}")
            if abs(c) >= prune:
                clean[p] = c
        self.n_qubits = n_qubits
        self._terms = clean

    @classmethod
    def from_labels(
        cls, coeffs: Mapping[str, float], prune: float = DEFAULT_PRUNE
    ) -> "QubitHamiltonian":
        """Build from {label: coefficient}; all labels must share one length."""
        if not coeffs:
            raise ValueError("empty Hamiltonian")
        strings = {PauliString.from_label(s): c for s, c in coeffs.items()}
        n = next(iter(strings)).n_qubits
        return cls(n, strings, prune=prune)

    @property
    def terms(self) -> Mapping[PauliString, float]:
        return self._terms

    def items(self) -> Iterator[tuple[PauliString, float]]:
        return iter(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QubitHamiltonian):
            return NotImplemented
        return self.n_qubits == other.n_qubits and self._terms == other._terms

    def __repr__(self) -> str:
        return f"QubitHamiltonian(n_qubits={self.n_qubits}, terms={len(self._terms)})"

    def coefficient(self, p: PauliString) -> float:
        return self._terms.get(p, 0.0)

    @property
    def identity_coefficient(self) -> float:
        return self._terms.get(PauliString.identity(self.n_qubits), 0.0)

    def allclose(self, other: "QubitHamiltonian", tol: float = 1e-10) -> bool:
        if self.n_qubits != other.n_qubits:
            return False
        keys = set(self._terms) | set(other._terms)
        return all(abs(self.coefficient(p) - other.coefficient(p)) <= tol for p in keys)

    def to_json_dict(self) -> dict:
        """Lossless JSON form: {"n_qubits": m, "terms": [{"pauli": ..., "coeff": ...}]}."""
        return {
            "n_qubits": self.n_qubits,
            "terms": [
                {"pauli": p.to_label(), "coeff": c} for p, c in self._terms.items()
            ],
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "QubitHamiltonian":
        n = int(data["n_qubits"])
        terms: dict[PauliString, float] = {}
        for entry in data["terms"]:
            p = PauliString.from_label(entry["pauli"])
            terms[p] = terms.get(p, 0.0) + float(entry["coeff"])
        return cls(n, terms)


def partition_by_flip_index(
    h: QubitHamiltonian,
) -> dict[frozenset[int], list[tuple[PauliString, float]]]:
    """Group terms by their flip index; every term lands in exactly one group."""
    groups: dict[frozenset[int], list[tuple[PauliString, float]]] = {}
    for p, c in h.items():
        groups.setdefault(flip_index(p), []).append((p, c))
    return groups


def dress(
    h: QubitHamiltonian,
    p: PauliString,
    tau: float,
    prune: float = DEFAULT_PRUNE,
) -> QubitHamiltonian:
    """Similarity transform exp(+i tau p/2) H exp(-i tau p/2).

    Terms commuting with p pass through; an anticommuting term C*Q becomes
    C*cos(tau)*Q + C*sin(tau)*(i p Q). Because p and Q anticommute, i*p*Q is
    again a Pauli string with a real sign, so the result stays Hermitian
    with real coefficients. Like terms are merged and dust below `prune`
    is dropped.
    """
    if p.n_qubits != h.n_qubits:
        raise ValueError(f"qubit-count mismatch: {p.n_qubits} vs {h.n_qubits}")
    if not math.isfinite(tau):
        raise ValueError(f"non-finite rotation angle {tau!r}")
    c, s = math.cos(tau), math.sin(tau)
    out: dict[PauliString, float] = {}
    for q, coeff in h.items():
        if commutes(p, q):
            out[q] = out.get(q, 0.0) + coeff
            continue
        out[q] = out.get(q, 0.0) + coeff * c
        prod = multiply(p, q)
        # p, q anticommute, so the product phase is +/-i and i*phase is +/-1.
        sign = (1j * prod.phase).real
        assert sign in (1.0, -1.0)
        out[prod.string] = out.get(prod.string, 0.0) + coeff * s * sign
    return QubitHamiltonian(h.n_qubits, out, prune=prune)


def dress_sequence(
    h: QubitHamiltonian,
    generators: Iterable[tuple[PauliString, float]],
    prune: float = DEFAULT_PRUNE,
) -> QubitHamiltonian:
    """Fold `dress` over (generator, angle) pairs in list order.

    The result equals conjugation by the ordered operator product
    U = U_1 U_2 ... U_n with U_j = exp(-i tau_j P_j / 2), i.e. dressing by
    the first listed generator happens first. Equivalently, the circuit
    picture applies the rotations to the reference in *reversed* list
    order (last listed generator nearest the reference state).
    """
    for p, tau in generators:
        h = dress(h, p, tau, prune=prune)
    return h
