"""Witness searches for the classical algebra identities.

These algebras are commutative but fail associativity, power associativity
and the Jacobi identity; flexibility always holds.  The checker looks for
concrete elements violating each identity, trying basis tuples first
(reproducible and small) and seeded random elements after.  A "holds"
verdict is only a statement about the sampled elements, never a proof.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import AlgebraSpec, Element, multiply

DEFECT_THRESHOLD = 1e-8

IDENTITY_NAMES = (
    "associativity",
    "flexibility",
    "alternativity",
    "jordan",
    "power_associativity",
    "jacobi",
)


def associator(a: Element, b: Element, c: Element, spec: AlgebraSpec) -> Element:
    """(ab)c - a(bc)."""
    return multiply(multiply(a, b, spec), c, spec) - multiply(a, multiply(b, c, spec), spec)


def principal_power(a: Element, k: int, spec: AlgebraSpec) -> Element:
    """Left-multiplication power: a^1 = a, a^k = a * a^(k-1)."""
    if k < 1:
        raise ValueError(f"power must be >= 1, got {k}")
    out = a
    for _ in range(k - 1):
        out = multiply(a, out, spec)
    return out


def _l1(el: Element) -> float:
    return float(np.abs(el.x).sum() + np.abs(el.y).sum())


def _assoc_defect(spec, a, b, c):
    return _l1(associator(a, b, c, spec))


def _flex_defect(spec, a, b):
    # x(yx) - (xy)x
    return _l1(multiply(a, multiply(b, a, spec), spec) - multiply(multiply(a, b, spec), a, spec))


def _alt_defect(spec, a, b):
    # max of x^2 y - x(xy) and y x^2 - (yx)x
    sq = multiply(a, a, spec)
    left = _l1(multiply(sq, b, spec) - multiply(a, multiply(a, b, spec), spec))
    right = _l1(multiply(b, sq, spec) - multiply(multiply(b, a, spec), a, spec))
    return max(left, right)


def _jordan_defect(spec, a, b):
    # x^2 (xy) - x (x^2 y)
    sq = multiply(a, a, spec)
    return _l1(
        multiply(sq, multiply(a, b, spec), spec) - multiply(a, multiply(sq, b, spec), spec)
    )


def _power_defect(spec, a):
    # x^2 x^2 - x^4
    sq = multiply(a, a, spec)
    return _l1(multiply(sq, sq, spec) - principal_power(a, 4, spec))


def _jacobi_defect(spec, a, b, c):
    s = (
        multiply(multiply(a, b, spec), c, spec)
        + multiply(multiply(b, c, spec), a, spec)
        + multiply(multiply(c, a, spec), b, spec)
    )
    return _l1(s)


@dataclass
class IdentityResult:
    verdict: str  # "holds_on_samples" | "violated"
    defect: float
    witness: list | None = None  # list of coefficient vectors

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "defect": self.defect, "witness": self.witness}


@dataclass
class IdentityReport:
    results: dict = field(default_factory=dict)

    def __getitem__(self, name: str) -> IdentityResult:
        return self.results[name]

    def to_dict(self) -> dict:
        return {name: res.to_dict() for name, res in self.results.items()}


def _basis_elements(spec: AlgebraSpec) -> list[Element]:
    els = [Element.basis_female(spec, i) for i in range(spec.n)]
    els += [Element.basis_male(spec, p) for p in range(spec.nu)]
    return els


def _mixed_pairs(spec: AlgebraSpec) -> list[Element]:
    """Elements e_i + m_p; the standard power-associativity witnesses."""
    out = []
    for i in range(spec.n):
        for p in range(spec.nu):
            out.append(Element.basis_female(spec, i) + Element.basis_male(spec, p))
    return out


def _random_elements(spec: AlgebraSpec, count: int, rng) -> list[Element]:
    return [
        Element(rng.uniform(-1, 1, spec.n), rng.uniform(-1, 1, spec.nu))
        for _ in range(count)
    ]


def _search(candidates, defect_fn, stop_at_violation: bool):
    """Return (best_defect, best_witness) over candidate tuples."""
    best = 0.0
    best_w = None
    for tup in candidates:
        d = defect_fn(*tup)
        if d > best:
            best = d
            best_w = tup
            if stop_at_violation and best > DEFECT_THRESHOLD:
                break
    return best, best_w


def check_identities(spec: AlgebraSpec, samples: int = 5, seed: int = 0) -> IdentityReport:
    """Evaluate all identities on basis tuples and seeded random elements.

    For the violated identities the search stops at the first witness with
    defect above the threshold; flexibility is evaluated on every sample so
    the reported defect is a true maximum over the sample set.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    basis = _basis_elements(spec)
    mixed = _mixed_pairs(spec)
    rand = _random_elements(spec, samples, rng)

    singles = mixed + basis + rand
    pairs = [(a, b) for a in basis for b in basis] + [
        (a, b) for a in mixed for b in basis
    ] + [(rand[i], rand[(i + 1) % len(rand)]) for i in range(len(rand))]
    triples = [(a, b, c) for a in basis for b in basis for c in basis] + [
        (rand[i], rand[(i + 1) % len(rand)], rand[(i + 2) % len(rand)])
        for i in range(len(rand))
    ]

    report = IdentityReport()

    def record(name, defect, witness):
        verdict = "violated" if defect > DEFECT_THRESHOLD else "holds_on_samples"
        w = None
        if verdict == "violated" and witness is not None:
            w = [el.vector.tolist() for el in witness]
        report.results[name] = IdentityResult(verdict, defect, w)

    d, w = _search(triples, lambda a, b, c: _assoc_defect(spec, a, b, c), True)
    record("associativity", d, w)

    d, w = _search(pairs, lambda a, b: _flex_defect(spec, a, b), False)
    record("flexibility", d, w)

    d, w = _search(pairs, lambda a, b: _alt_defect(spec, a, b), True)
    record("alternativity", d, w)

    d, w = _search(pairs, lambda a, b: _jordan_defect(spec, a, b), True)
    record("jordan", d, w)

    d, w = _search([(a,) for a in singles], lambda a: _power_defect(spec, a), True)
    record("power_associativity", d, w)

    d, w = _search(triples, lambda a, b, c: _jacobi_defect(spec, a, b, c), True)
    record("jacobi", d, w)

    return report
