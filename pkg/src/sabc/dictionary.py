"""Candidate term dictionaries for single-degree-of-freedom models.

A model is a linear combination ``xdd = sum_i theta_i * f_i(x, xd)`` of basis
terms drawn from a fixed dictionary. Terms are small declarative specs so
that both python and compiled simulation backends can evaluate the same
dictionary from one description.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

__all__ = [
    "TermSpec",
    "Dictionary",
    "build_polynomial_group",
    "pendulum23",
    "oscillator21",
    "preset_dictionary",
    "evaluate_dictionary",
    "predicted_acceleration",
]

# integer codes shared with the simulation kernels
KIND_CONSTANT = 0
KIND_MONOMIAL = 1
KIND_SIN = 2
KIND_ABS = 3
KIND_SIGNED_QUAD = 4

_KIND_NAMES = {
    "constant": KIND_CONSTANT,
    "monomial": KIND_MONOMIAL,
    "sin": KIND_SIN,
    "abs": KIND_ABS,
    "signed_quad": KIND_SIGNED_QUAD,
}
_VAR_CODES = {"disp": 0, "vel": 1}
_VAR_LABELS = {"disp": "x", "vel": "xd"}


@dataclass(frozen=True)
class TermSpec:
    """One basis function of displacement and velocity.

    kind
        "constant", "monomial", "sin", "abs", or "signed_quad".
    px, pv
        Monomial powers of x and xd (monomial only).
    var
        "disp" or "vel" for sin/abs terms.
    a, b
        Variables of a signed-quadratic term ``val(a) * |val(b)|``.
    """

    kind: str
    px: int = 0
    pv: int = 0
    var: str | None = None
    a: str | None = None
    b: str | None = None

    def __post_init__(self):
        if self.kind not in _KIND_NAMES:
            raise ConfigError(f"unknown term kind {self.kind!r}")
        if self.kind == "monomial":
            if self.px < 0 or self.pv < 0 or self.px + self.pv < 1:
                raise ConfigError(
                    f"monomial powers must be >= 0 with px+pv >= 1, got ({self.px}, {self.pv})"
                )
        elif self.kind in ("sin", "abs"):
            if self.var not in _VAR_CODES:
                raise ConfigError(f"{self.kind} term needs var in {{'disp','vel'}}, got {self.var!r}")
        elif self.kind == "signed_quad":
            if self.a not in _VAR_CODES or self.b not in _VAR_CODES:
                raise ConfigError("signed_quad term needs a, b in {'disp','vel'}")

    @staticmethod
    def constant() -> "TermSpec":
        return TermSpec("constant")

    @staticmethod
    def monomial(px: int, pv: int) -> "TermSpec":
        return TermSpec("monomial", px=px, pv=pv)

    @staticmethod
    def sin(var: str) -> "TermSpec":
        return TermSpec("sin", var=var)

    @staticmethod
    def abs(var: str) -> "TermSpec":
        return TermSpec("abs", var=var)

    @staticmethod
    def signed_quad(a: str, b: str) -> "TermSpec":
        return TermSpec("signed_quad", a=a, b=b)

    @property
    def label(self) -> str:
        """Canonical human-readable name, e.g. "x^2*xd" or "xd|xd|"."""
        if self.kind == "constant":
            return "1"
        if self.kind == "monomial":
            parts = []
            if self.px:
                parts.append("x" if self.px == 1 else f"x^{self.px}")
            if self.pv:
                parts.append("xd" if self.pv == 1 else f"xd^{self.pv}")
            return "*".join(parts)
        if self.kind == "sin":
            return f"sin({_VAR_LABELS[self.var]})"
        if self.kind == "abs":
            return f"|{_VAR_LABELS[self.var]}|"
        return f"{_VAR_LABELS[self.a]}|{_VAR_LABELS[self.b]}|"

    def codes(self) -> tuple[int, int, int]:
        """(kind, a, b) integer encoding used by the simulation kernels."""
        if self.kind == "constant":
            return (KIND_CONSTANT, 0, 0)
        if self.kind == "monomial":
            return (KIND_MONOMIAL, self.px, self.pv)
        if self.kind == "sin":
            return (KIND_SIN, _VAR_CODES[self.var], 0)
        if self.kind == "abs":
            return (KIND_ABS, _VAR_CODES[self.var], 0)
        return (KIND_SIGNED_QUAD, _VAR_CODES[self.a], _VAR_CODES[self.b])

    def __call__(self, x: float, v: float) -> float:
        """Evaluate the term at a single state (reference implementation)."""
        if self.kind == "constant":
            return 1.0
        if self.kind == "monomial":
            out = 1.0
            for _ in range(self.px):
                out *= x
            for _ in range(self.pv):
                out *= v
            return out
        val = x if (self.var or self.a) == "disp" else v
        if self.kind == "sin":
            return float(np.sin(val))
        if self.kind == "abs":
            # bare `abs` resolves to the builtin; the staticmethod above only
            # shadows attribute access, not name lookup inside methods
            return abs(val)
        mag = x if self.b == "disp" else v
        return val * abs(mag)

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "monomial":
            d.update(px=self.px, pv=self.pv)
        elif self.kind in ("sin", "abs"):
            d.update(var=self.var)
        elif self.kind == "signed_quad":
            d.update(a=self.a, b=self.b)
        return d

    @staticmethod
    def from_dict(d: dict) -> "TermSpec":
        if not isinstance(d, dict) or "kind" not in d:
            raise ConfigError(f"term descriptor must be a dict with a 'kind' key, got {d!r}")
        kind = d["kind"]
        allowed = {
            "constant": set(),
            "monomial": {"px", "pv"},
            "sin": {"var"},
            "abs": {"var"},
            "signed_quad": {"a", "b"},
        }
        if kind not in allowed:
            raise ConfigError(f"unknown term kind {kind!r}")
        extra = set(d) - {"kind"} - allowed[kind]
        if extra:
            raise ConfigError(f"unknown keys {sorted(extra)} in {kind} term descriptor")
        return TermSpec(kind=kind, **{k: d[k] for k in d if k != "kind"})


class Dictionary:
    """An ordered, duplicate-free collection of candidate terms."""

    def __init__(self, terms: list[TermSpec], name: str = "custom"):
        if len(terms) == 0:
            raise ConfigError("dictionary needs at least one term")
        labels = [t.label for t in terms]
        seen = set()
        for lab in labels:
            if lab in seen:
                raise ConfigError(f"duplicate term {lab!r} in dictionary")
            seen.add(lab)
        self.terms = list(terms)
        self.labels = labels
        self.name = name
        self._codes = np.array([t.codes() for t in terms], dtype=np.int32)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def codes(self) -> np.ndarray:
        """int32 array (N, 3) of (kind, a, b) rows for the kernels."""
        return self._codes

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ConfigError(f"term {label!r} not in dictionary {self.name!r}") from None

    def to_config(self):
        return [t.to_dict() for t in self.terms]


def build_polynomial_group(order: int) -> list[TermSpec]:
    """All monomials x^i * xd^(order-i) of total degree `order`.

    Ordered by descending power of x, e.g. order 2 -> [x^2, x*xd, xd^2].
    """
    if order < 1:
        raise ConfigError(f"polynomial group order must be >= 1, got {order}")
    return [TermSpec.monomial(i, order - i) for i in range(order, -1, -1)]


def pendulum23() -> Dictionary:
    """Constant, full polynomials to degree 5, and sines of both states."""
    terms = [TermSpec.constant()]
    for order in range(1, 6):
        terms += build_polynomial_group(order)
    terms += [TermSpec.sin("disp"), TermSpec.sin("vel")]
    return Dictionary(terms, name="pendulum23")


def oscillator21() -> Dictionary:
    """Constant, polynomials to degree 4, absolute values, and signed quadratics."""
    terms = [TermSpec.constant()]
    for order in range(1, 5):
        terms += build_polynomial_group(order)
    terms += [TermSpec.abs("disp"), TermSpec.abs("vel")]
    for a in ("disp", "vel"):
        for b in ("disp", "vel"):
            terms.append(TermSpec.signed_quad(a, b))
    return Dictionary(terms, name="oscillator21")


_PRESETS = {"pendulum23": pendulum23, "oscillator21": oscillator21}


def preset_dictionary(name: str) -> Dictionary:
    try:
        return _PRESETS[name]()
    except KeyError:
        raise ConfigError(
            f"unknown dictionary preset {name!r}; available: {sorted(_PRESETS)}"
        ) from None


def evaluate_dictionary(dictionary: Dictionary, x: float, v: float) -> np.ndarray:
    """Basis vector B(x, v) of all term values at one state."""
    if not (np.isfinite(x) and np.isfinite(v)):
        raise ValueError(f"state must be finite, got x={x}, v={v}")
    return np.array([t(x, v) for t in dictionary.terms], dtype=float)


def predicted_acceleration(dictionary: Dictionary, theta: np.ndarray, x: float, v: float) -> float:
    """Model acceleration theta . B(x, v) at one state."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (len(dictionary),):
        raise ValueError(
            f"theta has shape {theta.shape}, dictionary has {len(dictionary)} terms"
        )
    return float(theta @ evaluate_dictionary(dictionary, x, v))
