"""Closed-form asymptotic predictions for |L(A)| and |L(A)^c|.

With p(N) = c N^(-alpha) and h summands, the global threshold is at
alpha = (h-1)/h:

* subcritical (alpha larger): |L(A)| ~ (Np)^h / theta;
* critical (alpha equal): both sizes are linear in N with coefficients
  given by an integral of exp(-c^h * shifted Irwin-Hall density);
* supercritical (alpha smaller): |L(A)^c| ~ const * p^(-h/(h-1)).

A second, local threshold at alpha = (h-2)/(h-1) separates Poisson and
non-Poisson behaviour of the representation counts W_k.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from scipy import integrate

from .enumeration import irwin_hall_array, shift_weights
from .errors import ArityMismatch, PreconditionViolated, WrongRegime
from .forms import LinearForm, new_linear_form

__all__ = [
    "RegimeSpec",
    "Prediction",
    "predict_subcritical",
    "predict_critical",
    "predict_supercritical_complement",
    "predict",
    "generalized_sumset_critical",
    "generalized_ratio",
    "hm_identity_sides",
    "hm_identity_residual",
]

SUBCRITICAL = "subcritical"
CRITICAL = "critical"
SUPERCRITICAL = "supercritical"
QUAD_TOL = 1e-12


def _compare(alpha, threshold: Fraction) -> int:
    """Sign of alpha - threshold; floats within 1e-12 count as equal (with a warning)."""
    if isinstance(alpha, (int, Fraction)):
        a = Fraction(alpha)
        return (a > threshold) - (a < threshold)
    t = float(threshold)
    if math.isclose(alpha, t, rel_tol=1e-12, abs_tol=0.0):
        if alpha != t:
            warnings.warn(f"alpha={alpha!r} treated as the threshold {threshold}; pass a Fraction to be explicit")
        return 0
    return 1 if alpha > t else -1


@dataclass(frozen=True)
class RegimeSpec:
    """Decay law p(N) = c * N^(-alpha) classified against both thresholds."""

    c: float
    alpha: float | Fraction
    h: int

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("c must be positive")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie strictly between 0 and 1")
        if self.h < 2:
            raise ValueError("h must be at least 2")

    @classmethod
    def for_form(cls, form: LinearForm, c: float, alpha) -> "RegimeSpec":
        return cls(c, alpha, form.h)

    @property
    def global_threshold(self) -> Fraction:
        return Fraction(self.h - 1, self.h)

    @property
    def local_threshold(self) -> Fraction:
        return Fraction(self.h - 2, self.h - 1)

    @property
    def classification(self) -> str:
        sign = _compare(self.alpha, self.global_threshold)
        return CRITICAL if sign == 0 else (SUBCRITICAL if sign > 0 else SUPERCRITICAL)

    @property
    def local_classification(self) -> str:
        """``"poisson"`` strictly below the local threshold, else ``"non_poisson"``."""
        return "poisson" if _compare(self.alpha, self.local_threshold) > 0 else "non_poisson"

    def p(self, N: int) -> float:
        return self.c * float(N) ** (-float(self.alpha))

    def to_json(self) -> dict:
        return {
            "c": self.c,
            "alpha": str(self.alpha) if isinstance(self.alpha, Fraction) else self.alpha,
            "h": self.h,
            "classification": self.classification,
            "local_classification": self.local_classification,
        }


@dataclass(frozen=True)
class Prediction:
    quantity: str
    value: float
    tag: str
    regime: Optional[RegimeSpec] = None
    N: Optional[int] = None

    def to_json(self) -> dict:
        out = {"quantity": self.quantity, "value": self.value, "tag": self.tag}
        if self.N is not None:
            out["N"] = self.N
        if self.regime is not None:
            out["regime"] = self.regime.to_json()
        return out


def _require(regime: Optional[RegimeSpec], expected: str) -> None:
    if regime is not None and regime.classification != expected:
        raise WrongRegime(f"regime is {regime.classification}, this predictor needs {expected}")


def predict_subcritical(form: LinearForm, N: int, p: float, regime: Optional[RegimeSpec] = None) -> Prediction:
    """|L(A)| ~ (Np)^h / theta."""
    _require(regime, SUBCRITICAL)
    return Prediction("image_size", (N * p) ** form.h / form.theta, "subcritical.image", regime, N)


def _critical_integral(form: LinearForm, c: float) -> float:
    """2 * int_0^{m/2} exp(-c^h F(x) / (theta prod|u|)) dx, F = shifted IH sum."""
    h = form.h
    scale = c**h / (form.theta * math.prod(form.abs_coeffs))
    weights = shift_weights(form)

    def integrand(x):
        total = sum(cnt * irwin_hall_array(h, x - s) for s, cnt in weights)
        return math.exp(-scale * float(total))

    half = form.m / 2
    knots = [0.0] + [float(j) for j in range(1, math.ceil(half))] + [half]
    total = 0.0
    for a, b in zip(knots[:-1], knots[1:]):
        if b > a:
            val, _ = integrate.quad(integrand, a, b, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200)
            total += val
    return 2.0 * total


def predict_critical(form: LinearForm, c: float) -> tuple[float, float]:
    """(image_coeff, complement_coeff): |L(A)| and |L(A)^c| divided by N at p = c N^(-(h-1)/h)."""
    if not c > 0:
        raise ValueError("c must be positive")
    comp = _critical_integral(form, c)
    return sum(form.abs_coeffs) - comp, comp


def predict_supercritical_complement(form: LinearForm, p: float, regime: Optional[RegimeSpec] = None) -> Prediction:
    """|L(A)^c| ~ 2 Gamma(1/(h-1)) ((h-1)! theta prod|u|)^(1/(h-1)) / ((h-1) p^(h/(h-1)))."""
    _require(regime, SUPERCRITICAL)
    h = form.h
    root = (math.factorial(h - 1) * form.theta * math.prod(form.abs_coeffs)) ** (1.0 / (h - 1))
    value = 2.0 * math.gamma(1.0 / (h - 1)) * root / ((h - 1) * p ** (h / (h - 1)))
    return Prediction("complement_size", value, "supercritical.complement", regime)


def predict(form: LinearForm, N: int, regime: RegimeSpec) -> dict[str, Optional[Prediction]]:
    """Predictions available in the given regime, keyed by quantity.

    Quantities without a closed form in that regime map to ``None``.
    """
    if regime.h != form.h:
        raise ArityMismatch("regime and form disagree on h")
    p = regime.p(N)
    cls = regime.classification
    if cls == SUBCRITICAL:
        return {"image_size": predict_subcritical(form, N, p, regime), "complement_size": None}
    if cls == SUPERCRITICAL:
        pred = predict_supercritical_complement(form, p, regime)
        return {"image_size": None, "complement_size": Prediction(pred.quantity, pred.value, pred.tag, regime, N)}
    img, comp = predict_critical(form, regime.c)
    return {
        "image_size": Prediction("image_size", img * N, "critical.image", regime, N),
        "complement_size": Prediction("complement_size", comp * N, "critical.complement", regime, N),
    }


def generalized_sumset_critical(s: int, d: int, c: float) -> tuple[float, float]:
    """Critical coefficients for A_{s,d} via the single Irwin-Hall integral."""
    h = s + d
    if h < 2 or s < 0 or d < 0:
        raise ValueError("need s, d >= 0 with s + d >= 2")
    scale = c**h / (math.factorial(s) * math.factorial(d))

    def integrand(x):
        return math.exp(-scale * float(irwin_hall_array(h, x)))

    half = h / 2
    knots = [0.0] + [float(j) for j in range(1, math.ceil(half))] + [half]
    comp = 2.0 * sum(
        integrate.quad(integrand, a, b, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200)[0]
        for a, b in zip(knots[:-1], knots[1:])
        if b > a
    )
    return h - comp, comp


_RATIO_REGIMES = ("subcritical_image", "subcritical_complement", "supercritical_image", "supercritical_complement")


def generalized_ratio(s1: int, d1: int, s2: int, d2: int, regime: str) -> float:
    """Limit of |A_{s1,d1}| / |A_{s2,d2}| (or of the complements) in a regime."""
    if min(s1, d1, s2, d2) < 0:
        raise ValueError("s and d must be nonnegative")
    if s1 + d1 != s2 + d2 or s1 + d1 < 2:
        raise ArityMismatch("need s1 + d1 == s2 + d2 >= 2")
    if regime not in _RATIO_REGIMES:
        raise ValueError(f"regime must be one of {_RATIO_REGIMES}")
    f = math.factorial
    w1, w2 = f(s1) * f(d1), f(s2) * f(d2)
    h = s1 + d1
    if regime == "subcritical_image":
        return w2 / w1
    if regime == "supercritical_complement":
        return (w1 / w2) ** (1.0 / (h - 1))
    return 1.0


def hm_identity_sides(u1: int, u2: int, c: float) -> tuple[float, float]:
    """Both sides of the two-variable critical identity.

    Left: the critical complement integral for the form u1 x + u2 y,
    by quadrature. Right: 2|u1 u2|(1 - e^{-c^2/|u1|})/c^2 + (|u1| - |u2|) e^{-c^2/|u1|}.
    """
    if u1 == 0 or u2 == 0 or math.gcd(u1, u2) != 1 or abs(u1) < abs(u2) or u1 == u2:
        raise PreconditionViolated(f"need coprime nonzero |u1| >= |u2| and (u1, u2) != (1, 1); got {(u1, u2)}")
    if not c > 0:
        raise PreconditionViolated("c must be positive")
    form = new_linear_form([u1, u2])
    # u1 != u2 with gcd 1 forces theta = 1, which the right side assumes
    lhs = _critical_integral(form, c)
    a, b = abs(u1), abs(u2)
    e = math.exp(-c * c / a)
    rhs = 2 * a * b * (-math.expm1(-c * c / a)) / (c * c) + (a - b) * e
    return lhs, rhs


def hm_identity_residual(u1: int, u2: int, c: float) -> float:
    lhs, rhs = hm_identity_sides(u1, u2, c)
    return abs(lhs - rhs)
