"""Asymptotic regime classification for power-log neck families.

A law has the form c * eps**p * |ln eps|**r.  As eps -> 0 such a quantity
tends to 0 when p > 0 (or p == 0 and r < 0), to infinity when p < 0 (or
p == 0 and r > 0), and to c when p == r == 0.  Comparisons between two laws
reduce to that rule applied to their ratio: exponents first, then log-powers,
then prefactors.  Exponent ties are decided with an absolute tolerance of
1e-12.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass

from .errors import MissingEll, RegimeViolationError, UnclassifiableFamily
from .geometry import NeckParams

TIE = 1e-12


class Regime(str, enum.Enum):
    SUPER_THIN = "SuperThin"
    FLAT_THIN = "FlatThin"
    WINDOW_THICK = "WindowThick"
    NARROW_THICK = "NarrowThick"
    LETTER_BOX_SUB = "LetterBoxSub"
    LETTER_BOX_CRITICAL = "LetterBoxCritical"
    LETTER_BOX_SUPER = "LetterBoxSuper"
    OUT_OF_SCOPE_KS = "OutOfScopeKS"


INSIDE = {Regime.SUPER_THIN, Regime.FLAT_THIN, Regime.LETTER_BOX_SUB}
OUTSIDE = {Regime.WINDOW_THICK, Regime.NARROW_THICK, Regime.LETTER_BOX_SUPER}

RATE_NECK = "eps/(delta*eta)"
RATE_FLAT = "1/eta"
RATE_OUTSIDE = "|ln(eta/delta)|/delta"


@dataclass(frozen=True)
class PowerLog:
    """c * eps**p * |ln eps|**r."""

    prefactor: float = 1.0
    power: float = 1.0
    log_power: float = 0.0

    def __post_init__(self):
        if not self.prefactor > 0:
            raise ValueError("prefactor must be positive")

    def __call__(self, eps):
        return self.prefactor * eps**self.power * abs(math.log(eps)) ** self.log_power

    def over(self, other: "PowerLog") -> "PowerLog":
        return PowerLog(
            self.prefactor / other.prefactor,
            self.power - other.power,
            self.log_power - other.log_power,
        )

    def limit(self) -> float:
        p, r = _snap(self.power), _snap(self.log_power)
        if p > 0 or (p == 0 and r < 0):
            return 0.0
        if p < 0 or (p == 0 and r > 0):
            return math.inf
        return self.prefactor


EPS_LAW = PowerLog(1.0, 1.0, 0.0)


def _snap(x: float) -> float:
    return 0.0 if abs(x) <= TIE else x


@dataclass(frozen=True)
class ScalingFamily:
    delta_law: PowerLog
    eta_law: PowerLog

    def __post_init__(self):
        for name, law in (("delta", self.delta_law), ("eta", self.eta_law)):
            if not _snap(law.power) > 0:
                raise UnclassifiableFamily(
                    f"{name} law needs a positive power so that it vanishes with eps"
                )
        ratio = self.eta_law.over(self.delta_law).limit()
        if ratio == math.inf or (ratio > 1.0 and math.isfinite(ratio)):
            raise RegimeViolationError("eta(eps) must not exceed delta(eps) as eps -> 0")

    def neck(self, eps: float) -> NeckParams:
        return NeckParams(eps, self.delta_law(eps), self.eta_law(eps))


@dataclass(frozen=True)
class RegimeReport:
    """Classification result.  kappa_* are in units of (beta - alpha)^2;
    kappa_outside is taken at ``rate_outside``."""

    tag: Regime
    ell: float
    m_flat: float | None
    l_narrow: float | None
    rate: str | None
    rate_outside: str | None
    kappa_total: float | None
    kappa_neck: float | None
    kappa_outside: float | None
    note: str = ""

    def to_dict(self) -> dict:
        """JSON-ready dict.  kappa_* hold symbolic expressions, kappa_*_value
        the numeric coefficients of (beta - alpha)^2; ell = inf is "inf"."""
        d = asdict(self)
        d["tag"] = self.tag.value
        d["ell"] = _enc(self.ell)
        exprs = _KAPPA_EXPR.get(self.tag, {})
        for part in ("total", "neck", "outside"):
            d[f"kappa_{part}_value"] = d.pop(f"kappa_{part}")
            d[f"kappa_{part}"] = exprs.get(part)
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "RegimeReport":
        kw = {k: d.get(k) for k in cls.__dataclass_fields__}
        for part in ("total", "neck", "outside"):
            kw[f"kappa_{part}"] = d.get(f"kappa_{part}_value")
        kw["tag"] = Regime(d["tag"])
        kw["ell"] = _dec(d["ell"])
        kw["note"] = d.get("note", "")
        return cls(**kw)


def _enc(x: float):
    return "inf" if x == math.inf else x


def _dec(x):
    return math.inf if x == "inf" else float(x)


_KAPPA_EXPR = {
    **{t: {"total": "(beta-alpha)^2", "neck": "(beta-alpha)^2", "outside": "0"} for t in INSIDE},
    **{t: {"total": "pi*(beta-alpha)^2", "neck": "0", "outside": "pi*(beta-alpha)^2"} for t in OUTSIDE},
    Regime.LETTER_BOX_CRITICAL: {
        "total": "pi*(beta-alpha)^2/(pi+ell)",
        "neck": "pi^2*(beta-alpha)^2/(pi+ell)^2",
        "outside": "pi*ell^2*(beta-alpha)^2/(pi+ell)^2",
    },
}


def _ell(family: ScalingFamily) -> float:
    """lim (eta/eps) |ln(eta/delta)| for the family."""
    eta_eps = family.eta_law.over(EPS_LAW)
    q = _snap(family.eta_law.power - family.delta_law.power)
    if q > 0:
        # |ln(eta/delta)| ~ q |ln eps|
        return PowerLog(eta_eps.prefactor * q, eta_eps.power, eta_eps.log_power + 1).limit()
    # equal powers: |ln(eta/delta)| grows like ln|ln eps|, slower than any log power
    lim = eta_eps.limit()
    return 0.0 if lim == 0.0 else math.inf


def critical_kappas(ell: float) -> tuple[float, float, float]:
    """(total, neck, outside) for the critical letter-box sub-regime."""
    s = math.pi + ell
    return math.pi / s, math.pi**2 / s**2, math.pi * ell**2 / s**2


def classify(family: ScalingFamily) -> RegimeReport:
    delta_eps = family.delta_law.over(EPS_LAW).limit()
    eta_delta = family.eta_law.over(family.delta_law).limit()
    eta_eps = family.eta_law.over(EPS_LAW).limit()
    ell = _ell(family)

    if eta_delta != 0.0:
        return RegimeReport(
            Regime.OUT_OF_SCOPE_KS, ell, None, None, None, None, None, None, None,
            note="delta and eta are of the same order; no prediction",
        )
    m_flat = delta_eps if 0 < delta_eps < math.inf else None
    l_narrow = eta_eps if 0 < eta_eps < math.inf else None
    note = ""
    if delta_eps == 0.0:
        tag = Regime.SUPER_THIN
    elif m_flat is not None:
        tag = Regime.FLAT_THIN
        if m_flat != 1.0:
            note = f"constants are stated for lim delta/eps = 1; this family has {m_flat:g}"
    elif eta_eps == math.inf:
        tag = Regime.WINDOW_THICK
    elif l_narrow is not None:
        tag = Regime.NARROW_THICK
    elif ell == 0.0:
        tag = Regime.LETTER_BOX_SUB
    elif ell == math.inf:
        tag = Regime.LETTER_BOX_SUPER
    elif 0 < ell < math.inf:
        tag = Regime.LETTER_BOX_CRITICAL
    else:  # pragma: no cover - power-log laws always have a limit
        raise UnclassifiableFamily(f"ill-defined limit ell={ell}")

    if tag in INSIDE:
        rate = RATE_FLAT if tag is Regime.FLAT_THIN else RATE_NECK
        return RegimeReport(tag, ell, m_flat, l_narrow, rate, None, 1.0, 1.0, 0.0, note)
    if tag in OUTSIDE:
        return RegimeReport(
            tag, ell, m_flat, l_narrow, RATE_OUTSIDE, RATE_OUTSIDE, math.pi, 0.0, math.pi, note
        )
    total, neck, outside = critical_kappas(ell)
    return RegimeReport(tag, ell, m_flat, l_narrow, RATE_NECK, RATE_OUTSIDE, total, neck, outside, note)


def predicted_limits(report: RegimeReport, alpha: float, beta: float) -> tuple[float, float, float]:
    """(kappa_total, kappa_neck, kappa_outside) in absolute units."""
    if report.tag is Regime.OUT_OF_SCOPE_KS:
        raise UnclassifiableFamily("no predictions for delta ~ eta families")
    if report.tag is Regime.LETTER_BOX_CRITICAL:
        if not (0 < report.ell < math.inf):
            raise MissingEll("critical letter-box report without a finite ell")
        kt, kn, ko = critical_kappas(report.ell)
    else:
        kt, kn, ko = report.kappa_total, report.kappa_neck, report.kappa_outside
    j2 = (beta - alpha) ** 2
    return kt * j2, kn * j2, ko * j2


def finite_ratio(neck: NeckParams) -> float:
    """(eta/eps) |ln(eta/delta)| evaluated at a concrete triple."""
    if neck.eta >= neck.delta:
        raise RegimeViolationError("finite_ratio needs eta < delta")
    return neck.eta / neck.eps * abs(math.log(neck.eta / neck.delta))


def rate_value(rate: str, neck: NeckParams) -> float:
    """Numerical value of a rate descriptor at a concrete triple."""
    if rate == RATE_NECK:
        return neck.eps / (neck.delta * neck.eta)
    if rate == RATE_FLAT:
        return 1.0 / neck.eta
    if rate == RATE_OUTSIDE:
        return abs(math.log(neck.eta / neck.delta)) / neck.delta
    raise ValueError(f"unknown rate {rate!r}")
