"""Copyright (c) 2023 Genome Research Ltd.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.

Bessel functions of the first kind and the Bessel/Lorentzian sums.

Integer-order rows J_k(ξ), k = −K..K, are computed by Miller's backward
recurrence normalized with J_0 + 2·Σ J_2m = 1. Every sum over k is
truncated where the omitted weight Σ_{|k|>K} J_k² falls below the series
tolerance.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import brentq

from .app import app
from .errors import DivergentTerm, InvalidParameter

# Miller start index padding, m = n + sqrt(DIGITS·n); 160 covers doubles.
_MILLER_DIGITS = 160
_RESCALE = 1.0e250


@dataclass(frozen=True)
class BesselRow:
    """Values J_k(ξ) for k = −K..K."""

    xi: float
    K: int
    values: NDArray[np.float64]

    def __call__(self, k: Union[int, ArrayLike]) -> NDArray[np.float64]:
        """Look up J_k for one order or an array of orders.

        Args:
            k: Order(s) with |k| ≤ K.

        Returns:
            ndarray: The Bessel values.
        """
        return self.values[np.asarray(k) + self.K]

    @property
    def orders(self) -> NDArray[np.int64]:
        """Orders −K..K matching `values`."""
        return np.arange(-self.K, self.K + 1)

    def norm(self) -> float:
        """Σ J_k² over the row, one for an untruncated row."""
        return float(np.sum(self.values**2))


def _power_series(x: float, order: int) -> NDArray[np.float64]:
    """J_0..J_order(x) for small non-negative x."""
    values = np.zeros(order + 1)
    if x == 0.0:
        values[0] = 1.0
        return values
    log_half = math.log(x / 2.0)
    for k in range(order + 1):
        total = 0.0
        for m in range(6):
            total += (-1) ** m * math.exp(
                (2 * m + k) * log_half
                - math.lgamma(m + 1)
                - math.lgamma(m + k + 1)
            )
        values[k] = total
    return values


def _miller(x: float, order: int) -> NDArray[np.float64]:
    """J_0..J_order(x) for positive x by backward recurrence."""
    m = max(order, int(math.ceil(x)))
    start = 2 * ((m + int(math.sqrt(_MILLER_DIGITS * m)) + 2) // 2)
    values = np.zeros(order + 1)
    f_next, f = 0.0, 1.0e-30
    norm = 2.0 * f
    for k in range(start, 0, -1):
        f_next, f = f, 2.0 * k / x * f - f_next
        if abs(f) > _RESCALE:
            f /= _RESCALE
            f_next /= _RESCALE
            norm /= _RESCALE
            values /= _RESCALE
        if k - 1 <= order:
            values[k - 1] = f
        if k - 1 == 0:
            norm += f
        elif (k - 1) % 2 == 0:
            norm += 2.0 * f
    return values / norm


def bessel_row(xi: float, K: int) -> BesselRow:
    """Compute J_k(ξ) for k = −K..K.

    Args:
        xi: Argument ξ.
        K: Largest order, at least one.

    Returns:
        BesselRow: The row, with J_{−k} = (−1)^k J_k.
    """
    if K < 1:
        raise InvalidParameter(f"K must be at least 1, got {K}")
    x = abs(xi)
    if x < app.settings.series.small_argument:
        positive = _power_series(x, K)
    else:
        positive = _miller(x, K)
    signs = np.where(np.arange(K + 1) % 2 == 0, 1.0, -1.0)
    if xi < 0:
        positive = positive * signs
    values = np.concatenate([(positive * signs)[:0:-1], positive])
    return BesselRow(xi=float(xi), K=K, values=values)


def _search_order(xi: float) -> int:
    """Order beyond which J_k(ξ)² is negligible in double precision."""
    x = abs(xi)
    return int(math.ceil(x + 6.0 * x ** (1.0 / 3.0))) + 30


def truncation_order(xi: float, tol: Optional[float] = None) -> int:
    """Smallest K ≥ floor order with Σ_{|k|>K} J_k(ξ)² < tol.

    Args:
        xi: Argument ξ.
        tol: Tail tolerance, series.tol by default.

    Returns:
        int: The truncation order K.
    """
    tol = app.settings.series.tol if tol is None else tol
    if not tol > 0:
        raise InvalidParameter(f"tol must be positive, got {tol}")
    floor = app.settings.series.min_order
    row = bessel_row(xi, max(_search_order(xi), floor + 1))
    positive = row.values[row.K + 1 :] ** 2
    # tail[K] = 2·Σ_{k>K} J_k² for K = 0..M
    tail = 2.0 * np.concatenate([np.cumsum(positive[::-1])[::-1], [0.0]])
    below = np.nonzero(tail[floor:] < tol)[0]
    return floor + int(below[0])


def series_row(
    xi: float, tol: Optional[float] = None, pad: int = 0
) -> BesselRow:
    """Row truncated at truncation_order(ξ, tol) + pad.

    Args:
        xi: Argument ξ.
        tol: Tail tolerance.
        pad: Extra orders, for sums that reference J_{k±1} or J_{k±2}.

    Returns:
        BesselRow: The row.
    """
    return bessel_row(xi, truncation_order(xi, tol) + pad)


def lorentz_sum(
    xi: float, gamma: float, delta: float = 0.0, tol: Optional[float] = None
) -> float:
    """S(ξ, Γ, δ) = Σ_k J_k(ξ)² / (Γ² + 4(k − δ)²).

    Args:
        xi: Modulation index ξ.
        gamma: Decay rate Γ.
        delta: Detuning δ.
        tol: Tail tolerance.

    Returns:
        float: The sum.

    Raises:
        DivergentTerm: Γ = 0 and δ is an order with J_δ(ξ) ≠ 0.
    """
    if gamma < 0:
        raise InvalidParameter(f"gamma must be non-negative, got {gamma}")
    row = series_row(xi, tol)
    j2 = row.values**2
    k = row.orders
    if gamma == 0.0:
        hit = (k == delta) & (j2 > 0.0)
        if np.any(hit):
            raise DivergentTerm(
                f"term k={int(delta)} diverges at gamma=0, xi={xi}"
            )
    g2 = gamma * gamma
    if delta == 0.0:
        positive = j2[row.K + 1 :]
        kp = k[row.K + 1 :]
        head = j2[row.K] / g2 if j2[row.K] != 0.0 else 0.0
        return float(head + 2.0 * np.sum(positive / (g2 + 4.0 * kp * kp)))
    denominator = g2 + 4.0 * (k - delta) ** 2
    nonzero = j2 != 0.0
    return float(np.sum(j2[nonzero] / denominator[nonzero]))


def lorentz_sum_dxi(
    xi: float, gamma: float, tol: Optional[float] = None
) -> float:
    """∂S/∂ξ at δ = 0, using J_k' = (J_{k−1} − J_{k+1}) / 2.

    Args:
        xi: Modulation index ξ.
        gamma: Decay rate Γ > 0.
        tol: Tail tolerance.

    Returns:
        float: The derivative.
    """
    if not gamma > 0:
        raise InvalidParameter(f"gamma must be positive, got {gamma}")
    row = series_row(xi, tol, pad=1)
    K = row.K - 1
    k = np.arange(1, K + 1)
    g2 = gamma * gamma
    head = -2.0 * row(0) * row(1) / g2
    terms = row(k) * (row(k - 1) - row(k + 1)) / (g2 + 4.0 * k * k)
    return float(head + 2.0 * np.sum(terms))


def lorentz_sum_derivatives(
    xi: float, gamma: float, tol: Optional[float] = None
) -> tuple[float, float, float]:
    """S, ∂S/∂ξ and ∂²S/∂ξ² at δ = 0 from one Bessel row.

    Args:
        xi: Modulation index ξ.
        gamma: Decay rate Γ > 0.
        tol: Tail tolerance.

    Returns:
        tuple: (S, S', S'').
    """
    if not gamma > 0:
        raise InvalidParameter(f"gamma must be positive, got {gamma}")
    row = series_row(xi, tol, pad=2)
    K = row.K - 2
    k = np.arange(-K, K + 1)
    weight = 1.0 / (gamma * gamma + 4.0 * k * k)
    j = row(k)
    dj = 0.5 * (row(k - 1) - row(k + 1))
    d2j = 0.25 * (row(k - 2) - 2.0 * j + row(k + 2))
    s = float(np.sum(weight * j * j))
    ds = float(np.sum(2.0 * weight * j * dj))
    d2s = float(np.sum(2.0 * weight * (dj * dj + j * d2j)))
    return s, ds, d2s


def crossing_sum(
    xi: float, gamma: float, tol: Optional[float] = None
) -> float:
    """Σ_{k≥1} J_k (J_{k−1} − J_{k+1}) / (Γ² + 4k²)."""
    row = series_row(xi, tol, pad=1)
    k = np.arange(1, row.K)
    terms = row(k) * (row(k - 1) - row(k + 1))
    return float(np.sum(terms / (gamma * gamma + 4.0 * k * k)))


def crossing_function(
    xi: float, gamma: float, tol: Optional[float] = None
) -> float:
    """G(Γ, ξ), the right-hand side of the extremum condition J_0 = G.

    Args:
        xi: Modulation index ξ.
        gamma: Decay rate Γ.
        tol: Tail tolerance.

    Returns:
        float: G, infinite where J_1(ξ) = 0.
    """
    j1 = float(bessel_row(xi, 1)(1))
    total = gamma * gamma * crossing_sum(xi, gamma, tol)
    if j1 == 0.0:
        return math.copysign(math.inf, total) if total else math.nan
    return total / j1


def saturated_lorentz_sum(
    xi: float,
    gamma: float,
    rabi: float,
    delta: float = 0.0,
    tol: Optional[float] = None,
) -> float:
    """Σ_k ΓΩ² J_k² / (Γ² + 2Ω² J_k² + 4(k − δ)²).

    Args:
        xi: Modulation index ξ.
        gamma: Decay rate Γ > 0.
        rabi: Rabi frequency Ω.
        delta: Detuning δ.
        tol: Tail tolerance.

    Returns:
        float: The saturated emission rate.
    """
    if not gamma > 0:
        raise InvalidParameter(f"gamma must be positive, got {gamma}")
    row = series_row(xi, tol)
    j2 = row.values**2
    w = rabi * rabi
    shift = 4.0 * (row.orders - delta) ** 2
    denominator = gamma * gamma + 2.0 * w * j2 + shift
    return float(np.sum(gamma * w * j2 / denominator))


def bessel_j(order: int, x: float) -> float:
    """Single value J_order(x)."""
    return float(bessel_row(x, max(abs(order), 1))(order))


@lru_cache(maxsize=8)
def _zeros(order: int, count: int) -> tuple[float, ...]:
    zeros: list[float] = []
    step = 0.1
    a = 0.5
    fa = bessel_j(order, a)
    while len(zeros) < count:
        b = a + step
        fb = bessel_j(order, b)
        if fa == 0.0:
            zeros.append(a)
        elif fa * fb < 0.0:
            zeros.append(
                brentq(lambda x: bessel_j(order, x), a, b, xtol=1e-15)
            )
        a, fa = b, fb
    return tuple(zeros[:count])


def bessel_zeros(order: int, count: int) -> NDArray[np.float64]:
    """First positive zeros of J_order.

    Args:
        order: Bessel order, 0 or more.
        count: Number of zeros.

    Returns:
        ndarray: Increasing zeros, excluding ξ = 0.
    """
    if count < 1:
        raise InvalidParameter(f"count must be at least 1, got {count}")
    return np.array(_zeros(order, count))
