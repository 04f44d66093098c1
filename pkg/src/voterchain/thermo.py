"""Closed-form and brute-force thermodynamics of the two-symbol chain.

Open-chain closed forms (coupling J, temperature T, Boltzmann constant k,
x = J/(kT), zero field):

    Z = 2^N cosh^{N-1}(x)
    F = -N k T [ln 2 + ((N-1)/N) ln cosh(x)]
    S = N k ln 2 + (N-1) k ln cosh(x) + (N-1) (J/T) tanh(x)

S as defined here never drops below the per-cell information floor
N k ln 2; the gap (N-1)[k ln cosh(x) + (J/T) tanh(x)] is a sum of two
nonnegative terms, zero exactly when N = 1 or J = 0.  Note this sign
convention makes S differ from the calorimetric -dF/dT (and from the
Shannon entropy of the Gibbs distribution) by 2 (N-1) (J/T) tanh(x);
gibbs_entropy() provides the calorimetric form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Boundary, state_energies

LN2 = math.log(2.0)

BRUTE_FORCE_SITE_CAP = 16


def _log_cosh(x: float) -> float:
    # overflow-safe ln cosh
    ax = abs(x)
    return ax + math.log1p(math.exp(-2.0 * ax)) - LN2


def _check_point(n: int, temperature: float, boltzmann: float) -> None:
    if n < 1:
        raise ValueError(f"need at least one cell, got n={n}")
    if temperature <= 0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    if boltzmann <= 0:
        raise ValueError(f"boltzmann constant must be positive, got {boltzmann}")


def gamma_from_temperature(coupling: float, temperature: float, boltzmann: float = 1.0) -> float:
    """Dynamics bias tanh(2J/(kT)) for a chain at temperature T."""
    if temperature <= 0 or boltzmann <= 0:
        raise ValueError("temperature and boltzmann constant must be positive")
    return math.tanh(2.0 * coupling / (boltzmann * temperature))


def free_energy(n: int, coupling: float, temperature: float, boltzmann: float = 1.0) -> float:
    """Open-chain equilibrium free energy -kT [N ln2 + (N-1) ln cosh(J/kT)]."""
    _check_point(n, temperature, boltzmann)
    x = coupling / (boltzmann * temperature)
    return -boltzmann * temperature * (n * LN2 + (n - 1) * _log_cosh(x))


def entropy(n: int, coupling: float, temperature: float, boltzmann: float = 1.0) -> float:
    """Closed-form chain entropy N k ln2 + (N-1) k ln cosh(x) + (N-1)(J/T) tanh(x).

    Always >= n k ln2 (see module docstring for the sign convention).
    """
    _check_point(n, temperature, boltzmann)
    return n * boltzmann * LN2 + landauer_gap(n, coupling, temperature, boltzmann)


def gibbs_entropy(n: int, coupling: float, temperature: float, boltzmann: float = 1.0) -> float:
    """Calorimetric entropy -dF/dT of the open chain.

    Equals the Shannon entropy -k sum p ln p of the Gibbs distribution
    (gibbs_brute_force confirms); differs from entropy() in the sign of
    the exchange term.
    """
    _check_point(n, temperature, boltzmann)
    x = coupling / (boltzmann * temperature)
    exchange = (coupling / temperature) * math.tanh(x)
    return n * boltzmann * LN2 + (n - 1) * (boltzmann * _log_cosh(x) - exchange)


def landauer_floor(n: int, boltzmann: float = 1.0) -> float:
    """Information floor n k ln2 for n two-symbol cells."""
    if n < 0:
        raise ValueError("cell count must be nonnegative")
    return n * boltzmann * LN2


def landauer_gap(n: int, coupling: float, temperature: float, boltzmann: float = 1.0) -> float:
    """entropy() minus the floor n k ln2.

    Computed directly as (N-1)[k ln cosh(x) + (J/T) tanh(x)], a sum of two
    nonnegative terms, so the result is >= 0 in exact and floating-point
    arithmetic alike; zero exactly when n = 1 or J = 0.
    """
    _check_point(n, temperature, boltzmann)
    x = coupling / (boltzmann * temperature)
    exchange = (coupling / temperature) * math.tanh(x)
    return (n - 1) * (boltzmann * _log_cosh(x) + exchange)


def erasure_energy(n_bits: float, temperature: float, boltzmann: float = 1.0) -> float:
    """Minimum energy n k T ln2 to erase n_bits two-symbol cells at temperature T."""
    if n_bits < 0:
        raise ValueError("bit count must be nonnegative")
    if temperature <= 0 or boltzmann <= 0:
        raise ValueError("temperature and boltzmann constant must be positive")
    return n_bits * boltzmann * temperature * LN2


@dataclass(frozen=True)
class GibbsSummary:
    """Enumerated equilibrium quantities: Z, F = -kT ln Z, U = <H>, S = -k sum p ln p."""

    partition_function: float
    free_energy: float
    internal_energy: float
    entropy: float


def gibbs_brute_force(n: int, coupling: float, temperature: float, boltzmann: float = 1.0,
                      h: float = 0.0, boundary: Boundary = Boundary.OPEN) -> GibbsSummary:
    """Exact enumeration over all 2^n configurations (n <= 16).

    Satisfies F = U - T S up to roundoff by construction.
    """
    _check_point(n, temperature, boltzmann)
    if n > BRUTE_FORCE_SITE_CAP:
        raise ValueError(f"enumeration capped at n={BRUTE_FORCE_SITE_CAP}, got {n}")
    beta = 1.0 / (boltzmann * temperature)
    energies = state_energies(n, coupling, h, boundary)
    e_min = energies.min()
    weights = np.exp(-beta * (energies - e_min))
    z_shifted = weights.sum()
    log_z = math.log(z_shifted) - beta * e_min
    p = weights / z_shifted
    u = float(p @ energies)
    # -k sum p ln p, with ln p = -beta(E - e_min) - ln z_shifted
    s = boltzmann * float(p @ (beta * (energies - e_min))) + boltzmann * math.log(z_shifted)
    return GibbsSummary(
        partition_function=math.exp(log_z),
        free_energy=-boltzmann * temperature * log_z,
        internal_energy=u,
        entropy=s,
    )


def gibbs_probabilities(n: int, coupling: float, temperature: float, boltzmann: float = 1.0,
                        h: float = 0.0, boundary: Boundary = Boundary.OPEN) -> np.ndarray:
    """Gibbs distribution e^{-beta H}/Z over all 2^n configurations, index order."""
    _check_point(n, temperature, boltzmann)
    if n > BRUTE_FORCE_SITE_CAP:
        raise ValueError(f"enumeration capped at n={BRUTE_FORCE_SITE_CAP}, got {n}")
    beta = 1.0 / (boltzmann * temperature)
    energies = state_energies(n, coupling, h, boundary)
    weights = np.exp(-beta * (energies - energies.min()))
    return weights / weights.sum()


def partition_function_open(n: int, x: float) -> float:
    """Transfer-matrix closed form 2^N cosh^{N-1}(x) for the open chain, x = J/(kT)."""
    return math.exp(n * LN2 + (n - 1) * _log_cosh(x))


def partition_function_periodic(n: int, x: float) -> float:
    """Transfer-matrix closed form (2 cosh x)^N + (2 sinh x)^N for the ring, x = J/(kT).

    Oracle cross-check only; the closed-form F and S above are open-chain.
    """
    return (2.0 * math.cosh(x)) ** n + (2.0 * math.sinh(x)) ** n


@dataclass(frozen=True)
class ThermoReport:
    """Closed-form bundle for one (n, J, T, k) point.

    internal_energy is defined through F = U - T S, i.e.
    U = (N-1) J tanh(J/kT) under the entropy sign convention above.
    """

    n: int
    coupling: float
    temperature: float
    boltzmann: float
    free_energy: float
    internal_energy: float
    entropy: float
    landauer_floor: float
    gap: float


def thermo_report(n: int, coupling: float, temperature: float, boltzmann: float = 1.0) -> ThermoReport:
    """Evaluate the closed forms at one parameter point."""
    f = free_energy(n, coupling, temperature, boltzmann)
    s = entropy(n, coupling, temperature, boltzmann)
    x = coupling / (boltzmann * temperature)
    u = (n - 1) * coupling * math.tanh(x)
    return ThermoReport(
        n=n,
        coupling=coupling,
        temperature=temperature,
        boltzmann=boltzmann,
        free_energy=f,
        internal_energy=u,
        entropy=s,
        landauer_floor=landauer_floor(n, boltzmann),
        gap=landauer_gap(n, coupling, temperature, boltzmann),
    )
