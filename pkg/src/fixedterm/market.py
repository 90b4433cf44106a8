"""Market, asset and scenario specifications plus exact path generation."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .errors import InvalidArgumentError, InvalidSpecError

# sigma_f below this routes every solver to the deterministic-asset branch
DETERMINISTIC_SIGMA_F = 1e-8


def market_price_of_risk(mu: float, r: float, sigma: float) -> float:
    """Sharpe ratio ``(mu - r) / sigma`` of the liquid risky asset."""
    if not sigma > 0:
        raise InvalidSpecError(f"sigma must be positive, got {sigma!r}")
    return (mu - r) / sigma


@dataclass(frozen=True)
class MarketSpec:
    r: float = 0.03
    mu: float = 0.08
    sigma: float = 0.25

    def __post_init__(self):
        if not self.sigma > 0:
            raise InvalidSpecError(f"market.sigma must be positive, got {self.sigma!r}")
        if not self.r > 0:
            raise InvalidSpecError(f"market.r must be positive, got {self.r!r}")

    @property
    def gamma(self) -> float:
        return market_price_of_risk(self.mu, self.r, self.sigma)


@dataclass(frozen=True)
class IlliquidSpec:
    f0: float = 1.0
    mu_f: float = 0.10
    sigma_f: float = 0.25

    def __post_init__(self):
        if not self.f0 > 0:
            raise InvalidSpecError(f"illiquid.f0 must be positive, got {self.f0!r}")
        if not self.sigma_f >= 0:
            raise InvalidSpecError(f"illiquid.sigma_f must be non-negative, got {self.sigma_f!r}")

    @property
    def deterministic(self) -> bool:
        return self.sigma_f < DETERMINISTIC_SIGMA_F


@dataclass(frozen=True)
class Preferences:
    p1: float = -2.0
    p2: float = -1.0

    def __post_init__(self):
        for name in ("p1", "p2"):
            p = getattr(self, name)
            if not (p < 1 and p != 0):
                raise InvalidSpecError(f"prefs.{name} must satisfy p < 1 and p != 0, got {p!r}")


@dataclass(frozen=True)
class Constraints:
    c_floor: float = 3.0
    v_floor: float = 80.0

    def __post_init__(self):
        for name in ("c_floor", "v_floor"):
            v = getattr(self, name)
            if not v > 0:
                raise InvalidSpecError(f"constraints.{name} must be positive, got {v!r}")


@dataclass(frozen=True)
class NumericsConfig:
    """Solver and oracle knobs.

    ``split_derivative`` selects how marginal values enter the capital-split
    first-order condition: ``"envelope"`` uses the Lagrange multipliers,
    ``"fd"`` uses central finite differences of the value functions.
    """

    bisect_tol: float = 1e-12
    quad_nodes: int = 64
    psi_grid: int = 65
    fd_rel_step: float = 1e-4
    mc_paths: int = 100_000
    mc_steps: int = 64
    seed: int = 20240611
    split_derivative: str = "envelope"

    def __post_init__(self):
        for name in ("quad_nodes", "psi_grid", "mc_paths", "mc_steps"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
                raise InvalidSpecError(f"numerics.{name} must be an integer >= 1, got {v!r}")
        for name in ("bisect_tol", "fd_rel_step"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise InvalidSpecError(f"numerics.{name} must lie in (0, 1), got {v!r}")
        if self.split_derivative not in ("envelope", "fd"):
            raise InvalidSpecError(
                f"numerics.split_derivative must be 'envelope' or 'fd', got {self.split_derivative!r}")


# names accepted by Scenario.with_param, mapped to (section, field)
_PARAM_FIELDS = {
    "r": ("market", "r"),
    "mu": ("market", "mu"),
    "sigma": ("market", "sigma"),
    "f0": ("illiquid", "f0"),
    "mu_f": ("illiquid", "mu_f"),
    "sigma_f": ("illiquid", "sigma_f"),
    "p1": ("prefs", "p1"),
    "p2": ("prefs", "p2"),
    "c_floor": ("constraints", "c_floor"),
    "v_floor": ("constraints", "v_floor"),
}

SWEEP_PARAMETERS = ("T", "r", "mu", "sigma", "mu_f", "sigma_f", "p1", "p2",
                    "c_floor", "v_floor", "v0", "f0", "delta_mu", "delta_sigma")


@dataclass(frozen=True)
class Scenario:
    market: MarketSpec = field(default_factory=MarketSpec)
    illiquid: IlliquidSpec = field(default_factory=IlliquidSpec)
    prefs: Preferences = field(default_factory=Preferences)
    constraints: Constraints = field(default_factory=Constraints)
    horizon_T: float = 3.0
    v0: float = 100.0
    numerics: NumericsConfig = field(default_factory=NumericsConfig)

    def __post_init__(self):
        if not self.horizon_T > 0:
            raise InvalidSpecError(f"run.T must be positive, got {self.horizon_T!r}")
        if not self.v0 > 0:
            raise InvalidSpecError(f"run.v0 must be positive, got {self.v0!r}")
        if not self.market.gamma > 0:
            raise InvalidSpecError("market.mu must exceed market.r (positive market price of risk)")

    @property
    def gamma(self) -> float:
        return self.market.gamma

    @property
    def kappa(self) -> float:
        """Elasticity of F(T) with respect to the kernel, ``sigma_f / gamma``."""
        return 0.0 if self.illiquid.deterministic else self.illiquid.sigma_f / self.gamma

    def with_param(self, name: str, value: float) -> "Scenario":
        """Copy with one named parameter replaced.

        ``delta_mu`` sets ``mu_f = mu + value``; ``delta_sigma`` sets
        ``sigma_f = sigma - value``.
        """
        value = float(value)
        if name == "T":
            return replace(self, horizon_T=value)
        if name == "v0":
            return replace(self, v0=value)
        if name == "delta_mu":
            return self.with_param("mu_f", self.market.mu + value)
        if name == "delta_sigma":
            return self.with_param("sigma_f", self.market.sigma - value)
        try:
            section, attr = _PARAM_FIELDS[name]
        except KeyError:
            raise InvalidArgumentError(f"unknown parameter {name!r}") from None
        sub = replace(getattr(self, section), **{attr: value})
        return replace(self, **{section: sub})

    def scaled(self, factor: float) -> "Scenario":
        """Multiply every monetary input (v0, floors, F0) by ``factor``."""
        return replace(
            self,
            v0=self.v0 * factor,
            illiquid=replace(self.illiquid, f0=self.illiquid.f0 * factor),
            constraints=replace(self.constraints,
                                c_floor=self.constraints.c_floor * factor,
                                v_floor=self.constraints.v_floor * factor),
        )

    def with_numerics(self, **kwargs) -> "Scenario":
        return replace(self, numerics=replace(self.numerics, **kwargs))


def scenario_fields(obj) -> dict:
    return {f.name: getattr(obj, f.name) for f in fields(obj)}


@dataclass(frozen=True)
class MarketState:
    """Time, kernel value and asset price; fields may be broadcastable arrays."""

    t: float
    z: float
    f: float

    def __post_init__(self):
        if not np.all(np.asarray(self.z) > 0):
            raise InvalidArgumentError("state z must be positive")
        if not np.all(np.asarray(self.f) > 0):
            raise InvalidArgumentError("state f must be positive")
        if not np.all(np.asarray(self.t) >= 0):
            raise InvalidArgumentError("state t must be non-negative")


def pricing_kernel_value(t, w, market: MarketSpec):
    """Kernel ``exp(-(r + gamma^2/2) t - gamma w)``; broadcasts over arrays."""
    g = market.gamma
    return np.exp(-(market.r + 0.5 * g * g) * np.asarray(t) - g * np.asarray(w))


def asset_growth_exponent(illiquid: IlliquidSpec, market: MarketSpec) -> float:
    """Per-year log growth of F at fixed kernel value (exponent of h)."""
    g = market.gamma
    sf = illiquid.sigma_f
    if sf == 0:
        return illiquid.mu_f
    return illiquid.mu_f - 0.5 * sf * sf - sf * market.r / g - 0.5 * sf * g


def asset_on_manifold(t, z, scenario: Scenario):
    """F(t) implied by the kernel value z(t) along any path started at F0."""
    ill = scenario.illiquid
    lh = asset_growth_exponent(ill, scenario.market) * np.asarray(t)
    if ill.sigma_f == 0:
        return ill.f0 * np.exp(lh) * np.ones_like(np.asarray(z, dtype=float))
    return ill.f0 * np.exp(lh - (ill.sigma_f / scenario.gamma) * np.log(z))


class Attractiveness(enum.Enum):
    STRICTLY_ATTRACTIVE = "StrictlyAttractive"
    INDIFFERENT = "Indifferent"
    REDUNDANT = "Redundant"


def classify_nonredundancy(market: MarketSpec, illiquid: IlliquidSpec,
                           rel_tol: float = 1e-12) -> Attractiveness:
    """Compare the Sharpe ratio of F with the liquid market price of risk."""
    if illiquid.sigma_f == 0:
        lhs, rhs = illiquid.mu_f, market.r
    else:
        lhs, rhs = (illiquid.mu_f - market.r) / illiquid.sigma_f, market.gamma
    if abs(lhs - rhs) <= rel_tol * max(abs(lhs), abs(rhs), 1.0):
        return Attractiveness.INDIFFERENT
    return Attractiveness.STRICTLY_ATTRACTIVE if lhs > rhs else Attractiveness.REDUNDANT


@dataclass
class PathSet:
    """Sampled paths on a uniform grid; arrays have shape ``(n_paths, n_steps + 1)``."""

    t: np.ndarray
    w: np.ndarray
    z: np.ndarray
    f: np.ndarray
    seed: int


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator so streams are reproducible per seed."""
    return np.random.Generator(np.random.Philox(int(seed)))


def simulate_paths(scenario: Scenario, n_paths: int, n_steps: int, seed: int) -> PathSet:
    """Exact Brownian samples on a uniform grid with closed-form Z and F."""
    if n_paths < 1 or n_steps < 1:
        raise InvalidArgumentError("n_paths and n_steps must be at least 1")
    T = scenario.horizon_T
    t = np.linspace(0.0, T, n_steps + 1)
    rng = make_rng(seed)
    dw = rng.standard_normal((n_paths, n_steps)) * np.sqrt(np.diff(t))
    w = np.zeros((n_paths, n_steps + 1))
    np.cumsum(dw, axis=1, out=w[:, 1:])
    z = pricing_kernel_value(t, w, scenario.market)
    ill = scenario.illiquid
    f = ill.f0 * np.exp((ill.mu_f - 0.5 * ill.sigma_f ** 2) * t + ill.sigma_f * w)
    return PathSet(t=t, w=w, z=z, f=f, seed=int(seed))
