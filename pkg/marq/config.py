"""Configuration handling for marq"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from marq.exceptions import InvalidArgumentError


@dataclass
class SolverConfig:
    """Algorithmic constants for AR q / MAR q with validation.

    Defaults reproduce the PDE benchmark settings; constants the benchmark
    leaves open (lambda_min, theta) use values that satisfy the theory.
    """

    # Acceptance thresholds
    eta1: float = 0.1
    eta2: float = 0.75

    # Regularization updates: shrink on very successful, mild shrink on
    # successful, grow on unsuccessful
    gamma1: float = 0.85
    gamma2: float = 0.5
    gamma3: float = 2.0
    lambda_min: float = 1e-8
    lambda0: float = 0.05

    # Inner stopping rule ||grad m + lambda ||s||^{q-1} s|| <= theta ||s||^q
    theta: float = 0.5

    # Multilevel
    kappa_H: float = 0.1
    eps: float = 1e-7
    eps_per_level: list[float] | None = None  # None = eps on every level
    recursion_policy: str = "free"  # free, fixed
    max_successful: int = 1  # successful coarse iterations for fixed-form recursion
    descend_policy: str = "always"  # always, alternate
    max_coarse_iters: int = 50

    # Termination
    max_outer_iters: int = 1000
    max_wall_time: float = 600.0  # seconds; the run is a FAIL beyond this

    # Subproblem solver
    secular_tol: float = 1e-8
    max_secular_iters: int = 100
    pred_floor_rel: float = 1e-16

    # Diagnostics
    audit: bool = False  # assert coherence at every recursion entry
    record_iterates: bool = False

    def __post_init__(self):
        """Validate configuration after initialization."""
        self._validate_thresholds()
        self._validate_gammas()
        self._validate_lambdas()
        self._validate_tolerances()
        self._validate_kappa()
        self._validate_policies()
        self._validate_counts()

    def _validate_thresholds(self):
        """Validate 0 < eta1 <= eta2 < 1."""
        if not 0.0 < self.eta1 <= self.eta2 < 1.0:
            raise InvalidArgumentError(
                f"need 0 < eta1 <= eta2 < 1, got eta1={self.eta1}, eta2={self.eta2}"
            )

    def _validate_gammas(self):
        """Validate 0 < gamma2 <= gamma1 < 1 < gamma3."""
        if not 0.0 < self.gamma2 <= self.gamma1 < 1.0 < self.gamma3:
            raise InvalidArgumentError(
                "need 0 < gamma2 <= gamma1 < 1 < gamma3, got "
                f"gamma1={self.gamma1}, gamma2={self.gamma2}, gamma3={self.gamma3}"
            )

    def _validate_lambdas(self):
        """Validate lambda0 > lambda_min > 0."""
        if self.lambda_min <= 0.0:
            raise InvalidArgumentError(f"lambda_min must be positive, got {self.lambda_min}")
        if self.lambda0 <= self.lambda_min:
            raise InvalidArgumentError(
                f"lambda0 must exceed lambda_min, got {self.lambda0} <= {self.lambda_min}"
            )

    def _validate_tolerances(self):
        """Validate positivity of tolerances."""
        if self.theta <= 0.0:
            raise InvalidArgumentError(f"theta must be positive, got {self.theta}")
        if self.eps <= 0.0:
            raise InvalidArgumentError(f"eps must be positive, got {self.eps}")
        if self.eps_per_level is not None:
            if not isinstance(self.eps_per_level, list) or not self.eps_per_level:
                raise InvalidArgumentError("eps_per_level must be a non-empty list")
            if any(e <= 0.0 for e in self.eps_per_level):
                raise InvalidArgumentError(f"eps_per_level must be positive, got {self.eps_per_level}")
        if self.secular_tol <= 0.0:
            raise InvalidArgumentError(f"secular_tol must be positive, got {self.secular_tol}")
        if self.pred_floor_rel < 0.0:
            raise InvalidArgumentError(f"pred_floor_rel must be >= 0, got {self.pred_floor_rel}")
        if self.max_wall_time <= 0.0:
            raise InvalidArgumentError(f"max_wall_time must be positive, got {self.max_wall_time}")

    def _validate_kappa(self):
        """Validate kappa_H in (0, 1)."""
        if not 0.0 < self.kappa_H < 1.0:
            raise InvalidArgumentError(f"kappa_H must lie in (0, 1), got {self.kappa_H}")

    def _validate_policies(self):
        """Validate policy names are allowed values."""
        allowed_recursion = ["free", "fixed"]
        if self.recursion_policy not in allowed_recursion:
            raise InvalidArgumentError(
                f"recursion_policy must be one of {allowed_recursion}, got '{self.recursion_policy}'"
            )
        allowed_descend = ["always", "alternate"]
        if self.descend_policy not in allowed_descend:
            raise InvalidArgumentError(
                f"descend_policy must be one of {allowed_descend}, got '{self.descend_policy}'"
            )

    def _validate_counts(self):
        """Validate iteration caps are positive."""
        for name in ("max_outer_iters", "max_coarse_iters", "max_successful", "max_secular_iters"):
            value = getattr(self, name)
            if value <= 0:
                raise InvalidArgumentError(f"{name} must be positive, got {value}")

    def eps_for(self, level: int) -> float:
        """Return the gradient tolerance for a 1-based level index."""
        if self.eps_per_level is None:
            return self.eps
        if level > len(self.eps_per_level):
            return self.eps_per_level[-1]
        return self.eps_per_level[level - 1]

    def pred_floor(self, f_value: float) -> float:
        """Smallest predicted reduction the ratio test will divide by."""
        return self.pred_floor_rel * (1.0 + abs(f_value))

    def replace(self, **overrides: Any) -> SolverConfig:
        """Return a validated copy with some fields replaced."""
        return dataclasses.replace(self, **overrides)

    def to_dict(self) -> dict[str, Any]:
        """Convert config to a JSON-serializable dictionary."""
        return {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}

    def get(self, key: str, default=None):
        """Get config value by key."""
        return getattr(self, key, default)

    @classmethod
    def known_fields(cls) -> set[str]:
        return {f.name for f in dataclasses.fields(cls)}

    @classmethod
    def from_dict(cls, config_dict: dict) -> SolverConfig:
        """Create SolverConfig from dictionary, ignoring unknown keys."""
        known = cls.known_fields()
        filtered = {k: v for k, v in config_dict.items() if k in known}
        return cls(**filtered)


def load_config(path: str | Path) -> SolverConfig:
    """Load a SolverConfig from a JSON file.

    Raises:
        InvalidArgumentError: if the file is not a JSON object or a value is invalid
    """
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise InvalidArgumentError(f"Could not read config file {path}: {e}") from e
    if not isinstance(payload, dict):
        raise InvalidArgumentError(f"Config file {path} must contain a JSON object")
    return SolverConfig.from_dict(payload)
