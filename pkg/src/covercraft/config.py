"""Run configuration: one human-editable document driving every subcommand."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, fields
from fractions import Fraction

from . import ntcore
from .cover import TargetConfig
from .errors import ConfigError

THREADS_ENV_VAR = "COVERCRAFT_THREADS"


def offsets_stride_of_first_prime(k_max: int) -> tuple[int, ...]:
    """Default offset set: multiples i * p for i = 1..K of the first prime p > K."""
    p = ntcore.next_prime_above(k_max)
    return tuple(i * p for i in range(1, k_max + 1))


def offsets_factorial_shift(k_max: int) -> tuple[int, ...]:
    """Named preset: {m! + 1 : K <= m <= 2K - 1}."""
    return tuple(math.factorial(m) + 1 for m in range(k_max, 2 * k_max))


OFFSET_PRESETS = {
    "remark1": offsets_stride_of_first_prime,
    "factorial": offsets_factorial_shift,
}


@dataclass
class RunConfig:
    """Everything a pipeline run needs; serializes to JSON with full fidelity."""

    k_max: int = 2
    m_bound: int = 2
    offsets: list[int] | None = None
    offsets_preset: str = "remark1"
    p_max: int = 1000
    budget_bits: int = 96
    band: list[str] | None = None  # ["1/32", "1/24"]-style fractions; None = M/4K^3..M/3K^3
    min_per_class: int = 1
    n_target: int | None = None
    upper: int | None = None
    i_max: int | None = None
    seed: int = 20240809
    threads: int | None = None
    grid: list[int] = field(default_factory=lambda: [2, 10, 100, 1000])
    pair_m_values: list[int] = field(default_factory=lambda: [2, 3, 4])
    hit_a: int = 2
    hit_j: int = 1
    hit_l: int = 1
    hit_cutoff: int = 100_000
    figures: bool = True

    _INT_FIELDS = ("k_max", "m_bound", "p_max", "budget_bits", "min_per_class",
                   "seed", "hit_a", "hit_j", "hit_l", "hit_cutoff")
    _OPT_INT_FIELDS = ("n_target", "upper", "i_max", "threads")
    _INT_LIST_FIELDS = ("grid", "pair_m_values")

    def _type_problems(self) -> list[str]:
        def is_int(v):
            return isinstance(v, int) and not isinstance(v, bool)

        problems = []
        for name in self._INT_FIELDS:
            if not is_int(getattr(self, name)):
                problems.append(f"{name} must be an integer (got {getattr(self, name)!r})")
        for name in self._OPT_INT_FIELDS:
            v = getattr(self, name)
            if v is not None and not is_int(v):
                problems.append(f"{name} must be an integer or null (got {v!r})")
        for name in self._INT_LIST_FIELDS:
            v = getattr(self, name)
            if not isinstance(v, list) or not all(is_int(x) for x in v):
                problems.append(f"{name} must be a list of integers (got {v!r})")
        if self.offsets is not None and (
            not isinstance(self.offsets, list) or not all(is_int(x) for x in self.offsets)
        ):
            problems.append(f"offsets must be a list of integers (got {self.offsets!r})")
        if not isinstance(self.offsets_preset, str):
            problems.append("offsets_preset must be a string")
        if not isinstance(self.figures, bool):
            problems.append("figures must be a boolean")
        return problems

    def validate(self) -> None:
        problems = self._type_problems()
        if problems:
            raise ConfigError("; ".join(problems))
        if self.k_max < 2:
            problems.append(f"K must be >= 2 (got {self.k_max})")
        if self.m_bound < 1:
            problems.append(f"M must be >= 1 (got {self.m_bound})")
        if self.p_max < 2:
            problems.append(f"p_max must be >= 2 (got {self.p_max})")
        if self.budget_bits < 16:
            problems.append(f"budget_bits must be >= 16 (got {self.budget_bits})")
        if self.offsets is None and self.offsets_preset not in OFFSET_PRESETS:
            problems.append(
                f"unknown offsets preset {self.offsets_preset!r}; options: "
                f"{sorted(OFFSET_PRESETS)}"
            )
        if self.offsets is not None and len(set(self.offsets)) != self.k_max:
            problems.append(
                f"explicit offset set must have K={self.k_max} distinct values "
                f"(got {self.offsets})"
            )
        if self.band is not None:
            try:
                lo, hi = (Fraction(s) for s in self.band)
                if not 0 <= lo <= hi:
                    problems.append(f"band must satisfy 0 <= low <= high (got {self.band})")
            except (ValueError, ZeroDivisionError, TypeError):
                problems.append(f"band entries must be fractions like '1/24' (got {self.band})")
        if self.n_target is not None and self.n_target < 2:
            problems.append(f"N must be >= 2 (got {self.n_target})")
        if self.upper is not None and (self.n_target is None or self.upper <= self.n_target):
            problems.append("upper requires N and must exceed it")
        if self.min_per_class < 1:
            problems.append(f"min_per_class must be >= 1 (got {self.min_per_class})")
        if self.hit_cutoff < 2:
            problems.append(f"hit_cutoff must be >= 2 (got {self.hit_cutoff})")
        if any(x < 2 for x in self.grid):
            problems.append(f"grid points must be >= 2 (got {self.grid})")
        if any(m < 2 for m in self.pair_m_values):
            problems.append(f"pair m values must be >= 2 (got {self.pair_m_values})")
        if problems:
            raise ConfigError("; ".join(problems))

    def resolved_offsets(self) -> tuple[int, ...]:
        if self.offsets is not None:
            return tuple(sorted(self.offsets))
        return tuple(sorted(OFFSET_PRESETS[self.offsets_preset](self.k_max)))

    def resolved_band(self) -> tuple[Fraction, Fraction] | None:
        if self.band is None:
            return None
        lo, hi = (Fraction(s) for s in self.band)
        return lo, hi

    def resolved_threads(self) -> int:
        if self.threads is not None:
            return max(1, self.threads)
        env = os.environ.get(THREADS_ENV_VAR, "")
        return max(1, int(env)) if env.isdigit() else 1

    def target(self) -> TargetConfig:
        return TargetConfig(
            k_max=self.k_max,
            offsets=self.resolved_offsets(),
            m_bound=self.m_bound,
            p_max=self.p_max,
            budget_bits=self.budget_bits,
            band=self.resolved_band(),
            min_per_class=self.min_per_class,
        )

    def to_doc(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_doc(cls, doc: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)
