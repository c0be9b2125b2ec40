from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .exceptions import InvalidParameterError
from .services.controllability import DEFAULT_EPS_PATH, ControlTemplate
from .services.forward import ControlField, MemoryState
from .services.fracops import FractionalOrder, GammaChoice, TimeGrid
from .services.spectral import (
    Field as SpatialField,
    SpectralBasis,
    Subdomain,
    builtin_dirichlet_laplacian,
    builtin_spectral_fractional,
)

Preset = Literal["zero", "phi1", "phi2", "random"]
TARGET_PRESETS = ("mem_phi1", "rate_phi2", "mem_phi2", "rate_phi1", "planted")


class ConfigBlock(BaseModel):
    model_config = ConfigDict(extra="forbid")


class OrderBlock(ConfigBlock):
    mu: float = Field(..., gt=1.0, le=2.0, description="Derivative order mu in (1, 2]")
    nu: float = Field(..., ge=0.0, le=1.0, description="Hilfer type nu in [0, 1]")


class BasisBlock(ConfigBlock):
    type: Literal["dirichlet", "fractional"] = Field(
        default="dirichlet", description="Dirichlet Laplacian or its spectral power"
    )
    length: float = Field(default=1.0, gt=0.0, description="Domain length L")
    modes: int = Field(default=8, ge=1, le=512, description="Truncation N")
    s: float = Field(default=1.0, gt=0.0, le=1.0, description="Spectral power for 'fractional'")
    space_points: int = Field(default=512, ge=2, description="Trapezoid intervals on [0, L]")


class GridBlock(ConfigBlock):
    horizon: float = Field(default=1.0, gt=0.0, description="Final time T")
    steps: int = Field(default=64, ge=2, description="Time steps M")
    grading: float = Field(default=1.0, ge=1.0, description="Grading exponent r")
    refinement: List[int] = Field(
        default_factory=list, description="Ladder of step counts for refinement studies"
    )

    @field_validator("refinement")
    @classmethod
    def check_refinement(cls, value: List[int]) -> List[int]:
        if any(steps < 2 for steps in value):
            raise ValueError("every refinement level needs at least 2 steps")
        if value != sorted(value):
            raise ValueError("refinement levels must increase")
        return value


class DataBlock(ConfigBlock):
    u0: Union[Preset, List[float]] = Field(default="zero", description="Initial memory")
    u1: Union[Preset, List[float]] = Field(default="zero", description="Initial memory rate")
    v0: Union[Preset, List[float]] = Field(default="zero", description="Adjoint final memory")
    v1: Union[Preset, List[float]] = Field(default="zero", description="Adjoint final rate")


class ControlBlock(ConfigBlock):
    omega: List[Tuple[float, float]] = Field(
        default_factory=lambda: [(0.0, 0.2)], description="Control region as intervals"
    )
    cells: int = Field(default=16, ge=1, description="Piecewise-constant time cells J")
    space_functions: int = Field(default=8, ge=1, description="Spatial functions M_ctrl")
    coefficients: Optional[List[List[float]]] = Field(
        default=None, description="J rows of M_ctrl coefficients"
    )
    random: bool = Field(default=False, description="Draw seeded random coefficients")
    seed: int = Field(default=0, description="Seed for every random draw")


class RunBlock(ConfigBlock):
    tol: float = Field(default=1e-12, gt=0.0, description="Mittag-Leffler tolerance")
    eps_path: List[float] = Field(
        default_factory=lambda: list(DEFAULT_EPS_PATH), description="Tikhonov parameters"
    )
    cg_tol: float = Field(default=1e-10, gt=0.0, description="Relative CG tolerance")
    threads: int = Field(default=1, ge=1, description="Worker threads for map assembly")
    gamma: Literal["1/mu", "1/2"] = Field(default="1/mu", description="Target space V_gamma")
    targets: List[str] = Field(
        default_factory=lambda: ["mem_phi1", "rate_phi2"], description="Control targets"
    )
    gauss_points: int = Field(default=8, ge=1, description="Gauss points per time cell")
    omega_points: int = Field(default=16, ge=1, description="Gauss points per omega panel")
    out: Optional[str] = Field(default=None, description="Output CSV path")

    @field_validator("eps_path")
    @classmethod
    def check_eps_path(cls, value: List[float]) -> List[float]:
        if not value or any(eps <= 0 for eps in value):
            raise ValueError("eps values must be positive")
        return value

    @field_validator("targets")
    @classmethod
    def check_targets(cls, value: List[str]) -> List[str]:
        unknown = [name for name in value if name not in TARGET_PRESETS]
        if unknown:
            raise ValueError(f"unknown targets {unknown}; choose from {list(TARGET_PRESETS)}")
        return value


class ExperimentConfig(ConfigBlock):
    order: OrderBlock
    basis: BasisBlock = Field(default_factory=BasisBlock)
    grid: GridBlock = Field(default_factory=GridBlock)
    data: DataBlock = Field(default_factory=DataBlock)
    control: ControlBlock = Field(default_factory=ControlBlock)
    run: RunBlock = Field(default_factory=RunBlock)

    @model_validator(mode="after")
    def check_consistency(self) -> "ExperimentConfig":
        modes = self.basis.modes
        for name in ("u0", "u1", "v0", "v1"):
            value = getattr(self.data, name)
            if isinstance(value, list) and len(value) != modes:
                raise ValueError(f"data.{name}: expected {modes} coefficients, got {len(value)}")
            if value == "phi2" and modes < 2:
                raise ValueError(f"data.{name}: 'phi2' needs at least 2 modes")
        if self.control.space_functions > modes:
            raise ValueError("control.space_functions: must not exceed basis.modes")
        for lo, hi in self.control.omega:
            if not 0.0 <= lo < hi <= self.basis.length:
                raise ValueError(f"control.omega: ({lo}, {hi}) is not inside (0, L)")
        rows = self.control.coefficients
        if rows is not None:
            if len(rows) != self.control.cells:
                raise ValueError(f"control.coefficients: expected {self.control.cells} rows")
            if any(len(row) != self.control.space_functions for row in rows):
                raise ValueError(
                    f"control.coefficients: rows need {self.control.space_functions} entries"
                )
        return self

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.model_validate_json(Path(path).read_text())

    def build_order(self) -> FractionalOrder:
        return FractionalOrder(self.order.mu, self.order.nu)

    def build_basis(self) -> SpectralBasis:
        basis = builtin_dirichlet_laplacian(self.basis.length, self.basis.modes)
        if self.basis.type == "fractional":
            basis = builtin_spectral_fractional(basis, self.basis.s)
        return basis

    def build_grid(self, steps: Optional[int] = None) -> TimeGrid:
        return TimeGrid.graded(
            self.grid.horizon, self.grid.steps if steps is None else steps, self.grid.grading
        )

    @property
    def gamma_choice(self) -> GammaChoice:
        return GammaChoice(self.run.gamma)

    def rng(self, stream: int = 0) -> np.random.Generator:
        return np.random.default_rng([self.control.seed, stream])

    def build_field(self, name: str, basis: SpectralBasis) -> SpatialField:
        value = getattr(self.data, name)
        if isinstance(value, list):
            return SpatialField(basis, value)
        if value == "zero":
            return SpatialField.zero(basis)
        if value == "random":
            stream = ("u0", "u1", "v0", "v1").index(name) + 1
            return SpatialField.random(basis, self.rng(stream))
        return SpatialField.mode(basis, 1 if value == "phi1" else 2)

    def build_omega(self) -> Subdomain:
        return Subdomain(tuple(tuple(interval) for interval in self.control.omega))

    def build_control(self) -> Optional[ControlField]:
        shape = (self.control.cells, self.control.space_functions)
        if self.control.coefficients is not None:
            coefficients = np.array(self.control.coefficients, dtype=float)
        elif self.control.random:
            coefficients = self.rng(5).standard_normal(shape)
        else:
            return None
        return ControlField.uniform(self.build_omega(), self.grid.horizon, coefficients)

    def build_template(self, basis: Optional[SpectralBasis] = None) -> ControlTemplate:
        return ControlTemplate(
            order=self.build_order(),
            basis=self.build_basis() if basis is None else basis,
            horizon=self.grid.horizon,
            omega=self.build_omega(),
            cells=self.control.cells,
            space_functions=self.control.space_functions,
            gamma_choice=self.gamma_choice,
            time_steps=self.grid.steps,
            gauss_points=self.run.gauss_points,
            omega_points=self.run.omega_points,
            threads=self.run.threads,
        )

    def build_targets(self, basis: SpectralBasis, planted=None) -> Dict[str, MemoryState]:
        """Named targets; 'planted' needs the memory state of a known control."""
        zero = SpatialField.zero(basis)
        targets = {}
        for name in self.run.targets:
            if name == "planted":
                if planted is None:
                    raise InvalidParameterError("run.targets", "'planted' needs a control map")
                targets[name] = planted
                continue
            block, mode = name.split("_phi")
            shape = SpatialField.mode(basis, int(mode))
            targets[name] = MemoryState(shape, zero) if block == "mem" else MemoryState(zero, shape)
        return targets
