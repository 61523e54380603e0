"""Grid, field, operators and initial data shared by every run of an experiment."""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from src.config.settings import ExperimentConfig
from src.fem.boundary import interpolate, product_sine
from src.fem.grid import build_grids
from src.fields.io import load_field
from src.fields.stats import check_field_bounds
from src.fields.synthetic import PRESETS, synth_channel_field
from src.models.fields import KernelSpec, PermeabilityField
from src.models.grid import BoundaryCondition, GridHierarchy
from src.models.spaces import SchemeConstants, SpaceDecomposition
from src.models.state import SchemeConfig
from src.multiscale.builder import build_space_decomposition
from src.multiscale.constants import scheme_constants
from src.solvers.operators import AnsatzSpace, FineOperators, build_operators, fine_space, multiscale_space


@dataclass
class Problem:
    """One grid hierarchy and one field instance for the reference and all multiscale runs."""

    settings: ExperimentConfig
    grid: GridHierarchy
    kappa: PermeabilityField = field(repr=False)
    kernel: KernelSpec = field(repr=False)
    bc: BoundaryCondition
    operators: FineOperators = field(repr=False)
    u0: Optional[np.ndarray] = field(default=None, repr=False)
    source: Optional[np.ndarray] = field(default=None, repr=False)
    u0_function: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = field(default=None, repr=False)

    @property
    def initial_value(self):
        """u0 as handed to the runs: the function when there is one, otherwise the nodal values."""
        return self.u0_function if self.u0_function is not None else self.u0

    def scheme_config(self, scheme: str, space: str, allow_unstable_dt: Optional[bool] = None) -> SchemeConfig:
        s = self.settings
        return SchemeConfig(
            scheme=scheme,
            dt=s.dt,
            n_steps=s.n_steps,
            kernel=self.kernel,
            velocity=s.velocity,
            velocity_tilde=s.velocity_tilde,
            source=self.source,
            bc=self.bc,
            space=space,
            allow_unstable_dt=s.allow_unstable_dt if allow_unstable_dt is None else allow_unstable_dt,
            snapshot_stride=s.snapshot_stride,
            augment_inflow=s.augment_inflow and scheme == "implicit" and space != "fine",
        )

    def space(self, name: str, decomposition: Optional[SpaceDecomposition], augment: bool = False) -> AnsatzSpace:
        if name == "fine":
            return fine_space(self.grid, self.bc, self.settings.velocity_tilde)
        if decomposition is None:
            raise ValueError(f"space {name!r} needs a space decomposition")
        return multiscale_space(decomposition, name, self.grid, augment, self.settings.velocity_tilde)


def build_problem(settings: ExperimentConfig) -> Problem:
    """Grid, permeability (file or synthetic preset), kernel and fine operators."""
    grid = build_grids(settings.coarse_n, settings.refine)
    if settings.field_file is not None:
        kappa = load_field(settings.field_file)
    else:
        spec = PRESETS[settings.field_preset](grid.fine_n, settings.contrast)
        kappa = synth_channel_field(grid, spec, settings.seed)
    check_field_bounds(kappa, grid)
    kernel = KernelSpec.single(kappa, settings.beta)
    sine = interpolate(grid, product_sine)
    return Problem(
        settings=settings,
        grid=grid,
        kappa=kappa,
        kernel=kernel,
        bc=BoundaryCondition.from_names(settings.bc_u, settings.bc_v),
        operators=build_operators(grid, kernel, settings.velocity, settings.velocity_tilde),
        u0=sine if settings.u0 == "product_sine" else None,
        u0_function=product_sine if settings.u0 == "product_sine" else None,
        source=sine if settings.source == "product_sine" else None,
    )


def build_decomposition(problem: Problem) -> SpaceDecomposition:
    s = problem.settings
    return build_space_decomposition(
        problem.grid,
        problem.kappa,
        n_aux=s.n_aux,
        n_explicit=s.n_explicit,
        oversampling=s.oversampling,
        weight_choice=s.weight_choice,
        workers=s.workers,
        stiffness=problem.operators.stiffness[0],
        mass=problem.operators.mass,
        boundary=problem.bc.u,
        velocity_tilde=s.velocity_tilde,
    )


def decomposition_constants(problem: Problem, decomposition: SpaceDecomposition) -> Optional[SchemeConstants]:
    """gamma and the step bound; None when V_H^2 is empty."""
    if decomposition.dim_v2 == 0:
        return None
    return scheme_constants(
        decomposition, problem.operators.stiffness[0], problem.operators.mass, problem.settings.beta
    )
