"""
Reactor Design v1.0
===================
Diseño de reactores multimaterial por optimización de campo de fase.
Resuelve el sistema acoplado de reacción-difusión de dos especies con
elementos finitos P1 y evoluciona la distribución de material chi.

Uso básico:
    from reactor_design import ReactorDesigner, RunConfig, MeshConfig
    from reactor_design import PARAMS_CUADRADO, PHASE_FIELD_CUADRADO

    config = RunConfig(
        scenario='square',
        mesh=MeshConfig(nx=64, ny=64),
        model=PARAMS_CUADRADO,
        phase_field=PHASE_FIELD_CUADRADO,
        output_dir='resultados/cuadrado',
    )

    designer = ReactorDesigner(config)
    resultado = designer.optimizar()
    designer.exportar_resultado(resultado)

Desde la línea de comandos:
    reactor-design config.json --mode optimize
"""

__version__ = '1.0.0'

from .analyzer import ReactorDesigner
from .config import (
    MAPAS_RELAJADOS,
    PARAMS_ANULAR,
    PARAMS_CUADRADO,
    PHASE_FIELD_BARRIDO,
    PHASE_FIELD_CUADRADO,
    MeshConfig,
    ModelParams,
    PhaseFieldParams,
    RunConfig,
    SweepConfig,
    params_barrido,
)
from .core.mesh import Mesh, build_annulus, build_periodic_cell, build_rectangle
from .core.optimizer import design_step, project_volume, run
from .core.state import energy_report, relax_state, solve_state
from .exceptions import DegenerateReactionError, DivergenceError, NonConvergenceError
from .types import BoundaryTag, DesignResult, EnergyReport, Region, StateField

__all__ = [
    'ReactorDesigner',
    'RunConfig',
    'MeshConfig',
    'ModelParams',
    'PhaseFieldParams',
    'SweepConfig',
    'PARAMS_CUADRADO',
    'PARAMS_ANULAR',
    'PHASE_FIELD_CUADRADO',
    'PHASE_FIELD_BARRIDO',
    'MAPAS_RELAJADOS',
    'params_barrido',
    'Mesh',
    'build_rectangle',
    'build_annulus',
    'build_periodic_cell',
    'solve_state',
    'relax_state',
    'energy_report',
    'design_step',
    'project_volume',
    'run',
    'BoundaryTag',
    'Region',
    'StateField',
    'EnergyReport',
    'DesignResult',
    'NonConvergenceError',
    'DivergenceError',
    'DegenerateReactionError',
]
