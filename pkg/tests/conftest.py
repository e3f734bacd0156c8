"""
Fixtures compartidas: mallas pequeñas, parámetros y configuraciones de corrida.
"""
import json

import numpy as np
import pytest

from reactor_design.config import (
    PARAMS_CUADRADO,
    PHASE_FIELD_CUADRADO,
    MeshConfig,
    ModelParams,
    RunConfig,
)
from reactor_design.core.mesh import build_annulus, build_periodic_cell, build_rectangle


@pytest.fixture
def cuadrado():
    return build_rectangle(8, 8)


@pytest.fixture
def cuadrado_16():
    return build_rectangle(16, 16)


@pytest.fixture
def anillo():
    return build_annulus(4, 16, 0.2, 1.0)


@pytest.fixture
def celda():
    return build_periodic_cell(32, 0.15, 0.15)


@pytest.fixture
def params():
    return PARAMS_CUADRADO


@pytest.fixture
def params_suaves():
    """Reacción moderada para marchas explícitas estables."""
    return ModelParams(k11=1.0, k12=0.1, k21=0.1, k22=1.0, k_s=1.0)


@pytest.fixture
def pf():
    return PHASE_FIELD_CUADRADO


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def config_pequena(tmp_path):
    """Corrida de optimización corta en el cuadrado 8 x 8."""
    return RunConfig(
        scenario='square',
        mode='optimize',
        mesh=MeshConfig(nx=8, ny=8),
        model=PARAMS_CUADRADO,
        phase_field=PHASE_FIELD_CUADRADO.replace(max_steps=10),
        output_dir=str(tmp_path / 'salida'),
    )


@pytest.fixture
def escribir_config(tmp_path):
    """Escribe un diccionario como JSON y devuelve la ruta."""
    def _escribir(datos, nombre='config.json'):
        ruta = tmp_path / nombre
        ruta.write_text(json.dumps(datos), encoding='utf-8')
        return str(ruta)
    return _escribir
