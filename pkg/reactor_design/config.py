"""
Módulo de configuración para Reactor Design.
Define parámetros del modelo, del campo de fase, de la malla y de la corrida,
con validación al construir y conversión desde/hacia diccionarios JSON.
"""
import json
import logging
import math
from dataclasses import dataclass, field, fields, asdict
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

logger = logging.getLogger(__name__)

ESCENARIOS = ('square', 'annulus', 'periodic')
MODOS = ('solve', 'optimize', 'relaxed-map', 'validate1d', 'sweep')
MODOS_ESTADO = ('segregated', 'coupled')


def _rechazar_claves_desconocidas(cls, datos: Dict[str, Any], alias: Dict[str, str] = None) -> Dict[str, Any]:
    """Traduce alias y rechaza claves que no son campos del dataclass."""
    alias = alias or {}
    validas = {f.name for f in fields(cls)}
    salida = {}
    for clave, valor in datos.items():
        nombre = alias.get(clave, clave)
        if nombre not in validas:
            raise ValueError(
                f"Clave '{clave}' desconocida en {cls.__name__}. Use: {sorted(validas)}"
            )
        salida[nombre] = valor
    return salida


@dataclass(frozen=True)
class ModelParams:
    """
    Parámetros del problema de transporte.

    Attributes:
        k11, k12: difusividad de la especie 1 en el material 1 y 2
        k21, k22: difusividad de la especie 2 en el material 1 y 2
        k_s: tasa de reacción
        u1_star: concentración impuesta de la especie 1 en la fuente
        u2_star: concentración impuesta de la especie 2 en el sumidero
        lam: multiplicador de volumen; en solve se reporta tal cual y en
            optimize se reemplaza por la estimación de la proyección
    """

    k11: float = 1.0
    k12: float = 1e-6
    k21: float = 1e-6
    k22: float = 1.0
    k_s: float = 100.0
    u1_star: float = 1.0
    u2_star: float = 0.0
    lam: float = 0.0

    def __post_init__(self):
        """Validación post-inicialización."""
        for nombre in ('k11', 'k12', 'k21', 'k22', 'k_s'):
            valor = getattr(self, nombre)
            if not valor > 0:
                raise ValueError(f"'{nombre}' debe ser positivo (recibido {valor})")

    @property
    def delta_k1(self) -> float:
        """k11 - k12: derivada de k1 respecto de chi."""
        return self.k11 - self.k12

    @property
    def delta_k2(self) -> float:
        """k21 - k22: derivada de k2 respecto de chi."""
        return self.k21 - self.k22

    def k1(self, chi):
        return self.k11 * chi + self.k12 * (1.0 - chi)

    def k2(self, chi):
        return self.k21 * chi + self.k22 * (1.0 - chi)

    def espejo(self) -> 'ModelParams':
        """Intercambia los roles de los materiales (k11<->k22, k12<->k21)."""
        return ModelParams(
            k11=self.k22, k12=self.k21, k21=self.k12, k22=self.k11,
            k_s=self.k_s, u1_star=self.u1_star, u2_star=self.u2_star, lam=self.lam,
        )

    def replace(self, **cambios) -> 'ModelParams':
        datos = asdict(self)
        datos.update(cambios)
        return ModelParams(**datos)

    @classmethod
    def from_dict(cls, config_dict: Dict[str, Any]) -> 'ModelParams':
        """Crea parámetros desde diccionario (la clave 'lambda' mapea a lam)."""
        return cls(**_rechazar_claves_desconocidas(cls, config_dict, {'lambda': 'lam'}))

    def to_dict(self) -> Dict[str, Any]:
        datos = asdict(self)
        datos['lambda'] = datos.pop('lam')
        return datos


@dataclass(frozen=True)
class PhaseFieldParams:
    """
    Parámetros del flujo gradiente de campo de fase.

    Attributes:
        alpha: peso del doble pozo
        beta: peso de la penalización de gradiente
        d_chi, d_u: movilidades inversas
        dt: paso de tiempo inicial (y máximo)
        v: fracción de volumen objetivo
        tol: umbral de convergencia sobre ||d chi/dt||_L2
        max_steps: máximo de pasos aceptados
        perturbation: amplitud de la perturbación inicial sembrada
        state_mode: 'segregated' (resolver u en cada paso) o 'coupled'
        min_dt: paso mínimo antes de abandonar por falta de ascenso
        growth: factor de recuperación de dt tras un paso aceptado
    """

    alpha: float = 1.0
    beta: float = 2e-5
    d_chi: float = 2e-2
    d_u: float = 2e-3
    dt: float = 1e-4
    v: float = 0.5
    tol: float = 1e-6
    max_steps: int = 5000
    perturbation: float = 1e-3
    state_mode: str = 'segregated'
    min_dt: float = 1e-12
    growth: float = 1.2

    def __post_init__(self):
        """Validación post-inicialización."""
        for nombre in ('alpha', 'beta', 'd_chi', 'd_u', 'dt', 'min_dt'):
            valor = getattr(self, nombre)
            if not valor > 0:
                raise ValueError(f"'{nombre}' debe ser positivo (recibido {valor})")
        if not 0.0 < self.v < 1.0:
            raise ValueError(f"La fracción de volumen v debe estar en (0, 1) (recibido {self.v})")
        if self.tol < 0 or self.max_steps < 0 or self.perturbation < 0:
            raise ValueError("tol, max_steps y perturbation no pueden ser negativos")
        if self.growth < 1.0:
            raise ValueError("growth debe ser >= 1")
        if self.state_mode not in MODOS_ESTADO:
            raise ValueError(f"state_mode '{self.state_mode}' no válido. Use: {MODOS_ESTADO}")

    @property
    def interface_width(self) -> float:
        """Espesor característico sqrt(beta/alpha) de la capa de transición."""
        return math.sqrt(self.beta / self.alpha)

    def replace(self, **cambios) -> 'PhaseFieldParams':
        datos = asdict(self)
        datos.update(cambios)
        return PhaseFieldParams(**datos)

    @classmethod
    def from_dict(cls, config_dict: Dict[str, Any]) -> 'PhaseFieldParams':
        return cls(**_rechazar_claves_desconocidas(cls, config_dict))

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class MeshConfig:
    """Resolución y geometría de los tres escenarios."""

    nx: int = 64
    ny: int = 64
    nr: int = 32
    ntheta: int = 128
    r_in: float = 0.2
    r_out: float = 1.0
    n: int = 64
    r_source: float = 0.15
    r_sink: float = 0.15

    @classmethod
    def from_dict(cls, config_dict: Dict[str, Any]) -> 'MeshConfig':
        return cls(**_rechazar_claves_desconocidas(cls, config_dict))

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def tamano_elemento(self, escenario: str) -> float:
        """Tamaño de elemento característico del escenario."""
        if escenario == 'square':
            return 1.0 / min(self.nx, self.ny)
        if escenario == 'annulus':
            return max((self.r_out - self.r_in) / self.nr, 2 * math.pi * self.r_in / self.ntheta)
        return 1.0 / self.n


@dataclass(frozen=True)
class SweepConfig:
    """Barrido de difusividades (grilla k11 x k22)."""

    k11: List[float] = field(default_factory=lambda: [0.1, 1.0, 10.0])
    k22: List[float] = field(default_factory=lambda: [0.1, 1.0, 10.0])
    offdiag_ratio: float = 1e-3
    workers: int = 1

    def __post_init__(self):
        if not self.k11 or not self.k22:
            raise ValueError("El barrido requiere al menos un valor de k11 y de k22")
        if self.offdiag_ratio <= 0 or self.workers < 1:
            raise ValueError("offdiag_ratio debe ser positivo y workers >= 1")

    @classmethod
    def from_dict(cls, config_dict: Dict[str, Any]) -> 'SweepConfig':
        return cls(**_rechazar_claves_desconocidas(cls, config_dict))

    def to_dict(self) -> Dict[str, Any]:
        return {'k11': list(self.k11), 'k22': list(self.k22),
                'offdiag_ratio': self.offdiag_ratio, 'workers': self.workers}


@dataclass(frozen=True)
class RunConfig:
    """
    Configuración completa de una corrida.

    Attributes:
        scenario: 'square', 'annulus' o 'periodic'
        mode: 'solve', 'optimize', 'relaxed-map', 'validate1d' o 'sweep'
        mesh: resolución y geometría
        model: parámetros del transporte
        phase_field: parámetros del flujo de diseño
        output_dir: carpeta de salida
        snapshot_every: intervalo de instantáneas VTK (0 desactiva)
        seed: semilla de la perturbación inicial
        chi: diseño de entrada para 'solve': constante, CSV tipo imagen o VTK previo
        sweep: grilla del barrido
    """

    scenario: str = 'square'
    mode: str = 'optimize'
    mesh: MeshConfig = field(default_factory=MeshConfig)
    model: ModelParams = field(default_factory=ModelParams)
    phase_field: PhaseFieldParams = field(default_factory=PhaseFieldParams)
    output_dir: str = 'resultados'
    snapshot_every: int = 0
    seed: int = 0
    chi: Union[float, str, None] = None
    sweep: SweepConfig = field(default_factory=SweepConfig)

    def __post_init__(self):
        """Validación post-inicialización."""
        if self.scenario not in ESCENARIOS:
            raise ValueError(f"Escenario '{self.scenario}' no válido. Use: {ESCENARIOS}")
        if self.mode not in MODOS:
            raise ValueError(f"Modo '{self.mode}' no válido. Use: {MODOS}")
        if self.snapshot_every < 0:
            raise ValueError("snapshot_every no puede ser negativo")
        if isinstance(self.chi, bool):
            raise ValueError("chi debe ser un número o una ruta")
        if isinstance(self.chi, (int, float)) and not 0.0 <= self.chi <= 1.0:
            raise ValueError(f"chi constante debe estar en [0, 1] (recibido {self.chi})")
        if self.mode in ('optimize', 'sweep'):
            h = self.mesh.tamano_elemento(self.scenario)
            if self.phase_field.interface_width < h:
                logger.warning(
                    "El espesor de interfaz sqrt(beta/alpha)=%.3g es menor que el elemento h=%.3g",
                    self.phase_field.interface_width, h,
                )

    def replace(self, **cambios) -> 'RunConfig':
        datos = {f.name: getattr(self, f.name) for f in fields(self)}
        datos.update(cambios)
        return RunConfig(**datos)

    @classmethod
    def from_dict(cls, config_dict: Dict[str, Any]) -> 'RunConfig':
        """Crea configuración desde diccionario anidado."""
        datos = _rechazar_claves_desconocidas(cls, config_dict)
        anidados = {
            'mesh': MeshConfig, 'model': ModelParams,
            'phase_field': PhaseFieldParams, 'sweep': SweepConfig,
        }
        for clave, tipo in anidados.items():
            if clave in datos and isinstance(datos[clave], dict):
                datos[clave] = tipo.from_dict(datos[clave])
        return cls(**datos)

    @classmethod
    def from_json(cls, ruta: Union[str, Path]) -> 'RunConfig':
        """Lee la configuración desde un documento JSON."""
        ruta = Path(ruta).expanduser()
        try:
            datos = json.loads(ruta.read_text(encoding='utf-8'))
        except (OSError, json.JSONDecodeError) as exc:
            raise ValueError(f"No se pudo leer la configuración '{ruta}': {exc}") from exc
        if not isinstance(datos, dict):
            raise ValueError(f"La configuración '{ruta}' debe ser un objeto JSON")
        return cls.from_dict(datos)

    def to_dict(self) -> Dict[str, Any]:
        """Convierte configuración a diccionario."""
        return {
            'scenario': self.scenario,
            'mode': self.mode,
            'mesh': self.mesh.to_dict(),
            'model': self.model.to_dict(),
            'phase_field': self.phase_field.to_dict(),
            'output_dir': self.output_dir,
            'snapshot_every': self.snapshot_every,
            'seed': self.seed,
            'chi': self.chi,
            'sweep': self.sweep.to_dict(),
        }


# Configuraciones predefinidas
# Reactor cuadrado con difusividades cruzadas casi nulas
PARAMS_CUADRADO = ModelParams(k11=1.0, k12=1e-6, k21=1e-6, k22=1.0, k_s=100.0)
PHASE_FIELD_CUADRADO = PhaseFieldParams(alpha=1.0, beta=2e-5, d_chi=2e-2, d_u=2e-3, v=0.5)

# Barrido de difusividades (k12 = 1e-3 k11, k21 = 1e-3 k22)
PHASE_FIELD_BARRIDO = PhaseFieldParams(alpha=0.1, beta=5e-5, d_chi=1e-2, d_u=7e-4, v=0.5)


def params_barrido(k11: float, k22: float, ratio: float = 1e-3, k_s: float = 100.0) -> ModelParams:
    """Parámetros de una celda del barrido de difusividades."""
    return ModelParams(k11=k11, k12=ratio * k11, k21=ratio * k22, k22=k22, k_s=k_s)


# Reactor anular con k12 = 1e-2 k11, k21 = 1e-2 k22
PARAMS_ANULAR = ModelParams(k11=1.0, k12=1e-2, k21=1e-2, k22=1.0, k_s=100.0)

# Conjuntos (a)-(d) del mapa del funcional relajado: (params, (v1, v2), lambda)
_MAPA_BASE = ModelParams(k11=1.0, k12=0.1, k21=0.1, k22=1.0, k_s=1.0)
MAPAS_RELAJADOS = {
    'a': (_MAPA_BASE, (1.0, 0.0), 0.0),
    'b': (_MAPA_BASE.replace(k11=5.0), (1.0, 0.0), 0.0),
    'c': (_MAPA_BASE, (1.0, 0.0), 1.0),
    'd': (_MAPA_BASE, (math.sqrt(10.0), 0.0), 0.0),
}
