"""
Tipos, enumeraciones y contenedores de resultados para Reactor Design.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

# Tipos básicos
Vector = np.ndarray
DesignField = np.ndarray   # chi nodal, una entrada por incógnita


class BoundaryTag(str, Enum):
    """Etiquetas de borde: fuente de la especie 1, sumidero de la 2, aislado."""
    SOURCE1 = 'source1'
    SINK2 = 'sink2'
    INSULATED = 'insulated'


class Region(str, Enum):
    """Regiones del funcional relajado: fase pura 0, mezcla, fase pura 1."""
    R0 = 'R0'
    R = 'R'
    R1 = 'R1'


@dataclass
class StateField:
    """Concentraciones nodales (u1, u2) de ambas especies."""
    u1: Vector
    u2: Vector

    @property
    def stacked(self) -> Vector:
        """Vector [u1, u2] en el orden del operador acoplado."""
        return np.concatenate([self.u1, self.u2])

    @classmethod
    def from_stacked(cls, u: Vector) -> 'StateField':
        n = u.shape[0] // 2
        return cls(u1=u[:n].copy(), u2=u[n:].copy())


@dataclass
class EnergyReport:
    """
    Contribuciones al funcional de energía y flujos de borde.

    Attributes:
        transport_energy: int 1/2 sum k_i |grad u_i|^2
        reaction_energy: int 1/2 chi(1-chi) u.Au
        phase_field_energy: suma de los dos términos de campo de fase
        phase_field_well: int alpha W(chi)
        phase_field_gradient: int beta |grad chi|^2
        j1_in: flujo entrante de la especie 1 por la fuente
        j2_out: flujo saliente de la especie 2 por el sumidero
        total_reaction: int chi(1-chi) k_s (u1 - u2)
        objective: O = u1* J1_in + u2* J2_out
    """
    transport_energy: float
    reaction_energy: float
    phase_field_energy: float
    phase_field_well: float
    phase_field_gradient: float
    j1_in: float
    j2_out: float
    total_reaction: float
    objective: float
    lam: Optional[float] = None

    @property
    def energy_balance(self) -> float:
        """Residuo de O = 2 (transporte + reacción), válido con u2* = 0."""
        return self.objective - 2.0 * (self.transport_energy + self.reaction_energy)

    def to_dict(self) -> Dict[str, Any]:
        """Convierte a diccionario con las columnas de la tabla de energías."""
        return {
            'transport_energy': self.transport_energy,
            'reaction_energy': self.reaction_energy,
            'phase_field_energy': self.phase_field_energy,
            'phase_field_well': self.phase_field_well,
            'phase_field_gradient': self.phase_field_gradient,
            'j1_in': self.j1_in,
            'j2_out': self.j2_out,
            'total_reaction': self.total_reaction,
            'objective': self.objective,
            'lambda': self.lam,
            'energy_balance': self.energy_balance,
        }


@dataclass
class HistoryEntry:
    """Una fila del historial de optimización."""
    step: int
    residual: float
    functional: float
    lam: float
    dt: float

    def to_dict(self) -> Dict[str, float]:
        return {
            'step': self.step,
            'residual': self.residual,
            'functional': self.functional,
            'lambda': self.lam,
            'dt': self.dt,
        }


@dataclass
class DesignResult:
    """Resultado de una corrida de optimización de diseño."""
    chi: DesignField
    state: StateField
    report: EnergyReport
    history: List[HistoryEntry] = field(default_factory=list)
    converged: bool = False
    model: Any = None  # ModelParams con lam de la proyección final

    @property
    def steps(self) -> int:
        return self.history[-1].step if self.history else 0


# Resultados del módulo unidimensional: (J, u1 barra, u2 barra)
Flujo1D = Tuple[float, float, float]
