"""
Excepciones del dominio.
"""


class NonConvergenceError(RuntimeError):
    """El gradiente conjugado no alcanzó la tolerancia pedida."""

    def __init__(self, iterations: int, residual: float):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"CG no convergió en {iterations} iteraciones "
            f"(residuo relativo alcanzado {residual:.3e})"
        )


class DivergenceError(RuntimeError):
    """La marcha en pseudo-tiempo del estado creció sin control."""


class DegenerateReactionError(ValueError):
    """k_v = 0: W es lineal en chi y chi* no está definido."""
