"""
Equilíbrios de fronteira do jogo bilinear com restrição afim.

Com a restrição ativa, as condições de KKT dos dois jogadores são

    x + Ay = -alpha c_x,   y - A'x = -beta c_y,   <x, c_x> + <y, c_y> = B

e a última equação vira alpha u1 + beta u2 = B. Os sinais de u1 e u2
decidem se há equilíbrios na fronteira (uma semirreta de
multiplicadores) ou se o único equilíbrio é (0, 0).
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from simulador_gnep.conf import gnep_setting

logger = logging.getLogger(__name__)

EMPTY = "empty"
SEGMENT = "segment"
HALF_LINE = "half-line"

# multiplicador livre ao longo da semirreta: 0 e mais 15 pontos geométricos
MULTIPLICADORES = np.concatenate([[0.0], np.geomspace(1e-3, 1e3, 15)])


@dataclass(frozen=True)
class BoundaryEquilibrium:
    x: np.ndarray
    y: np.ndarray
    alpha: float
    beta: float
    residual: np.ndarray

    def as_dict(self):
        return {
            "x": self.x.tolist(),
            "y": self.y.tolist(),
            "alpha": self.alpha,
            "beta": self.beta,
            "residual": self.residual.tolist(),
        }


@dataclass(frozen=True)
class BoundaryEquilibriaReport:
    u1: float
    u2: float
    classification: str
    equilibria: list = field(default_factory=list)

    @property
    def max_residual(self):
        if not self.equilibria:
            return 0.0
        return float(max(np.max(e.residual) for e in self.equilibria))

    def as_dict(self):
        return {
            "u1": self.u1,
            "u2": self.u2,
            "classification": self.classification,
            "interior_equilibrium": "(0, 0)",
            "equilibria": [e.as_dict() for e in self.equilibria],
            "max_residual": self.max_residual,
        }


class _Fatorado:
    """Fatorações de Cholesky de I + AA' e I + A'A, com um passo de refinamento."""

    def __init__(self, A):
        self.A = A
        self.M = np.eye(A.shape[0]) + A @ A.T
        self.N = np.eye(A.shape[1]) + A.T @ A
        self._M = cho_factor(self.M)
        self._N = cho_factor(self.N)

    @staticmethod
    def _resolve(fator, matriz, b):
        z = cho_solve(fator, b)
        return z + cho_solve(fator, b - matriz @ z)

    def M_inv(self, b):
        return self._resolve(self._M, self.M, b)

    def N_inv(self, b):
        return self._resolve(self._N, self.N, b)


def boundary_coefficients(game, fatorado=None):
    """(u1, u2) do jogo."""
    f = fatorado or _Fatorado(game.A)
    A, c_x, c_y = game.A, game.c_x, game.c_y
    u1 = -float(c_x @ (f.M_inv(c_x) + A @ f.N_inv(c_y)))
    u2 = -float(c_y @ (f.N_inv(c_y) - A.T @ f.M_inv(c_x)))
    return u1, u2


def classify(u1, u2):
    if u1 > 0 and u2 > 0:
        # nunca acontece: u1 + u2 = -(|c|^2 ponderado) < 0
        return SEGMENT
    if max(u1, u2) > 0:
        return HALF_LINE
    return EMPTY


def _ponto(game, f, alpha, beta):
    x = f.M_inv(-alpha * game.c_x + beta * (game.A @ game.c_y))
    y = f.N_inv(-alpha * (game.A.T @ game.c_x) - beta * game.c_y)
    return x, y


def kkt_residual(game, x, y, alpha, beta):
    """
    [|x + Ay + alpha c_x|, |y - A'x + beta c_y|, |<x,c_x> + <y,c_y> - B|,
     max(-alpha, 0), max(-beta, 0)].
    """
    x = np.asarray(x, dtype=float).reshape(game.d_x)
    y = np.asarray(y, dtype=float).reshape(game.d_y)
    return np.array([
        np.linalg.norm(x + game.A @ y + alpha * game.c_x),
        np.linalg.norm(y - game.A.T @ x + beta * game.c_y),
        abs(x @ game.c_x + y @ game.c_y - game.B),
        max(-alpha, 0.0),
        max(-beta, 0.0),
    ])


def _multiplicadores(game, u1, u2, classificacao):
    B = game.B
    if classificacao == HALF_LINE:
        if u2 > 0:
            return [(a, (B - a * u1) / u2) for a in MULTIPLICADORES]
        return [((B - b * u2) / u1, b) for b in MULTIPLICADORES]
    if classificacao == SEGMENT:
        return [(a, (B - a * u1) / u2) for a in np.linspace(0.0, B / u1, len(MULTIPLICADORES))]
    return []


def bilinear_boundary_equilibria(game):
    """Classificação e até 16 equilíbrios de fronteira amostrados (B > 0 garantido pelo jogo)."""
    f = _Fatorado(game.A)
    u1, u2 = boundary_coefficients(game, f)
    classificacao = classify(u1, u2)
    if classificacao == SEGMENT:
        logger.error("u1=%g e u2=%g ambos positivos.", u1, u2)

    tol = gnep_setting("KKT_TOL")
    equilibrios = []
    for alpha, beta in _multiplicadores(game, u1, u2, classificacao):
        x, y = _ponto(game, f, alpha, beta)
        residuo = kkt_residual(game, x, y, alpha, beta)
        escala = max(1.0, float(np.linalg.norm(np.concatenate([x, y]))), abs(alpha), abs(beta))
        if np.max(residuo) > tol * escala:
            logger.warning("Resíduo de KKT %.3g em alpha=%g, beta=%g.", np.max(residuo), alpha, beta)
        equilibrios.append(BoundaryEquilibrium(x=x, y=y, alpha=float(alpha), beta=float(beta), residual=residuo))
    return BoundaryEquilibriaReport(u1=u1, u2=u2, classification=classificacao, equilibria=equilibrios)
