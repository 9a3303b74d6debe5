"""
Jogo bilinear com uma restrição afim:

    f(x, y) = |x|^2/2 - |y|^2/2 + <x, Ay>,   <x, c_x> + <y, c_y> <= B

O jogador x minimiza f e o jogador y maximiza.
"""
from dataclasses import dataclass

import numpy as np

from geometry.boxes import as_vector
from geometry.polytopes import Polytope

from .exceptions import InvalidProblem
from .losses import QuadraticBilinearLoss
from .problems import GnepProblem


@dataclass(frozen=True, eq=False)
class BilinearAffineGame:
    A: np.ndarray
    c_x: np.ndarray
    c_y: np.ndarray
    B: float

    def __post_init__(self):
        A = np.array(self.A, dtype=float, ndmin=2)
        c_x, c_y = as_vector(self.c_x, "c_x"), as_vector(self.c_y, "c_y")
        if A.shape != (c_x.size, c_y.size):
            raise InvalidProblem(f"A deveria ser {c_x.size}x{c_y.size}, recebeu {A.shape}.")
        if not float(self.B) > 0:
            raise InvalidProblem(f"B precisa ser positivo, recebeu {self.B}.")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "c_x", c_x)
        object.__setattr__(self, "c_y", c_y)
        object.__setattr__(self, "B", float(self.B))

    @property
    def d_x(self):
        return self.c_x.size

    @property
    def d_y(self):
        return self.c_y.size

    def gradients(self, x, y):
        """(g_x, g_y) = (x + Ay, y - A'x)."""
        return x + self.A @ y, y - self.A.T @ x


def bilinear_problem(game, R=4.0, name="bilinear_affine", params=None):
    """
    GnepProblem do jogo bilinear limitado à caixa [-R, R]^d (o semiespaço
    sozinho é ilimitado).
    """
    d_x, d_y = game.d_x, game.d_y
    d = d_x + d_y
    semiespacos = []
    for k in range(d):
        e = np.zeros(d)
        e[k] = 1.0
        semiespacos += [(e, R), (-e, R)]
    semiespacos.append((np.concatenate([game.c_x, game.c_y]), game.B))
    perdas = (
        QuadraticBilinearLoss(np.eye(d_x), game.A, R=-np.eye(d_y)),
        QuadraticBilinearLoss(np.eye(d_y), -game.A.T, R=-np.eye(d_x)),
    )
    # |x + Ay| <= |x| + |A||y| na caixa
    norma_A = float(np.linalg.norm(game.A, 2))
    G = R * (np.sqrt(max(d_x, d_y)) + norma_A * np.sqrt(max(d_x, d_y)))
    return GnepProblem(
        name=name,
        dims=(d_x, d_y),
        losses=perdas,
        constraint=Polytope(semiespacos),
        G=G,
        D=2.0 * R * np.sqrt(d),
        mu=1.0,
        L=1.0,
        u=np.zeros(d),
        params=params or {},
    )
