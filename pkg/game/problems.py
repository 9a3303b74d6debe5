"""
Definição de um GNEP: jogadores, dimensões, perdas, politopo compartilhado
e as constantes conhecidas (G, D, mu, L, delta, phi, D_min, Delta, u).
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import minimize

from geometry.boxes import BoxSet, as_vector, box_diameter
from geometry.polytopes import Polytope, dist_point_boundary, player_block, slice_constraint
from simulador_gnep.conf import gnep_setting

from .exceptions import InvalidProblem, PlayerIndexError

logger = logging.getLogger(__name__)

CONSTANTES = ("G", "D", "mu", "L", "delta", "phi", "dmin", "Delta")


@dataclass(frozen=True, eq=False)
class GnepProblem:
    name: str
    dims: tuple
    losses: tuple
    constraint: Polytope
    G: float = None
    D: float = None
    mu: float = None
    L: float = None
    delta: float = None
    phi: float = None
    dmin: float = None
    Delta: float = None
    u: np.ndarray = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise InvalidProblem(f"Dimensões inválidas: {self.dims}.")
        if len(self.losses) != len(dims):
            raise InvalidProblem(f"{len(self.losses)} perdas para {len(dims)} jogadores.")
        if sum(dims) != self.constraint.dim:
            raise InvalidProblem(
                f"Soma das dimensões ({sum(dims)}) difere da dimensão do politopo ({self.constraint.dim})."
            )
        total = sum(dims)
        for d, perda in zip(dims, self.losses):
            perda.bind(d, total - d)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "losses", tuple(self.losses))
        for nome in CONSTANTES:
            valor = getattr(self, nome)
            if valor is not None:
                valor = float(valor)
                if not np.isfinite(valor) or valor <= 0:
                    raise InvalidProblem(f"Constante {nome} deve ser positiva e finita, recebeu {valor}.")
                object.__setattr__(self, nome, valor)
        if self.D is not None:
            diagonal = box_diameter(self.constraint.bounding_box)
            if self.D < diagonal * (1 - 1e-6):
                raise InvalidProblem(
                    f"D={self.D} menor que a diagonal da caixa envolvente ({diagonal})."
                )
        if self.u is not None:
            u = as_vector(self.u, "u")
            if u.size != total:
                raise InvalidProblem(f"u tem dimensão {u.size}, esperado {total}.")
            u.setflags(write=False)
            object.__setattr__(self, "u", u)

    @property
    def n(self):
        return len(self.dims)

    @property
    def total_dim(self):
        return sum(self.dims)

    @cached_property
    def diameter(self):
        """D declarado ou, na falta dele, a diagonal da caixa envolvente de C."""
        if self.D is not None:
            return self.D
        return box_diameter(self.constraint.bounding_box)

    @cached_property
    def gradient_bound(self):
        if self.G is not None:
            return self.G
        return estimate_G(self)

    def block(self, i):
        return player_block(self.dims, i)


@dataclass(frozen=True, eq=False)
class PlayerStart:
    """Iterado e conjunto desejado iniciais de um jogador."""
    x: np.ndarray
    box: BoxSet

    def __post_init__(self):
        x = as_vector(self.x, "x")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)


# ---------------------------------------------------------------------
# Acesso aos blocos de cada jogador
# ---------------------------------------------------------------------

def _checa_jogador(problem, i):
    if not 0 <= i < problem.n:
        raise PlayerIndexError(f"Jogador {i} fora do intervalo 0..{problem.n - 1}.")


def _checa_ponto(problem, x):
    x = as_vector(x, "x")
    if x.size != problem.total_dim:
        raise InvalidProblem(f"Ponto de dimensão {x.size}, o jogo tem dimensão {problem.total_dim}.")
    return x


def split(problem, x):
    x = _checa_ponto(problem, x)
    return [x[problem.block(i)] for i in range(problem.n)]


def others(problem, x, i):
    """x^(-i): ponto conjunto sem o bloco do jogador i."""
    x = _checa_ponto(problem, x)
    bloco = problem.block(i)
    return np.concatenate([x[:bloco.start], x[bloco.stop:]])


def join(parts):
    return np.concatenate([as_vector(p) for p in parts])


def gradient(problem, i, x):
    _checa_jogador(problem, i)
    x = _checa_ponto(problem, x)
    return problem.losses[i].gradient(x[problem.block(i)], others(problem, x, i))


def joint_value(problem, i, x):
    _checa_jogador(problem, i)
    x = _checa_ponto(problem, x)
    return problem.losses[i].value(x[problem.block(i)], others(problem, x, i))


def feasible(problem, x, tol=None):
    tol = gnep_setting("AUDIT_TOL") if tol is None else tol
    return problem.constraint.contains(_checa_ponto(problem, x), tol)


def estimate_G(problem, samples=None, seed=None):
    """Maior norma de gradiente em pontos amostrados de C, inflada em 5%."""
    samples = gnep_setting("SAMPLES") if samples is None else samples
    seed = gnep_setting("SEED") if seed is None else seed
    pontos = problem.constraint.sample(np.random.default_rng(seed), samples)
    maior = 0.0
    for x in pontos:
        for i in range(problem.n):
            maior = max(maior, float(np.linalg.norm(gradient(problem, i, x))))
    G = maior * gnep_setting("G_INFLATION")
    logger.info("G estimado para %s: %.6g (%d amostras).", problem.name, G, samples)
    return G


def random_init(problem, rng):
    """
    Inicialização viável sorteada: ponto de C e caixas com meia-largura
    suficiente para o produto caber na bola até a fronteira.
    """
    limiar = 1e-6 * problem.diameter
    while True:
        p = problem.constraint.sample(rng, 1)[0]
        raio = dist_point_boundary(p, problem.constraint)
        if raio > limiar:
            break
    meia = rng.uniform(0.2, 0.9) * raio / np.sqrt(problem.total_dim)
    return [PlayerStart(parte, BoxSet(parte - meia, parte + meia)) for parte in split(problem, p)]


# ---------------------------------------------------------------------
# Equilíbrio aproximado
# ---------------------------------------------------------------------

def approximate_gne_gap(problem, x):
    """
    Quanto cada jogador ainda ganharia desviando sozinho dentro da sua
    fatia de C. Zero para todos os jogadores = equilíbrio.
    """
    x = _checa_ponto(problem, x)
    ganhos = []
    for i in range(problem.n):
        proprio = x[problem.block(i)]
        resto = others(problem, x, i)
        fatia = slice_constraint(problem.constraint, i, resto, problem.dims, witness=proprio)
        perda = problem.losses[i]
        res = minimize(
            lambda z: perda.value(z, resto),
            proprio,
            jac=lambda z: perda.gradient(z, resto),
            method="SLSQP",
            constraints=[{
                "type": "ineq",
                "fun": lambda z: fatia.h - fatia.A @ z,
                "jac": lambda z: -fatia.A,
            }],
            options={"ftol": 1e-12, "maxiter": 500},
        )
        atual = perda.value(proprio, resto)
        melhor = perda.value(res.x, resto) if fatia.contains(res.x, 1e-9) else atual
        ganhos.append(max(atual - melhor, 0.0))
    return ganhos


def is_approximate_gne(problem, x, eps):
    return feasible(problem, x) and max(approximate_gne_gap(problem, x)) <= eps
