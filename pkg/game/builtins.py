"""
Instâncias embutidas e inicializações documentadas.

Só a inicialização "sb-padrao" (example_sb) reproduz valores publicados; as
demais foram escolhidas neste repositório e estão marcadas como tal.
"""
import logging

import numpy as np

from geometry.boxes import BoxSet
from geometry.polytopes import Polytope
from simulador_gnep.conf import gnep_setting

from .bilinear import BilinearAffineGame, bilinear_problem
from .exceptions import InvalidProblem, UnknownProblem
from .losses import QuadraticBilinearLoss, SaddleQuarticLoss
from .problems import GnepProblem, PlayerStart

logger = logging.getLogger(__name__)


def _quadrado(coef_proprio, coef_oponente, acoplamento=0.0):
    """Perda 1-D: coef_proprio*x^2 + acoplamento*x*o + coef_oponente*o^2."""
    return QuadraticBilinearLoss([[2.0 * coef_proprio]], [[acoplamento]], R=[[2.0 * coef_oponente]])


def _sem_parametros(nome, params):
    if params:
        raise InvalidProblem(f"{nome} não aceita parâmetros, recebeu {sorted(params)}.")


def example_sb(params=None):
    _sem_parametros("example_sb", params)
    return GnepProblem(
        name="example_sb",
        dims=(1, 1),
        # nu_x = x^2 - y^2, nu_y = y^2 - x^2
        losses=(_quadrado(1.0, -1.0), _quadrado(1.0, -1.0)),
        constraint=Polytope([
            ([-1, 0], 1), ([1, 0], 8), ([0, -1], 1), ([0, 1], 8), ([1, 1], 10),
        ]),
        G=16.0,
        D=9.0 * np.sqrt(2.0),
        mu=2.0,
        L=2.0,
        delta=1.0,
        # D_min(phi) = 1 - phi para phi < 1
        phi=0.5,
        dmin=0.5,
        Delta=2.0,
        u=np.zeros(2),
    )


def example_sb2(params=None):
    params = dict(params or {})
    p = float(params.pop("p_scale", gnep_setting("SADDLE_P_SCALE")))
    eps = float(params.pop("eps", gnep_setting("SADDLE_EPS")))
    _sem_parametros("example_sb2", params)
    if not 0 < p * p < 0.5:
        raise InvalidProblem(f"p_scale={p} quebra a convexidade forte do jogador y (exige p^2 < 1/2).")
    P = p * np.eye(2)
    semiespacos = []
    for k in range(4):
        e = np.zeros(4)
        e[k] = 1.0
        semiespacos += [(e, 1.0), (-e, 1.0)]
    # coordenadas (x1, x2, y1, y2)
    semiespacos.append(([1.0, eps, 1.0, eps], 1.0))
    return GnepProblem(
        name="example_sb2",
        dims=(2, 2),
        losses=(SaddleQuarticLoss(P, "min"), SaddleQuarticLoss(P, "max")),
        constraint=Polytope(semiespacos),
        G=2.0 * np.sqrt(2.0) + 4.0 * p * p * np.sqrt(2.0),
        D=4.0,
        mu=2.0 - 4.0 * p * p,
        L=2.0 + 4.0 * p * p,
        u=np.zeros(4),
        params={"p_scale": p, "eps": eps},
    )


def example_nb1(params=None):
    _sem_parametros("example_nb1", params)
    return GnepProblem(
        name="example_nb1",
        dims=(1, 1),
        losses=(_quadrado(1.0, -1.0), _quadrado(1.0, -1.0)),
        constraint=Polytope([([0, -1], 2), ([4, 1], 0), ([-4, 1], 0)]),
        G=4.0,
        D=np.sqrt(5.0),
        mu=2.0,
        L=2.0,
        u=np.zeros(2),
    )


def example_nb2(params=None):
    _sem_parametros("example_nb2", params)
    # f = x^2 - 10xy - 2y^2; x minimiza f, y minimiza -f
    return GnepProblem(
        name="example_nb2",
        dims=(1, 1),
        losses=(_quadrado(1.0, -2.0, -10.0), _quadrado(2.0, -1.0, 10.0)),
        constraint=Polytope([([-1, 0], 5), ([0, 1], 5), ([1, -1 / 3], 5), ([1 / 3, -1], 5)]),
        G=260.0 / 3.0,
        D=35.0 * np.sqrt(2.0) / 3.0,
        mu=2.0,
        L=4.0,
        u=np.zeros(2),
    )


def bilinear_affine(params=None):
    params = dict(params or {})
    game = BilinearAffineGame(
        A=params.pop("a", 0.1),
        c_x=params.pop("cx", 1.0),
        c_y=params.pop("cy", 1.0),
        B=params.pop("B", 1.0),
    )
    R = float(params.pop("R", 4.0))
    _sem_parametros("bilinear_affine", params)
    return bilinear_problem(game, R=R, params={
        "a": float(game.A[0, 0]), "cx": float(game.c_x[0]), "cy": float(game.c_y[0]),
        "B": game.B, "R": R,
    })


BUILTINS = {
    "example_sb": example_sb,
    "example_sb2": example_sb2,
    "example_nb1": example_nb1,
    "example_nb2": example_nb2,
    "bilinear_affine": bilinear_affine,
}


def load_builtin(name, params=None):
    try:
        fabrica = BUILTINS[name]
    except KeyError:
        raise UnknownProblem(
            f"Problema '{name}' desconhecido. Disponíveis: {', '.join(sorted(BUILTINS))}."
        ) from None
    return fabrica(params)


def simplex_product_problem(n, d=2):
    """
    Jogo desacoplado em que cada jogador escolhe um ponto do simplex
    {z >= 0, soma(z) <= 1} (simplex padrão escrito em d coordenadas livres)
    e minimiza 1/2 |z - c|^2, com c o baricentro. Equilíbrio no interior.
    """
    if n < 2 or d < 1:
        raise InvalidProblem("simplex_product_problem exige n >= 2 e d >= 1.")
    total = n * d
    centro = np.full(d, 1.0 / (d + 1))
    semiespacos = []
    for i in range(n):
        for k in range(d):
            a = np.zeros(total)
            a[i * d + k] = -1.0
            semiespacos.append((a, 0.0))
        a = np.zeros(total)
        a[i * d:(i + 1) * d] = 1.0
        semiespacos.append((a, 1.0))
    vertices = np.vstack([np.zeros(d), np.eye(d)])
    G = float(np.max(np.linalg.norm(vertices - centro, axis=1)))
    perdas = tuple(
        QuadraticBilinearLoss(np.eye(d), np.zeros((d, total - d)), b=-centro)
        for _ in range(n)
    )
    return GnepProblem(
        name=f"simplex_product_{n}x{d}",
        dims=(d,) * n,
        losses=perdas,
        constraint=Polytope(semiespacos),
        G=G,
        D=float(np.sqrt(total)),
        mu=1.0,
        L=1.0,
        delta=1.0,
        Delta=1.0,
        u=np.tile(centro, n),
        params={"n": n, "d": d},
    )


# ---------------------------------------------------------------------
# Inicializações
# ---------------------------------------------------------------------

def _inicio(*jogadores):
    return [PlayerStart(np.array(x, dtype=float), BoxSet(lo, hi)) for x, lo, hi in jogadores]


# (problema, variante) -> PlayerStart de cada jogador
DEFAULT_INITS = {
    # x = (2, 6) com caixas [1, 3] e [5, 7]
    ("example_sb", 0): _inicio(([2.0], [1.0], [3.0]), ([6.0], [5.0], [7.0])),
    # escolhidas no repositório
    ("example_sb2", 0): _inicio(
        ([0.3, -0.2], [0.2, -0.3], [0.4, -0.1]),
        ([0.2, 0.3], [0.1, 0.2], [0.3, 0.4]),
    ),
    ("example_nb1", 0): _inicio(([0.2], [0.1], [0.3]), ([-1.5], [-1.7], [-1.3])),
    ("example_nb2", 0): _inicio(([2.0], [1.5], [2.5]), ([-1.0], [-1.5], [-0.5])),
    # encosta no canto (-5, 5) e para longe do equilíbrio
    ("example_nb2", 1): _inicio(([-4.0], [-4.5], [-3.5]), ([4.0], [3.5], [4.5])),
    ("bilinear_affine", 0): _inicio(([-0.5], [-0.75], [-0.25]), ([-0.5], [-0.75], [-0.25])),
}

PRESETS = {
    "sb-padrao": ("example_sb", 0),
    "nb1-padrao": ("example_nb1", 0),
    "nb2-padrao": ("example_nb2", 0),
    "nb2-canto": ("example_nb2", 1),
}


def default_init(name, variant=0):
    try:
        return list(DEFAULT_INITS[(name, variant)])
    except KeyError:
        raise UnknownProblem(f"Sem inicialização documentada para {name} (variante {variant}).") from None
