"""
Caixas alinhadas aos eixos.

São a representação concreta dos conjuntos desejados que cada jogador
anuncia antes de cada rodada. Todas as funções são puras: recebem caixas
imutáveis e devolvem caixas novas.
"""
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatch, InvalidBox, NotContained


def as_vector(valor, nome="vetor"):
    """Converte escalares/listas num vetor float 1-D (sempre uma cópia)."""
    arr = np.array(valor, dtype=float, ndmin=1)
    if arr.ndim != 1:
        raise DimensionMismatch(f"{nome} deve ser unidimensional, recebeu shape {arr.shape}.")
    return arr


def _mesma_dimensao(S, v, nome="vetor"):
    v = as_vector(v, nome)
    if v.shape != S.lower.shape:
        raise DimensionMismatch(
            f"{nome} tem dimensão {v.size}, a caixa tem dimensão {S.dim}."
        )
    return v


def _folga(tol, ref):
    return tol * (1.0 + np.abs(ref))


@dataclass(frozen=True, eq=False)
class BoxSet:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = as_vector(self.lower, "lower")
        upper = as_vector(self.upper, "upper")
        if lower.shape != upper.shape:
            raise DimensionMismatch(
                f"lower ({lower.size}) e upper ({upper.size}) com dimensões diferentes."
            )
        if lower.size < 1:
            raise InvalidBox("A caixa precisa ter dimensão >= 1.")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise InvalidBox("Limites da caixa devem ser finitos.")
        if np.any(lower > upper):
            raise InvalidBox(f"lower > upper em algum eixo: {lower} / {upper}.")
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def singleton(cls, x):
        x = as_vector(x, "x")
        return cls(x, x)

    @property
    def dim(self):
        return self.lower.size

    @property
    def widths(self):
        return self.upper - self.lower

    @property
    def center(self):
        return (self.lower + self.upper) / 2.0

    def __eq__(self, other):
        if not isinstance(other, BoxSet):
            return NotImplemented
        return np.array_equal(self.lower, other.lower) and np.array_equal(self.upper, other.upper)

    def __hash__(self):
        return hash((self.lower.tobytes(), self.upper.tobytes()))

    def __repr__(self):
        eixos = " x ".join(f"[{lo:.6g}, {hi:.6g}]" for lo, hi in zip(self.lower, self.upper))
        return f"BoxSet({eixos})"


def box_product(boxes):
    """Caixa produto (concatena os eixos na ordem dos jogadores)."""
    boxes = list(boxes)
    return BoxSet(
        np.concatenate([b.lower for b in boxes]),
        np.concatenate([b.upper for b in boxes]),
    )


def box_contains(S, x, tol=0.0):
    x = _mesma_dimensao(S, x, "x")
    return bool(
        np.all(x >= S.lower - _folga(tol, S.lower)) and np.all(x <= S.upper + _folga(tol, S.upper))
    )


def box_relint_contains(S, x):
    """
    Pertinência ao interior relativo: estrito nos eixos com largura > 0,
    igualdade exata nos eixos degenerados.
    """
    x = _mesma_dimensao(S, x, "x")
    cheio = S.widths > 0
    dentro = np.where(cheio, (x > S.lower) & (x < S.upper), x == S.lower)
    return bool(np.all(dentro))


def box_translate(S, v):
    v = _mesma_dimensao(S, v, "v")
    return BoxSet(S.lower + v, S.upper + v)


def box_diameter(S):
    return float(np.linalg.norm(S.widths))


def support_min(S, g):
    """Conjunto argmin de <g, z> sobre a caixa, como sub-caixa (possivelmente degenerada)."""
    g = _mesma_dimensao(S, g, "g")
    lower = np.where(g < 0, S.upper, S.lower)
    upper = np.where(g > 0, S.lower, S.upper)
    return BoxSet(lower, upper)


def max_step_inside(S, x, g, tol=1e-9):
    """
    Maior alfa >= 0 com x - alfa*g ainda em S.

    Com g = 0 devolve +inf; quem chama sempre multiplica por g, então o
    deslocamento continua nulo.
    """
    x = _mesma_dimensao(S, x, "x")
    g = _mesma_dimensao(S, g, "g")
    if not box_contains(S, x, tol):
        raise NotContained(f"Ponto {x} fora de {S!r}.")
    ativos = g != 0
    if not np.any(ativos):
        return np.inf
    # cada eixo ativo para na face que -g aponta
    face = np.where(g > 0, S.lower, S.upper)
    passos = (x[ativos] - face[ativos]) / g[ativos]
    return float(max(np.min(passos), 0.0))


def project_box(x, S):
    x = _mesma_dimensao(S, x, "x")
    return np.clip(x, S.lower, S.upper)


def box_shrink_around(S, x, factor, tol=1e-9):
    """
    Encolhe cada eixo pelo fator, centrando em x e deslocando o mínimo
    necessário para continuar dentro de S.
    """
    if not 0.0 < factor < 1.0:
        raise InvalidBox(f"Fator de encolhimento deve estar em (0, 1), recebeu {factor}.")
    x = _mesma_dimensao(S, x, "x")
    if not box_contains(S, x, tol):
        raise NotContained(f"Ponto {x} fora de {S!r}.")
    x = np.clip(x, S.lower, S.upper)
    meia = factor * S.widths / 2.0
    lower = np.clip(x - meia, S.lower, S.upper - 2.0 * meia)
    upper = np.minimum(lower + 2.0 * meia, S.upper)
    return BoxSet(lower, upper)
