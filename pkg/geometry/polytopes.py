"""
Politopos dados por semiespaços {x : <a, x> <= h}.

O conjunto de restrições compartilhado do jogo é um Polytope; as fatias
de cada jogador (restrição dado o que os oponentes jogaram) também.
"""
import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import linprog

from simulador_gnep.conf import gnep_setting

from .boxes import BoxSet, as_vector
from .exceptions import (
    DimensionMismatch,
    EmptyPolytope,
    EmptySlice,
    GeometryError,
    InvalidHalfspace,
    NotContained,
    ProjectionDidNotConverge,
    UnboundedPolytope,
)

logger = logging.getLogger(__name__)

# tamanho fixo dos lotes de amostragem: com a mesma semente, pedir mais
# pontos só acrescenta pontos ao fim da lista
LOTE_AMOSTRAGEM = 1024


@dataclass(frozen=True, eq=False)
class Halfspace:
    normal: np.ndarray
    offset: float

    def __post_init__(self):
        normal = as_vector(self.normal, "normal")
        if not np.all(np.isfinite(normal)) or np.linalg.norm(normal) == 0.0:
            raise InvalidHalfspace(f"Normal inválida: {normal}.")
        offset = float(self.offset)
        if not np.isfinite(offset):
            raise InvalidHalfspace(f"Offset inválido: {offset}.")
        normal.setflags(write=False)
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "offset", offset)

    def __eq__(self, other):
        if not isinstance(other, Halfspace):
            return NotImplemented
        return np.array_equal(self.normal, other.normal) and self.offset == other.offset

    def __hash__(self):
        return hash((self.normal.tobytes(), self.offset))


class Polytope:
    """
    Interseção ordenada de semiespaços, não vazia e limitada.

    A validação (caixa envolvente por 2d programas lineares) roda na
    construção; `validate=False` é para fatias que já têm um ponto viável
    conhecido e herdam a limitação do conjunto original.
    """

    def __init__(self, halfspaces, *, validate=True):
        hs = tuple(h if isinstance(h, Halfspace) else Halfspace(*h) for h in halfspaces)
        if not hs:
            raise UnboundedPolytope("Politopo sem semiespaços é o espaço inteiro.")
        dims = {h.normal.size for h in hs}
        if len(dims) != 1:
            raise DimensionMismatch(f"Semiespaços com dimensões diferentes: {sorted(dims)}.")
        self.halfspaces = hs
        self.A = np.vstack([h.normal for h in hs])
        self.h = np.array([h.offset for h in hs])
        self.norms = np.linalg.norm(self.A, axis=1)
        for arr in (self.A, self.h, self.norms):
            arr.setflags(write=False)
        if validate:
            # força o cálculo (e a validação) já na construção
            self.bounding_box

    @property
    def dim(self):
        return self.A.shape[1]

    def __len__(self):
        return len(self.halfspaces)

    def __repr__(self):
        return f"Polytope(dim={self.dim}, semiespacos={len(self)})"

    @cached_property
    def bounding_box(self):
        lower = np.empty(self.dim)
        upper = np.empty(self.dim)
        for k in range(self.dim):
            for sinal, destino in ((1.0, lower), (-1.0, upper)):
                c = np.zeros(self.dim)
                c[k] = sinal
                res = linprog(
                    c, A_ub=self.A, b_ub=self.h,
                    bounds=[(None, None)] * self.dim, method="highs",
                )
                if res.status == 2:
                    raise EmptyPolytope("Os semiespaços não têm ponto em comum.")
                if res.status == 3:
                    raise UnboundedPolytope(f"Politopo ilimitado ao longo do eixo {k}.")
                if res.status != 0:
                    raise GeometryError(f"linprog falhou ao sondar o eixo {k}: {res.message}")
                destino[k] = res.x[k]
        return BoxSet(lower, upper)

    def _checa_dim(self, x, nome="x"):
        x = as_vector(x, nome)
        if x.size != self.dim:
            raise DimensionMismatch(f"{nome} tem dimensão {x.size}, o politopo tem {self.dim}.")
        return x

    def slacks(self, x):
        return self.h - self.A @ self._checa_dim(x)

    def contains(self, x, tol=0.0):
        return bool(np.all(self.slacks(x) >= -tol * (1.0 + np.abs(self.h))))

    def box_support_max(self, S):
        """max_{z em S} <a_j, z> para cada semiespaço (canto escolhido pelo sinal de a_j)."""
        if S.dim != self.dim:
            raise DimensionMismatch(f"Caixa de dimensão {S.dim}, politopo de dimensão {self.dim}.")
        return np.where(self.A > 0, self.A * S.upper, self.A * S.lower).sum(axis=1)

    def contains_box(self, S, tol=0.0):
        return bool(np.all(self.box_support_max(S) <= self.h + tol * (1.0 + np.abs(self.h))))

    def sample(self, rng, count):
        """Pontos viáveis por rejeição a partir da caixa envolvente."""
        caixa = self.bounding_box
        aceitos = []
        total = 0
        lotes_vazios = 0
        while total < count:
            candidatos = rng.uniform(caixa.lower, caixa.upper, size=(LOTE_AMOSTRAGEM, self.dim))
            ok = np.all(candidatos @ self.A.T <= self.h, axis=1)
            if not np.any(ok):
                lotes_vazios += 1
                if lotes_vazios > 1000:
                    raise GeometryError("Amostragem por rejeição não encontrou pontos (politopo sem volume?).")
                continue
            aceitos.append(candidatos[ok])
            total += int(ok.sum())
        return np.vstack(aceitos)[:count]


def dist_point_boundary(x, C, tol=1e-9):
    if not C.contains(x, tol):
        raise NotContained(f"Ponto {x} fora do politopo.")
    return float(max(np.min(C.slacks(x) / C.norms), 0.0))


def dist_box_boundary(S, C, tol=1e-9):
    if not C.contains_box(S, tol):
        raise NotContained(f"{S!r} não está contida no politopo.")
    return float(max(np.min((C.h - C.box_support_max(S)) / C.norms), 0.0))


def ray_step_box(S, C, direction):
    """
    Maior alfa >= 0 tal que S + alfa*direction continua em C.

    Forma fechada por semiespaço: só limitam os que a direção aproxima.
    Devolve +inf se nenhum semiespaço limita.
    """
    d = as_vector(direction, "direction")
    if d.size != C.dim:
        raise DimensionMismatch(f"Direção de dimensão {d.size}, politopo de dimensão {C.dim}.")
    taxa = C.A @ d
    limitantes = taxa > 0
    if not np.any(limitantes):
        return np.inf
    folga = np.maximum(C.h - C.box_support_max(S), 0.0)
    return float(np.min(folga[limitantes] / taxa[limitantes]))


# ---------------------------------------------------------------------
# Projeção (Dykstra)
# ---------------------------------------------------------------------

def _polimento_ativo(x0, z, C, tol):
    """
    Resolve exatamente a projeção nas facetas ativas do resultado de Dykstra.
    Só aceita se o ponto é viável e os multiplicadores são >= 0.
    """
    limiar = max(1e-7, 1e3 * tol)
    ativos = np.abs(C.slacks(z)) <= limiar * (1.0 + np.abs(C.h))
    if not np.any(ativos):
        return z
    A = C.A[ativos]
    lam, *_ = np.linalg.lstsq(A @ A.T, A @ x0 - C.h[ativos], rcond=None)
    p = x0 - A.T @ lam
    if np.any(lam < -1e-12) or not C.contains(p, 1e-14) or np.linalg.norm(p - z) > limiar:
        return z
    return p


def project_polytope(x, C, tol=None, max_sweeps=None):
    """
    Projeção euclidiana em C por projeções alternadas de Dykstra,
    com polimento final nas facetas ativas.
    """
    tol = gnep_setting("DYKSTRA_TOL") if tol is None else tol
    max_sweeps = gnep_setting("DYKSTRA_MAX_SWEEPS") if max_sweeps is None else max_sweeps
    x0 = C._checa_dim(x)
    if C.contains(x0):
        return x0.copy()

    norm2 = C.norms ** 2
    incrementos = np.zeros_like(C.A)
    z = x0.copy()
    melhor, melhor_violacao = z.copy(), np.inf
    for varredura in range(1, max_sweeps + 1):
        anteriores = incrementos.copy()
        for j in range(len(C)):
            y = z + incrementos[j]
            excesso = C.A[j] @ y - C.h[j]
            z = y - (max(excesso, 0.0) / norm2[j]) * C.A[j]
            incrementos[j] = y - z
        violacao = float(max(-np.min(C.slacks(z)), 0.0))
        if violacao < melhor_violacao:
            melhor, melhor_violacao = z.copy(), violacao
        if violacao <= tol and np.max(np.abs(incrementos - anteriores)) <= tol:
            break
    else:
        logger.warning("Dykstra não convergiu em %d varreduras (violação %.3g).", max_sweeps, melhor_violacao)
        raise ProjectionDidNotConverge(
            f"Dykstra não convergiu em {max_sweeps} varreduras.", best=melhor, sweeps=max_sweeps
        )
    return _polimento_ativo(x0, z, C, tol)


# ---------------------------------------------------------------------
# Fatias por jogador
# ---------------------------------------------------------------------

def player_block(dims, i):
    inicio = int(sum(dims[:i]))
    return slice(inicio, inicio + int(dims[i]))


def slice_constraint(C, i, x_other, dims, witness=None, tol=1e-9):
    """
    Restrição do jogador i com as ações dos oponentes fixadas.

    x_other é o ponto conjunto sem as coordenadas de i. Se `witness`
    (ponto do jogador i) satisfaz a fatia, a validação por LP é dispensada.
    """
    if not 0 <= i < len(dims):
        raise DimensionMismatch(f"Jogador {i} fora do intervalo 0..{len(dims) - 1}.")
    if sum(dims) != C.dim:
        raise DimensionMismatch(f"Soma das dimensões {sum(dims)} difere de {C.dim}.")
    x_other = as_vector(x_other, "x_other") if C.dim - dims[i] > 0 else np.zeros(0)
    if x_other.size != C.dim - dims[i]:
        raise DimensionMismatch(
            f"x_other tem dimensão {x_other.size}, esperado {C.dim - dims[i]}."
        )
    bloco = player_block(dims, i)
    A_i = C.A[:, bloco]
    A_o = np.delete(C.A, np.arange(bloco.start, bloco.stop), axis=1)
    h_i = C.h - A_o @ x_other

    proprios = np.linalg.norm(A_i, axis=1) > 0
    constantes = ~proprios
    if np.any(h_i[constantes] < -tol * (1.0 + np.abs(C.h[constantes]))):
        raise EmptySlice(f"Fatia do jogador {i} vazia: restrição sem variáveis dele violada.")

    semiespacos = [Halfspace(a, b) for a, b in zip(A_i[proprios], h_i[proprios])]
    if witness is not None:
        fatia = Polytope(semiespacos, validate=False)
        if fatia.contains(witness, tol):
            return fatia
    try:
        return Polytope(semiespacos)
    except EmptyPolytope as exc:
        raise EmptySlice(f"Fatia do jogador {i} vazia dado x_other={x_other}.") from exc
