class GeometryError(ValueError):
    """Erro base das primitivas de caixas e politopos."""


class DimensionMismatch(GeometryError):
    pass


class InvalidBox(GeometryError):
    pass


class InvalidHalfspace(GeometryError):
    pass


class NotContained(GeometryError):
    """Ponto ou caixa fora do conjunto exigido pela operação."""


class EmptyPolytope(GeometryError):
    pass


class UnboundedPolytope(GeometryError):
    pass


class EmptySlice(EmptyPolytope):
    """A fatia de um jogador ficou vazia: a jogada conjunta dos oponentes é inviável."""


class ProjectionDidNotConverge(GeometryError):
    """
    Dykstra estourou o limite de varreduras.

    Guarda o melhor iterado encontrado (menor violação) para quem quiser
    seguir com ele mesmo assim.
    """

    def __init__(self, message, best, sweeps):
        super().__init__(message)
        self.best = best
        self.sweeps = sweeps
