class GameError(ValueError):
    """Erro base das definições de jogo."""


class UnknownProblem(GameError):
    pass


class InvalidProblem(GameError):
    pass


class PlayerIndexError(GameError, IndexError):
    pass
