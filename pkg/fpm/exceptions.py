class EngineError(RuntimeError):
    """Erro base do motor de rodadas."""


class InvalidEngineConfig(EngineError, ValueError):
    pass


class InvalidInitialization(EngineError, ValueError):
    pass


class FeasibilityAuditFailed(EngineError):
    """
    A auditoria de uma rodada encontrou iterado ou conjunto desejado fora
    de C. Não deveria acontecer nunca com o método de ponto viável.
    """

    def __init__(self, message, round, player=None, trace=None):
        super().__init__(message)
        self.round = round
        self.player = player
        # execução parcial até a rodada que falhou
        self.trace = trace


class EmptyMovingSet(EngineError):
    pass
