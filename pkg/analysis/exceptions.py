class AnalysisError(ValueError):
    """Erro base das análises."""


class MissingConstants(AnalysisError):
    """O problema não declara constantes exigidas por uma cota."""

    def __init__(self, missing, problem_name=None):
        self.missing = list(missing)
        alvo = f" em {problem_name}" if problem_name else ""
        super().__init__(f"Constantes ausentes{alvo}: {', '.join(self.missing)}.")


class NoValidSamples(AnalysisError):
    pass


class InvalidParameter(AnalysisError):
    pass
