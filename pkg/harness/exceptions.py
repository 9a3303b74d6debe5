class ConfigurationError(ValueError):
    """Configuração de experimento inválida (formulário, arquivo de config)."""

    def __init__(self, message, errors=None):
        super().__init__(message)
        self.errors = errors or {}
