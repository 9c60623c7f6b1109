# -*- coding: utf-8 -*-
"""
Exceções do projeto, com o código de saída usado pelo pipeline principal.

  0 sucesso · 1 configuração/uso · 2 formato de entrada · 3 E/S
"""


class ErroTelescopio(Exception):
    """Base de todas as falhas categorizadas."""
    exit_code = 1


# ── configuração / uso ───────────────────────────────────────────────────────

class ConfigError(ErroTelescopio):
    exit_code = 1


class InvalidConfigError(ConfigError):
    """Configuração de corpus sintético inválida ou inatingível."""


class UnknownSeriesError(ConfigError):
    pass


# ── formato de entrada ───────────────────────────────────────────────────────

class InputFormatError(ErroTelescopio):
    exit_code = 2


class MissingCriticalColumnError(InputFormatError):
    def __init__(self, missing, path=None, line=1):
        self.missing = tuple(missing)
        self.path = path
        self.line = line
        onde = f"{path}:{line}: " if path else ""
        super().__init__(
            f"{onde}cabeçalho sem coluna(s) crítica(s): {', '.join(self.missing)}")


class MalformedCidrError(InputFormatError):
    pass


class DuplicatePrefixError(InputFormatError):
    pass


class NothingRetainedError(InputFormatError):
    pass


# ── E/S ──────────────────────────────────────────────────────────────────────

class InputIOError(ErroTelescopio):
    exit_code = 3

    def __init__(self, path, causa: Exception | None = None):
        self.path = path
        msg = f"falha de E/S em {path}"
        if causa is not None:
            msg += f": {causa}"
        super().__init__(msg)


# ── entradas estatísticas ────────────────────────────────────────────────────

class StatisticsInputError(ValueError):
    pass


class EmptyInputError(StatisticsInputError):
    pass


class AllZeroVolumesError(StatisticsInputError):
    pass
