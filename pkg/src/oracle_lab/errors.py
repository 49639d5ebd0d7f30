"""Exception types shared by every module."""


class OracleLabError(Exception):
    """Base class for all errors raised by oracle_lab."""


class ConfigError(OracleLabError, ValueError):
    """Invalid or inconsistent configuration."""


class DomainError(OracleLabError, ValueError):
    """Input outside the mathematical domain of an operation."""


class ContractError(OracleLabError, ValueError):
    """Caller broke a shape or length precondition."""
