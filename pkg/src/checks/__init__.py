from .base import BaseCheck, CheckChain, CheckResult

__all__ = ["BaseCheck", "CheckChain", "CheckResult"]
