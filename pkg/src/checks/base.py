from abc import ABC, abstractmethod
from typing import Any, List

from ..schemas.results import CheckResult


class BaseCheck(ABC):
    """Base class for all artifact checks"""

    @abstractmethod
    def _check(self, subject: Any) -> CheckResult:
        """
        Check the artifact

        Args:
            subject: The artifact under inspection

        Returns:
            CheckResult: The check result
        """

    def check(self, subject: Any) -> CheckResult:
        """Check the artifact, turning unexpected errors into a failed result"""
        try:
            if subject is None:
                return CheckResult(passed=False, message="Nothing to check")

            if not self.supports(subject):
                return CheckResult(passed=True, message="Check does not support this artifact")

            return self._check(subject)
        except Exception as e:
            return CheckResult(passed=False, message=f"{type(self).__name__}: {e}")

    def supports(self, subject: Any) -> bool:
        """
        Check if this check applies to the given artifact

        Args:
            subject: The artifact to inspect

        Returns:
            bool: True if the check applies, False otherwise
        """
        return True


class CheckChain:
    """Chain of checks to be executed in sequence"""

    def __init__(self, checks: List[BaseCheck]):
        self.checks = checks

    def check(self, subject: Any) -> CheckResult:
        """
        Run all checks in sequence, stopping at the first failure

        Args:
            subject: The artifact under inspection

        Returns:
            CheckResult: The combined check result
        """
        warnings = []

        for item in self.checks:
            if not item.supports(subject):
                continue

            result = item.check(subject)
            if not result.passed:
                return result

            if result.warnings:
                warnings.extend(result.warnings)

        return CheckResult(passed=True, warnings=warnings if warnings else None)
